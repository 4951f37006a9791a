#include "maglap/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "maglap/acceptance.hpp"
#include "maglap/chern_rr.hpp"
#include "maglap/lattice_operator.hpp"
#include "maglap/symbol_calculus.hpp"

namespace maglap {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// what() carries "Code: message"; keep just the message for re-prefixing.
std::string strip_code(const Error& e) {
    std::string w = e.what();
    std::string lead = e.code() + ": ";
    if (w.rfind(lead, 0) == 0) return w.substr(lead.size());
    return w;
}

void write_text(const std::string& path, const std::string& body) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot open " + path);
    out << body;
    if (!out) throw Error("IoError", "short write to " + path);
}

// Runs one manifest stage; failures are recorded before rethrowing with the
// stage name attached.
class Stage {
public:
    Stage(RunContext& ctx, std::string name)
        : ctx_(ctx), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}

    void artifact(const std::string& path) { artifacts_.push_back(path); }
    void served_from_cache() { cached_ = true; }

    template <typename Fn>
    void run(Fn&& body) {
        try {
            body(*this);
        } catch (const Error& e) {
            finish("failed");
            throw Error(e.code(), name_ + ": " + strip_code(e));
        } catch (const std::exception& e) {
            finish("failed");
            throw Error("StageFailed", name_ + ": " + std::string(e.what()));
        }
        finish(cached_ ? "cached" : "ok");
    }

private:
    void finish(const std::string& status) {
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        ctx_.manifest.add(name_, status, secs, artifacts_);
        ctx_.manifest.write(ctx_.out_dir + "/manifest.json");
    }

    RunContext& ctx_;
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
    std::vector<std::string> artifacts_;
    bool cached_ = false;
};

int max_k(const RunConfig& cfg) {
    if (cfg.k_list.empty()) throw Error("UsageError", "k list is empty");
    return *std::max_element(cfg.k_list.begin(), cfg.k_list.end());
}

// Degree of the flux form on each coordinate plane; integer for any
// admissible field. Only the n = 1 value feeds Riemann-Roch.
long long flux_degree(const GeometryField& geom) {
    double tot = 0.0;
    const int64_t S = geom.sites();
    for (int64_t s = 0; s < S; ++s) tot += geom.plaq_flux(s, 0, 1);
    return std::llround(tot / kTwoPi);
}

double min_frequency(const GeometryField& geom) {
    double lo = std::numeric_limits<double>::infinity();
    const int64_t S = geom.sites();
    for (int64_t s = 0; s < S; ++s) {
        PointFrame fr = frame_at(geom, s);
        lo = std::min(lo, fr.B.minCoeff());
    }
    return lo;
}

// Oscillator cap large enough that every site's model levels up to lam are
// representable, with two levels of headroom.
int cap_for(const GeometryField& geom, double lam) {
    double lo = min_frequency(geom);
    int cap = static_cast<int>(std::ceil(lam / std::max(lo, 1e-12))) + 2;
    return std::min(cap, 64);
}

std::string eig_csv(const EigenSystem& es) {
    std::ostringstream out;
    out.precision(17);
    out << "index,eigenvalue,residual\n";
    for (size_t i = 0; i < es.eigenvalues.size(); ++i) {
        double res = i < es.residuals.size() ? es.residuals[i] : 0.0;
        out << i << "," << es.eigenvalues[i] << "," << res << "\n";
    }
    return out.str();
}

json cluster_json(const ClusterReport& rep) {
    json comps = json::array();
    for (const auto& c : rep.components)
        comps.push_back({{"lo", c.lo},
                         {"hi", c.hi},
                         {"count", c.count},
                         {"min_eig", c.min_eig},
                         {"max_eig", c.max_eig},
                         {"mean_eig", c.mean_eig},
                         {"max_dist", c.max_dist}});
    return json{{"k", rep.k},
                {"lambda", rep.lambda},
                {"delta", rep.delta},
                {"total", rep.total},
                {"orphans", rep.orphans},
                {"components", comps}};
}

}  // namespace

RunContext::RunContext(RunConfig c) : cfg(std::move(c)) {
    hash = config_hash(cfg);
    out_dir = cfg.output_dir;
    manifest.name = cfg.name;
    manifest.hash = hash;
    fs::create_directories(out_dir);
}

GeometryField geometry_for(const RunConfig& cfg, int k) {
    TorusConfig tc = cfg.torus;
    tc.resolution = resolution_for(cfg, k);
    return build_geometry(tc);
}

double solve_cutoff(const RunConfig& cfg) {
    double top = cfg.lambda;
    for (const auto& iv : cfg.intervals) top = std::max(top, iv.second);
    if (top <= 0.0) throw Error("UsageError", "no lambda cutoff and no intervals in config");
    return top;
}

std::pair<EigenSystem, bool> solve_for_k(RunContext& ctx, int k, bool want_vectors) {
    if (k < 1) throw Error("UsageError", "spectral runs need k >= 1");
    GeometryField geom = geometry_for(ctx.cfg, k);
    check_resolution(geom, k);
    const double cut = solve_cutoff(ctx.cfg);

    EigenCacheKey key;
    key.config_hash = ctx.hash;
    key.k = k;
    key.N = geom.N;
    key.lambda = cut;
    key.tol = ctx.cfg.solver.tol;
    key.seed = ctx.cfg.solver.seed;
    key.want_vectors = want_vectors;

    std::ostringstream name;
    name << ctx.out_dir << "/cache/eig_k" << k << (want_vectors ? "_vec" : "_val") << ".bin";
    const std::string path = name.str();
    if (auto hit = load_eigen_cache(path, key)) return {std::move(*hit), true};

    GaugeLattice gauge = build_gauge(geom, k, GaugeStyle::LandauX);
    SparseHermitian H = assemble_laplacian(geom, gauge, k);
    SolverOptions opts = ctx.cfg.solver;
    opts.want_vectors = want_vectors;
    EigenSystem es = solve_low_spectrum(H, k, cut, opts);
    fs::create_directories(ctx.out_dir + "/cache");
    save_eigen_cache(path, key, es, geom.r);
    return {std::move(es), false};
}

void cmd_model(RunContext& ctx) {
    Stage stage(ctx, "model");
    stage.run([&](Stage& st) {
        const double top = solve_cutoff(ctx.cfg);
        GeometryField geom = geometry_for(ctx.cfg, max_k(ctx.cfg));
        EnvelopeResult env = sigma_envelope(geom, top);

        std::ostringstream sig;
        sig.precision(17);
        sig << "lo,hi\n";
        for (const auto& c : env.sigma.components()) sig << c.first << "," << c.second << "\n";
        write_text(ctx.out_dir + "/sigma.csv", sig.str());
        st.artifact("sigma.csv");

        std::ostringstream wd;
        wd.precision(17);
        wd << "lambda,v\n";
        const int grid = 200;
        for (int i = 0; i <= grid; ++i) {
            double lam = top * i / grid;
            wd << lam << "," << weyl_density(geom, lam) << "\n";
        }
        write_text(ctx.out_dir + "/weyl_density.csv", wd.str());
        st.artifact("weyl_density.csv");

        json pts = json::array();
        const int64_t S = geom.sites();
        for (int64_t s : {int64_t(0), S / 3, (2 * S) / 3}) {
            PointFrame fr = frame_at(geom, s);
            json p;
            p["site"] = s;
            p["coords"] = geom.site_point(s);
            p["B"] = std::vector<double>(fr.B.data(), fr.B.data() + fr.B.size());
            p["V_eigs"] = std::vector<double>(fr.Veig.data(), fr.Veig.data() + fr.Veig.size());
            p["rho_L"] = fr.rhoL;
            p["model_levels"] = sigma_point(fr, top);
            pts.push_back(std::move(p));
        }
        write_text(ctx.out_dir + "/points.json", pts.dump(2) + "\n");
        st.artifact("points.json");
    });
}

void cmd_spectrum(RunContext& ctx) {
    preflight(ctx.cfg);
    for (int k : ctx.cfg.k_list) {
        Stage stage(ctx, "spectrum_k" + std::to_string(k));
        stage.run([&](Stage& st) {
            auto [es, cached] = solve_for_k(ctx, k, ctx.cfg.solver.want_vectors);
            if (cached) st.served_from_cache();
            std::string name = "eig_k" + std::to_string(k) + ".csv";
            write_text(ctx.out_dir + "/" + name, eig_csv(es));
            st.artifact(name);
        });
    }
}

void cmd_clusters(RunContext& ctx) {
    preflight(ctx.cfg);
    const double cut = solve_cutoff(ctx.cfg);
    for (int k : ctx.cfg.k_list) {
        Stage stage(ctx, "clusters_k" + std::to_string(k));
        stage.run([&](Stage& st) {
            auto [es, cached] = solve_for_k(ctx, k, ctx.cfg.solver.want_vectors);
            if (cached) st.served_from_cache();
            GeometryField geom = geometry_for(ctx.cfg, k);
            EnvelopeResult env = sigma_envelope(geom, cut);
            ClusterReport rep =
                detect_clusters(es, env.sigma, cut, default_cluster_delta(geom, k));
            json out = cluster_json(rep);

            if (geom.n == 1) {
                const long long d = flux_degree(geom);
                std::vector<long long> rr;
                json bundles = json::array();
                for (const auto& c : rep.components) {
                    ProjectorField F =
                        cluster_bundle(geom, c.lo, c.hi, cap_for(geom, c.hi + 1.0));
                    ChernData cd = fhs_chern(F);
                    rr.push_back(riemann_roch(k, d, F));
                    bundles.push_back({{"lo", c.lo},
                                       {"hi", c.hi},
                                       {"rank", cd.rank},
                                       {"c1", cd.c1},
                                       {"rr", rr.back()}});
                }
                RrCheck chk = counting_vs_rr(rep, rr);
                out["riemann_roch"] = {{"degree", d},
                                       {"predicted", chk.predicted},
                                       {"observed", chk.observed},
                                       {"pass", chk.pass},
                                       {"bundles", bundles}};
            }

            std::string name = "clusters_k" + std::to_string(k) + ".json";
            write_text(ctx.out_dir + "/" + name, out.dump(2) + "\n");
            st.artifact(name);
        });
    }
}

void cmd_weyl(RunContext& ctx) {
    preflight(ctx.cfg);
    const double cut = solve_cutoff(ctx.cfg);
    Stage stage(ctx, "weyl");
    stage.run([&](Stage& st) {
        std::ostringstream glob;
        glob.precision(17);
        glob << "k,lambda,count,v,ratio,valid\n";
        std::ostringstream loc;
        loc.precision(17);
        loc << "k,site,a,b,raw,scaled,predicted\n";

        bool any_cached = true;
        for (int k : ctx.cfg.k_list) {
            auto [es, cached] = solve_for_k(ctx, k, true);
            any_cached = any_cached && cached;
            GeometryField geom = geometry_for(ctx.cfg, k);
            EnvelopeResult env = sigma_envelope(geom, cut);
            WeylRatio wr = global_weyl(es, geom, env.sigma, ctx.cfg.lambda > 0 ? ctx.cfg.lambda : cut);
            glob << k << "," << (ctx.cfg.lambda > 0 ? ctx.cfg.lambda : cut) << "," << wr.count
                 << "," << wr.v << "," << wr.ratio << "," << (wr.valid ? 1 : 0) << "\n";

            const int64_t S = geom.sites();
            for (const auto& iv : ctx.cfg.intervals) {
                for (int64_t s : {int64_t(0), S / 5, (2 * S) / 5, (3 * S) / 5, (4 * S) / 5}) {
                    LocalWeyl lw = local_weyl(es, geom, s, iv.first, iv.second);
                    loc << k << "," << s << "," << iv.first << "," << iv.second << "," << lw.raw
                        << "," << lw.scaled << "," << lw.predicted << "\n";
                }
            }
        }
        if (any_cached) st.served_from_cache();
        write_text(ctx.out_dir + "/weyl_global.csv", glob.str());
        st.artifact("weyl_global.csv");
        write_text(ctx.out_dir + "/weyl_local.csv", loc.str());
        st.artifact("weyl_local.csv");
    });
}

void cmd_kernel(RunContext& ctx) {
    preflight(ctx.cfg);
    if (ctx.cfg.intervals.empty())
        throw Error("UsageError", "kernel: config has no intervals");
    for (int k : ctx.cfg.k_list) {
        Stage stage(ctx, "kernel_k" + std::to_string(k));
        stage.run([&](Stage& st) {
            auto [es, cached] = solve_for_k(ctx, k, true);
            if (cached) st.served_from_cache();
            GeometryField geom = geometry_for(ctx.cfg, k);
            std::vector<int> center(geom.dim(), geom.N / 2);
            const int64_t x_site = geom.site_index(center);
            const double maxB = max_frequency(geom);
            int radius = static_cast<int>(
                std::ceil(3.0 * geom.N * std::sqrt(kTwoPi / (double(k) * maxB))));
            radius = std::min(radius, geom.N / 2 - 1);

            json fits = json::array();
            int idx = 0;
            for (const auto& iv : ctx.cfg.intervals) {
                KernelSlice slice =
                    projector_kernel_slice(es, geom, iv.first, iv.second, x_site, 0, radius);
                std::ostringstream csv;
                csv.precision(17);
                csv << "t,eu,sq,value\n";
                for (size_t i = 0; i < slice.value.size(); ++i)
                    csv << slice.t[i] << "," << slice.eu[i] << "," << slice.sq[i] << ","
                        << slice.value[i] << "\n";
                std::string name =
                    "kernel_k" + std::to_string(k) + "_i" + std::to_string(idx) + ".csv";
                write_text(ctx.out_dir + "/" + name, csv.str());
                st.artifact(name);

                GaussianFit fit = gaussian_profile_fit(slice);
                double scale = std::pow(kTwoPi / double(k), geom.n);
                fits.push_back({{"k", k},
                                {"lo", iv.first},
                                {"hi", iv.second},
                                {"c", fit.c},
                                {"log_peak", fit.log_peak},
                                {"residual", fit.residual},
                                {"used", fit.used},
                                {"peak", slice.peak},
                                {"scaled_peak", scale * slice.peak}});
                ++idx;
            }
            std::string fname = "kernel_fits_k" + std::to_string(k) + ".json";
            write_text(ctx.out_dir + "/" + fname, fits.dump(2) + "\n");
            st.artifact(fname);
        });
    }
}

void cmd_chern(RunContext& ctx) {
    Stage stage(ctx, "chern");
    stage.run([&](Stage& st) {
        if (ctx.cfg.intervals.empty())
            throw Error("UsageError", "chern: config has no intervals");
        GeometryField geom = geometry_for(ctx.cfg, max_k(ctx.cfg));
        json rows = json::array();
        for (const auto& iv : ctx.cfg.intervals) {
            ProjectorField F =
                cluster_bundle(geom, iv.first, iv.second, cap_for(geom, iv.second + 1.0));
            ChernData cd = fhs_chern(F);
            double bq = berry_chern_quadrature(F);
            rows.push_back({{"lo", iv.first},
                            {"hi", iv.second},
                            {"rank", cd.rank},
                            {"c1", cd.c1},
                            {"raw", cd.raw},
                            {"berry", bq}});
        }
        write_text(ctx.out_dir + "/chern.json", rows.dump(2) + "\n");
        st.artifact("chern.json");
    });
}

bool cmd_accept(RunContext& ctx) {
    Stage stage(ctx, "accept");
    bool ok = false;
    stage.run([&](Stage& st) {
        AcceptanceReport rep = run_acceptance(ctx.out_dir, ctx.cfg.solver, &std::cout);
        write_text(ctx.out_dir + "/acceptance.json", rep.to_json() + "\n");
        st.artifact("acceptance.json");
        ok = rep.all_pass();
    });
    return ok;
}

}  // namespace maglap
