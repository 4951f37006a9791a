#include "maglap/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "maglap/model_spectrum.hpp"

namespace maglap {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw Error("BadConfig", where + ": " + what);
}

cdouble parse_entry(const json& j, const std::string& where) {
    if (j.is_number()) return cdouble(j.get<double>(), 0.0);
    if (j.is_object()) {
        double re = j.value("re", 0.0);
        double im = j.value("im", 0.0);
        return cdouble(re, im);
    }
    bad(where, "matrix entry must be a number or {re, im}");
}

FieldSpec parse_field(const json& j, int dim, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    std::string kind = j.value("kind", std::string("constant"));
    if (kind == "constant") {
        if (!j.contains("values") || !j["values"].is_array()) bad(where, "constant field needs a values matrix");
        const json& rowsj = j["values"];
        int rows = static_cast<int>(rowsj.size());
        if (rows == 0) bad(where, "empty values matrix");
        int cols = static_cast<int>(rowsj[0].size());
        MatrixXcd m(rows, cols);
        for (int i = 0; i < rows; ++i) {
            if (!rowsj[i].is_array() || static_cast<int>(rowsj[i].size()) != cols)
                bad(where, "ragged values matrix");
            for (int c = 0; c < cols; ++c)
                m(i, c) = parse_entry(rowsj[i][c], where);
        }
        return FieldSpec::make_constant(m);
    }
    if (kind == "expr") {
        if (!j.contains("entries") || !j["entries"].is_array()) bad(where, "expr field needs an entries matrix");
        const json& rowsj = j["entries"];
        int rows = static_cast<int>(rowsj.size());
        if (rows == 0) bad(where, "empty entries matrix");
        int cols = static_cast<int>(rowsj[0].size());
        std::vector<std::vector<std::string>> entries(rows);
        for (int i = 0; i < rows; ++i) {
            if (!rowsj[i].is_array() || static_cast<int>(rowsj[i].size()) != cols)
                bad(where, "ragged entries matrix");
            for (int c = 0; c < cols; ++c) {
                if (!rowsj[i][c].is_string()) bad(where, "expr entries must be strings");
                entries[i].push_back(rowsj[i][c].get<std::string>());
            }
        }
        try {
            return FieldSpec::make_expr(rows, cols, entries, dim);
        } catch (const Error& e) {
            bad(where, e.what());
        }
    }
    bad(where, "unknown field kind '" + kind + "' (constant | expr)");
}

json field_to_json(const FieldSpec& f) {
    json j;
    if (f.kind == FieldSpec::Kind::Expr) {
        j["kind"] = "expr";
        json rows = json::array();
        for (const auto& row : f.exprs) {
            json r = json::array();
            for (const auto& e : row) r.push_back(e.text());
            rows.push_back(r);
        }
        j["entries"] = rows;
        return j;
    }
    j["kind"] = "constant";
    json rows = json::array();
    for (int i = 0; i < f.rows; ++i) {
        json r = json::array();
        for (int c = 0; c < f.cols; ++c) {
            cdouble v = f.constant(i, c);
            if (v.imag() == 0.0)
                r.push_back(v.real());
            else
                r.push_back(json{{"re", v.real()}, {"im", v.imag()}});
        }
        rows.push_back(r);
    }
    j["values"] = rows;
    return j;
}

// Canonical form: every numerics-relevant field present, defaults applied,
// keys sorted (nlohmann objects iterate in key order).
json canonical_json(const RunConfig& cfg) {
    json t;
    t["half_dim"] = cfg.torus.half_dim;
    t["resolution"] = cfg.torus.resolution;
    t["aux_rank"] = cfg.torus.aux_rank;
    t["metric"] = field_to_json(cfg.torus.metric);
    t["omega"] = field_to_json(cfg.torus.omega);
    t["potential"] = field_to_json(cfg.torus.potential);

    json s;
    s["dense_cap"] = cfg.solver.dense_cap;
    s["tol"] = cfg.solver.tol;
    s["seed"] = cfg.solver.seed;
    s["vectors"] = cfg.solver.want_vectors;
    s["max_restarts"] = cfg.solver.max_restarts;
    s["block_len"] = cfg.solver.block_len;

    json root;
    root["torus"] = t;
    root["k_list"] = cfg.k_list;
    root["lambda"] = cfg.lambda;
    json ivals = json::array();
    for (auto [lo, hi] : cfg.intervals) ivals.push_back(json::array({lo, hi}));
    root["intervals"] = ivals;
    root["per_k_resolution"] = cfg.per_k_resolution;
    root["solver"] = s;
    return root;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        bad("config", e.what());
    }
    if (!j.is_object()) bad("config", "top level must be an object");

    RunConfig cfg;
    cfg.name = j.value("name", std::string("run"));

    if (!j.contains("torus") || !j["torus"].is_object()) bad("torus", "missing");
    const json& t = j["torus"];
    cfg.torus.half_dim = t.value("half_dim", 1);
    if (cfg.torus.half_dim != 1 && cfg.torus.half_dim != 2) bad("torus.half_dim", "must be 1 or 2");
    cfg.torus.resolution = t.value("resolution", 16);
    if (cfg.torus.resolution < 2) bad("torus.resolution", "must be at least 2");
    cfg.torus.aux_rank = t.value("aux_rank", 1);
    if (cfg.torus.aux_rank < 1) bad("torus.aux_rank", "must be at least 1");
    int dim = 2 * cfg.torus.half_dim;
    int r = cfg.torus.aux_rank;
    if (!t.contains("metric")) bad("torus.metric", "missing");
    if (!t.contains("omega")) bad("torus.omega", "missing");
    cfg.torus.metric = parse_field(t["metric"], dim, "torus.metric");
    cfg.torus.omega = parse_field(t["omega"], dim, "torus.omega");
    if (t.contains("potential")) {
        cfg.torus.potential = parse_field(t["potential"], dim, "torus.potential");
    } else {
        cfg.torus.potential = FieldSpec::make_constant(MatrixXcd::Zero(r, r));
    }
    if (cfg.torus.metric.rows != dim || cfg.torus.metric.cols != dim) bad("torus.metric", "shape must be 2n x 2n");
    if (cfg.torus.omega.rows != dim || cfg.torus.omega.cols != dim) bad("torus.omega", "shape must be 2n x 2n");
    if (cfg.torus.potential.rows != r || cfg.torus.potential.cols != r) bad("torus.potential", "shape must be r x r");

    if (j.contains("k_list")) {
        if (!j["k_list"].is_array()) bad("k_list", "must be an array of integers");
        for (const auto& e : j["k_list"]) {
            if (!e.is_number_integer()) bad("k_list", "entries must be integers");
            int k = e.get<int>();
            if (k < 0) bad("k_list", "entries must be nonnegative");
            cfg.k_list.push_back(k);
        }
    }

    cfg.lambda = j.value("lambda", 0.0);
    if (j.contains("intervals")) {
        if (!j["intervals"].is_array()) bad("intervals", "must be an array of [lo, hi] pairs");
        for (const auto& e : j["intervals"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                bad("intervals", "each entry must be [lo, hi]");
            double lo = e[0].get<double>(), hi = e[1].get<double>();
            if (!(lo < hi)) bad("intervals", "need lo < hi");
            cfg.intervals.emplace_back(lo, hi);
        }
    }

    cfg.per_k_resolution = j.value("per_k_resolution", 0);
    if (cfg.per_k_resolution < 0) bad("per_k_resolution", "must be nonnegative");

    if (j.contains("solver")) {
        const json& s = j["solver"];
        if (!s.is_object()) bad("solver", "must be an object");
        cfg.solver.dense_cap = s.value("dense_cap", cfg.solver.dense_cap);
        cfg.solver.tol = s.value("tol", cfg.solver.tol);
        cfg.solver.seed = s.value("seed", cfg.solver.seed);
        cfg.solver.threads = s.value("threads", cfg.solver.threads);
        cfg.solver.want_vectors = s.value("vectors", cfg.solver.want_vectors);
        cfg.solver.max_restarts = s.value("max_restarts", cfg.solver.max_restarts);
        cfg.solver.block_len = s.value("block_len", cfg.solver.block_len);
        if (cfg.solver.tol <= 0) bad("solver.tol", "must be positive");
        if (cfg.solver.dense_cap < 1) bad("solver.dense_cap", "must be positive");
        if (cfg.solver.threads < 1) bad("solver.threads", "must be positive");
    }

    if (j.contains("analyses")) {
        if (!j["analyses"].is_array()) bad("analyses", "must be an array of strings");
        for (const auto& e : j["analyses"]) {
            if (!e.is_string()) bad("analyses", "entries must be strings");
            cfg.analyses.push_back(e.get<std::string>());
        }
    }

    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.canonical = canonical_json(cfg).dump();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("BadConfig", "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

uint64_t config_hash(const RunConfig& cfg) {
    std::string canon = cfg.canonical.empty() ? canonical_json(cfg).dump() : cfg.canonical;
    canon += "|format:eigencache1,section1|v1";
    return fnv1a64(canon);
}

int resolution_for(const RunConfig& cfg, int k) {
    if (cfg.per_k_resolution == 0) return cfg.torus.resolution;
    return cfg.per_k_resolution * std::max(1, k);
}

void check_resolution(const GeometryField& geom, int k) {
    if (k <= 0) return;
    double maxB = max_frequency(geom);
    double need = 6.0 * std::sqrt(static_cast<double>(k) * maxB / kTwoPi);
    if (static_cast<double>(geom.N) + 1e-9 < need) {
        std::ostringstream ss;
        ss << "grid " << geom.N << " per axis is below " << need
           << " (six points per magnetic length at k=" << k << ")";
        throw Error("ResolutionTooCoarse", ss.str());
    }
}

void preflight(const RunConfig& cfg) {
    if (cfg.k_list.empty()) throw Error("UsageError", "k list is empty");
    int kmax = *std::max_element(cfg.k_list.begin(), cfg.k_list.end());

    TorusConfig tc = cfg.torus;
    tc.resolution = resolution_for(cfg, kmax);
    GeometryField geom = build_geometry(tc);
    check_resolution(geom, kmax);

    double top = cfg.lambda;
    for (auto [lo, hi] : cfg.intervals) top = std::max(top, hi);
    EnvelopeResult env = sigma_envelope(geom, top + 1.0);
    double margin = std::max(3.0 * env.grid_modulus, 1e-8);

    auto clear_of_sigma = [&](double x, const std::string& what) {
        double d = env.sigma.distance(x);
        if (d < margin) {
            std::ostringstream ss;
            ss << what << " = " << x << " is within " << d
               << " of the model spectrum envelope (needs " << margin << ")";
            throw Error("PreflightFailed", ss.str());
        }
    };
    if (cfg.lambda > 0.0) clear_of_sigma(cfg.lambda, "lambda");
    for (auto [lo, hi] : cfg.intervals) {
        clear_of_sigma(lo, "interval endpoint");
        clear_of_sigma(hi, "interval endpoint");
    }
}

void RunManifest::add(const std::string& stage, const std::string& status, double seconds,
                      std::vector<std::string> artifacts) {
    stages.push_back(StageRecord{stage, status, seconds, std::move(artifacts)});
}

std::string RunManifest::to_json() const {
    json j;
    j["name"] = name;
    std::ostringstream hs;
    hs << std::hex << hash;
    j["config_hash"] = hs.str();
    j["format_version"] = format_version;
    json st = json::array();
    for (const auto& s : stages) {
        json e;
        e["stage"] = s.stage;
        e["status"] = s.status;
        e["seconds"] = s.seconds;
        e["artifacts"] = s.artifacts;
        st.push_back(e);
    }
    j["stages"] = st;
    return j.dump(2);
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("IoError", "cannot write manifest: " + path);
    out << to_json() << "\n";
}

}  // namespace maglap
