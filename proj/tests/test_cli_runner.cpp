#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "maglap/common.hpp"
#include "maglap/run_config.hpp"
#include "maglap/runner.hpp"

using namespace maglap;
namespace fs = std::filesystem;

namespace {

std::string base_json(const std::string& name = "unit", uint64_t seed = 7,
                      const std::string& outdir = "/tmp/maglap_cli_out") {
    std::ostringstream ss;
    ss << R"({
      "name": ")" << name << R"(",
      "torus": {
        "half_dim": 1,
        "resolution": 16,
        "aux_rank": 1,
        "metric": {"kind": "constant", "values": [[1, 0], [0, 1]]},
        "omega": {"kind": "constant",
                  "values": [[0, 6.283185307179586], [-6.283185307179586, 0]]}
      },
      "k_list": [2],
      "lambda": 6.283185307179586,
      "solver": {"dense_cap": 4000, "seed": )" << seed << R"(, "vectors": true},
      "output_dir": ")" << outdir << R"("
    })";
    return ss.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing fills every field") {
    RunConfig cfg = parse_run_config(base_json());
    CHECK(cfg.name == "unit");
    CHECK(cfg.torus.half_dim == 1);
    CHECK(cfg.torus.resolution == 16);
    REQUIRE(cfg.k_list.size() == 1);
    CHECK(cfg.k_list[0] == 2);
    CHECK(cfg.lambda == doctest::Approx(kTwoPi));
    CHECK(cfg.solver.seed == 7);
    CHECK(cfg.solver.want_vectors);
    CHECK(cfg.output_dir == "/tmp/maglap_cli_out");
    CHECK(!cfg.canonical.empty());
    // Potential defaults to the zero matrix of the aux rank.
    CHECK(cfg.torus.potential.rows == 1);
}

TEST_CASE("config schema violations carry the field path") {
    CHECK_THROWS_WITH_AS(parse_run_config("not json"), doctest::Contains("config"), Error);
    CHECK_THROWS_WITH_AS(parse_run_config("[1,2]"), doctest::Contains("object"), Error);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"k_list": [1]})"), doctest::Contains("torus"),
                         Error);

    nlohmann::json j = nlohmann::json::parse(base_json());
    nlohmann::json bad = j;
    bad["torus"]["half_dim"] = 3;
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()), doctest::Contains("half_dim"), Error);

    bad = j;
    bad["torus"].erase("omega");
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()), doctest::Contains("omega"), Error);

    bad = j;
    bad["torus"]["metric"]["values"] = {{1, 0, 0}, {0, 1, 0}};
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()), doctest::Contains("metric"), Error);

    bad = j;
    bad["k_list"] = {1.5};
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()), doctest::Contains("k_list"), Error);

    bad = j;
    bad["intervals"] = {{2.0, 1.0}};
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()), doctest::Contains("lo < hi"), Error);

    bad = j;
    bad["solver"]["tol"] = 0.0;
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()), doctest::Contains("tol"), Error);

    bad = j;
    bad["per_k_resolution"] = -1;
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()), doctest::Contains("per_k_resolution"),
                         Error);
}

TEST_CASE("config hash covers the numbers and nothing else") {
    RunConfig a = parse_run_config(base_json("first"));
    RunConfig b = parse_run_config(base_json("second"));
    CHECK(config_hash(a) == config_hash(b));  // name does not affect results

    RunConfig c = parse_run_config(base_json("first", 8));
    CHECK(config_hash(a) != config_hash(c));  // the seed does

    // Key order in the source text does not matter.
    nlohmann::json j = nlohmann::json::parse(base_json());
    RunConfig d = parse_run_config(j.dump());
    CHECK(config_hash(a) == config_hash(d));
}

TEST_CASE("resolution assignment and the preflight rule") {
    RunConfig cfg = parse_run_config(base_json());
    CHECK(resolution_for(cfg, 5) == 16);  // fixed grid
    cfg.per_k_resolution = 4;
    CHECK(resolution_for(cfg, 5) == 20);

    GeometryField geom = geometry_for(parse_run_config(base_json()), 2);
    CHECK(geom.N == 16);
    check_resolution(geom, 2);  // 16 covers k = 2
    CHECK_THROWS_WITH_AS(check_resolution(geom, 16), doctest::Contains("six points"), Error);
}

TEST_CASE("preflight rejects cutoffs on the envelope") {
    RunConfig ok = parse_run_config(base_json());
    preflight(ok);

    nlohmann::json j = nlohmann::json::parse(base_json());
    j["lambda"] = kPi;  // dead on the ground level
    RunConfig bad = parse_run_config(j.dump());
    CHECK_THROWS_WITH_AS(preflight(bad), doctest::Contains("envelope"), Error);

    j = nlohmann::json::parse(base_json());
    j["k_list"] = nlohmann::json::array();
    CHECK_THROWS_WITH_AS(preflight(parse_run_config(j.dump())), doctest::Contains("empty"),
                         Error);
}

TEST_CASE("solve cutoff prefers lambda then the widest interval") {
    RunConfig cfg = parse_run_config(base_json());
    CHECK(solve_cutoff(cfg) == doctest::Approx(kTwoPi));
    cfg.lambda = 0.0;
    cfg.intervals = {{1.0, 5.0}, {8.0, 11.0}};
    CHECK(solve_cutoff(cfg) == doctest::Approx(11.0));
    cfg.intervals.clear();
    CHECK_THROWS_WITH_AS(solve_cutoff(cfg), doctest::Contains("cutoff"), Error);
}

TEST_CASE("manifest records stages as json") {
    RunManifest m;
    m.name = "demo";
    m.hash = 42;
    m.add("solve", "ok", 1.5, {"eig.csv"});
    m.add("weyl", "cached", 0.0);
    const nlohmann::json j = nlohmann::json::parse(m.to_json());
    CHECK(j.at("name") == "demo");
    CHECK(j.at("config_hash") == "2a");  // hex
    CHECK(j.at("format_version") == 1);
    REQUIRE(j.at("stages").size() == 2);
    CHECK(j.at("stages")[0].at("stage") == "solve");
    CHECK(j.at("stages")[0].at("artifacts")[0] == "eig.csv");
    CHECK(j.at("stages")[1].at("status") == "cached");

    const std::string path = "/tmp/maglap_manifest_test.json";
    m.write(path);
    nlohmann::json back = nlohmann::json::parse(slurp(path));
    CHECK(back == j);
    fs::remove(path);
}

TEST_CASE("solver results are cached by config hash") {
    const std::string out = "/tmp/maglap_cli_cache_test";
    fs::remove_all(out);
    RunContext ctx(parse_run_config(base_json("cache", 7, out)));
    auto [first, hit1] = solve_for_k(ctx, 2, true);
    CHECK_FALSE(hit1);
    CHECK(fs::exists(out + "/cache/eig_k2_vec.bin"));
    auto [second, hit2] = solve_for_k(ctx, 2, true);
    CHECK(hit2);
    REQUIRE(first.eigenvalues.size() == second.eigenvalues.size());
    for (size_t i = 0; i < first.eigenvalues.size(); ++i)
        CHECK(first.eigenvalues[i] == second.eigenvalues[i]);

    // A different seed means a different hash: the cache must miss.
    RunContext other(parse_run_config(base_json("cache", 8, out)));
    auto [third, hit3] = solve_for_k(other, 2, true);
    CHECK_FALSE(hit3);
    fs::remove_all(out);
}

TEST_CASE("spectrum command writes artifacts and reuses the cache") {
    const std::string out = "/tmp/maglap_cli_spectrum_test";
    fs::remove_all(out);
    RunContext ctx(parse_run_config(base_json("spec", 7, out)));
    cmd_spectrum(ctx);
    REQUIRE(ctx.manifest.stages.size() == 1);
    CHECK(ctx.manifest.stages[0].stage == "spectrum_k2");
    CHECK(ctx.manifest.stages[0].status == "ok");
    const std::string csv = out + "/eig_k2.csv";
    REQUIRE(fs::exists(csv));
    CHECK(slurp(csv).size() > 0);

    cmd_spectrum(ctx);
    REQUIRE(ctx.manifest.stages.size() == 2);
    CHECK(ctx.manifest.stages[1].status == "cached");
    fs::remove_all(out);
}
