#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "app.hpp"

using namespace rsde;
namespace fs = std::filesystem;

namespace {

struct Cli {
    int code;
    std::string out, err;
};

Cli cli(std::vector<std::string> args) {
    args.insert(args.begin(), "rsde_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rsde_app_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("catalog listing") {
    const auto a = cli({});
    CHECK(a.code == 0);
    for (const char* key : {"sign", "ou", "wiener-integral-b2", "exp-quartic", "holder-scan"})
        CHECK(a.out.find(key) != std::string::npos);
    CHECK(cli({}).out == a.out);
    CHECK(list_catalog() == a.out);
}

TEST_CASE("unknown subcommand prints usage") {
    const auto r = cli({"frobnicate"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(cli({"simulate", "--paths", "0"}).code == 2);
}

TEST_CASE("strict config parsing") {
    SUBCASE("unknown key names the key and line") {
        const auto dir = scratch("badkey");
        const auto cfg = write_file(dir, "c.yaml", "problem:\n  x0: 1.0\n  drfit: ou\n");
        const auto r = cli({"simulate", "--config", cfg.string(), "--out", (dir / "o").string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("problem.drfit") != std::string::npos);
        CHECK(r.err.find(":3:") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("params:\n  weight: gaussian\n", "simulate"), ConfigError);
    CHECK_THROWS_AS(parse_config("problem:\n  drift: nope\n", "simulate"), ConfigError);
    CHECK_THROWS_AS(parse_config("problem:\n  drift: {key: ou, params: {b: 1}}\n", "simulate"), ConfigError);
    CHECK_THROWS_AS(parse_config("problem:\n  x0: abc\n", "simulate"), ConfigError);
    CHECK_THROWS_AS(parse_config("ensemble:\n  paths: 0\n", "simulate"), ConfigError);
    CHECK_THROWS_AS(parse_config("diagnostic: constants\n", "simulate"), ConfigError);
    CHECK_THROWS_AS(parse_config("problem: [1, 2\n", "simulate"), ConfigError);
    try {
        parse_config("ensemble:\n  seed: 3\n  colour: red\n", "simulate", "x.yaml");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("ensemble.colour") != std::string::npos);
    }
    const auto c = parse_config(
        "problem:\n  drift: {key: sign, params: {k: 2}}\n  level: 50\n  sigma: [1, 0.5]\n"
        "  grid: {T: 0.5, steps: 20}\nensemble: {paths: 7, seed: 9}\nparams:\n  weight: gaussian\n  p: 4\n",
        "sobolev-norm");
    CHECK(c.drift.params.at("k") == 2.0);
    CHECK(c.level == 50);
    CHECK(c.sigma.size() == 2);
    CHECK(c.steps == 20);
    CHECK(c.paths == 7);
    CHECK(c.params.text("weight", "") == "gaussian");
    CHECK(c.params.number("p", 2) == 4.0);
}

TEST_CASE("zero-drift Malliavin check reports sigma rows") {
    const auto dir = scratch("zero");
    const auto cfg = write_file(dir, "c.yaml",
                                "diagnostic: malliavin-check\nproblem:\n  sigma: [0.5, 2.0]\n  grid: {T: 1, steps: 100}\n"
                                "ensemble: {paths: 20, seed: 4}\n");
    const auto r = cli({"malliavin-check", "--config", cfg.string(), "--out", (dir / "o").string()});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "o" / "summary.json"));
    CHECK(j["pass"] == true);
    const auto& m = j["checks"][0]["metrics"];
    CHECK(m["D[t=0.25,s=0.75,i=1]"].get<double>() == doctest::Approx(0.5));
    CHECK(m["D[t=0.25,s=0.75,i=2]"].get<double>() == doctest::Approx(2.0));
    CHECK(fs::exists(dir / "o" / "malliavin_grid.csv"));
    CHECK(fs::exists(dir / "o" / "metadata.json"));
}

TEST_CASE("OU Girsanov cross-validation and reproducibility") {
    const auto dir = scratch("ou");
    const auto cfg = write_file(dir, "c.yaml",
                                "problem:\n  drift: {key: ou, params: {a: -1}}\n  x0: 1\n  grid: {T: 0.5, steps: 50}\n"
                                "ensemble: {paths: 4000, seed: 11, workers: 2}\n");
    const auto a = cli({"girsanov-check", "--config", cfg.string(), "--out", (dir / "a").string()});
    const auto b = cli({"girsanov-check", "--config", cfg.string(), "--out", (dir / "b").string()});
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    const auto sa = slurp(dir / "a" / "summary.json");
    CHECK(sa == slurp(dir / "b" / "summary.json"));
    const auto j = nlohmann::json::parse(sa);
    CHECK(j["checks"].size() == 2);
    CHECK(j["checks"][1]["metrics"].contains("combined_se"));
    const auto c = cli({"girsanov-check", "--config", cfg.string(), "--seed", "12", "--out", (dir / "c").string()});
    CHECK(slurp(dir / "c" / "summary.json") != sa);
}

TEST_CASE("explosion gives a partial summary and exit 1") {
    const auto dir = scratch("boom");
    const auto cfg = write_file(dir, "c.yaml",
                                "problem:\n  drift: {key: ou, params: {a: 10000}}\n  x0: 1\n  grid: {T: 1, steps: 100}\n"
                                "ensemble: {paths: 3}\n");
    const auto r = cli({"simulate", "--config", cfg.string(), "--out", (dir / "o").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("partial") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir / "o" / "summary.json"));
    CHECK(j["pass"] == false);
    CHECK(j.contains("error"));
}

TEST_CASE("presets and remaining diagnostics") {
    const auto dir = scratch("misc");
    CHECK(cli({"constants", "--out", (dir / "k").string()}).code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "k" / "summary.json"));
    CHECK(j["checks"][0]["id"] == 12);
    CHECK(j["mode"] == "preset");

    const auto run_cfg = [&](const std::string& sub, const std::string& text) {
        const auto cfg = write_file(dir, sub + ".yaml", text);
        return cli({sub, "--config", cfg.string(), "--out", (dir / sub).string()});
    };
    CHECK(run_cfg("simulate", "problem: {drift: sign, grid: {T: 0.2, steps: 200}}\nensemble: {paths: 50}\n"
                              "params: {levels: [10, 100]}\n")
              .code == 0);
    CHECK(fs::exists(dir / "simulate" / "cauchy.csv"));
    CHECK(run_cfg("holder-scan", "problem: {drift: sine, random_drift: tanh-b2, grid: {T: 1, steps: 500}}\n"
                                 "ensemble: {paths: 50}\n")
              .code == 0);
    CHECK(run_cfg("flow-check", "problem: {drift: sine, random_drift: sinx-tanh-b2, grid: {T: 1, steps: 1000}}\n"
                                "ensemble: {paths: 10}\n")
              .code == 0);
    CHECK(run_cfg("localtime-check", "problem: {drift: ou, x0: 2, grid: {T: 0.2, steps: 20000}}\n"
                                     "ensemble: {paths: 100}\n")
              .code == 0);
    CHECK(run_cfg("sobolev-norm", "problem: {drift: sign, level: 10, grid: {T: 0.05, steps: 50}}\n"
                                  "ensemble: {paths: 100}\nparams: {x_lo: -2, x_hi: 2, x_points: 41}\n")
              .code == 0);
    CHECK(run_cfg("compactness-scan", "ensemble: {paths: 10}\nparams: {depth: 8}\n").code == 0);
    CHECK(run_cfg("constants", "problem: {drift: {key: sign, params: {k: 2}}, grid: {T: 0.01, steps: 10}}\n").code ==
          0);
    const auto bad = run_cfg("malliavin-check", "problem: {drift: sign}\nensemble: {paths: 2}\n");
    CHECK(bad.code == 2);
    CHECK(bad.err.find("mollify") != std::string::npos);
}
