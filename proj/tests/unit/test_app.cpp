#include "app/config.hpp"
#include "app/runner.hpp"
#include "app/serialize.hpp"
#include "app/toml_lite.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pathflow;
using namespace pathflow::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("pathflow_unit_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text)
{
    const fs::path f = dir / name;
    std::ofstream(f, std::ios::binary) << text;
    return f;
}

std::string slurp(const fs::path& f)
{
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSimulate = R"(subcommand = "simulate"
[process]
kind = "brownian"
T = 1.0
z = 0.25
[simulation]
n_steps = 256
seed0 = 17
n_paths = 3
)";

LadderLevel level(std::size_t n, double eps, std::vector<double> residuals)
{
    LadderLevel l;
    l.n_steps = n;
    l.eps = eps;
    std::vector<DecompositionReport> reps;
    for (double r : residuals) {
        PathOutcome p;
        p.ok = true;
        p.report.residual = r;
        p.report.lhs = 1.0;
        l.paths.push_back(p);
        reps.push_back(p.report);
    }
    l.stats = residual_stats(reps);
    return l;
}

}  // namespace

TEST_CASE("toml subset")
{
    const auto j = parse_toml(R"(# header
title = "run"   # trailing comment
[a]
x = 1
y = -2.5e-3
flag = true
list = [1, 2, 3]
names = ["p", "q"]
b.c = "dotted"
[d.e]
f = 0.5
)");
    CHECK(j["title"] == "run");
    CHECK(j["a"]["x"] == 1);
    CHECK(j["a"]["y"].get<double>() == -2.5e-3);
    CHECK(j["a"]["flag"] == true);
    CHECK(j["a"]["list"].size() == 3);
    CHECK(j["a"]["names"][1] == "q");
    CHECK(j["a"]["b"]["c"] == "dotted");
    CHECK(j["d"]["e"]["f"].get<double>() == 0.5);
    CHECK(j["a"]["x"].is_number_integer());
}

TEST_CASE("toml errors carry the line")
{
    CHECK_THROWS_WITH_AS(parse_toml("a = 1\na = 2\n"), doctest::Contains("line 2"), toml_error);
    CHECK_THROWS_AS(parse_toml("[a\n"), toml_error);
    CHECK_THROWS_AS(parse_toml("x = \n"), toml_error);
    CHECK_THROWS_AS(parse_toml("x = \"open\n"), toml_error);
}

TEST_CASE("partial lookback with lambda below one names the field")
{
    const Json doc = parse_toml(R"(subcommand = "verify"
[functional]
name = "partial_lookback"
lambda = 0.9
[verify]
formula = "singular_curve"
)");
    try {
        parse_config(doc);
        FAIL("expected a config error");
    } catch (const config_error& e) {
        CHECK(e.field() == "functional.lambda");
    }
    const fs::path d = scratch("lambda");
    const fs::path f = write_file(d, "bad.json",
                                  R"({"subcommand": "verify", "functional": {"name": "partial_lookback", "lambda": 0.9},
                                      "verify": {"formula": "singular_curve"}})");
    CHECK(run_cli(std::nullopt, f, d / "out", std::nullopt) == 2);
}

TEST_CASE("unknown fields are rejected")
{
    const Json doc = parse_toml(std::string(kSimulate) + "[process.extra]\nfoo = 1\n");
    try {
        parse_config(doc);
        FAIL("expected a config error");
    } catch (const config_error& e) {
        CHECK(e.field() == "process.extra.foo");
    }
}

TEST_CASE("config validation")
{
    CHECK_THROWS_AS(parse_config(parse_toml(std::string(kSimulate) + "[bandwidth]\nc = -1.0\n")), config_error);
    CHECK_THROWS_AS(parse_config(parse_toml(kSimulate), Subcommand::verify), config_error);
    const ExperimentConfig c = parse_config(parse_toml(kSimulate));
    CHECK(c.subcommand == Subcommand::simulate);
    CHECK(c.n_steps == 256);
    CHECK(c.seed0 == 17);
    CHECK(c.process.z == 0.25);
    CHECK(c.eps_exponent == 0.4);
    for (auto s : {Subcommand::simulate, Subcommand::localtime, Subcommand::variation, Subcommand::verify})
        CHECK(subcommand_from_string(to_string(s)) == s);
}

TEST_CASE("config files by extension")
{
    const fs::path d = scratch("ext");
    CHECK_THROWS_AS(load_config_file(write_file(d, "c.yaml", "a: 1")), config_error);
    CHECK_THROWS_AS(load_config_file(d / "missing.toml"), config_error);
    CHECK_THROWS_AS(load_config_file(write_file(d, "c.json", "{oops")), config_error);
    CHECK(run_cli(std::nullopt, d / "missing.toml", d / "out", std::nullopt) == 2);
}

TEST_CASE("simulate twice gives byte-identical files")
{
    const fs::path d = scratch("sim");
    const fs::path cfg = write_file(d, "sim.toml", kSimulate);
    REQUIRE(run_cli(Subcommand::simulate, cfg, d / "a", std::nullopt) == 0);
    REQUIRE(run_cli(Subcommand::simulate, cfg, d / "b", std::nullopt) == 0);
    for (const char* name : {"path_17.csv", "path_18.csv", "path_19.csv", "report.json"}) {
        INFO(name);
        REQUIRE(fs::exists(d / "a" / name));
        CHECK(slurp(d / "a" / name) == slurp(d / "b" / name));
    }
    const SamplePath p = [&] {
        std::ifstream in(d / "a" / "path_17.csv");
        return read_csv(in);
    }();
    CHECK(p.values == simulate_brownian(256, 1.0, 0.25, 17).values);

    REQUIRE(run_cli(Subcommand::simulate, cfg, d / "c", 40) == 0);
    CHECK(fs::exists(d / "c" / "path_40.csv"));
}

TEST_CASE("verify run writes reports and gates")
{
    const fs::path d = scratch("verify");
    const fs::path cfg = write_file(d, "v.toml", R"(subcommand = "verify"
[process]
kind = "brownian"
[simulation]
n_steps = 1024
seed0 = 5
n_paths = 4
[functional]
name = "identity"
[verify]
formula = "young_pq"
[gates]
relative_max = 1e-9
)");
    CHECK(run_cli(std::nullopt, cfg, d / "out", std::nullopt) == 0);
    const Json report = Json::parse(slurp(d / "out" / "report.json"));
    CHECK(report["passed"] == true);
    CHECK(fs::exists(d / "out" / "residuals.csv"));
    const std::string csv = slurp(d / "out" / "residuals.csv");
    CHECK(csv.rfind("seed,n_steps,epsilon,t_index,status,lhs,horizontal,stochastic,second_order_or_localtime,"
                    "jump_localtime,residual\r\n",
                    0)
          == 0);

    std::string text = slurp(cfg);
    text.replace(text.find("identity"), 8, "running_max");
    text.replace(text.find("young_pq"), 8, "singular_curve");
    const fs::path strict = write_file(d, "s.toml", text);
    CHECK(run_cli(std::nullopt, strict, d / "out2", std::nullopt) == 1);
}

TEST_CASE("plot data needs two levels")
{
    std::ostringstream os;
    CHECK_THROWS_WITH_AS(emit_plot_data(os, {}), doctest::Contains("need >=2 levels"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(emit_plot_data(os, {level(1024, 0.1, {0.1})}), doctest::Contains("need >=2 levels"),
                         std::invalid_argument);
    emit_plot_data(os, {level(1024, 0.1, {0.3, 0.1}), level(2048, 0.05, {0.1, 0.1}), level(4096, 0.02, {0.05})});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "n_steps,epsilon,median_abs_residual,mean_abs_residual\r");
    std::size_t rows = 0;
    while (std::getline(is, line))
        rows += !line.empty();
    CHECK(rows == 3);
}

TEST_CASE("json shapes")
{
    VariationReport v;
    v.orders = {1.0, 2.5};
    v.value = 0.5;
    v.method = VariationMethod::dp_exact;
    const Json j = to_json(v);
    CHECK(j["orders"].size() == 2);
    CHECK(j["value"] == 0.5);
    CHECK(j.contains("method"));
    CHECK(j.contains("ladder_level"));

    DecompositionReport r;
    r.lhs = 1.0;
    r.terms.stochastic = 0.75;
    finalize(r);
    const Json rj = to_json(r);
    CHECK(rj["residual"] == 0.25);
    CHECK(rj["terms"].contains("horizontal"));
}
