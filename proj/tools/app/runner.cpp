#include "runner.hpp"

#include "serialize.hpp"

#include "pathflow/errors.hpp"
#include "pathflow/grid.hpp"
#include "pathflow/localtime.hpp"
#include "pathflow/variation.hpp"
#include "pathflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace pathflow::app {

bool RunOutcome::passed() const
{
    return std::all_of(gates.begin(), gates.end(), [](const GateResult& g) { return g.passed; });
}

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& file, bool binary = false)
{
    std::ofstream f(file, binary ? std::ios::binary : std::ios::out | std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + file.string());
    return f;
}

void write_report(const fs::path& out, const Json& report)
{
    auto f = open_out(out / "report.json");
    f << report.dump(2) << '\n';
}

Json gates_json(const std::vector<GateResult>& gates)
{
    Json a = Json::array();
    for (const auto& g : gates)
        a.push_back({{"name", g.name}, {"value", g.value}, {"limit", g.limit}, {"passed", g.passed}});
    return a;
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Json header(const ExperimentConfig& cfg)
{
    return {{"subcommand", to_string(cfg.subcommand)},
            {"process", to_json(cfg.process)},
            {"n_steps", cfg.n_steps},
            {"seed0", cfg.seed0},
            {"n_paths", cfg.n_paths},
            {"bandwidth", {{"c", cfg.eps_c}, {"exponent", cfg.eps_exponent}}}};
}

struct FieldBundle {
    SamplePath path;
    QVPath qv;
    LocalTimeField field;
};

FieldBundle build_field(const ExperimentConfig& cfg, std::size_t p)
{
    FieldBundle b;
    b.path = simulate_process(cfg.process, cfg.n_steps, cfg.seed0 + p);
    b.qv = quadratic_variation(b.path);
    const auto& ls = cfg.localtime;
    const double eps = bandwidth(cfg.process.T, cfg.n_steps, cfg.eps_c, cfg.eps_exponent);
    const LevelGrid g = make_level_grid(b.path.values, eps, ls.per_eps, ls.margin_eps, ls.max_levels);
    LocalTimeOptions o;
    o.max_time_points = ls.max_time_points;
    if (ls.estimator == "occupation")
        b.field = local_time_occupation(b.path, b.qv, g, eps, o);
    else if (ls.estimator == "time_weighted")
        b.field = local_time_time_weighted(b.path, g, eps, o);
    else
        b.field = local_time_downcrossings(b.path, g, eps, o);
    return b;
}

std::function<double(double)> test_function(const std::string& name)
{
    if (name == "one")
        return [](double) { return 1.0; };
    if (name == "bump")
        return [](double x) { return std::max(0.0, 1.0 - std::abs(x)); };
    return [](double x) { return x * x; };
}

void maybe_write_path(const ExperimentConfig& cfg, const fs::path& out, const SamplePath& p, std::size_t index)
{
    if (index >= cfg.max_path_files)
        return;
    const std::string stem = "path_" + std::to_string(p.seed);
    if (cfg.write_path_csv) {
        auto f = open_out(out / (stem + ".csv"));
        write_csv(f, p);
    }
    if (cfg.write_path_binary) {
        auto f = open_out(out / (stem + ".pfl"), true);
        write_binary(f, p);
    }
}

RunOutcome run_simulate(const ExperimentConfig& cfg, const fs::path& out)
{
    RunOutcome r;
    r.report = header(cfg);
    std::vector<SamplePath> paths(cfg.n_paths);
    parallel_for(cfg.n_paths, [&](std::size_t i) { paths[i] = simulate_process(cfg.process, cfg.n_steps, cfg.seed0 + i); },
                 cfg.ensemble.threads);
    Json list = Json::array();
    for (std::size_t i = 0; i < paths.size(); ++i) {
        list.push_back(summary_json(paths[i]));
        maybe_write_path(cfg, out, paths[i], i);
    }
    r.report["paths"] = list;
    return r;
}

RunOutcome run_localtime(const ExperimentConfig& cfg, const fs::path& out)
{
    RunOutcome r;
    r.report = header(cfg);
    const auto& ls = cfg.localtime;
    r.report["estimator"] = ls.estimator;
    const std::size_t nf = ls.test_functions.size();
    std::vector<std::vector<double>> occ(cfg.n_paths, std::vector<double>(nf));
    std::vector<double> hs(cfg.n_paths), ht(cfg.n_paths);
    std::vector<std::size_t> n_levels(cfg.n_paths);
    parallel_for(
        cfg.n_paths,
        [&](std::size_t p) {
            FieldBundle b = build_field(cfg, p);
            n_levels[p] = b.field.levels.n_levels;
            for (std::size_t k = 0; k < nf; ++k)
                occ[p][k] = occupation_check(b.field, test_function(ls.test_functions[k]), b.path, b.qv);
            if (ls.holder) {
                hs[p] = holder_exponent_fit(b.field, HolderAxis::space);
                ht[p] = holder_exponent_fit(b.field, HolderAxis::time);
            }
            if (p == 0 && ls.field_csv) {
                auto f = open_out(out / ("localtime_" + std::to_string(b.path.seed) + ".csv"));
                write_csv(f, b.field);
            }
        },
        cfg.ensemble.threads);

    Json paths = Json::array();
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        Json j = {{"seed", cfg.seed0 + p}, {"n_levels", n_levels[p]}};
        Json o = Json::object();
        for (std::size_t k = 0; k < nf; ++k)
            o[ls.test_functions[k]] = occ[p][k];
        j["occupation_residual"] = o;
        if (ls.holder) {
            j["holder_space"] = hs[p];
            j["holder_time"] = ht[p];
        }
        paths.push_back(j);
    }
    r.report["paths"] = paths;

    const auto& lim = cfg.gates.limits;
    if (auto it = lim.find("occupation_max"); it != lim.end()) {
        const double need = lim.count("occupation_fraction") ? lim.at("occupation_fraction") : 1.0;
        for (std::size_t k = 0; k < nf; ++k) {
            std::size_t good = 0;
            for (std::size_t p = 0; p < cfg.n_paths; ++p)
                good += occ[p][k] < it->second;
            const double frac = static_cast<double>(good) / static_cast<double>(cfg.n_paths);
            r.gates.push_back({"occupation_fraction_" + ls.test_functions[k], frac, need, frac >= need});
        }
    }
    if (ls.holder) {
        double ms = 0.0, mt = 0.0;
        for (std::size_t p = 0; p < cfg.n_paths; ++p) {
            ms += hs[p];
            mt += ht[p];
        }
        ms /= static_cast<double>(cfg.n_paths);
        mt /= static_cast<double>(cfg.n_paths);
        const double beta = cfg.process.beta;
        const double ts = (beta - 1.0) / 2.0, tt = (beta - 1.0) / (2.0 * beta);
        r.report["holder"] = {{"space_mean", ms}, {"space_target", ts}, {"time_mean", mt}, {"time_target", tt}};
        if (auto it = lim.find("holder_tolerance"); it != lim.end()) {
            r.gates.push_back({"holder_space_error", std::abs(ms - ts), it->second, std::abs(ms - ts) <= it->second});
            r.gates.push_back({"holder_time_error", std::abs(mt - tt), it->second, std::abs(mt - tt) <= it->second});
        }
    }
    return r;
}

RunOutcome run_variation(const ExperimentConfig& cfg, const fs::path&)
{
    RunOutcome r;
    r.report = header(cfg);
    const VariationParams& vp = cfg.ensemble.params;
    r.report["params"] = to_json(vp);
    struct PathVar {
        Bivariation fine, coarse;
        double rv = 0.0, lv = 0.0, holder = 0.0;
        InterpolationResult interp;
    };
    std::vector<PathVar> res(cfg.n_paths);
    parallel_for(
        cfg.n_paths,
        [&](std::size_t p) {
            const FieldBundle b = build_field(cfg, p);
            const GridFunction2D G = GridFunction2D::from_field(b.field);
            auto& o = res[p];
            o.fine = bivariation(G, vp.p, vp.q, cfg.variation.pair_budget);
            o.coarse = bivariation(coarsen(G, 1), vp.p, vp.q, cfg.variation.pair_budget);
            if (cfg.variation.joint) {
                o.rv = joint_rv(G, vp.alpha1, vp.alpha2);
                o.lv = joint_lv(G, vp.a, vp.b);
                o.holder = holder_control_constant(G, vp.p_tilde, vp.q_tilde);
            }
            o.interp = interpolation_check(G, vp.a, vp.b, vp.a_prime, cfg.variation.rectangle_budget);
        },
        cfg.ensemble.threads);

    Json paths = Json::array();
    std::vector<double> ch1, ch2;
    bool interp_ok = true;
    double worst = 0.0;
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        const auto& o = res[p];
        const auto rel = [](double a, double b) { return a > 0.0 ? std::abs(a - b) / a : std::abs(b); };
        ch1.push_back(rel(o.fine.norm1, o.coarse.norm1));
        ch2.push_back(rel(o.fine.norm2, o.coarse.norm2));
        const bool ok = o.interp.lhs <= o.interp.rhs * (1.0 + 1e-9);
        interp_ok = interp_ok && ok;
        if (o.interp.rhs > 0.0)
            worst = std::max(worst, o.interp.lhs / o.interp.rhs);
        const auto method = [](bool sampled) { return sampled ? VariationMethod::dyadic_sup : VariationMethod::dp_exact; };
        Json reports = Json::array();
        reports.push_back(to_json(VariationReport{{vp.p}, o.fine.norm1, method(o.fine.sampled1), 0}));
        reports.push_back(to_json(VariationReport{{vp.q}, o.fine.norm2, method(o.fine.sampled2), 0}));
        reports.push_back(to_json(VariationReport{{vp.p}, o.coarse.norm1, method(o.coarse.sampled1), 1}));
        reports.push_back(to_json(VariationReport{{vp.q}, o.coarse.norm2, method(o.coarse.sampled2), 1}));
        Json j = {{"seed", cfg.seed0 + p}, {"bivariation", reports}};
        if (cfg.variation.joint) {
            j["joint_rv"] = to_json(VariationReport{{vp.alpha1, vp.alpha2}, o.rv, VariationMethod::dyadic_sup, 0});
            j["joint_lv"] = to_json(VariationReport{{vp.a, vp.b}, o.lv, VariationMethod::dyadic_sup, 0});
            j["holder_control_constant"] = o.holder;
        }
        j["interpolation"] = {{"lhs", o.interp.lhs},
                              {"rhs", o.interp.rhs},
                              {"sup_increment", o.interp.sup_increment},
                              {"all_rectangles", o.interp.all_rectangles},
                              {"holds", ok}};
        paths.push_back(j);
    }
    r.report["paths"] = paths;
    const double m1 = median(ch1), m2 = median(ch2);
    r.report["bivariation_median_change"] = {{"time_norm", m1}, {"level_norm", m2}};
    r.report["interpolation_worst_ratio"] = worst;
    if (auto it = cfg.gates.limits.find("bivariation_change_max"); it != cfg.gates.limits.end()) {
        r.gates.push_back({"bivariation_change_time_norm", m1, it->second, m1 < it->second});
        r.gates.push_back({"bivariation_change_level_norm", m2, it->second, m2 < it->second});
    }
    if (auto it = cfg.gates.switches.find("interpolation"); it != cfg.gates.switches.end() && it->second)
        r.gates.push_back({"interpolation_holds", worst, 1.0 + 1e-9, interp_ok});
    return r;
}

RunOutcome run_verify(const ExperimentConfig& cfg, const fs::path& out)
{
    RunOutcome r;
    r.report = header(cfg);
    r.report["functional"] = cfg.functional_block;
    r.report["formula"] = to_string(cfg.ensemble.formula);
    if (cfg.ensemble.formula == Formula::stable_ab)
        r.report["params"] = to_json(cfg.ensemble.params);

    std::vector<std::size_t> levels = cfg.ladder;
    if (std::find(levels.begin(), levels.end(), cfg.n_steps) == levels.end())
        levels.push_back(cfg.n_steps);
    std::sort(levels.begin(), levels.end());
    const auto ladder = refinement_ladder(cfg.ensemble, levels);
    const LadderLevel& fine = ladder.back();

    Json lj = Json::array();
    for (const auto& lv : ladder)
        lj.push_back({{"n_steps", lv.n_steps}, {"epsilon", lv.eps}, {"stats", to_json(lv.stats)}});
    r.report["stats"] = to_json(fine.stats);
    r.report["ladder"] = lj;
    Json pj = Json::array();
    double worst_scaled = 0.0;
    for (const auto& p : fine.paths) {
        if (!p.ok) {
            pj.push_back({{"seed", p.seed}, {"status", "failed"}, {"error", p.error}});
            continue;
        }
        Json j = to_json(p.report);
        j["status"] = p.excluded ? "excluded" : "ok";
        pj.push_back(j);
        if (!p.excluded)
            worst_scaled = std::max(worst_scaled, p.report.scaled_residual());
    }
    r.report["paths"] = pj;
    r.report["max_scaled_residual"] = worst_scaled;
    {
        auto f = open_out(out / "residuals.csv");
        write_residuals_csv(f, ladder);
    }
    if (ladder.size() >= 2) {
        auto f = open_out(out / "ladder.csv");
        emit_plot_data(f, ladder);
    }

    const auto& lim = cfg.gates.limits;
    if (auto it = lim.find("relative_max"); it != lim.end())
        r.gates.push_back({"relative", fine.stats.relative, it->second, fine.stats.relative < it->second});
    if (auto it = lim.find("scaled_residual_max"); it != lim.end())
        r.gates.push_back({"max_scaled_residual", worst_scaled, it->second, worst_scaled <= it->second});
    if (auto it = cfg.gates.switches.find("ladder_non_increasing"); it != cfg.gates.switches.end() && it->second) {
        if (ladder.size() < 3)
            throw config_error("gates.ladder_non_increasing", "needs simulation.ladder with at least three levels");
        const bool ok = ladder_non_increasing(ladder, 1, 0.2);
        r.gates.push_back({"ladder_non_increasing", ok ? 1.0 : 0.0, 1.0, ok});
    }
    if (cfg.compare_with) {
        EnsembleConfig other = cfg.ensemble;
        other.formula = *cfg.compare_with;
        const LadderLevel alt = ensemble(other);
        Json cj = Json::array();
        double worst = 0.0;
        for (std::size_t p = 0; p < fine.paths.size(); ++p) {
            const auto& a = fine.paths[p];
            const auto& b = alt.paths[p];
            if (!a.ok || !b.ok)
                continue;
            const double x = a.report.terms.second_order_or_localtime, y = b.report.terms.second_order_or_localtime;
            const double rel = std::abs(x - y) / std::max(std::abs(x), 1e-300);
            worst = std::max(worst, rel);
            cj.push_back({{"seed", a.seed}, {to_string(cfg.ensemble.formula), x}, {to_string(other.formula), y},
                          {"relative_gap", rel}});
        }
        r.report["cross_route"] = {{"with", to_string(other.formula)}, {"stats", to_json(alt.stats)},
                                   {"max_relative_gap", worst}, {"paths", cj}};
        if (auto it = lim.find("cross_route_max"); it != lim.end())
            r.gates.push_back({"cross_route_max_gap", worst, it->second, worst < it->second});
    } else if (lim.count("cross_route_max")) {
        throw config_error("gates.cross_route_max", "needs verify.compare_with");
    }
    return r;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out)
{
    fs::create_directories(out);
    RunOutcome r;
    switch (cfg.subcommand) {
    case Subcommand::simulate: r = run_simulate(cfg, out); break;
    case Subcommand::localtime: r = run_localtime(cfg, out); break;
    case Subcommand::variation: r = run_variation(cfg, out); break;
    case Subcommand::verify: r = run_verify(cfg, out); break;
    }
    r.report["gates"] = gates_json(r.gates);
    r.report["passed"] = r.passed();
    write_report(out, r.report);
    return r;
}

int run_cli(std::optional<Subcommand> subcommand, const fs::path& config_file, const fs::path& out,
            std::optional<std::uint64_t> seed_override)
{
    ExperimentConfig cfg;
    try {
        cfg = parse_config(load_config_file(config_file), subcommand);
        if (seed_override) {
            cfg.seed0 = *seed_override;
            cfg.ensemble.seed0 = *seed_override;
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        const RunOutcome r = run_experiment(cfg, out);
        for (const auto& g : r.gates)
            std::cout << (g.passed ? "PASS " : "FAIL ") << g.name << " = " << std::setprecision(6) << g.value
                      << " (limit " << g.limit << ")\n";
        return r.passed() ? 0 : 1;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace pathflow::app
