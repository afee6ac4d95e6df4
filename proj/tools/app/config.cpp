#include "config.hpp"

#include "toml_lite.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace pathflow::app {

Json load_config_file(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw config_error("config", "cannot open " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string ext = file.extension().string();
    try {
        if (ext == ".toml")
            return parse_toml(ss.str());
        if (ext == ".json")
            return Json::parse(ss.str());
    } catch (const std::exception& e) {
        throw config_error("config", std::string("parse error: ") + e.what());
    }
    throw config_error("config", "unknown extension '" + ext + "' (expected .toml or .json)");
}

const Json* Reader::find(const std::string& path) const
{
    const Json* cur = &root_;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(key))
            return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos)
            break;
        start = dot + 1;
    }
    used_.insert(path);
    return cur;
}

const Json& Reader::need(const std::string& path) const
{
    const Json* v = find(path);
    if (!v)
        fail(path, "required field is missing");
    return *v;
}

bool Reader::has(const std::string& path) const
{
    const Json* cur = &root_;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(key))
            return false;
        cur = &(*cur)[key];
        if (dot == std::string::npos)
            return true;
        start = dot + 1;
    }
}

namespace {

double as_real(const Json& v, const std::string& path)
{
    if (!v.is_number())
        Reader::fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        Reader::fail(path, "must be finite");
    return d;
}

std::int64_t as_integer(const Json& v, const std::string& path)
{
    if (v.is_number_integer())
        return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15)
            return static_cast<std::int64_t>(d);
    }
    Reader::fail(path, "expected an integer");
}

}  // namespace

double Reader::real(const std::string& path) const { return as_real(need(path), path); }

double Reader::real(const std::string& path, double fallback) const
{
    const Json* v = find(path);
    return v ? as_real(*v, path) : fallback;
}

std::int64_t Reader::integer(const std::string& path, std::int64_t fallback) const
{
    const Json* v = find(path);
    return v ? as_integer(*v, path) : fallback;
}

std::size_t Reader::count(const std::string& path, std::size_t fallback, std::size_t min) const
{
    const Json* v = find(path);
    if (!v)
        return fallback;
    const auto i = as_integer(*v, path);
    if (i < static_cast<std::int64_t>(min))
        fail(path, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(i);
}

bool Reader::flag(const std::string& path, bool fallback) const
{
    const Json* v = find(path);
    if (!v)
        return fallback;
    if (!v->is_boolean())
        fail(path, "expected true or false");
    return v->get<bool>();
}

std::string Reader::text(const std::string& path, const std::string& fallback) const
{
    const Json* v = find(path);
    if (!v)
        return fallback;
    if (!v->is_string())
        fail(path, "expected a string");
    return v->get<std::string>();
}

std::vector<double> Reader::reals(const std::string& path) const
{
    const Json& v = need(path);
    if (!v.is_array())
        fail(path, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_real(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::size_t> Reader::counts(const std::string& path) const
{
    const Json& v = need(path);
    if (!v.is_array())
        fail(path, "expected an array");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto k = as_integer(v[i], path + "[" + std::to_string(i) + "]");
        if (k < 1)
            fail(path + "[" + std::to_string(i) + "]", "must be >= 1");
        out.push_back(static_cast<std::size_t>(k));
    }
    return out;
}

const Json& Reader::raw(const std::string& path) const { return need(path); }

void Reader::reject_unknown() const
{
    std::function<void(const Json&, const std::string&)> walk = [&](const Json& node, const std::string& prefix) {
        if (!prefix.empty() && used_.count(prefix))
            return;
        if (node.is_object()) {
            for (const auto& [k, v] : node.items())
                walk(v, prefix.empty() ? k : prefix + "." + k);
            return;
        }
        fail(prefix, "unknown field");
    };
    walk(root_, "");
}

std::string to_string(Subcommand s)
{
    switch (s) {
    case Subcommand::simulate: return "simulate";
    case Subcommand::localtime: return "localtime";
    case Subcommand::variation: return "variation";
    case Subcommand::verify: return "verify";
    }
    return "unknown";
}

Subcommand subcommand_from_string(const std::string& s)
{
    if (s == "simulate") return Subcommand::simulate;
    if (s == "localtime") return Subcommand::localtime;
    if (s == "variation") return Subcommand::variation;
    if (s == "verify") return Subcommand::verify;
    throw config_error("subcommand", "unknown subcommand '" + s + "'");
}

std::function<FunctionalSpec()> functional_from(const Reader& r, const std::string& prefix)
{
    const std::string name = r.text(prefix + ".name", "");
    if (name.empty())
        Reader::fail(prefix + ".name", "required field is missing");
    if (name == "identity")
        return make_identity;
    if (name == "square")
        return make_square;
    if (name == "running_max")
        return make_running_max;
    if (name == "lookback_fixed") {
        const double K = r.real(prefix + ".K");
        return [K] { return make_lookback_fixed(K); };
    }
    if (name == "partial_lookback") {
        const double lambda = r.real(prefix + ".lambda");
        if (!(lambda > 1.0))
            Reader::fail(prefix + ".lambda", "must be > 1");
        return [lambda] { return make_partial_lookback(lambda); };
    }
    if (name == "cylinder") {
        const std::string payoff = r.text(prefix + ".payoff", "sum_of_squares");
        const auto times = r.reals(prefix + ".times");
        if (times.empty())
            Reader::fail(prefix + ".times", "needs at least one time");
        for (std::size_t i = 0; i < times.size(); ++i)
            if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
                Reader::fail(prefix + ".times", "must be positive and strictly increasing");
        CylinderPayoff f;
        if (payoff == "sum_of_squares")
            f = cylinder_sum_of_squares();
        else if (payoff == "product")
            f = cylinder_product();
        else if (payoff == "sum_sin")
            f = cylinder_sum_sin();
        else
            Reader::fail(prefix + ".payoff", "unknown payoff '" + payoff + "'");
        return [f, times] { return make_cylinder(f, times); };
    }
    if (name == "fps") {
        const std::string phi = r.text(prefix + ".phi", "gaussian_bump");
        if (phi != "gaussian_bump")
            Reader::fail(prefix + ".phi", "unknown phi '" + phi + "'");
        const double R = r.real(prefix + ".R", 4.0);
        if (!(R > 0.0))
            Reader::fail(prefix + ".R", "must be > 0");
        const std::size_t ny = r.count(prefix + ".y_points", 401, 3);
        return [R, ny] { return make_fps(gaussian_bump_phi, R, ny); };
    }
    Reader::fail(prefix + ".name", "unknown functional '" + name + "'");
}

namespace {

ProcessSpec process_from(const Reader& r)
{
    ProcessSpec p;
    try {
        p.kind = process_kind_from_string(r.text("process.kind", "brownian"));
    } catch (const std::exception&) {
        Reader::fail("process.kind", "unknown process kind");
    }
    p.T = r.real("process.T", 1.0);
    if (!(p.T > 0.0))
        Reader::fail("process.T", "must be > 0");
    p.z = r.real("process.z", 0.0);
    p.beta = r.real("process.beta", 2.0);
    if (p.kind == ProcessKind::symmetric_stable && !(p.beta > 1.0 && p.beta <= 2.0))
        Reader::fail("process.beta", "must lie in (1, 2]");
    p.preset = r.text("process.preset", "gbm");
    if (p.preset != "gbm" && p.preset != "ou" && p.preset != "unit")
        Reader::fail("process.preset", "unknown preset '" + p.preset + "'");
    p.mu = r.real("process.mu", 0.0);
    p.sigma = r.real("process.sigma", 1.0);
    if (!(p.sigma > 0.0))
        Reader::fail("process.sigma", "must be > 0");
    p.theta = r.real("process.theta", 1.0);
    if (p.kind != ProcessKind::symmetric_stable)
        p.beta = 2.0;
    return p;
}

VariationParams params_from(const Reader& r)
{
    VariationParams v;
    const auto rd = [&](const char* key, double& field, double min) {
        const std::string path = std::string("variation.") + key;
        field = r.real(path, field);
        if (field < min)
            Reader::fail(path, "must be >= " + format_real(min));
    };
    rd("p", v.p, 1.0);
    rd("q", v.q, 1.0);
    rd("p_tilde", v.p_tilde, 1.0);
    rd("q_tilde", v.q_tilde, 1.0);
    rd("alpha", v.alpha, 0.0);
    if (!(v.alpha > 0.0 && v.alpha < 1.0))
        Reader::fail("variation.alpha", "must lie in (0, 1)");
    rd("delta", v.delta, 0.0);
    if (!(v.delta > 0.0))
        Reader::fail("variation.delta", "must be > 0");
    rd("a", v.a, 1.0);
    rd("b", v.b, 1.0);
    rd("a_prime", v.a_prime, 1.0);
    if (!(v.a_prime > v.a))
        Reader::fail("variation.a_prime", "must exceed variation.a");
    v.b_prime = v.a_prime / v.a * v.b;
    if (r.has("variation.b_prime")) {
        const double bp = r.real("variation.b_prime");
        if (std::abs(bp - v.b_prime) > 1e-12 * v.b_prime)
            Reader::fail("variation.b_prime", "must equal a_prime * b / a");
    }
    rd("alpha1", v.alpha1, 1.0);
    rd("alpha2", v.alpha2, 1.0);
    v.beta = r.real("variation.beta", v.beta);
    if (!(v.beta > 1.0 && v.beta <= 2.0))
        Reader::fail("variation.beta", "must lie in (1, 2]");
    return v;
}

void read_gates(const Reader& r, const Json& doc, Gates& g)
{
    if (!doc.contains("gates"))
        return;
    if (!doc["gates"].is_object())
        Reader::fail("gates", "expected a table");
    for (const auto& [k, v] : doc["gates"].items()) {
        const std::string path = "gates." + k;
        if (v.is_boolean())
            g.switches[k] = r.flag(path, false);
        else {
            const double x = r.real(path);
            if (!(x >= 0.0))
                Reader::fail(path, "must be >= 0");
            g.limits[k] = x;
        }
    }
}

}  // namespace

ExperimentConfig parse_config(const Json& doc, std::optional<Subcommand> subcommand)
{
    if (!doc.is_object())
        throw config_error("config", "top level must be a table");
    Reader r(doc);
    ExperimentConfig c;
    if (r.has("subcommand")) {
        c.subcommand = subcommand_from_string(r.text("subcommand", ""));
        if (subcommand && *subcommand != c.subcommand)
            Reader::fail("subcommand", "file is for '" + to_string(c.subcommand) + "', not '"
                                           + to_string(*subcommand) + "'");
    } else if (subcommand) {
        c.subcommand = *subcommand;
    } else {
        Reader::fail("subcommand", "required field is missing");
    }

    c.process = process_from(r);
    c.n_steps = r.count("simulation.n_steps", 1024);
    c.seed0 = static_cast<std::uint64_t>(r.integer("simulation.seed0", 0));
    if (r.integer("simulation.seed0", 0) < 0)
        Reader::fail("simulation.seed0", "must be >= 0");
    c.n_paths = r.count("simulation.n_paths", 1);
    if (r.has("simulation.ladder")) {
        c.ladder = r.counts("simulation.ladder");
        for (std::size_t n : c.ladder)
            if (c.n_steps % n != 0)
                Reader::fail("simulation.ladder", "every level must divide simulation.n_steps");
    }
    c.eps_c = r.real("bandwidth.c", 1.0);
    if (!(c.eps_c > 0.0))
        Reader::fail("bandwidth.c", "must be > 0");
    c.eps_exponent = r.real("bandwidth.exponent", 0.4);
    if (!(c.eps_exponent > 0.0 && c.eps_exponent < 0.5))
        Reader::fail("bandwidth.exponent", "must lie in (0, 0.5)");

    c.write_path_csv = r.flag("output.path_csv", true);
    c.write_path_binary = r.flag("output.path_binary", false);
    c.max_path_files = r.count("output.max_path_files", 16, 0);

    auto& ls = c.localtime;
    ls.estimator = r.text("localtime.estimator", ls.estimator);
    if (ls.estimator != "occupation" && ls.estimator != "time_weighted" && ls.estimator != "downcrossings")
        Reader::fail("localtime.estimator", "unknown estimator '" + ls.estimator + "'");
    if (r.has("localtime.test_functions")) {
        const Json& tf = r.raw("localtime.test_functions");
        if (!tf.is_array() || tf.empty())
            Reader::fail("localtime.test_functions", "expected a non-empty array of names");
        ls.test_functions.clear();
        for (const auto& v : tf) {
            if (!v.is_string() || (v != "one" && v != "bump" && v != "square"))
                Reader::fail("localtime.test_functions", "names must be one, bump or square");
            ls.test_functions.push_back(v.get<std::string>());
        }
    }
    ls.holder = r.flag("localtime.holder", false);
    ls.per_eps = r.count("localtime.per_eps", ls.per_eps);
    ls.margin_eps = r.real("localtime.margin_eps", ls.margin_eps);
    if (!(ls.margin_eps >= 1.0))
        Reader::fail("localtime.margin_eps", "must be >= 1");
    ls.max_levels = r.count("localtime.max_levels", ls.max_levels);
    ls.max_time_points = r.count("localtime.max_time_points", ls.max_time_points);
    ls.field_csv = r.flag("localtime.field_csv", true);

    c.variation.pair_budget = r.count("variation_budget.pairs", c.variation.pair_budget);
    c.variation.rectangle_budget = r.count("variation_budget.rectangles", c.variation.rectangle_budget);
    c.variation.joint = r.flag("variation_budget.joint", true);

    auto& e = c.ensemble;
    e.params = params_from(r);
    if (r.has("functional")) {
        c.functional_block = r.raw("functional");
        c.functional = functional_from(r, "functional");
    } else if (c.subcommand == Subcommand::verify) {
        Reader::fail("functional.name", "required field is missing");
    }
    if (c.subcommand == Subcommand::verify) {
        try {
            e.formula = formula_from_string(r.text("verify.formula", "smooth_c12"));
        } catch (const std::invalid_argument&) {
            Reader::fail("verify.formula", "unknown formula");
        }
        if (r.has("verify.compare_with")) {
            try {
                c.compare_with = formula_from_string(r.text("verify.compare_with", ""));
            } catch (const std::invalid_argument&) {
                Reader::fail("verify.compare_with", "unknown formula");
            }
        }
    }
    e.mollification_n = r.count("verify.mollification_n", e.mollification_n);
    e.quad_nodes = r.count("verify.quad_nodes", e.quad_nodes, 8);
    if (r.has("verify.t_end")) {
        const double t = r.real("verify.t_end");
        if (!(t > 0.0 && t <= c.process.T))
            Reader::fail("verify.t_end", "must lie in (0, T]");
        e.t_end = t;
    }
    e.stop = r.flag("verify.stop", true);
    e.condition_positive_value = r.flag("verify.condition_positive_value", false);
    e.max_failure_rate = r.real("verify.max_failure_rate", e.max_failure_rate);
    if (!(e.max_failure_rate >= 0.0 && e.max_failure_rate <= 1.0))
        Reader::fail("verify.max_failure_rate", "must lie in [0, 1]");
    e.threads = r.count("verify.threads", 0, 0);
    e.decompose.per_eps = ls.per_eps;
    e.decompose.margin_eps = ls.margin_eps;
    e.decompose.max_levels = ls.max_levels;
    e.decompose.max_time_points = ls.max_time_points;
    if (e.formula == Formula::stable_ab && c.subcommand == Subcommand::verify) {
        try {
            check_stable_orders(e.params.a, e.params.b, c.process.beta);
        } catch (const std::invalid_argument& ex) {
            const double a = e.params.a, beta = c.process.beta;
            Reader::fail(a >= 1.0 && a < 2.0 * beta / (beta + 1.0) ? "variation.b" : "variation.a", ex.what());
        }
    }
    e.process = c.process;
    e.functional = c.functional;
    e.n_steps = c.n_steps;
    e.seed0 = c.seed0;
    e.n_paths = c.n_paths;
    e.eps_c = c.eps_c;
    e.eps_exponent = c.eps_exponent;

    read_gates(r, doc, c.gates);
    r.reject_unknown();
    return c;
}

}  // namespace pathflow::app
