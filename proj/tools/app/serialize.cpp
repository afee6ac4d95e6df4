#include "serialize.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace pathflow::app {

Json to_json(const DecompositionReport& r)
{
    Json terms = {{"horizontal", r.terms.horizontal},
                  {"stochastic", r.terms.stochastic},
                  {"second_order_or_localtime", r.terms.second_order_or_localtime}};
    terms["jump_localtime"] = r.terms.jump_localtime ? Json(*r.terms.jump_localtime) : Json(nullptr);
    Json j = {{"formula", to_string(r.formula)},
              {"lhs", r.lhs},
              {"value_end", r.value_end},
              {"terms", terms},
              {"residual", r.residual},
              {"path_meta",
               {{"seed", r.meta.seed}, {"n_steps", r.meta.n_steps}, {"epsilon", r.meta.eps}, {"t_index", r.meta.t_index}}}};
    if (r.params)
        j["params"] = to_json(*r.params);
    return j;
}

Json to_json(const ResidualStats& s)
{
    return {{"n_paths", s.n_paths},       {"mean_abs", s.mean_abs},     {"median_abs", s.median_abs},
            {"p95_abs", s.p95_abs},       {"normalizer", s.normalizer}, {"relative", s.relative},
            {"signed_mean", s.signed_mean}, {"n_failed", s.n_failed},   {"n_excluded", s.n_excluded},
            {"coverage", s.coverage}};
}

Json to_json(const VariationReport& v)
{
    return {{"orders", v.orders}, {"value", v.value}, {"method", to_string(v.method)}, {"ladder_level", v.ladder_level}};
}

Json to_json(const VariationParams& p)
{
    return {{"p", p.p},       {"q", p.q},         {"p_tilde", p.p_tilde}, {"q_tilde", p.q_tilde},
            {"alpha", p.alpha}, {"delta", p.delta}, {"a", p.a},             {"b", p.b},
            {"a_prime", p.a_prime}, {"b_prime", p.b_prime}, {"alpha1", p.alpha1}, {"alpha2", p.alpha2},
            {"beta", p.beta}};
}

Json to_json(const ProcessSpec& p)
{
    Json j = {{"kind", to_string(p.kind)}, {"T", p.T}, {"z", p.z}};
    if (p.kind == ProcessKind::symmetric_stable)
        j["beta"] = p.beta;
    if (p.kind == ProcessKind::euler_sde) {
        j["preset"] = p.preset;
        j["mu"] = p.mu;
        j["sigma"] = p.sigma;
        j["theta"] = p.theta;
    }
    return j;
}

Json summary_json(const SamplePath& p)
{
    const auto [mn, mx] = std::minmax_element(p.values.begin(), p.values.end());
    const QVPath qv = quadratic_variation(p);
    return {{"seed", p.seed},
            {"n_steps", p.n_steps},
            {"T", p.T},
            {"z", p.z},
            {"final", p.values.back()},
            {"min", *mn},
            {"max", *mx},
            {"quadratic_variation", qv.cumulative.back()}};
}

void write_residuals_csv(std::ostream& out, const std::vector<LadderLevel>& ladder)
{
    out << "seed,n_steps,epsilon,t_index,status,lhs,horizontal,stochastic,second_order_or_localtime,jump_localtime,"
           "residual\r\n";
    for (const auto& lv : ladder)
        for (const auto& p : lv.paths) {
            out << p.seed << ',' << lv.n_steps << ',' << format_real(lv.eps) << ',';
            if (!p.ok) {
                out << ",failed,,,,,,\r\n";
                continue;
            }
            const auto& r = p.report;
            out << r.meta.t_index << ',' << (p.excluded ? "excluded" : "ok") << ',' << format_real(r.lhs) << ','
                << format_real(r.terms.horizontal) << ',' << format_real(r.terms.stochastic) << ','
                << format_real(r.terms.second_order_or_localtime) << ','
                << (r.terms.jump_localtime ? format_real(*r.terms.jump_localtime) : std::string()) << ','
                << format_real(r.residual) << "\r\n";
        }
}

void emit_plot_data(std::ostream& out, const std::vector<LadderLevel>& ladder)
{
    if (ladder.size() < 2)
        throw std::invalid_argument("need >=2 levels");
    std::vector<const LadderLevel*> lv;
    for (const auto& l : ladder)
        lv.push_back(&l);
    std::sort(lv.begin(), lv.end(), [](auto* a, auto* b) { return a->n_steps < b->n_steps; });
    out << "n_steps,epsilon,median_abs_residual,mean_abs_residual\r\n";
    for (const auto* l : lv)
        out << l->n_steps << ',' << format_real(l->eps) << ',' << format_real(l->stats.median_abs) << ','
            << format_real(l->stats.mean_abs) << "\r\n";
}

}  // namespace pathflow::app
