#pragma once

#include "pathflow/paths.hpp"
#include "pathflow/variation.hpp"
#include "pathflow/verify.hpp"

#include <json.hpp>

#include <iosfwd>
#include <vector>

namespace pathflow::app {

using Json = nlohmann::ordered_json;

Json to_json(const DecompositionReport& r);
Json to_json(const ResidualStats& s);
Json to_json(const VariationReport& v);
Json to_json(const VariationParams& p);
Json to_json(const ProcessSpec& p);
Json summary_json(const SamplePath& p);

// seed,n_steps,epsilon,t_index,status,lhs,horizontal,stochastic,second_order_or_localtime,jump_localtime,residual
void write_residuals_csv(std::ostream& out, const std::vector<LadderLevel>& ladder);

// n_steps,epsilon,median_abs_residual,mean_abs_residual; throws std::invalid_argument below two levels.
void emit_plot_data(std::ostream& out, const std::vector<LadderLevel>& ladder);

}  // namespace pathflow::app
