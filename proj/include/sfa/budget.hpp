#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfa/corpus.hpp"
#include "sfa/money.hpp"

namespace sfa {

class InfeasiblePlan : public Error {
 public:
  using Error::Error;
};

// Per-session text and label costs for each data variant. The shipped
// defaults divide the published totals (sessions vs dollars) per variant.
struct CostModel {
  Money hh_text, hh_label;
  Money hp_text, hp_label;
  Money pp_text, pp_label;

  Money session_cost(DatasetVariant v) const;
};

// Defaults: HH 12800/1472 $/session split evenly between text and label,
// HP 12800/2858 with the label share at 3%, PP 840/4293 with text:label
// at 1:2 — all rounded to the micro-dollar.
CostModel default_cost_model();
void validate(const CostModel& m);

// Sizes of the collected pools each variant can draw from.
struct PoolSizes {
  long human_human = 1472;
  long human_pseudo = 2858;
  long pseudo_pseudo = 4293;

  long pseudo_pool(DatasetVariant v) const;
};

struct MixturePlan {
  Money budget;
  double hh_ratio = 0.0;  // share of budget spent on Human-Human data
  DatasetVariant pseudo_variant = DatasetVariant::PseudoPseudo;
  long n_hh = 0;
  long n_pseudo = 0;
  Money realized_cost;
  bool feasible = true;  // false when a pool cannot supply the demand
};

// n_hh = floor(budget*ratio / hh_cost), n_pseudo likewise on the
// remainder; leftover budget is reported via realized_cost, never
// reallocated. Ratios are quantized to millionths, and the floor division
// runs in integer arithmetic, so plans are exactly reproducible.
MixturePlan plan_mixture(Money budget, double hh_ratio, DatasetVariant pseudo_variant,
                         const CostModel& costs);

// Budget-major cross product. Plans whose demand exceeds a pool size are
// flagged infeasible rather than clipped.
std::vector<MixturePlan> plan_grid(const std::vector<Money>& budgets,
                                   const std::vector<double>& ratios,
                                   DatasetVariant pseudo_variant,
                                   const CostModel& costs, const PoolSizes& pools);

// Draws the planned session counts uniformly without replacement from each
// pool and shuffles the result, all from one splitmix64 stream keyed by
// `seed`. Same (plan, pools, seed) in, same dataset out.
Dataset assemble_mixture(const MixturePlan& plan, const Dataset& hh_pool,
                         const Dataset& pseudo_pool, std::uint64_t seed);

std::string plans_to_csv(const std::vector<MixturePlan>& plans);

}  // namespace sfa
