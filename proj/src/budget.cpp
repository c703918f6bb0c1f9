#include "sfa/budget.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "sfa/rng.hpp"

namespace sfa {

Money CostModel::session_cost(DatasetVariant v) const {
  switch (v) {
    case DatasetVariant::HumanHuman: return hh_text + hh_label;
    case DatasetVariant::HumanPseudo: return hp_text + hp_label;
    case DatasetVariant::PseudoPseudo: return pp_text + pp_label;
    case DatasetVariant::Mixed: break;
  }
  throw Error("no per-session cost for the Mixed variant");
}

CostModel default_cost_model() {
  CostModel m;
  m.hh_text = Money::from_micros(4347826);   // 6400/1472
  m.hh_label = Money::from_micros(4347826);  // 6400/1472
  m.hp_label = Money::from_micros(129461);   // 370/2858
  m.hp_text = Money::from_micros(4478656 - 129461);   // rest of 12800/2858
  m.pp_text = Money::from_micros(65222);     // 280/4293
  m.pp_label = Money::from_micros(195667 - 65222);    // rest of 840/4293
  return m;
}

void validate(const CostModel& m) {
  for (Money v : {m.hh_text, m.hh_label, m.hp_text, m.hp_label, m.pp_text, m.pp_label})
    if (v.micros() < 0) throw InvariantViolation("cost model: costs must be >= 0");
  // Human text is the same commodity in both human-text variants.
  const auto a = m.hh_text.micros(), b = m.hp_text.micros();
  const auto hi = std::max(a, b);
  if (hi > 0 && std::llabs(a - b) * 20 > hi)
    throw InvariantViolation(
        "cost model: HumanHuman and HumanPseudo text costs differ by more than 5%");
}

long PoolSizes::pseudo_pool(DatasetVariant v) const {
  switch (v) {
    case DatasetVariant::HumanPseudo: return human_pseudo;
    case DatasetVariant::PseudoPseudo: return pseudo_pseudo;
    default: throw Error("pseudo pool requested for a non-pseudo variant");
  }
}

namespace {

// floor(budget * ratio_ppm / (1e6 * unit_cost)) without floating point.
long floor_sessions(std::int64_t budget_micros, std::int64_t ratio_ppm,
                    std::int64_t unit_cost_micros) {
  if (unit_cost_micros <= 0) return 0;  // free sessions are not plannable
  const __int128 share = static_cast<__int128>(budget_micros) * ratio_ppm;
  return static_cast<long>(share / (static_cast<__int128>(unit_cost_micros) * 1000000));
}

}  // namespace

MixturePlan plan_mixture(Money budget, double hh_ratio, DatasetVariant pseudo_variant,
                         const CostModel& costs) {
  if (budget.micros() <= 0) throw Error("plan_mixture: budget must be positive");
  if (hh_ratio < 0.0 || hh_ratio > 1.0)
    throw Error("plan_mixture: ratio must be in [0, 1]");
  if (pseudo_variant != DatasetVariant::HumanPseudo &&
      pseudo_variant != DatasetVariant::PseudoPseudo)
    throw Error("plan_mixture: pseudo variant must be HumanPseudo or PseudoPseudo");
  validate(costs);

  const std::int64_t ppm = std::llround(hh_ratio * 1e6);
  const Money c_hh = costs.session_cost(DatasetVariant::HumanHuman);
  const Money c_ps = costs.session_cost(pseudo_variant);

  MixturePlan plan;
  plan.budget = budget;
  plan.hh_ratio = hh_ratio;
  plan.pseudo_variant = pseudo_variant;
  plan.n_hh = floor_sessions(budget.micros(), ppm, c_hh.micros());
  plan.n_pseudo = floor_sessions(budget.micros(), 1000000 - ppm, c_ps.micros());
  plan.realized_cost = c_hh * plan.n_hh + c_ps * plan.n_pseudo;
  return plan;
}

std::vector<MixturePlan> plan_grid(const std::vector<Money>& budgets,
                                   const std::vector<double>& ratios,
                                   DatasetVariant pseudo_variant,
                                   const CostModel& costs, const PoolSizes& pools) {
  if (budgets.empty() || ratios.empty())
    throw Error("plan_grid: budget and ratio lists must be non-empty");
  std::vector<MixturePlan> out;
  out.reserve(budgets.size() * ratios.size());
  for (const Money b : budgets) {
    for (const double r : ratios) {
      MixturePlan plan = plan_mixture(b, r, pseudo_variant, costs);
      plan.feasible = plan.n_hh <= pools.human_human &&
                      plan.n_pseudo <= pools.pseudo_pool(pseudo_variant);
      out.push_back(plan);
    }
  }
  return out;
}

Dataset assemble_mixture(const MixturePlan& plan, const Dataset& hh_pool,
                         const Dataset& pseudo_pool, std::uint64_t seed) {
  if (plan.n_hh > static_cast<long>(hh_pool.sessions.size()) ||
      plan.n_pseudo > static_cast<long>(pseudo_pool.sessions.size()))
    throw InfeasiblePlan("plan needs " + std::to_string(plan.n_hh) + " HH + " +
                         std::to_string(plan.n_pseudo) +
                         " pseudo sessions; pools hold " +
                         std::to_string(hh_pool.sessions.size()) + " + " +
                         std::to_string(pseudo_pool.sessions.size()));

  SplitMix64 rng(seed);
  const auto hh_pick = sample_without_replacement(
      hh_pool.sessions.size(), static_cast<std::size_t>(plan.n_hh), rng);
  const auto ps_pick = sample_without_replacement(
      pseudo_pool.sessions.size(), static_cast<std::size_t>(plan.n_pseudo), rng);

  Dataset out;
  out.variant = DatasetVariant::Mixed;
  out.sessions.reserve(hh_pick.size() + ps_pick.size());
  for (const auto i : hh_pick) out.sessions.push_back(hh_pool.sessions[i]);
  for (const auto i : ps_pick) out.sessions.push_back(pseudo_pool.sessions[i]);

  std::vector<std::size_t> order(out.sessions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle_indices(order, rng);
  Dataset shuffled;
  shuffled.variant = DatasetVariant::Mixed;
  shuffled.sessions.reserve(out.sessions.size());
  for (const auto i : order) shuffled.sessions.push_back(std::move(out.sessions[i]));
  return shuffled;
}

std::string plans_to_csv(const std::vector<MixturePlan>& plans) {
  std::ostringstream out;
  out << "budget,ratio,variant,n_hh,n_pseudo,realized_cost,feasible\n";
  char ratio_buf[32];
  for (const auto& p : plans) {
    std::snprintf(ratio_buf, sizeof ratio_buf, "%.1f", p.hh_ratio);
    out << p.budget.str() << ',' << ratio_buf << ',' << to_string(p.pseudo_variant)
        << ',' << p.n_hh << ',' << p.n_pseudo << ',' << p.realized_cost.str() << ','
        << (p.feasible ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace sfa
