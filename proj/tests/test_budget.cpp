#include <doctest.h>

#include <cmath>

#include "sfa/budget.hpp"
#include "testutil.hpp"

using namespace sfa;

TEST_CASE("default cost model reproduces the published totals") {
  const CostModel m = default_cost_model();
  CHECK_NOTHROW(validate(m));

  // sessions * per-session cost lands within $10 of the collected totals
  const auto hh_total = m.session_cost(DatasetVariant::HumanHuman) * 1472;
  const auto hp_total = m.session_cost(DatasetVariant::HumanPseudo) * 2858;
  const auto pp_total = m.session_cost(DatasetVariant::PseudoPseudo) * 4293;
  CHECK(std::abs(hh_total.dollars() - 12800.0) < 10.0);
  CHECK(std::abs(hp_total.dollars() - 12800.0) < 10.0);
  CHECK(std::abs(pp_total.dollars() - 840.0) < 10.0);

  // text/label split: HH halves, HP label share ~3%, PP text:label 1:2
  CHECK(m.hh_text.micros() == m.hh_label.micros());
  const double hp_share = static_cast<double>(m.hp_label.micros()) /
                          m.session_cost(DatasetVariant::HumanPseudo).micros();
  CHECK(hp_share == doctest::Approx(0.029).epsilon(0.05));
  CHECK(static_cast<double>(m.pp_label.micros()) / m.pp_text.micros() ==
        doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("cost model text-cost coupling invariant") {
  CostModel m = default_cost_model();
  m.hp_text = m.hh_text + Money::from_dollars(1.0);  // way beyond 5%
  CHECK_THROWS_AS(validate(m), InvariantViolation);
  m = default_cost_model();
  m.pp_text = Money::from_dollars(-1);
  CHECK_THROWS_AS(validate(m), InvariantViolation);
}

TEST_CASE("plan_mixture recovers the published pool sizes") {
  const CostModel m = default_cost_model();
  const auto hh = plan_mixture(Money::from_dollars(12800), 1.0,
                               DatasetVariant::HumanPseudo, m);
  CHECK(hh.n_hh == 1472);
  CHECK(hh.n_pseudo == 0);
  CHECK(hh.realized_cost <= hh.budget);

  const auto hp = plan_mixture(Money::from_dollars(12800), 0.0,
                               DatasetVariant::HumanPseudo, m);
  CHECK(hp.n_pseudo == 2858);
  CHECK(hp.n_hh == 0);

  const auto pp = plan_mixture(Money::from_dollars(840), 0.0,
                               DatasetVariant::PseudoPseudo, m);
  CHECK(pp.n_pseudo == 4293);
}

TEST_CASE("plan_mixture floor arithmetic example") {
  // budget $1600 at ratio 0.9 with the default model
  const auto plan = plan_mixture(Money::from_dollars(1600), 0.9,
                                 DatasetVariant::PseudoPseudo, default_cost_model());
  CHECK(plan.n_hh == 165);      // floor(1440 / 8.695652)
  CHECK(plan.n_pseudo == 817);  // floor(160 / 0.195667)
  CHECK(plan.realized_cost <= plan.budget);
}

TEST_CASE("plan_mixture ratio endpoints and monotonicity") {
  const CostModel m = default_cost_model();
  const Money budget = Money::from_dollars(3200);

  const auto zero = plan_mixture(budget, 0.0, DatasetVariant::PseudoPseudo, m);
  CHECK(zero.n_hh == 0);
  const auto one = plan_mixture(budget, 1.0, DatasetVariant::PseudoPseudo, m);
  CHECK(one.n_pseudo == 0);

  long prev_hh = -1;
  long prev_ps = 1 << 30;
  for (int i = 0; i <= 10; ++i) {
    const auto p = plan_mixture(budget, i / 10.0, DatasetVariant::PseudoPseudo, m);
    CHECK(p.n_hh >= prev_hh);
    CHECK(p.n_pseudo <= prev_ps);
    CHECK(p.realized_cost <= budget);
    prev_hh = p.n_hh;
    prev_ps = p.n_pseudo;
  }
}

TEST_CASE("plan_grid cardinality, order, and feasibility flags") {
  const CostModel m = default_cost_model();
  const PoolSizes pools;
  std::vector<Money> budgets;
  for (double b : {800, 1200, 1600, 3200, 6400, 12800})
    budgets.push_back(Money::from_dollars(b));
  std::vector<double> ratios;
  for (int i = 0; i <= 10; ++i) ratios.push_back(i / 10.0);

  const auto grid = plan_grid(budgets, ratios, DatasetVariant::HumanPseudo, m, pools);
  CHECK(grid.size() == 66);
  // budget-major deterministic order
  CHECK(grid[0].budget == budgets[0]);
  CHECK(grid[10].budget == budgets[0]);
  CHECK(grid[11].budget == budgets[1]);
  for (const auto& p : grid) {
    CHECK(p.realized_cost <= p.budget);
    if (p.feasible) {
      CHECK(p.n_hh <= pools.human_human);
      CHECK(p.n_pseudo <= pools.human_pseudo);
    }
  }

  // The PP arm at $1600 ratio 0 demands 8177 pseudo sessions > 4293.
  std::vector<Money> pp_budgets = {Money::from_dollars(1600)};
  const auto pp_grid =
      plan_grid(pp_budgets, ratios, DatasetVariant::PseudoPseudo, m, pools);
  CHECK(pp_grid[0].n_pseudo == 8177);
  CHECK_FALSE(pp_grid[0].feasible);
  CHECK(pp_grid[10].feasible);  // ratio 1.0 needs only HH sessions

  CHECK_THROWS_AS(plan_grid({}, ratios, DatasetVariant::HumanPseudo, m, pools), Error);
}

TEST_CASE("assemble_mixture determinism and sampling contract") {
  SplitMix64 rng(7);
  const Taxonomy tax = default_taxonomy();

  Dataset hh, ps;
  hh.variant = DatasetVariant::Mixed;
  ps.variant = DatasetVariant::Mixed;
  for (int i = 0; i < 100; ++i) {
    hh.sessions.push_back(test::random_session(rng, tax, "hh" + std::to_string(i)));
    ps.sessions.push_back(test::random_session(rng, tax, "ps" + std::to_string(i)));
  }

  MixturePlan plan;
  plan.budget = Money::from_dollars(1);
  plan.n_hh = 50;
  plan.n_pseudo = 30;

  auto ids = [](const Dataset& d) {
    std::vector<std::string> out;
    for (const auto& a : d.sessions) out.push_back(a.session.id);
    return out;
  };

  const auto a = assemble_mixture(plan, hh, ps, 99);
  const auto b = assemble_mixture(plan, hh, ps, 99);
  CHECK(ids(a) == ids(b));
  CHECK(a.sessions.size() == 80);
  CHECK(a.variant == DatasetVariant::Mixed);
  CHECK_NOTHROW(validate(a));

  // different seeds: still valid 50+30 subsets (and, in practice, different)
  const auto c = assemble_mixture(plan, hh, ps, 100);
  CHECK(c.sessions.size() == 80);
  const auto va = ids(a);
  const auto vc = ids(c);
  const std::set<std::string> a_ids(va.begin(), va.end());
  const std::set<std::string> c_ids(vc.begin(), vc.end());
  CHECK(a_ids.size() == 80);  // no duplicates: sampling without replacement
  CHECK(c_ids.size() == 80);
  CHECK(a_ids != c_ids);

  // n equal to the pool size uses every session exactly once
  MixturePlan all;
  all.budget = Money::from_dollars(1);
  all.n_hh = 100;
  all.n_pseudo = 0;
  const auto everything = assemble_mixture(all, hh, ps, 1);
  const auto ve = ids(everything);
  const std::set<std::string> everything_ids(ve.begin(), ve.end());
  CHECK(everything_ids.size() == 100);

  MixturePlan too_big;
  too_big.budget = Money::from_dollars(1);
  too_big.n_hh = 101;
  CHECK_THROWS_AS(assemble_mixture(too_big, hh, ps, 1), InfeasiblePlan);
}

TEST_CASE("plans export as csv") {
  const auto plan = plan_mixture(Money::from_dollars(1600), 0.9,
                                 DatasetVariant::PseudoPseudo, default_cost_model());
  const std::string csv = plans_to_csv({plan});
  CHECK(csv.find("budget,ratio,variant,n_hh,n_pseudo,realized_cost,feasible") == 0);
  CHECK(csv.find("1600,0.9,PseudoPseudo,165,817,") != std::string::npos);
}

TEST_CASE("money parsing and formatting") {
  CHECK(Money::parse("12800").micros() == 12800000000LL);
  CHECK(Money::parse("0.06").micros() == 60000);
  CHECK(Money::parse("4.347826").str() == "4.347826");
  CHECK(Money::parse("-1.5").micros() == -1500000);
  CHECK(Money::from_dollars(0.00003).micros() == 30);
  CHECK_THROWS_AS(Money::parse("12,800"), ParseError);
  CHECK_THROWS_AS(Money::parse(""), ParseError);
  CHECK(Money::from_micros(1).str() == "0.000001");
}
