#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"
#include "vop/markov.hpp"
#include "vop/parameters.hpp"

using namespace vop;
using Catch::Approx;

namespace {

Eigen::MatrixXd random_stochastic(std::mt19937_64& rng, int n, bool absorbing_last) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      m(i, j) = u(rng);
      sum += m(i, j);
    }
    m.row(i) /= sum;
  }
  if (absorbing_last) {
    m.row(n - 1).setZero();
    m(n - 1, n - 1) = 1.0;
  }
  return m;
}

// Plain-loop recomputation of a strategy's discounted ledger.
OutcomeTotals straight_line(const ModelSpec& spec, std::size_t s) {
  const auto& strategy = spec.strategies[s];
  const std::size_t n = spec.states.size();
  std::vector<double> p = spec.initial_distribution;
  OutcomeTotals total;
  const double l = spec.cycle_length_years;
  for (int t = 0; t < spec.horizon_cycles; ++t) {
    const double dc = 1.0 / std::pow(1.0 + spec.discount_rate_costs, t * l);
    const double de = 1.0 / std::pow(1.0 + spec.discount_rate_effects, t * l);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& st = spec.states[j];
      double dm = st.cost_direct_medical;
      double prod = st.cost_productivity;
      double oop = st.cost_out_of_pocket;
      if (!strategy.state_costs.empty()) {
        dm += strategy.state_costs[j].direct_medical;
        prod += strategy.state_costs[j].productivity;
        oop += strategy.state_costs[j].out_of_pocket;
      }
      total.direct_medical += dc * p[j] * dm * l;
      total.productivity += dc * p[j] * prod * l;
      total.out_of_pocket += dc * p[j] * oop * l;
      total.qalys += de * p[j] * st.utility * l;
    }
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        next[j] += p[i] * strategy.transition_matrix[i][j];
      }
    }
    p = next;
  }
  total.cost(strategy.one_time_cost_component) += strategy.one_time_cost;
  return total;
}

void check_relative(double actual, double expected, double tol) {
  CHECK(std::abs(actual - expected) <= tol * std::max(1.0, std::abs(expected)));
}

}  // namespace

TEST_CASE("first cycle of a cohort starting in one state is that state's row") {
  Eigen::MatrixXd m(3, 3);
  m << 0.8, 0.15, 0.05, 0.1, 0.8, 0.1, 0.0, 0.0, 1.0;
  Eigen::RowVectorXd init(3);
  init << 1, 0, 0;
  const auto trace = run_cohort(m, init, 5);
  CHECK(trace.horizon() == 5);
  CHECK(trace.occupancy(1, 0) == Approx(0.8));
  CHECK(trace.occupancy(1, 1) == Approx(0.15));
  CHECK(trace.occupancy(1, 2) == Approx(0.05));
}

TEST_CASE("identity matrix keeps the initial distribution") {
  Eigen::RowVectorXd init(3);
  init << 0.2, 0.5, 0.3;
  const auto trace = run_cohort(Eigen::MatrixXd::Identity(3, 3), init, 7);
  for (int t = 0; t <= 7; ++t) {
    CHECK(trace.occupancy.row(t) == init);
  }
}

TEST_CASE("random chains stay normalised and absorbing occupancy never falls") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const auto m = random_stochastic(rng, n, true);
    Eigen::RowVectorXd init = Eigen::RowVectorXd::Zero(n);
    init(0) = 1.0;
    const auto trace = run_cohort(m, init, 1 + static_cast<int>(rng() % 50));
    for (int t = 0; t <= trace.horizon(); ++t) {
      CHECK(std::abs(trace.occupancy.row(t).sum() - 1.0) <= 1e-12);
      if (t > 0) {
        CHECK(trace.occupancy(t, n - 1) >= trace.occupancy(t - 1, n - 1));
      }
    }
  }
}

TEST_CASE("run_cohort rejects bad inputs") {
  Eigen::RowVectorXd init(2);
  init << 1, 0;
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.4, 0, 1;
  CHECK_THROWS_AS(run_cohort(bad, init, 3), std::invalid_argument);
  CHECK_THROWS_AS(run_cohort(Eigen::MatrixXd::Identity(3, 3), init, 3), std::invalid_argument);
  CHECK_THROWS_AS(run_cohort(Eigen::MatrixXd::Identity(2, 2), init, 0), std::invalid_argument);
}

TEST_CASE("single-state discounting hand case") {
  const auto spec = test::single_state_spec(100.0, 1.0, 0.03, 3);
  const auto run = run_strategy(spec, 0);
  CHECK(std::abs(run.ledger.discounted.direct_medical - 291.347) <= 0.001);
  CHECK(run.ledger.discounted.direct_medical == Approx(100.0 * (1.0 + 1.0 / 1.03 + 1.0 / (1.03 * 1.03))));
  CHECK(run.ledger.undiscounted.direct_medical == Approx(300.0));
  CHECK(run.ledger.per_cycle.size() == 3);
}

TEST_CASE("zero discount rate leaves totals undiscounted") {
  auto spec = test::demo_spec();
  spec.discount_rate_costs = 0.0;
  spec.discount_rate_effects = 0.0;
  for (std::size_t s = 0; s < 2; ++s) {
    const auto run = run_strategy(spec, s);
    CHECK(run.ledger.discounted == run.ledger.undiscounted);
  }
}

TEST_CASE("societal cost equals direct medical when other components are zero") {
  auto spec = test::demo_spec();
  for (auto& st : spec.states) {
    st.cost_productivity = 0.0;
    st.cost_out_of_pocket = 0.0;
  }
  const auto run = run_strategy(spec, 1);
  CHECK(run.ledger.discounted.societal_cost() == run.ledger.discounted.direct_medical);
}

TEST_CASE("full health for T cycles gives T times cycle length QALYs") {
  auto spec = test::single_state_spec(0.0, 1.0, 0.0, 12);
  spec.cycle_length_years = 0.5;
  const auto run = run_strategy(spec, 0);
  CHECK(run.ledger.discounted.qalys == Approx(6.0));
}

TEST_CASE("strategy ledgers match a straight-line recomputation") {
  const auto spec = test::demo_spec();
  for (std::size_t g = 0; g < spec.subgroups.size(); ++g) {
    const auto view = resolve_subgroup_spec(spec, spec.subgroups[g]);
    for (std::size_t s = 0; s < spec.strategies.size(); ++s) {
      const auto run = run_strategy(view, s);
      const auto oracle = straight_line(view, s);
      check_relative(run.ledger.discounted.direct_medical, oracle.direct_medical, 1e-9);
      check_relative(run.ledger.discounted.productivity, oracle.productivity, 1e-9);
      check_relative(run.ledger.discounted.out_of_pocket, oracle.out_of_pocket, 1e-9);
      check_relative(run.ledger.discounted.qalys, oracle.qalys, 1e-9);
    }
  }
}

TEST_CASE("repeat runs are bitwise identical") {
  const auto spec = test::demo_spec();
  CHECK(run_strategy(spec, 1).ledger == run_strategy(spec, 1).ledger);
}

TEST_CASE("one-time cost lands undiscounted on its component") {
  auto spec = test::single_state_spec(0.0, 1.0, 0.03, 4);
  spec.strategies[1].one_time_cost = 750.0;
  spec.strategies[1].one_time_cost_component = CostComponent::out_of_pocket;
  const auto run = run_strategy(spec, 1);
  CHECK(run.ledger.discounted.out_of_pocket == 750.0);
  CHECK(run.ledger.discounted.direct_medical == 0.0);
  CHECK(run.ledger.per_cycle[0].out_of_pocket == 750.0);
}

TEST_CASE("half-cycle correction averages adjacent occupancies") {
  auto spec = test::demo_spec();
  spec.half_cycle = true;
  spec.discount_rate_costs = 0.0;
  const auto run = run_strategy(spec, 0);
  double expected = 0.0;
  for (int t = 0; t < spec.horizon_cycles; ++t) {
    for (int j = 0; j < 3; ++j) {
      expected += 0.5 * (run.trace.occupancy(t, j) + run.trace.occupancy(t + 1, j)) * spec.states[j].cost_direct_medical;
    }
  }
  CHECK(run.ledger.discounted.direct_medical == Approx(expected).epsilon(1e-12));
}

TEST_CASE("friction-cost productivity accrues only over the friction period") {
  ModelSpec spec = test::single_state_spec(0.0, 1.0, 0.0, 3);
  HealthState alive{"Alive", 1.0, 0.0, 0.0, 0.0, false, false};
  HealthState dead{"Dead", 0.0, 0.0, 1000.0, 0.0, true, true};
  spec.states = {alive, dead};
  for (auto& s : spec.strategies) {
    s.transition_matrix = {{0.5, 0.5}, {0.0, 1.0}};
  }
  spec.initial_distribution = {1.0, 0.0};
  // Human capital: 1000 per cycle in Dead, occupancy 0, 0.5, 0.75.
  CHECK(run_strategy(spec, 0).ledger.discounted.productivity == Approx(1250.0));
  // Friction of 1.5 years: entrants at t=1 (0.5) accrue 1 + 0.5 cycles, at t=2 (0.25) accrue 1.
  spec.productivity_method = ProductivityMethod::friction_cost;
  spec.friction_period_years = 1.5;
  CHECK(run_strategy(spec, 0).ledger.discounted.productivity == Approx(1000.0));
}

TEST_CASE("population ledger is the share-weighted sum of subgroup ledgers") {
  const auto spec = test::demo_spec();
  const auto eval = evaluate_model(spec);
  for (std::size_t s = 0; s < 2; ++s) {
    const double expected = 0.7 * eval.by_subgroup[s][0].discounted.qalys + 0.3 * eval.by_subgroup[s][1].discounted.qalys;
    CHECK(eval.population[s].discounted.qalys == Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("trace CSV has a cycle column and one column per state") {
  const auto spec = test::demo_spec();
  std::ostringstream out;
  write_trace_csv(out, run_strategy(spec, 0).trace);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "cycle,Healthy,Sick,Dead");
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    ++rows;
  }
  CHECK(rows == 31);
}
