#include <catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"
#include "vop/dcea.hpp"

using namespace vop;
using Catch::Approx;

namespace {

std::vector<Subgroup> groups(std::vector<double> baselines, std::vector<double> shares) {
  std::vector<Subgroup> out;
  for (std::size_t g = 0; g < baselines.size(); ++g) {
    out.push_back(Subgroup{"g" + std::to_string(g), shares[g], baselines[g], {}});
  }
  return out;
}

// Two-subgroup, two-strategy bundle; comparator outcomes are all zero.
PsaBundle two_group_bundle(const std::vector<std::array<double, 4>>& rows, std::vector<double> baselines,
                           std::vector<double> shares) {
  PsaBundle b;
  b.iterations = rows.size();
  b.layout.strategy_names = {"Base", "New"};
  b.layout.comparator = 0;
  b.layout.subgroup_names = {"worse", "better"};
  b.layout.subgroup_shares = shares;
  b.layout.subgroup_baselines = baselines;
  b.sampled = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), 0);
  for (const auto& r : rows) {
    // r = {dq worse, dc worse, dq better, dc better}
    b.outcomes.push_back({});
    b.outcomes.push_back({});
    b.outcomes.push_back(OutcomeTotals{r[1], 0, 0, r[0]});
    b.outcomes.push_back(OutcomeTotals{r[3], 0, 0, r[2]});
  }
  return b;
}

// Independent Atkinson index with share weights.
double atkinson(const std::vector<double>& h, const std::vector<double>& s, double eps) {
  double mean = 0.0, ede = 0.0;
  for (std::size_t g = 0; g < h.size(); ++g) {
    mean += s[g] * h[g];
    ede += s[g] * std::pow(h[g], 1.0 - eps);
  }
  return 1.0 - std::pow(ede, 1.0 / (1.0 - eps)) / mean;
}

}  // namespace

TEST_CASE("Atkinson weights") {
  const auto zero = atkinson_weights(groups({0.5, 0.9}, {0.5, 0.5}), 0.0, std::nullopt);
  CHECK(zero.weights == std::vector<double>{1.0, 1.0});

  const auto w = atkinson_weights(groups({0.8}, {1.0}), 0.5, 1.0);
  CHECK(std::abs(w.weights[0] - 1.118034) <= 1e-6);
  CHECK(w.weight("g0") == w.weights[0]);
  CHECK_THROWS_AS(w.weight("nobody"), std::out_of_range);

  const auto equal = atkinson_weights(groups({0.7, 0.7}, {0.2, 0.8}), 3.0, std::nullopt);
  CHECK(equal.weights[0] == equal.weights[1]);

  const auto mean_ref = atkinson_weights(groups({0.6, 0.9}, {0.25, 0.75}), 1.0, std::nullopt);
  CHECK(mean_ref.reference_health == Approx(0.825));

  CHECK_THROWS_AS(atkinson_weights(groups({0.7}, {1.0}), -0.1, std::nullopt), std::invalid_argument);
  CHECK_THROWS_AS(atkinson_weights(groups({0.0}, {1.0}), 0.5, std::nullopt), std::invalid_argument);
}

TEST_CASE("weights fall as baseline health rises") {
  for (double eps : {0.25, 1.0, 4.0}) {
    const auto w = atkinson_weights(groups({0.5, 0.6, 0.7, 0.8, 0.9}, {0.2, 0.2, 0.2, 0.2, 0.2}), eps, 1.0);
    for (std::size_t g = 1; g < w.weights.size(); ++g) {
      CHECK(w.weights[g] < w.weights[g - 1]);
    }
  }
}

TEST_CASE("equity-weighted NMB hand case") {
  EquityWeights w;
  w.subgroups = {"a", "b"};
  w.weights = {1.2, 0.9};
  const std::vector<SubgroupIncrement> inc{{"a", 0.5, 0.1, 1000.0}, {"b", 0.5, 0.2, 1000.0}};
  CHECK(equity_weighted_nmb(inc, w, 20000.0) == Approx(1950.0));

  EquityWeights one;
  one.subgroups = {"a"};
  one.weights = {1.3};
  const std::vector<SubgroupIncrement> single{{"a", 1.0, 0.1, 500.0}};
  CHECK(equity_weighted_nmb(single, one, 20000.0) == Approx(1.3 * (2000.0 - 500.0)));

  EquityWeights doubled = w;
  for (auto& x : doubled.weights) {
    x *= 2.0;
  }
  CHECK(equity_weighted_nmb(inc, doubled, 20000.0) == Approx(2.0 * 1950.0));
}

TEST_CASE("zero aversion collapses to the unweighted increment exactly on the demo") {
  const auto spec = test::demo_spec();
  const auto eval = evaluate_model(spec);
  const auto w = atkinson_weights(spec.subgroups, 0.0, spec.reference_health);
  for (const auto& p : {Perspective::health_system(), Perspective::societal()}) {
    std::vector<OutcomeTotals> base, alt;
    for (std::size_t g = 0; g < 2; ++g) {
      base.push_back(eval.by_subgroup[0][g].discounted);
      alt.push_back(eval.by_subgroup[1][g].discounted);
    }
    const auto inc = subgroup_increments({"General", "Deprived"}, {0.7, 0.3}, base, alt, p);
    CHECK(equity_weighted_nmb(inc, w, 20000.0) == unweighted_nmb(inc, 20000.0));
    const double pop = (eval.population[1].discounted.qalys - eval.population[0].discounted.qalys) * 20000.0 -
                       (p.cost(eval.population[1].discounted) - p.cost(eval.population[0].discounted));
    CHECK(unweighted_nmb(inc, 20000.0) == Approx(pop).epsilon(1e-12));
  }
}

TEST_CASE("Atkinson index") {
  const std::vector<double> h{0.6, 0.9};
  const std::vector<double> s{0.5, 0.5};
  CHECK(atkinson_index(h, s, 0.0) == 0.0);
  CHECK(atkinson_index(std::vector<double>{0.7, 0.7}, s, 2.0) == 0.0);
  CHECK(atkinson_index(h, s, 0.5) == Approx(atkinson(h, s, 0.5)).epsilon(1e-12));
  const double geometric = std::sqrt(0.6 * 0.9);
  CHECK(atkinson_index(h, s, 1.0) == Approx(1.0 - geometric / 0.75).epsilon(1e-12));
}

TEST_CASE("equity plane coordinates") {
  // Only the worse-off group gains, at no cost.
  const auto bundle = two_group_bundle({{0.2, 0.0, 0.0, 0.0}, {0.1, -50.0, 0.0, 0.0}}, {0.6, 0.9}, {0.5, 0.5});
  const auto points = equity_plane(bundle, 20000.0, 0.5);
  REQUIRE(points.size() == 2);
  CHECK(points[0].net_health_benefit == Approx(0.1));
  const double expected = atkinson({0.6, 0.9}, {0.5, 0.5}, 0.5) - atkinson({0.8, 0.9}, {0.5, 0.5}, 0.5);
  CHECK(points[0].equity_impact == Approx(expected).epsilon(1e-12));
  for (const auto& p : points) {
    CHECK(p.net_health_benefit > 0.0);
    CHECK(p.equity_impact > 0.0);
  }
  CHECK(points[1].net_health_benefit == Approx(0.5 * (0.1 + 50.0 / 20000.0)));

  const auto even = two_group_bundle({{0.1, 10.0, 0.1, 10.0}}, {0.8, 0.8}, {0.5, 0.5});
  CHECK(equity_plane(even, 20000.0, 2.0)[0].equity_impact == 0.0);

  auto single = test::nmb_bundle({{0.0, 1.0}});
  CHECK_THROWS_AS(equity_plane(single, 20000.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(equity_plane(bundle, 0.0, 0.5), std::invalid_argument);
}
