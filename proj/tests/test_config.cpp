#include <catch_amalgamated.hpp>

#include <algorithm>
#include <functional>

#include "support.hpp"
#include "vop/parameters.hpp"

using namespace vop;
using vop::test::demo_spec;
using vop::test::replace_once;

namespace {

std::vector<Diagnostic> errors_of(const ModelSpec& spec) {
  auto d = validate_model_spec(spec);
  std::erase_if(d, [](const Diagnostic& x) { return x.severity != Severity::error; });
  return d;
}

bool mentions(const std::vector<Diagnostic>& diagnostics, const std::string& text) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [&](const Diagnostic& d) { return d.message.find(text) != std::string::npos; });
}

std::vector<Diagnostic> validation_errors(const std::string& yaml) {
  try {
    parse_model_spec(yaml);
  } catch (const ValidationError& e) {
    return e.diagnostics();
  }
  return {};
}

}  // namespace

TEST_CASE("demo config loads with its declared shape") {
  const auto spec = demo_spec();
  CHECK(spec.states.size() == 3);
  CHECK(spec.strategies.size() == 2);
  CHECK(spec.subgroups.size() == 2);
  CHECK(spec.strategies[spec.comparator_index()].name == "StandardCare");
  CHECK(spec.states[2].is_absorbing);
  CHECK(spec.psa.distributions.size() == 8);
  REQUIRE(spec.bia);
  CHECK(spec.bia->uptake.size() == 5);
  CHECK(spec.subgroups[1].parameter_overrides.size() == 2);
  CHECK(spec.strategies[1].state_costs[0].direct_medical == 2000.0);
}

TEST_CASE("serialization round-trips field for field") {
  for (const auto& spec : {demo_spec(), vop::test::reference_spec()}) {
    const auto text = serialize_model_spec(spec);
    const auto again = parse_model_spec(text, "round-trip");
    CHECK(again == spec);
    CHECK(serialize_model_spec(again) == text);
    CHECK(spec_digest(again) == spec_digest(spec));
  }
}

TEST_CASE("a row summing to 0.95 is reported") {
  const auto yaml = replace_once(std::string(demo_discordance_yaml()), "Healthy: [0.91, 0.08, 0.01]",
                                 "Healthy: [0.8, 0.1, 0.05]");
  const auto errors = validation_errors(yaml);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].message == "row sums to 0.95, expected 1");
  CHECK(errors[0].path == "strategies.StandardCare.transition_matrix.Healthy");
}

TEST_CASE("negative inequality aversion is reported") {
  const auto yaml =
      replace_once(std::string(demo_discordance_yaml()), "inequality_aversion: 0.5", "inequality_aversion: -0.5");
  const auto errors = validation_errors(yaml);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].message == "inequality_aversion must be ≥ 0");
}

TEST_CASE("unknown keys and bad types are parse errors with line numbers") {
  const auto yaml = replace_once(std::string(demo_discordance_yaml()), "horizon_cycles: 30", "horizon_cycle: 30");
  try {
    parse_model_spec(yaml);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE_FALSE(e.diagnostics().empty());
    CHECK(mentions(e.diagnostics(), "unknown key 'horizon_cycle'"));
    CHECK(e.diagnostics().front().line > 0);
  }
  const auto typed = replace_once(std::string(demo_discordance_yaml()), "wtp_threshold: 20000", "wtp_threshold: lots");
  CHECK_THROWS_AS(parse_model_spec(typed), ConfigError);
  CHECK_THROWS_AS(parse_model_spec("states: [unclosed"), ConfigError);
}

TEST_CASE("absorbing states with values need an explicit override") {
  auto spec = demo_spec();
  spec.states[2].cost_direct_medical = 10.0;
  CHECK(mentions(errors_of(spec), "absorbing state must have utility 0"));
  spec.states[2].absorbing_override = true;
  CHECK(errors_of(spec).empty());
  const auto all = validate_model_spec(spec);
  CHECK(std::count_if(all.begin(), all.end(), [](const Diagnostic& d) { return d.severity == Severity::warning; }) ==
        1);
}

TEST_CASE("absorbing state must keep its cohort") {
  auto spec = demo_spec();
  spec.strategies[0].transition_matrix[2] = {0.1, 0.0, 0.9};
  CHECK(mentions(errors_of(spec), "self-transition probability 1"));
}

TEST_CASE("a config violating k independent invariants yields k diagnostics") {
  using Mutation = std::function<void(ModelSpec&)>;
  const std::vector<Mutation> mutations{
      [](ModelSpec& s) { s.states[0].utility = 1.5; },
      [](ModelSpec& s) { s.states[1].cost_out_of_pocket = -5.0; },
      [](ModelSpec& s) { s.psa.iterations = 0; },
      [](ModelSpec& s) { s.cycle_length_years = 0.0; },
      [](ModelSpec& s) { s.discount_rate_costs = 1.5; },
      [](ModelSpec& s) { s.discount_rate_effects = -0.1; },
      [](ModelSpec& s) { s.wtp_threshold = -1.0; },
      [](ModelSpec& s) { s.inequality_aversion = -1.0; },
      [](ModelSpec& s) { s.strategies[0].transition_matrix[1] = {0.15, 0.75, 0.2}; },
      [](ModelSpec& s) { s.strategies[1].one_time_cost = -1.0; },
      [](ModelSpec& s) { s.subgroups[0].baseline_health = 0.0; },
      [](ModelSpec& s) { s.reference_health = -1.0; },
      [](ModelSpec& s) { s.sensitivity.sobol_samples = 10; },
      [](ModelSpec& s) { s.sensitivity.bootstrap_resamples = 5; },
      [](ModelSpec& s) { s.bia->eligible_population = -1.0; },
      [](ModelSpec& s) { s.voi.population_size = -5.0; },
      [](ModelSpec& s) { s.initial_distribution = {0.5, 0.0, 0.0}; },
      [](ModelSpec& s) { s.strategies[1].state_costs[0].direct_medical = -3.0; },
  };
  const auto base = demo_spec();
  REQUIRE(errors_of(base).empty());
  for (std::size_t m = 0; m < mutations.size(); ++m) {
    auto spec = base;
    mutations[m](spec);
    INFO("mutation " << m);
    CHECK(errors_of(spec).size() == 1);
  }
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> order(mutations.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto k = std::uniform_int_distribution<std::size_t>(0, mutations.size())(rng);
    auto spec = base;
    for (std::size_t i = 0; i < k; ++i) {
      mutations[order[i]](spec);
    }
    INFO("trial " << trial << ", k = " << k);
    CHECK(errors_of(spec).size() == k);
  }
}

TEST_CASE("strategy and comparator counts are checked") {
  auto spec = demo_spec();
  spec.strategies[1].is_comparator = true;
  CHECK(mentions(errors_of(spec), "exactly one strategy must have comparator"));
  spec = demo_spec();
  spec.strategies.pop_back();
  CHECK(mentions(errors_of(spec), "at least two strategies"));
}

TEST_CASE("subgroup shares must sum to one") {
  auto spec = demo_spec();
  spec.subgroups[0].population_share = 0.6;
  const auto errors = errors_of(spec);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].message == "population shares sum to 0.9, expected 1");
}

TEST_CASE("PSA targets must resolve and match the distribution's domain") {
  auto spec = demo_spec();
  spec.psa.distributions.push_back({DistributionKind::gamma, {2.0, 1.0}, "states.Nowhere.utility"});
  CHECK(mentions(errors_of(spec), "unresolved parameter path"));
  spec = demo_spec();
  spec.psa.distributions.push_back({DistributionKind::gamma, {2.0, 1.0}, "states.Healthy.cost_productivity"});
  spec.psa.distributions.push_back({DistributionKind::beta, {2.0, 1.0}, "states.Healthy.cost_productivity"});
  CHECK(mentions(errors_of(spec), "duplicate distribution"));
  spec = demo_spec();
  spec.psa.distributions[0].kind = DistributionKind::gamma;
  CHECK(errors_of(spec).size() == 1);
}

TEST_CASE("budget impact horizon is bounded") {
  auto spec = demo_spec();
  spec.bia->horizon_years = 7;
  spec.bia->uptake = {0.5};
  CHECK(mentions(errors_of(spec), "between 1 and 5"));
  spec = demo_spec();
  spec.horizon_cycles = 3;
  spec.bia->horizon_years = 4;
  spec.bia->uptake = {0.5};
  CHECK(mentions(errors_of(spec), "exceeds the model horizon"));
}

TEST_CASE("friction-cost method needs a friction period") {
  auto spec = demo_spec();
  spec.productivity_method = ProductivityMethod::friction_cost;
  CHECK(mentions(errors_of(spec), "friction_period_years is required"));
  spec.friction_period_years = 0.25;
  CHECK(errors_of(spec).empty());
}

TEST_CASE("implicit total_population subgroup") {
  auto yaml = std::string(demo_discordance_yaml());
  const auto start = yaml.find("subgroups:");
  const auto end = yaml.find("initial_distribution:");
  yaml.erase(start, end - start);
  const auto spec = parse_model_spec(yaml);
  REQUIRE(spec.subgroups.size() == 1);
  CHECK(spec.subgroups[0].name == "total_population");
  CHECK(spec.subgroups[0].population_share == 1.0);
}

TEST_CASE("subgroup view applies overrides and leaves the base untouched") {
  auto spec = demo_spec();
  const auto before = spec;
  Subgroup g{"Sicker", 1.0, 0.8, {{"states.Sick.utility", 0.5}}};
  const auto view = resolve_subgroup_spec(spec, g);
  CHECK(view.states[1].utility == 0.5);
  auto expected = spec;
  expected.states[1].utility = 0.5;
  CHECK(view == expected);
  CHECK(spec == before);
  CHECK(resolve_subgroup_spec(spec, g) == view);

  Subgroup plain{"Plain", 1.0, 0.8, {}};
  CHECK(resolve_subgroup_spec(spec, plain) == spec);

  Subgroup broken{"Broken", 1.0, 0.8,
                  {{"strategies.StandardCare.transition_matrix.Healthy", std::vector<double>{0.5, 0.2, 0.2}}}};
  CHECK_THROWS_AS(resolve_subgroup_spec(spec, broken), ValidationError);
}

TEST_CASE("demo subgroup view rescales the overridden row") {
  const auto spec = demo_spec();
  const auto view = resolve_subgroup_spec(spec, spec.subgroups[1]);
  const auto& row = view.strategies[0].transition_matrix[0];
  CHECK(row[1] == 0.14);
  CHECK(row[0] + row[1] + row[2] == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(row[0] / row[2] == Catch::Approx(91.0));
}

TEST_CASE("overrides that break a row are caught at validation") {
  auto yaml = replace_once(std::string(demo_discordance_yaml()), "strategies.StandardCare.transition_matrix.Healthy.Sick: 0.14",
                           "strategies.StandardCare.transition_matrix.Healthy: [0.5, 0.2, 0.2]");
  const auto errors = validation_errors(yaml);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].path.find("subgroups.Deprived.overrides") == 0);
  CHECK(errors[0].message == "row sums to 0.9, expected 1");
}

TEST_CASE("parameter paths") {
  auto spec = demo_spec();
  CHECK(get_scalar(spec, "states.Sick.cost_productivity") == 18000.0);
  CHECK(get_scalar(spec, "discount.costs") == 0.03);
  CHECK(get_scalar(spec, "strategies.Intervention.one_time_cost") == 1000.0);
  CHECK(get_scalar(spec, "strategies.StandardCare.transition_matrix.Sick.Dead") == 0.10);
  CHECK(describe_parameter(spec, "strategies.*.transition_matrix.Sick").is_row());
  set_parameter(spec, "strategies.*.transition_matrix.Sick", std::vector<double>{0.2, 0.7, 0.1});
  CHECK(spec.strategies[0].transition_matrix[1] == std::vector<double>{0.2, 0.7, 0.1});
  CHECK(spec.strategies[1].transition_matrix[1] == std::vector<double>{0.2, 0.7, 0.1});
  CHECK_THROWS_AS(get_scalar(spec, "states.Sick.colour"), ParameterPathError);
  CHECK_THROWS_AS(get_scalar(spec, "strategies.Nobody.one_time_cost"), ParameterPathError);
  CHECK(parameter_columns(demo_spec()).size() == 10);
}

TEST_CASE("digest tracks content") {
  auto spec = demo_spec();
  const auto digest = spec_digest(spec);
  CHECK(digest.size() == 64);
  spec.wtp_threshold = 20001.0;
  CHECK(spec_digest(spec) != digest);
}

TEST_CASE("missing config file names the path") {
  try {
    load_model_spec("/nonexistent/model.yaml");
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/model.yaml") != std::string::npos);
  }
}
