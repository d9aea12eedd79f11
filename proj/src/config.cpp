#include "vop/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "vop/parameters.hpp"

namespace vop {

namespace {

constexpr double kStochasticTolerance = 1e-9;

bool is_identifier(std::string_view name) {
  if (name.empty()) {
    return false;
  }
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c == '-';
  });
}

std::string format_number(double value) {
  std::ostringstream out;
  out << std::setprecision(10) << value;
  return out.str();
}

std::string join_messages(std::string_view header, const std::vector<Diagnostic>& diagnostics) {
  std::string text(header);
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::error) {
      text += "\n  " + d.to_string();
    }
  }
  return text;
}

// ---------------------------------------------------------------------------
// YAML -> ModelSpec
// ---------------------------------------------------------------------------

class SpecParser {
 public:
  explicit SpecParser(std::vector<Diagnostic>& errors) : errors_(errors) {}

  ModelSpec parse(const YAML::Node& root) {
    ModelSpec spec;
    if (!root.IsMap()) {
      error(root, "", "top level must be a mapping");
      return spec;
    }
    check_keys(root, "",
               {"states", "strategies", "subgroups", "initial_distribution", "horizon_cycles",
                "cycle_length_years", "half_cycle", "discount", "wtp_threshold", "inequality_aversion",
                "reference_health", "productivity_method", "friction_period_years", "psa", "bia", "voi",
                "sensitivity"});

    parse_states(root["states"], spec);
    parse_strategies(root["strategies"], spec);
    parse_subgroups(root["subgroups"], spec);
    parse_initial(root["initial_distribution"], spec);

    if (auto v = required_int(root, "horizon_cycles", "horizon_cycles")) {
      spec.horizon_cycles = *v;
    }
    read_into(root, "cycle_length_years", "cycle_length_years", spec.cycle_length_years);
    read_into(root, "half_cycle", "half_cycle", spec.half_cycle);
    if (const auto discount = root["discount"]) {
      if (expect_map(discount, "discount")) {
        check_keys(discount, "discount", {"costs", "effects"});
        read_into(discount, "costs", "discount.costs", spec.discount_rate_costs);
        read_into(discount, "effects", "discount.effects", spec.discount_rate_effects);
      }
    }
    read_into(root, "wtp_threshold", "wtp_threshold", spec.wtp_threshold);
    read_into(root, "inequality_aversion", "inequality_aversion", spec.inequality_aversion);
    if (const auto ref = root["reference_health"]) {
      if (ref.IsScalar() && ref.Scalar() == "population-mean") {
        spec.reference_health.reset();
      } else if (auto v = as_double(ref, "reference_health")) {
        spec.reference_health = *v;
      }
    }
    if (const auto method = root["productivity_method"]) {
      if (auto text = as_string(method, "productivity_method")) {
        if (*text == "human-capital") {
          spec.productivity_method = ProductivityMethod::human_capital;
        } else if (*text == "friction-cost") {
          spec.productivity_method = ProductivityMethod::friction_cost;
        } else {
          error(method, "productivity_method", "expected 'human-capital' or 'friction-cost', got '" + *text + "'");
        }
      }
    }
    if (const auto friction = root["friction_period_years"]) {
      if (auto v = as_double(friction, "friction_period_years")) {
        spec.friction_period_years = *v;
      }
    }
    parse_psa(root["psa"], spec);
    parse_bia(root["bia"], spec);
    parse_voi(root["voi"], spec);
    parse_sensitivity(root["sensitivity"], spec);
    return spec;
  }

 private:
  std::vector<Diagnostic>& errors_;

  void error(const YAML::Node& node, std::string path, std::string message) {
    Diagnostic d{Severity::error, std::move(path), std::move(message), -1};
    if (node.IsDefined()) {
      d.line = node.Mark().line + 1;
    }
    errors_.push_back(std::move(d));
  }

  void check_keys(const YAML::Node& map, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& item : map) {
      const auto key = item.first.Scalar();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        error(item.first, path.empty() ? key : path + "." + key, "unknown key '" + key + "'");
      }
    }
  }

  bool expect_map(const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) {
      error(node, path, "expected a mapping");
      return false;
    }
    return true;
  }

  bool expect_sequence(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence()) {
      error(node, path, "expected a list");
      return false;
    }
    return true;
  }

  std::optional<double> as_double(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
      error(node, path, "expected a number");
      return std::nullopt;
    }
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      error(node, path, "expected a number, got '" + node.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<long long> as_integer(const YAML::Node& node, const std::string& path) {
    if (node.IsScalar()) {
      try {
        return node.as<long long>();
      } catch (const YAML::Exception&) {
      }
    }
    error(node, path, "expected an integer");
    return std::nullopt;
  }

  std::optional<bool> as_bool(const YAML::Node& node, const std::string& path) {
    if (node.IsScalar()) {
      try {
        return node.as<bool>();
      } catch (const YAML::Exception&) {
      }
    }
    error(node, path, "expected true or false");
    return std::nullopt;
  }

  std::optional<std::string> as_string(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
      error(node, path, "expected a string");
      return std::nullopt;
    }
    return node.Scalar();
  }

  std::optional<std::vector<double>> as_double_list(const YAML::Node& node, const std::string& path) {
    if (!expect_sequence(node, path)) {
      return std::nullopt;
    }
    std::vector<double> values;
    bool ok = true;
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (auto v = as_double(node[i], path + "[" + std::to_string(i) + "]")) {
        values.push_back(*v);
      } else {
        ok = false;
      }
    }
    if (!ok) {
      return std::nullopt;
    }
    return values;
  }

  void read_into(const YAML::Node& map, const char* key, const std::string& path, double& out) {
    if (const auto node = map[key]) {
      if (auto v = as_double(node, path)) {
        out = *v;
      }
    }
  }

  void read_into(const YAML::Node& map, const char* key, const std::string& path, bool& out) {
    if (const auto node = map[key]) {
      if (auto v = as_bool(node, path)) {
        out = *v;
      }
    }
  }

  std::optional<int> required_int(const YAML::Node& map, const char* key, const std::string& path) {
    const auto node = map[key];
    if (!node) {
      error(map, path, "missing required key '" + std::string(key) + "'");
      return std::nullopt;
    }
    if (auto v = as_integer(node, path)) {
      return static_cast<int>(*v);
    }
    return std::nullopt;
  }

  std::optional<std::string> required_name(const YAML::Node& map, const std::string& path) {
    const auto node = map["name"];
    if (!node) {
      error(map, path, "missing required key 'name'");
      return std::nullopt;
    }
    return as_string(node, path + ".name");
  }

  void parse_states(const YAML::Node& node, ModelSpec& spec) {
    if (!node) {
      error(node, "states", "missing required key 'states'");
      return;
    }
    if (!expect_sequence(node, "states")) {
      return;
    }
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto item = node[i];
      const std::string path = "states[" + std::to_string(i) + "]";
      if (!expect_map(item, path)) {
        continue;
      }
      check_keys(item, path,
                 {"name", "utility", "cost_direct_medical", "cost_productivity", "cost_out_of_pocket", "absorbing",
                  "absorbing_override"});
      HealthState state;
      if (auto name = required_name(item, path)) {
        state.name = *name;
      }
      read_into(item, "utility", path + ".utility", state.utility);
      read_into(item, "cost_direct_medical", path + ".cost_direct_medical", state.cost_direct_medical);
      read_into(item, "cost_productivity", path + ".cost_productivity", state.cost_productivity);
      read_into(item, "cost_out_of_pocket", path + ".cost_out_of_pocket", state.cost_out_of_pocket);
      read_into(item, "absorbing", path + ".absorbing", state.is_absorbing);
      read_into(item, "absorbing_override", path + ".absorbing_override", state.absorbing_override);
      spec.states.push_back(std::move(state));
    }
  }

  std::optional<std::size_t> state_ref(const ModelSpec& spec, const YAML::Node& key_node, const std::string& path) {
    const auto name = key_node.Scalar();
    if (auto idx = spec.state_index(name)) {
      return idx;
    }
    error(key_node, path, "unknown state '" + name + "'");
    return std::nullopt;
  }

  void parse_strategies(const YAML::Node& node, ModelSpec& spec) {
    if (!node) {
      error(node, "strategies", "missing required key 'strategies'");
      return;
    }
    if (!expect_sequence(node, "strategies")) {
      return;
    }
    const std::size_t n_states = spec.states.size();
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto item = node[i];
      std::string path = "strategies[" + std::to_string(i) + "]";
      if (!expect_map(item, path)) {
        continue;
      }
      check_keys(item, path,
                 {"name", "comparator", "one_time_cost", "one_time_cost_component", "state_costs",
                  "transition_matrix"});
      Strategy strategy;
      if (auto name = required_name(item, path)) {
        strategy.name = *name;
        path = "strategies." + *name;
      }
      read_into(item, "comparator", path + ".comparator", strategy.is_comparator);
      read_into(item, "one_time_cost", path + ".one_time_cost", strategy.one_time_cost);
      if (const auto comp = item["one_time_cost_component"]) {
        if (auto text = as_string(comp, path + ".one_time_cost_component")) {
          if (auto c = parse_cost_component(*text)) {
            strategy.one_time_cost_component = *c;
          } else {
            error(comp, path + ".one_time_cost_component", "unknown cost component '" + *text + "'");
          }
        }
      }
      if (const auto costs = item["state_costs"]) {
        if (expect_map(costs, path + ".state_costs")) {
          strategy.state_costs.assign(n_states, StateCosts{});
          for (const auto& entry : costs) {
            const std::string entry_path = path + ".state_costs." + entry.first.Scalar();
            const auto idx = state_ref(spec, entry.first, entry_path);
            if (!expect_map(entry.second, entry_path)) {
              continue;
            }
            for (const auto& c : entry.second) {
              const auto comp = parse_cost_component(c.first.Scalar());
              if (!comp) {
                error(c.first, entry_path + "." + c.first.Scalar(), "unknown cost component '" + c.first.Scalar() + "'");
                continue;
              }
              if (auto v = as_double(c.second, entry_path + "." + c.first.Scalar()); v && idx) {
                strategy.state_costs[*idx].get(*comp) = *v;
              }
            }
          }
        }
      }
      const auto matrix = item["transition_matrix"];
      if (!matrix) {
        error(item, path, "missing required key 'transition_matrix'");
      } else if (expect_map(matrix, path + ".transition_matrix")) {
        strategy.transition_matrix.assign(n_states, {});
        for (const auto& row : matrix) {
          const std::string row_path = path + ".transition_matrix." + row.first.Scalar();
          const auto from = state_ref(spec, row.first, row_path);
          auto values = as_double_list(row.second, row_path);
          if (from && values) {
            strategy.transition_matrix[*from] = std::move(*values);
          }
        }
      }
      spec.strategies.push_back(std::move(strategy));
    }
  }

  std::optional<ParameterValue> parameter_value(const YAML::Node& node, const std::string& path) {
    if (node.IsSequence()) {
      if (auto row = as_double_list(node, path)) {
        return ParameterValue{std::move(*row)};
      }
      return std::nullopt;
    }
    if (auto v = as_double(node, path)) {
      return ParameterValue{*v};
    }
    return std::nullopt;
  }

  void parse_subgroups(const YAML::Node& node, ModelSpec& spec) {
    if (!node) {
      spec.subgroups.push_back(Subgroup{"total_population", 1.0, 1.0, {}});
      return;
    }
    if (!expect_sequence(node, "subgroups")) {
      return;
    }
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto item = node[i];
      std::string path = "subgroups[" + std::to_string(i) + "]";
      if (!expect_map(item, path)) {
        continue;
      }
      check_keys(item, path, {"name", "population_share", "baseline_health", "overrides"});
      Subgroup group;
      if (auto name = required_name(item, path)) {
        group.name = *name;
        path = "subgroups." + *name;
      }
      read_into(item, "population_share", path + ".population_share", group.population_share);
      read_into(item, "baseline_health", path + ".baseline_health", group.baseline_health);
      if (const auto overrides = item["overrides"]) {
        if (expect_map(overrides, path + ".overrides")) {
          for (const auto& entry : overrides) {
            const auto key = entry.first.Scalar();
            if (auto value = parameter_value(entry.second, path + ".overrides." + key)) {
              group.parameter_overrides.emplace_back(key, std::move(*value));
            }
          }
        }
      }
      spec.subgroups.push_back(std::move(group));
    }
  }

  void parse_initial(const YAML::Node& node, ModelSpec& spec) {
    if (!node) {
      error(node, "initial_distribution", "missing required key 'initial_distribution'");
      return;
    }
    if (node.IsMap()) {
      spec.initial_distribution.assign(spec.states.size(), 0.0);
      for (const auto& entry : node) {
        const std::string path = "initial_distribution." + entry.first.Scalar();
        const auto idx = state_ref(spec, entry.first, path);
        if (auto v = as_double(entry.second, path); v && idx) {
          spec.initial_distribution[*idx] = *v;
        }
      }
      return;
    }
    if (auto values = as_double_list(node, "initial_distribution")) {
      spec.initial_distribution = std::move(*values);
    }
  }

  void parse_psa(const YAML::Node& node, ModelSpec& spec) {
    if (!node || !expect_map(node, "psa")) {
      return;
    }
    check_keys(node, "psa", {"iterations", "seed", "distributions"});
    if (const auto it = node["iterations"]) {
      if (auto v = as_integer(it, "psa.iterations")) {
        if (*v < 0) {
          error(it, "psa.iterations", "iterations must be >= 1");
        } else {
          spec.psa.iterations = static_cast<std::size_t>(*v);
        }
      }
    }
    if (const auto seed = node["seed"]) {
      try {
        spec.psa.seed = seed.as<std::uint64_t>();
      } catch (const YAML::Exception&) {
        error(seed, "psa.seed", "expected a non-negative integer seed");
      }
    }
    const auto dists = node["distributions"];
    if (!dists || !expect_sequence(dists, "psa.distributions")) {
      return;
    }
    for (std::size_t i = 0; i < dists.size(); ++i) {
      const auto item = dists[i];
      const std::string path = "psa.distributions[" + std::to_string(i) + "]";
      if (!expect_map(item, path)) {
        continue;
      }
      DistributionSpec dist;
      const auto target = item["target"];
      const auto kind = item["kind"];
      if (!target || !kind) {
        error(item, path, "distribution needs 'target' and 'kind'");
        continue;
      }
      if (auto text = as_string(target, path + ".target")) {
        dist.target = *text;
      }
      auto kind_text = as_string(kind, path + ".kind");
      if (!kind_text) {
        continue;
      }
      auto parsed = parse_distribution_kind(*kind_text);
      if (!parsed) {
        error(kind, path + ".kind", "unknown distribution kind '" + *kind_text + "'");
        continue;
      }
      dist.kind = *parsed;
      const auto names = distribution_parameter_names(dist.kind);
      bool complete = true;
      for (const auto& item_key : item) {
        const auto key = item_key.first.Scalar();
        if (key != "target" && key != "kind" && std::find(names.begin(), names.end(), key) == names.end()) {
          error(item_key.first, path + "." + key, "unknown parameter '" + key + "' for " + *kind_text);
        }
      }
      for (const auto name : names) {
        const auto value = item[std::string(name)];
        if (!value) {
          error(item, path, std::string("missing parameter '") + std::string(name) + "' for " + *kind_text);
          complete = false;
          continue;
        }
        if (auto v = as_double(value, path + "." + std::string(name))) {
          dist.parameters.push_back(*v);
        } else {
          complete = false;
        }
      }
      if (complete) {
        spec.psa.distributions.push_back(std::move(dist));
      }
    }
  }

  void parse_bia(const YAML::Node& node, ModelSpec& spec) {
    if (!node || !expect_map(node, "bia")) {
      return;
    }
    check_keys(node, "bia", {"eligible_population", "uptake", "horizon_years", "discounting", "perspective"});
    BudgetImpactSpec bia;
    read_into(node, "eligible_population", "bia.eligible_population", bia.eligible_population);
    if (const auto uptake = node["uptake"]) {
      if (uptake.IsSequence()) {
        if (auto values = as_double_list(uptake, "bia.uptake")) {
          bia.uptake = std::move(*values);
        }
      } else if (auto v = as_double(uptake, "bia.uptake")) {
        bia.uptake = {*v};
      }
    }
    if (const auto years = node["horizon_years"]) {
      if (auto v = as_integer(years, "bia.horizon_years")) {
        bia.horizon_years = static_cast<int>(*v);
      }
    }
    read_into(node, "discounting", "bia.discounting", bia.discounting);
    if (const auto p = node["perspective"]) {
      if (auto text = as_string(p, "bia.perspective")) {
        if (auto kind = parse_perspective_kind(*text)) {
          bia.perspective = *kind;
        } else {
          error(p, "bia.perspective", "unknown perspective '" + *text + "'");
        }
      }
    }
    spec.bia = std::move(bia);
  }

  void parse_voi(const YAML::Node& node, ModelSpec& spec) {
    if (!node || !expect_map(node, "voi")) {
      return;
    }
    check_keys(node, "voi", {"population_size", "evppi_groups", "evop_mode"});
    if (const auto pop = node["population_size"]) {
      if (auto v = as_double(pop, "voi.population_size")) {
        spec.voi.population_size = *v;
      }
    }
    if (const auto mode = node["evop_mode"]) {
      if (auto text = as_string(mode, "voi.evop_mode")) {
        if (*text == "per-iteration") {
          spec.voi.evop_mode = EvopMode::per_iteration;
        } else if (*text == "fixed-decision") {
          spec.voi.evop_mode = EvopMode::fixed_decision;
        } else {
          error(mode, "voi.evop_mode", "expected 'per-iteration' or 'fixed-decision'");
        }
      }
    }
    if (const auto groups = node["evppi_groups"]) {
      if (expect_map(groups, "voi.evppi_groups")) {
        for (const auto& entry : groups) {
          const std::string path = "voi.evppi_groups." + entry.first.Scalar();
          if (!expect_sequence(entry.second, path)) {
            continue;
          }
          std::vector<std::string> columns;
          for (const auto& col : entry.second) {
            if (auto text = as_string(col, path)) {
              columns.push_back(*text);
            }
          }
          spec.voi.evppi_groups.emplace_back(entry.first.Scalar(), std::move(columns));
        }
      }
    }
  }

  void parse_sensitivity(const YAML::Node& node, ModelSpec& spec) {
    if (!node || !expect_map(node, "sensitivity")) {
      return;
    }
    check_keys(node, "sensitivity", {"ranges", "sobol_samples", "bootstrap_resamples"});
    if (const auto n = node["sobol_samples"]) {
      if (auto v = as_integer(n, "sensitivity.sobol_samples"); v && *v >= 0) {
        spec.sensitivity.sobol_samples = static_cast<std::size_t>(*v);
      }
    }
    if (const auto n = node["bootstrap_resamples"]) {
      if (auto v = as_integer(n, "sensitivity.bootstrap_resamples"); v && *v >= 0) {
        spec.sensitivity.bootstrap_resamples = static_cast<std::size_t>(*v);
      }
    }
    if (const auto ranges = node["ranges"]) {
      if (expect_map(ranges, "sensitivity.ranges")) {
        for (const auto& entry : ranges) {
          const std::string path = "sensitivity.ranges." + entry.first.Scalar();
          auto bounds = as_double_list(entry.second, path);
          if (!bounds) {
            continue;
          }
          if (bounds->size() != 2) {
            error(entry.second, path, "range must be [low, high]");
            continue;
          }
          spec.sensitivity.ranges.emplace_back(entry.first.Scalar(), std::pair{(*bounds)[0], (*bounds)[1]});
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

class Validator {
 public:
  std::vector<Diagnostic> run(const ModelSpec& spec) {
    const bool core_ok = check_core(spec);
    check_subgroups(spec, core_ok);
    check_model(spec);
    check_psa(spec);
    check_bia(spec);
    check_voi(spec, core_ok);
    check_sensitivity(spec, core_ok);
    return std::move(out_);
  }

  // States and strategies only; used again on merged subgroup views.
  bool check_core(const ModelSpec& spec) {
    const auto before = error_count();
    check_states(spec);
    check_strategies(spec);
    return error_count() == before;
  }

  std::vector<Diagnostic> take() { return std::move(out_); }

 private:
  std::vector<Diagnostic> out_;

  std::size_t error_count() const {
    return static_cast<std::size_t>(
        std::count_if(out_.begin(), out_.end(), [](const auto& d) { return d.severity == Severity::error; }));
  }

  void error(std::string path, std::string message) {
    out_.push_back(Diagnostic{Severity::error, std::move(path), std::move(message), -1});
  }
  void warning(std::string path, std::string message) {
    out_.push_back(Diagnostic{Severity::warning, std::move(path), std::move(message), -1});
  }

  void check_unique_names(const std::vector<std::string>& names, const std::string& section) {
    std::set<std::string> seen;
    for (const auto& name : names) {
      if (!is_identifier(name)) {
        error(section + "." + name, "name '" + name + "' must be a non-empty identifier (letters, digits, '_', '-')");
      } else if (!seen.insert(name).second) {
        error(section + "." + name, "duplicate name '" + name + "'");
      }
    }
  }

  void check_states(const ModelSpec& spec) {
    if (spec.states.empty()) {
      error("states", "at least one state is required");
      return;
    }
    std::vector<std::string> names;
    for (const auto& s : spec.states) {
      names.push_back(s.name);
    }
    check_unique_names(names, "states");
    for (const auto& s : spec.states) {
      const std::string path = "states." + s.name;
      if (!(s.utility >= 0.0 && s.utility <= 1.0)) {
        error(path + ".utility", "utility must lie in [0, 1], got " + format_number(s.utility));
      }
      for (const auto component : kCostComponents) {
        const double c = s.cost(component);
        if (!(c >= 0.0) || !std::isfinite(c)) {
          error(path + ".cost_" + std::string(to_string(component)),
                "cost must be finite and >= 0, got " + format_number(c));
        }
      }
      if (s.is_absorbing) {
        const bool nonzero = s.utility != 0.0 || s.cost_direct_medical != 0.0 || s.cost_productivity != 0.0 ||
                             s.cost_out_of_pocket != 0.0;
        if (nonzero && !s.absorbing_override) {
          error(path, "absorbing state must have utility 0 and zero costs (set absorbing_override: true to accept)");
        } else if (nonzero) {
          warning(path, "absorbing state carries nonzero utility or costs (absorbing_override accepted)");
        }
      }
    }
  }

  void check_row(const std::string& path, const std::vector<double>& row, std::size_t n_states,
                 std::optional<std::size_t> absorbing_index) {
    if (row.size() != n_states) {
      error(path, "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(n_states));
      return;
    }
    if (!std::all_of(row.begin(), row.end(), [](double p) { return p >= 0.0 && p <= 1.0; })) {
      error(path, "transition probabilities must lie in [0, 1]");
    }
    double sum = 0.0;
    for (double p : row) {
      sum += p;
    }
    if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
      error(path, "row sums to " + format_number(sum) + ", expected 1");
    }
    if (absorbing_index && !(std::abs(row[*absorbing_index] - 1.0) <= kStochasticTolerance)) {
      error(path, "absorbing state must have self-transition probability 1");
    }
  }

  void check_strategies(const ModelSpec& spec) {
    if (spec.strategies.size() < 2) {
      error("strategies", "at least two strategies (one comparator and one intervention) are required");
    }
    std::vector<std::string> names;
    for (const auto& s : spec.strategies) {
      names.push_back(s.name);
    }
    check_unique_names(names, "strategies");
    const auto comparators =
        std::count_if(spec.strategies.begin(), spec.strategies.end(), [](const auto& s) { return s.is_comparator; });
    if (!spec.strategies.empty() && comparators != 1) {
      error("strategies", "exactly one strategy must have comparator: true, found " + std::to_string(comparators));
    }
    const std::size_t n = spec.states.size();
    for (const auto& strategy : spec.strategies) {
      const std::string path = "strategies." + strategy.name;
      if (strategy.transition_matrix.size() != n) {
        error(path + ".transition_matrix", "matrix has " + std::to_string(strategy.transition_matrix.size()) +
                                               " rows, expected " + std::to_string(n));
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          check_row(path + ".transition_matrix." + spec.states[i].name, strategy.transition_matrix[i], n,
                    spec.states[i].is_absorbing ? std::optional<std::size_t>(i) : std::nullopt);
        }
      }
      if (!(strategy.one_time_cost >= 0.0) || !std::isfinite(strategy.one_time_cost)) {
        error(path + ".one_time_cost", "one_time_cost must be finite and >= 0");
      }
      if (!strategy.state_costs.empty()) {
        if (strategy.state_costs.size() != n) {
          error(path + ".state_costs", "state_costs must have one entry per state");
        } else {
          for (std::size_t i = 0; i < n; ++i) {
            for (const auto component : kCostComponents) {
              const double c = strategy.state_costs[i].get(component);
              if (!(c >= 0.0) || !std::isfinite(c)) {
                error(path + ".state_costs." + spec.states[i].name + "." + std::string(to_string(component)),
                      "cost must be finite and >= 0, got " + format_number(c));
              }
            }
          }
        }
      }
    }
  }

  void check_subgroups(const ModelSpec& spec, bool core_ok) {
    if (spec.subgroups.empty()) {
      error("subgroups", "at least one subgroup is required");
      return;
    }
    std::vector<std::string> names;
    for (const auto& g : spec.subgroups) {
      names.push_back(g.name);
    }
    check_unique_names(names, "subgroups");
    double total = 0.0;
    bool shares_ok = true;
    for (const auto& g : spec.subgroups) {
      const std::string path = "subgroups." + g.name;
      if (!(g.population_share >= 0.0 && g.population_share <= 1.0)) {
        error(path + ".population_share", "population_share must lie in [0, 1]");
        shares_ok = false;
      }
      total += g.population_share;
      if (!(g.baseline_health > 0.0) || !std::isfinite(g.baseline_health)) {
        error(path + ".baseline_health", "baseline_health must be > 0");
      }
      for (const auto& [key, value] : g.parameter_overrides) {
        const std::string opath = path + ".overrides." + key;
        try {
          const auto info = describe_parameter(spec, key);
          const bool is_row = std::holds_alternative<std::vector<double>>(value);
          if (info.is_row() != is_row) {
            error(opath, is_row ? "override gives a row for a scalar parameter"
                                : "override gives a scalar for a transition row");
          } else if (!is_row && !in_domain(info.domain, std::get<double>(value))) {
            error(opath, "override value " + format_number(std::get<double>(value)) + " is outside the " +
                             std::string(to_string(info.domain)) + " domain");
          }
        } catch (const ParameterPathError& e) {
          error(opath, e.what());
        }
      }
      if (core_ok && !g.parameter_overrides.empty()) {
        check_merged_view(spec, g);
      }
    }
    if (shares_ok && !(std::abs(total - 1.0) <= kStochasticTolerance)) {
      error("subgroups", "population shares sum to " + format_number(total) + ", expected 1");
    }
  }

  // Only row-stochastic problems introduced by merging are reported here; bad
  // override values were already reported above.
  void check_merged_view(const ModelSpec& spec, const Subgroup& g) {
    ModelSpec merged = spec;
    for (const auto& [key, value] : g.parameter_overrides) {
      try {
        const auto info = describe_parameter(spec, key);
        if (info.is_row() != std::holds_alternative<std::vector<double>>(value)) {
          return;
        }
        if (!info.is_row() && !in_domain(info.domain, std::get<double>(value))) {
          return;
        }
        set_parameter(merged, key, value);
      } catch (const ParameterPathError&) {
        return;
      }
    }
    Validator inner;
    inner.check_strategies(merged);
    for (auto& d : inner.take()) {
      if (d.severity == Severity::error) {
        d.path = "subgroups." + g.name + ".overrides -> " + d.path;
        out_.push_back(std::move(d));
      }
    }
  }

  void check_model(const ModelSpec& spec) {
    const auto& init = spec.initial_distribution;
    if (init.size() != spec.states.size()) {
      error("initial_distribution", "has " + std::to_string(init.size()) + " entries, expected " +
                                        std::to_string(spec.states.size()));
    } else {
      if (!std::all_of(init.begin(), init.end(), [](double p) { return p >= 0.0 && p <= 1.0; })) {
        error("initial_distribution", "entries must lie in [0, 1]");
      }
      double sum = 0.0;
      for (double p : init) {
        sum += p;
      }
      if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
        error("initial_distribution", "sums to " + format_number(sum) + ", expected 1");
      }
    }
    if (spec.horizon_cycles < 1) {
      error("horizon_cycles", "horizon_cycles must be >= 1");
    }
    if (!(spec.cycle_length_years > 0.0) || !std::isfinite(spec.cycle_length_years)) {
      error("cycle_length_years", "cycle_length_years must be > 0");
    }
    if (!(spec.discount_rate_costs >= 0.0 && spec.discount_rate_costs < 1.0)) {
      error("discount.costs", "discount rate must lie in [0, 1)");
    }
    if (!(spec.discount_rate_effects >= 0.0 && spec.discount_rate_effects < 1.0)) {
      error("discount.effects", "discount rate must lie in [0, 1)");
    }
    if (!(spec.wtp_threshold >= 0.0) || !std::isfinite(spec.wtp_threshold)) {
      error("wtp_threshold", "wtp_threshold must be finite and >= 0");
    }
    if (!(spec.inequality_aversion >= 0.0) || !std::isfinite(spec.inequality_aversion)) {
      error("inequality_aversion", "inequality_aversion must be ≥ 0");
    }
    if (spec.reference_health && !(*spec.reference_health > 0.0)) {
      error("reference_health", "reference_health must be > 0 or 'population-mean'");
    }
    if (spec.productivity_method == ProductivityMethod::friction_cost) {
      if (!spec.friction_period_years) {
        error("friction_period_years", "friction_period_years is required with productivity_method: friction-cost");
      } else if (!(*spec.friction_period_years > 0.0)) {
        error("friction_period_years", "friction_period_years must be > 0");
      }
    }
  }

  void check_psa(const ModelSpec& spec) {
    if (spec.psa.iterations < 1) {
      error("psa.iterations", "iterations must be >= 1");
    }
    std::set<std::string> targets;
    for (std::size_t i = 0; i < spec.psa.distributions.size(); ++i) {
      const auto& d = spec.psa.distributions[i];
      const std::string path = "psa.distributions[" + std::to_string(i) + "] (" + d.target + ")";
      if (!targets.insert(d.target).second) {
        error(path, "duplicate distribution for target '" + d.target + "'");
        continue;
      }
      std::optional<ParameterInfo> info;
      try {
        info = describe_parameter(spec, d.target);
      } catch (const ParameterPathError& e) {
        error(path, std::string("unresolved parameter path: ") + e.what());
        continue;
      }
      const auto& p = d.parameters;
      if (p.size() != distribution_parameter_names(d.kind).size()) {
        error(path, "wrong number of parameters for " + std::string(to_string(d.kind)));
        continue;
      }
      std::string problem;
      switch (d.kind) {
        case DistributionKind::beta:
          if (info->domain != ParameterDomain::unit_interval) {
            problem = "beta may only target probabilities or utilities";
          } else if (!(p[0] > 0.0 && p[1] > 0.0)) {
            problem = "beta requires alpha > 0 and beta > 0";
          }
          break;
        case DistributionKind::gamma:
          if (info->domain != ParameterDomain::nonnegative) {
            problem = "gamma may only target nonnegative quantities (costs)";
          } else if (!(p[0] > 0.0 && p[1] > 0.0)) {
            problem = "gamma requires shape > 0 and scale > 0";
          }
          break;
        case DistributionKind::lognormal:
          if (info->domain != ParameterDomain::nonnegative) {
            problem = "lognormal may only target nonnegative quantities (costs)";
          } else if (!(std::isfinite(p[0]) && p[1] >= 0.0)) {
            problem = "lognormal requires finite meanlog and sdlog >= 0";
          }
          break;
        case DistributionKind::normal:
          if (info->is_row()) {
            problem = "normal cannot target a transition row";
          } else if (!(std::isfinite(p[0]) && p[1] >= 0.0)) {
            problem = "normal requires finite mean and sd >= 0";
          }
          break;
        case DistributionKind::uniform:
          if (info->is_row()) {
            problem = "uniform cannot target a transition row";
          } else if (!(p[0] <= p[1])) {
            problem = "uniform requires min <= max";
          } else if (!in_domain(info->domain, p[0]) || !in_domain(info->domain, p[1])) {
            problem = "uniform bounds fall outside the target's " + std::string(to_string(info->domain)) + " domain";
          }
          break;
        case DistributionKind::dirichlet_row:
          if (!info->is_row()) {
            problem = "dirichlet-row must target a full transition row";
          } else if (!(p[0] > 0.0)) {
            problem = "dirichlet-row requires precision > 0";
          }
          break;
      }
      if (!problem.empty()) {
        error(path, problem);
      }
    }
  }

  void check_bia(const ModelSpec& spec) {
    if (!spec.bia) {
      return;
    }
    const auto& bia = *spec.bia;
    if (!(bia.eligible_population >= 0.0) || !std::isfinite(bia.eligible_population)) {
      error("bia.eligible_population", "eligible_population must be >= 0");
    }
    if (bia.horizon_years < 1 || bia.horizon_years > 5) {
      error("bia.horizon_years", "horizon_years must be between 1 and 5");
    } else if (spec.cycle_length_years > 0.0 &&
               bia.horizon_years > spec.horizon_cycles * spec.cycle_length_years + 1e-9) {
      error("bia.horizon_years", "horizon_years exceeds the model horizon");
    }
    if (bia.uptake.empty() || !std::all_of(bia.uptake.begin(), bia.uptake.end(),
                                           [](double u) { return u >= 0.0 && u <= 1.0; })) {
      error("bia.uptake", "uptake rates must lie in [0, 1]");
    }
    if (bia.uptake.size() > 1 && static_cast<int>(bia.uptake.size()) != bia.horizon_years) {
      error("bia.uptake", "uptake schedule has " + std::to_string(bia.uptake.size()) + " entries, expected " +
                              std::to_string(bia.horizon_years));
    }
  }

  void check_voi(const ModelSpec& spec, bool core_ok) {
    if (spec.voi.population_size && !(*spec.voi.population_size >= 0.0)) {
      error("voi.population_size", "population_size must be >= 0");
    }
    if (spec.voi.evppi_groups.empty() || !core_ok) {
      return;
    }
    std::vector<std::string> columns;
    try {
      columns = parameter_columns(spec);
    } catch (const ParameterPathError&) {
      return;  // already reported by check_psa
    }
    for (const auto& [name, members] : spec.voi.evppi_groups) {
      if (members.empty()) {
        error("voi.evppi_groups." + name, "parameter subset is empty");
        continue;
      }
      for (const auto& m : members) {
        if (std::find(columns.begin(), columns.end(), m) == columns.end()) {
          error("voi.evppi_groups." + name, "unknown sampled parameter '" + m + "'");
        }
      }
    }
  }

  void check_sensitivity(const ModelSpec& spec, bool core_ok) {
    if (spec.sensitivity.sobol_samples < 64) {
      error("sensitivity.sobol_samples", "sobol_samples must be >= 64");
    }
    if (spec.sensitivity.bootstrap_resamples < 100) {
      error("sensitivity.bootstrap_resamples", "bootstrap_resamples must be >= 100");
    }
    if (!core_ok) {
      return;
    }
    for (const auto& [path, range] : spec.sensitivity.ranges) {
      const std::string rpath = "sensitivity.ranges." + path;
      try {
        const auto info = describe_parameter(spec, path);
        if (info.is_row()) {
          error(rpath, "one-way ranges apply to scalar parameters only");
        } else if (!(range.first <= range.second)) {
          error(rpath, "range requires low <= high");
        } else if (!in_domain(info.domain, range.first) || !in_domain(info.domain, range.second)) {
          error(rpath, "range falls outside the parameter's " + std::string(to_string(info.domain)) + " domain");
        }
      } catch (const ParameterPathError& e) {
        error(rpath, e.what());
      }
    }
  }
};

// ---------------------------------------------------------------------------
// ModelSpec -> YAML
// ---------------------------------------------------------------------------

void emit_row(YAML::Emitter& out, const std::vector<double>& row) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double v : row) {
    out << v;
  }
  out << YAML::EndSeq;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(CostComponent component) {
  switch (component) {
    case CostComponent::direct_medical:
      return "direct_medical";
    case CostComponent::productivity:
      return "productivity";
    case CostComponent::out_of_pocket:
      return "out_of_pocket";
  }
  return "unknown";
}

std::optional<CostComponent> parse_cost_component(std::string_view text) {
  for (const auto c : kCostComponents) {
    if (to_string(c) == text) {
      return c;
    }
  }
  return std::nullopt;
}

std::string_view to_string(PerspectiveKind kind) {
  return kind == PerspectiveKind::health_system ? "health_system" : "societal";
}

std::optional<PerspectiveKind> parse_perspective_kind(std::string_view text) {
  if (text == "health_system" || text == "hs") {
    return PerspectiveKind::health_system;
  }
  if (text == "societal") {
    return PerspectiveKind::societal;
  }
  return std::nullopt;
}

double HealthState::cost(CostComponent component) const {
  switch (component) {
    case CostComponent::direct_medical:
      return cost_direct_medical;
    case CostComponent::productivity:
      return cost_productivity;
    case CostComponent::out_of_pocket:
      return cost_out_of_pocket;
  }
  return 0.0;
}

double& HealthState::cost(CostComponent component) {
  switch (component) {
    case CostComponent::productivity:
      return cost_productivity;
    case CostComponent::out_of_pocket:
      return cost_out_of_pocket;
    case CostComponent::direct_medical:
      break;
  }
  return cost_direct_medical;
}

double StateCosts::get(CostComponent component) const {
  switch (component) {
    case CostComponent::direct_medical:
      return direct_medical;
    case CostComponent::productivity:
      return productivity;
    case CostComponent::out_of_pocket:
      return out_of_pocket;
  }
  return 0.0;
}

double& StateCosts::get(CostComponent component) {
  switch (component) {
    case CostComponent::productivity:
      return productivity;
    case CostComponent::out_of_pocket:
      return out_of_pocket;
    case CostComponent::direct_medical:
      break;
  }
  return direct_medical;
}

std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::beta:
      return "beta";
    case DistributionKind::gamma:
      return "gamma";
    case DistributionKind::normal:
      return "normal";
    case DistributionKind::lognormal:
      return "lognormal";
    case DistributionKind::uniform:
      return "uniform";
    case DistributionKind::dirichlet_row:
      return "dirichlet-row";
  }
  return "unknown";
}

std::optional<DistributionKind> parse_distribution_kind(std::string_view text) {
  for (const auto k : {DistributionKind::beta, DistributionKind::gamma, DistributionKind::normal,
                       DistributionKind::lognormal, DistributionKind::uniform, DistributionKind::dirichlet_row}) {
    if (to_string(k) == text) {
      return k;
    }
  }
  return std::nullopt;
}

std::vector<std::string_view> distribution_parameter_names(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::beta:
      return {"alpha", "beta"};
    case DistributionKind::gamma:
      return {"shape", "scale"};
    case DistributionKind::normal:
      return {"mean", "sd"};
    case DistributionKind::lognormal:
      return {"meanlog", "sdlog"};
    case DistributionKind::uniform:
      return {"min", "max"};
    case DistributionKind::dirichlet_row:
      return {"precision"};
  }
  return {};
}

double BudgetImpactSpec::uptake_in_year(int year) const {
  if (uptake.size() == 1) {
    return uptake.front();
  }
  return uptake.at(static_cast<std::size_t>(year - 1));
}

std::optional<std::size_t> ModelSpec::state_index(std::string_view name) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> ModelSpec::strategy_index(std::string_view name) const {
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    if (strategies[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t ModelSpec::comparator_index() const {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    if (strategies[i].is_comparator) {
      if (found) {
        throw std::logic_error("model has more than one comparator strategy");
      }
      found = i;
    }
  }
  if (!found) {
    throw std::logic_error("model has no comparator strategy");
  }
  return *found;
}

std::string Diagnostic::to_string() const {
  std::string text = severity == Severity::error ? "error" : "warning";
  if (line > 0) {
    text += " (line " + std::to_string(line) + ")";
  }
  if (!path.empty()) {
    text += " at '" + path + "'";
  }
  return text + ": " + message;
}

ConfigError::ConfigError(std::string source, std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_messages("cannot parse " + source + ":", diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

ValidationError::ValidationError(std::string source, std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_messages("invalid model in " + source + ":", diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

std::vector<Diagnostic> validate_model_spec(const ModelSpec& spec) { return Validator{}.run(spec); }

std::vector<Diagnostic> validate_core(const ModelSpec& spec) {
  Validator v;
  v.check_core(spec);
  return v.take();
}

ModelSpec parse_model_spec(std::string_view yaml_text, std::string_view source_name,
                           std::vector<Diagnostic>* warnings) {
  const std::string source(source_name);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, {Diagnostic{Severity::error, "", e.msg, e.mark.line + 1}});
  }
  std::vector<Diagnostic> parse_errors;
  ModelSpec spec = SpecParser(parse_errors).parse(root);
  if (!parse_errors.empty()) {
    throw ConfigError(source, std::move(parse_errors));
  }
  auto diagnostics = validate_model_spec(spec);
  std::vector<Diagnostic> errors;
  for (auto& d : diagnostics) {
    if (d.severity == Severity::error) {
      errors.push_back(std::move(d));
    } else if (warnings) {
      warnings->push_back(std::move(d));
    }
  }
  if (!errors.empty()) {
    throw ValidationError(source, std::move(errors));
  }
  return spec;
}

ModelSpec load_model_spec(const std::filesystem::path& path, std::vector<Diagnostic>* warnings) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open configuration file '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model_spec(buffer.str(), path.string(), warnings);
}

std::string serialize_model_spec(const ModelSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "states" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : spec.states) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "utility" << YAML::Value << s.utility;
    out << YAML::Key << "cost_direct_medical" << YAML::Value << s.cost_direct_medical;
    out << YAML::Key << "cost_productivity" << YAML::Value << s.cost_productivity;
    out << YAML::Key << "cost_out_of_pocket" << YAML::Value << s.cost_out_of_pocket;
    out << YAML::Key << "absorbing" << YAML::Value << s.is_absorbing;
    if (s.absorbing_override) {
      out << YAML::Key << "absorbing_override" << YAML::Value << true;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "strategies" << YAML::Value << YAML::BeginSeq;
  for (const auto& st : spec.strategies) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << st.name;
    out << YAML::Key << "comparator" << YAML::Value << st.is_comparator;
    out << YAML::Key << "one_time_cost" << YAML::Value << st.one_time_cost;
    out << YAML::Key << "one_time_cost_component" << YAML::Value
        << std::string(to_string(st.one_time_cost_component));
    if (!st.state_costs.empty()) {
      out << YAML::Key << "state_costs" << YAML::Value << YAML::BeginMap;
      for (std::size_t i = 0; i < st.state_costs.size() && i < spec.states.size(); ++i) {
        out << YAML::Key << spec.states[i].name << YAML::Value << YAML::Flow << YAML::BeginMap;
        for (const auto c : kCostComponents) {
          out << YAML::Key << std::string(to_string(c)) << YAML::Value << st.state_costs[i].get(c);
        }
        out << YAML::EndMap;
      }
      out << YAML::EndMap;
    }
    out << YAML::Key << "transition_matrix" << YAML::Value << YAML::BeginMap;
    for (std::size_t i = 0; i < st.transition_matrix.size() && i < spec.states.size(); ++i) {
      out << YAML::Key << spec.states[i].name << YAML::Value;
      emit_row(out, st.transition_matrix[i]);
    }
    out << YAML::EndMap;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "subgroups" << YAML::Value << YAML::BeginSeq;
  for (const auto& g : spec.subgroups) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << g.name;
    out << YAML::Key << "population_share" << YAML::Value << g.population_share;
    out << YAML::Key << "baseline_health" << YAML::Value << g.baseline_health;
    if (!g.parameter_overrides.empty()) {
      out << YAML::Key << "overrides" << YAML::Value << YAML::BeginMap;
      for (const auto& [key, value] : g.parameter_overrides) {
        out << YAML::Key << key << YAML::Value;
        if (const auto* row = std::get_if<std::vector<double>>(&value)) {
          emit_row(out, *row);
        } else {
          out << std::get<double>(value);
        }
      }
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "initial_distribution" << YAML::Value;
  emit_row(out, spec.initial_distribution);
  out << YAML::Key << "horizon_cycles" << YAML::Value << spec.horizon_cycles;
  out << YAML::Key << "cycle_length_years" << YAML::Value << spec.cycle_length_years;
  out << YAML::Key << "half_cycle" << YAML::Value << spec.half_cycle;
  out << YAML::Key << "discount" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "costs" << YAML::Value << spec.discount_rate_costs;
  out << YAML::Key << "effects" << YAML::Value << spec.discount_rate_effects;
  out << YAML::EndMap;
  out << YAML::Key << "wtp_threshold" << YAML::Value << spec.wtp_threshold;
  out << YAML::Key << "inequality_aversion" << YAML::Value << spec.inequality_aversion;
  out << YAML::Key << "reference_health" << YAML::Value;
  if (spec.reference_health) {
    out << *spec.reference_health;
  } else {
    out << "population-mean";
  }
  out << YAML::Key << "productivity_method" << YAML::Value
      << (spec.productivity_method == ProductivityMethod::human_capital ? "human-capital" : "friction-cost");
  if (spec.friction_period_years) {
    out << YAML::Key << "friction_period_years" << YAML::Value << *spec.friction_period_years;
  }

  out << YAML::Key << "psa" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "iterations" << YAML::Value << spec.psa.iterations;
  out << YAML::Key << "seed" << YAML::Value << spec.psa.seed;
  out << YAML::Key << "distributions" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : spec.psa.distributions) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "target" << YAML::Value << d.target;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(d.kind));
    const auto names = distribution_parameter_names(d.kind);
    for (std::size_t i = 0; i < names.size() && i < d.parameters.size(); ++i) {
      out << YAML::Key << std::string(names[i]) << YAML::Value << d.parameters[i];
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  if (spec.bia) {
    const auto& b = *spec.bia;
    out << YAML::Key << "bia" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "eligible_population" << YAML::Value << b.eligible_population;
    out << YAML::Key << "uptake" << YAML::Value;
    if (b.uptake.size() == 1) {
      out << b.uptake.front();
    } else {
      emit_row(out, b.uptake);
    }
    out << YAML::Key << "horizon_years" << YAML::Value << b.horizon_years;
    out << YAML::Key << "discounting" << YAML::Value << b.discounting;
    out << YAML::Key << "perspective" << YAML::Value << std::string(to_string(b.perspective));
    out << YAML::EndMap;
  }

  out << YAML::Key << "voi" << YAML::Value << YAML::BeginMap;
  if (spec.voi.population_size) {
    out << YAML::Key << "population_size" << YAML::Value << *spec.voi.population_size;
  }
  out << YAML::Key << "evop_mode" << YAML::Value
      << (spec.voi.evop_mode == EvopMode::per_iteration ? "per-iteration" : "fixed-decision");
  if (!spec.voi.evppi_groups.empty()) {
    out << YAML::Key << "evppi_groups" << YAML::Value << YAML::BeginMap;
    for (const auto& [name, members] : spec.voi.evppi_groups) {
      out << YAML::Key << name << YAML::Value << YAML::Flow << members;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "sensitivity" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sobol_samples" << YAML::Value << spec.sensitivity.sobol_samples;
  out << YAML::Key << "bootstrap_resamples" << YAML::Value << spec.sensitivity.bootstrap_resamples;
  if (!spec.sensitivity.ranges.empty()) {
    out << YAML::Key << "ranges" << YAML::Value << YAML::BeginMap;
    for (const auto& [path, range] : spec.sensitivity.ranges) {
      out << YAML::Key << path << YAML::Value;
      emit_row(out, {range.first, range.second});
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string spec_digest(const ModelSpec& spec) {
  const std::string canonical = serialize_model_spec(spec);
  unsigned char hash[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(canonical.data(), canonical.size(), hash, &length, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(hash[i]);
  }
  return hex.str();
}

}  // namespace vop
