#include "vop/parameters.hpp"

#include <cmath>
#include <functional>

namespace vop {

namespace {

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    parts.push_back(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) {
      break;
    }
    start = dot + 1;
  }
  return parts;
}

[[noreturn]] void unresolved(std::string_view path, const std::string& why) {
  throw ParameterPathError("'" + std::string(path) + "': " + why);
}

std::size_t find_state(const ModelSpec& spec, std::string_view path, std::string_view name) {
  if (auto idx = spec.state_index(name)) {
    return *idx;
  }
  unresolved(path, "unknown state '" + std::string(name) + "'");
}

std::vector<std::size_t> find_strategies(const ModelSpec& spec, std::string_view path, std::string_view name) {
  std::vector<std::size_t> out;
  if (name == "*") {
    for (std::size_t i = 0; i < spec.strategies.size(); ++i) {
      out.push_back(i);
    }
    if (out.empty()) {
      unresolved(path, "model has no strategies");
    }
    return out;
  }
  if (auto idx = spec.strategy_index(name)) {
    return {*idx};
  }
  unresolved(path, "unknown strategy '" + std::string(name) + "'");
}

// A resolved path: one accessor per addressed slot (several for `*`).
struct Resolved {
  ParameterDomain domain = ParameterDomain::nonnegative;
  std::vector<std::function<double&(ModelSpec&)>> scalars;
  std::vector<std::function<std::vector<double>&(ModelSpec&)>> rows;
  // For single transition probabilities: the row holding it and its column.
  std::optional<std::size_t> column;
};

Resolved resolve(const ModelSpec& spec, std::string_view path) {
  const auto parts = split_path(path);
  Resolved r;
  if (parts.size() == 2 && parts[0] == "discount") {
    r.domain = ParameterDomain::discount_rate;
    if (parts[1] == "costs") {
      r.scalars.emplace_back([](ModelSpec& m) -> double& { return m.discount_rate_costs; });
    } else if (parts[1] == "effects") {
      r.scalars.emplace_back([](ModelSpec& m) -> double& { return m.discount_rate_effects; });
    } else {
      unresolved(path, "expected discount.costs or discount.effects");
    }
    return r;
  }
  if (parts.size() == 3 && parts[0] == "states") {
    const auto s = find_state(spec, path, parts[1]);
    const auto field = parts[2];
    if (field == "utility") {
      r.domain = ParameterDomain::unit_interval;
      r.scalars.emplace_back([s](ModelSpec& m) -> double& { return m.states[s].utility; });
      return r;
    }
    r.domain = ParameterDomain::nonnegative;
    for (const auto c : kCostComponents) {
      if (field == "cost_" + std::string(to_string(c))) {
        r.scalars.emplace_back([s, c](ModelSpec& m) -> double& { return m.states[s].cost(c); });
        return r;
      }
    }
    unresolved(path, "unknown state field '" + std::string(field) + "'");
  }
  if (parts.size() >= 3 && parts[0] == "strategies") {
    const auto targets = find_strategies(spec, path, parts[1]);
    const auto field = parts[2];
    if (field == "one_time_cost" && parts.size() == 3) {
      r.domain = ParameterDomain::nonnegative;
      for (auto k : targets) {
        r.scalars.emplace_back([k](ModelSpec& m) -> double& { return m.strategies[k].one_time_cost; });
      }
      return r;
    }
    if (field == "transition_matrix" && (parts.size() == 4 || parts.size() == 5)) {
      const auto from = find_state(spec, path, parts[3]);
      for (auto k : targets) {
        if (spec.strategies[k].transition_matrix.size() <= from) {
          unresolved(path, "strategy '" + spec.strategies[k].name + "' has no row for '" + std::string(parts[3]) + "'");
        }
        r.rows.emplace_back([k, from](ModelSpec& m) -> std::vector<double>& {
          return m.strategies[k].transition_matrix[from];
        });
      }
      if (parts.size() == 4) {
        r.domain = ParameterDomain::transition_row;
      } else {
        r.domain = ParameterDomain::unit_interval;
        r.column = find_state(spec, path, parts[4]);
        for (auto k : targets) {
          if (spec.strategies[k].transition_matrix[from].size() <= *r.column) {
            unresolved(path, "row is too short");
          }
        }
      }
      return r;
    }
    if (field == "state_costs" && parts.size() == 5) {
      const auto s = find_state(spec, path, parts[3]);
      const auto component = parse_cost_component(parts[4]);
      if (!component) {
        unresolved(path, "unknown cost component '" + std::string(parts[4]) + "'");
      }
      r.domain = ParameterDomain::nonnegative;
      const auto c = *component;
      for (auto k : targets) {
        r.scalars.emplace_back([k, s, c](ModelSpec& m) -> double& {
          auto& costs = m.strategies[k].state_costs;
          if (costs.empty()) {
            costs.assign(m.states.size(), StateCosts{});
          }
          return costs.at(s).get(c);
        });
      }
      return r;
    }
    unresolved(path, "unknown strategy field");
  }
  unresolved(path, "unrecognised parameter path");
}

void set_probability(std::vector<double>& row, std::size_t column, double value, std::string_view path) {
  const double old = row[column];
  const double rest = 1.0 - old;
  if (rest <= 0.0) {
    if (value != old) {
      unresolved(path, "cannot rescale a row whose remaining mass is zero");
    }
    return;
  }
  const double scale = (1.0 - value) / rest;
  for (std::size_t j = 0; j < row.size(); ++j) {
    row[j] = j == column ? value : row[j] * scale;
  }
}

}  // namespace

bool in_domain(ParameterDomain domain, double value) {
  switch (domain) {
    case ParameterDomain::unit_interval:
      return value >= 0.0 && value <= 1.0;
    case ParameterDomain::nonnegative:
      return value >= 0.0 && std::isfinite(value);
    case ParameterDomain::discount_rate:
      return value >= 0.0 && value < 1.0;
    case ParameterDomain::transition_row:
      return false;
  }
  return false;
}

std::string_view to_string(ParameterDomain domain) {
  switch (domain) {
    case ParameterDomain::unit_interval:
      return "[0, 1]";
    case ParameterDomain::nonnegative:
      return "nonnegative";
    case ParameterDomain::discount_rate:
      return "[0, 1)";
    case ParameterDomain::transition_row:
      return "transition row";
  }
  return "unknown";
}

ParameterInfo describe_parameter(const ModelSpec& spec, std::string_view path) {
  return ParameterInfo{resolve(spec, path).domain};
}

ParameterValue get_parameter(const ModelSpec& spec, std::string_view path) {
  auto r = resolve(spec, path);
  ModelSpec view = spec;
  if (r.domain == ParameterDomain::transition_row) {
    return r.rows.front()(view);
  }
  if (r.column) {
    return r.rows.front()(view)[*r.column];
  }
  return r.scalars.front()(view);
}

double get_scalar(const ModelSpec& spec, std::string_view path) {
  const auto value = get_parameter(spec, path);
  if (const auto* v = std::get_if<double>(&value)) {
    return *v;
  }
  throw ParameterPathError("'" + std::string(path) + "' addresses a transition row, not a scalar");
}

void set_parameter(ModelSpec& spec, std::string_view path, const ParameterValue& value) {
  auto r = resolve(spec, path);
  if (r.domain == ParameterDomain::transition_row) {
    const auto* row = std::get_if<std::vector<double>>(&value);
    if (!row) {
      unresolved(path, "expected a full transition row");
    }
    if (row->size() != spec.states.size()) {
      unresolved(path, "row must have " + std::to_string(spec.states.size()) + " entries");
    }
    for (auto& slot : r.rows) {
      slot(spec) = *row;
    }
    return;
  }
  const auto* v = std::get_if<double>(&value);
  if (!v) {
    unresolved(path, "expected a scalar value");
  }
  if (r.column) {
    for (auto& slot : r.rows) {
      set_probability(slot(spec), *r.column, *v, path);
    }
    return;
  }
  for (auto& slot : r.scalars) {
    slot(spec) = *v;
  }
}

std::vector<std::string> parameter_columns(const ModelSpec& spec) {
  std::vector<std::string> columns;
  for (const auto& d : spec.psa.distributions) {
    if (describe_parameter(spec, d.target).is_row()) {
      for (const auto& s : spec.states) {
        columns.push_back(d.target + "." + s.name);
      }
    } else {
      columns.push_back(d.target);
    }
  }
  return columns;
}

ModelSpec resolve_subgroup_spec(const ModelSpec& spec, const Subgroup& subgroup) {
  ModelSpec merged = spec;
  for (const auto& [path, value] : subgroup.parameter_overrides) {
    set_parameter(merged, path, value);
  }
  if (!subgroup.parameter_overrides.empty()) {
    auto diagnostics = validate_core(merged);
    std::erase_if(diagnostics, [](const Diagnostic& d) { return d.severity != Severity::error; });
    if (!diagnostics.empty()) {
      throw ValidationError("subgroup '" + subgroup.name + "'", std::move(diagnostics));
    }
  }
  return merged;
}

}  // namespace vop
