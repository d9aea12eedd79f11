#pragma once

// Dotted parameter paths into a ModelSpec, and subgroup override resolution.
//
// Recognised paths:
//   states.<state>.utility | cost_direct_medical | cost_productivity | cost_out_of_pocket
//   strategies.<strategy>.transition_matrix.<from>          (full row)
//   strategies.<strategy>.transition_matrix.<from>.<to>     (single probability)
//   strategies.<strategy>.one_time_cost
//   strategies.<strategy>.state_costs.<state>.<component>
//   discount.costs | discount.effects
// <strategy> may be `*`, which addresses the same element in every strategy.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vop/config.hpp"

namespace vop {

enum class ParameterDomain { unit_interval, nonnegative, discount_rate, transition_row };

class ParameterPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParameterInfo {
  ParameterDomain domain = ParameterDomain::nonnegative;
  bool is_row() const { return domain == ParameterDomain::transition_row; }
};

bool in_domain(ParameterDomain domain, double value);
std::string_view to_string(ParameterDomain domain);

/// Throws ParameterPathError if the path does not resolve in `spec`.
ParameterInfo describe_parameter(const ModelSpec& spec, std::string_view path);

/// For `*` paths the first strategy's value is returned.
ParameterValue get_parameter(const ModelSpec& spec, std::string_view path);

/// Writes a value. Setting a single transition probability rescales the other
/// entries of that row proportionally so the row keeps summing to one.
/// Throws ParameterPathError on unresolved paths or a scalar/row mismatch.
void set_parameter(ModelSpec& spec, std::string_view path, const ParameterValue& value);

double get_scalar(const ModelSpec& spec, std::string_view path);

// Column names of the sampled parameter vector, in distribution order. A
// dirichlet-row target expands to one column per destination state,
// `<target>.<to_state>`.
std::vector<std::string> parameter_columns(const ModelSpec& spec);

/// Returns a copy of `spec` with the subgroup's overrides applied. The
/// merged view is re-validated; violations throw ValidationError.
ModelSpec resolve_subgroup_spec(const ModelSpec& spec, const Subgroup& subgroup);

}  // namespace vop
