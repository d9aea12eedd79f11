#pragma once

// Declarative model definition: states, strategies, subgroups, PSA inputs,
// and the YAML ingestion/validation path that produces a ModelSpec.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace vop {

enum class CostComponent { direct_medical, productivity, out_of_pocket };

inline constexpr std::array<CostComponent, 3> kCostComponents{
    CostComponent::direct_medical, CostComponent::productivity, CostComponent::out_of_pocket};

std::string_view to_string(CostComponent component);
std::optional<CostComponent> parse_cost_component(std::string_view text);

enum class PerspectiveKind { health_system, societal };

std::string_view to_string(PerspectiveKind kind);
std::optional<PerspectiveKind> parse_perspective_kind(std::string_view text);

struct HealthState {
  std::string name;
  double utility = 0.0;
  double cost_direct_medical = 0.0;
  double cost_productivity = 0.0;
  double cost_out_of_pocket = 0.0;
  bool is_absorbing = false;
  // Accepts nonzero utility/costs on an absorbing state (reported as a warning).
  bool absorbing_override = false;

  double cost(CostComponent component) const;
  double& cost(CostComponent component);

  bool operator==(const HealthState&) const = default;
};

// Per-cycle costs a strategy adds on top of a state's own costs (programme
// costs, drug costs).
struct StateCosts {
  double direct_medical = 0.0;
  double productivity = 0.0;
  double out_of_pocket = 0.0;

  double get(CostComponent component) const;
  double& get(CostComponent component);
  bool is_zero() const { return direct_medical == 0.0 && productivity == 0.0 && out_of_pocket == 0.0; }

  bool operator==(const StateCosts&) const = default;
};

using TransitionMatrix = std::vector<std::vector<double>>;

struct Strategy {
  std::string name;
  // Row i holds the transition probabilities out of states[i].
  TransitionMatrix transition_matrix;
  double one_time_cost = 0.0;
  CostComponent one_time_cost_component = CostComponent::direct_medical;
  // One entry per state; empty means no additional costs.
  std::vector<StateCosts> state_costs;
  bool is_comparator = false;

  bool operator==(const Strategy&) const = default;
};

// Scalar parameter or full transition row.
using ParameterValue = std::variant<double, std::vector<double>>;

struct Subgroup {
  std::string name;
  double population_share = 1.0;
  double baseline_health = 1.0;
  std::vector<std::pair<std::string, ParameterValue>> parameter_overrides;

  bool operator==(const Subgroup&) const = default;
};

enum class DistributionKind { beta, gamma, normal, lognormal, uniform, dirichlet_row };

std::string_view to_string(DistributionKind kind);
std::optional<DistributionKind> parse_distribution_kind(std::string_view text);

// Parameter names in the order DistributionSpec::parameters stores them.
std::vector<std::string_view> distribution_parameter_names(DistributionKind kind);

struct DistributionSpec {
  DistributionKind kind = DistributionKind::normal;
  std::vector<double> parameters;
  std::string target;

  bool operator==(const DistributionSpec&) const = default;
};

struct PsaSettings {
  std::size_t iterations = 1000;
  std::uint64_t seed = 20240601;
  std::vector<DistributionSpec> distributions;

  bool operator==(const PsaSettings&) const = default;
};

enum class ProductivityMethod { human_capital, friction_cost };

struct BudgetImpactSpec {
  double eligible_population = 0.0;
  // A single entry is a flat rate; otherwise one rate per year.
  std::vector<double> uptake{1.0};
  int horizon_years = 5;
  bool discounting = false;
  PerspectiveKind perspective = PerspectiveKind::health_system;

  double uptake_in_year(int year) const;

  bool operator==(const BudgetImpactSpec&) const = default;
};

enum class EvopMode { per_iteration, fixed_decision };

struct VoiSettings {
  std::optional<double> population_size;
  // Named parameter subsets for EVPPI; empty means one subset per distribution.
  std::vector<std::pair<std::string, std::vector<std::string>>> evppi_groups;
  EvopMode evop_mode = EvopMode::per_iteration;

  bool operator==(const VoiSettings&) const = default;
};

struct SensitivitySettings {
  // Explicit one-way ranges; empty means +/-20% of each PSA target's base value.
  std::vector<std::pair<std::string, std::pair<double, double>>> ranges;
  std::size_t sobol_samples = 512;
  std::size_t bootstrap_resamples = 100;

  bool operator==(const SensitivitySettings&) const = default;
};

struct ModelSpec {
  std::vector<HealthState> states;
  std::vector<Strategy> strategies;
  std::vector<Subgroup> subgroups;
  std::vector<double> initial_distribution;
  int horizon_cycles = 0;
  double cycle_length_years = 1.0;
  double discount_rate_costs = 0.03;
  double discount_rate_effects = 0.03;
  bool half_cycle = false;
  double wtp_threshold = 20000.0;
  double inequality_aversion = 0.5;
  // nullopt resolves to the population-share-weighted mean baseline health.
  std::optional<double> reference_health;
  ProductivityMethod productivity_method = ProductivityMethod::human_capital;
  std::optional<double> friction_period_years;
  PsaSettings psa;
  std::optional<BudgetImpactSpec> bia;
  VoiSettings voi;
  SensitivitySettings sensitivity;

  std::optional<std::size_t> state_index(std::string_view name) const;
  std::optional<std::size_t> strategy_index(std::string_view name) const;
  // Throws std::logic_error unless exactly one comparator exists.
  std::size_t comparator_index() const;

  bool operator==(const ModelSpec&) const = default;
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string path;
  std::string message;
  int line = -1;

  std::string to_string() const;
};

// Malformed YAML, wrong node types, unknown or missing keys.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Well-formed configuration that violates one or more model invariants.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string source, std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Checks every invariant of every section of the model and returns one
/// diagnostic per violation (errors) plus warnings for accepted overrides.
std::vector<Diagnostic> validate_model_spec(const ModelSpec& spec);

// States and strategies only.
std::vector<Diagnostic> validate_core(const ModelSpec& spec);

/// Parses YAML text into a validated ModelSpec. Throws ConfigError on
/// structural problems and ValidationError on invariant violations.
ModelSpec parse_model_spec(std::string_view yaml_text, std::string_view source_name = "<string>",
                           std::vector<Diagnostic>* warnings = nullptr);

ModelSpec load_model_spec(const std::filesystem::path& path, std::vector<Diagnostic>* warnings = nullptr);

// Emits the spec in the same key schema parse_model_spec reads.
std::string serialize_model_spec(const ModelSpec& spec);

// SHA-256 of the canonical serialization, hex encoded.
std::string spec_digest(const ModelSpec& spec);

}  // namespace vop
