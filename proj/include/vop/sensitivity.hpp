#pragma once

// One-way (tornado) analysis and Sobol variance decomposition.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vop/cea.hpp"
#include "vop/config.hpp"

namespace vop {

using ParameterRanges = std::vector<std::pair<std::string, std::pair<double, double>>>;

// Deterministic population ΔNMB of the first intervention over the comparator.
double incremental_nmb(const ModelSpec& spec, double wtp, const Perspective& perspective);

struct TornadoEntry {
  std::string parameter;
  double low_value = 0.0;
  double high_value = 0.0;
  double outcome_at_low = 0.0;
  double outcome_at_high = 0.0;

  double bar_width() const;
};

// ±20% of each scalar PSA target and both discount rates, truncated to the
// parameter's domain.
ParameterRanges default_tornado_ranges(const ModelSpec& spec);

/// Sorted by descending bar width. Throws std::invalid_argument for a range
/// outside the parameter's domain and ValidationError when a value breaks a
/// model invariant.
std::vector<TornadoEntry> tornado(const ModelSpec& spec, const ParameterRanges& ranges, double wtp,
                                  const Perspective& perspective);

struct SobolProblem {
  std::vector<std::string> factor_names;
  // Unit-hypercube coordinates per factor; grouped coordinates move together.
  std::vector<std::size_t> factor_dimensions;
  std::function<double(std::span<const double>)> model;
};

struct SobolIndex {
  std::string parameter;
  double first_order = 0.0;
  double total_order = 0.0;
  double first_order_noise = 0.0;
  double total_order_noise = 0.0;
  double first_order_raw = 0.0;
  double total_order_raw = 0.0;
  // Raw estimate fell outside [−0.05, 1.05].
  bool flagged_noise = false;
};

struct SobolResult {
  std::vector<SobolIndex> indices;
  std::size_t sample_size = 0;
  double output_variance = 0.0;
};

inline constexpr double kSobolLowerBound = -0.05;
inline constexpr double kSobolUpperBound = 1.05;

/// Saltelli A/B/A_B^i design on a scrambled-offset Sobol sequence with
/// Jansen estimators and bootstrap standard errors.
SobolResult sobol_analysis(const SobolProblem& problem, std::size_t base_samples, std::size_t bootstrap_resamples,
                           std::uint64_t seed);

/// Factors are the model's PSA distributions (a dirichlet row is one factor); the
/// output is incremental_nmb at each sampled parameter set. Throws
/// std::invalid_argument for fewer than 64 samples or no distributions and
/// std::runtime_error for a non-finite model output.
SobolResult sobol_indices(const ModelSpec& spec, std::size_t base_samples, double wtp, const Perspective& perspective,
                          std::size_t bootstrap_resamples = 100);

}  // namespace vop
