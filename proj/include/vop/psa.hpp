#pragma once

// Probabilistic sensitivity analysis: seeded parameter draws, the PSA bundle
// and the summaries computed directly from it (CEAC, CE plane, ΔNMB).

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vop/cea.hpp"
#include "vop/config.hpp"
#include "vop/markov.hpp"

namespace vop {

// Output (index + 1) of a SplitMix64 generator whose state starts at
// master_seed. Iteration i always sees the same stream whatever the schedule.
std::uint64_t iteration_seed(std::uint64_t master_seed, std::uint64_t index);

// Number of uniforms each distribution consumes: one for scalar kinds, one
// per state for dirichlet-row.
std::vector<std::size_t> uniform_counts(const ModelSpec& spec);

/// Writes one draw per distribution into `spec`, mapping the unit-interval
/// coordinates `u` through each family's quantile function. `base` supplies
/// dirichlet concentrations. Sampled column values are appended to `values`
/// when given. Throws std::runtime_error on a degenerate dirichlet draw.
void apply_unit_draw(const ModelSpec& base, ModelSpec& spec, std::span<const double> u,
                     std::vector<double>* values = nullptr);

struct ParameterDraw {
  std::vector<std::string> columns;
  std::vector<double> values;
  ModelSpec spec;
};

ParameterDraw sample_parameters(const ModelSpec& spec, std::size_t iteration_index);

struct BundleLayout {
  std::vector<std::string> strategy_names;
  std::size_t comparator = 0;
  std::vector<std::string> subgroup_names;
  std::vector<double> subgroup_shares;
  std::vector<double> subgroup_baselines;

  std::size_t strategies() const { return strategy_names.size(); }
  std::size_t subgroups() const { return subgroup_names.size(); }
  // First non-comparator strategy.
  std::size_t candidate() const;
};

BundleLayout bundle_layout(const ModelSpec& spec);

struct PsaBundle {
  std::size_t iterations = 0;
  BundleLayout layout;
  std::vector<std::string> parameter_names;
  Eigen::MatrixXd sampled;  // iterations x parameters
  // Discounted totals, index (i * S + s) * G + g.
  std::vector<OutcomeTotals> outcomes;
  std::uint64_t master_seed = 0;
  std::string spec_digest;

  const OutcomeTotals& at(std::size_t i, std::size_t s, std::size_t g) const {
    return outcomes[(i * layout.strategies() + s) * layout.subgroups() + g];
  }
  OutcomeTotals& at(std::size_t i, std::size_t s, std::size_t g) {
    return outcomes[(i * layout.strategies() + s) * layout.subgroups() + g];
  }
  // Population-share weighted totals for one iteration and strategy.
  OutcomeTotals population(std::size_t i, std::size_t s) const;

  bool operator==(const PsaBundle& other) const;
};

struct PsaOptions {
  // 0 uses the hardware concurrency.
  unsigned threads = 0;
  bool reverse_order = false;
};

/// Errors from an iteration are rethrown with the iteration index attached.
PsaBundle run_psa(const ModelSpec& spec, const PsaOptions& options = {});

// N x S population NMB.
Eigen::MatrixXd nmb_matrix(const PsaBundle& bundle, double wtp, const Perspective& perspective);

struct CeacTable {
  std::vector<double> wtp_grid;
  std::vector<std::string> strategy_names;
  // [grid point][strategy]
  std::vector<std::vector<double>> probability;
};

CeacTable ceac(const PsaBundle& bundle, const Perspective& perspective, const std::vector<double>& wtp_grid);

struct CePlanePoint {
  double delta_effect = 0.0;
  double delta_cost = 0.0;
};

struct CePlane {
  std::vector<CePlanePoint> points;
  // Same ΔE with ΔC(societal) - ΔC(health system).
  std::vector<CePlanePoint> perspective_delta;
};

CePlane ce_plane_points(const PsaBundle& bundle, const Perspective& perspective);

struct DeltaNmbSummary {
  std::vector<double> series;
  double mean = 0.0;
  // 2.5, 25, 50, 75, 97.5 percentiles.
  std::array<double, 5> quantiles{};
};

inline constexpr std::array<double, 5> kSummaryProbabilities{0.025, 0.25, 0.5, 0.75, 0.975};

// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double p);

DeltaNmbSummary delta_nmb_distribution(const PsaBundle& bundle, double wtp);

// Outcome columns are `<strategy>:<subgroup>:{cost_direct,cost_prod,cost_oop,qalys}`.
void write_psa_samples_csv(std::ostream& out, const PsaBundle& bundle);

/// Reads a file written by write_psa_samples_csv back into a bundle with the
/// given layout. Throws std::runtime_error on malformed or mismatched input.
PsaBundle read_psa_samples_csv(std::istream& in, const BundleLayout& layout);

}  // namespace vop
