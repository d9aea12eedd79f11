#pragma once

// Distributional CEA: Atkinson equity weights, equity-weighted NMB and the
// equity impact plane.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vop/cea.hpp"
#include "vop/config.hpp"
#include "vop/psa.hpp"

namespace vop {

struct EquityWeights {
  double epsilon = 0.0;
  double reference_health = 1.0;
  std::vector<std::string> subgroups;
  std::vector<double> weights;

  /// Throws std::out_of_range for an unknown subgroup.
  double weight(std::string_view subgroup) const;
};

// Population-share weighted mean baseline health.
double population_mean_health(std::span<const double> shares, std::span<const double> baselines);

/// w_g = (H_ref / H_g)^epsilon. A missing reference resolves to the
/// population mean. Throws std::invalid_argument for H_g <= 0 or epsilon < 0.
EquityWeights atkinson_weights(const std::vector<Subgroup>& subgroups, double epsilon,
                               std::optional<double> reference_health);

struct SubgroupIncrement {
  std::string subgroup;
  double population_share = 1.0;
  double delta_qalys = 0.0;
  double delta_cost = 0.0;
};

/// Σ w_g · share_g · (ΔQ_g·λ − ΔC_g). Throws std::out_of_range when a
/// subgroup has no weight.
double equity_weighted_nmb(std::span<const SubgroupIncrement> increments, const EquityWeights& weights, double wtp);

// Σ share_g · (ΔQ_g·λ − ΔC_g), evaluated in the same order as the weighted sum.
double unweighted_nmb(std::span<const SubgroupIncrement> increments, double wtp);

// Increments of `candidate` over `comparator`, one per subgroup.
std::vector<SubgroupIncrement> subgroup_increments(const std::vector<std::string>& subgroups,
                                                   const std::vector<double>& shares,
                                                   const std::vector<OutcomeTotals>& comparator,
                                                   const std::vector<OutcomeTotals>& candidate,
                                                   const Perspective& perspective);

/// Share-weighted Atkinson inequality index, 1 − EDE/mean. Exactly 0 when
/// all values are equal or epsilon is 0.
double atkinson_index(std::span<const double> health, std::span<const double> shares, double epsilon);

struct EquityPlanePoint {
  double net_health_benefit = 0.0;
  double equity_impact = 0.0;
};

/// One point per iteration. Net health benefit is Σ share_g(ΔQ_g − ΔC_g/λ);
/// equity impact is A(H) − A(H + ΔQ), positive when inequality falls.
/// Throws std::invalid_argument with fewer than two subgroups or λ <= 0.
std::vector<EquityPlanePoint> equity_plane(const PsaBundle& bundle, double wtp, double epsilon,
                                           const Perspective& perspective = Perspective::societal());

}  // namespace vop
