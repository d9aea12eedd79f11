#include "vop/dcea.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vop {

double EquityWeights::weight(std::string_view subgroup) const {
  for (std::size_t g = 0; g < subgroups.size(); ++g) {
    if (subgroups[g] == subgroup) {
      return weights[g];
    }
  }
  throw std::out_of_range("no equity weight for subgroup '" + std::string(subgroup) + "'");
}

double population_mean_health(std::span<const double> shares, std::span<const double> baselines) {
  double mean = 0.0;
  for (std::size_t g = 0; g < shares.size(); ++g) {
    mean += shares[g] * baselines[g];
  }
  return mean;
}

EquityWeights atkinson_weights(const std::vector<Subgroup>& subgroups, double epsilon,
                               std::optional<double> reference_health) {
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("inequality aversion must be >= 0");
  }
  std::vector<double> shares;
  std::vector<double> baselines;
  for (const auto& g : subgroups) {
    if (!(g.baseline_health > 0.0)) {
      throw std::invalid_argument("subgroup '" + g.name + "' has non-positive baseline health");
    }
    shares.push_back(g.population_share);
    baselines.push_back(g.baseline_health);
  }
  EquityWeights w;
  w.epsilon = epsilon;
  w.reference_health = reference_health.value_or(population_mean_health(shares, baselines));
  if (!(w.reference_health > 0.0)) {
    throw std::invalid_argument("reference health must be > 0");
  }
  for (const auto& g : subgroups) {
    w.subgroups.push_back(g.name);
    w.weights.push_back(std::pow(w.reference_health / g.baseline_health, epsilon));
  }
  return w;
}

double equity_weighted_nmb(std::span<const SubgroupIncrement> increments, const EquityWeights& weights, double wtp) {
  double total = 0.0;
  for (const auto& inc : increments) {
    total += (weights.weight(inc.subgroup) * inc.population_share) * (inc.delta_qalys * wtp - inc.delta_cost);
  }
  return total;
}

double unweighted_nmb(std::span<const SubgroupIncrement> increments, double wtp) {
  double total = 0.0;
  for (const auto& inc : increments) {
    total += inc.population_share * (inc.delta_qalys * wtp - inc.delta_cost);
  }
  return total;
}

std::vector<SubgroupIncrement> subgroup_increments(const std::vector<std::string>& subgroups,
                                                   const std::vector<double>& shares,
                                                   const std::vector<OutcomeTotals>& comparator,
                                                   const std::vector<OutcomeTotals>& candidate,
                                                   const Perspective& perspective) {
  std::vector<SubgroupIncrement> out;
  for (std::size_t g = 0; g < subgroups.size(); ++g) {
    out.push_back(SubgroupIncrement{subgroups[g], shares[g], candidate[g].qalys - comparator[g].qalys,
                                    perspective.cost(candidate[g]) - perspective.cost(comparator[g])});
  }
  return out;
}

double atkinson_index(std::span<const double> health, std::span<const double> shares, double epsilon) {
  if (health.size() != shares.size() || health.empty()) {
    throw std::invalid_argument("atkinson_index: health and share vectors differ in length");
  }
  if (std::any_of(health.begin(), health.end(), [](double h) { return !(h > 0.0); })) {
    throw std::invalid_argument("atkinson_index: health levels must be > 0");
  }
  if (epsilon == 0.0 || std::all_of(health.begin(), health.end(), [&](double h) { return h == health[0]; })) {
    return 0.0;
  }
  double share_total = 0.0;
  double mean = 0.0;
  for (std::size_t g = 0; g < health.size(); ++g) {
    share_total += shares[g];
    mean += shares[g] * health[g];
  }
  mean /= share_total;
  double ede = 0.0;
  if (epsilon == 1.0) {
    double log_sum = 0.0;
    for (std::size_t g = 0; g < health.size(); ++g) {
      log_sum += shares[g] / share_total * std::log(health[g]);
    }
    ede = std::exp(log_sum);
  } else {
    double power_sum = 0.0;
    for (std::size_t g = 0; g < health.size(); ++g) {
      power_sum += shares[g] / share_total * std::pow(health[g], 1.0 - epsilon);
    }
    ede = std::pow(power_sum, 1.0 / (1.0 - epsilon));
  }
  return 1.0 - ede / mean;
}

std::vector<EquityPlanePoint> equity_plane(const PsaBundle& bundle, double wtp, double epsilon,
                                           const Perspective& perspective) {
  const auto& layout = bundle.layout;
  if (layout.subgroups() < 2) {
    throw std::invalid_argument("equity plane needs at least two subgroups; equity impact is undefined otherwise");
  }
  if (!(wtp > 0.0)) {
    throw std::invalid_argument("equity plane needs a positive willingness-to-pay threshold");
  }
  const auto comparator = layout.comparator;
  const auto candidate = layout.candidate();
  const double before = atkinson_index(layout.subgroup_baselines, layout.subgroup_shares, epsilon);
  std::vector<EquityPlanePoint> points;
  std::vector<double> after(layout.subgroups());
  for (std::size_t i = 0; i < bundle.iterations; ++i) {
    double nhb = 0.0;
    for (std::size_t g = 0; g < layout.subgroups(); ++g) {
      const auto& base = bundle.at(i, comparator, g);
      const auto& alt = bundle.at(i, candidate, g);
      const double dq = alt.qalys - base.qalys;
      const double dc = perspective.cost(alt) - perspective.cost(base);
      nhb += layout.subgroup_shares[g] * (dq - dc / wtp);
      after[g] = layout.subgroup_baselines[g] + dq;
    }
    points.push_back({nhb, before - atkinson_index(after, layout.subgroup_shares, epsilon)});
  }
  return points;
}

}  // namespace vop
