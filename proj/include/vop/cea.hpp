#pragma once

// ICER with dominance classification, net monetary benefit and the
// NMB-maximising decision rule.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vop/config.hpp"
#include "vop/markov.hpp"

namespace vop {

struct Perspective {
  PerspectiveKind kind = PerspectiveKind::health_system;
  std::vector<CostComponent> included_components;

  static Perspective health_system();
  static Perspective societal();
  static Perspective of(PerspectiveKind kind);

  std::string_view name() const { return to_string(kind); }
  double cost(const OutcomeTotals& totals) const;
};

enum class IcerClass { icer, dominant, dominated, extended_tie };

std::string_view to_string(IcerClass classification);

struct IcerResult {
  double delta_cost = 0.0;
  double delta_effect = 0.0;
  IcerClass classification = IcerClass::extended_tie;
  // Present iff classification == icer.
  std::optional<double> icer_value;
};

// |ΔE| below this is treated as no effect difference.
inline constexpr double kEffectTolerance = 1e-12;
// NMB differences below this go to the comparator.
inline constexpr double kNmbTieTolerance = 1e-9;

IcerResult icer(const OutcomeTotals& comparator, const OutcomeTotals& candidate, const Perspective& perspective);
IcerResult classify_increment(double delta_cost, double delta_effect);

double nmb(const OutcomeTotals& totals, double wtp, const Perspective& perspective);
inline double nmb(double qalys, double cost, double wtp) { return qalys * wtp - cost; }

/// Index of the NMB-maximising strategy. A strategy replaces the comparator
/// only if it beats it by at least kNmbTieTolerance; among non-comparators the
/// first maximiser wins.
std::size_t choose_strategy(std::span<const double> nmbs, std::size_t comparator);

struct NamedOutcome {
  std::string name;
  OutcomeTotals totals;
};

struct DecisionRecord {
  double wtp = 0.0;
  PerspectiveKind perspective = PerspectiveKind::health_system;
  std::string chosen_strategy;
  std::size_t chosen_index = 0;
  std::vector<std::pair<std::string, double>> nmb_per_strategy;
  std::optional<PerspectiveKind> discordant_with;
};

/// Throws std::invalid_argument with fewer than two strategies or a bad
/// comparator index.
DecisionRecord decide(std::span<const NamedOutcome> outcomes, std::size_t comparator, double wtp,
                      const Perspective& perspective);

// Marks each record discordant with the other when their choices differ.
void mark_discordance(DecisionRecord& health_system, DecisionRecord& societal);

}  // namespace vop
