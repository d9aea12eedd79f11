#include "vop/cea.hpp"

#include <cmath>
#include <stdexcept>

namespace vop {

Perspective Perspective::health_system() {
  return Perspective{PerspectiveKind::health_system, {CostComponent::direct_medical}};
}

Perspective Perspective::societal() {
  return Perspective{PerspectiveKind::societal,
                     {CostComponent::direct_medical, CostComponent::productivity, CostComponent::out_of_pocket}};
}

Perspective Perspective::of(PerspectiveKind kind) {
  return kind == PerspectiveKind::health_system ? health_system() : societal();
}

double Perspective::cost(const OutcomeTotals& totals) const {
  if (kind == PerspectiveKind::societal && included_components.size() == kCostComponents.size()) {
    return totals.societal_cost();
  }
  double sum = 0.0;
  for (const auto c : included_components) {
    sum += totals.cost(c);
  }
  return sum;
}

std::string_view to_string(IcerClass classification) {
  switch (classification) {
    case IcerClass::icer:
      return "icer";
    case IcerClass::dominant:
      return "dominant";
    case IcerClass::dominated:
      return "dominated";
    case IcerClass::extended_tie:
      return "extended_tie";
  }
  return "unknown";
}

IcerResult classify_increment(double delta_cost, double delta_effect) {
  IcerResult r;
  r.delta_cost = delta_cost;
  r.delta_effect = delta_effect;
  if (std::abs(delta_effect) < kEffectTolerance) {
    r.classification = IcerClass::extended_tie;
  } else if (delta_cost <= 0.0 && delta_effect > 0.0) {
    r.classification = IcerClass::dominant;
  } else if (delta_cost >= 0.0 && delta_effect < 0.0) {
    r.classification = IcerClass::dominated;
  } else {
    r.classification = IcerClass::icer;
    r.icer_value = delta_cost / delta_effect;
  }
  return r;
}

IcerResult icer(const OutcomeTotals& comparator, const OutcomeTotals& candidate, const Perspective& perspective) {
  return classify_increment(perspective.cost(candidate) - perspective.cost(comparator),
                            candidate.qalys - comparator.qalys);
}

double nmb(const OutcomeTotals& totals, double wtp, const Perspective& perspective) {
  return nmb(totals.qalys, perspective.cost(totals), wtp);
}

std::size_t choose_strategy(std::span<const double> nmbs, std::size_t comparator) {
  if (comparator >= nmbs.size()) {
    throw std::invalid_argument("choose_strategy: comparator index out of range");
  }
  std::size_t best = comparator;
  for (std::size_t k = 0; k < nmbs.size(); ++k) {
    if (nmbs[k] > nmbs[best]) {
      best = k;
    }
  }
  if (best != comparator && nmbs[best] - nmbs[comparator] < kNmbTieTolerance) {
    best = comparator;
  }
  return best;
}

DecisionRecord decide(std::span<const NamedOutcome> outcomes, std::size_t comparator, double wtp,
                      const Perspective& perspective) {
  if (outcomes.size() < 2) {
    throw std::invalid_argument("decide: at least two strategies are required");
  }
  if (comparator >= outcomes.size()) {
    throw std::invalid_argument("decide: comparator index out of range");
  }
  DecisionRecord record;
  record.wtp = wtp;
  record.perspective = perspective.kind;
  std::vector<double> values;
  for (const auto& o : outcomes) {
    values.push_back(nmb(o.totals, wtp, perspective));
    record.nmb_per_strategy.emplace_back(o.name, values.back());
  }
  record.chosen_index = choose_strategy(values, comparator);
  record.chosen_strategy = outcomes[record.chosen_index].name;
  return record;
}

void mark_discordance(DecisionRecord& health_system, DecisionRecord& societal) {
  if (health_system.chosen_index != societal.chosen_index) {
    health_system.discordant_with = societal.perspective;
    societal.discordant_with = health_system.perspective;
  } else {
    health_system.discordant_with.reset();
    societal.discordant_with.reset();
  }
}

}  // namespace vop
