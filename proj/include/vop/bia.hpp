#pragma once

// Budget impact over a short horizon and cost-of-illness tables.

#include <optional>
#include <string>
#include <vector>

#include "vop/cea.hpp"
#include "vop/config.hpp"
#include "vop/markov.hpp"

namespace vop {

struct BudgetImpactYear {
  int year = 0;
  double incremental_cost_per_person = 0.0;
  double uptake = 0.0;
  double population = 0.0;
  double bi_year = 0.0;
  double bi_cumulative = 0.0;
};

struct BudgetImpactResult {
  PerspectiveKind perspective = PerspectiveKind::health_system;
  std::vector<BudgetImpactYear> years;
  double cumulative = 0.0;
};

/// Per-year BI = ΔC(t) · uptake(t) · N_pop, divided by (1+r)^t when `bia.discounting`
/// is set. Throws std::invalid_argument when the series is
/// shorter than the horizon.
BudgetImpactResult budget_impact_from_series(const std::vector<double>& incremental_cost_per_person,
                                             const BudgetImpactSpec& bia, double discount_rate,
                                             PerspectiveKind perspective);

// Undiscounted perspective-filtered cost per calendar year 1..years, summing
// the cycles that start inside each year.
std::vector<double> annual_costs(const OutcomeLedger& ledger, double cycle_length, int years,
                                 const Perspective& perspective);

/// Throws std::invalid_argument when the horizon exceeds the model horizon.
BudgetImpactResult budget_impact(const ModelSpec& spec, const BudgetImpactSpec& bia, const Perspective& perspective);

struct CoiRow {
  std::string component;  // direct_medical, productivity, out_of_pocket or societal
  double per_capita_annual = 0.0;
  double population_annual = 0.0;
  double cumulative = 0.0;
};

struct CoiTable {
  int years = 0;
  double population = 1.0;
  // False when no budget impact spec supplies an eligible population.
  bool population_scaled = false;
  std::vector<CoiRow> rows;
};

// Comparator-arm burden over the BIA horizon (model horizon otherwise).
CoiTable cost_of_illness(const ModelSpec& spec);

}  // namespace vop
