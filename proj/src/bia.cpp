#include "vop/bia.hpp"

#include <cmath>
#include <stdexcept>

namespace vop {

BudgetImpactResult budget_impact_from_series(const std::vector<double>& incremental_cost_per_person,
                                             const BudgetImpactSpec& bia, double discount_rate,
                                             PerspectiveKind perspective) {
  if (static_cast<int>(incremental_cost_per_person.size()) < bia.horizon_years) {
    throw std::invalid_argument("budget impact: cost series covers " +
                                std::to_string(incremental_cost_per_person.size()) + " years, horizon is " +
                                std::to_string(bia.horizon_years));
  }
  BudgetImpactResult result;
  result.perspective = perspective;
  for (int t = 1; t <= bia.horizon_years; ++t) {
    BudgetImpactYear y;
    y.year = t;
    y.incremental_cost_per_person = incremental_cost_per_person[static_cast<std::size_t>(t - 1)];
    y.uptake = bia.uptake_in_year(t);
    y.population = bia.eligible_population;
    y.bi_year = y.incremental_cost_per_person * y.uptake * y.population;
    if (bia.discounting) {
      y.bi_year /= std::pow(1.0 + discount_rate, t);
    }
    result.cumulative += y.bi_year;
    y.bi_cumulative = result.cumulative;
    result.years.push_back(y);
  }
  return result;
}

std::vector<double> annual_costs(const OutcomeLedger& ledger, double cycle_length, int years,
                                 const Perspective& perspective) {
  std::vector<double> out(static_cast<std::size_t>(years), 0.0);
  for (std::size_t t = 0; t < ledger.per_cycle.size(); ++t) {
    const double start = static_cast<double>(t) * cycle_length;
    const auto year = static_cast<std::size_t>(std::floor(start + 1e-9));
    if (year < out.size()) {
      out[year] += perspective.cost(ledger.per_cycle[t]);
    }
  }
  return out;
}

BudgetImpactResult budget_impact(const ModelSpec& spec, const BudgetImpactSpec& bia, const Perspective& perspective) {
  if (bia.horizon_years > spec.horizon_cycles * spec.cycle_length_years + 1e-9) {
    throw std::invalid_argument("budget impact horizon of " + std::to_string(bia.horizon_years) +
                                " years exceeds the model horizon");
  }
  if (spec.strategies.size() != 2) {
    throw std::invalid_argument("budget impact compares exactly one intervention with the comparator");
  }
  const auto eval = evaluate_model(spec);
  const auto comparator = spec.comparator_index();
  const std::size_t candidate = comparator == 0 ? 1 : 0;
  const auto base = annual_costs(eval.population[comparator], spec.cycle_length_years, bia.horizon_years, perspective);
  const auto alt = annual_costs(eval.population[candidate], spec.cycle_length_years, bia.horizon_years, perspective);
  std::vector<double> delta(base.size());
  for (std::size_t y = 0; y < base.size(); ++y) {
    delta[y] = alt[y] - base[y];
  }
  return budget_impact_from_series(delta, bia, spec.discount_rate_costs, perspective.kind);
}

CoiTable cost_of_illness(const ModelSpec& spec) {
  CoiTable table;
  const double model_years = spec.horizon_cycles * spec.cycle_length_years;
  table.years = spec.bia ? spec.bia->horizon_years : static_cast<int>(std::floor(model_years + 1e-9));
  table.years = std::max(table.years, 1);
  if (spec.bia) {
    table.population = spec.bia->eligible_population;
    table.population_scaled = true;
  }
  const auto eval = evaluate_model(spec);
  const auto& ledger = eval.population[spec.comparator_index()];

  double soc_annual = 0.0;
  double soc_population = 0.0;
  double soc_cumulative = 0.0;
  for (const auto component : kCostComponents) {
    const auto perspective = Perspective{PerspectiveKind::health_system, {component}};
    const auto annual = annual_costs(ledger, spec.cycle_length_years, table.years, perspective);
    double cumulative = 0.0;
    for (double v : annual) {
      cumulative += v;
    }
    CoiRow row;
    row.component = std::string(to_string(component));
    row.per_capita_annual = cumulative / table.years;
    row.population_annual = row.per_capita_annual * table.population;
    row.cumulative = cumulative * table.population;
    soc_annual += row.per_capita_annual;
    soc_population += row.population_annual;
    soc_cumulative += row.cumulative;
    table.rows.push_back(row);
  }
  table.rows.push_back(CoiRow{"societal", soc_annual, soc_population, soc_cumulative});
  return table;
}

}  // namespace vop
