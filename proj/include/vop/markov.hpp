#pragma once

// Markov cohort engine: occupancy trace and discounted per-component totals.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vop/config.hpp"

namespace vop {

struct CohortTrace {
  std::vector<std::string> state_names;
  // (T+1) x S; row t is the occupancy after t cycles.
  Eigen::MatrixXd occupancy;

  int horizon() const { return static_cast<int>(occupancy.rows()) - 1; }
};

Eigen::MatrixXd to_eigen(const TransitionMatrix& matrix);
Eigen::RowVectorXd to_eigen(const std::vector<double>& distribution);

/// Throws std::invalid_argument on dimension mismatch, non-stochastic input
/// or horizon < 1.
CohortTrace run_cohort(const Eigen::MatrixXd& matrix, const Eigen::RowVectorXd& initial, int horizon,
                       std::vector<std::string> state_names = {});

struct OutcomeTotals {
  double direct_medical = 0.0;
  double productivity = 0.0;
  double out_of_pocket = 0.0;
  double qalys = 0.0;

  double cost(CostComponent component) const;
  double& cost(CostComponent component);
  double societal_cost() const { return direct_medical + productivity + out_of_pocket; }

  OutcomeTotals& operator+=(const OutcomeTotals& other);
  OutcomeTotals scaled(double factor) const;
  bool operator==(const OutcomeTotals&) const = default;
};

struct OutcomeLedger {
  OutcomeTotals discounted;
  OutcomeTotals undiscounted;
  // Undiscounted flows for cycles 0..T-1; the one-time cost sits in cycle 0.
  std::vector<OutcomeTotals> per_cycle;

  bool operator==(const OutcomeLedger&) const = default;
};

struct AccumulationOptions {
  double discount_costs = 0.03;
  double discount_effects = 0.03;
  double cycle_length = 1.0;
  bool half_cycle = false;
  ProductivityMethod productivity_method = ProductivityMethod::human_capital;
  double friction_period_years = 0.0;
};

AccumulationOptions accumulation_options(const ModelSpec& spec);

OutcomeLedger accumulate_outcomes(const CohortTrace& trace, const std::vector<HealthState>& states,
                                  const Strategy& strategy, const AccumulationOptions& options);

struct StrategyRun {
  CohortTrace trace;
  OutcomeLedger ledger;
};

// `view` is a ModelSpec with any subgroup overrides already applied.
StrategyRun run_strategy(const ModelSpec& view, std::size_t strategy_index);

struct ModelEvaluation {
  std::vector<std::string> strategy_names;
  std::vector<std::string> subgroup_names;
  // [strategy][subgroup]
  std::vector<std::vector<OutcomeLedger>> by_subgroup;
  // [strategy], population-share weighted
  std::vector<OutcomeLedger> population;
};

ModelEvaluation evaluate_model(const ModelSpec& spec);

OutcomeLedger weighted_sum(const std::vector<OutcomeLedger>& ledgers, const std::vector<double>& weights);

void write_trace_csv(std::ostream& out, const CohortTrace& trace);

}  // namespace vop
