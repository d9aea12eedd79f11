#include "vop/markov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vop/csv.hpp"
#include "vop/parameters.hpp"

namespace vop {

namespace {

constexpr double kStochasticTolerance = 1e-9;

double friction_fraction(double friction_years, double elapsed_cycles, double cycle_length) {
  return std::clamp((friction_years - elapsed_cycles * cycle_length) / cycle_length, 0.0, 1.0);
}

}  // namespace

Eigen::MatrixXd to_eigen(const TransitionMatrix& matrix) {
  const auto n = static_cast<Eigen::Index>(matrix.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(matrix[i].size()) != n) {
      throw std::invalid_argument("transition matrix is not square");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = matrix[i][j];
    }
  }
  return m;
}

Eigen::RowVectorXd to_eigen(const std::vector<double>& distribution) {
  return Eigen::Map<const Eigen::RowVectorXd>(distribution.data(), static_cast<Eigen::Index>(distribution.size()));
}

CohortTrace run_cohort(const Eigen::MatrixXd& matrix, const Eigen::RowVectorXd& initial, int horizon,
                       std::vector<std::string> state_names) {
  const auto n = matrix.rows();
  if (matrix.cols() != n || initial.size() != n) {
    throw std::invalid_argument("run_cohort: matrix is " + std::to_string(matrix.rows()) + "x" +
                                std::to_string(matrix.cols()) + " but the initial distribution has " +
                                std::to_string(initial.size()) + " entries");
  }
  if (!state_names.empty() && static_cast<Eigen::Index>(state_names.size()) != n) {
    throw std::invalid_argument("run_cohort: state name count does not match the matrix");
  }
  if (horizon < 1) {
    throw std::invalid_argument("run_cohort: horizon must be >= 1");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(matrix.row(i).sum() - 1.0) > kStochasticTolerance) {
      throw std::invalid_argument("run_cohort: matrix row " + std::to_string(i) + " does not sum to 1");
    }
  }
  if (std::abs(initial.sum() - 1.0) > kStochasticTolerance) {
    throw std::invalid_argument("run_cohort: initial distribution does not sum to 1");
  }

  CohortTrace trace;
  trace.state_names = std::move(state_names);
  trace.occupancy.resize(horizon + 1, n);
  trace.occupancy.row(0) = initial;
  for (int t = 0; t < horizon; ++t) {
    trace.occupancy.row(t + 1).noalias() = trace.occupancy.row(t) * matrix;
  }
  return trace;
}

double OutcomeTotals::cost(CostComponent component) const {
  switch (component) {
    case CostComponent::direct_medical:
      return direct_medical;
    case CostComponent::productivity:
      return productivity;
    case CostComponent::out_of_pocket:
      return out_of_pocket;
  }
  return 0.0;
}

double& OutcomeTotals::cost(CostComponent component) {
  switch (component) {
    case CostComponent::productivity:
      return productivity;
    case CostComponent::out_of_pocket:
      return out_of_pocket;
    case CostComponent::direct_medical:
      break;
  }
  return direct_medical;
}

OutcomeTotals& OutcomeTotals::operator+=(const OutcomeTotals& other) {
  direct_medical += other.direct_medical;
  productivity += other.productivity;
  out_of_pocket += other.out_of_pocket;
  qalys += other.qalys;
  return *this;
}

OutcomeTotals OutcomeTotals::scaled(double factor) const {
  return OutcomeTotals{direct_medical * factor, productivity * factor, out_of_pocket * factor, qalys * factor};
}

AccumulationOptions accumulation_options(const ModelSpec& spec) {
  AccumulationOptions o;
  o.discount_costs = spec.discount_rate_costs;
  o.discount_effects = spec.discount_rate_effects;
  o.cycle_length = spec.cycle_length_years;
  o.half_cycle = spec.half_cycle;
  o.productivity_method = spec.productivity_method;
  o.friction_period_years = spec.friction_period_years.value_or(0.0);
  return o;
}

OutcomeLedger accumulate_outcomes(const CohortTrace& trace, const std::vector<HealthState>& states,
                                  const Strategy& strategy, const AccumulationOptions& options) {
  const auto n = static_cast<Eigen::Index>(states.size());
  if (trace.occupancy.cols() != n) {
    throw std::invalid_argument("accumulate_outcomes: trace has " + std::to_string(trace.occupancy.cols()) +
                                " states, model has " + std::to_string(n));
  }
  if (!strategy.state_costs.empty() && static_cast<Eigen::Index>(strategy.state_costs.size()) != n) {
    throw std::invalid_argument("accumulate_outcomes: strategy state_costs do not match the state list");
  }
  const int horizon = trace.horizon();
  const double length = options.cycle_length;
  const bool friction = options.productivity_method == ProductivityMethod::friction_cost;

  // Per-state, per-cycle values (state cost plus strategy add-on).
  Eigen::MatrixXd values(n, 4);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& s = states[static_cast<std::size_t>(j)];
    for (std::size_t c = 0; c < kCostComponents.size(); ++c) {
      double v = s.cost(kCostComponents[c]);
      if (!strategy.state_costs.empty()) {
        v += strategy.state_costs[static_cast<std::size_t>(j)].get(kCostComponents[c]);
      }
      values(j, static_cast<Eigen::Index>(c)) = v;
    }
    values(j, 3) = s.utility;
  }

  OutcomeLedger ledger;
  ledger.per_cycle.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    Eigen::RowVectorXd weight = trace.occupancy.row(t);
    if (options.half_cycle) {
      weight = 0.5 * (trace.occupancy.row(t) + trace.occupancy.row(t + 1));
    }
    const Eigen::RowVectorXd flows = weight * values * length;
    OutcomeTotals cycle{flows(0), flows(1), flows(2), flows(3)};

    if (friction) {
      double productivity = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!states[static_cast<std::size_t>(j)].is_absorbing) {
          productivity += weight(j) * values(j, 1) * length;
          continue;
        }
        for (int k = 0; k <= t; ++k) {
          const double entrants =
              k == 0 ? trace.occupancy(0, j) : trace.occupancy(k, j) - trace.occupancy(k - 1, j);
          productivity += entrants * values(j, 1) * length *
                          friction_fraction(options.friction_period_years, t - k, length);
        }
      }
      cycle.productivity = productivity;
    }
    if (t == 0) {
      cycle.cost(strategy.one_time_cost_component) += strategy.one_time_cost;
    }

    const double years = t * length;
    const double d_cost = std::pow(1.0 + options.discount_costs, -years);
    const double d_effect = std::pow(1.0 + options.discount_effects, -years);
    ledger.undiscounted += cycle;
    ledger.discounted.direct_medical += d_cost * cycle.direct_medical;
    ledger.discounted.productivity += d_cost * cycle.productivity;
    ledger.discounted.out_of_pocket += d_cost * cycle.out_of_pocket;
    ledger.discounted.qalys += d_effect * cycle.qalys;
    ledger.per_cycle[static_cast<std::size_t>(t)] = cycle;
  }
  return ledger;
}

StrategyRun run_strategy(const ModelSpec& view, std::size_t strategy_index) {
  if (strategy_index >= view.strategies.size()) {
    throw std::out_of_range("run_strategy: strategy index out of range");
  }
  const auto& strategy = view.strategies[strategy_index];
  std::vector<std::string> names;
  for (const auto& s : view.states) {
    names.push_back(s.name);
  }
  StrategyRun run;
  run.trace = run_cohort(to_eigen(strategy.transition_matrix), to_eigen(view.initial_distribution),
                         view.horizon_cycles, std::move(names));
  run.ledger = accumulate_outcomes(run.trace, view.states, strategy, accumulation_options(view));
  return run;
}

OutcomeLedger weighted_sum(const std::vector<OutcomeLedger>& ledgers, const std::vector<double>& weights) {
  if (ledgers.size() != weights.size() || ledgers.empty()) {
    throw std::invalid_argument("weighted_sum: ledger and weight counts differ");
  }
  OutcomeLedger total;
  total.per_cycle.resize(ledgers.front().per_cycle.size());
  for (std::size_t g = 0; g < ledgers.size(); ++g) {
    total.discounted += ledgers[g].discounted.scaled(weights[g]);
    total.undiscounted += ledgers[g].undiscounted.scaled(weights[g]);
    for (std::size_t t = 0; t < total.per_cycle.size(); ++t) {
      total.per_cycle[t] += ledgers[g].per_cycle.at(t).scaled(weights[g]);
    }
  }
  return total;
}

ModelEvaluation evaluate_model(const ModelSpec& spec) {
  ModelEvaluation eval;
  for (const auto& s : spec.strategies) {
    eval.strategy_names.push_back(s.name);
  }
  std::vector<double> shares;
  std::vector<ModelSpec> views;
  for (const auto& g : spec.subgroups) {
    eval.subgroup_names.push_back(g.name);
    shares.push_back(g.population_share);
    views.push_back(resolve_subgroup_spec(spec, g));
  }
  for (std::size_t k = 0; k < spec.strategies.size(); ++k) {
    std::vector<OutcomeLedger> per_group;
    for (const auto& view : views) {
      per_group.push_back(run_strategy(view, k).ledger);
    }
    eval.population.push_back(weighted_sum(per_group, shares));
    eval.by_subgroup.push_back(std::move(per_group));
  }
  return eval;
}

void write_trace_csv(std::ostream& out, const CohortTrace& trace) {
  std::vector<std::string> header{"cycle"};
  for (Eigen::Index j = 0; j < trace.occupancy.cols(); ++j) {
    header.push_back(trace.state_names.empty() ? "state_" + std::to_string(j)
                                               : trace.state_names[static_cast<std::size_t>(j)]);
  }
  write_csv_row(out, header);
  for (Eigen::Index t = 0; t < trace.occupancy.rows(); ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (Eigen::Index j = 0; j < trace.occupancy.cols(); ++j) {
      row.push_back(format_double(trace.occupancy(t, j)));
    }
    write_csv_row(out, row);
  }
}

}  // namespace vop
