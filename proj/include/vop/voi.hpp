#pragma once

// Value of information (EVPI, population EVPI, regression EVPPI) and the
// value of perspective (deterministic discordance loss and EVoP).

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vop/cea.hpp"
#include "vop/psa.hpp"

namespace vop {

/// Mean over iterations of the per-iteration optimum minus the value of the
/// decision taken on expected NMB, clamped at 0. `nmb` is N x S.
double evpi(const Eigen::MatrixXd& nmb, std::size_t comparator);
double evpi(const PsaBundle& bundle, double wtp, const Perspective& perspective);

double population_evpi(double evpi_per_person, double population);

// Degree-2 polynomial with interactions on standardised columns, including
// the intercept. Constant columns are dropped.
Eigen::MatrixXd evppi_design(const Eigen::MatrixXd& parameters);

/// Single-loop regression EVPPI for the parameter columns given. Throws
/// std::runtime_error when there are too few iterations for the basis.
double evppi(const Eigen::MatrixXd& nmb, const Eigen::MatrixXd& parameters, std::size_t comparator);

/// Throws std::invalid_argument for an empty subset or unknown column names.
double evppi(const PsaBundle& bundle, const std::vector<std::string>& subset, double wtp,
             const Perspective& perspective);

/// max(0, NMB_soc(d*) − NMB_soc(d_HS)), both decisions via decide().
double deterministic_vop(std::span<const NamedOutcome> outcomes, std::size_t comparator, double wtp);

struct VopResult {
  double deterministic_loss = 0.0;
  double evop = 0.0;
  std::vector<double> per_iteration_losses;
  double discordance_probability = 0.0;
};

/// Per iteration: societal optimum minus the societal NMB of the
/// health-system choice. In fixed-decision mode the health-system choice is
/// `fixed_hs_decision` in every iteration.
VopResult evop(const PsaBundle& bundle, double wtp, EvopMode mode = EvopMode::per_iteration,
               std::optional<std::size_t> fixed_hs_decision = std::nullopt);

struct EvpiResult {
  double evpi_per_person = 0.0;
  double population_evpi = 0.0;
  double population_size = 0.0;
  std::vector<std::pair<std::string, double>> evppi_by_parameter_set;
};

}  // namespace vop
