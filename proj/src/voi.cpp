#include "vop/voi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vop {

namespace {

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index i) {
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index s = 0; s < m.cols(); ++s) {
    row[static_cast<std::size_t>(s)] = m(i, s);
  }
  return row;
}

std::size_t decision_on_means(const Eigen::MatrixXd& values, std::size_t comparator) {
  const Eigen::RowVectorXd means = values.colwise().mean();
  std::vector<double> m(means.data(), means.data() + means.size());
  return choose_strategy(m, comparator);
}

double expected_gain(const Eigen::MatrixXd& values, std::size_t comparator) {
  if (values.rows() == 0 || values.cols() == 0) {
    throw std::invalid_argument("value of information needs at least one iteration and one strategy");
  }
  const auto current = static_cast<Eigen::Index>(decision_on_means(values, comparator));
  double gain = 0.0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    const auto best = static_cast<Eigen::Index>(choose_strategy(row_of(values, i), comparator));
    gain += values(i, best) - values(i, current);
  }
  return std::max(0.0, gain / static_cast<double>(values.rows()));
}

}  // namespace

double evpi(const Eigen::MatrixXd& nmb, std::size_t comparator) { return expected_gain(nmb, comparator); }

double evpi(const PsaBundle& bundle, double wtp, const Perspective& perspective) {
  return evpi(nmb_matrix(bundle, wtp, perspective), bundle.layout.comparator);
}

double population_evpi(double evpi_per_person, double population) {
  if (!(population >= 0.0)) {
    throw std::invalid_argument("population size must be >= 0");
  }
  return evpi_per_person * population;
}

Eigen::MatrixXd evppi_design(const Eigen::MatrixXd& parameters) {
  const auto n = parameters.rows();
  std::vector<Eigen::VectorXd> z;
  for (Eigen::Index j = 0; j < parameters.cols(); ++j) {
    const Eigen::VectorXd col = parameters.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(std::max<Eigen::Index>(n, 1)));
    if (sd > 0.0) {
      z.emplace_back((col.array() - mean) / sd);
    }
  }
  const auto k = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd x(n, 1 + k + k * (k + 1) / 2);
  x.col(0).setOnes();
  Eigen::Index c = 1;
  for (const auto& col : z) {
    x.col(c++) = col;
  }
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      x.col(c++) = z[static_cast<std::size_t>(a)].cwiseProduct(z[static_cast<std::size_t>(b)]);
    }
  }
  return x;
}

double evppi(const Eigen::MatrixXd& nmb, const Eigen::MatrixXd& parameters, std::size_t comparator) {
  if (nmb.rows() != parameters.rows()) {
    throw std::invalid_argument("evppi: NMB and parameter matrices have different iteration counts");
  }
  const Eigen::MatrixXd x = evppi_design(parameters);
  if (x.rows() <= x.cols()) {
    throw std::runtime_error("evppi: " + std::to_string(x.rows()) + " iterations cannot support a basis of " +
                             std::to_string(x.cols()) + " terms; increase N or reduce the basis");
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> solver(x);
  const Eigen::MatrixXd fitted = x * solver.solve(nmb);
  return expected_gain(fitted, comparator);
}

double evppi(const PsaBundle& bundle, const std::vector<std::string>& subset, double wtp,
             const Perspective& perspective) {
  if (subset.empty()) {
    throw std::invalid_argument("evppi: parameter subset is empty");
  }
  Eigen::MatrixXd columns(bundle.sampled.rows(), static_cast<Eigen::Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const auto it = std::find(bundle.parameter_names.begin(), bundle.parameter_names.end(), subset[k]);
    if (it == bundle.parameter_names.end()) {
      throw std::invalid_argument("evppi: unknown sampled parameter '" + subset[k] + "'");
    }
    columns.col(static_cast<Eigen::Index>(k)) =
        bundle.sampled.col(static_cast<Eigen::Index>(it - bundle.parameter_names.begin()));
  }
  return evppi(nmb_matrix(bundle, wtp, perspective), columns, bundle.layout.comparator);
}

double deterministic_vop(std::span<const NamedOutcome> outcomes, std::size_t comparator, double wtp) {
  const auto societal = decide(outcomes, comparator, wtp, Perspective::societal());
  const auto health_system = decide(outcomes, comparator, wtp, Perspective::health_system());
  const double best = societal.nmb_per_strategy[societal.chosen_index].second;
  const double chosen = societal.nmb_per_strategy[health_system.chosen_index].second;
  return std::max(0.0, best - chosen);
}

VopResult evop(const PsaBundle& bundle, double wtp, EvopMode mode, std::optional<std::size_t> fixed_hs_decision) {
  if (bundle.iterations < 1) {
    throw std::invalid_argument("evop: bundle has no iterations");
  }
  if (mode == EvopMode::fixed_decision && !fixed_hs_decision) {
    throw std::invalid_argument("evop: fixed-decision mode needs the base-case health-system decision");
  }
  const auto comparator = bundle.layout.comparator;
  const auto soc = nmb_matrix(bundle, wtp, Perspective::societal());
  const auto hs = nmb_matrix(bundle, wtp, Perspective::health_system());
  VopResult result;
  std::size_t discordant = 0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < soc.rows(); ++i) {
    const auto d_star = choose_strategy(row_of(soc, i), comparator);
    const auto d_hs = mode == EvopMode::fixed_decision ? *fixed_hs_decision : choose_strategy(row_of(hs, i), comparator);
    if (d_hs != d_star) {
      ++discordant;
    }
    const double loss = std::max(0.0, soc(i, static_cast<Eigen::Index>(d_star)) - soc(i, static_cast<Eigen::Index>(d_hs)));
    result.per_iteration_losses.push_back(loss);
    total += loss;
  }
  const auto n = static_cast<double>(bundle.iterations);
  result.evop = total / n;
  result.discordance_probability = static_cast<double>(discordant) / n;
  return result;
}

}  // namespace vop
