#include "vop/psa.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vop/csv.hpp"
#include "vop/parameters.hpp"

namespace vop {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

double clamp_to_domain(ParameterDomain domain, double value) {
  switch (domain) {
    case ParameterDomain::unit_interval:
      return std::clamp(value, 0.0, 1.0);
    case ParameterDomain::nonnegative:
      return std::max(value, 0.0);
    case ParameterDomain::discount_rate:
      return std::clamp(value, 0.0, std::nextafter(1.0, 0.0));
    case ParameterDomain::transition_row:
      break;
  }
  return value;
}

double open_unit(double u) {
  constexpr double eps = 1e-12;
  return std::clamp(u, eps, 1.0 - eps);
}

double scalar_quantile(const DistributionSpec& d, double u) {
  namespace bm = boost::math;
  const auto& p = d.parameters;
  switch (d.kind) {
    case DistributionKind::beta:
      return bm::quantile(bm::beta_distribution<double>(p[0], p[1]), u);
    case DistributionKind::gamma:
      return bm::quantile(bm::gamma_distribution<double>(p[0], p[1]), u);
    case DistributionKind::normal:
      return p[1] == 0.0 ? p[0] : bm::quantile(bm::normal_distribution<double>(p[0], p[1]), u);
    case DistributionKind::lognormal:
      return p[1] == 0.0 ? std::exp(p[0]) : bm::quantile(bm::lognormal_distribution<double>(p[0], p[1]), u);
    case DistributionKind::uniform:
      return p[0] + u * (p[1] - p[0]);
    case DistributionKind::dirichlet_row:
      break;
  }
  throw std::logic_error("scalar_quantile: not a scalar distribution");
}

std::vector<double> dirichlet_row(const std::vector<double>& base, double precision, std::span<const double> u,
                                  const std::string& target) {
  namespace bm = boost::math;
  std::vector<double> row(base.size(), 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < base.size(); ++j) {
    const double alpha = base[j] * precision;
    if (alpha > 0.0) {
      row[j] = bm::quantile(bm::gamma_distribution<double>(alpha, 1.0), u[j]);
      sum += row[j];
    }
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw std::runtime_error("dirichlet-row draw for '" + target + "' is degenerate (all components zero)");
  }
  std::size_t largest = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    row[j] /= sum;
    if (row[j] > row[largest]) {
      largest = j;
    }
  }
  double rest = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j != largest) {
      rest += row[j];
    }
  }
  row[largest] = 1.0 - rest;
  return row;
}

}  // namespace

std::uint64_t iteration_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + (index + 1) * kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> uniform_counts(const ModelSpec& spec) {
  std::vector<std::size_t> counts;
  for (const auto& d : spec.psa.distributions) {
    counts.push_back(d.kind == DistributionKind::dirichlet_row ? spec.states.size() : 1);
  }
  return counts;
}

void apply_unit_draw(const ModelSpec& base, ModelSpec& spec, std::span<const double> u, std::vector<double>* values) {
  std::size_t offset = 0;
  for (const auto& d : base.psa.distributions) {
    if (d.kind == DistributionKind::dirichlet_row) {
      const auto n = base.states.size();
      if (offset + n > u.size()) {
        throw std::invalid_argument("apply_unit_draw: too few coordinates");
      }
      std::vector<double> coords(n);
      for (std::size_t j = 0; j < n; ++j) {
        coords[j] = open_unit(u[offset + j]);
      }
      const auto base_row = std::get<std::vector<double>>(get_parameter(base, d.target));
      auto row = dirichlet_row(base_row, d.parameters[0], coords, d.target);
      if (values) {
        values->insert(values->end(), row.begin(), row.end());
      }
      set_parameter(spec, d.target, std::move(row));
      offset += n;
      continue;
    }
    if (offset >= u.size()) {
      throw std::invalid_argument("apply_unit_draw: too few coordinates");
    }
    const auto domain = describe_parameter(base, d.target).domain;
    const double value = clamp_to_domain(domain, scalar_quantile(d, open_unit(u[offset])));
    if (values) {
      values->push_back(value);
    }
    set_parameter(spec, d.target, value);
    ++offset;
  }
}

ParameterDraw sample_parameters(const ModelSpec& spec, std::size_t iteration_index) {
  std::mt19937_64 rng(iteration_seed(spec.psa.seed, iteration_index));
  std::size_t total = 0;
  for (auto c : uniform_counts(spec)) {
    total += c;
  }
  std::vector<double> u(total);
  for (auto& x : u) {
    x = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  }
  ParameterDraw draw;
  draw.columns = parameter_columns(spec);
  draw.spec = spec;
  apply_unit_draw(spec, draw.spec, u, &draw.values);
  return draw;
}

std::size_t BundleLayout::candidate() const {
  for (std::size_t s = 0; s < strategy_names.size(); ++s) {
    if (s != comparator) {
      return s;
    }
  }
  throw std::logic_error("bundle has no intervention strategy");
}

BundleLayout bundle_layout(const ModelSpec& spec) {
  BundleLayout layout;
  for (const auto& s : spec.strategies) {
    layout.strategy_names.push_back(s.name);
  }
  layout.comparator = spec.comparator_index();
  for (const auto& g : spec.subgroups) {
    layout.subgroup_names.push_back(g.name);
    layout.subgroup_shares.push_back(g.population_share);
    layout.subgroup_baselines.push_back(g.baseline_health);
  }
  return layout;
}

OutcomeTotals PsaBundle::population(std::size_t i, std::size_t s) const {
  OutcomeTotals total;
  for (std::size_t g = 0; g < layout.subgroups(); ++g) {
    total += at(i, s, g).scaled(layout.subgroup_shares[g]);
  }
  return total;
}

bool PsaBundle::operator==(const PsaBundle& other) const {
  return iterations == other.iterations && layout.strategy_names == other.layout.strategy_names &&
         layout.comparator == other.layout.comparator && layout.subgroup_names == other.layout.subgroup_names &&
         layout.subgroup_shares == other.layout.subgroup_shares &&
         layout.subgroup_baselines == other.layout.subgroup_baselines && parameter_names == other.parameter_names &&
         sampled.rows() == other.sampled.rows() && sampled.cols() == other.sampled.cols() &&
         sampled == other.sampled && outcomes == other.outcomes && master_seed == other.master_seed &&
         spec_digest == other.spec_digest;
}

PsaBundle run_psa(const ModelSpec& spec, const PsaOptions& options) {
  const std::size_t n = spec.psa.iterations;
  if (n < 1) {
    throw std::invalid_argument("run_psa: iterations must be >= 1");
  }
  PsaBundle bundle;
  bundle.iterations = n;
  bundle.layout = bundle_layout(spec);
  bundle.parameter_names = parameter_columns(spec);
  bundle.master_seed = spec.psa.seed;
  bundle.spec_digest = spec_digest(spec);
  const std::size_t n_strategies = bundle.layout.strategies();
  const std::size_t n_groups = bundle.layout.subgroups();
  bundle.sampled.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(bundle.parameter_names.size()));
  bundle.outcomes.resize(n * n_strategies * n_groups);

  auto run_iteration = [&](std::size_t i) {
    try {
      const auto draw = sample_parameters(spec, i);
      for (std::size_t p = 0; p < draw.values.size(); ++p) {
        bundle.sampled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = draw.values[p];
      }
      for (std::size_t g = 0; g < n_groups; ++g) {
        const auto view = resolve_subgroup_spec(draw.spec, spec.subgroups[g]);
        for (std::size_t s = 0; s < n_strategies; ++s) {
          bundle.at(i, s, g) = run_strategy(view, s).ledger.discounted;
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("PSA iteration " + std::to_string(i) + ": " + e.what());
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  auto index_of = [&](std::size_t k) { return options.reverse_order ? n - 1 - k : k; };

  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) {
      run_iteration(index_of(k));
    }
    return bundle;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          run_iteration(index_of(k));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return bundle;
}

Eigen::MatrixXd nmb_matrix(const PsaBundle& bundle, double wtp, const Perspective& perspective) {
  const auto n_strategies = bundle.layout.strategies();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(bundle.iterations), static_cast<Eigen::Index>(n_strategies));
  for (std::size_t i = 0; i < bundle.iterations; ++i) {
    for (std::size_t s = 0; s < n_strategies; ++s) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
          nmb(bundle.population(i, s), wtp, perspective);
    }
  }
  return out;
}

CeacTable ceac(const PsaBundle& bundle, const Perspective& perspective, const std::vector<double>& wtp_grid) {
  if (wtp_grid.empty()) {
    throw std::invalid_argument("ceac: empty willingness-to-pay grid");
  }
  CeacTable table;
  table.wtp_grid = wtp_grid;
  table.strategy_names = bundle.layout.strategy_names;
  const auto n_strategies = bundle.layout.strategies();
  for (const double wtp : wtp_grid) {
    const auto values = nmb_matrix(bundle, wtp, perspective);
    std::vector<std::size_t> wins(n_strategies, 0);
    std::vector<double> row(n_strategies);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      for (std::size_t s = 0; s < n_strategies; ++s) {
        row[s] = values(i, static_cast<Eigen::Index>(s));
      }
      ++wins[choose_strategy(row, bundle.layout.comparator)];
    }
    std::vector<double> probability(n_strategies);
    for (std::size_t s = 0; s < n_strategies; ++s) {
      probability[s] = static_cast<double>(wins[s]) / static_cast<double>(bundle.iterations);
    }
    table.probability.push_back(std::move(probability));
  }
  return table;
}

CePlane ce_plane_points(const PsaBundle& bundle, const Perspective& perspective) {
  const auto comparator = bundle.layout.comparator;
  const auto candidate = bundle.layout.candidate();
  const auto hs = Perspective::health_system();
  const auto soc = Perspective::societal();
  CePlane plane;
  for (std::size_t i = 0; i < bundle.iterations; ++i) {
    const auto base = bundle.population(i, comparator);
    const auto alt = bundle.population(i, candidate);
    const double delta_effect = alt.qalys - base.qalys;
    plane.points.push_back({delta_effect, perspective.cost(alt) - perspective.cost(base)});
    const double delta_hs = hs.cost(alt) - hs.cost(base);
    const double delta_soc = soc.cost(alt) - soc.cost(base);
    plane.perspective_delta.push_back({delta_effect, delta_soc - delta_hs});
  }
  return plane;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

DeltaNmbSummary delta_nmb_distribution(const PsaBundle& bundle, double wtp) {
  const auto comparator = bundle.layout.comparator;
  const auto candidate = bundle.layout.candidate();
  const auto hs = Perspective::health_system();
  const auto soc = Perspective::societal();
  DeltaNmbSummary summary;
  double sum = 0.0;
  for (std::size_t i = 0; i < bundle.iterations; ++i) {
    const auto base = bundle.population(i, comparator);
    const auto alt = bundle.population(i, candidate);
    const double d_soc = nmb(alt, wtp, soc) - nmb(base, wtp, soc);
    const double d_hs = nmb(alt, wtp, hs) - nmb(base, wtp, hs);
    summary.series.push_back(d_soc - d_hs);
    sum += summary.series.back();
  }
  summary.mean = sum / static_cast<double>(bundle.iterations);
  for (std::size_t q = 0; q < kSummaryProbabilities.size(); ++q) {
    summary.quantiles[q] = quantile(summary.series, kSummaryProbabilities[q]);
  }
  return summary;
}

namespace {

constexpr std::array<const char*, 4> kOutcomeSuffixes{"cost_direct", "cost_prod", "cost_oop", "qalys"};

}  // namespace

void write_psa_samples_csv(std::ostream& out, const PsaBundle& bundle) {
  std::vector<std::string> header{"iteration"};
  header.insert(header.end(), bundle.parameter_names.begin(), bundle.parameter_names.end());
  for (const auto& s : bundle.layout.strategy_names) {
    for (const auto& g : bundle.layout.subgroup_names) {
      for (const auto* suffix : kOutcomeSuffixes) {
        header.push_back(s + ":" + g + ":" + suffix);
      }
    }
  }
  write_csv_row(out, header);
  for (std::size_t i = 0; i < bundle.iterations; ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (Eigen::Index p = 0; p < bundle.sampled.cols(); ++p) {
      row.push_back(format_double(bundle.sampled(static_cast<Eigen::Index>(i), p)));
    }
    for (std::size_t s = 0; s < bundle.layout.strategies(); ++s) {
      for (std::size_t g = 0; g < bundle.layout.subgroups(); ++g) {
        const auto& o = bundle.at(i, s, g);
        row.push_back(format_double(o.direct_medical));
        row.push_back(format_double(o.productivity));
        row.push_back(format_double(o.out_of_pocket));
        row.push_back(format_double(o.qalys));
      }
    }
    write_csv_row(out, row);
  }
}

PsaBundle read_psa_samples_csv(std::istream& in, const BundleLayout& layout) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("psa samples: missing header");
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header.front() != "iteration") {
    throw std::runtime_error("psa samples: first column must be 'iteration'");
  }
  const std::size_t outcome_columns = layout.strategies() * layout.subgroups() * kOutcomeSuffixes.size();
  if (header.size() < 1 + outcome_columns) {
    throw std::runtime_error("psa samples: too few columns for the layout");
  }
  const std::size_t n_params = header.size() - 1 - outcome_columns;
  PsaBundle bundle;
  bundle.layout = layout;
  bundle.parameter_names.assign(header.begin() + 1, header.begin() + 1 + static_cast<std::ptrdiff_t>(n_params));
  std::size_t col = 1 + n_params;
  for (const auto& s : layout.strategy_names) {
    for (const auto& g : layout.subgroup_names) {
      for (const auto* suffix : kOutcomeSuffixes) {
        if (header[col++] != s + ":" + g + ":" + suffix) {
          throw std::runtime_error("psa samples: unexpected column '" + header[col - 1] + "'");
        }
      }
    }
  }
  std::vector<std::vector<double>> params;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("psa samples: row " + std::to_string(params.size()) + " has " +
                               std::to_string(fields.size()) + " fields, expected " + std::to_string(header.size()));
    }
    std::vector<double> p;
    for (std::size_t k = 0; k < n_params; ++k) {
      p.push_back(parse_double(fields[1 + k]));
    }
    params.push_back(std::move(p));
    for (std::size_t k = 1 + n_params; k < fields.size(); k += 4) {
      bundle.outcomes.push_back(OutcomeTotals{parse_double(fields[k]), parse_double(fields[k + 1]),
                                              parse_double(fields[k + 2]), parse_double(fields[k + 3])});
    }
  }
  bundle.iterations = params.size();
  bundle.sampled.resize(static_cast<Eigen::Index>(params.size()), static_cast<Eigen::Index>(n_params));
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < n_params; ++k) {
      bundle.sampled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = params[i][k];
    }
  }
  return bundle;
}

}  // namespace vop
