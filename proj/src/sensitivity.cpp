#include "vop/sensitivity.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "vop/markov.hpp"
#include "vop/parameters.hpp"
#include "vop/psa.hpp"

namespace vop {

double incremental_nmb(const ModelSpec& spec, double wtp, const Perspective& perspective) {
  const auto eval = evaluate_model(spec);
  const auto comparator = spec.comparator_index();
  const auto candidate = bundle_layout(spec).candidate();
  return nmb(eval.population[candidate].discounted, wtp, perspective) -
         nmb(eval.population[comparator].discounted, wtp, perspective);
}

double TornadoEntry::bar_width() const { return std::abs(outcome_at_high - outcome_at_low); }

ParameterRanges default_tornado_ranges(const ModelSpec& spec) {
  std::vector<std::string> paths;
  for (const auto& d : spec.psa.distributions) {
    if (!describe_parameter(spec, d.target).is_row()) {
      paths.push_back(d.target);
    }
  }
  paths.emplace_back("discount.costs");
  paths.emplace_back("discount.effects");
  ParameterRanges ranges;
  for (const auto& path : paths) {
    const double base = get_scalar(spec, path);
    double lo = base * 0.8;
    double hi = base * 1.2;
    switch (describe_parameter(spec, path).domain) {
      case ParameterDomain::unit_interval:
        lo = std::clamp(lo, 0.0, 1.0);
        hi = std::clamp(hi, 0.0, 1.0);
        break;
      case ParameterDomain::discount_rate:
        hi = std::min(hi, std::nextafter(1.0, 0.0));
        break;
      default:
        break;
    }
    ranges.emplace_back(path, std::pair{lo, hi});
  }
  return ranges;
}

std::vector<TornadoEntry> tornado(const ModelSpec& spec, const ParameterRanges& ranges, double wtp,
                                  const Perspective& perspective) {
  auto evaluate_at = [&](const std::string& path, double value) {
    ModelSpec varied = spec;
    set_parameter(varied, path, value);
    auto diagnostics = validate_core(varied);
    std::erase_if(diagnostics, [](const Diagnostic& d) { return d.severity != Severity::error; });
    if (!diagnostics.empty()) {
      throw ValidationError("tornado range for '" + path + "'", std::move(diagnostics));
    }
    return incremental_nmb(varied, wtp, perspective);
  };
  std::vector<TornadoEntry> entries;
  for (const auto& [path, range] : ranges) {
    const auto info = describe_parameter(spec, path);
    if (info.is_row() || !(range.first <= range.second) || !in_domain(info.domain, range.first) ||
        !in_domain(info.domain, range.second)) {
      throw std::invalid_argument("tornado: invalid range for '" + path + "'");
    }
    entries.push_back(
        TornadoEntry{path, range.first, range.second, evaluate_at(path, range.first), evaluate_at(path, range.second)});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const TornadoEntry& a, const TornadoEntry& b) { return a.bar_width() > b.bar_width(); });
  return entries;
}

namespace {

struct SobolEstimates {
  std::vector<double> first;
  std::vector<double> total;
};

SobolEstimates jansen(const std::vector<double>& fa, const std::vector<double>& fb,
                      const std::vector<std::vector<double>>& fab, const std::vector<std::size_t>& rows) {
  const auto n = static_cast<double>(rows.size());
  double mean = 0.0;
  for (auto j : rows) {
    mean += fa[j] + fb[j];
  }
  mean /= 2.0 * n;
  double variance = 0.0;
  for (auto j : rows) {
    variance += (fa[j] - mean) * (fa[j] - mean) + (fb[j] - mean) * (fb[j] - mean);
  }
  variance /= 2.0 * n;
  SobolEstimates out;
  for (const auto& f : fab) {
    double first_gap = 0.0;
    double total_gap = 0.0;
    for (auto j : rows) {
      first_gap += (fb[j] - f[j]) * (fb[j] - f[j]);
      total_gap += (fa[j] - f[j]) * (fa[j] - f[j]);
    }
    first_gap /= 2.0 * n;
    total_gap /= 2.0 * n;
    if (variance > 0.0) {
      out.first.push_back((variance - first_gap) / variance);
      out.total.push_back(total_gap / variance);
    } else {
      out.first.push_back(0.0);
      out.total.push_back(0.0);
    }
  }
  return out;
}

double standard_deviation(const std::vector<double>& values) {
  if (values.size() < 2) {
    return 0.0;
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) {
    sum += (v - mean) * (v - mean);
  }
  return std::sqrt(sum / static_cast<double>(values.size() - 1));
}

}  // namespace

SobolResult sobol_analysis(const SobolProblem& problem, std::size_t base_samples, std::size_t bootstrap_resamples,
                           std::uint64_t seed) {
  const std::size_t k = problem.factor_dimensions.size();
  if (k == 0 || problem.factor_names.size() != k) {
    throw std::invalid_argument("sobol_analysis: need one name and dimension count per factor");
  }
  if (base_samples < 2) {
    throw std::invalid_argument("sobol_analysis: too few base samples");
  }
  std::vector<std::size_t> offsets(k + 1, 0);
  for (std::size_t f = 0; f < k; ++f) {
    offsets[f + 1] = offsets[f] + problem.factor_dimensions[f];
  }
  const std::size_t dim = offsets[k];

  // Rows of A and B come from one 2·dim Sobol point each.
  boost::random::sobol engine(static_cast<unsigned>(2 * dim));
  engine.discard(2 * dim * (1 + seed % 1024));
  std::vector<std::vector<double>> a(base_samples, std::vector<double>(dim));
  std::vector<std::vector<double>> b(base_samples, std::vector<double>(dim));
  for (std::size_t j = 0; j < base_samples; ++j) {
    for (std::size_t d = 0; d < 2 * dim; ++d) {
      const double u = std::ldexp(static_cast<double>(engine()), -64);
      (d < dim ? a[j][d] : b[j][d - dim]) = u;
    }
  }

  std::vector<double> fa(base_samples);
  std::vector<double> fb(base_samples);
  std::vector<std::vector<double>> fab(k, std::vector<double>(base_samples));
  for (std::size_t j = 0; j < base_samples; ++j) {
    fa[j] = problem.model(a[j]);
    fb[j] = problem.model(b[j]);
    for (std::size_t f = 0; f < k; ++f) {
      auto mixed = a[j];
      std::copy(b[j].begin() + static_cast<std::ptrdiff_t>(offsets[f]),
                b[j].begin() + static_cast<std::ptrdiff_t>(offsets[f + 1]),
                mixed.begin() + static_cast<std::ptrdiff_t>(offsets[f]));
      fab[f][j] = problem.model(mixed);
    }
  }

  std::vector<std::size_t> all(base_samples);
  std::iota(all.begin(), all.end(), 0);
  const auto point = jansen(fa, fb, fab, all);

  std::mt19937_64 rng(iteration_seed(seed, 0xb007));
  std::uniform_int_distribution<std::size_t> pick(0, base_samples - 1);
  std::vector<std::vector<double>> boot_first(k);
  std::vector<std::vector<double>> boot_total(k);
  std::vector<std::size_t> rows(base_samples);
  for (std::size_t r = 0; r < bootstrap_resamples; ++r) {
    for (auto& row : rows) {
      row = pick(rng);
    }
    const auto est = jansen(fa, fb, fab, rows);
    for (std::size_t f = 0; f < k; ++f) {
      boot_first[f].push_back(est.first[f]);
      boot_total[f].push_back(est.total[f]);
    }
  }

  SobolResult result;
  result.sample_size = base_samples;
  {
    double mean = 0.0;
    for (std::size_t j = 0; j < base_samples; ++j) {
      mean += fa[j] + fb[j];
    }
    mean /= 2.0 * static_cast<double>(base_samples);
    double var = 0.0;
    for (std::size_t j = 0; j < base_samples; ++j) {
      var += (fa[j] - mean) * (fa[j] - mean) + (fb[j] - mean) * (fb[j] - mean);
    }
    result.output_variance = var / (2.0 * static_cast<double>(base_samples));
  }
  for (std::size_t f = 0; f < k; ++f) {
    SobolIndex idx;
    idx.parameter = problem.factor_names[f];
    idx.first_order_raw = point.first[f];
    idx.total_order_raw = point.total[f];
    idx.first_order = std::clamp(point.first[f], kSobolLowerBound, kSobolUpperBound);
    idx.total_order = std::clamp(point.total[f], kSobolLowerBound, kSobolUpperBound);
    idx.flagged_noise = idx.first_order != point.first[f] || idx.total_order != point.total[f];
    idx.first_order_noise = standard_deviation(boot_first[f]);
    idx.total_order_noise = standard_deviation(boot_total[f]);
    result.indices.push_back(std::move(idx));
  }
  return result;
}

SobolResult sobol_indices(const ModelSpec& spec, std::size_t base_samples, double wtp, const Perspective& perspective,
                          std::size_t bootstrap_resamples) {
  if (base_samples < 64) {
    throw std::invalid_argument("sobol_indices: base_samples must be >= 64");
  }
  if (spec.psa.distributions.empty()) {
    throw std::invalid_argument("sobol_indices: the model has no parameter distributions");
  }
  SobolProblem problem;
  for (const auto& d : spec.psa.distributions) {
    problem.factor_names.push_back(d.target);
  }
  problem.factor_dimensions = uniform_counts(spec);
  problem.model = [&](std::span<const double> u) {
    ModelSpec sampled = spec;
    apply_unit_draw(spec, sampled, u);
    const double value = incremental_nmb(sampled, wtp, perspective);
    if (!std::isfinite(value)) {
      std::string where;
      for (double x : u) {
        where += (where.empty() ? "" : ", ") + std::to_string(x);
      }
      throw std::runtime_error("sobol_indices: non-finite model output at unit point [" + where + "]");
    }
    return value;
  };
  return sobol_analysis(problem, base_samples, bootstrap_resamples, spec.psa.seed);
}

}  // namespace vop
