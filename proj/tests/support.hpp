#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "vop/config.hpp"
#include "vop/demo_configs.hpp"
#include "vop/psa.hpp"

namespace vop::test {

inline ModelSpec demo_spec() { return parse_model_spec(demo_discordance_yaml(), "demo_discordance.yaml"); }

inline ModelSpec reference_spec() { return parse_model_spec(reference_config_yaml(), "reference.yaml"); }

// Replaces the first occurrence; the test fails loudly if `from` is absent.
inline std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos == std::string::npos) {
    throw std::logic_error("replace_once: '" + from + "' not found");
  }
  return text.replace(pos, from.size(), to);
}

// One state that never leaves itself; comparator and a copy.
inline ModelSpec single_state_spec(double cost, double utility, double rate, int horizon) {
  ModelSpec spec;
  HealthState s;
  s.name = "Only";
  s.utility = utility;
  s.cost_direct_medical = cost;
  spec.states = {s};
  Strategy a;
  a.name = "A";
  a.is_comparator = true;
  a.transition_matrix = {{1.0}};
  Strategy b = a;
  b.name = "B";
  b.is_comparator = false;
  spec.strategies = {a, b};
  spec.subgroups = {Subgroup{"total_population", 1.0, 1.0, {}}};
  spec.initial_distribution = {1.0};
  spec.horizon_cycles = horizon;
  spec.discount_rate_costs = rate;
  spec.discount_rate_effects = rate;
  spec.psa.iterations = 1;
  return spec;
}

// Bundle with one subgroup whose health-system NMB at any λ is nmb[i][s]
// (no QALYs, direct cost = -NMB). Strategy 0 is the comparator.
inline PsaBundle nmb_bundle(const std::vector<std::vector<double>>& nmb) {
  PsaBundle b;
  b.iterations = nmb.size();
  for (std::size_t s = 0; s < nmb.front().size(); ++s) {
    b.layout.strategy_names.push_back("S" + std::to_string(s));
  }
  b.layout.comparator = 0;
  b.layout.subgroup_names = {"total_population"};
  b.layout.subgroup_shares = {1.0};
  b.layout.subgroup_baselines = {1.0};
  b.sampled = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nmb.size()), 0);
  for (const auto& row : nmb) {
    for (double v : row) {
      b.outcomes.push_back(OutcomeTotals{-v, 0.0, 0.0, 0.0});
    }
  }
  return b;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("vop_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace vop::test
