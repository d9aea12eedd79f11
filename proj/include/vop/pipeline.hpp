#pragma once

// Five-stage analysis pipeline: Ingestion, Simulation, Aggregation,
// Analysis, Reporting. Produces results.json, CSV sidecars and report.md.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vop/config.hpp"

namespace vop {

using ResultsBundle = nlohmann::ordered_json;

inline constexpr int kResultsSchemaVersion = 1;

enum class PerspectiveSelection { health_system, societal, both };
enum class OutputFormat { json, csv, all };

struct PipelineOptions {
  std::filesystem::path output_dir = "results";
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<double> wtp;
  std::optional<double> epsilon;
  PerspectiveSelection perspectives = PerspectiveSelection::both;
  OutputFormat format = OutputFormat::all;
  unsigned threads = 0;
  // ISO-8601 UTC; the current time when empty.
  std::string generated_at;
};

class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Willingness-to-pay grid used for the CEAC: 0 to 150,000 in steps of
// 5,000, with `wtp` inserted when it is not already a grid point.
std::vector<double> ceac_grid(double wtp);

/// Applies CLI overrides and re-validates. Throws ValidationError.
ModelSpec apply_overrides(ModelSpec spec, const PipelineOptions& options);

/// Runs every stage and writes the outputs into options.output_dir. On
/// failure nothing final is written; partial outputs are moved to
/// <output_dir>/quarantine and PipelineError names the failing stage.
ResultsBundle run_analysis_pipeline(const ModelSpec& spec, const PipelineOptions& options);

}  // namespace vop
