#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

#include "vop/config.hpp"
#include "vop/demo_configs.hpp"
#include "vop/pipeline.hpp"

namespace vop {

namespace fs = std::filesystem;

namespace {

const char* const kProjectReadme = R"(# Value of Perspective project

`config.yaml` is the commented reference model; edit it to describe your own
states, strategies and subgroups. `demo_discordance.yaml` is a small model in
which the health-system and societal perspectives reach different decisions
at a willingness to pay of $20,000/QALY.

    vop run --config config.yaml --output-dir results
    vop run --config demo_discordance.yaml --output-dir demo --wtp 50000
)";

int init_project(const fs::path& dir, std::ostream& out, std::ostream& err) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) {
      err << "error: " << dir.string() << " exists and is not a directory\n";
      return 1;
    }
    if (!fs::is_empty(dir, ec)) {
      err << "error: refusing to initialise non-empty directory " << dir.string() << "\n";
      return 1;
    }
  }
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create " << dir.string() << ": " << ec.message() << "\n";
    return 1;
  }
  const std::pair<const char*, std::string_view> files[] = {
      {"config.yaml", reference_config_yaml()},
      {"demo_discordance.yaml", demo_discordance_yaml()},
      {"README.md", kProjectReadme},
  };
  for (const auto& [name, content] : files) {
    std::ofstream file(dir / name, std::ios::binary);
    file << content;
    if (!file) {
      err << "error: cannot write " << (dir / name).string() << "\n";
      return 1;
    }
  }
  out << "initialised " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-perspective health-economic decision engine", "vop"};
  app.set_version_flag("--version", std::string(VOP_VERSION));
  app.require_subcommand(1);

  std::string init_dir;
  auto* init = app.add_subcommand("init", "Create a project with a reference and a demo config");
  init->add_option("dir", init_dir, "Project directory (absent or empty)")->required();

  std::string config_path = "config.yaml";
  std::string perspective = "both";
  std::string format = "all";
  PipelineOptions options;
  std::string output_dir = "results";
  auto* run = app.add_subcommand("run", "Run the full analysis pipeline");
  run->add_option("--config", config_path, "Model config (YAML)")->capture_default_str();
  run->add_option("--output-dir", output_dir, "Directory for result files")->capture_default_str();
  run->add_option("--iterations", options.iterations, "PSA iterations")->check(CLI::PositiveNumber);
  run->add_option("--seed", options.seed, "PSA master seed");
  run->add_option("--wtp", options.wtp, "Willingness to pay per QALY")->check(CLI::NonNegativeNumber);
  run->add_option("--epsilon", options.epsilon, "Inequality aversion")->check(CLI::NonNegativeNumber);
  run->add_option("--perspective", perspective, "Perspectives for PSA summaries")
      ->check(CLI::IsMember({"hs", "health_system", "societal", "both"}))
      ->capture_default_str();
  run->add_option("--format", format, "Outputs to write")
      ->check(CLI::IsMember({"json", "csv", "all"}))
      ->capture_default_str();
  run->add_option("--threads", options.threads, "Worker threads (0: hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(VOP_VERSION) + "\n" : app.help());
      return 0;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (init->parsed()) {
    return init_project(init_dir, out, err);
  }

  options.output_dir = output_dir;
  options.perspectives = perspective == "both"       ? PerspectiveSelection::both
                         : perspective == "societal" ? PerspectiveSelection::societal
                                                     : PerspectiveSelection::health_system;
  options.format = format == "json" ? OutputFormat::json : format == "csv" ? OutputFormat::csv : OutputFormat::all;

  ModelSpec spec;
  try {
    std::vector<Diagnostic> warnings;
    spec = load_model_spec(config_path, &warnings);
    for (const auto& w : warnings) {
      err << w.to_string() << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const auto results = run_analysis_pipeline(spec, options);
    const auto& hs = results["deterministic"]["perspectives"]["health_system"]["decision"];
    const auto& soc = results["deterministic"]["perspectives"]["societal"]["decision"];
    out << "health_system: " << hs["chosen_strategy"].get<std::string>() << ", societal: "
        << soc["chosen_strategy"].get<std::string>() << "\n";
    out << "results written to " << options.output_dir.string() << "\n";
  } catch (const PipelineError& e) {
    err << "error: " << e.what() << "\n";
    if (e.stage() != "Ingestion") {
      err << "partial outputs kept in " << (options.output_dir / "quarantine").string() << "\n";
    }
    return e.stage() == "Ingestion" ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace vop
