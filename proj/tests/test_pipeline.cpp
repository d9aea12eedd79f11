#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "support.hpp"
#include "vop/cea.hpp"
#include "vop/csv.hpp"
#include "vop/pipeline.hpp"
#include "vop/report.hpp"

using namespace vop;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

constexpr const char* kStamp = "2026-01-01T00:00:00Z";

ModelSpec quick_demo() {
  auto spec = test::demo_spec();
  spec.sensitivity.sobol_samples = 256;
  return spec;
}

PipelineOptions options_in(const fs::path& dir, std::size_t iterations = 200) {
  PipelineOptions o;
  o.output_dir = dir;
  o.iterations = iterations;
  o.generated_at = kStamp;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[e.path().filename().string()] = slurp(e.path());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("demo run reports discordant decisions") {
  test::TempDir tmp;
  const auto r = run_analysis_pipeline(quick_demo(), options_in(tmp.path()));
  const auto& det = r.at("deterministic");
  CHECK(det.at("perspectives").at("health_system").at("decision").at("intervention_decision") == "Reject");
  CHECK(det.at("perspectives").at("societal").at("decision").at("intervention_decision") == "Accept");
  CHECK(det.at("discordant") == true);
  CHECK(det.at("value_of_perspective").get<double>() > 0.0);
  CHECK(r.at("voi").at("evop").at("evop").get<double>() > 0.0);
  CHECK(r.at("voi").at("evop").at("discordance_probability").get<double>() > 0.5);
  CHECK(r.at("manifest").at("generated_at") == kStamp);
  CHECK(r.at("schema_version") == kResultsSchemaVersion);

  for (const char* name : {"results.json", "voi.json", "psa_samples.csv", "report.md", "ceac.csv", "equity_plane.csv",
                           "tornado.csv", "sobol.csv", "bia.csv", "coi.csv", "trace_StandardCare.csv",
                           "trace_Intervention.csv"}) {
    CHECK(fs::exists(tmp.path() / name));
  }
  CHECK_FALSE(fs::exists(tmp.path() / ".staging"));
  CHECK(nlohmann::ordered_json::parse(slurp(tmp.path() / "results.json")) == r);

  const auto report = slurp(tmp.path() / "report.md");
  const std::string vop = format_currency(det.at("value_of_perspective").get<double>());
  CHECK(report.find("| Intervention | Reject | Accept | " + vop + " |") != std::string::npos);
  CHECK(report.find("*Decisions based on a WTP threshold of $20,000/QALY.*") != std::string::npos);
}

TEST_CASE("decisions agree at a higher threshold") {
  test::TempDir tmp;
  auto o = options_in(tmp.path());
  o.wtp = 50000.0;
  const auto r = run_analysis_pipeline(quick_demo(), o);
  const auto& det = r.at("deterministic");
  CHECK(det.at("discordant") == false);
  CHECK(det.at("value_of_perspective").get<double>() == 0.0);
  CHECK(r.at("manifest").at("wtp").get<double>() == 50000.0);
  const auto report = slurp(tmp.path() / "report.md");
  CHECK(report.find("| Intervention | Accept | Accept | $0 |") != std::string::npos);
}

TEST_CASE("identical inputs give byte-identical outputs") {
  test::TempDir a, b, c;
  auto oa = options_in(a.path());
  auto ob = options_in(b.path());
  ob.threads = 3;
  run_analysis_pipeline(quick_demo(), oa);
  run_analysis_pipeline(quick_demo(), ob);
  const auto left = directory_contents(a.path());
  const auto right = directory_contents(b.path());
  REQUIRE(left.size() == right.size());
  for (const auto& [name, content] : left) {
    INFO(name);
    CHECK(right.at(name) == content);
  }

  auto oc = options_in(c.path());
  oc.generated_at.clear();
  run_analysis_pipeline(quick_demo(), oc);
  auto x = nlohmann::ordered_json::parse(left.at("results.json"));
  auto y = nlohmann::ordered_json::parse(slurp(c.path() / "results.json"));
  CHECK(y.at("manifest").at("generated_at") != kStamp);
  x["manifest"].erase("generated_at");
  y["manifest"].erase("generated_at");
  CHECK(x == y);
  CHECK(slurp(c.path() / "psa_samples.csv") == left.at("psa_samples.csv"));
}

TEST_CASE("a different seed changes the samples") {
  test::TempDir a, b;
  auto ob = options_in(b.path());
  ob.seed = 7;
  run_analysis_pipeline(quick_demo(), options_in(a.path()));
  const auto r = run_analysis_pipeline(quick_demo(), ob);
  CHECK(r.at("manifest").at("master_seed") == 7);
  CHECK(slurp(a.path() / "psa_samples.csv") != slurp(b.path() / "psa_samples.csv"));
}

TEST_CASE("invalid overrides fail at ingestion without writing anything") {
  test::TempDir tmp;
  const auto out = tmp.path() / "out";
  auto o = options_in(out);
  o.iterations = 0;
  try {
    run_analysis_pipeline(quick_demo(), o);
    FAIL("expected a pipeline error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "Ingestion");
    CHECK(std::string(e.what()).find("psa.iterations") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(out / "results.json"));
  CHECK_FALSE(fs::exists(out / "quarantine"));

  auto bad = quick_demo();
  bad.strategies[0].transition_matrix[0] = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(run_analysis_pipeline(bad, options_in(out)), PipelineError);
  CHECK_FALSE(fs::exists(out / "results.json"));
}

TEST_CASE("an analysis failure quarantines the simulation outputs") {
  // The intervention kills most of the cohort, so post-intervention health
  // in the worse-off subgroup drops below zero and the equity index fails.
  auto spec = quick_demo();
  spec.strategies[1].transition_matrix[0] = {0.3, 0.05, 0.65};
  spec.psa.distributions.pop_back();
  test::TempDir tmp;
  try {
    run_analysis_pipeline(spec, options_in(tmp.path(), 50));
    FAIL("expected a pipeline error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "Analysis");
    CHECK(std::string(e.what()).rfind("Analysis stage failed", 0) == 0);
  }
  CHECK_FALSE(fs::exists(tmp.path() / "results.json"));
  CHECK_FALSE(fs::exists(tmp.path() / "report.md"));
  CHECK_FALSE(fs::exists(tmp.path() / ".staging"));
  CHECK(fs::exists(tmp.path() / "quarantine" / "psa_samples.csv"));
  CHECK_FALSE(fs::exists(tmp.path() / "quarantine" / "results.json"));

  // A later successful run clears the quarantine.
  run_analysis_pipeline(quick_demo(), options_in(tmp.path(), 50));
  CHECK(fs::exists(tmp.path() / "results.json"));
  CHECK_FALSE(fs::exists(tmp.path() / "quarantine"));
}

TEST_CASE("psa_samples.csv alone reproduces the CEAC and decisions") {
  test::TempDir tmp;
  const auto r = run_analysis_pipeline(quick_demo(), options_in(tmp.path(), 300));
  std::ifstream in(tmp.path() / "psa_samples.csv");
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    REQUIRE(it != header.end());
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::vector<std::string> strategies{"StandardCare", "Intervention"};
  const std::vector<std::pair<std::string, double>> groups{{"General", 0.7}, {"Deprived", 0.3}};
  // [iteration][strategy] = {qalys, direct, other}
  std::vector<std::array<std::array<double, 3>, 2>> rows;
  while (std::getline(in, line)) {
    const auto f = split_csv_line(line);
    std::array<std::array<double, 3>, 2> row{};
    for (std::size_t s = 0; s < 2; ++s) {
      for (const auto& [g, share] : groups) {
        const std::string p = strategies[s] + ":" + g + ":";
        row[s][0] += share * parse_double(f[col(p + "qalys")]);
        row[s][1] += share * parse_double(f[col(p + "cost_direct")]);
        row[s][2] += share * (parse_double(f[col(p + "cost_prod")]) + parse_double(f[col(p + "cost_oop")]));
      }
    }
    rows.push_back(row);
  }
  REQUIRE(rows.size() == 300);

  const auto& ceac = r.at("psa").at("ceac");
  const auto grid = ceac.at("wtp").get<std::vector<double>>();
  CHECK(grid.size() == 31);
  for (const char* perspective : {"health_system", "societal"}) {
    const bool societal = std::string(perspective) == "societal";
    const auto reported = ceac.at(perspective).at("Intervention").get<std::vector<double>>();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      int wins = 0;
      for (const auto& row : rows) {
        double nmb[2];
        for (std::size_t s = 0; s < 2; ++s) {
          nmb[s] = row[s][0] * grid[k] - row[s][1] - (societal ? row[s][2] : 0.0);
        }
        wins += nmb[1] - nmb[0] > 1e-9;
      }
      CHECK(reported[k] == Approx(wins / 300.0).margin(1e-12));
    }
  }
}

TEST_CASE("output format and perspective selection") {
  test::TempDir a, b;
  auto json_only = options_in(a.path());
  json_only.format = OutputFormat::json;
  json_only.perspectives = PerspectiveSelection::health_system;
  const auto r = run_analysis_pipeline(quick_demo(), json_only);
  CHECK(fs::exists(a.path() / "results.json"));
  CHECK(fs::exists(a.path() / "voi.json"));
  CHECK(fs::exists(a.path() / "psa_samples.csv"));
  CHECK(fs::exists(a.path() / "report.md"));
  CHECK_FALSE(fs::exists(a.path() / "ceac.csv"));
  CHECK(r.at("manifest").at("perspectives") == nlohmann::ordered_json::array({"health_system"}));
  CHECK_FALSE(r.at("psa").at("ceac").contains("societal"));
  CHECK(r.at("sensitivity").at("perspective") == "health_system");

  auto csv_only = options_in(b.path());
  csv_only.format = OutputFormat::csv;
  run_analysis_pipeline(quick_demo(), csv_only);
  CHECK_FALSE(fs::exists(b.path() / "results.json"));
  CHECK(fs::exists(b.path() / "ceac.csv"));
  CHECK(fs::exists(b.path() / "trace_Intervention.csv"));
  CHECK(fs::exists(b.path() / "report.md"));
}

TEST_CASE("CEAC grid") {
  const auto grid = ceac_grid(20000.0);
  CHECK(grid.size() == 31);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 150000.0);
  const auto extra = ceac_grid(12345.0);
  CHECK(extra.size() == 32);
  CHECK(std::is_sorted(extra.begin(), extra.end()));
  CHECK(std::find(extra.begin(), extra.end(), 12345.0) != extra.end());
}

TEST_CASE("currency formatting") {
  CHECK(format_currency(4500.0) == "$4,500");
  CHECK(format_currency(-7787.4) == "-$7,787");
  CHECK(format_currency(0.0) == "$0");
  CHECK(format_currency(-0.3) == "$0");
  CHECK(format_currency(1234567.5) == "$1,234,568");
  CHECK(format_currency(999.0) == "$999");
}

TEST_CASE("report omits budget impact without a bia section") {
  auto spec = quick_demo();
  spec.bia.reset();
  test::TempDir tmp;
  const auto r = run_analysis_pipeline(spec, options_in(tmp.path(), 50));
  CHECK(r.at("bia").is_null());
  const auto report = render_report(r);
  CHECK(report.find("## Budget impact") == std::string::npos);
  CHECK(report.find("## Cost of illness") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp.path() / "bia.csv"));
}

TEST_CASE("demo report matches the stored reference") {
  test::TempDir tmp;
  run_analysis_pipeline(quick_demo(), options_in(tmp.path()));
  const auto actual = slurp(tmp.path() / "report.md");
  const fs::path golden = fs::path(VOP_TEST_DATA) / "demo_report.md";
  if (std::getenv("VOP_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << actual;
  }
  REQUIRE(fs::exists(golden));
  CHECK(actual == slurp(golden));
}
