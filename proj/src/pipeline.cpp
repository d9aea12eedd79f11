#include "vop/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "vop/bia.hpp"
#include "vop/cea.hpp"
#include "vop/csv.hpp"
#include "vop/dcea.hpp"
#include "vop/markov.hpp"
#include "vop/parameters.hpp"
#include "vop/psa.hpp"
#include "vop/report.hpp"
#include "vop/sensitivity.hpp"
#include "vop/voi.hpp"

namespace vop {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

PipelineError::PipelineError(std::string stage, const std::string& message)
    : std::runtime_error(stage + " stage failed: " + message), stage_(std::move(stage)) {}

namespace {

const std::vector<double> kEpsilonGrid{0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0};

// Files are written under <out>/.staging and moved into place only when every
// stage has succeeded.
class Staging {
 public:
  explicit Staging(fs::path out) : out_(std::move(out)), dir_(out_ / ".staging") {
    fs::create_directories(out_);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream file(dir_ / name, std::ios::binary);
    file << content;
    if (!file) {
      throw std::runtime_error("cannot write " + (dir_ / name).string());
    }
    names_.push_back(name);
  }

  void commit() {
    for (const auto& name : names_) {
      fs::remove(out_ / name);
      fs::rename(dir_ / name, out_ / name);
    }
    fs::remove_all(dir_);
    fs::remove_all(out_ / "quarantine");
  }

  void quarantine() noexcept {
    std::error_code ec;
    fs::remove_all(out_ / "quarantine", ec);
    fs::rename(dir_, out_ / "quarantine", ec);
  }

 private:
  fs::path out_;
  fs::path dir_;
  std::vector<std::string> names_;
};

template <typename F>
auto run_stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

json totals_json(const OutcomeTotals& t) {
  return json{{"direct_medical", t.direct_medical},
              {"productivity", t.productivity},
              {"out_of_pocket", t.out_of_pocket},
              {"societal", t.societal_cost()},
              {"qalys", t.qalys}};
}

json icer_json(const std::string& strategy, const IcerResult& r) {
  json j{{"strategy", strategy},
         {"delta_cost", r.delta_cost},
         {"delta_effect", r.delta_effect},
         {"classification", std::string(to_string(r.classification))}};
  j["icer"] = r.icer_value ? json(*r.icer_value) : json(nullptr);
  return j;
}

json decision_json(const DecisionRecord& d, std::size_t comparator) {
  json nmbs = json::object();
  for (const auto& [name, value] : d.nmb_per_strategy) {
    nmbs[name] = value;
  }
  json j{{"wtp", d.wtp},
         {"perspective", std::string(to_string(d.perspective))},
         {"chosen_strategy", d.chosen_strategy},
         {"intervention_decision", d.chosen_index == comparator ? "Reject" : "Accept"},
         {"nmb_per_strategy", nmbs}};
  j["discordant_with"] = d.discordant_with ? json(std::string(to_string(*d.discordant_with))) : json(nullptr);
  return j;
}

std::vector<Perspective> selected_perspectives(PerspectiveSelection selection) {
  switch (selection) {
    case PerspectiveSelection::health_system:
      return {Perspective::health_system()};
    case PerspectiveSelection::societal:
      return {Perspective::societal()};
    case PerspectiveSelection::both:
      break;
  }
  return {Perspective::health_system(), Perspective::societal()};
}

std::string csv_text(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) {
    write_csv_row(out, row);
  }
  return out.str();
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) {
    sum += x;
  }
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double m = mean_of(v);
  double sum = 0.0;
  for (double x : v) {
    sum += (x - m) * (x - m);
  }
  return std::sqrt(sum / static_cast<double>(v.size() - 1));
}

json ce_plane_json(const CePlane& plane) {
  std::vector<double> de;
  std::vector<double> dc;
  std::vector<double> delta;
  std::size_t ne = 0, nw = 0, se = 0, sw = 0;
  for (std::size_t i = 0; i < plane.points.size(); ++i) {
    const auto& p = plane.points[i];
    de.push_back(p.delta_effect);
    dc.push_back(p.delta_cost);
    delta.push_back(plane.perspective_delta[i].delta_cost);
    if (p.delta_effect >= 0.0) {
      ++(p.delta_cost >= 0.0 ? ne : se);
    } else {
      ++(p.delta_cost >= 0.0 ? nw : sw);
    }
  }
  const auto n = static_cast<double>(std::max<std::size_t>(plane.points.size(), 1));
  return json{{"mean_delta_effect", mean_of(de)},
              {"mean_delta_cost", mean_of(dc)},
              {"sd_delta_effect", sd_of(de)},
              {"sd_delta_cost", sd_of(dc)},
              {"quadrant_share",
               {{"north_east", ne / n}, {"north_west", nw / n}, {"south_east", se / n}, {"south_west", sw / n}}},
              {"mean_societal_minus_health_system_delta_cost", mean_of(delta)}};
}

struct Deterministic {
  ModelEvaluation eval;
  std::vector<Eigen::MatrixXd> population_traces;
};

}  // namespace

std::vector<double> ceac_grid(double wtp) {
  std::vector<double> grid;
  for (int k = 0; k <= 30; ++k) {
    grid.push_back(5000.0 * k);
  }
  if (std::find(grid.begin(), grid.end(), wtp) == grid.end()) {
    grid.insert(std::upper_bound(grid.begin(), grid.end(), wtp), wtp);
  }
  return grid;
}

ModelSpec apply_overrides(ModelSpec spec, const PipelineOptions& options) {
  if (options.iterations) {
    spec.psa.iterations = *options.iterations;
  }
  if (options.seed) {
    spec.psa.seed = *options.seed;
  }
  if (options.wtp) {
    spec.wtp_threshold = *options.wtp;
  }
  if (options.epsilon) {
    spec.inequality_aversion = *options.epsilon;
  }
  auto diagnostics = validate_model_spec(spec);
  std::erase_if(diagnostics, [](const Diagnostic& d) { return d.severity != Severity::error; });
  if (!diagnostics.empty()) {
    throw ValidationError("command-line overrides", std::move(diagnostics));
  }
  return spec;
}

ResultsBundle run_analysis_pipeline(const ModelSpec& input, const PipelineOptions& options) {
  // Ingestion
  const ModelSpec spec = run_stage("Ingestion", [&] { return apply_overrides(input, options); });
  const std::string digest = spec_digest(spec);
  const double wtp = spec.wtp_threshold;
  const double epsilon = spec.inequality_aversion;
  const auto perspectives = selected_perspectives(options.perspectives);
  const Perspective primary = perspectives.back();
  const bool want_csv = options.format != OutputFormat::json;
  const bool want_json = options.format != OutputFormat::csv;

  Staging staging(options.output_dir);
  try {
    // Simulation
    Deterministic det;
    PsaBundle bundle;
    run_stage("Simulation", [&] {
      det.eval = evaluate_model(spec);
      std::vector<ModelSpec> views;
      for (const auto& g : spec.subgroups) {
        views.push_back(resolve_subgroup_spec(spec, g));
      }
      for (std::size_t s = 0; s < spec.strategies.size(); ++s) {
        Eigen::MatrixXd occupancy;
        for (std::size_t g = 0; g < views.size(); ++g) {
          const auto run = run_strategy(views[g], s);
          const Eigen::MatrixXd weighted = run.trace.occupancy * spec.subgroups[g].population_share;
          occupancy = g == 0 ? weighted : Eigen::MatrixXd(occupancy + weighted);
        }
        det.population_traces.push_back(std::move(occupancy));
      }
      bundle = run_psa(spec, PsaOptions{options.threads, false});

      std::ostringstream samples;
      write_psa_samples_csv(samples, bundle);
      staging.write("psa_samples.csv", samples.str());
      if (want_csv) {
        for (std::size_t s = 0; s < spec.strategies.size(); ++s) {
          CohortTrace trace;
          for (const auto& st : spec.states) {
            trace.state_names.push_back(st.name);
          }
          trace.occupancy = det.population_traces[s];
          std::ostringstream out;
          write_trace_csv(out, trace);
          staging.write("trace_" + spec.strategies[s].name + ".csv", out.str());
        }
      }
      return 0;
    });

    const auto comparator = spec.comparator_index();
    const auto layout = bundle.layout;
    const auto candidate = layout.candidate();
    std::vector<NamedOutcome> outcomes;
    for (std::size_t s = 0; s < spec.strategies.size(); ++s) {
      outcomes.push_back(NamedOutcome{spec.strategies[s].name, det.eval.population[s].discounted});
    }

    // Aggregation
    json psa_json;
    std::vector<std::vector<std::string>> ceac_rows;
    run_stage("Aggregation", [&] {
      const auto grid = ceac_grid(wtp);
      psa_json["iterations"] = bundle.iterations;
      psa_json["samples_csv"] = "psa_samples.csv";
      psa_json["parameters"] = bundle.parameter_names;
      json ceac_json{{"wtp", grid}};
      std::vector<std::string> header{"perspective", "wtp"};
      header.insert(header.end(), layout.strategy_names.begin(), layout.strategy_names.end());
      ceac_rows.push_back(header);
      json plane_json = json::object();
      for (const auto& p : perspectives) {
        const auto table = ceac(bundle, p, grid);
        json by_strategy = json::object();
        for (std::size_t s = 0; s < layout.strategies(); ++s) {
          std::vector<double> column;
          for (const auto& row : table.probability) {
            column.push_back(row[s]);
          }
          by_strategy[layout.strategy_names[s]] = column;
        }
        ceac_json[std::string(p.name())] = by_strategy;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          std::vector<std::string> row{std::string(p.name()), format_double(grid[k])};
          for (double prob : table.probability[k]) {
            row.push_back(format_double(prob));
          }
          ceac_rows.push_back(row);
        }
        plane_json[std::string(p.name())] = ce_plane_json(ce_plane_points(bundle, p));
      }
      psa_json["ceac"] = ceac_json;
      psa_json["ce_plane"] = plane_json;
      const auto delta = delta_nmb_distribution(bundle, wtp);
      json q = json::object();
      const char* labels[] = {"p2.5", "p25", "p50", "p75", "p97.5"};
      for (std::size_t k = 0; k < delta.quantiles.size(); ++k) {
        q[labels[k]] = delta.quantiles[k];
      }
      psa_json["delta_nmb_societal_minus_health_system"] = json{{"mean", delta.mean}, {"quantiles", q}};
      return 0;
    });

    // Analysis
    json deterministic, dcea_json, voi_json, sensitivity_json, bia_json, coi_json;
    std::vector<EquityPlanePoint> plane;
    std::vector<TornadoEntry> tornado_entries;
    std::optional<SobolResult> sobol;
    std::optional<BudgetImpactResult> bia;
    CoiTable coi;
    run_stage("Analysis", [&] {
      // Deterministic CEA and value of perspective.
      json population = json::object();
      for (std::size_t s = 0; s < spec.strategies.size(); ++s) {
        const auto& ledger = det.eval.population[s];
        json by_group = json::object();
        for (std::size_t g = 0; g < spec.subgroups.size(); ++g) {
          by_group[spec.subgroups[g].name] = totals_json(det.eval.by_subgroup[s][g].discounted);
        }
        population[spec.strategies[s].name] = json{{"discounted", totals_json(ledger.discounted)},
                                                   {"undiscounted", totals_json(ledger.undiscounted)},
                                                   {"by_subgroup", by_group}};
      }
      auto hs = decide(outcomes, comparator, wtp, Perspective::health_system());
      auto soc = decide(outcomes, comparator, wtp, Perspective::societal());
      mark_discordance(hs, soc);
      const double l_d = deterministic_vop(outcomes, comparator, wtp);
      json per_perspective = json::object();
      for (const auto* record : {&hs, &soc}) {
        const auto p = Perspective::of(record->perspective);
        json icers = json::array();
        for (std::size_t s = 0; s < outcomes.size(); ++s) {
          if (s != comparator) {
            icers.push_back(icer_json(outcomes[s].name, icer(outcomes[comparator].totals, outcomes[s].totals, p)));
          }
        }
        per_perspective[std::string(p.name())] = json{{"icers", icers}, {"decision", decision_json(*record, comparator)}};
      }
      json interventions = json::array();
      for (std::size_t s = 0; s < outcomes.size(); ++s) {
        if (s == comparator) {
          continue;
        }
        const std::vector<NamedOutcome> pair{outcomes[comparator], outcomes[s]};
        json row{{"strategy", outcomes[s].name}};
        for (const auto& p : {Perspective::health_system(), Perspective::societal()}) {
          const auto d = decide(pair, 0, wtp, p);
          row[std::string(p.name())] = json{{"icer", icer_json(outcomes[s].name, icer(pair[0].totals, pair[1].totals, p))},
                                            {"decision", d.chosen_index == 1 ? "Accept" : "Reject"}};
        }
        row["value_of_perspective"] = deterministic_vop(pair, 0, wtp);
        interventions.push_back(row);
      }
      deterministic = json{{"outcomes", population},
                           {"interventions", interventions},
                           {"perspectives", per_perspective},
                           {"discordant", hs.chosen_index != soc.chosen_index},
                           {"value_of_perspective", l_d}};

      // Value of information and expected value of perspective.
      const double population_size = spec.voi.population_size.value_or(
          spec.bia ? spec.bia->eligible_population : 0.0);
      std::vector<std::pair<std::string, std::vector<std::string>>> groups = spec.voi.evppi_groups;
      if (groups.empty()) {
        for (const auto& d : spec.psa.distributions) {
          std::vector<std::string> cols;
          for (const auto& c : bundle.parameter_names) {
            if (c == d.target || c.rfind(d.target + ".", 0) == 0) {
              cols.push_back(c);
            }
          }
          groups.emplace_back(d.target, cols);
        }
      }
      json per_voi = json::object();
      for (const auto& p : perspectives) {
        const double per_person = evpi(bundle, wtp, p);
        json evppi_json = json::object();
        json evppi_errors = json::object();
        for (const auto& [name, cols] : groups) {
          try {
            evppi_json[name] = evppi(bundle, cols, wtp, p);
          } catch (const std::runtime_error& e) {
            evppi_json[name] = nullptr;
            evppi_errors[name] = e.what();
          }
        }
        json entry{{"evpi_per_person", per_person},
                   {"population_evpi", population_evpi(per_person, population_size)},
                   {"population_size", population_size},
                   {"evppi", evppi_json}};
        if (!evppi_errors.empty()) {
          entry["evppi_errors"] = evppi_errors;
        }
        per_voi[std::string(p.name())] = entry;
      }
      auto vop = evop(bundle, wtp, spec.voi.evop_mode, hs.chosen_index);
      vop.deterministic_loss = l_d;
      voi_json = json{{"perspectives", per_voi},
                      {"evop",
                       {{"mode", spec.voi.evop_mode == EvopMode::per_iteration ? "per-iteration" : "fixed-decision"},
                        {"evop", vop.evop},
                        {"deterministic_vop", vop.deterministic_loss},
                        {"discordance_probability", vop.discordance_probability}}}};

      // Distributional CEA.
      const auto weights = atkinson_weights(spec.subgroups, epsilon, spec.reference_health);
      json weight_json = json::object();
      for (std::size_t g = 0; g < weights.subgroups.size(); ++g) {
        weight_json[weights.subgroups[g]] = weights.weights[g];
      }
      std::vector<double> shares;
      for (const auto& g : spec.subgroups) {
        shares.push_back(g.population_share);
      }
      json nmb_eq = json::object();
      json unweighted = json::object();
      json grid_json = json::object();
      for (const auto& p : {Perspective::health_system(), Perspective::societal()}) {
        std::vector<OutcomeTotals> base, cand;
        for (std::size_t g = 0; g < spec.subgroups.size(); ++g) {
          base.push_back(det.eval.by_subgroup[comparator][g].discounted);
          cand.push_back(det.eval.by_subgroup[candidate][g].discounted);
        }
        const auto increments = subgroup_increments(layout.subgroup_names, shares, base, cand, p);
        nmb_eq[std::string(p.name())] = equity_weighted_nmb(increments, weights, wtp);
        unweighted[std::string(p.name())] = unweighted_nmb(increments, wtp);
        json grid = json::array();
        for (double e : kEpsilonGrid) {
          const auto w = atkinson_weights(spec.subgroups, e, spec.reference_health);
          grid.push_back(json{{"epsilon", e}, {"nmb_eq", equity_weighted_nmb(increments, w, wtp)}});
        }
        grid_json[std::string(p.name())] = grid;
      }
      dcea_json = json{{"epsilon", epsilon},
                       {"reference_health", weights.reference_health},
                       {"weights", weight_json},
                       {"nmb_eq", nmb_eq},
                       {"unweighted_nmb", unweighted},
                       {"epsilon_grid", grid_json}};
      if (spec.subgroups.size() >= 2 && wtp > 0.0) {
        plane = equity_plane(bundle, wtp, epsilon);
        std::vector<double> nhb, impact;
        std::size_t win_win = 0;
        for (const auto& pt : plane) {
          nhb.push_back(pt.net_health_benefit);
          impact.push_back(pt.equity_impact);
          win_win += pt.net_health_benefit > 0.0 && pt.equity_impact > 0.0;
        }
        dcea_json["equity_plane"] = json{{"perspective", "societal"},
                                         {"mean_net_health_benefit", mean_of(nhb)},
                                         {"mean_equity_impact", mean_of(impact)},
                                         {"share_north_east", static_cast<double>(win_win) / plane.size()},
                                         {"csv", "equity_plane.csv"}};
      } else {
        dcea_json["equity_plane"] = nullptr;
      }

      // Sensitivity.
      const auto ranges = spec.sensitivity.ranges.empty() ? default_tornado_ranges(spec) : spec.sensitivity.ranges;
      tornado_entries = tornado(spec, ranges, wtp, primary);
      json tornado_json = json::array();
      for (const auto& e : tornado_entries) {
        tornado_json.push_back(json{{"parameter", e.parameter},
                                    {"low", e.low_value},
                                    {"high", e.high_value},
                                    {"outcome_low", e.outcome_at_low},
                                    {"outcome_high", e.outcome_at_high},
                                    {"bar_width", e.bar_width()}});
      }
      sensitivity_json = json{{"perspective", std::string(primary.name())},
                              {"outcome", "incremental_nmb"},
                              {"tornado", tornado_json}};
      if (!spec.psa.distributions.empty()) {
        sobol = sobol_indices(spec, spec.sensitivity.sobol_samples, wtp, primary,
                              spec.sensitivity.bootstrap_resamples);
        json indices = json::array();
        for (const auto& idx : sobol->indices) {
          indices.push_back(json{{"parameter", idx.parameter},
                                 {"first_order", idx.first_order},
                                 {"total_order", idx.total_order},
                                 {"first_order_noise", idx.first_order_noise},
                                 {"total_order_noise", idx.total_order_noise},
                                 {"flagged_noise", idx.flagged_noise}});
        }
        sensitivity_json["sobol"] = json{{"sample_size", sobol->sample_size},
                                         {"output_variance", sobol->output_variance},
                                         {"indices", indices}};
      } else {
        sensitivity_json["sobol"] = nullptr;
      }

      // Budget impact and cost of illness.
      if (spec.bia) {
        bia = budget_impact(spec, *spec.bia, Perspective::of(spec.bia->perspective));
        json years = json::array();
        for (const auto& y : bia->years) {
          years.push_back(json{{"year", y.year},
                               {"incremental_cost_per_person", y.incremental_cost_per_person},
                               {"uptake", y.uptake},
                               {"population", y.population},
                               {"bi_year", y.bi_year},
                               {"bi_cumulative", y.bi_cumulative}});
        }
        bia_json = json{{"perspective", std::string(to_string(bia->perspective))},
                        {"discounting", spec.bia->discounting},
                        {"years", years},
                        {"cumulative", bia->cumulative}};
      }
      coi = cost_of_illness(spec);
      json rows = json::array();
      for (const auto& r : coi.rows) {
        rows.push_back(json{{"component", r.component},
                            {"per_capita_annual", r.per_capita_annual},
                            {"population_annual", r.population_annual},
                            {"cumulative", r.cumulative}});
      }
      coi_json = json{{"strategy", spec.strategies[comparator].name},
                      {"years", coi.years},
                      {"population", coi.population},
                      {"population_scaled", coi.population_scaled},
                      {"rows", rows}};
      return 0;
    });

    // Reporting
    ResultsBundle results;
    run_stage("Reporting", [&] {
      json model{{"states", json::array()}, {"strategies", json::array()}, {"subgroups", json::array()}};
      for (const auto& s : spec.states) {
        model["states"].push_back(s.name);
      }
      for (const auto& s : spec.strategies) {
        model["strategies"].push_back(json{{"name", s.name}, {"comparator", s.is_comparator}});
      }
      for (const auto& g : spec.subgroups) {
        model["subgroups"].push_back(
            json{{"name", g.name}, {"population_share", g.population_share}, {"baseline_health", g.baseline_health}});
      }
      model["horizon_cycles"] = spec.horizon_cycles;
      model["cycle_length_years"] = spec.cycle_length_years;
      model["discount"] = json{{"costs", spec.discount_rate_costs}, {"effects", spec.discount_rate_effects}};
      model["half_cycle"] = spec.half_cycle;

      results["schema_version"] = kResultsSchemaVersion;
      results["manifest"] = json{{"tool", "vop"},
                                 {"version", VOP_VERSION},
                                 {"spec_digest", digest},
                                 {"master_seed", spec.psa.seed},
                                 {"generated_at", options.generated_at.empty() ? utc_now() : options.generated_at},
                                 {"wtp", wtp},
                                 {"epsilon", epsilon},
                                 {"iterations", spec.psa.iterations},
                                 {"perspectives", json::array()}};
      for (const auto& p : perspectives) {
        results["manifest"]["perspectives"].push_back(std::string(p.name()));
      }
      results["model"] = model;
      results["deterministic"] = deterministic;
      results["psa"] = psa_json;
      results["dcea"] = dcea_json;
      results["voi"] = voi_json;
      results["sensitivity"] = sensitivity_json;
      results["bia"] = spec.bia ? bia_json : json(nullptr);
      results["coi"] = coi_json;

      if (want_json) {
        staging.write("results.json", results.dump(2) + "\n");
        json voi_file = voi_json;
        voi_file["spec_digest"] = digest;
        staging.write("voi.json", voi_file.dump(2) + "\n");
      }
      if (want_csv) {
        staging.write("ceac.csv", csv_text(ceac_rows));
        std::vector<std::vector<std::string>> rows{{"iteration", "net_health_benefit", "equity_impact"}};
        for (std::size_t i = 0; i < plane.size(); ++i) {
          rows.push_back({std::to_string(i), format_double(plane[i].net_health_benefit),
                          format_double(plane[i].equity_impact)});
        }
        staging.write("equity_plane.csv", csv_text(rows));
        rows = {{"parameter", "low", "high", "outcome_low", "outcome_high"}};
        for (const auto& e : tornado_entries) {
          rows.push_back({e.parameter, format_double(e.low_value), format_double(e.high_value),
                          format_double(e.outcome_at_low), format_double(e.outcome_at_high)});
        }
        staging.write("tornado.csv", csv_text(rows));
        rows = {{"parameter", "first_order", "total_order", "noise"}};
        if (sobol) {
          for (const auto& idx : sobol->indices) {
            rows.push_back({idx.parameter, format_double(idx.first_order), format_double(idx.total_order),
                            format_double(std::max(idx.first_order_noise, idx.total_order_noise))});
          }
        }
        staging.write("sobol.csv", csv_text(rows));
        if (bia) {
          rows = {{"year", "incremental_cost_per_person", "uptake", "population", "bi_year", "bi_cumulative"}};
          for (const auto& y : bia->years) {
            rows.push_back({std::to_string(y.year), format_double(y.incremental_cost_per_person),
                            format_double(y.uptake), format_double(y.population), format_double(y.bi_year),
                            format_double(y.bi_cumulative)});
          }
          staging.write("bia.csv", csv_text(rows));
        }
        rows = {{"component", "per_capita_annual", "population_annual", "cumulative"}};
        for (const auto& r : coi.rows) {
          rows.push_back({r.component, format_double(r.per_capita_annual), format_double(r.population_annual),
                          format_double(r.cumulative)});
        }
        staging.write("coi.csv", csv_text(rows));
      }
      staging.write("report.md", render_report(results));
      staging.commit();
      return 0;
    });
    return results;
  } catch (...) {
    staging.quarantine();
    throw;
  }
}

}  // namespace vop
