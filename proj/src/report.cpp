#include "vop/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace vop {

using json = nlohmann::ordered_json;

namespace {

std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

std::string compact(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

// Dominant increments print as their (negative) ratio; dominated ones are
// labelled because the ratio's sign would be ambiguous.
std::string icer_cell(const json& icer) {
  const auto cls = icer.at("classification").get<std::string>();
  if (cls == "icer") {
    return format_currency(icer.at("icer").get<double>());
  }
  if (cls == "dominant") {
    const double de = icer.at("delta_effect").get<double>();
    return format_currency(icer.at("delta_cost").get<double>() / de);
  }
  if (cls == "dominated") {
    return "Dominated";
  }
  return "n/a";
}

void table_row(std::ostringstream& out, const std::vector<std::string>& cells) {
  out << "|";
  for (const auto& c : cells) {
    out << " " << c << " |";
  }
  out << "\n";
}

void table_header(std::ostringstream& out, const std::vector<std::string>& cells, const std::string& align) {
  table_row(out, cells);
  out << "|";
  for (char a : align) {
    out << (a == 'r' ? "---:|" : "---|");
  }
  out << "\n";
}

}  // namespace

std::string format_currency(double value) {
  const double rounded = std::round(value);
  const bool negative = rounded < 0.0;
  auto digits = fixed(std::fabs(rounded), 0);
  std::string grouped;
  const auto n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    grouped += digits[i];
    if ((n - i - 1) % 3 == 0 && i + 1 < n) {
      grouped += ',';
    }
  }
  return (negative ? "-$" : "$") + grouped;
}

std::string render_report(const ResultsBundle& bundle) {
  std::ostringstream out;
  const auto& manifest = bundle.at("manifest");
  const auto& model = bundle.at("model");
  const double wtp = manifest.at("wtp").get<double>();

  out << "# Value of Perspective report\n\n";
  out << "## Model summary\n\n";
  std::string states;
  for (const auto& s : model.at("states")) {
    states += (states.empty() ? "" : ", ") + s.get<std::string>();
  }
  std::string strategies;
  for (const auto& s : model.at("strategies")) {
    strategies += (strategies.empty() ? "" : ", ") + s.at("name").get<std::string>();
    if (s.at("comparator").get<bool>()) {
      strategies += " (comparator)";
    }
  }
  out << "- States: " << states << "\n";
  out << "- Strategies: " << strategies << "\n";
  out << "- Subgroups: ";
  bool first = true;
  for (const auto& g : model.at("subgroups")) {
    out << (first ? "" : ", ") << g.at("name").get<std::string>() << " ("
        << fixed(100.0 * g.at("population_share").get<double>(), 1) << "%)";
    first = false;
  }
  out << "\n";
  const double cycle_years = model.at("cycle_length_years").get<double>();
  out << "- Horizon: " << model.at("horizon_cycles").get<int>() << " cycles of " << cycle_years
      << (cycle_years == 1.0 ? " year" : " years") << "; discount rates "
      << fixed(model.at("discount").at("costs").get<double>(), 3) << " (costs), "
      << fixed(model.at("discount").at("effects").get<double>(), 3) << " (effects)\n";
  out << "- Willingness to pay: " << format_currency(wtp) << "/QALY; inequality aversion "
      << manifest.at("epsilon").get<double>() << "\n";
  out << "- PSA: " << manifest.at("iterations").get<std::size_t>() << " iterations, seed "
      << manifest.at("master_seed").get<std::uint64_t>() << "\n";
  out << "- Config digest: `" << manifest.at("spec_digest").get<std::string>() << "`\n\n";

  const auto& det = bundle.at("deterministic");
  out << "## Comparative ICERs across perspectives\n\n";
  table_header(out, {"Intervention", "Health System ICER", "Societal ICER", "VoP (Per Person)"}, "lrrr");
  for (const auto& row : det.at("interventions")) {
    table_row(out, {row.at("strategy").get<std::string>(), icer_cell(row.at("health_system").at("icer")),
                    icer_cell(row.at("societal").at("icer")),
                    format_currency(row.at("value_of_perspective").get<double>())});
  }
  out << "\n## Value of Perspective analysis\n\n";
  table_header(out, {"Intervention", "Health System Decision", "Societal Decision", "VoP (Per Person)"}, "lllr");
  for (const auto& row : det.at("interventions")) {
    table_row(out, {row.at("strategy").get<std::string>(),
                    row.at("health_system").at("decision").get<std::string>(),
                    row.at("societal").at("decision").get<std::string>(),
                    format_currency(row.at("value_of_perspective").get<double>())});
  }
  out << "\n*Decisions based on a WTP threshold of " << format_currency(wtp) << "/QALY.*\n\n";

  const auto& voi = bundle.at("voi");
  const auto& evop = voi.at("evop");
  out << "Deterministic value of perspective: " << format_currency(det.at("value_of_perspective").get<double>())
      << " per person. Expected value of perspective over the PSA (" << evop.at("mode").get<std::string>()
      << "): " << format_currency(evop.at("evop").get<double>())
      << " per person; the perspectives disagree in "
      << fixed(100.0 * evop.at("discordance_probability").get<double>(), 1) << "% of iterations.\n\n";

  const auto& psa = bundle.at("psa");
  out << "## Cost-effectiveness acceptability\n\n";
  const auto& ceac = psa.at("ceac");
  const auto& grid = ceac.at("wtp");
  for (const auto& [perspective, by_strategy] : ceac.items()) {
    if (perspective == "wtp") {
      continue;
    }
    out << "Perspective: " << perspective << "\n\n";
    std::vector<std::string> header{"WTP"};
    std::string align = "r";
    for (const auto& [name, _] : by_strategy.items()) {
      header.push_back(name);
      align += 'r';
    }
    table_header(out, header, align);
    for (std::size_t k = 0; k < grid.size(); k += 2) {
      std::vector<std::string> row{format_currency(grid[k].get<double>())};
      for (const auto& [_, column] : by_strategy.items()) {
        row.push_back(fixed(column[k].get<double>(), 3));
      }
      table_row(out, row);
    }
    out << "\n";
  }
  const auto& delta = psa.at("delta_nmb_societal_minus_health_system");
  out << "Societal minus health-system NMB of the intervention: mean "
      << format_currency(delta.at("mean").get<double>()) << ", 95% interval "
      << format_currency(delta.at("quantiles").at("p2.5").get<double>()) << " to "
      << format_currency(delta.at("quantiles").at("p97.5").get<double>()) << ".\n\n";

  out << "## Value of information\n\n";
  table_header(out, {"Perspective", "EVPI (Per Person)", "Population EVPI"}, "lrr");
  for (const auto& [perspective, entry] : voi.at("perspectives").items()) {
    table_row(out, {perspective, format_currency(entry.at("evpi_per_person").get<double>()),
                    format_currency(entry.at("population_evpi").get<double>())});
  }
  out << "\n";
  for (const auto& [perspective, entry] : voi.at("perspectives").items()) {
    out << "EVPPI (" << perspective << "):\n\n";
    table_header(out, {"Parameter group", "EVPPI (Per Person)"}, "lr");
    for (const auto& [group, value] : entry.at("evppi").items()) {
      table_row(out, {group, value.is_number() ? format_currency(value.get<double>()) : "n/a"});
    }
    out << "\n";
  }

  const auto& dcea = bundle.at("dcea");
  out << "## Distributional analysis\n\n";
  out << "Inequality aversion " << dcea.at("epsilon").get<double>() << ", reference health "
      << fixed(dcea.at("reference_health").get<double>(), 4) << ".\n\n";
  table_header(out, {"Subgroup", "Equity weight"}, "lr");
  for (const auto& [name, w] : dcea.at("weights").items()) {
    table_row(out, {name, fixed(w.get<double>(), 4)});
  }
  out << "\n";
  table_header(out, {"Inequality aversion", "Health System NMB_eq", "Societal NMB_eq"}, "rrr");
  const auto& hs_grid = dcea.at("epsilon_grid").at("health_system");
  const auto& soc_grid = dcea.at("epsilon_grid").at("societal");
  for (std::size_t k = 0; k < hs_grid.size(); ++k) {
    table_row(out, {fixed(hs_grid[k].at("epsilon").get<double>(), 2),
                    format_currency(hs_grid[k].at("nmb_eq").get<double>()),
                    format_currency(soc_grid[k].at("nmb_eq").get<double>())});
  }
  out << "\n";
  if (!dcea.at("equity_plane").is_null()) {
    const auto& plane = dcea.at("equity_plane");
    out << "Equity plane (societal): mean net health benefit "
        << fixed(plane.at("mean_net_health_benefit").get<double>(), 4) << " QALYs, mean equity impact "
        << fixed(plane.at("mean_equity_impact").get<double>(), 6) << "; "
        << fixed(100.0 * plane.at("share_north_east").get<double>(), 1)
        << "% of iterations improve both health and equity.\n\n";
  }

  const auto& sens = bundle.at("sensitivity");
  out << "## Sensitivity analysis\n\n";
  out << "Outcome: incremental NMB, " << sens.at("perspective").get<std::string>() << " perspective.\n\n";
  table_header(out, {"Parameter", "Low", "High", "NMB at low", "NMB at high"}, "lrrrr");
  for (const auto& e : sens.at("tornado")) {
    table_row(out, {e.at("parameter").get<std::string>(), compact(e.at("low").get<double>()),
                    compact(e.at("high").get<double>()),
                    format_currency(e.at("outcome_low").get<double>()),
                    format_currency(e.at("outcome_high").get<double>())});
  }
  out << "\n";
  if (!sens.at("sobol").is_null()) {
    table_header(out, {"Parameter", "First order", "Total order", "Noise"}, "lrrr");
    for (const auto& idx : sens.at("sobol").at("indices")) {
      table_row(out, {idx.at("parameter").get<std::string>(), fixed(idx.at("first_order").get<double>(), 3),
                      fixed(idx.at("total_order").get<double>(), 3),
                      fixed(std::max(idx.at("first_order_noise").get<double>(),
                                     idx.at("total_order_noise").get<double>()),
                            3) +
                          (idx.at("flagged_noise").get<bool>() ? " (clamped)" : "")});
    }
    out << "\n";
  }

  if (bundle.contains("bia") && !bundle.at("bia").is_null()) {
    const auto& bia = bundle.at("bia");
    out << "## Budget impact\n\n";
    table_header(out, {"Year", "Incremental cost per person", "Uptake", "Population", "Budget impact", "Cumulative"},
                 "rrrrrr");
    for (const auto& y : bia.at("years")) {
      table_row(out, {std::to_string(y.at("year").get<int>()),
                      format_currency(y.at("incremental_cost_per_person").get<double>()),
                      fixed(y.at("uptake").get<double>(), 2), fixed(y.at("population").get<double>(), 0),
                      format_currency(y.at("bi_year").get<double>()),
                      format_currency(y.at("bi_cumulative").get<double>())});
    }
    out << "\n";
  }

  if (bundle.contains("coi") && !bundle.at("coi").is_null()) {
    const auto& coi = bundle.at("coi");
    out << "## Cost of illness\n\n";
    out << "Comparator: " << coi.at("strategy").get<std::string>() << ", " << coi.at("years").get<int>()
        << " years.\n\n";
    table_header(out, {"Component", "Per capita (annual)", "Population (annual)", "Cumulative"}, "lrrr");
    for (const auto& r : coi.at("rows")) {
      table_row(out, {r.at("component").get<std::string>(), format_currency(r.at("per_capita_annual").get<double>()),
                      format_currency(r.at("population_annual").get<double>()),
                      format_currency(r.at("cumulative").get<double>())});
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace vop
