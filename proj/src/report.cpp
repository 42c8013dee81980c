#include "rmtl/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "rmtl/error.hpp"
#include "rmtl/estimators.hpp"

namespace rmtl {

using nlohmann::json;

namespace {

Interval interval(double estimate, double se, double z) {
  return {estimate, estimate - z * se, estimate + z * se, se};
}

GroupSummary summarize_group(const Sample& part, int group, double tau, double z) {
  GroupSummary s;
  s.group = group;
  s.n = part.size();
  for (const auto& r : part.records()) {
    s.events_interest += r.status == Status::Interest;
    s.events_competing += r.status == Status::Competing;
    s.censored += r.status == Status::Censored;
  }
  const RmtlEstimate lost = rmtl(aalen_johansen(part, 1), tau);
  s.rmtl = interval(lost.point, lost.standard_error(), z);

  const RmstEstimate rmsti = rmst_from_survival(kaplan_meier(part, kInterestOnly), tau,
                                                risk_terms(part, kInterestOnly), part.size());
  s.rmst_interest = interval(rmsti.point, rmsti.standard_error(), z);

  const RcEstimate free = rc(part, tau);
  s.rc = interval(free.point, free.standard_error(), z);

  const RmstEstimate rmstc = rmst_from_survival(kaplan_meier(part, kAllEvents), tau,
                                                risk_terms(part, kAllEvents), part.size());
  s.rmst_composite = interval(rmstc.point, rmstc.standard_error(), z);
  return s;
}

json interval_json(const Interval& i) {
  return {{"estimate", i.estimate}, {"ci_lower", i.ci_lower}, {"ci_upper", i.ci_upper},
          {"se", i.se}};
}

Interval interval_from(const json& j) {
  return {j.at("estimate").get<double>(), j.at("ci_lower").get<double>(),
          j.at("ci_upper").get<double>(), j.at("se").get<double>()};
}

json outcome_json(const TestOutcome& t) {
  json j = {{"method", std::string(method_name(t.method))},
            {"statistic", t.statistic},
            {"p_value", t.p_value}};
  if (t.effect) {
    j["effect"] = {{"point", t.effect->point},
                   {"ci_lower", t.effect->ci_lower},
                   {"ci_upper", t.effect->ci_upper},
                   {"label", t.effect->label}};
  } else {
    j["effect"] = nullptr;
  }
  json meta = json::object();
  if (t.meta.stage) meta["stage"] = *t.meta.stage;
  if (t.meta.stage_one_level) meta["stage_one_level"] = *t.meta.stage_one_level;
  if (t.meta.permutations_used) meta["permutations_used"] = *t.meta.permutations_used;
  if (t.meta.permutations_invalid) meta["permutations_invalid"] = *t.meta.permutations_invalid;
  if (t.meta.tau) meta["tau"] = *t.meta.tau;
  if (!t.meta.warnings.empty()) meta["warnings"] = t.meta.warnings;
  j["meta"] = meta;
  return j;
}

TestOutcome outcome_from(const json& j) {
  TestOutcome t;
  t.method = method_from_name(j.at("method").get<std::string>());
  t.statistic = j.at("statistic").get<double>();
  t.p_value = j.at("p_value").get<double>();
  if (j.contains("effect") && !j.at("effect").is_null()) {
    const auto& e = j.at("effect");
    t.effect = Effect{e.at("point").get<double>(), e.at("ci_lower").get<double>(),
                      e.at("ci_upper").get<double>(), e.at("label").get<std::string>()};
  }
  if (j.contains("meta")) {
    const auto& m = j.at("meta");
    if (m.contains("stage")) t.meta.stage = m.at("stage").get<int>();
    if (m.contains("stage_one_level")) t.meta.stage_one_level = m.at("stage_one_level").get<double>();
    if (m.contains("permutations_used")) {
      t.meta.permutations_used = m.at("permutations_used").get<std::size_t>();
    }
    if (m.contains("permutations_invalid")) {
      t.meta.permutations_invalid = m.at("permutations_invalid").get<std::size_t>();
    }
    if (m.contains("tau")) t.meta.tau = m.at("tau").get<double>();
    if (m.contains("warnings")) t.meta.warnings = m.at("warnings").get<std::vector<std::string>>();
  }
  return t;
}

std::string ci_cell(const Interval& i) {
  return fmt::format("{:.2f} ({:.2f}, {:.2f})", i.estimate, i.ci_lower, i.ci_upper);
}

std::string effect_cell(const TestOutcome* t) {
  if (!t || !t->effect) return "-";
  return fmt::format("{:.2f} ({:.2f}, {:.2f})", t->effect->point, t->effect->ci_lower,
                     t->effect->ci_upper);
}

const TestOutcome* find_test(const AnalysisReport& r, Method m) {
  for (const auto& t : r.tests) {
    if (t.method == m) return &t;
  }
  return nullptr;
}

std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double config_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
}

std::uint64_t config_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value.front() == '-') throw std::invalid_argument(value);
    const auto v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': cannot parse '" + value +
                     "' as a non-negative integer");
  }
}

bool config_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InputError("config key '" + key + "': expected true or false");
}

TauMode tau_mode_from(const std::string& value) {
  if (value == "recompute") return TauMode::Recompute;
  if (value == "fixed") return TauMode::Fixed;
  throw InputError("tau_mode must be 'recompute' or 'fixed'");
}

void apply_config_key(ScenarioConfig& c, const std::string& key, const std::string& value) {
  if (key == "scenario") c.scenario = scenario_from_letter(value);
  else if (key == "n1") c.n1 = config_uint(key, value);
  else if (key == "n2") c.n2 = config_uint(key, value);
  else if (key == "censoring") c.target_censoring = config_real(key, value);
  else if (key == "censoring_mode") c.censoring_mode = censoring_mode_from_name(value);
  else if (key == "p1") c.p1 = config_real(key, value);
  else if (key == "beta") c.beta = config_real(key, value);
  else if (key == "reps" || key == "replications") c.replications = config_uint(key, value);
  else if (key == "perms" || key == "permutations") c.permutations = config_uint(key, value);
  else if (key == "alpha") c.alpha = config_real(key, value);
  else if (key == "seed") c.seed = config_uint(key, value);
  else if (key == "threads") c.threads = static_cast<unsigned>(config_uint(key, value));
  else if (key == "tau_mode") c.tau_mode = tau_mode_from(value);
  else if (key == "include_composite") c.include_composite = config_bool(key, value);
  else throw InputError("unknown config key '" + key + "'");
}

std::string json_scalar_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return fmt::format("{}", v.get<double>());
  throw InputError("config values must be scalars");
}

}  // namespace

AnalysisReport analyze(const Sample& sample, const AnalysisOptions& options) {
  require_two_groups(sample);
  AnalysisReport report;
  report.alpha = options.alpha;
  report.permutations = options.permutations;
  report.seed = options.seed;
  report.tau_mode = options.tau_mode == TauMode::Fixed ? "fixed" : "recompute";
  if (options.tau) {
    if (!(*options.tau > 0.0) || *options.tau > sample.subset(1).max_time() ||
        *options.tau > sample.subset(2).max_time()) {
      throw InputError("invalid tau");
    }
    report.tau = *options.tau;
    report.tau_source = "user";
    try {
      if (select_tau(sample) == *options.tau) report.tau_source = "rule";
    } catch (const InputError&) {
    }
  } else {
    try {
      report.tau = select_tau(sample);
    } catch (const InputError&) {
      throw InputError("tau undefined (a group has no events of interest); supply --tau");
    }
    report.tau_source = "rule";
  }
  const double tau = report.tau;
  const double z = two_sided_critical_value(options.alpha);
  for (int g : {1, 2}) report.groups.push_back(summarize_group(sample.subset(g), g, tau, z));

  PermutationPlan plan;
  plan.count = options.permutations;
  plan.seed = options.seed;
  plan.threads = options.threads;
  plan.tau_mode = options.tau_mode;

  report.tests.push_back(gray_test(sample));
  report.tests.push_back(diff_test(sample, tau, options.alpha));
  const CombinedOutcomes combined = combined_tests(sample, tau, options.alpha, plan);
  report.tests.push_back(combined.pcomb);
  report.tests.push_back(combined.fcomb);
  report.tests.push_back(combined.tcomb);
  report.tests.push_back(diff_star_test(sample, tau, options.alpha));
  report.tests.push_back(rmst_diff_test(sample, tau, options.alpha, RmstVariant::Interest));
  report.tests.push_back(rmst_diff_test(sample, tau, options.alpha, RmstVariant::Composite));
  for (const auto& t : report.tests) {
    for (const auto& w : t.meta.warnings) {
      report.warnings.push_back(std::string(method_name(t.method)) + ": " + w);
    }
  }
  return report;
}

json to_json(const AnalysisReport& r) {
  json groups = json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"group", g.group},
                      {"n", g.n},
                      {"events_interest", g.events_interest},
                      {"events_competing", g.events_competing},
                      {"censored", g.censored},
                      {"rmtl", interval_json(g.rmtl)},
                      {"rmst_interest", interval_json(g.rmst_interest)},
                      {"rc", interval_json(g.rc)},
                      {"rmst_composite", interval_json(g.rmst_composite)}});
  }
  json tests = json::array();
  for (const auto& t : r.tests) tests.push_back(outcome_json(t));
  return {{"tau", r.tau},
          {"tau_source", r.tau_source},
          {"tau_mode", r.tau_mode},
          {"alpha", r.alpha},
          {"permutations", r.permutations},
          {"seed", r.seed},
          {"groups", groups},
          {"tests", tests},
          {"warnings", r.warnings}};
}

AnalysisReport analysis_report_from_json(const json& j) {
  AnalysisReport r;
  r.tau = j.at("tau").get<double>();
  r.tau_source = j.at("tau_source").get<std::string>();
  r.tau_mode = j.value("tau_mode", std::string("recompute"));
  r.alpha = j.at("alpha").get<double>();
  r.permutations = j.at("permutations").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& g : j.at("groups")) {
    GroupSummary s;
    s.group = g.at("group").get<int>();
    s.n = g.at("n").get<std::size_t>();
    s.events_interest = g.at("events_interest").get<std::size_t>();
    s.events_competing = g.at("events_competing").get<std::size_t>();
    s.censored = g.at("censored").get<std::size_t>();
    s.rmtl = interval_from(g.at("rmtl"));
    s.rmst_interest = interval_from(g.at("rmst_interest"));
    s.rc = interval_from(g.at("rc"));
    s.rmst_composite = interval_from(g.at("rmst_composite"));
    r.groups.push_back(s);
  }
  for (const auto& t : j.at("tests")) r.tests.push_back(outcome_from(t));
  if (j.contains("warnings")) r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

std::string format_text(const AnalysisReport& r) {
  std::string out;
  const int level = static_cast<int>(std::lround((1.0 - r.alpha) * 100.0));
  out += "Restricted mean time lost analysis\n";
  out += fmt::format("  tau          {:g} ({})\n", r.tau,
                     r.tau_source == "rule" ? "minimum over groups of the last event-of-interest time"
                                            : "user supplied");
  out += fmt::format("  alpha        {:g}\n", r.alpha);
  out += fmt::format("  permutations {} (seed {}, tau {} in permutations)\n", r.permutations,
                     r.seed, r.tau_mode == "fixed" ? "fixed" : "recomputed");
  out += "\n";
  for (const auto& g : r.groups) {
    out += fmt::format("  group {}: n = {}, events of interest = {}, competing = {}, censored = {}\n",
                       g.group, g.n, g.events_interest, g.events_competing, g.censored);
  }
  out += "\n";
  out += fmt::format("Descriptive statistics ({}% CI)\n", level);
  const auto& g1 = r.groups.at(0);
  const auto& g2 = r.groups.at(1);
  out += fmt::format("{:<8}{:<26}{:<26}{}\n", "Measure", "Group 1", "Group 2",
                     "Difference (1 - 2)");
  auto row = [&](const char* name, const Interval& a, const Interval& b, Method m) {
    out += fmt::format("{:<8}{:<26}{:<26}{}\n", name, ci_cell(a), ci_cell(b),
                       effect_cell(find_test(r, m)));
  };
  row("RMTL", g1.rmtl, g2.rmtl, Method::Diff);
  row("RMSTi", g1.rmst_interest, g2.rmst_interest, Method::RMSTi);
  row("RC", g1.rc, g2.rc, Method::DiffStar);
  row("RMSTc", g1.rmst_composite, g2.rmst_composite, Method::RMSTc);
  out += "\n";
  out += "Statistical inference\n";
  out += fmt::format("{:<8}{:>12}{:>10}  {}\n", "Method", "Statistic", "P-value", "Notes");
  for (const auto& t : r.tests) {
    std::string notes;
    if (t.meta.stage) notes += fmt::format("stage {}", *t.meta.stage);
    if (t.meta.permutations_used) {
      if (!notes.empty()) notes += ", ";
      notes += fmt::format("{} permutations", *t.meta.permutations_used);
    }
    out += fmt::format("{:<8}{:>12.4f}{:>10.3f}  {}\n", method_name(t.method), t.statistic,
                       t.p_value, notes);
  }
  if (!r.warnings.empty()) {
    out += "\nWarnings\n";
    for (const auto& w : r.warnings) out += "  " + w + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_figure_data(const Sample& sample, double tau,
                                                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto write_curve = [&](const std::filesystem::path& path, const StepFunction& f, bool complement) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    auto value = [&](double v) { return complement ? 1.0 - v : v; };
    out << "time\tvalue\n";
    out << fmt::format("{}\t{}\n", 0.0, value(f.value_at_zero));
    for (std::size_t i = 0; i < f.knots.size(); ++i) {
      out << fmt::format("{}\t{}\n", f.knots[i], value(f.values[i]));
    }
    out << fmt::format("{}\t{}\n", f.horizon, value(f(f.horizon)));
    written.push_back(path);
  };
  for (int g : {1, 2}) {
    const Sample part = sample.subset(g);
    if (part.empty()) continue;
    write_curve(dir / fmt::format("group{}_cif_interest.tsv", g), aalen_johansen(part, 1).cif,
                false);
    write_curve(dir / fmt::format("group{}_one_minus_cif_competing.tsv", g),
                aalen_johansen(part, 2).cif, true);
  }
  std::ofstream meta(dir / "tau.txt");
  meta << fmt::format("{}\n", tau);
  return written;
}

ScenarioConfig parse_config_text(std::string_view text) {
  ScenarioConfig c;
  const std::string body = trim_copy(text);
  if (!body.empty() && body.front() == '{') {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      if (!value.is_null()) apply_config_key(c, key, json_scalar_string(value));
    }
    return validated(c);
  }
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim_copy(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_config_key(c, trim_copy(stripped.substr(0, eq)), trim_copy(stripped.substr(eq + 1)));
  }
  return validated(c);
}

ScenarioConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

json to_json(const ScenarioConfig& c) {
  json j = {{"scenario", std::string(1, scenario_letter(c.scenario))},
            {"n1", c.n1},
            {"n2", c.n2},
            {"censoring", c.target_censoring},
            {"censoring_mode", std::string(censoring_mode_name(c.censoring_mode))},
            {"p1", c.p1},
            {"replications", c.replications},
            {"permutations", c.permutations},
            {"alpha", c.alpha},
            {"seed", c.seed},
            {"tau_mode", c.tau_mode == TauMode::Fixed ? "fixed" : "recompute"},
            {"include_composite", c.include_composite}};
  j["beta"] = c.beta ? json(*c.beta) : json(nullptr);
  return j;
}

json to_json(const MonteCarloReport& r) {
  json rates = json::array();
  for (Method m : r.methods) {
    json row = {{"method", std::string(method_name(m))},
                {"rejection_rate", r.rejection_rate.at(m)},
                {"mc_stderr", r.mc_stderr(m)}};
    if (auto it = r.mean_abs_deviation.find(m); it != r.mean_abs_deviation.end()) {
      row["abs_deviation"] = it->second;
    }
    rates.push_back(row);
  }
  auto bound = [](double b) { return std::isinf(b) ? json(nullptr) : json(b); };
  return {{"config", to_json(r.config)},
          {"censoring_bounds", {{"group1", bound(r.bounds.group1)}, {"group2", bound(r.bounds.group2)}}},
          {"realized_censoring", r.realized_censoring},
          {"valid_replicates", r.valid_replicates},
          {"regenerated", r.regenerated},
          {"methods", rates},
          {"wall_time", r.wall_time},
          {"warnings", r.warnings}};
}

std::string format_tsv(const MonteCarloReport& r) {
  std::string out = "method\trejection_rate\tmc_stderr\n";
  for (Method m : r.methods) {
    out += fmt::format("{}\t{:.4f}\t{:.4f}\n", method_name(m), r.rejection_rate.at(m),
                       r.mc_stderr(m));
  }
  return out;
}

std::string format_grid_table(const std::vector<MonteCarloReport>& reports) {
  if (reports.empty()) return {};
  std::string out = "n1,n2\tcensoring";
  for (Method m : reports.front().methods) out += fmt::format("\t{}", method_name(m));
  out += "\n";
  std::pair<std::size_t, std::size_t> last{0, 0};
  for (const auto& r : reports) {
    const std::pair<std::size_t, std::size_t> sizes{r.config.n1, r.config.n2};
    const std::string label = sizes == last ? "" : fmt::format("{},{}", sizes.first, sizes.second);
    last = sizes;
    out += fmt::format("{}\t{:.0f}%", label, r.config.target_censoring * 100.0);
    for (Method m : r.methods) out += fmt::format("\t{:.4f}", r.rejection_rate.at(m));
    out += "\n";
  }
  return out;
}

}  // namespace rmtl
