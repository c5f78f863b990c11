#include "vmsched/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <sstream>

#include "vmsched/engine.hpp"
#include "vmsched/fixtures.hpp"
#include "vmsched/offline.hpp"
#include "vmsched/online.hpp"

namespace vmsched {

std::vector<std::string> scheduler_names() {
  return {"BPV", "BPV_NOMINAL", "MIC", "MDC", "RANDOM", "ROUND_ROBIN", "MIE", "OBPV", "OMIC", "IVP"};
}

std::string canonical_scheduler(const std::string& raw) {
  std::string name = raw;
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
  if (name == "RAND") return "RANDOM";
  if (name == "RR") return "ROUND_ROBIN";
  for (const std::string& n : scheduler_names()) {
    if (n == name) return n;
  }
  throw UsageError("unknown scheduler '" + raw + "'");
}

Assignment run_scheduler(const Scenario& scenario, const std::string& raw, const RunOptions& options) {
  const std::string name = canonical_scheduler(raw);
  if (name == "BPV") return bpv_schedule(scenario, DurationModel::InterferenceAware);
  if (name == "BPV_NOMINAL") return bpv_schedule(scenario, DurationModel::Nominal);
  if (name == "MIC") return mic_schedule(scenario);
  if (name == "MDC") return mdc_schedule(scenario);
  if (name == "RANDOM") {
    if (!options.seed) throw UsageError("RANDOM needs a seed");
    return baseline_schedule(scenario, Policy::Random, {options.seed, 0});
  }
  if (name == "ROUND_ROBIN") {
    return baseline_schedule(scenario, Policy::RoundRobin, {std::nullopt, options.rr_initial_servers});
  }
  if (name == "MIE") return baseline_schedule(scenario, Policy::MIE);
  ReplayOptions ro;
  ro.policy = online_policy_from_string(name);
  ro.batch_size = options.batch_size;
  return replay_online(scenario, ro).assignment;
}

MetricsRow measure(const Scenario& scenario, const Assignment& assignment, const std::string& name) {
  const ExecutionTrace trace = simulate(scenario, assignment);
  const CostBreakdown cost = evaluate_cost(trace, scenario);
  MetricsRow row;
  row.scheduler = name;
  row.energy = cost.energy;
  row.penalty = cost.penalty;
  row.total = cost.total;
  for (auto& [vm, done] : trace.completions) {
    const VmRequest& req = scenario.vm(vm);
    row.worst_deg = std::max(row.worst_deg, (done - req.arrival - req.work) / req.work);
  }
  row.worst_deg = std::max(0.0, row.worst_deg);
  row.servers = static_cast<double>(trace.servers.size());
  row.makespan = trace.makespan;
  for (auto& [_, v] : capacity_violations(trace)) row.violation += v;
  return row;
}

// --------------------------------------------------------------------------
// config

void ExperimentConfig::validate() const {
  if (schedulers.empty()) throw UsageError("schedulers: at least one scheduler is required");
  for (std::size_t i = 0; i < schedulers.size(); ++i) {
    try {
      const std::string name = canonical_scheduler(schedulers[i]);
      if (name == "RANDOM" && !seed) throw UsageError("RANDOM needs a seed (set 'seed')");
    } catch (const UsageError& e) {
      throw UsageError("schedulers[" + std::to_string(i) + "]: " + e.what());
    }
  }
  const bool generated = !source.file && !source.fixture && !source.trace;
  if (generated && !seed) throw UsageError("seed: a generated scenario needs a seed");
  if (source.distribution != "normal" && source.distribution != "exponential") {
    throw UsageError("scenario.distribution: expected normal or exponential");
  }
  if (!(source.dist_param > 0) && !(source.distribution == "normal" && source.dist_param == 0)) {
    throw UsageError("scenario.param: must be positive");
  }
  if (batch_size == 0) throw UsageError("batch_size: must be >= 1");
  if (rr_initial_servers < 0) throw UsageError("rr_initial_servers: must be >= 0");
  if (jobs == 0) throw UsageError("jobs: must be >= 1");
  if (!sweep.axis.empty()) {
    static const std::vector<std::string> axes{"sigma", "lambda", "density", "beta", "batch_size"};
    if (std::find(axes.begin(), axes.end(), sweep.axis) == axes.end()) {
      throw UsageError("sweep.axis: expected one of sigma, lambda, density, beta, batch_size");
    }
    if (sweep.values.empty()) throw UsageError("sweep.values: at least one value is required");
    if (sweep.seeds == 0) throw UsageError("sweep.seeds: must be >= 1");
    if ((sweep.axis == "sigma" || sweep.axis == "lambda" || sweep.axis == "density") && !generated) {
      throw UsageError("sweep.axis: '" + sweep.axis + "' needs a generated scenario");
    }
    if (sweep.axis == "lambda" || sweep.axis == "density" || sweep.axis == "batch_size") {
      for (double v : sweep.values) {
        if (!(v > 0)) throw UsageError("sweep.values: '" + sweep.axis + "' values must be positive");
      }
    }
  }
  try {
    source.generator.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("scenario.generator: ") + e.what());
  }
}

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json opt(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }

template <class T>
T get_as(const Json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const Json::exception&) {
    throw UsageError(path + ": wrong type");
  }
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw UsageError((path.empty() ? "config" : path) + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw UsageError((path.empty() ? "" : path + ".") + it.key() + ": unknown field");
    }
  }
}

}  // namespace

Json config_to_json(const ExperimentConfig& c) {
  const GeneratorSpec& g = c.source.generator;
  Json j;
  j["scenario"] = {
      {"file", opt(c.source.file)},
      {"fixture", opt(c.source.fixture)},
      {"trace", opt(c.source.trace)},
      {"degradation", opt(c.source.degradation)},
      {"n_vms", g.n_vms},
      {"arrival_range", {g.arrival_lo, g.arrival_hi}},
      {"work_range", {g.work_lo, g.work_hi}},
      {"demand_choices", g.demand_choices},
      {"server_cores", g.server_cores},
      {"distribution", c.source.distribution},
      {"param", c.source.dist_param},
      {"second_param", c.source.second_param == SecondParam::StdDev ? "std" : "var"},
  };
  j["cost"] = {{"alpha", opt(c.alpha)}, {"beta", opt(c.beta)}, {"tau", opt(c.tau)}};
  j["schedulers"] = c.schedulers;
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["rr_initial_servers"] = c.rr_initial_servers;
  j["batch_size"] = c.batch_size;
  j["sweep"] = {{"axis", c.sweep.axis}, {"values", c.sweep.values}, {"seeds", c.sweep.seeds}};
  j["jobs"] = c.jobs;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  check_keys(j, "", {"scenario", "cost", "schedulers", "seed", "rr_initial_servers", "batch_size", "sweep", "jobs"});
  auto str_opt = [](const Json& o, const char* k, const std::string& path) -> std::optional<std::string> {
    if (!o.contains(k) || o.at(k).is_null()) return std::nullopt;
    return get_as<std::string>(o.at(k), path + "." + k);
  };
  auto num_opt = [](const Json& o, const char* k, const std::string& path) -> std::optional<double> {
    if (!o.contains(k) || o.at(k).is_null()) return std::nullopt;
    if (!o.at(k).is_number()) throw UsageError(path + "." + k + ": expected a number");
    return o.at(k).get<double>();
  };
  if (j.contains("scenario")) {
    const Json& s = j.at("scenario");
    check_keys(s, "scenario",
               {"file", "fixture", "trace", "degradation", "n_vms", "arrival_range", "work_range",
                "demand_choices", "server_cores", "distribution", "param", "second_param"});
    ScenarioSource& src = c.source;
    src.file = str_opt(s, "file", "scenario");
    src.fixture = str_opt(s, "fixture", "scenario");
    src.trace = str_opt(s, "trace", "scenario");
    src.degradation = str_opt(s, "degradation", "scenario");
    GeneratorSpec& g = src.generator;
    if (s.contains("n_vms")) g.n_vms = get_as<std::size_t>(s.at("n_vms"), "scenario.n_vms");
    auto range = [&](const char* k, double& lo, double& hi) {
      if (!s.contains(k)) return;
      auto v = get_as<std::vector<double>>(s.at(k), std::string("scenario.") + k);
      if (v.size() != 2) throw UsageError(std::string("scenario.") + k + ": expected [lo, hi]");
      lo = v[0];
      hi = v[1];
    };
    range("arrival_range", g.arrival_lo, g.arrival_hi);
    range("work_range", g.work_lo, g.work_hi);
    if (s.contains("demand_choices")) {
      g.demand_choices = get_as<std::vector<double>>(s.at("demand_choices"), "scenario.demand_choices");
    }
    if (auto v = num_opt(s, "server_cores", "scenario")) g.server_cores = *v;
    if (auto v = str_opt(s, "distribution", "scenario")) src.distribution = *v;
    if (auto v = num_opt(s, "param", "scenario")) src.dist_param = *v;
    if (auto v = str_opt(s, "second_param", "scenario")) {
      if (*v == "std") src.second_param = SecondParam::StdDev;
      else if (*v == "var") src.second_param = SecondParam::Variance;
      else throw UsageError("scenario.second_param: expected std or var");
    }
  }
  if (j.contains("cost")) {
    const Json& k = j.at("cost");
    check_keys(k, "cost", {"alpha", "beta", "tau"});
    c.alpha = num_opt(k, "alpha", "cost");
    c.beta = num_opt(k, "beta", "cost");
    c.tau = num_opt(k, "tau", "cost");
  }
  if (j.contains("schedulers")) c.schedulers = get_as<std::vector<std::string>>(j.at("schedulers"), "schedulers");
  if (j.contains("seed") && !j.at("seed").is_null()) c.seed = get_as<std::uint64_t>(j.at("seed"), "seed");
  if (j.contains("rr_initial_servers")) c.rr_initial_servers = get_as<int>(j.at("rr_initial_servers"), "rr_initial_servers");
  if (j.contains("batch_size")) c.batch_size = get_as<std::size_t>(j.at("batch_size"), "batch_size");
  if (j.contains("jobs")) c.jobs = get_as<std::size_t>(j.at("jobs"), "jobs");
  if (j.contains("sweep")) {
    const Json& w = j.at("sweep");
    check_keys(w, "sweep", {"axis", "values", "seeds"});
    if (w.contains("axis")) c.sweep.axis = get_as<std::string>(w.at("axis"), "sweep.axis");
    if (w.contains("values")) c.sweep.values = get_as<std::vector<double>>(w.at("values"), "sweep.values");
    if (w.contains("seeds")) c.sweep.seeds = get_as<std::size_t>(w.at("seeds"), "sweep.seeds");
  }
  c.validate();
  return c;
}

Scenario build_scenario(const ExperimentConfig& c, std::optional<std::uint64_t> seed) {
  Scenario s;
  const ScenarioSource& src = c.source;
  if (src.file) {
    s = load_scenario(*src.file);
  } else if (src.fixture) {
    try {
      s = fixtures::by_name(*src.fixture);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("scenario.fixture: ") + e.what());
    }
  } else if (src.trace) {
    s.vms = load_trace_csv(*src.trace);
    s.server.capacity = {src.generator.server_cores};
    s.degradation = src.degradation ? load_degradation_csv(*src.degradation) : DegradationMatrix(s.vms.size());
    if (s.degradation.size() != s.vms.size()) {
      throw ParseError("degradation matrix size " + std::to_string(s.degradation.size()) +
                       " does not match trace size " + std::to_string(s.vms.size()));
    }
  } else {
    if (!seed) throw UsageError("seed: a generated scenario needs a seed");
    GeneratorSpec g = src.generator;
    g.seed = *seed;
    if (src.degradation) {
      g.degradation = FixedDegradation{*src.degradation};
    } else if (src.distribution == "normal") {
      g.degradation = NormalDegradation{normal_sigma(src.dist_param, src.second_param)};
    } else {
      g.degradation = ExponentialDegradation{src.dist_param};
    }
    s = generate_scenario(g);
  }
  if (c.alpha) s.cost.alpha = *c.alpha;
  if (c.beta) s.cost.beta = *c.beta;
  if (c.tau) s.cost.tau = *c.tau;
  s.validate();
  return s;
}

// --------------------------------------------------------------------------
// reports

double round_sig(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::strtod(buf, nullptr);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

const char* kColumns[] = {"energy", "penalty", "total", "worst_deg", "servers", "makespan", "violation"};

std::vector<double> values_of(const MetricsRow& r) {
  return {r.energy, r.penalty, r.total, r.worst_deg, r.servers, r.makespan, r.violation};
}

double normalize(double num, double den) {
  if (den == 0) return num == 0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

// Reference row index per row.
std::vector<std::size_t> references(const MetricsReport& report) {
  std::vector<std::size_t> ref(report.rows.size());
  auto key = [&](std::size_t i) {
    return i < report.extra_values.size() ? report.extra_values[i] : std::vector<double>{};
  };
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    std::optional<std::size_t> first, bpv;
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
      if (key(k) != key(i)) continue;
      if (!first) first = k;
      if (!bpv && report.rows[k].scheduler == "BPV") bpv = k;
    }
    ref[i] = bpv ? *bpv : *first;
  }
  return ref;
}

void require_rows(const MetricsReport& report) {
  if (report.rows.empty()) throw UsageError("report has no rows (empty scenario or scheduler set)");
}

}  // namespace

std::string report_csv(const MetricsReport& report) {
  require_rows(report);
  std::ostringstream out;
  for (const std::string& e : report.extra_columns) out << e << ',';
  out << "scheduler";
  for (const char* c : kColumns) out << ',' << c;
  for (const char* c : kColumns) out << ',' << c << "_norm";
  out << '\n';
  const auto ref = references(report);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    for (std::size_t e = 0; e < report.extra_columns.size(); ++e) out << format_number(report.extra_values[i][e]) << ',';
    out << report.rows[i].scheduler;
    const auto v = values_of(report.rows[i]);
    const auto r = values_of(report.rows[ref[i]]);
    for (double x : v) out << ',' << format_number(x);
    for (std::size_t k = 0; k < v.size(); ++k) out << ',' << format_number(normalize(v[k], r[k]));
    out << '\n';
  }
  return out.str();
}

Json report_json(const MetricsReport& report) {
  require_rows(report);
  Json j;
  j["config"] = report.config;
  Json rows = Json::array();
  const auto ref = references(report);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    Json row;
    for (std::size_t e = 0; e < report.extra_columns.size(); ++e) {
      row[report.extra_columns[e]] = round_sig(report.extra_values[i][e]);
    }
    row["scheduler"] = report.rows[i].scheduler;
    const auto v = values_of(report.rows[i]);
    const auto r = values_of(report.rows[ref[i]]);
    for (std::size_t k = 0; k < v.size(); ++k) row[kColumns[k]] = round_sig(v[k]);
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double n = normalize(v[k], r[k]);
      row[std::string(kColumns[k]) + "_norm"] = std::isfinite(n) ? Json(round_sig(n)) : Json(nullptr);
    }
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

void emit_report(const MetricsReport& report, const std::filesystem::path& prefix) {
  const std::string csv = report_csv(report);
  const std::string json = report_json(report).dump(2) + "\n";
  std::filesystem::path csv_path = prefix, json_path = prefix;
  csv_path += ".csv";
  json_path += ".json";
  write_text_file(csv_path, csv);
  write_text_file(json_path, json);
}

namespace {

RunOptions run_options(const ExperimentConfig& c, std::optional<std::uint64_t> seed) {
  RunOptions o;
  o.seed = seed;
  o.rr_initial_servers = c.rr_initial_servers;
  o.batch_size = c.batch_size;
  return o;
}

std::vector<MetricsRow> run_all(const ExperimentConfig& c, const Scenario& s, std::optional<std::uint64_t> seed) {
  if (s.vms.empty()) throw UsageError("scenario has no VMs");
  std::vector<MetricsRow> rows;
  for (const std::string& name : c.schedulers) {
    const std::string canon = canonical_scheduler(name);
    rows.push_back(measure(s, run_scheduler(s, canon, run_options(c, seed)), canon));
  }
  return rows;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results keep index order.
template <class Fn>
auto parallel_map(std::size_t n, std::size_t jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  std::vector<decltype(fn(std::size_t{}))> out(n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  for (std::size_t start = 0; start < n; start += jobs) {
    std::vector<std::future<decltype(fn(std::size_t{}))>> wave;
    for (std::size_t i = start; i < std::min(n, start + jobs); ++i) wave.push_back(std::async(std::launch::async, fn, i));
    for (std::size_t i = 0; i < wave.size(); ++i) out[start + i] = wave[i].get();
  }
  return out;
}

std::vector<MetricsRow> average(const std::vector<std::vector<MetricsRow>>& runs) {
  std::vector<MetricsRow> mean = runs.front();
  for (std::size_t r = 0; r < mean.size(); ++r) {
    MetricsRow acc;
    acc.scheduler = mean[r].scheduler;
    for (const auto& run : runs) {
      acc.energy += run[r].energy;
      acc.penalty += run[r].penalty;
      acc.total += run[r].total;
      acc.worst_deg += run[r].worst_deg;
      acc.servers += run[r].servers;
      acc.makespan += run[r].makespan;
      acc.violation += run[r].violation;
    }
    const double k = static_cast<double>(runs.size());
    acc.energy /= k;
    acc.penalty /= k;
    acc.total /= k;
    acc.worst_deg /= k;
    acc.servers /= k;
    acc.makespan /= k;
    acc.violation /= k;
    mean[r] = acc;
  }
  return mean;
}

// The scenario/config for one sweep cell.
std::pair<ExperimentConfig, Scenario> sweep_cell(const ExperimentConfig& c, double value, std::optional<std::uint64_t> seed) {
  ExperimentConfig cell = c;
  const std::string& axis = c.sweep.axis;
  if (axis == "sigma") {
    cell.source.distribution = "normal";
    cell.source.dist_param = value;
  } else if (axis == "lambda") {
    cell.source.distribution = "exponential";
    cell.source.dist_param = value;
  } else if (axis == "density") {
    cell.source.generator.n_vms = static_cast<std::size_t>(std::llround(value));
  } else if (axis == "beta") {
    cell.beta = value;
  } else if (axis == "batch_size") {
    cell.batch_size = static_cast<std::size_t>(std::llround(value));
  }
  return {cell, build_scenario(cell, seed)};
}

std::optional<std::uint64_t> nth_seed(const ExperimentConfig& c, std::size_t k) {
  if (!c.seed) return std::nullopt;
  return *c.seed + k;
}

}  // namespace

MetricsReport compare_experiment(const ExperimentConfig& c) {
  c.validate();
  MetricsReport report;
  report.config = config_to_json(c);
  report.rows = run_all(c, build_scenario(c, c.seed), c.seed);
  return report;
}

MetricsReport sweep_experiment(const ExperimentConfig& c) {
  c.validate();
  if (c.sweep.axis.empty()) throw UsageError("sweep.axis: required");
  const std::size_t nv = c.sweep.values.size(), ns = c.sweep.seeds;
  auto cells = parallel_map(nv * ns, c.jobs, [&](std::size_t i) {
    const auto seed = nth_seed(c, i % ns);
    auto [cell, scenario] = sweep_cell(c, c.sweep.values[i / ns], seed);
    return run_all(cell, scenario, seed);
  });
  MetricsReport report;
  report.config = config_to_json(c);
  report.extra_columns = {c.sweep.axis};
  for (std::size_t v = 0; v < nv; ++v) {
    std::vector<std::vector<MetricsRow>> runs(cells.begin() + static_cast<std::ptrdiff_t>(v * ns),
                                              cells.begin() + static_cast<std::ptrdiff_t>((v + 1) * ns));
    for (MetricsRow& row : average(runs)) {
      report.rows.push_back(row);
      report.extra_values.push_back({c.sweep.values[v]});
    }
  }
  return report;
}

MetricsReport online_experiment(const ExperimentConfig& c) {
  ExperimentConfig base = c;
  if (base.sweep.axis.empty()) {
    base.sweep.axis = "batch_size";
    base.sweep.values = {static_cast<double>(c.batch_size)};
  }
  if (base.sweep.axis != "batch_size") throw UsageError("sweep.axis: online replays sweep batch_size only");
  for (std::size_t i = 0; i < base.schedulers.size(); ++i) {
    const std::string n = canonical_scheduler(base.schedulers[i]);
    if (n != "OBPV" && n != "OMIC" && n != "IVP" && n != "BPV") {
      throw UsageError("schedulers[" + std::to_string(i) + "]: online replays take OBPV, OMIC, IVP (and BPV as reference)");
    }
  }
  return sweep_experiment(base);
}

Json run_document(const ExperimentConfig& c) {
  c.validate();
  if (c.schedulers.size() != 1) throw UsageError("schedulers: run takes exactly one scheduler");
  const Scenario s = build_scenario(c, c.seed);
  const std::string name = canonical_scheduler(c.schedulers.front());
  const Assignment a = run_scheduler(s, name, run_options(c, c.seed));
  const ExecutionTrace trace = simulate(s, a);
  const CostBreakdown cost = evaluate_cost(trace, s);
  const MetricsRow row = measure(s, a, name);

  Json doc;
  doc["config"] = config_to_json(c);
  doc["scheduler"] = name;
  doc["assignment"] = assignment_to_json(a);
  Json servers = Json::array();
  for (const ServerTrace& st : trace.servers) {
    Json segs = Json::array();
    for (const Segment& seg : st.segments) {
      segs.push_back({{"start", round_sig(seg.start)},
                      {"end", round_sig(seg.end)},
                      {"running", seg.running},
                      {"cpu_demand", round_sig(seg.cpu_demand)}});
    }
    servers.push_back({{"server", st.server},
                       {"energy", round_sig(cost.per_server_energy.at(st.server))},
                       {"violation_time", round_sig(violation_time(st))},
                       {"segments", std::move(segs)}});
  }
  doc["servers"] = std::move(servers);
  Json completions = Json::array();
  for (auto& [vm, t] : trace.completions) {
    completions.push_back({{"vm", vm}, {"completion", round_sig(t)}, {"penalty", round_sig(cost.per_vm_penalty.at(vm))}});
  }
  doc["completions"] = std::move(completions);
  doc["cost"] = {{"energy", round_sig(cost.energy)}, {"penalty", round_sig(cost.penalty)}, {"total", round_sig(cost.total)}};
  doc["metrics"] = {{"worst_deg", round_sig(row.worst_deg)},
                    {"servers", row.servers},
                    {"makespan", round_sig(row.makespan)},
                    {"violation", round_sig(row.violation)}};
  return doc;
}

}  // namespace vmsched
