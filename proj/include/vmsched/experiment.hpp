#pragma once

// Experiment configuration, scheduler dispatch by name, metrics and reports.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vmsched/assignment.hpp"
#include "vmsched/model.hpp"
#include "vmsched/scenario_io.hpp"
#include "vmsched/workload.hpp"

namespace vmsched {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scheduler names accepted everywhere:
//   BPV, BPV_NOMINAL, MIC, MDC, RANDOM (RAND), ROUND_ROBIN (RR), MIE,
//   OBPV, OMIC, IVP.
std::vector<std::string> scheduler_names();
std::string canonical_scheduler(const std::string& name);  // throws UsageError

struct RunOptions {
  std::optional<std::uint64_t> seed;  // RANDOM
  int rr_initial_servers = 0;
  std::size_t batch_size = 1;  // IVP reveal chunk
};

Assignment run_scheduler(const Scenario& scenario, const std::string& name, const RunOptions& options);

struct MetricsRow {
  std::string scheduler;
  double energy = 0, penalty = 0, total = 0, worst_deg = 0;
  double servers = 0;
  double makespan = 0, violation = 0;
};

MetricsRow measure(const Scenario& scenario, const Assignment& assignment, const std::string& name);

struct ScenarioSource {
  std::optional<std::string> file;     // scenario JSON
  std::optional<std::string> fixture;  // built-in name
  std::optional<std::string> trace;    // trace CSV (+ degradation CSV)
  std::optional<std::string> degradation;
  // Generator parameters (used when nothing above is set).
  GeneratorSpec generator;
  std::string distribution = "normal";  // normal | exponential
  double dist_param = 0.2;
  SecondParam second_param = SecondParam::StdDev;
};

struct SweepConfig {
  std::string axis;  // sigma | lambda | density | beta | batch_size
  std::vector<double> values;
  std::size_t seeds = 1;
};

struct ExperimentConfig {
  ScenarioSource source;
  std::optional<double> alpha, beta, tau;
  std::vector<std::string> schedulers{"BPV", "MIC", "MDC"};
  // Required by RANDOM and by generated scenarios.
  std::optional<std::uint64_t> seed;
  int rr_initial_servers = 0;
  std::size_t batch_size = 1;
  SweepConfig sweep;
  std::size_t jobs = 1;

  void validate() const;  // throws UsageError with a field path
};

Json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j);  // throws UsageError with a field path

// Resolves the scenario source with the generator seeded by `seed`.
Scenario build_scenario(const ExperimentConfig& c, std::optional<std::uint64_t> seed);

struct MetricsReport {
  Json config;
  std::vector<std::string> extra_columns;  // e.g. sweep axis, value
  std::vector<std::vector<double>> extra_values;
  std::vector<MetricsRow> rows;
};

// Normalized columns are computed against the BPV row of the same group
// (same extra values); rows without a BPV row in their group use their own
// group's first row.
std::string report_csv(const MetricsReport& report);
Json report_json(const MetricsReport& report);
// Writes <prefix>.csv and <prefix>.json. Throws on an empty report or I/O error.
void emit_report(const MetricsReport& report, const std::filesystem::path& prefix);

MetricsReport compare_experiment(const ExperimentConfig& c);
MetricsReport sweep_experiment(const ExperimentConfig& c);
// batch sizes taken from c.sweep.values when axis == batch_size, otherwise
// the single c.batch_size.
MetricsReport online_experiment(const ExperimentConfig& c);

// Full trace + cost document for a single scheduler.
Json run_document(const ExperimentConfig& c);

// 10 significant digits.
std::string format_number(double v);
double round_sig(double v);

}  // namespace vmsched
