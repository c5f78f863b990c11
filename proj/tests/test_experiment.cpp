#include <filesystem>

#include "doctest.h"
#include "vmsched/experiment.hpp"

using namespace vmsched;

namespace {

ExperimentConfig fixture_config(const std::string& name, std::vector<std::string> schedulers) {
  ExperimentConfig c;
  c.source.fixture = name;
  c.schedulers = std::move(schedulers);
  return c;
}

}  // namespace

TEST_CASE("compare on the four-VM fixture: MDC has the minimum total") {
  const MetricsReport r = compare_experiment(fixture_config("fig4", {"BPV", "MIC", "MDC"}));
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[2].scheduler == "MDC");
  CHECK(r.rows[2].total < r.rows[0].total);
  CHECK(r.rows[2].total < r.rows[1].total);
  const Json j = report_json(r);
  CHECK(j["rows"][0]["total_norm"] == 1.0);
  CHECK(j["rows"][0]["energy_norm"] == 1.0);
  CHECK(j["rows"][2]["energy"] == 5862.0);
  CHECK(j["config"]["scenario"]["fixture"] == "fig4");
}

TEST_CASE("single row normalizes to one") {
  const MetricsReport r = compare_experiment(fixture_config("fig3", {"MIC"}));
  const std::string csv = report_csv(r);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "scheduler,energy,penalty,total,worst_deg,servers,makespan,violation,energy_norm,penalty_norm,"
        "total_norm,worst_deg_norm,servers_norm,makespan_norm,violation_norm");
  const std::string row = csv.substr(csv.find('\n') + 1);
  CHECK(row.find(",1,1,1,1,1,1,1\n") != std::string::npos);
}

TEST_CASE("empty reports are rejected") {
  MetricsReport r;
  CHECK_THROWS_AS(report_csv(r), UsageError);
  ExperimentConfig c;
  c.seed = 1;
  c.source.generator.n_vms = 0;
  CHECK_THROWS_AS(compare_experiment(c), UsageError);
}

TEST_CASE("config validation") {
  ExperimentConfig c = fixture_config("fig4", {"RANDOM"});
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.seed = 3;
  CHECK_NOTHROW(c.validate());
  c.schedulers = {"NOPE"};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("schedulers[0]"), UsageError);
  ExperimentConfig g;
  CHECK_THROWS_AS(g.validate(), UsageError);  // generated scenario, no seed

  CHECK_THROWS_WITH_AS(config_from_json(Json::parse(R"({"seed":1,"sweep":{"axis":"x","values":[1]}})")), doctest::Contains("sweep"),
                       UsageError);
  CHECK_THROWS_WITH_AS(config_from_json(Json::parse(R"({"scenario":{"fixture":"fig4","bogus":1}})")),
                       doctest::Contains("scenario.bogus"), UsageError);
  CHECK_THROWS_WITH_AS(config_from_json(Json::parse(R"({"seed":"a"})")), doctest::Contains("seed"), UsageError);
}

TEST_CASE("config JSON round-trips") {
  ExperimentConfig c;
  c.seed = 9;
  c.source.generator.n_vms = 30;
  c.source.distribution = "exponential";
  c.source.dist_param = 10;
  c.beta = 2;
  c.schedulers = {"BPV", "RANDOM"};
  c.sweep = {"beta", {1, 2}, 2};
  const Json j = config_to_json(c);
  CHECK(config_to_json(config_from_json(j)) == j);
}

TEST_CASE("run documents are reproducible") {
  ExperimentConfig c;
  c.seed = 4;
  c.source.generator.n_vms = 25;
  c.schedulers = {"RANDOM"};
  CHECK(run_document(c).dump() == run_document(c).dump());
  c.schedulers = {"BPV", "MIC"};
  CHECK_THROWS_AS(run_document(c), UsageError);
}

TEST_CASE("beta sweep leaves interference-blind placements unchanged") {
  ExperimentConfig c;
  c.seed = 2;
  c.source.generator.n_vms = 40;
  c.schedulers = {"BPV", "RANDOM", "RR", "MIE", "MIC"};
  c.sweep = {"beta", {0.5, 1, 4}, 1};
  const MetricsReport r = sweep_experiment(c);
  REQUIRE(r.rows.size() == 15);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(r.rows[k].worst_deg == r.rows[5 + k].worst_deg);
    CHECK(r.rows[k].worst_deg == r.rows[10 + k].worst_deg);
  }
}

TEST_CASE("sweep averages seeds and is order-stable under parallel jobs") {
  ExperimentConfig c;
  c.seed = 1;
  c.source.generator.n_vms = 20;
  c.schedulers = {"BPV", "MIC"};
  c.sweep = {"sigma", {0.2, 0.6}, 3};
  const std::string serial = report_csv(sweep_experiment(c));
  c.jobs = 3;
  CHECK(report_csv(sweep_experiment(c)) == serial);
}

TEST_CASE("online report sweeps batch sizes") {
  ExperimentConfig c;
  c.seed = 5;
  c.source.generator.n_vms = 30;
  c.schedulers = {"OMIC", "IVP"};
  c.sweep = {"batch_size", {1, 4}, 1};
  const MetricsReport r = online_experiment(c);
  CHECK(r.rows.size() == 4);
  CHECK(r.rows[0].total == r.rows[2].total);  // OMIC ignores n_r
  c.schedulers = {"MDC"};
  CHECK_THROWS_AS(online_experiment(c), UsageError);
}

TEST_CASE("emit_report writes both files") {
  const auto prefix = std::filesystem::temp_directory_path() / "vmsched_report";
  emit_report(compare_experiment(fixture_config("fig4", {"BPV", "MDC"})), prefix);
  CHECK(std::filesystem::exists(prefix.string() + ".csv"));
  CHECK(std::filesystem::exists(prefix.string() + ".json"));
  CHECK_THROWS(emit_report(compare_experiment(fixture_config("fig4", {"BPV"})), "/nonexistent/dir/x"));
}

TEST_CASE("number formatting uses 10 significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.3333333333");
  CHECK(format_number(7348) == "7348");
  CHECK(round_sig(2.0 / 3.0) == 0.6666666667);
}
