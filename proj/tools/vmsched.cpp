// Command line front end: scenario generation, scheduler runs, comparisons,
// sweeps, online replays, the brute-force check and the distributed demo.

#include <chrono>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vmsched/distributed.hpp"
#include "vmsched/engine.hpp"
#include "vmsched/experiment.hpp"
#include "vmsched/fixtures.hpp"
#include "vmsched/offline.hpp"
#include "vmsched/oracle.hpp"
#include "vmsched/scenario_io.hpp"
#include "vmsched/transport.hpp"
#include "vmsched/workload.hpp"

using namespace vmsched;

namespace {

constexpr int kUsage = 2;
constexpr int kRuntime = 1;

// Flags shared by every scenario-consuming subcommand. Explicit flags
// override values loaded from --config.
struct CommonFlags {
  std::string config_file;
  std::string scenario, fixture, trace, degradation;
  std::size_t n_vms = 0;
  std::string distribution, second_param;
  double param = 0;
  std::uint64_t seed = 0;
  double alpha = 0, beta = 0, tau = 0;
  std::vector<std::string> schedulers;
  int rr_initial = 0;
  std::size_t batch_size = 1;
  std::size_t jobs = 1;

  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app, bool with_schedulers) {
    opts["config"] = app->add_option("--config", config_file, "JSON experiment config")->check(CLI::ExistingFile);
    opts["scenario"] = app->add_option("--scenario", scenario, "scenario JSON file")->check(CLI::ExistingFile);
    opts["fixture"] = app->add_option("--fixture", fixture, "built-in scenario: fig2, fig3, fig4, fig5, spec2006");
    opts["trace"] = app->add_option("--trace", trace, "trace CSV id,arrival,work,cpu_demand[,known_at]")->check(CLI::ExistingFile);
    opts["degradation"] = app->add_option("--degradation", degradation, "dense degradation CSV")->check(CLI::ExistingFile);
    opts["n-vms"] = app->add_option("--n-vms", n_vms, "generated VM count");
    opts["distribution"] = app->add_option("--distribution", distribution, "normal | exponential")
                               ->check(CLI::IsMember({"normal", "exponential"}));
    opts["param"] = app->add_option("--param", param, "sigma (normal) or rate lambda (exponential)");
    opts["second-param"] = app->add_option("--second-param", second_param, "normal parameter meaning: std | var")
                               ->check(CLI::IsMember({"std", "var"}));
    opts["seed"] = app->add_option("--seed", seed, "generator / RANDOM seed");
    opts["alpha"] = app->add_option("--alpha", alpha, "penalty base");
    opts["beta"] = app->add_option("--beta", beta, "penalty weight");
    opts["tau"] = app->add_option("--tau", tau, "energy scale");
    if (with_schedulers) {
      opts["schedulers"] = app->add_option("--schedulers", schedulers, "scheduler list")->delimiter(',');
    }
    opts["rr-initial-servers"] = app->add_option("--rr-initial-servers", rr_initial, "servers open before Round-Robin starts");
    opts["batch-size"] = app->add_option("--batch-size", batch_size, "IVP reveal chunk n_r");
    opts["jobs"] = app->add_option("--jobs", jobs, "parallel sweep cells");
  }

  bool given(const std::string& k) const {
    auto it = opts.find(k);
    return it != opts.end() && it->second->count() > 0;
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (given("config")) c = config_from_json(read_json_file(config_file));
    ScenarioSource& s = c.source;
    auto only = [&](std::optional<std::string>& keep, const std::string& value) {
      s.file.reset();
      s.fixture.reset();
      s.trace.reset();
      keep = value;
    };
    if (given("scenario")) only(s.file, scenario);
    if (given("fixture")) only(s.fixture, fixture);
    if (given("trace")) only(s.trace, trace);
    if (given("degradation")) s.degradation = degradation;
    if (given("n-vms")) s.generator.n_vms = n_vms;
    if (given("distribution")) s.distribution = distribution;
    if (given("param")) s.dist_param = param;
    if (given("second-param")) s.second_param = second_param == "var" ? SecondParam::Variance : SecondParam::StdDev;
    if (given("seed")) c.seed = seed;
    if (given("alpha")) c.alpha = alpha;
    if (given("beta")) c.beta = beta;
    if (given("tau")) c.tau = tau;
    if (given("schedulers")) c.schedulers = schedulers;
    if (given("rr-initial-servers")) c.rr_initial_servers = rr_initial;
    if (given("batch-size")) c.batch_size = batch_size;
    if (given("jobs")) c.jobs = jobs;
    return c;
  }
};

void print_or_write(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

std::vector<VmId> parse_ids(const std::string& csv) {
  std::vector<VmId> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stoi(cell));
    } catch (const std::exception&) {
      throw UsageError("--vms: '" + cell + "' is not an integer");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interference-aware VM scheduling simulator"};
  app.require_subcommand(1);

  // generate
  CommonFlags gen_flags;
  std::string gen_out, gen_trace_out, gen_deg_out;
  CLI::App* gen = app.add_subcommand("generate", "write a scenario JSON (and optional CSVs)");
  gen_flags.attach(gen, false);
  gen->add_option("--out", gen_out, "scenario JSON path (stdout when omitted)");
  gen->add_option("--trace-out", gen_trace_out, "also write the trace CSV");
  gen->add_option("--degradation-out", gen_deg_out, "also write the degradation CSV");

  // run
  CommonFlags run_flags;
  std::string run_scheduler_name = "BPV", run_out;
  CLI::App* run = app.add_subcommand("run", "one scheduler on one scenario: trace + cost JSON");
  run_flags.attach(run, false);
  run->add_option("--scheduler", run_scheduler_name, "scheduler name");
  run->add_option("--out", run_out, "output path (stdout when omitted)");

  // compare
  CommonFlags cmp_flags;
  std::string cmp_out;
  CLI::App* cmp = app.add_subcommand("compare", "scheduler set on one scenario: metrics CSV + JSON");
  cmp_flags.attach(cmp, true);
  cmp->add_option("--out", cmp_out, "output prefix (<prefix>.csv, <prefix>.json); CSV to stdout when omitted");

  // sweep
  CommonFlags sw_flags;
  std::string sw_axis, sw_out;
  std::vector<double> sw_values;
  std::size_t sw_seeds = 1;
  CLI::App* sw = app.add_subcommand("sweep", "parameter sweep averaged over seeds");
  sw_flags.attach(sw, true);
  sw->add_option("--axis", sw_axis, "sigma | lambda | density | beta | batch_size")->required();
  sw->add_option("--values", sw_values, "axis values")->delimiter(',')->required();
  sw->add_option("--seeds", sw_seeds, "runs per value (seeds seed, seed+1, ...)");
  sw->add_option("--out", sw_out, "output prefix; CSV to stdout when omitted");

  // online
  CommonFlags on_flags;
  std::vector<std::string> on_policies{"OBPV", "OMIC", "IVP"};
  std::vector<double> on_batches;
  std::size_t on_seeds = 1;
  std::string on_out;
  CLI::App* on = app.add_subcommand("online", "replay arrivals through OBPV / OMIC / IVP");
  on_flags.attach(on, false);
  on->add_option("--policies", on_policies, "online policies")->delimiter(',');
  on->add_option("--batch-sizes", on_batches, "IVP reveal chunk sizes n_r")->delimiter(',');
  on->add_option("--seeds", on_seeds, "runs per batch size");
  on->add_option("--out", on_out, "output prefix; CSV to stdout when omitted");

  // oracle
  CommonFlags or_flags;
  std::size_t or_max_servers = 0;
  CLI::App* orc = app.add_subcommand("oracle", "brute-force optimum and scheduler gaps (n <= 10)");
  or_flags.attach(orc, true);
  orc->add_option("--max-servers", or_max_servers, "server limit (0 = none)");

  // serve-coordinator
  std::string co_listen, co_scenario, co_vms, co_out;
  std::size_t co_clients = 0;
  int co_first_new = 0;
  double co_timeout = 5.0;
  CLI::App* co = app.add_subcommand("serve-coordinator", "distributed profit plan: coordinator side");
  co->add_option("--listen", co_listen, "host:port")->required();
  co->add_option("--scenario", co_scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  co->add_option("--vms", co_vms, "comma-separated VM ids to plan")->required();
  co->add_option("--clients", co_clients, "number of clients to wait for")->required();
  co->add_option("--first-new-id", co_first_new, "id of the first server the fallback opens");
  co->add_option("--timeout", co_timeout, "seconds to wait for each client message");
  co->add_option("--out", co_out, "plan JSON path (stdout when omitted)");

  // serve-client
  std::string cl_connect, cl_spec;
  double cl_timeout = 5.0;
  CLI::App* cl = app.add_subcommand("serve-client", "distributed profit plan: one server agent");
  cl->add_option("--connect", cl_connect, "host:port")->required();
  cl->add_option("--server-spec", cl_spec, R"(JSON {"server_id": i, "residents": [vm ids]})")
      ->required()
      ->check(CLI::ExistingFile);
  cl->add_option("--timeout", cl_timeout, "seconds to wait for each coordinator message");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (gen->parsed()) {
      ExperimentConfig c = gen_flags.resolve();
      c.validate();
      const Scenario s = build_scenario(c, c.seed);
      print_or_write(scenario_to_json(s).dump(2) + "\n", gen_out);
      if (!gen_trace_out.empty()) save_trace_csv(s.vms, gen_trace_out);
      if (!gen_deg_out.empty()) save_degradation_csv(s.degradation, gen_deg_out);
    } else if (run->parsed()) {
      ExperimentConfig c = run_flags.resolve();
      c.schedulers = {run_scheduler_name};
      print_or_write(run_document(c).dump(2) + "\n", run_out);
    } else if (cmp->parsed()) {
      const MetricsReport r = compare_experiment(cmp_flags.resolve());
      if (cmp_out.empty()) std::cout << report_csv(r);
      else emit_report(r, cmp_out);
    } else if (sw->parsed()) {
      ExperimentConfig c = sw_flags.resolve();
      c.sweep = {sw_axis, sw_values, sw_seeds};
      const MetricsReport r = sweep_experiment(c);
      if (sw_out.empty()) std::cout << report_csv(r);
      else emit_report(r, sw_out);
    } else if (on->parsed()) {
      ExperimentConfig c = on_flags.resolve();
      c.schedulers = on_policies;
      if (!on_batches.empty()) c.sweep = {"batch_size", on_batches, on_seeds};
      else c.sweep.seeds = on_seeds;
      const MetricsReport r = online_experiment(c);
      if (on_out.empty()) std::cout << report_csv(r);
      else emit_report(r, on_out);
    } else if (orc->parsed()) {
      ExperimentConfig c = or_flags.resolve();
      c.validate();
      const Scenario s = build_scenario(c, c.seed);
      const OptimalResult opt = brute_force_optimal(s, or_max_servers);
      Json doc;
      doc["config"] = config_to_json(c);
      doc["optimum"] = {{"total", round_sig(opt.total)},
                        {"assignment", assignment_to_json(opt.assignment)},
                        {"partitions_visited", opt.partitions_visited}};
      doc["lower_bound"] = round_sig(mic_cost_lower_bound(s));
      doc["i_max"] = i_max(s);
      Json rows = Json::array();
      RunOptions ro;
      ro.seed = c.seed;
      ro.rr_initial_servers = c.rr_initial_servers;
      ro.batch_size = c.batch_size;
      for (const std::string& name : c.schedulers) {
        const MetricsRow m = measure(s, run_scheduler(s, name, ro), canonical_scheduler(name));
        rows.push_back({{"scheduler", m.scheduler},
                        {"total", round_sig(m.total)},
                        {"ratio", round_sig(m.total / opt.total)}});
      }
      doc["schedulers"] = std::move(rows);
      std::cout << doc.dump(2) << "\n";
    } else if (co->parsed()) {
      const auto [host, port] = parse_address(co_listen);
      const Scenario s = load_scenario(co_scenario);
      const std::vector<VmId> vms = parse_ids(co_vms);
      for (VmId vm : vms) {
        if (vm < 0 || static_cast<std::size_t>(vm) >= s.size()) throw UsageError("--vms: unknown vm " + std::to_string(vm));
      }
      const auto timeout = std::chrono::milliseconds(static_cast<long>(co_timeout * 1000));
      TcpListener listener(host, port);
      std::cerr << "listening on " << host << ":" << listener.port() << "\n";
      std::vector<std::unique_ptr<Channel>> chans;
      for (std::size_t i = 0; i < co_clients; ++i) chans.push_back(listener.accept(timeout));
      std::vector<Channel*> handles;
      for (auto& ch : chans) handles.push_back(ch.get());
      const CoordinatorResult r = coordinator_run(handles, s, vms, co_first_new, {timeout});
      Json doc;
      doc["config"] = {{"scenario", co_scenario}, {"vms", vms}, {"clients", co_clients}, {"first_new_id", co_first_new}};
      doc["plan"] = plan_to_json(r.plan);
      doc["rounds"] = r.rounds;
      doc["leftovers"] = r.leftovers;
      print_or_write(doc.dump(2) + "\n", co_out);
    } else if (cl->parsed()) {
      const auto [host, port] = parse_address(cl_connect);
      const Json spec = read_json_file(cl_spec);
      ClientState local;
      try {
        local.server_id = spec.at("server_id").get<int>();
        local.residents = spec.at("residents").get<std::vector<VmId>>();
      } catch (const Json::exception& e) {
        throw UsageError(cl_spec + ": expected {\"server_id\": int, \"residents\": [int]}");
      }
      const auto timeout = std::chrono::milliseconds(static_cast<long>(cl_timeout * 1000));
      auto ch = tcp_connect(host, port, timeout);
      const DoneMsg done = run_client(*ch, local, timeout);
      std::cout << Json{{"server_id", local.server_id}, {"plan", plan_to_json(done.plan)}}.dump(2) << "\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return 0;
}
