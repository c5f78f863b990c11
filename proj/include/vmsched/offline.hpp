#pragma once

// Offline schedulers over a fully known VM list: first-fit bin packing (BPV),
// greedy minimum cost increment (MIC), pairwise server merging (MDC), and the
// Random / Round-Robin / minimum-energy-increment (MIE) baselines.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmsched/assignment.hpp"
#include "vmsched/engine.hpp"
#include "vmsched/model.hpp"

namespace vmsched {

enum class Policy { BPV, MIC, MDC, Random, RoundRobin, MIE };

// How a scheduler predicts when already placed VMs leave their server.
// Nominal assumes completion = arrival + work and ignores interference.
enum class DurationModel { Nominal, InterferenceAware };

struct SchedulerPolicy {
  Policy kind = Policy::BPV;
  std::optional<std::uint64_t> rng_seed;  // required for Random only
  DurationModel duration_model = DurationModel::InterferenceAware;

  void validate() const;
};

std::string to_string(Policy p);
Policy policy_from_string(const std::string& name);  // throws std::invalid_argument

inline constexpr double kNegInfeasible = -std::numeric_limits<double>::infinity();

Assignment bpv_schedule(const Scenario& scenario,
                        DurationModel model = DurationModel::InterferenceAware);
Assignment mic_schedule(const Scenario& scenario);
Assignment mdc_schedule(const Scenario& scenario);

// Cost(u) + Cost(v) - Cost(u ∪ v), each server simulated alone. Returns
// -infinity when the union violates capacity. Throws std::invalid_argument
// when the groups overlap.
double merge_gain(const Scenario& scenario, std::span<const VmId> group_u,
                  std::span<const VmId> group_v);

struct BaselineOptions {
  std::optional<std::uint64_t> seed;
  // Round-Robin only: number of (empty) servers already open.
  int initial_servers = 0;
};

Assignment baseline_schedule(const Scenario& scenario, Policy policy,
                             const BaselineOptions& options = {});

// Dispatch on policy kind.
Assignment schedule(const Scenario& scenario, const SchedulerPolicy& policy);

// ---------------------------------------------------------------------------
// Incremental fleet shared by the offline and online arrival-order
// schedulers. Holds the residents of every opened server together with a
// cached evaluation, so one placement re-simulates only the servers it
// touches.
class Fleet {
 public:
  explicit Fleet(const Scenario& scenario);
  Fleet(const Scenario& scenario, const Assignment& committed);

  const Scenario& scenario() const { return *scenario_; }
  std::size_t server_count() const { return servers_.size(); }
  const std::vector<VmId>& residents(ServerId s) const { return servers_[static_cast<std::size_t>(s)].residents; }
  const GroupEval& eval(ServerId s) const { return servers_[static_cast<std::size_t>(s)].eval; }
  const Assignment& assignment() const { return assignment_; }

  // Opens a new server when `server` equals server_count(). Honors the
  // scenario's server cap.
  void place(VmId vm, ServerId server);

  // First-fit test at the VM's arrival instant under the given duration model.
  bool fits_at_arrival(ServerId server, VmId vm, DurationModel model) const;

  // Cost increase for vm on an existing server, +infinity when infeasible.
  double increment(ServerId server, VmId vm, const Scenario& costing) const;

 private:
  struct Server {
    std::vector<VmId> residents;
    GroupEval eval;
    std::map<VmId, double> completions;  // interference-aware
  };

  const Scenario* scenario_;
  std::vector<Server> servers_;
  Assignment assignment_;
};

// Single placement rules, shared by the offline loops and the online steps.
ServerId place_first_fit(Fleet& fleet, VmId vm, DurationModel model);
ServerId place_min_increment(Fleet& fleet, VmId vm, const Scenario& costing);

}  // namespace vmsched
