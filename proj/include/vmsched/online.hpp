#pragma once

// Arrival-driven scheduling: OBPV and OMIC place each VM on arrival, IVP
// re-plans batches together with reserved VMs using a profit metric.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "vmsched/assignment.hpp"
#include "vmsched/model.hpp"
#include "vmsched/offline.hpp"

namespace vmsched {

struct ClusterState {
  double now = 0.0;
  // Placements of VMs that have started; never changed afterwards.
  Assignment started;
  // Tentative placements of VMs that arrive after `now`.
  std::map<VmId, ServerId> planned;

  explicit ClusterState(std::size_t vm_count = 0) : started(vm_count) {}

  // Servers holding started or planned VMs.
  std::set<ServerId> active_servers() const;
  // started ∪ planned as one assignment.
  Assignment combined() const;
};

enum class OnlinePolicy { OBPV, OMIC, IVP };

std::string to_string(OnlinePolicy p);
OnlinePolicy online_policy_from_string(const std::string& name);

// Places each VM of `batch` (all arriving at state.now) immediately with the
// first-fit (OBPV) or minimum-increment (OMIC) rule.
ClusterState online_step(const Scenario& scenario, const ClusterState& state,
                         std::span<const VmId> batch, OnlinePolicy policy);

// Profit of moving unallocated vm onto a host holding `host_residents`:
// Cost(vm alone) - AddCost(host, vm); -infinity when infeasible.
double profit(const Scenario& scenario, std::span<const VmId> host_residents, VmId vm);

struct IvpStats {
  std::size_t rounds = 0;
  std::size_t profit_evaluations = 0;
  std::size_t hosts = 0;       // physical + virtual servers considered
  std::size_t candidates = 0;  // VMs re-planned
};

struct IvpOptions {
  // When false, only active physical servers may receive VMs in the greedy
  // loop; whatever is left is then planned among fresh servers. This is the
  // centralized counterpart of the distributed protocol.
  bool virtual_hosts = true;
};

// Re-plans batch ∪ reserved ∪ previously planned VMs from scratch; started
// VMs stay put. VMs whose arrival is <= state.now are started afterwards.
ClusterState ivp_plan(const Scenario& scenario, const ClusterState& state,
                      std::span<const VmId> batch, std::span<const VmId> reserved,
                      IvpStats* stats = nullptr, const IvpOptions& options = {});

// Servers hosting a started VM that is still running at `now`.
std::vector<ServerId> running_servers(const Scenario& scenario, const ClusterState& state);

// Started residents of `server` that can still interact with VMs arriving
// at or after state.now (the busy period live at `now`).
std::vector<VmId> live_residents(const Scenario& scenario, const ClusterState& state,
                                 ServerId server);

// IVP over virtual servers only: every VM starts on its own server, leftover
// servers get ids first_id, first_id + 1, ...
std::map<VmId, ServerId> ivp_fresh(const Scenario& scenario, std::span<const VmId> vms,
                                   ServerId first_id, IvpStats* stats = nullptr);

// Moves planned VMs whose arrival has passed into `started`.
void start_due(ClusterState& state, const Scenario& scenario, double now);

struct ReplayOptions {
  OnlinePolicy policy = OnlinePolicy::OMIC;
  // IVP: VMs are revealed in arrival-ordered chunks of this size.
  std::size_t batch_size = 1;
};

struct ReplayResult {
  Assignment assignment;
  std::size_t scheduling_times = 0;
  std::size_t profit_evaluations = 0;
};

// Replays the scenario's arrivals through an online policy.
ReplayResult replay_online(const Scenario& scenario, const ReplayOptions& options);

}  // namespace vmsched
