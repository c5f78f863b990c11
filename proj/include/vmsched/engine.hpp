#pragma once

// Event-driven execution of an assignment. Each server is simulated
// independently: between two events the running set is fixed and every VM
// progresses at rate 1 / (1 + d_jJ), so completion times are exact up to
// floating point.

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vmsched/assignment.hpp"
#include "vmsched/model.hpp"

namespace vmsched {

struct Segment {
  double start = 0.0;
  double end = 0.0;
  std::vector<VmId> running;  // ascending id
  double cpu_demand = 0.0;
  double utilization = 0.0;  // min(1, cpu_demand / capacity)

  double length() const { return end - start; }
};

struct Violation {
  double start = 0.0;
  double end = 0.0;
  std::size_t dim = 0;
  double excess = 0.0;
};

struct ServerTrace {
  ServerId server = 0;
  // Contiguous from the first arrival to the last completion; idle gaps are
  // kept as segments with an empty running set.
  std::vector<Segment> segments;
  std::vector<Violation> violations;
  std::map<VmId, double> completions;

  double first_start() const { return segments.empty() ? 0.0 : segments.front().start; }
  double last_end() const { return segments.empty() ? 0.0 : segments.back().end; }
};

struct ExecutionTrace {
  std::map<VmId, double> completions;
  std::vector<ServerTrace> servers;  // ascending server id
  double makespan = 0.0;
};

struct CostBreakdown {
  double energy = 0.0;
  double penalty = 0.0;
  double total = 0.0;  // energy + beta * penalty
  std::map<ServerId, double> per_server_energy;
  std::map<VmId, double> per_vm_penalty;
};

// Simulates the residents of one server in isolation.
ServerTrace simulate_server(const Scenario& scenario, std::span<const VmId> residents,
                            ServerId server = 0);

// Simulates every assigned VM. Unassigned VMs are ignored, which lets
// schedulers evaluate partial assignments.
ExecutionTrace simulate(const Scenario& scenario, const Assignment& assignment);

double server_energy(const ServerTrace& trace, const Scenario& scenario);

CostBreakdown evaluate_cost(const ExecutionTrace& trace, const Scenario& scenario);

// Total duration per server during which some resource dimension is over
// capacity.
std::map<ServerId, double> capacity_violations(const ExecutionTrace& trace);
double violation_time(const ServerTrace& trace);

// Cost summary of one server run in isolation.
struct GroupEval {
  double energy = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  bool feasible = true;  // no capacity violation anywhere in the trace
  double first_start = 0.0;
  double last_end = 0.0;
  bool empty = true;
};

GroupEval evaluate_group(const Scenario& scenario, std::span<const VmId> residents);

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Increase of the total cost when `vm` joins `target` (nullopt opens a new
// server). Returns +infinity when the re-simulated server violates capacity.
// Throws std::out_of_range when `target` names a server with no residents.
double incremental_cost(const Scenario& scenario, const Assignment& committed,
                        std::optional<ServerId> target, VmId vm);

// Same, for a resident set whose evaluation is already known. Skips the
// simulation when the VM cannot overlap any resident.
double add_cost(const Scenario& scenario, std::span<const VmId> residents,
                const GroupEval& current, VmId vm);

}  // namespace vmsched
