#include "vmsched/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vmsched {

namespace {

struct Active {
  VmId id;
  double remaining;
};

void check_remaining(const Active& a) {
  if (!std::isfinite(a.remaining) || a.remaining < -kTimeEps) {
    throw std::logic_error("engine invariant: vm " + std::to_string(a.id) +
                           " has remaining work " + std::to_string(a.remaining));
  }
}

void push_segment(const Scenario& scenario, ServerTrace& trace, double start, double end,
                  const std::vector<Active>& running) {
  if (!(end > start)) return;
  Segment seg;
  seg.start = start;
  seg.end = end;
  const std::size_t dims = scenario.server.capacity.size();
  std::vector<double> load(dims, 0.0);
  seg.running.reserve(running.size());
  for (const Active& a : running) {
    seg.running.push_back(a.id);
    const ResourceVector& demand = scenario.vm(a.id).demand;
    for (std::size_t k = 0; k < dims && k < demand.size(); ++k) load[k] += demand[k];
  }
  seg.cpu_demand = load[0];
  seg.utilization = std::min(1.0, load[0] / scenario.server.capacity[0]);
  for (std::size_t k = 0; k < dims; ++k) {
    const double excess = load[k] - scenario.server.capacity[k];
    if (excess > kTimeEps) trace.violations.push_back({start, end, k, excess});
  }
  trace.segments.push_back(std::move(seg));
}

}  // namespace

ServerTrace simulate_server(const Scenario& scenario, std::span<const VmId> residents,
                            ServerId server) {
  ServerTrace trace;
  trace.server = server;
  if (residents.empty()) return trace;

  std::vector<VmId> pending(residents.begin(), residents.end());
  std::stable_sort(pending.begin(), pending.end(), [&](VmId a, VmId b) {
    const double aa = scenario.vm(a).arrival;
    const double ab = scenario.vm(b).arrival;
    return aa < ab || (aa == ab && a < b);
  });

  const DegradationMatrix& d = scenario.degradation;
  std::vector<Active> running;  // kept sorted by id
  std::vector<double> stretch;  // 1 + d_jJ, parallel to running
  std::vector<double> candidate;
  std::size_t next = 0;
  double now = scenario.vm(pending.front()).arrival;

  auto admit = [&](double t) {
    while (next < pending.size() && scenario.vm(pending[next]).arrival <= t) {
      const VmId id = pending[next++];
      auto pos = std::lower_bound(running.begin(), running.end(), id,
                                  [](const Active& a, VmId v) { return a.id < v; });
      running.insert(pos, Active{id, scenario.vm(id).work});
    }
  };

  admit(now);
  while (!running.empty() || next < pending.size()) {
    if (running.empty()) {
      const double t = scenario.vm(pending[next]).arrival;
      push_segment(scenario, trace, now, t, running);
      now = t;
      admit(now);
      continue;
    }

    stretch.assign(running.size(), 1.0);
    for (std::size_t a = 0; a < running.size(); ++a) {
      for (std::size_t b = 0; b < running.size(); ++b) {
        if (a != b) stretch[a] *= 1.0 + d.at(running[a].id, running[b].id);
      }
    }
    candidate.resize(running.size());
    double t_complete = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < running.size(); ++a) {
      candidate[a] = now + running[a].remaining * stretch[a];
      t_complete = std::min(t_complete, candidate[a]);
    }
    const double t_arrive = next < pending.size() ? scenario.vm(pending[next]).arrival
                                                  : std::numeric_limits<double>::infinity();
    const double t_next = std::min(t_complete, t_arrive);
    const double dt = t_next - now;

    push_segment(scenario, trace, now, t_next, running);

    // Completions first (ascending id), then arrivals at the same instant.
    std::vector<Active> still;
    still.reserve(running.size());
    for (std::size_t a = 0; a < running.size(); ++a) {
      Active act = running[a];
      if (candidate[a] <= t_next + kTimeEps) {
        trace.completions[act.id] = t_next;
        continue;
      }
      act.remaining -= dt / stretch[a];
      check_remaining(act);
      still.push_back(act);
    }
    running.swap(still);
    now = t_next;
    admit(now);
  }
  return trace;
}

ExecutionTrace simulate(const Scenario& scenario, const Assignment& assignment) {
  ExecutionTrace out;
  for (auto& [server, residents] : assignment.groups()) {
    ServerTrace st = simulate_server(scenario, residents, server);
    for (auto& [vm, t] : st.completions) {
      out.completions[vm] = t;
      out.makespan = std::max(out.makespan, t);
    }
    out.servers.push_back(std::move(st));
  }
  return out;
}

double server_energy(const ServerTrace& trace, const Scenario& scenario) {
  double energy = 0.0;
  for (const Segment& seg : trace.segments) {
    if (seg.running.empty()) continue;
    energy += power_of_utilization(scenario.server, seg.utilization) * seg.length();
  }
  return energy * scenario.cost.tau;
}

CostBreakdown evaluate_cost(const ExecutionTrace& trace, const Scenario& scenario) {
  CostBreakdown out;
  for (const ServerTrace& st : trace.servers) {
    const double e = server_energy(st, scenario);
    out.per_server_energy[st.server] = e;
    out.energy += e;
  }
  for (auto& [vm, done] : trace.completions) {
    const VmRequest& req = scenario.vm(vm);
    const double p = delay_penalty(done - req.arrival, req.work, scenario.cost);
    out.per_vm_penalty[vm] = p;
    out.penalty += p;
  }
  out.total = out.energy + scenario.cost.beta * out.penalty;
  return out;
}

double violation_time(const ServerTrace& trace) {
  double total = 0.0;
  double last_start = -1.0;
  for (const Violation& v : trace.violations) {
    // Several dimensions may be violated over the same segment.
    if (v.start == last_start) continue;
    last_start = v.start;
    total += v.end - v.start;
  }
  return total;
}

std::map<ServerId, double> capacity_violations(const ExecutionTrace& trace) {
  std::map<ServerId, double> out;
  for (const ServerTrace& st : trace.servers) out[st.server] = violation_time(st);
  return out;
}

GroupEval evaluate_group(const Scenario& scenario, std::span<const VmId> residents) {
  GroupEval g;
  if (residents.empty()) return g;
  const ServerTrace st = simulate_server(scenario, residents);
  g.empty = false;
  g.energy = server_energy(st, scenario);
  for (auto& [vm, done] : st.completions) {
    const VmRequest& req = scenario.vm(vm);
    g.penalty += delay_penalty(done - req.arrival, req.work, scenario.cost);
  }
  g.total = g.energy + scenario.cost.beta * g.penalty;
  g.feasible = st.violations.empty();
  g.first_start = st.first_start();
  g.last_end = st.last_end();
  return g;
}

double add_cost(const Scenario& scenario, std::span<const VmId> residents,
                const GroupEval& current, VmId vm) {
  const VmRequest& req = scenario.vm(vm);
  const double alone = standalone_cost(scenario, vm);
  if (current.empty) {
    return alone;
  }
  // Without any overlap in time the VM runs alone and leaves the residents
  // untouched; idle gaps cost nothing.
  bool fits = true;
  for (std::size_t k = 0; k < req.demand.size() && k < scenario.server.capacity.size(); ++k) {
    if (req.demand[k] > scenario.server.capacity[k] + kTimeEps) fits = false;
  }
  if (current.feasible && fits &&
      (current.last_end <= req.arrival || current.first_start >= req.arrival + req.work)) {
    return alone;
  }
  std::vector<VmId> joined(residents.begin(), residents.end());
  joined.push_back(vm);
  const GroupEval after = evaluate_group(scenario, joined);
  if (!after.feasible) return kInfeasible;
  return after.total - current.total;
}

double incremental_cost(const Scenario& scenario, const Assignment& committed,
                        std::optional<ServerId> target, VmId vm) {
  if (committed.assigned(vm)) {
    throw std::invalid_argument("incremental_cost: vm " + std::to_string(vm) +
                                " is already committed");
  }
  if (!target) return standalone_cost(scenario, vm);
  const std::vector<VmId> residents = committed.residents(*target);
  if (residents.empty()) {
    throw std::out_of_range("incremental_cost: unknown server " + std::to_string(*target));
  }
  return add_cost(scenario, residents, evaluate_group(scenario, residents), vm);
}

}  // namespace vmsched
