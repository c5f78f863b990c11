#include "vmsched/online.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vmsched/engine.hpp"

namespace vmsched {

std::set<ServerId> ClusterState::active_servers() const {
  std::set<ServerId> out;
  for (ServerId s : started.raw()) {
    if (s != Assignment::kUnassigned) out.insert(s);
  }
  for (auto& [_, s] : planned) out.insert(s);
  return out;
}

Assignment ClusterState::combined() const {
  Assignment out = started;
  for (auto& [vm, s] : planned) out.assign(vm, s);
  return out;
}

std::string to_string(OnlinePolicy p) {
  switch (p) {
    case OnlinePolicy::OBPV: return "OBPV";
    case OnlinePolicy::OMIC: return "OMIC";
    case OnlinePolicy::IVP: return "IVP";
  }
  return "?";
}

OnlinePolicy online_policy_from_string(const std::string& name) {
  for (OnlinePolicy p : {OnlinePolicy::OBPV, OnlinePolicy::OMIC, OnlinePolicy::IVP}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown online policy '" + name + "'");
}

ClusterState online_step(const Scenario& scenario, const ClusterState& state,
                         std::span<const VmId> batch, OnlinePolicy policy) {
  if (policy == OnlinePolicy::IVP) {
    throw std::invalid_argument("online_step handles OBPV and OMIC; use ivp_plan for IVP");
  }
  ClusterState next = state;
  if (batch.empty()) return next;
  std::vector<VmId> ordered(batch.begin(), batch.end());
  std::sort(ordered.begin(), ordered.end());
  for (VmId vm : ordered) {
    if (std::abs(scenario.vm(vm).arrival - state.now) > kTimeEps) {
      throw std::invalid_argument("online_step: vm " + std::to_string(vm) +
                                  " does not arrive at the current time");
    }
  }
  Fleet fleet(scenario, state.started);
  for (VmId vm : ordered) {
    if (policy == OnlinePolicy::OBPV) {
      place_first_fit(fleet, vm, DurationModel::InterferenceAware);
    } else {
      place_min_increment(fleet, vm, scenario);
    }
  }
  next.started = fleet.assignment();
  for (VmId vm : ordered) next.planned.erase(vm);
  return next;
}

double profit(const Scenario& scenario, std::span<const VmId> host_residents, VmId vm) {
  if (std::find(host_residents.begin(), host_residents.end(), vm) != host_residents.end()) {
    throw std::invalid_argument("profit: vm " + std::to_string(vm) +
                                " already sits on the host (own virtual server)");
  }
  const double alone = standalone_cost(scenario, vm);
  const double add = add_cost(scenario, host_residents, evaluate_group(scenario, host_residents), vm);
  if (!std::isfinite(add)) return kNegInfeasible;
  const double p = alone - add;
  return std::abs(p) <= kCostRelEps * std::max(1.0, alone) ? 0.0 : p;
}

namespace {

// VMs of the busy period that is still live at `now`; earlier busy periods
// cannot interact with anything arriving from `now` on.
std::vector<VmId> live_busy_period(const ServerTrace& trace, const Scenario& scenario,
                                   std::span<const VmId> residents) {
  double period_start = trace.first_start();
  for (const Segment& seg : trace.segments) {
    if (seg.running.empty()) period_start = seg.end;
  }
  std::vector<VmId> out;
  for (VmId vm : residents) {
    if (scenario.vm(vm).arrival >= period_start) out.push_back(vm);
  }
  return out;
}

struct Host {
  ServerId id = 0;
  bool is_virtual = false;
  VmId owner = -1;
  std::vector<VmId> residents;
  GroupEval eval;
};

struct PlanResult {
  std::map<VmId, ServerId> placement;
  ServerId next_id = 0;
};

// Greedy profit loop over `hosts` (physical ones first); virtual hosts are
// created for every candidate when `with_virtual` is set. Leftover virtual
// hosts are materialized from `next_id` on.
PlanResult profit_loop(const Scenario& scenario, std::vector<Host> hosts,
                       const std::vector<VmId>& candidates, bool with_virtual, ServerId next_id,
                       IvpStats& stats) {
  const std::size_t physical = hosts.size();
  std::map<VmId, std::size_t> home;
  if (with_virtual) {
    for (VmId vm : candidates) {
      Host h;
      h.is_virtual = true;
      h.owner = vm;
      h.residents = {vm};
      h.eval = evaluate_group(scenario, h.residents);
      home[vm] = hosts.size();
      hosts.push_back(std::move(h));
    }
  }
  stats.hosts += hosts.size();
  stats.candidates += candidates.size();

  const std::size_t nc = candidates.size();
  std::vector<bool> allocated(nc, false);
  std::map<VmId, std::size_t> cand_index;
  for (std::size_t c = 0; c < nc; ++c) cand_index[candidates[c]] = c;

  std::vector<double> alone(nc);
  for (std::size_t c = 0; c < nc; ++c) alone[c] = standalone_cost(scenario, candidates[c]);

  std::vector<std::vector<double>> table(hosts.size(), std::vector<double>(nc, kNegInfeasible));
  auto refresh_row = [&](std::size_t h) {
    const Host& host = hosts[h];
    for (std::size_t c = 0; c < nc; ++c) {
      const VmId vm = candidates[c];
      if (allocated[c] || host.residents.empty() || (host.is_virtual && host.owner == vm)) {
        table[h][c] = kNegInfeasible;
        continue;
      }
      ++stats.profit_evaluations;
      const double add = add_cost(scenario, host.residents, host.eval, vm);
      double p = std::isfinite(add) ? alone[c] - add : kNegInfeasible;
      if (std::isfinite(p) && std::abs(p) <= kCostRelEps * std::max(1.0, alone[c])) p = 0.0;
      table[h][c] = p;
    }
  };
  for (std::size_t h = 0; h < hosts.size(); ++h) refresh_row(h);

  while (true) {
    double best = kNegInfeasible;
    std::size_t bh = hosts.size(), bc = nc;
    for (std::size_t h = 0; h < hosts.size(); ++h) {
      for (std::size_t c = 0; c < nc; ++c) {
        if (allocated[c]) continue;
        if (table[h][c] > best) {
          best = table[h][c];
          bh = h;
          bc = c;
        }
      }
    }
    if (bh == hosts.size() || !(best >= 0.0)) break;
    ++stats.rounds;

    const VmId vm = candidates[bc];
    Host& host = hosts[bh];
    host.residents.insert(std::lower_bound(host.residents.begin(), host.residents.end(), vm), vm);
    host.eval = evaluate_group(scenario, host.residents);
    allocated[bc] = true;
    if (with_virtual) {
      Host& own = hosts[home.at(vm)];
      own.residents.erase(std::remove(own.residents.begin(), own.residents.end(), vm),
                          own.residents.end());
      own.eval = GroupEval{};
      std::fill(table[home.at(vm)].begin(), table[home.at(vm)].end(), kNegInfeasible);
    }
    // A virtual server that received a guest binds its owner to it.
    if (host.is_virtual) {
      auto it = cand_index.find(host.owner);
      if (it != cand_index.end()) allocated[it->second] = true;
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (allocated[c]) {
        for (auto& row : table) row[c] = kNegInfeasible;
      }
    }
    refresh_row(bh);
  }

  PlanResult out;
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    Host& host = hosts[h];
    if (host.residents.empty()) continue;
    ServerId id = host.id;
    if (h >= physical) id = next_id++;
    for (VmId vm : host.residents) {
      if (cand_index.count(vm)) out.placement[vm] = id;
    }
  }
  // Without virtual hosts, leftovers are returned unplaced.
  out.next_id = next_id;
  return out;
}

}  // namespace

std::vector<ServerId> running_servers(const Scenario& scenario, const ClusterState& state) {
  std::vector<ServerId> out;
  for (auto& [s, group] : state.started.groups()) {
    const ServerTrace trace = simulate_server(scenario, group, s);
    const bool live = std::any_of(trace.completions.begin(), trace.completions.end(),
                                  [&](const auto& kv) { return kv.second >= state.now - kTimeEps; });
    if (live) out.push_back(s);
  }
  return out;
}

void start_due(ClusterState& state, const Scenario& scenario, double now) {
  state.now = now;
  for (auto it = state.planned.begin(); it != state.planned.end();) {
    if (scenario.vm(it->first).arrival <= now + kTimeEps) {
      state.started.assign(it->first, it->second);
      it = state.planned.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<VmId> live_residents(const Scenario& scenario, const ClusterState& state,
                                 ServerId server) {
  const std::vector<VmId> group = state.started.residents(server);
  return live_busy_period(simulate_server(scenario, group, server), scenario, group);
}

std::map<VmId, ServerId> ivp_fresh(const Scenario& scenario, std::span<const VmId> vms,
                                   ServerId first_id, IvpStats* stats_out) {
  IvpStats stats;
  std::vector<VmId> sorted(vms.begin(), vms.end());
  std::sort(sorted.begin(), sorted.end());
  PlanResult plan = profit_loop(scenario, {}, sorted, true, first_id, stats);
  if (stats_out) *stats_out = stats;
  return plan.placement;
}

ClusterState ivp_plan(const Scenario& scenario, const ClusterState& state,
                      std::span<const VmId> batch, std::span<const VmId> reserved,
                      IvpStats* stats_out, const IvpOptions& options) {
  for (VmId vm : reserved) {
    if (!(scenario.vm(vm).arrival > state.now)) {
      throw std::invalid_argument("ivp_plan: reserved vm " + std::to_string(vm) +
                                  " must arrive after now");
    }
  }
  std::set<VmId> pool(batch.begin(), batch.end());
  pool.insert(reserved.begin(), reserved.end());
  for (auto& [vm, _] : state.planned) pool.insert(vm);
  for (auto it = pool.begin(); it != pool.end();) {
    it = state.started.assigned(*it) ? pool.erase(it) : std::next(it);
  }
  const std::vector<VmId> candidates(pool.begin(), pool.end());

  std::vector<Host> hosts;
  for (ServerId s : running_servers(scenario, state)) {
    Host h;
    h.id = s;
    h.residents = live_residents(scenario, state, s);
    h.eval = evaluate_group(scenario, h.residents);
    hosts.push_back(std::move(h));
  }

  IvpStats stats;
  ServerId next_id = state.started.next_server_id();
  PlanResult plan =
      profit_loop(scenario, std::move(hosts), candidates, options.virtual_hosts, next_id, stats);
  if (!options.virtual_hosts) {
    std::vector<VmId> leftovers;
    for (VmId vm : candidates) {
      if (!plan.placement.count(vm)) leftovers.push_back(vm);
    }
    PlanResult fresh = profit_loop(scenario, {}, leftovers, true, plan.next_id, stats);
    plan.placement.insert(fresh.placement.begin(), fresh.placement.end());
  }

  ClusterState next = state;
  next.planned.clear();
  for (auto& [vm, s] : plan.placement) next.planned[vm] = s;
  start_due(next, scenario, state.now);
  if (stats_out) *stats_out = stats;
  return next;
}

ReplayResult replay_online(const Scenario& scenario, const ReplayOptions& options) {
  const std::vector<VmId> order = arrival_order(scenario);
  ReplayResult result;
  if (options.policy != OnlinePolicy::IVP) {
    Fleet fleet(scenario);
    double last = -1.0;
    for (VmId vm : order) {
      if (scenario.vm(vm).arrival != last) {
        ++result.scheduling_times;
        last = scenario.vm(vm).arrival;
      }
      if (options.policy == OnlinePolicy::OBPV) {
        place_first_fit(fleet, vm, DurationModel::InterferenceAware);
      } else {
        place_min_increment(fleet, vm, scenario);
      }
    }
    result.assignment = fleet.assignment();
    return result;
  }

  const std::size_t chunk = std::max<std::size_t>(1, options.batch_size);
  const std::size_t n = order.size();
  std::vector<bool> revealed(scenario.size(), false);
  ClusterState state(scenario.size());
  std::size_t first_unstarted = 0;
  std::size_t revealed_upto = 0;  // positions [0, revealed_upto) in `order`
  while (first_unstarted < n) {
    const double t = scenario.vm(order[first_unstarted]).arrival;
    std::size_t last_due = first_unstarted;
    while (last_due + 1 < n && scenario.vm(order[last_due + 1]).arrival <= t) ++last_due;
    revealed_upto = std::max(revealed_upto, std::min(n, (last_due / chunk + 1) * chunk));
    for (std::size_t i = 0; i < revealed_upto; ++i) revealed[static_cast<std::size_t>(order[i])] = true;
    for (const VmRequest& vm : scenario.vms) {
      if (vm.known_at && *vm.known_at <= t) revealed[static_cast<std::size_t>(vm.id)] = true;
    }

    std::vector<VmId> batch, reserved;
    for (VmId vm : order) {
      if (!revealed[static_cast<std::size_t>(vm)] || state.started.assigned(vm)) continue;
      (scenario.vm(vm).arrival <= t ? batch : reserved).push_back(vm);
    }
    state.now = t;
    IvpStats stats;
    state = ivp_plan(scenario, state, batch, reserved, &stats);
    result.profit_evaluations += stats.profit_evaluations;
    ++result.scheduling_times;
    while (first_unstarted < n && state.started.assigned(order[first_unstarted])) ++first_unstarted;
  }
  result.assignment = state.started;
  return result;
}

}  // namespace vmsched
