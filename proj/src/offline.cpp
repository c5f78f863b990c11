#include "vmsched/offline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace vmsched {

void SchedulerPolicy::validate() const {
  if (kind == Policy::Random && !rng_seed) {
    throw std::invalid_argument("RANDOM scheduler requires rng_seed");
  }
  if (kind != Policy::Random && rng_seed) {
    throw std::invalid_argument("rng_seed is only valid for RANDOM");
  }
}

std::string to_string(Policy p) {
  switch (p) {
    case Policy::BPV: return "BPV";
    case Policy::MIC: return "MIC";
    case Policy::MDC: return "MDC";
    case Policy::Random: return "RANDOM";
    case Policy::RoundRobin: return "ROUND_ROBIN";
    case Policy::MIE: return "MIE";
  }
  return "?";
}

Policy policy_from_string(const std::string& name) {
  for (Policy p : {Policy::BPV, Policy::MIC, Policy::MDC, Policy::Random, Policy::RoundRobin,
                   Policy::MIE}) {
    if (to_string(p) == name) return p;
  }
  if (name == "RAND") return Policy::Random;
  if (name == "RR") return Policy::RoundRobin;
  throw std::invalid_argument("unknown scheduler '" + name + "'");
}

// ---------------------------------------------------------------------------
// Fleet

Fleet::Fleet(const Scenario& scenario) : scenario_(&scenario), assignment_(scenario.size()) {}

Fleet::Fleet(const Scenario& scenario, const Assignment& committed) : Fleet(scenario) {
  assignment_ = committed;
  servers_.resize(static_cast<std::size_t>(committed.next_server_id()));
  for (auto& [s, group] : committed.groups()) {
    Server& srv = servers_[static_cast<std::size_t>(s)];
    srv.residents = group;
    srv.completions = simulate_server(scenario, group, s).completions;
    srv.eval = evaluate_group(scenario, group);
  }
}

void Fleet::place(VmId vm, ServerId server) {
  const auto idx = static_cast<std::size_t>(server);
  if (idx > servers_.size()) throw std::out_of_range("Fleet::place: server id out of range");
  if (idx == servers_.size()) {
    if (scenario_->server_cap && static_cast<int>(servers_.size()) >= *scenario_->server_cap) {
      throw ServerCapExceeded("server cap of " + std::to_string(*scenario_->server_cap) +
                              " exhausted while placing vm " + std::to_string(vm));
    }
    servers_.emplace_back();
  }
  Server& srv = servers_[idx];
  auto pos = std::lower_bound(srv.residents.begin(), srv.residents.end(), vm);
  srv.residents.insert(pos, vm);
  srv.completions = simulate_server(*scenario_, srv.residents, server).completions;
  srv.eval = evaluate_group(*scenario_, srv.residents);
  assignment_.assign(vm, server);
}

bool Fleet::fits_at_arrival(ServerId server, VmId vm, DurationModel model) const {
  const Scenario& sc = *scenario_;
  const VmRequest& req = sc.vm(vm);
  const Server& srv = servers_[static_cast<std::size_t>(server)];
  const std::size_t dims = sc.server.capacity.size();
  std::vector<double> load(req.demand.begin(), req.demand.end());
  load.resize(dims, 0.0);
  for (VmId r : srv.residents) {
    const VmRequest& res = sc.vm(r);
    const double done = model == DurationModel::Nominal ? res.arrival + res.work
                                                        : srv.completions.at(r);
    if (res.arrival > req.arrival || done <= req.arrival + kTimeEps) continue;
    for (std::size_t k = 0; k < dims && k < res.demand.size(); ++k) load[k] += res.demand[k];
  }
  for (std::size_t k = 0; k < dims; ++k) {
    if (load[k] > sc.server.capacity[k] + kTimeEps) return false;
  }
  return true;
}

double Fleet::increment(ServerId server, VmId vm, const Scenario& costing) const {
  const Server& srv = servers_[static_cast<std::size_t>(server)];
  if (&costing == scenario_) return add_cost(costing, srv.residents, srv.eval, vm);
  // A differently weighted objective (MIE) needs its own baseline.
  return add_cost(costing, srv.residents, evaluate_group(costing, srv.residents), vm);
}

ServerId place_first_fit(Fleet& fleet, VmId vm, DurationModel model) {
  const auto n = static_cast<ServerId>(fleet.server_count());
  for (ServerId s = 0; s < n; ++s) {
    if (fleet.fits_at_arrival(s, vm, model)) {
      fleet.place(vm, s);
      return s;
    }
  }
  fleet.place(vm, n);
  return n;
}

ServerId place_min_increment(Fleet& fleet, VmId vm, const Scenario& costing) {
  const auto n = static_cast<ServerId>(fleet.server_count());
  const double open_cost = standalone_cost(costing, vm);
  ServerId best = -1;
  double best_inc = kInfeasible;
  for (ServerId s = 0; s < n; ++s) {
    if (fleet.residents(s).empty()) continue;
    const double inc = fleet.increment(s, vm, costing);
    if (inc < best_inc) {
      best_inc = inc;
      best = s;
    }
  }
  if (best >= 0 && cost_le(best_inc, open_cost)) {
    fleet.place(vm, best);
    return best;
  }
  fleet.place(vm, n);
  return n;
}

// ---------------------------------------------------------------------------

Assignment bpv_schedule(const Scenario& scenario, DurationModel model) {
  Fleet fleet(scenario);
  for (VmId vm : arrival_order(scenario)) place_first_fit(fleet, vm, model);
  return fleet.assignment();
}

Assignment mic_schedule(const Scenario& scenario) {
  Fleet fleet(scenario);
  for (VmId vm : arrival_order(scenario)) place_min_increment(fleet, vm, scenario);
  return fleet.assignment();
}

namespace {

struct Group {
  std::vector<VmId> members;  // ascending
  GroupEval eval;
  bool alive = true;
};

bool disjoint_in_time(const GroupEval& a, const GroupEval& b) {
  return a.last_end <= b.first_start || b.last_end <= a.first_start;
}

double snap_zero(double gain, double scale) {
  return std::abs(gain) <= kCostRelEps * std::max(1.0, scale) ? 0.0 : gain;
}

double gain_of(const Scenario& scenario, const Group& u, const Group& v) {
  if (!u.eval.feasible || !v.eval.feasible) return kNegInfeasible;
  // Lifetimes that never overlap merge into the concatenation of both traces.
  if (disjoint_in_time(u.eval, v.eval)) return 0.0;
  std::vector<VmId> joined;
  joined.reserve(u.members.size() + v.members.size());
  std::merge(u.members.begin(), u.members.end(), v.members.begin(), v.members.end(),
             std::back_inserter(joined));
  const GroupEval merged = evaluate_group(scenario, joined);
  if (!merged.feasible) return kNegInfeasible;
  const double separate = u.eval.total + v.eval.total;
  return snap_zero(separate - merged.total, separate);
}

}  // namespace

double merge_gain(const Scenario& scenario, std::span<const VmId> group_u,
                  std::span<const VmId> group_v) {
  Group u{{group_u.begin(), group_u.end()}, {}, true};
  Group v{{group_v.begin(), group_v.end()}, {}, true};
  std::sort(u.members.begin(), u.members.end());
  std::sort(v.members.begin(), v.members.end());
  for (VmId a : u.members) {
    if (std::binary_search(v.members.begin(), v.members.end(), a)) {
      throw std::invalid_argument("merge_gain: vm " + std::to_string(a) + " is in both groups");
    }
  }
  u.eval = evaluate_group(scenario, u.members);
  v.eval = evaluate_group(scenario, v.members);
  return gain_of(scenario, u, v);
}

Assignment mdc_schedule(const Scenario& scenario) {
  const std::size_t n = scenario.size();
  std::vector<Group> groups(n);
  for (std::size_t i = 0; i < n; ++i) {
    groups[i].members = {static_cast<VmId>(i)};
    groups[i].eval = evaluate_group(scenario, groups[i].members);
  }
  // gain[u][v] for u < v; slots keep their index after a merge, so the
  // lexicographic tie rule over live slots is stable.
  std::vector<std::vector<double>> gain(n, std::vector<double>(n, kNegInfeasible));
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) gain[u][v] = gain_of(scenario, groups[u], groups[v]);
  }

  while (true) {
    double best = kNegInfeasible;
    std::size_t bu = n, bv = n;
    for (std::size_t u = 0; u < n; ++u) {
      if (!groups[u].alive) continue;
      for (std::size_t v = u + 1; v < n; ++v) {
        if (!groups[v].alive) continue;
        if (gain[u][v] > best) {
          best = gain[u][v];
          bu = u;
          bv = v;
        }
      }
    }
    if (bu == n || !(best >= 0.0)) break;

    Group& target = groups[bu];
    Group& absorbed = groups[bv];
    std::vector<VmId> joined;
    std::merge(target.members.begin(), target.members.end(), absorbed.members.begin(),
               absorbed.members.end(), std::back_inserter(joined));
    target.members = std::move(joined);
    target.eval = evaluate_group(scenario, target.members);
    absorbed.alive = false;
    absorbed.members.clear();

    for (std::size_t w = 0; w < n; ++w) {
      if (w == bu || !groups[w].alive) continue;
      const double g = gain_of(scenario, groups[std::min(w, bu)], groups[std::max(w, bu)]);
      gain[std::min(w, bu)][std::max(w, bu)] = g;
    }
  }

  Assignment out(n);
  ServerId next = 0;
  for (const Group& g : groups) {
    if (!g.alive) continue;
    for (VmId vm : g.members) out.assign(vm, next);
    ++next;
  }
  return out;
}

Assignment baseline_schedule(const Scenario& scenario, Policy policy,
                             const BaselineOptions& options) {
  switch (policy) {
    case Policy::Random: {
      if (!options.seed) throw std::invalid_argument("RANDOM scheduler requires a seed");
      std::mt19937_64 rng(*options.seed);
      Fleet fleet(scenario);
      for (VmId vm : arrival_order(scenario)) {
        std::vector<ServerId> feasible;
        for (ServerId s = 0; s < static_cast<ServerId>(fleet.server_count()); ++s) {
          if (fleet.fits_at_arrival(s, vm, DurationModel::InterferenceAware)) feasible.push_back(s);
        }
        std::uniform_int_distribution<std::size_t> pick(0, feasible.size());
        const std::size_t k = pick(rng);
        fleet.place(vm, k < feasible.size() ? feasible[k]
                                            : static_cast<ServerId>(fleet.server_count()));
      }
      return fleet.assignment();
    }
    case Policy::RoundRobin: {
      Fleet fleet(scenario);
      // Pre-opened servers are represented by a count; they hold no VMs yet.
      std::size_t open = static_cast<std::size_t>(std::max(0, options.initial_servers));
      std::size_t cursor = 0;
      Assignment out(scenario.size());
      std::vector<ServerId> fleet_id(open, -1);  // round-robin slot -> fleet server
      for (VmId vm : arrival_order(scenario)) {
        bool placed = false;
        for (std::size_t step = 0; step < open && !placed; ++step) {
          const std::size_t slot = (cursor + step) % open;
          ServerId s = fleet_id[slot];
          if (s < 0 || fleet.fits_at_arrival(s, vm, DurationModel::InterferenceAware)) {
            if (s < 0) {
              s = static_cast<ServerId>(fleet.server_count());
              fleet_id[slot] = s;
            }
            fleet.place(vm, s);
            out.assign(vm, static_cast<ServerId>(slot));
            cursor = (slot + 1) % open;
            placed = true;
          }
        }
        if (!placed) {
          const auto s = static_cast<ServerId>(fleet.server_count());
          fleet.place(vm, s);
          fleet_id.push_back(s);
          out.assign(vm, static_cast<ServerId>(open));
          ++open;
          cursor = 0;
        }
      }
      return out;
    }
    case Policy::MIE: {
      Scenario energy_only = scenario;
      energy_only.cost.beta = 0.0;
      Fleet fleet(energy_only);
      for (VmId vm : arrival_order(energy_only)) place_min_increment(fleet, vm, energy_only);
      return fleet.assignment();
    }
    default:
      throw std::invalid_argument("baseline_schedule: " + to_string(policy) +
                                  " is not a baseline policy");
  }
}

Assignment schedule(const Scenario& scenario, const SchedulerPolicy& policy) {
  policy.validate();
  switch (policy.kind) {
    case Policy::BPV: return bpv_schedule(scenario, policy.duration_model);
    case Policy::MIC: return mic_schedule(scenario);
    case Policy::MDC: return mdc_schedule(scenario);
    case Policy::Random: return baseline_schedule(scenario, policy.kind, {policy.rng_seed, 0});
    case Policy::RoundRobin:
    case Policy::MIE: return baseline_schedule(scenario, policy.kind, {});
  }
  throw std::logic_error("unreachable");
}

}  // namespace vmsched
