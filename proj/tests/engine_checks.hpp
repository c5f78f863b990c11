#pragma once

// Independent recomputations from completion times alone, shared by the
// engine unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "vmsched/engine.hpp"

namespace testing {

// Running set of one server at time t, derived from arrivals and completions.
inline std::vector<vmsched::VmId> running_at(const vmsched::Scenario& s, const std::vector<vmsched::VmId>& group,
                                             const vmsched::ExecutionTrace& tr, double t) {
  std::vector<vmsched::VmId> out;
  for (vmsched::VmId j : group) {
    if (s.vm(j).arrival <= t && t < tr.completions.at(j)) out.push_back(j);
  }
  return out;
}

// Max over VMs of |integral of progress rate - work| / work.
inline double work_conservation_error(const vmsched::Scenario& s, const vmsched::Assignment& a,
                                      const vmsched::ExecutionTrace& tr) {
  double worst = 0;
  for (auto& [server, group] : a.groups()) {
    std::set<double> cuts;
    for (vmsched::VmId j : group) {
      cuts.insert(s.vm(j).arrival);
      cuts.insert(tr.completions.at(j));
    }
    std::vector<double> ts(cuts.begin(), cuts.end());
    std::vector<double> done(s.size(), 0.0);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const double mid = 0.5 * (ts[i] + ts[i + 1]);
      const auto run = running_at(s, group, tr, mid);
      for (vmsched::VmId j : run) {
        std::vector<vmsched::VmId> others;
        for (vmsched::VmId k : run) {
          if (k != j) others.push_back(k);
        }
        const double rate = 1.0 / (1.0 + vmsched::set_degradation_factor(j, others, s.degradation));
        done[static_cast<std::size_t>(j)] += rate * (ts[i + 1] - ts[i]);
      }
    }
    for (vmsched::VmId j : group) {
      worst = std::max(worst, std::abs(done[static_cast<std::size_t>(j)] - s.vm(j).work) / s.vm(j).work);
    }
  }
  return worst;
}

// Energy by fixed-step midpoint sums of the power curve.
inline double riemann_energy(const vmsched::Scenario& s, const vmsched::Assignment& a,
                             const vmsched::ExecutionTrace& tr, double dt) {
  double energy = 0;
  for (auto& [server, group] : a.groups()) {
    double lo = 1e300, hi = -1e300;
    for (vmsched::VmId j : group) {
      lo = std::min(lo, s.vm(j).arrival);
      hi = std::max(hi, tr.completions.at(j));
    }
    const auto steps = static_cast<long>(std::ceil((hi - lo) / dt));
    for (long k = 0; k < steps; ++k) {
      const double t0 = lo + static_cast<double>(k) * dt;
      const double t1 = std::min(hi, t0 + dt);
      const auto run = running_at(s, group, tr, 0.5 * (t0 + t1));
      if (run.empty()) continue;
      double cpu = 0;
      for (vmsched::VmId j : run) cpu += s.vm(j).cpu();
      energy += vmsched::power_of_utilization(s.server, std::min(1.0, cpu / s.server.cpu())) * (t1 - t0);
    }
  }
  return energy * s.cost.tau;
}

}  // namespace testing
