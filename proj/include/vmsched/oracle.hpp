#pragma once

// Exhaustive optimum for small instances and the analytic bounds used by the
// approximation checks.

#include <cstddef>

#include "vmsched/assignment.hpp"
#include "vmsched/model.hpp"

namespace vmsched {

inline constexpr std::size_t kBruteForceMaxVms = 10;

class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OptimalResult {
  Assignment assignment;  // canonical: server ids follow first appearance
  double total = 0.0;
  std::size_t partitions_visited = 0;
};

// Minimum total cost over all feasible assignments to at most max_servers
// interchangeable servers (0 = no limit beyond the scenario's own cap).
// Throws SizeError above kBruteForceMaxVms VMs, std::runtime_error when no
// feasible assignment exists.
OptimalResult brute_force_optimal(const Scenario& scenario, std::size_t max_servers = 0);

// Sum over VMs of (cpu share) * P_peak * work * tau.
double mic_cost_lower_bound(const Scenario& scenario);

// floor(C_cpu / smallest cpu demand); 0 for an empty scenario.
std::size_t i_max(const Scenario& scenario);

}  // namespace vmsched
