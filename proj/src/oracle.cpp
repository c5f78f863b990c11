#include "vmsched/oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "vmsched/engine.hpp"

namespace vmsched {

namespace {

struct Search {
  std::size_t n = 0;
  std::size_t limit = 0;
  const std::vector<double>* block_cost = nullptr;  // indexed by bitmask
  std::vector<unsigned> blocks;
  std::vector<int> rgs, best_rgs;
  double best = std::numeric_limits<double>::infinity();
  std::size_t visited = 0;

  void run(std::size_t i, double partial_closed) {
    if (i == n) {
      ++visited;
      double total = partial_closed;
      for (unsigned m : blocks) total += (*block_cost)[m];
      if (total < best) {
        best = total;
        best_rgs = rgs;
      }
      return;
    }
    const unsigned bit = 1u << i;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const unsigned grown = blocks[b] | bit;
      // Prune: a block that is already infeasible stays infeasible.
      if (!std::isfinite((*block_cost)[grown])) continue;
      const unsigned before = blocks[b];
      blocks[b] = grown;
      rgs[i] = static_cast<int>(b);
      run(i + 1, partial_closed);
      blocks[b] = before;
    }
    if (blocks.size() < limit && std::isfinite((*block_cost)[bit])) {
      blocks.push_back(bit);
      rgs[i] = static_cast<int>(blocks.size() - 1);
      run(i + 1, partial_closed);
      blocks.pop_back();
    }
  }
};

}  // namespace

OptimalResult brute_force_optimal(const Scenario& scenario, std::size_t max_servers) {
  const std::size_t n = scenario.size();
  if (n > kBruteForceMaxVms) {
    throw SizeError("brute force is limited to " + std::to_string(kBruteForceMaxVms) +
                    " VMs, got " + std::to_string(n));
  }
  std::size_t limit = max_servers == 0 ? n : max_servers;
  if (scenario.server_cap) limit = std::min(limit, static_cast<std::size_t>(*scenario.server_cap));

  OptimalResult out;
  out.assignment = Assignment(n);
  if (n == 0) return out;

  // Cost of every VM subset on one server, +inf when it violates capacity.
  std::vector<double> block_cost(std::size_t{1} << n, 0.0);
  std::vector<VmId> members;
  for (unsigned mask = 1; mask < block_cost.size(); ++mask) {
    members.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (1u << j)) members.push_back(static_cast<VmId>(j));
    }
    const GroupEval g = evaluate_group(scenario, members);
    block_cost[mask] = g.feasible ? g.total : std::numeric_limits<double>::infinity();
  }

  Search search;
  search.n = n;
  search.limit = limit;
  search.block_cost = &block_cost;
  search.rgs.assign(n, 0);
  search.run(0, 0.0);
  if (search.best_rgs.empty()) throw std::runtime_error("no feasible assignment exists");

  for (std::size_t j = 0; j < n; ++j) out.assignment.assign(static_cast<VmId>(j), search.best_rgs[j]);
  out.total = search.best;
  out.partitions_visited = search.visited;
  return out;
}

double mic_cost_lower_bound(const Scenario& scenario) {
  double lb = 0.0;
  for (const VmRequest& vm : scenario.vms) {
    lb += vm.cpu() / scenario.server.cpu() * scenario.server.p_peak * vm.work * scenario.cost.tau;
  }
  return lb;
}

std::size_t i_max(const Scenario& scenario) {
  if (scenario.vms.empty()) return 0;
  double smallest = std::numeric_limits<double>::infinity();
  for (const VmRequest& vm : scenario.vms) {
    if (vm.cpu() > 0) smallest = std::min(smallest, vm.cpu());
  }
  if (!std::isfinite(smallest)) return scenario.size();
  return static_cast<std::size_t>(std::floor(scenario.server.cpu() / smallest + kTimeEps));
}

}  // namespace vmsched
