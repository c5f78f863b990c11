#include <cmath>
#include <random>

#include "doctest.h"
#include "engine_checks.hpp"
#include "support.hpp"
#include "vmsched/engine.hpp"
#include "vmsched/fixtures.hpp"
#include "vmsched/workload.hpp"

using namespace vmsched;

TEST_CASE("collocation walkthrough completes at 9, 6, 8") {
  const Scenario s = fixtures::collocation_walkthrough();
  const Assignment a = assignment_from_groups(3, {{0, 1, 2}});
  const ExecutionTrace tr = simulate(s, a);
  CHECK(std::abs(tr.completions.at(0) - 9.0) <= 1e-9);
  CHECK(std::abs(tr.completions.at(1) - 6.0) <= 1e-9);
  CHECK(std::abs(tr.completions.at(2) - 8.0) <= 1e-9);
  CHECK(tr.makespan == doctest::Approx(9.0));

  const CostBreakdown c = evaluate_cost(tr, s);
  // [0,2) and [6,8) hold two VMs (212 W), [2,6) three (258 W), [8,9) one.
  CHECK(c.energy == doctest::Approx(2046.0).epsilon(1e-12));
  const double pen = (std::pow(15.0, 1.25) - 1) + 224 + 224;
  CHECK(c.penalty == doctest::Approx(pen).epsilon(1e-12));
  CHECK(c.penalty == doctest::Approx(476.52).epsilon(1e-4));
  CHECK(c.total == doctest::Approx(2046.0 + pen));

  // Independent slot sum.
  CHECK(testing::riemann_energy(s, a, tr, 1e-3) == doctest::Approx(2046.0).epsilon(1e-3));
}

TEST_CASE("segments cover the busy span with the expected utilization") {
  const Scenario s = fixtures::collocation_walkthrough();
  const std::vector<VmId> all{0, 1, 2};
  const ServerTrace st = simulate_server(s, all);
  REQUIRE(st.segments.size() == 4);
  CHECK(st.segments[0].running == std::vector<VmId>{0, 1});
  CHECK(st.segments[1].running == std::vector<VmId>{0, 1, 2});
  CHECK(st.segments[1].utilization == doctest::Approx(1.0));
  CHECK(st.segments[2].running == std::vector<VmId>{0, 2});
  CHECK(st.segments[3].running == std::vector<VmId>{0});
  CHECK(st.violations.empty());
}

TEST_CASE("four-VM first-fit layout stretches vm_1 to 17") {
  const Scenario s = fixtures::four_vm_example();
  const Assignment a = assignment_from_groups(4, {{0, 1, 3}, {2}});
  const ExecutionTrace tr = simulate(s, a);
  CHECK(tr.completions.at(0) == doctest::Approx(17.0));
  CHECK(tr.completions.at(1) == doctest::Approx(7.0));
  CHECK(tr.completions.at(3) == doctest::Approx(20.0));
  CHECK(tr.completions.at(2) == doctest::Approx(22.0));
  CHECK(evaluate_cost(tr, s).energy == doctest::Approx(7348.0));
}

TEST_CASE("idle gaps cost nothing") {
  Scenario s;
  s.vms = {VmRequest{0, 0, 5, {4}, {}}, VmRequest{1, 10, 5, {4}, {}}};
  s.degradation = DegradationMatrix(2);
  const std::vector<VmId> both{0, 1};
  const ServerTrace st = simulate_server(s, both);
  REQUIRE(st.segments.size() == 3);
  CHECK(st.segments[1].running.empty());
  CHECK(server_energy(st, s) == doctest::Approx(2 * 5 * 166.0));
  CHECK(evaluate_group(s, both).total == doctest::Approx(standalone_cost(s, 0) + standalone_cost(s, 1)));
}

TEST_CASE("over-capacity execution is logged, utilization clamps") {
  Scenario s;
  s.vms = {VmRequest{0, 0, 4, {8}, {}}, VmRequest{1, 1, 2, {8}, {}}};
  s.degradation = DegradationMatrix(2);
  const std::vector<VmId> both{0, 1};
  const ServerTrace st = simulate_server(s, both);
  REQUIRE(st.violations.size() == 1);
  CHECK(st.violations[0].start == doctest::Approx(1.0));
  CHECK(st.violations[0].end == doctest::Approx(3.0));
  CHECK(st.violations[0].excess == doctest::Approx(4.0));
  CHECK(violation_time(st) == doctest::Approx(2.0));
  CHECK(st.segments[1].utilization == 1.0);
  CHECK_FALSE(evaluate_group(s, both).feasible);
}

TEST_CASE("multi-dimensional violations count once per segment") {
  Scenario s;
  s.server.capacity = {12, 10};
  s.vms = {VmRequest{0, 0, 4, {8, 8}, {}}, VmRequest{1, 0, 4, {8, 8}, {}}};
  s.degradation = DegradationMatrix(2);
  const std::vector<VmId> both{0, 1};
  const ServerTrace st = simulate_server(s, both);
  CHECK(st.violations.size() == 2);
  CHECK(violation_time(st) == doctest::Approx(4.0));
}

TEST_CASE("completion and arrival at the same instant") {
  // vm_0 ends exactly when vm_1 arrives; they must never overlap.
  Scenario s;
  s.vms = {VmRequest{0, 0, 3, {8}, {}}, VmRequest{1, 3, 2, {8}, {}}};
  s.degradation = DegradationMatrix(2);
  s.degradation.set(0, 1, 5.0);
  s.degradation.set(1, 0, 5.0);
  const std::vector<VmId> both{0, 1};
  const ServerTrace st = simulate_server(s, both);
  CHECK(st.completions.at(0) == doctest::Approx(3.0));
  CHECK(st.completions.at(1) == doctest::Approx(5.0));
  CHECK(st.violations.empty());
}

TEST_CASE("incremental cost") {
  const Scenario s = fixtures::four_vm_example();
  const Assignment committed = assignment_from_groups(4, {{0}});
  Assignment partial(4);
  partial.assign(0, 0);
  CHECK(incremental_cost(s, partial, std::nullopt, 1) == doctest::Approx(standalone_cost(s, 1)));
  CHECK_THROWS_AS(incremental_cost(s, partial, 3, 1), std::out_of_range);
  CHECK_THROWS_AS(incremental_cost(s, partial, 0, 0), std::invalid_argument);
  // vm_3 (1/3, 19 units, no interference) beside vm_1: dynamic share while
  // they overlap, full power after vm_1 leaves at 16.
  CHECK(incremental_cost(s, partial, 0, 2) == doctest::Approx(46.0 * 13 + 166.0 * 6));
  // vm_2 beside vm_1 at beta = 1.
  CHECK(incremental_cost(s, partial, 0, 1) == doctest::Approx(626.18).epsilon(1e-4));
  (void)committed;
}

TEST_CASE("zero matrix: completion = arrival + work, cost additive in energy") {
  GeneratorSpec g;
  g.n_vms = 30;
  g.arrival_hi = 100;
  g.work_hi = 200;
  g.degradation = NormalDegradation{0.0};
  g.seed = 7;
  const Scenario s = generate_scenario(g);
  Assignment a(s.size());
  for (VmId j = 0; j < 30; ++j) a.assign(j, j % 4);
  const ExecutionTrace tr = simulate(s, a);
  for (const VmRequest& vm : s.vms) CHECK(tr.completions.at(vm.id) == doctest::Approx(vm.arrival + vm.work));
  CHECK(evaluate_cost(tr, s).penalty == 0.0);
}

TEST_CASE("fuzzed conservation") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 50; ++it) {
    GeneratorSpec g;
    g.n_vms = 12;
    g.arrival_hi = 50;
    g.work_lo = 1;
    g.work_hi = 40;
    g.degradation = NormalDegradation{0.5};
    g.seed = rng();
    const Scenario s = generate_scenario(g);
    Assignment a(s.size());
    for (VmId j = 0; j < 12; ++j) a.assign(j, static_cast<ServerId>(rng() % 3));
    const ExecutionTrace tr = simulate(s, a);
    CHECK(testing::work_conservation_error(s, a, tr) < 1e-9);
    for (const VmRequest& vm : s.vms) CHECK(tr.completions.at(vm.id) >= vm.arrival + vm.work - 1e-9);
  }
}
