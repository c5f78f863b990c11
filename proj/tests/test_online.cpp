#include "doctest.h"
#include "support.hpp"
#include "vmsched/engine.hpp"
#include "vmsched/fixtures.hpp"
#include "vmsched/offline.hpp"
#include "vmsched/online.hpp"
#include "vmsched/workload.hpp"

using namespace vmsched;
using testing::partition;

namespace {

// State of the replanning example at t = 2: vm_1 runs on server 0.
ClusterState at_two() {
  ClusterState st(5);
  st.now = 2;
  st.started.assign(0, 0);
  return st;
}

}  // namespace

TEST_CASE("profit of vm_3 onto the running server is the round-1 maximum") {
  const Scenario s = fixtures::replanning_example();
  const std::vector<VmId> host{0};
  CHECK(profit(s, host, 2) == doctest::Approx(1560.0));
  CHECK(profit(s, host, 3) == doctest::Approx(960.0));
  CHECK(profit(s, host, 2) > profit(s, host, 3));
  const std::vector<VmId> own{2};
  CHECK_THROWS_AS(profit(s, own, 2), std::invalid_argument);
}

TEST_CASE("replanning at t = 2") {
  const Scenario s = fixtures::replanning_example();
  const std::vector<VmId> batch{1}, reserved{2, 3};
  IvpStats stats;
  const ClusterState next = ivp_plan(s, at_two(), batch, reserved, &stats);
  CHECK(next.started.server_of(1) == 1);  // vm_2 opens a new server
  CHECK(next.planned.at(2) == 0);
  CHECK(next.planned.at(3) == 0);
  CHECK(next.planned.size() == 2);
  CHECK(stats.rounds == 2);
  CHECK(stats.hosts == 4);
}

TEST_CASE("replanning at t = 7 moves vm_4 off server 0") {
  const Scenario s = fixtures::replanning_example();
  ClusterState st(5);
  st.now = 7;
  st.started.assign(0, 0);
  st.started.assign(1, 1);
  st.started.assign(2, 0);
  st.planned[3] = 0;
  const std::vector<VmId> batch{4}, reserved{};
  const ClusterState next = ivp_plan(s, st, batch, reserved);
  CHECK(next.started.server_of(4) == 0);
  CHECK(next.planned.at(3) == 1);
}

TEST_CASE("running servers") {
  const Scenario s = fixtures::replanning_example();
  ClusterState st(5);
  st.started.assign(0, 0);
  st.started.assign(1, 1);
  st.now = 7;
  CHECK(running_servers(s, st) == std::vector<ServerId>{0, 1});  // vm_2 ends exactly at 7
  st.now = 7.5;
  CHECK(running_servers(s, st) == std::vector<ServerId>{0});
}

TEST_CASE("OMIC fed one arrival at a time equals offline MIC") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorSpec g;
    g.n_vms = 20;
    g.arrival_hi = 100;
    g.seed = seed;
    const Scenario s = generate_scenario(g);
    ClusterState st(s.size());
    for (VmId vm : arrival_order(s)) {
      st.now = s.vm(vm).arrival;
      const std::vector<VmId> batch{vm};
      st = online_step(s, st, batch, OnlinePolicy::OMIC);
    }
    CHECK(st.started == mic_schedule(s));
    CHECK(replay_online(s, {OnlinePolicy::OMIC, 1}).assignment == mic_schedule(s));
    CHECK(replay_online(s, {OnlinePolicy::OBPV, 1}).assignment == bpv_schedule(s));
  }
}

TEST_CASE("OBPV reproduces the overlap example's first-fit layout") {
  const Scenario s = fixtures::overlap_example();
  CHECK(partition(replay_online(s, {OnlinePolicy::OBPV, 1}).assignment) == testing::P{{0, 1}, {2}});
}

TEST_CASE("online_step rejects VMs that do not arrive now") {
  const Scenario s = fixtures::four_vm_example();
  ClusterState st(4);
  const std::vector<VmId> batch{1};
  CHECK_THROWS_AS(online_step(s, st, batch, OnlinePolicy::OMIC), std::invalid_argument);
  CHECK_THROWS_AS(online_step(s, st, batch, OnlinePolicy::IVP), std::invalid_argument);
}

TEST_CASE("IVP replay places every VM once and never violates capacity") {
  for (std::size_t nr : {1, 3, 8}) {
    GeneratorSpec g;
    g.n_vms = 40;
    g.arrival_hi = 300;
    g.seed = 9;
    const Scenario s = generate_scenario(g);
    const ReplayResult r = replay_online(s, {OnlinePolicy::IVP, nr});
    CHECK(r.assignment.assigned_count() == s.size());
    for (auto& [_, v] : capacity_violations(simulate(s, r.assignment))) CHECK(v == 0.0);
    CHECK(r.scheduling_times >= 1);
  }
}

TEST_CASE("IVP on an empty cluster matches the fresh planner") {
  const Scenario s = fixtures::four_vm_example();
  ClusterState st(4);
  st.now = 0;
  const std::vector<VmId> batch{0}, reserved{1, 2, 3};
  const ClusterState next = ivp_plan(s, st, batch, reserved);
  const auto fresh = ivp_fresh(s, std::vector<VmId>{0, 1, 2, 3}, 0);
  CHECK(next.combined().server_of(0) == fresh.at(0));
  for (VmId vm : reserved) CHECK(next.planned.at(vm) == fresh.at(vm));
}

TEST_CASE("reserved VMs must lie in the future") {
  const Scenario s = fixtures::replanning_example();
  const std::vector<VmId> batch{1}, reserved{0};
  CHECK_THROWS_AS(ivp_plan(s, at_two(), batch, reserved), std::invalid_argument);
}
