#include <thread>

#include "doctest.h"
#include "vmsched/distributed.hpp"
#include "vmsched/fixtures.hpp"
#include "vmsched/workload.hpp"

using namespace vmsched;

namespace {

ClusterState at_two() {
  ClusterState st(5);
  st.now = 2;
  st.started.assign(0, 0);
  return st;
}

}  // namespace

TEST_CASE("replanning topology: two decisions onto s1, vm_2 falls back") {
  const Scenario s = fixtures::replanning_example();
  const std::vector<VmId> vms{1, 2, 3};
  for (TransportKind t : {TransportKind::InProcess, TransportKind::Tcp}) {
    const CoordinatorResult r = run_distributed(s, at_two(), vms, t);
    REQUIRE(r.decisions.size() == 2);
    CHECK(r.decisions[0] == DecideMsg{0, 2});
    CHECK(r.decisions[1] == DecideMsg{0, 3});
    CHECK(r.leftovers == std::vector<VmId>{1});
    CHECK(r.plan.at(1) == 1);
    CHECK(r.rounds == 2);
  }
}

TEST_CASE("no clients: the fallback plans everything") {
  const Scenario s = fixtures::four_vm_example();
  const std::vector<VmId> vms{0, 1, 2, 3};
  const CoordinatorResult r = coordinator_run({}, s, vms, 0);
  CHECK(r.plan == ivp_fresh(s, vms, 0));
  CHECK(r.rounds == 0);
}

TEST_CASE("client proposal equals the closed-form idle saving") {
  Scenario s;
  s.vms = {VmRequest{0, 0, 20, {4}, {}}, VmRequest{1, 5, 10, {4}, {}}};
  s.degradation = DegradationMatrix(2);
  ClientState local{0, {0}};
  const std::vector<VmId> res{0};
  const Message m = client_round(s, local, evaluate_group(s, res), {1});
  REQUIRE(std::holds_alternative<ProposeMsg>(m));
  // Alone: (120 + 46) * 10; beside vm_0 only the 46 W dynamic share is added.
  CHECK(std::get<ProposeMsg>(m).profit == doctest::Approx(1200.0));
  CHECK(std::get<ProposeMsg>(m).vm_id == 1);
}

TEST_CASE("a full client never proposes") {
  Scenario s;
  s.vms = {VmRequest{0, 0, 20, {12}, {}}, VmRequest{1, 5, 10, {1}, {}}, VmRequest{2, 6, 3, {4}, {}}};
  s.degradation = DegradationMatrix(3);
  ClientState local{0, {0}};
  const std::vector<VmId> res{0};
  CHECK(std::holds_alternative<NoCandidateMsg>(client_round(s, local, evaluate_group(s, res), {1, 2})));
}

TEST_CASE("client agent rejects an unknown decision") {
  const Scenario s = fixtures::four_vm_example();
  ClientAgent agent({0, {0}});
  agent.handle(InitMsg{scenario_to_json(s), {1, 2}});
  CHECK_THROWS_AS(agent.handle(DecideMsg{0, 3}), ProtocolError);
}

TEST_CASE("coordinator names a misbehaving client") {
  const Scenario s = fixtures::four_vm_example();
  auto [coord, client] = make_inprocess_pair();
  std::thread t([&, c = client.get()] {
    c->receive(std::chrono::milliseconds(1000));
    send_raw(*c, Bytes{0, 0, 0, 3, 'b', 'a', 'd'});
  });
  std::vector<Channel*> handles{coord.get()};
  const std::vector<VmId> vms{1};
  try {
    coordinator_run(handles, s, vms, 1, {std::chrono::milliseconds(1000)});
    FAIL("expected a protocol error");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("client 0") != std::string::npos);
  }
  t.join();
}

TEST_CASE("coordinator times out on a silent client") {
  const Scenario s = fixtures::four_vm_example();
  auto [coord, client] = make_inprocess_pair();
  std::vector<Channel*> handles{coord.get()};
  const std::vector<VmId> vms{1};
  CHECK_THROWS_AS(coordinator_run(handles, s, vms, 1, {std::chrono::milliseconds(30)}), ProtocolError);
}

TEST_CASE("proposals are local: extra clients do not change them") {
  const Scenario s = fixtures::replanning_example();
  const std::vector<VmId> res{0};
  const GroupEval ev = evaluate_group(s, res);
  const Message alone = client_round(s, {0, {0}}, ev, {1, 2, 3});
  ClientAgent a({0, {0}}), b({1, {4}});
  const Json sj = scenario_to_json(s);
  CHECK(a.handle(InitMsg{sj, {1, 2, 3}}) == alone);
  b.handle(InitMsg{sj, {1, 2, 3}});
}

TEST_CASE("distributed plan equals centralized IVP over active servers") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorSpec g;
    g.n_vms = 24;
    g.arrival_hi = 200;
    g.seed = seed;
    const Scenario s = generate_scenario(g);
    const std::vector<VmId> order = arrival_order(s);
    // First half already started (placed by MIC), plan the rest at the
    // arrival of the 13th VM.
    ClusterState st(s.size());
    Fleet fleet(s);
    for (std::size_t i = 0; i < 12; ++i) place_min_increment(fleet, order[i], s);
    st.started = fleet.assignment();
    st.now = s.vm(order[12]).arrival;
    std::vector<VmId> batch{order[12]}, reserved(order.begin() + 13, order.end());
    std::vector<VmId> all(order.begin() + 12, order.end());
    const ClusterState central = ivp_plan(s, st, batch, reserved, nullptr, {false});
    const CoordinatorResult dist = run_distributed(s, st, all, TransportKind::InProcess);
    const Assignment combined = central.combined();
    for (VmId vm : all) CHECK(dist.plan.at(vm) == combined.server_of(vm));
  }
}
