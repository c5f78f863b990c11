#pragma once

// Profit plan between a coordinator and one client agent per running
// server. Clients only ever price placements onto themselves; whatever no
// client wants is planned by the coordinator among fresh servers.

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "vmsched/engine.hpp"
#include "vmsched/online.hpp"
#include "vmsched/protocol.hpp"
#include "vmsched/transport.hpp"

namespace vmsched {

struct ClientState {
  ServerId server_id = 0;
  std::vector<VmId> residents;
};

// Best self-placement among `unscheduled` (ties: lowest vm id), or
// NoCandidate when every profit is negative or infeasible.
Message client_round(const Scenario& scenario, const ClientState& local, const GroupEval& eval,
                     const std::set<VmId>& unscheduled);

// Sequential client actor; feed it every message the coordinator sends.
class ClientAgent {
 public:
  explicit ClientAgent(ClientState local) : local_(std::move(local)) {}

  // Reply to send back, or nothing once DONE arrived.
  std::optional<Message> handle(const Message& m);

  const ClientState& local() const { return local_; }
  const std::optional<DoneMsg>& done() const { return done_; }

 private:
  Message propose();

  ClientState local_;
  std::optional<Scenario> scenario_;
  GroupEval eval_;
  std::set<VmId> unscheduled_;
  std::optional<DoneMsg> done_;
};

// Runs a client over a channel until DONE; returns the final plan.
DoneMsg run_client(Channel& channel, ClientState local,
                   std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

struct CoordinatorOptions {
  std::chrono::milliseconds timeout{5000};
};

struct CoordinatorResult {
  std::map<VmId, ServerId> plan;
  std::vector<DecideMsg> decisions;
  std::vector<VmId> leftovers;
  std::size_t rounds = 0;
};

// `first_new_id` is the id given to the first server opened by the fallback.
CoordinatorResult coordinator_run(std::span<Channel* const> clients, const Scenario& scenario,
                                  std::span<const VmId> vms, ServerId first_new_id,
                                  const CoordinatorOptions& options = {});

enum class TransportKind { InProcess, Tcp };

// Spins up one client per running server of `state` (residents = live busy
// period) plus the coordinator, plans `vms`, and returns the coordinator's
// view. Client threads are joined before returning.
CoordinatorResult run_distributed(const Scenario& scenario, const ClusterState& state,
                                  std::span<const VmId> vms, TransportKind transport,
                                  const CoordinatorOptions& options = {});

}  // namespace vmsched
