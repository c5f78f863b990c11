#include "vmsched/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace vmsched {

Message client_round(const Scenario& scenario, const ClientState& local, const GroupEval& eval,
                     const std::set<VmId>& unscheduled) {
  std::optional<ProposeMsg> best;
  for (VmId vm : unscheduled) {
    const double alone = standalone_cost(scenario, vm);
    const double add = add_cost(scenario, local.residents, eval, vm);
    if (!std::isfinite(add)) continue;
    double p = alone - add;
    if (std::abs(p) <= kCostRelEps * std::max(1.0, alone)) p = 0.0;
    if (p < 0.0) continue;
    if (!best || p > best->profit) best = ProposeMsg{local.server_id, vm, p};
  }
  if (best) return *best;
  return NoCandidateMsg{local.server_id};
}

Message ClientAgent::propose() {
  return client_round(*scenario_, local_, eval_, unscheduled_);
}

std::optional<Message> ClientAgent::handle(const Message& m) {
  if (const auto* init = std::get_if<InitMsg>(&m)) {
    try {
      scenario_ = scenario_from_json(init->scenario);
    } catch (const ParseError& e) {
      throw ProtocolError(std::string("INIT carries a bad scenario: ") + e.what());
    }
    for (VmId vm : local_.residents) {
      if (vm < 0 || static_cast<std::size_t>(vm) >= scenario_->size()) {
        throw ProtocolError("resident vm " + std::to_string(vm) + " is not in the scenario");
      }
    }
    unscheduled_ = std::set<VmId>(init->unscheduled.begin(), init->unscheduled.end());
    for (VmId vm : unscheduled_) {
      if (vm < 0 || static_cast<std::size_t>(vm) >= scenario_->size()) {
        throw ProtocolError("INIT lists unknown vm " + std::to_string(vm));
      }
    }
    std::sort(local_.residents.begin(), local_.residents.end());
    eval_ = evaluate_group(*scenario_, local_.residents);
    return propose();
  }
  if (!scenario_) throw ProtocolError(message_type(m) + " before INIT");
  if (const auto* d = std::get_if<DecideMsg>(&m)) {
    if (!unscheduled_.erase(d->vm_id)) {
      throw ProtocolError("DECIDE for unknown vm " + std::to_string(d->vm_id));
    }
    if (d->server_id == local_.server_id) {
      local_.residents.insert(
          std::lower_bound(local_.residents.begin(), local_.residents.end(), d->vm_id), d->vm_id);
      eval_ = evaluate_group(*scenario_, local_.residents);
    }
    return propose();
  }
  if (const auto* done = std::get_if<DoneMsg>(&m)) {
    done_ = *done;
    return std::nullopt;
  }
  throw ProtocolError("client cannot handle " + message_type(m));
}

DoneMsg run_client(Channel& channel, ClientState local, std::chrono::milliseconds timeout) {
  ClientAgent agent(std::move(local));
  while (true) {
    const Message m = channel.receive(timeout);
    if (auto reply = agent.handle(m)) {
      channel.send(*reply);
    } else {
      return *agent.done();
    }
  }
}

CoordinatorResult coordinator_run(std::span<Channel* const> clients, const Scenario& scenario,
                                  std::span<const VmId> vms, ServerId first_new_id,
                                  const CoordinatorOptions& options) {
  std::set<VmId> unscheduled(vms.begin(), vms.end());
  std::vector<std::optional<ServerId>> identity(clients.size());
  auto name = [&](std::size_t c) {
    std::string s = "client " + std::to_string(c);
    if (identity[c]) s += " (server " + std::to_string(*identity[c]) + ")";
    return s;
  };
  auto broadcast = [&](const Message& m) {
    for (Channel* ch : clients) ch->send(m);
  };

  CoordinatorResult result;
  broadcast(InitMsg{scenario_to_json(scenario), std::vector<VmId>(unscheduled.begin(), unscheduled.end())});

  while (!clients.empty()) {
    std::optional<ProposeMsg> best;
    for (std::size_t c = 0; c < clients.size(); ++c) {
      Message m;
      try {
        m = clients[c]->receive(options.timeout);
      } catch (const ProtocolError& e) {
        throw ProtocolError(name(c) + ": " + e.what());
      }
      ServerId sid;
      if (const auto* p = std::get_if<ProposeMsg>(&m)) {
        sid = p->server_id;
      } else if (const auto* n = std::get_if<NoCandidateMsg>(&m)) {
        sid = n->server_id;
      } else {
        throw ProtocolError(name(c) + ": unexpected " + message_type(m));
      }
      if (identity[c] && *identity[c] != sid) {
        throw ProtocolError(name(c) + ": changed its server id to " + std::to_string(sid));
      }
      identity[c] = sid;
      const auto* p = std::get_if<ProposeMsg>(&m);
      if (!p) continue;
      if (!unscheduled.count(p->vm_id)) {
        throw ProtocolError(name(c) + ": proposed vm " + std::to_string(p->vm_id) +
                            " which is not unscheduled");
      }
      if (p->profit < 0.0) continue;
      if (!best || p->profit > best->profit ||
          (p->profit == best->profit &&
           (p->server_id < best->server_id ||
            (p->server_id == best->server_id && p->vm_id < best->vm_id)))) {
        best = *p;
      }
    }
    if (!best) break;
    const DecideMsg decide{best->server_id, best->vm_id};
    unscheduled.erase(decide.vm_id);
    result.plan[decide.vm_id] = decide.server_id;
    result.decisions.push_back(decide);
    ++result.rounds;
    broadcast(decide);
  }

  result.leftovers.assign(unscheduled.begin(), unscheduled.end());
  for (auto& [vm, s] : ivp_fresh(scenario, result.leftovers, first_new_id)) result.plan[vm] = s;
  broadcast(DoneMsg{result.plan});
  return result;
}

CoordinatorResult run_distributed(const Scenario& scenario, const ClusterState& state,
                                  std::span<const VmId> vms, TransportKind transport,
                                  const CoordinatorOptions& options) {
  std::vector<ClientState> locals;
  for (ServerId s : running_servers(scenario, state)) {
    locals.push_back({s, live_residents(scenario, state, s)});
  }
  const ServerId first_new = state.started.next_server_id();

  std::vector<std::unique_ptr<Channel>> coord_ends;
  std::vector<std::unique_ptr<Channel>> client_ends(locals.size());
  std::unique_ptr<TcpListener> listener;
  if (transport == TransportKind::InProcess) {
    for (std::size_t i = 0; i < locals.size(); ++i) {
      auto [a, b] = make_inprocess_pair();
      coord_ends.push_back(std::move(a));
      client_ends[i] = std::move(b);
    }
  } else if (!locals.empty()) {
    listener = std::make_unique<TcpListener>("127.0.0.1", 0);
  }

  std::vector<std::exception_ptr> errors(locals.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < locals.size(); ++i) {
    threads.emplace_back([&, i] {
      try {
        if (!client_ends[i]) client_ends[i] = tcp_connect("127.0.0.1", listener->port(), options.timeout);
        run_client(*client_ends[i], locals[i], options.timeout);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }

  CoordinatorResult result;
  std::exception_ptr coord_error;
  try {
    if (listener) {
      // Accept order is arbitrary; channels are matched to clients by the
      // server id they report, which the coordinator does not rely on.
      for (std::size_t i = 0; i < locals.size(); ++i) coord_ends.push_back(listener->accept(options.timeout));
    }
    std::vector<Channel*> handles;
    for (auto& c : coord_ends) handles.push_back(c.get());
    result = coordinator_run(handles, scenario, vms, first_new, options);
  } catch (...) {
    coord_error = std::current_exception();
  }
  for (auto& t : threads) t.join();
  if (coord_error) std::rethrow_exception(coord_error);
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

}  // namespace vmsched
