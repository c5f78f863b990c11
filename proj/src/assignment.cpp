#include "vmsched/assignment.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace vmsched {

void Assignment::assign(VmId vm, ServerId server) {
  if (server < 0) throw std::invalid_argument("server id must be >= 0");
  server_of_.at(static_cast<std::size_t>(vm)) = server;
}

void Assignment::unassign(VmId vm) { server_of_.at(static_cast<std::size_t>(vm)) = kUnassigned; }

bool Assignment::total() const {
  return std::none_of(server_of_.begin(), server_of_.end(),
                      [](ServerId s) { return s == kUnassigned; });
}

std::size_t Assignment::assigned_count() const {
  return static_cast<std::size_t>(std::count_if(
      server_of_.begin(), server_of_.end(), [](ServerId s) { return s != kUnassigned; }));
}

std::vector<VmId> Assignment::residents(ServerId server) const {
  std::vector<VmId> out;
  for (std::size_t i = 0; i < server_of_.size(); ++i) {
    if (server_of_[i] == server) out.push_back(static_cast<VmId>(i));
  }
  return out;
}

std::map<ServerId, std::vector<VmId>> Assignment::groups() const {
  std::map<ServerId, std::vector<VmId>> out;
  for (std::size_t i = 0; i < server_of_.size(); ++i) {
    if (server_of_[i] != kUnassigned) out[server_of_[i]].push_back(static_cast<VmId>(i));
  }
  return out;
}

bool Assignment::has_server(ServerId server) const {
  return std::find(server_of_.begin(), server_of_.end(), server) != server_of_.end();
}

std::size_t Assignment::server_count() const {
  std::set<ServerId> used;
  for (ServerId s : server_of_) {
    if (s != kUnassigned) used.insert(s);
  }
  return used.size();
}

ServerId Assignment::next_server_id() const {
  ServerId next = 0;
  for (ServerId s : server_of_) next = std::max(next, s + 1);
  return next;
}

bool Assignment::same_partition(const Assignment& other) const {
  if (size() != other.size()) return false;
  std::set<std::vector<VmId>> mine;
  std::set<std::vector<VmId>> theirs;
  for (auto& [_, g] : groups()) mine.insert(g);
  for (auto& [_, g] : other.groups()) theirs.insert(g);
  for (std::size_t i = 0; i < size(); ++i) {
    if ((server_of_[i] == kUnassigned) != (other.server_of_[i] == kUnassigned)) return false;
  }
  return mine == theirs;
}

Assignment assignment_from_groups(std::size_t vm_count,
                                  const std::vector<std::vector<VmId>>& groups) {
  Assignment a(vm_count);
  for (std::size_t s = 0; s < groups.size(); ++s) {
    for (VmId vm : groups[s]) {
      if (a.assigned(vm)) {
        throw std::invalid_argument("vm " + std::to_string(vm) + " listed in two groups");
      }
      a.assign(vm, static_cast<ServerId>(s));
    }
  }
  return a;
}

}  // namespace vmsched
