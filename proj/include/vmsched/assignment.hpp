#pragma once

#include <map>
#include <vector>

#include "vmsched/model.hpp"

namespace vmsched {

// Static vm -> server map. Servers are dense nonnegative integers; a VM may be
// left unassigned while a scheduler is still building the map.
class Assignment {
 public:
  static constexpr ServerId kUnassigned = -1;

  Assignment() = default;
  explicit Assignment(std::size_t vm_count) : server_of_(vm_count, kUnassigned) {}

  std::size_t size() const { return server_of_.size(); }
  void assign(VmId vm, ServerId server);
  void unassign(VmId vm);
  ServerId server_of(VmId vm) const { return server_of_.at(static_cast<std::size_t>(vm)); }
  bool assigned(VmId vm) const { return server_of(vm) != kUnassigned; }

  // Every VM mapped.
  bool total() const;
  std::size_t assigned_count() const;

  // Residents of one server in ascending id order.
  std::vector<VmId> residents(ServerId server) const;
  // Nonempty servers and their residents, ordered by server id.
  std::map<ServerId, std::vector<VmId>> groups() const;
  bool has_server(ServerId server) const;
  // Number of distinct servers in use.
  std::size_t server_count() const;
  // One past the largest server id in use (0 when empty).
  ServerId next_server_id() const;

  const std::vector<ServerId>& raw() const { return server_of_; }

  // Two assignments are equivalent when they induce the same partition of
  // VMs, regardless of server numbering.
  bool same_partition(const Assignment& other) const;

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<ServerId> server_of_;
};

// Build an assignment from explicit groups: groups[i] lands on server i.
Assignment assignment_from_groups(std::size_t vm_count,
                                  const std::vector<std::vector<VmId>>& groups);

}  // namespace vmsched
