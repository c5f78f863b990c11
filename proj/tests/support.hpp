#pragma once

#include <algorithm>
#include <vector>

#include "vmsched/assignment.hpp"

namespace testing {

// Groups as sorted vectors of VM ids, ordered by their smallest member.
inline std::vector<std::vector<int>> partition(const vmsched::Assignment& a) {
  std::vector<std::vector<int>> out;
  for (auto& [_, vms] : a.groups()) {
    std::vector<int> g(vms.begin(), vms.end());
    std::sort(g.begin(), g.end());
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

using P = std::vector<std::vector<int>>;

}  // namespace testing
