#pragma once

// Domain types shared by every scheduler and the execution engine, plus the
// closed-form power, interference and penalty formulas.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmsched {

using VmId = int;
using ServerId = int;

// Absolute tolerance on simulated times.
inline constexpr double kTimeEps = 1e-9;

// Relative tolerance used when comparing costs that should tie exactly but
// are reached through different floating point sums.
inline constexpr double kCostRelEps = 1e-9;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ServerCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension 0 is CPU (cores); further dimensions are optional.
using ResourceVector = std::vector<double>;

struct VmRequest {
  VmId id = 0;
  double arrival = 0.0;
  double work = 1.0;  // standalone processing time
  ResourceVector demand;
  // Set for reserved VMs: the instant the request becomes known to the
  // scheduler. Absent means the VM is visible only at its arrival.
  std::optional<double> known_at;

  double cpu() const { return demand.empty() ? 0.0 : demand.front(); }
  bool reserved() const { return known_at.has_value(); }
  bool operator==(const VmRequest&) const = default;
};

struct ServerSpec {
  ResourceVector capacity{12.0};
  double p_idle = 120.0;
  double p_peak = 258.0;

  double cpu() const { return capacity.front(); }
  bool operator==(const ServerSpec&) const = default;
};

struct CostParams {
  double alpha = 15.0;  // penalty base, > 1
  double beta = 1.0;    // penalty weight, >= 0
  double tau = 1.0;     // slot length converting power to energy cost

  bool operator==(const CostParams&) const = default;
};

// Dense n x n interference matrix. at(j, k) is the fractional stretch that
// vm j suffers while it shares a server with vm k.
class DegradationMatrix {
 public:
  DegradationMatrix() = default;
  explicit DegradationMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  DegradationMatrix(std::size_t n, std::vector<double> row_major);

  std::size_t size() const { return n_; }
  double at(VmId j, VmId k) const {
    return data_[static_cast<std::size_t>(j) * n_ + static_cast<std::size_t>(k)];
  }
  void set(VmId j, VmId k, double value);
  const std::vector<double>& row_major() const { return data_; }

  // Throws std::invalid_argument on negative entries or a nonzero diagonal.
  void validate() const;

  bool operator==(const DegradationMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct Scenario {
  std::vector<VmRequest> vms;  // vms[i].id == i
  DegradationMatrix degradation;
  ServerSpec server;
  CostParams cost;
  std::optional<int> server_cap;

  std::size_t size() const { return vms.size(); }
  const VmRequest& vm(VmId id) const { return vms[static_cast<std::size_t>(id)]; }

  // Checks every invariant of the domain types; throws std::invalid_argument
  // with a message naming the offending field.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

// Linear server power model. Throws std::domain_error when u is outside [0,1].
double power_of_utilization(const ServerSpec& spec, double u);

// Composite stretch of vm j running together with `collocated`:
// prod(1 + d[j][k]) - 1. The progress rate of j is 1 / (1 + result).
double set_degradation_factor(VmId j, std::span<const VmId> collocated,
                              const DegradationMatrix& d);

// alpha^x - 1 with x = max(0, (t_exec - work) / work). Throws
// std::domain_error when t_exec is shorter than work beyond float tolerance.
double delay_penalty(double t_exec, double work, const CostParams& params);

// Cost of running vm alone on a freshly opened server.
double standalone_cost(const Scenario& scenario, VmId vm);

// VM ids sorted by (arrival, id).
std::vector<VmId> arrival_order(const Scenario& scenario);

// True when a <= b up to the relative cost tolerance.
bool cost_le(double a, double b);

}  // namespace vmsched
