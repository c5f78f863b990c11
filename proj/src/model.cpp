#include "vmsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vmsched {

DegradationMatrix::DegradationMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), data_(std::move(row_major)) {
  if (data_.size() != n_ * n_) {
    throw std::invalid_argument("degradation matrix: expected " + std::to_string(n_ * n_) +
                                " entries, got " + std::to_string(data_.size()));
  }
}

void DegradationMatrix::set(VmId j, VmId k, double value) {
  data_[static_cast<std::size_t>(j) * n_ + static_cast<std::size_t>(k)] = value;
}

void DegradationMatrix::validate() const {
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t k = 0; k < n_; ++k) {
      const double v = data_[j * n_ + k];
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("degradation[" + std::to_string(j) + "][" +
                                    std::to_string(k) + "] must be finite and >= 0");
      }
      if (j == k && v != 0.0) {
        throw std::invalid_argument("degradation diagonal entry " + std::to_string(j) +
                                    " must be 0");
      }
    }
  }
}

void Scenario::validate() const {
  if (cost.alpha <= 1.0) throw std::invalid_argument("cost.alpha must be > 1");
  if (cost.beta < 0.0) throw std::invalid_argument("cost.beta must be >= 0");
  if (cost.tau <= 0.0) throw std::invalid_argument("cost.tau must be > 0");
  if (server.capacity.empty()) throw std::invalid_argument("server.capacity is empty");
  for (double c : server.capacity) {
    if (!(c > 0.0)) throw std::invalid_argument("server.capacity entries must be > 0");
  }
  if (!(server.p_idle > 0.0) || server.p_peak < server.p_idle) {
    throw std::invalid_argument("server power requires p_peak >= p_idle > 0");
  }
  if (server_cap && *server_cap < 0) throw std::invalid_argument("server_cap must be >= 0");
  if (degradation.size() != vms.size()) {
    throw std::invalid_argument("degradation dimension " + std::to_string(degradation.size()) +
                                " != vm count " + std::to_string(vms.size()));
  }
  degradation.validate();
  for (std::size_t i = 0; i < vms.size(); ++i) {
    const VmRequest& vm = vms[i];
    const std::string where = "vms[" + std::to_string(i) + "]";
    if (vm.id != static_cast<VmId>(i)) throw std::invalid_argument(where + ".id must equal " + std::to_string(i));
    if (!(vm.arrival >= 0.0) || !std::isfinite(vm.arrival)) throw std::invalid_argument(where + ".arrival must be >= 0");
    if (!(vm.work > 0.0) || !std::isfinite(vm.work)) throw std::invalid_argument(where + ".work must be > 0");
    if (vm.demand.size() != server.capacity.size()) {
      throw std::invalid_argument(where + ".demand has " + std::to_string(vm.demand.size()) +
                                  " dims, server has " + std::to_string(server.capacity.size()));
    }
    for (double r : vm.demand) {
      if (!(r >= 0.0)) throw std::invalid_argument(where + ".demand entries must be >= 0");
    }
    if (vm.known_at && *vm.known_at > vm.arrival) {
      throw std::invalid_argument(where + ".known_at must be <= arrival");
    }
  }
}

double power_of_utilization(const ServerSpec& spec, double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("utilization " + std::to_string(u) + " outside [0,1]");
  }
  return spec.p_idle + (spec.p_peak - spec.p_idle) * u;
}

double set_degradation_factor(VmId j, std::span<const VmId> collocated,
                              const DegradationMatrix& d) {
  double product = 1.0;
  for (VmId k : collocated) product *= 1.0 + d.at(j, k);
  return product - 1.0;
}

double delay_penalty(double t_exec, double work, const CostParams& params) {
  if (!(work > 0.0)) throw std::domain_error("delay_penalty: work must be > 0");
  if (t_exec < work - kTimeEps * std::max(1.0, work)) {
    throw std::domain_error("delay_penalty: execution time " + std::to_string(t_exec) +
                            " shorter than work " + std::to_string(work));
  }
  // Sub-tolerance stretch is float noise from the event sweep.
  if (t_exec - work <= kTimeEps * std::max(1.0, work)) return 0.0;
  const double x = (t_exec - work) / work;
  return std::pow(params.alpha, x) - 1.0;
}

double standalone_cost(const Scenario& scenario, VmId vm) {
  const VmRequest& req = scenario.vm(vm);
  const double u = std::min(1.0, req.cpu() / scenario.server.cpu());
  return power_of_utilization(scenario.server, u) * req.work * scenario.cost.tau;
}

std::vector<VmId> arrival_order(const Scenario& scenario) {
  std::vector<VmId> order(scenario.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](VmId a, VmId b) {
    return scenario.vm(a).arrival < scenario.vm(b).arrival;
  });
  return order;
}

bool cost_le(double a, double b) {
  if (a <= b) return true;
  return a - b <= kCostRelEps * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace vmsched
