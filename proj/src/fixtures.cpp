#include "vmsched/fixtures.hpp"

#include <stdexcept>

namespace vmsched::fixtures {

namespace {

VmRequest make_vm(VmId id, double arrival, double work, double cores) {
  VmRequest vm;
  vm.id = id;
  vm.arrival = arrival;
  vm.work = work;
  vm.demand = {cores};
  return vm;
}

}  // namespace

Scenario collocation_walkthrough() {
  Scenario s;
  s.vms = {make_vm(0, 0, 4, 4), make_vm(1, 0, 2, 4), make_vm(2, 2, 2, 4)};
  s.degradation = DegradationMatrix(3);
  for (VmId j = 0; j < 3; ++j) {
    for (VmId k = 0; k < 3; ++k) {
      if (j != k) s.degradation.set(j, k, 1.0);
    }
  }
  return s;
}

Scenario overlap_example() {
  Scenario s;
  s.vms = {make_vm(0, 0, 10, 4), make_vm(1, 0, 3, 8), make_vm(2, 1, 9, 4)};
  s.degradation = DegradationMatrix(3);
  s.degradation.set(0, 1, 0.1);
  s.degradation.set(0, 2, 0.1);
  s.degradation.set(1, 2, 0.2);
  s.degradation.set(2, 1, 0.2);
  return s;
}

Scenario four_vm_example() {
  Scenario s;
  s.vms = {make_vm(0, 0, 16, 4), make_vm(1, 2, 5, 8), make_vm(2, 3, 19, 4),
           make_vm(3, 8, 12, 4)};
  s.degradation = DegradationMatrix(4);
  s.degradation.set(0, 1, 0.25);
  return s;
}

Scenario replanning_example() {
  Scenario s = four_vm_example();
  s.vms[2].known_at = 2.0;
  s.vms[3].known_at = 2.0;
  s.vms.push_back(make_vm(4, 7, 15, 4));
  DegradationMatrix d(5);
  d.set(0, 1, 0.25);
  s.degradation = d;
  return s;
}

std::vector<std::string> spec2006_apps() { return {"bzip2", "gcc", "mcf", "povray", "lbm"}; }

std::vector<double> spec2006_standalone_times() { return {498, 265, 269, 186, 318}; }

DegradationMatrix spec2006_degradation() {
  enum { bzip2, gcc, mcf, povray, lbm };
  DegradationMatrix d(5);
  d.set(bzip2, lbm, 0.2892);
  d.set(lbm, bzip2, 0.1258);
  d.set(gcc, mcf, 0.1283);
  d.set(mcf, gcc, 0.1190);
  d.set(mcf, lbm, 0.6208);
  d.set(lbm, mcf, 0.1509);
  d.set(gcc, povray, 0.0189);
  d.set(povray, gcc, 0.0376);
  d.set(povray, lbm, 0.0806);
  d.set(lbm, povray, 0.0252);
  d.set(gcc, lbm, 0.4453);
  d.set(lbm, gcc, 0.1006);
  return d;
}

namespace {

// One instance of each benchmark, staggered arrivals, 4 cores each.
Scenario spec2006_scenario() {
  Scenario s;
  const std::vector<double> work = spec2006_standalone_times();
  const double arrivals[] = {0, 20, 40, 60, 80};
  for (VmId j = 0; j < 5; ++j) s.vms.push_back(make_vm(j, arrivals[j], work[j], 4));
  s.degradation = spec2006_degradation();
  return s;
}

}  // namespace

std::vector<std::string> names() { return {"fig2", "fig3", "fig4", "fig5", "spec2006"}; }

Scenario by_name(const std::string& name) {
  if (name == "fig2") return collocation_walkthrough();
  if (name == "fig3") return overlap_example();
  if (name == "fig4") return four_vm_example();
  if (name == "fig5") return replanning_example();
  if (name == "spec2006") return spec2006_scenario();
  throw std::invalid_argument("unknown fixture '" + name + "'");
}

}  // namespace vmsched::fixtures
