#pragma once

// Small hand-checkable scenarios. Servers have 12 cores, so a "1/3 unit"
// VM demands 4 cores. VM ids are zero-based (vm_1 has id 0).

#include <string>
#include <vector>

#include "vmsched/model.hpp"

namespace vmsched::fixtures {

// Three VMs, p = 4/2/2, arrivals 0/0/2, every pairwise factor 1.
Scenario collocation_walkthrough();

// Three VMs where first fit wastes a server (p = 10/3/9, arrivals 0/0/1).
Scenario overlap_example();

// Four VMs, arrivals 0/2/3/8, p = 16/5/19/12; vm_1 suffers 0.25 from vm_2.
Scenario four_vm_example();

// four_vm_example plus vm_5 (arrival 7, p = 15); vm_3 and vm_4 are
// reserved and known from t = 2.
Scenario replanning_example();

// SPEC CPU2006 pairwise slowdowns for bzip2, gcc, mcf, povray, lbm.
DegradationMatrix spec2006_degradation();
std::vector<std::string> spec2006_apps();
std::vector<double> spec2006_standalone_times();

// Named lookup for the CLI: "fig2", "fig3", "fig4", "fig5", "spec2006".
Scenario by_name(const std::string& name);
std::vector<std::string> names();

}  // namespace vmsched::fixtures
