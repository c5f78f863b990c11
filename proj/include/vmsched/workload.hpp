#pragma once

// Seeded synthetic scenarios and CSV ingestion.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "vmsched/model.hpp"

namespace vmsched {

struct NormalDegradation {
  double sigma = 0.2;  // standard deviation; negative samples clamp to 0
};
struct ExponentialDegradation {
  double lambda = 10.0;  // rate, mean 1 / lambda
};
struct FixedDegradation {
  std::filesystem::path matrix_file;
};
using DegradationDist = std::variant<NormalDegradation, ExponentialDegradation, FixedDegradation>;

struct GeneratorSpec {
  std::size_t n_vms = 200;
  double arrival_lo = 0.0, arrival_hi = 1000.0;
  double work_lo = 30.0, work_hi = 1000.0;
  std::vector<double> demand_choices{1, 2, 4, 8};
  double server_cores = 12.0;
  DegradationDist degradation = NormalDegradation{};
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

// How a "normal" distribution parameter is read.
enum class SecondParam { StdDev, Variance };
// Converts a user-supplied parameter to a standard deviation.
double normal_sigma(double param, SecondParam meaning);

Scenario generate_scenario(const GeneratorSpec& spec);

// Header `id,arrival,work,cpu_demand[,known_at]`; ids must be 0..n-1 in any
// order. Throws ParseError with the line number.
std::vector<VmRequest> load_trace_csv(const std::filesystem::path& path);
// Dense n x n reals, row = suffering VM.
DegradationMatrix load_degradation_csv(const std::filesystem::path& path);

void save_trace_csv(const std::vector<VmRequest>& vms, const std::filesystem::path& path);
void save_degradation_csv(const DegradationMatrix& d, const std::filesystem::path& path);

}  // namespace vmsched
