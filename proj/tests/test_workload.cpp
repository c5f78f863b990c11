#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "vmsched/workload.hpp"

using namespace vmsched;

namespace {

std::filesystem::path write_tmp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / ("vmsched_test_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("generation is seed-deterministic") {
  GeneratorSpec g;
  g.n_vms = 50;
  g.seed = 123;
  CHECK(generate_scenario(g) == generate_scenario(g));
  GeneratorSpec h = g;
  h.seed = 124;
  CHECK_FALSE(generate_scenario(g) == generate_scenario(h));
}

TEST_CASE("generated values respect the ranges") {
  GeneratorSpec g;
  g.n_vms = 300;
  g.seed = 5;
  const Scenario s = generate_scenario(g);
  for (const VmRequest& vm : s.vms) {
    CHECK(vm.arrival >= 0);
    CHECK(vm.arrival <= 1000);
    CHECK(vm.work >= 30);
    CHECK(vm.work <= 1000);
    CHECK((vm.cpu() == 1 || vm.cpu() == 2 || vm.cpu() == 4 || vm.cpu() == 8));
    CHECK(s.degradation.at(vm.id, vm.id) == 0.0);
  }
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("sigma 0 gives an all-zero matrix") {
  GeneratorSpec g;
  g.n_vms = 20;
  g.degradation = NormalDegradation{0.0};
  const Scenario s = generate_scenario(g);
  for (double x : s.degradation.row_major()) CHECK(x == 0.0);
}

TEST_CASE("mean work across seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorSpec g;
    g.n_vms = 1000;
    g.seed = seed;
    double sum = 0;
    for (const VmRequest& vm : generate_scenario(g).vms) sum += vm.work;
    const double mean = sum / 1000;
    CHECK(mean >= 480);
    CHECK(mean <= 550);
  }
}

TEST_CASE("degradation entry statistics") {
  GeneratorSpec g;
  g.n_vms = 317;  // ~1e5 off-diagonal entries
  g.seed = 77;
  g.degradation = NormalDegradation{0.2};
  const Scenario n = generate_scenario(g);
  std::size_t zeros = 0, count = 0;
  for (VmId j = 0; j < 317; ++j) {
    for (VmId k = 0; k < 317; ++k) {
      if (j == k) continue;
      ++count;
      if (n.degradation.at(j, k) == 0.0) ++zeros;
    }
  }
  const double frac = static_cast<double>(zeros) / static_cast<double>(count);
  CHECK(frac == doctest::Approx(0.5).epsilon(0.02));  // within 1 percentage point

  g.degradation = ExponentialDegradation{10.0};
  const Scenario e = generate_scenario(g);
  double sum = 0;
  for (VmId j = 0; j < 317; ++j) {
    for (VmId k = 0; k < 317; ++k) {
      if (j != k) sum += e.degradation.at(j, k);
    }
  }
  CHECK(sum / static_cast<double>(count) == doctest::Approx(0.1).epsilon(0.02));
}

TEST_CASE("normal parameter meaning") {
  CHECK(normal_sigma(0.04, SecondParam::Variance) == doctest::Approx(0.2));
  CHECK(normal_sigma(0.2, SecondParam::StdDev) == 0.2);
  CHECK_THROWS_AS(normal_sigma(-1, SecondParam::StdDev), std::invalid_argument);
}

TEST_CASE("spec validation") {
  GeneratorSpec g;
  g.work_lo = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GeneratorSpec{};
  g.arrival_lo = 5;
  g.arrival_hi = 1;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GeneratorSpec{};
  g.degradation = ExponentialDegradation{0};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("trace CSV") {
  const auto ok = write_tmp("ok.csv", "id,arrival,work,cpu_demand,known_at\n0,0,10,4,\n1,5,20,2,\n2,7,30,8,1\n");
  const auto vms = load_trace_csv(ok);
  REQUIRE(vms.size() == 3);
  CHECK(vms[1].arrival == 5);
  CHECK(vms[1].cpu() == 2);
  CHECK_FALSE(vms[0].reserved());
  CHECK(vms[2].known_at == 1.0);

  const auto reserved = write_tmp("res.csv", "id,arrival,work,cpu_demand,known_at\n7,100.0,50.0,2,90.0\n");
  CHECK_THROWS_AS(load_trace_csv(reserved), ParseError);  // ids must be 0..n-1
  const auto single = write_tmp("one.csv", "id,arrival,work,cpu_demand,known_at\n0,100.0,50.0,2,90.0\n");
  CHECK(load_trace_csv(single)[0].known_at == 90.0);

  const auto dup = write_tmp("dup.csv", "id,arrival,work,cpu_demand\n0,0,10,4\n0,1,10,4\n");
  try {
    load_trace_csv(dup);
    FAIL("duplicate id accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_trace_csv(write_tmp("zero.csv", "id,arrival,work,cpu_demand\n0,0,0,4\n")), ParseError);
  CHECK_THROWS_AS(load_trace_csv(write_tmp("hdr.csv", "a,b,c,d\n0,0,1,4\n")), ParseError);
  CHECK_THROWS_AS(load_trace_csv("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("degradation CSV") {
  const DegradationMatrix d = load_degradation_csv(write_tmp("d.csv", "0,0.5\n0.25,0\n"));
  CHECK(d.at(0, 1) == 0.5);
  CHECK(d.at(1, 0) == 0.25);
  CHECK_THROWS_AS(load_degradation_csv(write_tmp("neg.csv", "0,-0.5\n0.25,0\n")), ParseError);
  CHECK_THROWS_AS(load_degradation_csv(write_tmp("rag.csv", "0,0.5\n0.25\n")), ParseError);
  CHECK_THROWS_AS(load_degradation_csv(write_tmp("rect.csv", "0,0.5,1\n0.25,0,1\n")), ParseError);

  GeneratorSpec g;
  g.n_vms = 6;
  const Scenario s = generate_scenario(g);
  const auto path = std::filesystem::temp_directory_path() / "vmsched_test_rt.csv";
  save_degradation_csv(s.degradation, path);
  CHECK(load_degradation_csv(path) == s.degradation);
  const auto tpath = std::filesystem::temp_directory_path() / "vmsched_test_trace_rt.csv";
  save_trace_csv(s.vms, tpath);
  CHECK(load_trace_csv(tpath) == s.vms);
}
