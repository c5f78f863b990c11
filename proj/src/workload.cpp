#include "vmsched/workload.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

namespace vmsched {

void GeneratorSpec::validate() const {
  if (!(arrival_lo <= arrival_hi)) throw std::invalid_argument("arrival range is empty");
  if (!(work_lo <= work_hi) || !(work_lo > 0)) throw std::invalid_argument("work range must be nonempty and positive");
  if (demand_choices.empty()) throw std::invalid_argument("demand_choices is empty");
  for (double d : demand_choices) {
    if (!(d > 0) || d > server_cores) throw std::invalid_argument("demand choice outside (0, server_cores]");
  }
  if (!(server_cores > 0)) throw std::invalid_argument("server_cores must be positive");
  if (auto* n = std::get_if<NormalDegradation>(&degradation); n && !(n->sigma >= 0)) {
    throw std::invalid_argument("sigma must be >= 0");
  }
  if (auto* e = std::get_if<ExponentialDegradation>(&degradation); e && !(e->lambda > 0)) {
    throw std::invalid_argument("lambda must be > 0");
  }
}

double normal_sigma(double param, SecondParam meaning) {
  if (param < 0) throw std::invalid_argument("normal parameter must be >= 0");
  return meaning == SecondParam::Variance ? std::sqrt(param) : param;
}

Scenario generate_scenario(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> arrival(spec.arrival_lo, spec.arrival_hi);
  std::uniform_real_distribution<double> work(spec.work_lo, spec.work_hi);
  std::uniform_int_distribution<std::size_t> demand(0, spec.demand_choices.size() - 1);

  Scenario s;
  s.server.capacity = {spec.server_cores};
  s.vms.reserve(spec.n_vms);
  for (std::size_t i = 0; i < spec.n_vms; ++i) {
    VmRequest vm;
    vm.id = static_cast<VmId>(i);
    vm.arrival = arrival(rng);
    vm.work = work(rng);
    vm.demand = {spec.demand_choices[demand(rng)]};
    s.vms.push_back(vm);
  }

  const std::size_t n = spec.n_vms;
  if (auto* fixed = std::get_if<FixedDegradation>(&spec.degradation)) {
    s.degradation = load_degradation_csv(fixed->matrix_file);
    if (s.degradation.size() != n) {
      throw std::invalid_argument("degradation matrix has size " + std::to_string(s.degradation.size()) +
                                  ", scenario has " + std::to_string(n) + " VMs");
    }
    return s;
  }
  s.degradation = DegradationMatrix(n);
  auto draw = [&]() -> double {
    if (auto* nd = std::get_if<NormalDegradation>(&spec.degradation)) {
      if (nd->sigma == 0) return 0.0;
      return std::max(0.0, std::normal_distribution<double>(0.0, nd->sigma)(rng));
    }
    return std::exponential_distribution<double>(std::get<ExponentialDegradation>(spec.degradation).lambda)(rng);
  };
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (j != k) s.degradation.set(static_cast<VmId>(j), static_cast<VmId>(k), draw());
    }
  }
  return s;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double to_double(const std::string& cell, const std::string& where) {
  const std::string t = trim(cell);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": '" + t + "' is not a number");
  }
  if (used != t.size() || !std::isfinite(v)) throw ParseError(where + ": '" + t + "' is not a finite number");
  return v;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<VmRequest> load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in = open(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<VmRequest> rows;
  std::set<VmId> seen;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    auto cells = split(line);
    if (header) {
      header = false;
      if (cells.size() < 4 || trim(cells[0]) != "id" || trim(cells[1]) != "arrival" ||
          trim(cells[2]) != "work" || trim(cells[3]) != "cpu_demand" ||
          (cells.size() == 5 && trim(cells[4]) != "known_at") || cells.size() > 5) {
        throw ParseError(where + ": expected header id,arrival,work,cpu_demand[,known_at]");
      }
      continue;
    }
    if (cells.size() != 4 && cells.size() != 5) throw ParseError(where + ": expected 4 or 5 columns");
    VmRequest vm;
    const double id = to_double(cells[0], where);
    if (id < 0 || id != std::floor(id)) throw ParseError(where + ": id must be a nonnegative integer");
    vm.id = static_cast<VmId>(id);
    if (!seen.insert(vm.id).second) throw ParseError(where + ": duplicate id " + std::to_string(vm.id));
    vm.arrival = to_double(cells[1], where);
    vm.work = to_double(cells[2], where);
    if (!(vm.work > 0)) throw ParseError(where + ": work must be > 0");
    vm.demand = {to_double(cells[3], where)};
    if (!(vm.demand[0] >= 0)) throw ParseError(where + ": cpu_demand must be >= 0");
    if (cells.size() == 5 && !trim(cells[4]).empty()) vm.known_at = to_double(cells[4], where);
    rows.push_back(vm);
  }
  if (header) throw ParseError(path.string() + ": empty file");
  std::vector<VmRequest> out(rows.size());
  for (const VmRequest& vm : rows) {
    if (static_cast<std::size_t>(vm.id) >= rows.size()) {
      throw ParseError(path.string() + ": ids must be 0.." + std::to_string(rows.size() - 1));
    }
    out[static_cast<std::size_t>(vm.id)] = vm;
  }
  return out;
}

DegradationMatrix load_degradation_csv(const std::filesystem::path& path) {
  std::ifstream in = open(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    std::vector<double> row;
    for (const std::string& cell : split(line)) {
      const double v = to_double(cell, where);
      if (v < 0) throw ParseError(where + ": negative degradation entry");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(where + ": row has " + std::to_string(row.size()) + " entries, expected " +
                       std::to_string(rows.front().size()));
    }
    if (row.size() <= rows.size()) {
      throw ParseError(where + ": matrix is not square");
    }
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  if (n > 0 && rows.front().size() != n) {
    throw ParseError(path.string() + ": matrix is " + std::to_string(n) + "x" +
                     std::to_string(rows.front().size()) + ", not square");
  }
  DegradationMatrix d(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r][r] != 0) {
      throw ParseError(path.string() + ": diagonal entry " + std::to_string(r) + " must be 0");
    }
    for (std::size_t c = 0; c < n; ++c) d.set(static_cast<VmId>(r), static_cast<VmId>(c), rows[r][c]);
  }
  return d;
}

void save_trace_csv(const std::vector<VmRequest>& vms, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const bool any_reserved = std::any_of(vms.begin(), vms.end(), [](const VmRequest& v) { return v.reserved(); });
  out << "id,arrival,work,cpu_demand" << (any_reserved ? ",known_at" : "") << "\n";
  out << std::setprecision(17);
  for (const VmRequest& vm : vms) {
    out << vm.id << ',' << vm.arrival << ',' << vm.work << ',' << vm.cpu();
    if (any_reserved) {
      out << ',';
      if (vm.known_at) out << *vm.known_at;
    }
    out << '\n';
  }
}

void save_degradation_csv(const DegradationMatrix& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t c = 0; c < d.size(); ++c) {
      out << (c ? "," : "") << d.at(static_cast<VmId>(r), static_cast<VmId>(c));
    }
    out << '\n';
  }
}

}  // namespace vmsched
