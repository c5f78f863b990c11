#include "vmsched/scenario_io.hpp"

#include <fstream>
#include <sstream>

namespace vmsched {

namespace {

const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError("missing field '" + path + key + "'");
  }
  return obj.at(key);
}

double number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError("field '" + path + "' must be a number");
  return v.get<double>();
}

ResourceVector vector_of(const Json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw ParseError("field '" + path + "' must be a nonempty array");
  ResourceVector out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["server"] = {{"capacity", s.server.capacity},
                 {"p_idle", s.server.p_idle},
                 {"p_peak", s.server.p_peak}};
  j["cost"] = {{"alpha", s.cost.alpha}, {"beta", s.cost.beta}, {"tau", s.cost.tau}};
  j["server_cap"] = s.server_cap ? Json(*s.server_cap) : Json(nullptr);
  Json vms = Json::array();
  for (const VmRequest& vm : s.vms) {
    Json v = {{"id", vm.id}, {"arrival", vm.arrival}, {"work", vm.work}, {"demand", vm.demand}};
    if (vm.known_at) v["known_at"] = *vm.known_at;
    vms.push_back(std::move(v));
  }
  j["vms"] = std::move(vms);
  Json rows = Json::array();
  const std::size_t n = s.degradation.size();
  for (std::size_t r = 0; r < n; ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < n; ++c) {
      row.push_back(s.degradation.at(static_cast<VmId>(r), static_cast<VmId>(c)));
    }
    rows.push_back(std::move(row));
  }
  j["degradation"] = std::move(rows);
  return j;
}

Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");
  Scenario s;
  if (j.contains("server")) {
    const Json& sv = j.at("server");
    if (sv.contains("capacity")) s.server.capacity = vector_of(sv.at("capacity"), "server.capacity");
    if (sv.contains("p_idle")) s.server.p_idle = number(sv.at("p_idle"), "server.p_idle");
    if (sv.contains("p_peak")) s.server.p_peak = number(sv.at("p_peak"), "server.p_peak");
  }
  if (j.contains("cost")) {
    const Json& c = j.at("cost");
    if (c.contains("alpha")) s.cost.alpha = number(c.at("alpha"), "cost.alpha");
    if (c.contains("beta")) s.cost.beta = number(c.at("beta"), "cost.beta");
    if (c.contains("tau")) s.cost.tau = number(c.at("tau"), "cost.tau");
  }
  if (j.contains("server_cap") && !j.at("server_cap").is_null()) {
    if (!j.at("server_cap").is_number_integer()) throw ParseError("field 'server_cap' must be an integer");
    s.server_cap = j.at("server_cap").get<int>();
  }
  const Json& vms = field(j, "vms", "");
  if (!vms.is_array()) throw ParseError("field 'vms' must be an array");
  for (std::size_t i = 0; i < vms.size(); ++i) {
    const std::string p = "vms[" + std::to_string(i) + "].";
    const Json& v = vms[i];
    VmRequest vm;
    const Json& id = field(v, "id", p);
    if (!id.is_number_integer()) throw ParseError("field '" + p + "id' must be an integer");
    vm.id = id.get<int>();
    if (vm.id != static_cast<VmId>(i)) {
      throw ParseError("field '" + p + "id' must equal its position " + std::to_string(i));
    }
    vm.arrival = number(field(v, "arrival", p), p + "arrival");
    vm.work = number(field(v, "work", p), p + "work");
    vm.demand = vector_of(field(v, "demand", p), p + "demand");
    if (v.contains("known_at") && !v.at("known_at").is_null()) {
      vm.known_at = number(v.at("known_at"), p + "known_at");
    }
    s.vms.push_back(std::move(vm));
  }
  const std::size_t n = s.vms.size();
  s.degradation = DegradationMatrix(n);
  if (j.contains("degradation")) {
    const Json& rows = j.at("degradation");
    if (!rows.is_array() || rows.size() != n) {
      throw ParseError("field 'degradation' must have " + std::to_string(n) + " rows");
    }
    for (std::size_t r = 0; r < n; ++r) {
      const std::string p = "degradation[" + std::to_string(r) + "]";
      if (!rows[r].is_array() || rows[r].size() != n) {
        throw ParseError("field '" + p + "' must have " + std::to_string(n) + " entries");
      }
      for (std::size_t c = 0; c < n; ++c) {
        s.degradation.set(static_cast<VmId>(r), static_cast<VmId>(c),
                          number(rows[r][c], p + "[" + std::to_string(c) + "]"));
      }
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return s;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return scenario_from_json(read_json_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  write_text_file(path, scenario_to_json(scenario).dump(2) + "\n");
}

Json assignment_to_json(const Assignment& a) {
  Json out = Json::array();
  for (auto& [server, vms] : a.groups()) out.push_back({{"server", server}, {"vms", vms}});
  return out;
}

Json plan_to_json(const std::map<VmId, ServerId>& plan) {
  Json out = Json::array();
  for (auto& [vm, s] : plan) out.push_back(Json::array({vm, s}));
  return out;
}

std::map<VmId, ServerId> plan_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("plan must be an array of [vm, server] pairs");
  std::map<VmId, ServerId> out;
  for (const Json& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw ParseError("plan entry must be [vm, server]");
    }
    out[e[0].get<int>()] = e[1].get<int>();
  }
  return out;
}

}  // namespace vmsched
