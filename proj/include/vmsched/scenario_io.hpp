#pragma once

// JSON (de)serialization of scenarios and assignments.

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "vmsched/assignment.hpp"
#include "vmsched/model.hpp"

namespace vmsched {

using Json = nlohmann::ordered_json;

Json scenario_to_json(const Scenario& scenario);
// Throws ParseError naming the offending field path, e.g. "vms[3].work".
Scenario scenario_from_json(const Json& j);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

Json assignment_to_json(const Assignment& a);
Json plan_to_json(const std::map<VmId, ServerId>& plan);
std::map<VmId, ServerId> plan_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace vmsched
