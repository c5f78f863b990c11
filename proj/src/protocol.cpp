#include "vmsched/protocol.hpp"

#include <cmath>

namespace vmsched {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

int int_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw ProtocolError(std::string("field '") + key + "' missing or not an integer");
  }
  return j.at(key).get<int>();
}

}  // namespace

std::string message_type(const Message& m) {
  return std::visit(overloaded{
                        [](const InitMsg&) { return std::string("INIT"); },
                        [](const ProposeMsg&) { return std::string("PROPOSE"); },
                        [](const DecideMsg&) { return std::string("DECIDE"); },
                        [](const NoCandidateMsg&) { return std::string("NO_CANDIDATE"); },
                        [](const DoneMsg&) { return std::string("DONE"); },
                    },
                    m);
}

Json message_to_json(const Message& m) {
  Json j;
  j["type"] = message_type(m);
  std::visit(overloaded{
                 [&](const InitMsg& x) {
                   j["scenario"] = x.scenario;
                   j["unscheduled"] = x.unscheduled;
                 },
                 [&](const ProposeMsg& x) {
                   if (!std::isfinite(x.profit)) throw ProtocolError("non-finite profit");
                   j["server_id"] = x.server_id;
                   j["vm_id"] = x.vm_id;
                   j["profit"] = x.profit;
                 },
                 [&](const DecideMsg& x) {
                   j["server_id"] = x.server_id;
                   j["vm_id"] = x.vm_id;
                 },
                 [&](const NoCandidateMsg& x) { j["server_id"] = x.server_id; },
                 [&](const DoneMsg& x) { j["plan"] = plan_to_json(x.plan); },
             },
             m);
  return j;
}

Message message_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ProtocolError("message without a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "INIT") {
    if (!j.contains("scenario") || !j.contains("unscheduled") || !j.at("unscheduled").is_array()) {
      throw ProtocolError("INIT needs 'scenario' and 'unscheduled'");
    }
    InitMsg m;
    m.scenario = j.at("scenario");
    for (const Json& v : j.at("unscheduled")) {
      if (!v.is_number_integer()) throw ProtocolError("INIT 'unscheduled' must hold integers");
      m.unscheduled.push_back(v.get<int>());
    }
    return m;
  }
  if (type == "PROPOSE") {
    ProposeMsg m;
    m.server_id = int_field(j, "server_id");
    m.vm_id = int_field(j, "vm_id");
    if (!j.contains("profit") || !j.at("profit").is_number()) {
      throw ProtocolError("PROPOSE profit missing or non-finite");
    }
    m.profit = j.at("profit").get<double>();
    if (!std::isfinite(m.profit)) throw ProtocolError("PROPOSE profit is non-finite");
    return m;
  }
  if (type == "DECIDE") return DecideMsg{int_field(j, "server_id"), int_field(j, "vm_id")};
  if (type == "NO_CANDIDATE") return NoCandidateMsg{int_field(j, "server_id")};
  if (type == "DONE") {
    if (!j.contains("plan")) throw ProtocolError("DONE without 'plan'");
    try {
      return DoneMsg{plan_from_json(j.at("plan"))};
    } catch (const ParseError& e) {
      throw ProtocolError(e.what());
    }
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

Bytes encode_message(const Message& m) {
  const std::string payload = message_to_json(m).dump();
  const auto len = static_cast<std::uint32_t>(payload.size());
  Bytes out;
  out.reserve(4 + payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(len >> shift));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::uint32_t frame_length(const std::uint8_t* h) {
  return (std::uint32_t{h[0]} << 24) | (std::uint32_t{h[1]} << 16) | (std::uint32_t{h[2]} << 8) |
         std::uint32_t{h[3]};
}

Message decode_payload(const std::uint8_t* data, std::size_t size) {
  Json j;
  try {
    j = Json::parse(data, data + size);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON payload: ") + e.what());
  }
  return message_from_json(j);
}

Message decode_message(const Bytes& frame) {
  if (frame.size() < 4) throw ProtocolError("truncated frame header");
  const std::uint32_t len = frame_length(frame.data());
  if (len > frame.size() - 4) {
    throw ProtocolError("truncated frame: header announces " + std::to_string(len) + " bytes, " +
                        std::to_string(frame.size() - 4) + " present");
  }
  if (len < frame.size() - 4) throw ProtocolError("trailing bytes after frame");
  return decode_payload(frame.data() + 4, len);
}

}  // namespace vmsched
