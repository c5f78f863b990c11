#pragma once

// Wire messages of the distributed profit plan. A frame is a 4-byte
// big-endian payload length followed by a UTF-8 JSON object whose "type"
// field selects the variant.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vmsched/scenario_io.hpp"

namespace vmsched {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitMsg {
  Json scenario;  // scenario_to_json form: VM descriptors and degradation rows
  std::vector<VmId> unscheduled;
  bool operator==(const InitMsg&) const = default;
};

struct ProposeMsg {
  ServerId server_id = 0;
  VmId vm_id = 0;
  double profit = 0.0;
  bool operator==(const ProposeMsg&) const = default;
};

struct DecideMsg {
  ServerId server_id = 0;
  VmId vm_id = 0;
  bool operator==(const DecideMsg&) const = default;
};

struct NoCandidateMsg {
  ServerId server_id = 0;
  bool operator==(const NoCandidateMsg&) const = default;
};

struct DoneMsg {
  std::map<VmId, ServerId> plan;
  bool operator==(const DoneMsg&) const = default;
};

using Message = std::variant<InitMsg, ProposeMsg, DecideMsg, NoCandidateMsg, DoneMsg>;

std::string message_type(const Message& m);

using Bytes = std::vector<std::uint8_t>;

Json message_to_json(const Message& m);
Message message_from_json(const Json& j);  // throws ProtocolError

// Throws ProtocolError on a non-finite profit.
Bytes encode_message(const Message& m);
// Decodes exactly one frame; trailing bytes are an error.
Message decode_message(const Bytes& frame);

// Length of the payload announced by a 4-byte header.
std::uint32_t frame_length(const std::uint8_t* header);
Message decode_payload(const std::uint8_t* data, std::size_t size);

}  // namespace vmsched
