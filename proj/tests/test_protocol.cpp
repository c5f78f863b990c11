#include <cmath>
#include <limits>
#include <string>

#include "doctest.h"
#include "vmsched/fixtures.hpp"
#include "vmsched/protocol.hpp"
#include "vmsched/transport.hpp"

using namespace vmsched;

namespace {

std::string payload(const Bytes& b) { return std::string(b.begin() + 4, b.end()); }

}  // namespace

TEST_CASE("propose frame layout") {
  const Bytes b = encode_message(ProposeMsg{1, 7, 1200.0});
  const std::string body = R"({"type":"PROPOSE","server_id":1,"vm_id":7,"profit":1200.0})";
  REQUIRE(b.size() == body.size() + 4);
  CHECK(b[0] == 0);
  CHECK(b[1] == 0);
  CHECK(b[2] == 0);
  CHECK(b[3] == body.size());
  CHECK(payload(b) == body);
}

TEST_CASE("every variant round-trips") {
  const Message msgs[] = {
      InitMsg{scenario_to_json(fixtures::replanning_example()), {1, 2, 3}},
      ProposeMsg{3, 4, 0.1 + 0.2},
      ProposeMsg{0, 0, 0.0},
      DecideMsg{2, 9},
      NoCandidateMsg{5},
      DoneMsg{{{1, 0}, {2, 3}}},
      DoneMsg{},
  };
  for (const Message& m : msgs) CHECK(decode_message(encode_message(m)) == m);
}

TEST_CASE("numbers keep full precision") {
  const double p = 1.0 / 3.0;
  const auto m = std::get<ProposeMsg>(decode_message(encode_message(ProposeMsg{0, 0, p})));
  CHECK(m.profit == p);
}

TEST_CASE("decode errors") {
  Bytes b = encode_message(DecideMsg{1, 2});
  Bytes cut(b.begin(), b.end() - 1);
  CHECK_THROWS_AS(decode_message(cut), ProtocolError);
  CHECK_THROWS_AS(decode_message(Bytes{0, 0}), ProtocolError);
  Bytes longer = b;
  longer.push_back('x');
  CHECK_THROWS_AS(decode_message(longer), ProtocolError);

  auto frame = [](const std::string& body) {
    Bytes out{0, 0, 0, static_cast<std::uint8_t>(body.size())};
    out.insert(out.end(), body.begin(), body.end());
    return out;
  };
  CHECK_THROWS_AS(decode_message(frame(R"({"type":"HELLO"})")), ProtocolError);
  CHECK_THROWS_AS(decode_message(frame(R"({"type":"PROPOSE","server_id":1,"vm_id":7,"profit":null})")), ProtocolError);
  CHECK_THROWS_AS(decode_message(frame(R"({"type":"PROPOSE","server_id":1,"vm_id":7})")), ProtocolError);
  CHECK_THROWS_AS(decode_message(frame(R"({"type":"DECIDE","server_id":"a","vm_id":7})")), ProtocolError);
  CHECK_THROWS_AS(decode_message(frame("{not json")), ProtocolError);
  CHECK_THROWS_AS(encode_message(ProposeMsg{0, 0, std::numeric_limits<double>::infinity()}), ProtocolError);
  CHECK_THROWS_AS(encode_message(ProposeMsg{0, 0, std::nan("")}), ProtocolError);
}

TEST_CASE("in-process channel is FIFO and times out") {
  auto [a, b] = make_inprocess_pair();
  a->send(DecideMsg{0, 1});
  a->send(DecideMsg{0, 2});
  CHECK(std::get<DecideMsg>(b->receive(std::chrono::milliseconds(100))).vm_id == 1);
  CHECK(std::get<DecideMsg>(b->receive(std::chrono::milliseconds(100))).vm_id == 2);
  CHECK_THROWS_AS(b->receive(std::chrono::milliseconds(10)), TimeoutError);
}

TEST_CASE("tcp loopback carries the same frames") {
  TcpListener listener("127.0.0.1", 0);
  auto client = tcp_connect("127.0.0.1", listener.port(), std::chrono::milliseconds(2000));
  auto server = listener.accept(std::chrono::milliseconds(2000));
  const Message m = InitMsg{scenario_to_json(fixtures::four_vm_example()), {0, 1}};
  client->send(m);
  CHECK(server->receive(std::chrono::milliseconds(2000)) == m);
  server->send(NoCandidateMsg{4});
  CHECK(client->receive(std::chrono::milliseconds(2000)) == Message{NoCandidateMsg{4}});
  CHECK_THROWS_AS(client->receive(std::chrono::milliseconds(20)), TimeoutError);
}

TEST_CASE("address parsing") {
  CHECK(parse_address("127.0.0.1:9000") == std::pair<std::string, std::uint16_t>{"127.0.0.1", 9000});
  CHECK_THROWS_AS(parse_address("nohost"), std::invalid_argument);
  CHECK_THROWS_AS(parse_address("h:99999"), std::invalid_argument);
  CHECK_THROWS_AS(parse_address("h:12x"), std::invalid_argument);
}
