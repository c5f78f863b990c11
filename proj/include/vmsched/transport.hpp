#pragma once

// Framed duplex channels. Both implementations carry the same encoded
// frames; the in-process one is a pair of byte queues.

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "vmsched/protocol.hpp"

namespace vmsched {

class TimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Message& m) = 0;
  // Throws TimeoutError when nothing arrives in time, ProtocolError on a
  // malformed frame or a closed peer.
  virtual Message receive(std::chrono::milliseconds timeout) = 0;
};

// Two connected endpoints.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inprocess_pair();

// Sends a raw frame through an in-process endpoint (tests inject garbage).
void send_raw(Channel& inprocess_endpoint, const Bytes& bytes);

class TcpListener {
 public:
  // Binds host:port; port 0 picks a free port.
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<Channel> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<Channel> tcp_connect(const std::string& host, std::uint16_t port,
                                     std::chrono::milliseconds timeout);

// "host:port" → pair; throws std::invalid_argument.
std::pair<std::string, std::uint16_t> parse_address(const std::string& addr);

}  // namespace vmsched
