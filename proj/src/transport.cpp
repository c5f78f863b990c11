#include "vmsched/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace vmsched {

namespace {

struct ByteQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> frames;
};

class InProcessChannel : public Channel {
 public:
  InProcessChannel(std::shared_ptr<ByteQueue> in, std::shared_ptr<ByteQueue> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  void send(const Message& m) override { push(encode_message(m)); }

  void push(Bytes frame) {
    {
      std::lock_guard lock(out_->mu);
      out_->frames.push_back(std::move(frame));
    }
    out_->cv.notify_one();
  }

  Message receive(std::chrono::milliseconds timeout) override {
    std::unique_lock lock(in_->mu);
    if (!in_->cv.wait_for(lock, timeout, [&] { return !in_->frames.empty(); })) {
      throw TimeoutError("receive timed out");
    }
    Bytes frame = std::move(in_->frames.front());
    in_->frames.pop_front();
    lock.unlock();
    return decode_message(frame);
  }

 private:
  std::shared_ptr<ByteQueue> in_, out_;
};

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpChannel() override { ::close(fd_); }

  void send(const Message& m) override {
    const Bytes frame = encode_message(m);
    std::size_t off = 0;
    while (off < frame.size()) {
      const ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(errno_text("send"));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  Message receive(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::uint8_t header[4];
    read_exact(header, 4, deadline);
    const std::uint32_t len = frame_length(header);
    Bytes payload(len);
    read_exact(payload.data(), len, deadline);
    return decode_payload(payload.data(), payload.size());
  }

 private:
  void read_exact(std::uint8_t* dst, std::size_t size,
                  std::chrono::steady_clock::time_point deadline) {
    std::size_t got = 0;
    while (got < size) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw TimeoutError("receive timed out");
      pollfd p{fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(errno_text("poll"));
      }
      if (r == 0) throw TimeoutError("receive timed out");
      const ssize_t n = ::recv(fd_, dst + got, size - got, 0);
      if (n == 0) throw ProtocolError("peer closed the connection");
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(errno_text("recv"));
      }
      got += static_cast<std::size_t>(n);
    }
  }

  int fd_;
};

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string h = host == "localhost" || host.empty() ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
    throw std::invalid_argument("not an IPv4 address: " + host);
  }
  return addr;
}

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inprocess_pair() {
  auto a = std::make_shared<ByteQueue>();
  auto b = std::make_shared<ByteQueue>();
  return {std::make_unique<InProcessChannel>(a, b), std::make_unique<InProcessChannel>(b, a)};
}

void send_raw(Channel& endpoint, const Bytes& bytes) {
  auto* ch = dynamic_cast<InProcessChannel*>(&endpoint);
  if (!ch) throw std::invalid_argument("send_raw needs an in-process endpoint");
  ch->push(bytes);
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::runtime_error(errno_text("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 64) < 0) {
    const std::string msg = errno_text("bind/listen");
    ::close(fd_);
    throw std::runtime_error(msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Channel> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (r == 0) throw TimeoutError("no client connected in time");
  if (r < 0) throw ProtocolError(errno_text("poll"));
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw ProtocolError(errno_text("accept"));
  return std::make_unique<TcpChannel>(fd);
}

std::unique_ptr<Channel> tcp_connect(const std::string& host, std::uint16_t port,
                                     std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(host, port);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  // Retry until the listener is up.
  while (true) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw std::runtime_error(errno_text("socket"));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
      return std::make_unique<TcpChannel>(fd);
    }
    const std::string msg = errno_text("connect");
    ::close(fd);
    if (std::chrono::steady_clock::now() >= deadline) throw TimeoutError(msg);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

std::pair<std::string, std::uint16_t> parse_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("address must be host:port");
  const std::string host = addr.substr(0, colon);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad port in address '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range in '" + addr + "'");
  return {host, static_cast<std::uint16_t>(port)};
}

}  // namespace vmsched
