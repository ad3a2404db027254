#include "mpsu/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

namespace mpsu {

const char* tag_name(Tag tag) {
  switch (tag) {
    case Tag::Hello: return "HELLO";
    case Tag::OtSetup: return "OT_SETUP";
    case Tag::OtBaseS1: return "OT_BASE_S1";
    case Tag::OtBaseS2: return "OT_BASE_S2";
    case Tag::OtDerand: return "OT_DERAND";
    case Tag::OtExtMatrix: return "OT_EXT_MATRIX";
    case Tag::TripleSetup: return "TRIPLE_SETUP";
    case Tag::OprfQuery: return "OPRF_QUERY";
    case Tag::OprfResponse: return "OPRF_RESPONSE";
    case Tag::OkvsTable: return "OKVS_TABLE";
    case Tag::GmwAndLayer: return "GMW_AND_LAYER";
    case Tag::MssrotDelta: return "MSSROT_DELTA";
    case Tag::MssrotPad: return "MSSROT_PAD";
    case Tag::ShufSwitchOt: return "SHUF_SWITCH_OT";
    case Tag::ShufMask: return "SHUF_MASK";
    case Tag::PkPublicKey: return "PK_PUBLIC_KEY";
    case Tag::PkOtMessages: return "PK_OT_MESSAGES";
    case Tag::PkRerand: return "PK_RERAND";
    case Tag::PkCiphertexts: return "PK_CIPHERTEXTS";
    case Tag::PidRing: return "PID_RING";
    case Tag::ReconShares: return "RECON_SHARES";
    case Tag::UnionBroadcast: return "UNION_BROADCAST";
    case Tag::AppData: return "APP_DATA";
  }
  return "UNKNOWN";
}

Bytes encode_frame(const Frame& f) {
  if (f.payload.size() > kMaxFramePayload) fail(Errc::MalformedMessage, "frame payload too large");
  Writer w;
  w.u8(static_cast<std::uint8_t>(f.tag)).u32(static_cast<std::uint32_t>(f.payload.size())).raw(f.payload);
  return w.take();
}

std::pair<Tag, std::size_t> decode_frame_header(ByteSpan header) {
  if (header.size() != kFrameHeaderBytes) fail(Errc::MalformedMessage, "short frame header");
  Reader r(header);
  const std::uint8_t tag = r.u8();
  const std::size_t len = r.u32();
  if (tag == 0 || tag > kMaxTag) fail(Errc::MalformedMessage, "unknown frame tag");
  if (len > kMaxFramePayload) fail(Errc::MalformedMessage, "frame length exceeds limit");
  return {static_cast<Tag>(tag), len};
}

Frame decode_frame(ByteSpan bytes) {
  if (bytes.size() < kFrameHeaderBytes) fail(Errc::MalformedMessage, "short frame");
  auto [tag, len] = decode_frame_header(bytes.first(kFrameHeaderBytes));
  if (bytes.size() - kFrameHeaderBytes != len) fail(Errc::MalformedMessage, "frame length mismatch");
  auto body = bytes.subspan(kFrameHeaderBytes);
  return Frame{tag, Bytes(body.begin(), body.end())};
}

namespace {

/// One direction of a link: FIFO plus a closed flag visible to both ends.
struct Mailbox {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Frame> q;
  bool closed = false;

  void push(Frame f) {
    {
      std::lock_guard lk(mu);
      if (closed) fail(Errc::PeerCrash, "link closed");
      q.push_back(std::move(f));
    }
    cv.notify_one();
  }

  Frame pop(std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu);
    if (!cv.wait_for(lk, timeout, [&] { return !q.empty() || closed; }))
      fail(Errc::Timeout, "no message within timeout");
    if (!q.empty()) {
      Frame f = std::move(q.front());
      q.pop_front();
      return f;
    }
    fail(Errc::PeerCrash, "peer closed the link");
  }

  void close() {
    {
      std::lock_guard lk(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

struct MemoryPipe {
  Mailbox box[2];  // box[k] is read by side k
};

class MemoryChannel final : public Channel {
 public:
  MemoryChannel(std::shared_ptr<MemoryPipe> pipe, int side) : pipe_(std::move(pipe)), side_(side) {}
  ~MemoryChannel() override { close(); }

  void send(Frame frame) override { pipe_->box[1 - side_].push(std::move(frame)); }
  Frame recv(std::chrono::milliseconds timeout) override { return pipe_->box[side_].pop(timeout); }
  void close() override {
    pipe_->box[0].close();
    pipe_->box[1].close();
  }

 private:
  std::shared_ptr<MemoryPipe> pipe_;
  int side_;
};

bool write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t k = ::send(fd, p, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t k = ::recv(fd, p, n, 0);
    if (k == 0) return false;
    if (k < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

/// Socket link. A reader thread drains the socket into a mailbox so sends
/// never block on the peer's progress.
class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    reader_ = std::thread([this] { read_loop(); });
  }
  ~TcpChannel() override {
    close();
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
  }

  void send(Frame frame) override {
    auto bytes = encode_frame(frame);
    std::lock_guard lk(write_mu_);
    if (shut_ || !write_all(fd_, bytes.data(), bytes.size())) fail(Errc::PeerCrash, "tcp send failed");
  }

  Frame recv(std::chrono::milliseconds timeout) override {
    Frame f = inbox_.pop(timeout);
    return f;
  }

  void close() override {
    std::lock_guard lk(write_mu_);
    if (!shut_) {
      shut_ = true;
      ::shutdown(fd_, SHUT_RDWR);
    }
  }

 private:
  void read_loop() {
    try {
      for (;;) {
        std::uint8_t header[kFrameHeaderBytes];
        if (!read_all(fd_, header, sizeof header)) break;
        auto [tag, len] = decode_frame_header({header, sizeof header});
        Frame f{tag, Bytes(len)};
        if (len && !read_all(fd_, f.payload.data(), len)) break;
        inbox_.push(std::move(f));
      }
    } catch (const Error&) {
      // malformed input: treat the link as dead
    }
    inbox_.close();
  }

  int fd_;
  std::mutex write_mu_;
  bool shut_ = false;
  Mailbox inbox_;
  std::thread reader_;
};

constexpr std::uint32_t kPreambleMagic = 0x5553504d;  // "MPSU"

}  // namespace

std::vector<ChannelSet> make_memory_mesh(std::size_t m) {
  std::vector<ChannelSet> mesh(m);
  for (auto& row : mesh) row.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      auto pipe = std::make_shared<MemoryPipe>();
      mesh[i][j] = std::make_unique<MemoryChannel>(pipe, 0);
      mesh[j][i] = std::make_unique<MemoryChannel>(pipe, 1);
    }
  return mesh;
}

TcpListener::TcpListener(std::uint16_t port, const std::string& host) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) fail(Errc::ChannelClosed, "socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    fail(Errc::InvalidConfig, "bad listen address " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 64) != 0) {
    ::close(fd_);
    fail(Errc::ChannelClosed, "cannot listen on " + host + ":" + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

namespace {

int dial(const PeerAddress& to, std::chrono::steady_clock::time_point deadline) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(to.port);
  if (::inet_pton(AF_INET, to.host.c_str(), &addr.sin_addr) != 1)
    fail(Errc::InvalidConfig, "bad peer address " + to.host);
  for (;;) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) fail(Errc::ChannelClosed, "socket() failed");
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) return fd;
    ::close(fd);
    if (std::chrono::steady_clock::now() > deadline) fail(Errc::Timeout, "cannot reach peer");
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace

ChannelSet tcp_connect_mesh(PartyId self, const std::vector<PeerAddress>& addresses,
                            TcpListener& listener, std::chrono::milliseconds timeout) {
  const std::size_t m = addresses.size();
  if (self >= m) fail(Errc::InvalidConfig, "party id out of range");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  ChannelSet links(m);

  for (PartyId peer = 0; peer < self; ++peer) {
    int fd = dial(addresses[peer], deadline);
    Writer w;
    w.u32(kPreambleMagic).u32(static_cast<std::uint32_t>(self));
    auto pre = w.take();
    if (!write_all(fd, pre.data(), pre.size())) {
      ::close(fd);
      fail(Errc::PeerCrash, "preamble send failed");
    }
    links[peer] = std::make_unique<TcpChannel>(fd);
  }

  std::size_t expected = m - 1 - self;
  while (expected > 0) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) fail(Errc::Timeout, "peers did not connect in time");
    pollfd pfd{listener.fd(), POLLIN, 0};
    if (::poll(&pfd, 1, static_cast<int>(left.count())) <= 0) continue;
    int fd = ::accept(listener.fd(), nullptr, nullptr);
    if (fd < 0) continue;
    std::uint8_t pre[8];
    if (!read_all(fd, pre, sizeof pre)) {
      ::close(fd);
      continue;
    }
    Reader r({pre, sizeof pre});
    const auto magic = r.u32();
    const auto peer = static_cast<PartyId>(r.u32());
    if (magic != kPreambleMagic || peer <= self || peer >= m || links[peer]) {
      ::close(fd);
      continue;
    }
    links[peer] = std::make_unique<TcpChannel>(fd);
    --expected;
  }
  return links;
}

}  // namespace mpsu
