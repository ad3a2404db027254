#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mpsu/common.hpp"

namespace mpsu {

/// Wire tags. Unknown tags are rejected when decoding.
enum class Tag : std::uint8_t {
  Hello = 1,
  OtSetup,
  OtBaseS1,
  OtBaseS2,
  OtDerand,
  OtExtMatrix,
  TripleSetup,
  OprfQuery,
  OprfResponse,
  OkvsTable,
  GmwAndLayer,
  MssrotDelta,
  MssrotPad,
  ShufSwitchOt,
  ShufMask,
  PkPublicKey,
  PkOtMessages,
  PkRerand,
  PkCiphertexts,
  PidRing,
  ReconShares,
  UnionBroadcast,
  AppData,
};

inline constexpr std::uint8_t kMaxTag = static_cast<std::uint8_t>(Tag::AppData);
inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::size_t kMaxFramePayload = std::size_t{1} << 30;

const char* tag_name(Tag tag);

struct Frame {
  Tag tag = Tag::AppData;
  Bytes payload;

  std::size_t wire_size() const { return kFrameHeaderBytes + payload.size(); }
  friend bool operator==(const Frame&, const Frame&) = default;
};

/// tag (1 byte) || u32 little-endian payload length || payload
Bytes encode_frame(const Frame& f);
/// Decodes exactly one frame; anything else raises MalformedMessage.
Frame decode_frame(ByteSpan bytes);
/// Validates a 5-byte header and returns (tag, payload length).
std::pair<Tag, std::size_t> decode_frame_header(ByteSpan header);

/// Ordered, reliable, bidirectional link to one peer.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(Frame frame) = 0;
  /// Timeout if nothing arrives in time; PeerCrash once the peer has gone away.
  virtual Frame recv(std::chrono::milliseconds timeout) = 0;
  /// Tear the link down; the peer observes PeerCrash.
  virtual void close() = 0;
};

using ChannelSet = std::vector<std::unique_ptr<Channel>>;  // indexed by peer id; own slot empty

/// Full mesh of in-memory FIFO links for `m` parties: result[i][j] links i to j.
std::vector<ChannelSet> make_memory_mesh(std::size_t m);

/// Listening socket bound before parties start so in-process TCP sessions can
/// use ephemeral ports.
class TcpListener {
 public:
  /// port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port, const std::string& host = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  int fd() const { return fd_; }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

struct PeerAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Connects party `self` to every other party: it dials lower ids and
/// accepts higher ids. Each connection opens with a preamble (magic, party id).
ChannelSet tcp_connect_mesh(PartyId self, const std::vector<PeerAddress>& addresses,
                            TcpListener& listener, std::chrono::milliseconds timeout);

}  // namespace mpsu
