#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace angelfish {

using Bytes = std::vector<uint8_t>;
using PartyId = uint32_t;
using Round = uint64_t;
// Virtual time in simulator delay units.
using SimTime = int64_t;

struct CodecError : std::runtime_error {
  explicit CodecError(const std::string& what) : std::runtime_error(what) {}
};

// Append-only writer for the canonical wire format. All integers are
// little-endian fixed width; variable-length fields are length-prefixed,
// which keeps the encoding injective.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }

  void u32(uint32_t v) {
    for (int i = 0; i < 4; i++) buf_.push_back(uint8_t(v >> (8 * i)));
  }

  void u64(uint64_t v) {
    for (int i = 0; i < 8; i++) buf_.push_back(uint8_t(v >> (8 * i)));
  }

  void i64(int64_t v) { u64(uint64_t(v)); }

  void raw(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }

  void blob(const Bytes& b) {
    u32(uint32_t(b.size()));
    raw(b.data(), b.size());
  }

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data)
      : p_(data.data()), end_(data.data() + data.size()) {}

  uint8_t u8() {
    need(1);
    return *p_++;
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= uint32_t(p_[i]) << (8 * i);
    p_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= uint64_t(p_[i]) << (8 * i);
    p_ += 8;
    return v;
  }

  int64_t i64() { return int64_t(u64()); }

  void raw(uint8_t* out, size_t n) {
    need(n);
    std::memcpy(out, p_, n);
    p_ += n;
  }

  Bytes blob() {
    uint32_t n = u32();
    need(n);
    Bytes out(p_, p_ + n);
    p_ += n;
    return out;
  }

  size_t remaining() const { return size_t(end_ - p_); }
  bool empty() const { return p_ == end_; }

  // Decoders call this at the end so trailing garbage is rejected and
  // decode(encode(x)) == x remains an exact inverse.
  void expect_end() const {
    if (!empty()) throw CodecError("trailing bytes after message");
  }

 private:
  void need(size_t n) const {
    if (size_t(end_ - p_) < n) throw CodecError("message truncated");
  }

  const uint8_t* p_;
  const uint8_t* end_;
};

// SplitMix64, used to derive independent deterministic streams from a run
// seed. Good enough statistical quality for simulation scheduling and
// propose-flag sampling; not a cryptographic primitive.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seeds(uint64_t a, uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

}  // namespace angelfish
