#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mutomo/error.hpp"

namespace mutomo::binio {

// Little-endian encoders independent of host byte order.

inline void put_u8(std::string& buf, std::uint8_t v) { buf.push_back(static_cast<char>(v)); }

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }
inline void put_f32(std::string& buf, float v) { put_u32(buf, std::bit_cast<std::uint32_t>(v)); }

inline void put_bytes(std::string& buf, std::string_view bytes) { buf.append(bytes); }

/// Bounds-checked cursor over an in-memory byte buffer.
class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }

  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(bytes(1, what)[0]); }
  std::uint32_t u32(const char* what) {
    auto b = bytes(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint64_t u64(const char* what) {
    auto b = bytes(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw DecodeError(DecodeErrorKind::truncated, std::string("while reading ") + what);
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::string slurp(std::istream& in) {
  std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw DecodeError(DecodeErrorKind::io, "stream read failed");
  return data;
}

}  // namespace mutomo::binio
