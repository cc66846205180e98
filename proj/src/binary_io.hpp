#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "dgles/error.hpp"

namespace dgles::detail {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

/// Reader that tracks the byte offset so truncation errors can name it.
class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  std::size_t offset() const { return offset_; }

  std::string line() {
    std::string s;
    if (!std::getline(in_, s))
      throw ParseError("unexpected end of file in header at byte offset " +
                           std::to_string(offset_),
                       offset_);
    offset_ += s.size() + 1;
    return s;
  }

  template <class T>
  T get(const char* what) {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(T)))
      throw ParseError(std::string("truncated file: expected ") + what +
                           " at byte offset " + std::to_string(offset_),
                       offset_);
    offset_ += sizeof(T);
    return to_little(v);
  }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

}  // namespace dgles::detail
