#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "dre/error.hpp"

// Little-endian primitive I/O shared by the checkpoint and store formats.
namespace dre::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

// Tracks the byte offset so truncation errors can say where they happened.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T read(const char* what) {
    static_assert(std::is_trivially_copyable_v<T>);
    T value;
    bytes(reinterpret_cast<char*>(&value), sizeof(T), what);
    return value;
  }

  void bytes(char* dst, std::size_t count, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(count));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != count) {
      throw FormatError(std::string("truncated file: expected ") + std::to_string(count) +
                        " bytes of " + what + " at byte offset " + std::to_string(offset_) +
                        ", found " + std::to_string(got));
    }
    offset_ += count;
  }

  std::string string(std::size_t count, const char* what) {
    std::string s(count, '\0');
    bytes(s.data(), count, what);
    return s;
  }

  std::uint64_t offset() const { return offset_; }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace dre::io
