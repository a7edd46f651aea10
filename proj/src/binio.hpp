#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "selfalign/errors.hpp"

// Minimal native-endian binary stream helpers for checkpoint files.
namespace selfalign::binio {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void put_f64_array(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), sizeof(double) * n);
}

inline void put_u32_array(std::ostream& os, const std::uint32_t* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), sizeof(std::uint32_t) * n);
}

inline void put_string(std::ostream& os, const std::string& s) {
  put_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_magic(std::ostream& os, const char (&magic)[9]) {
  os.write(magic, 8);
}

inline std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw ParseError("truncated checkpoint");
  return v;
}

inline double get_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw ParseError("truncated checkpoint");
  return v;
}

inline void get_f64_array(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(sizeof(double) * n));
  if (!is) throw ParseError("truncated checkpoint");
}

inline void get_u32_array(std::istream& is, std::uint32_t* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p),
          static_cast<std::streamsize>(sizeof(std::uint32_t) * n));
  if (!is) throw ParseError("truncated checkpoint");
}

inline std::string get_string(std::istream& is) {
  std::uint64_t n = get_u64(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw ParseError("truncated checkpoint");
  return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[9],
                         const char* what) {
  char buf[8];
  is.read(buf, 8);
  if (!is || std::memcmp(buf, magic, 8) != 0) {
    throw ParseError(std::string("bad magic for ") + what);
  }
}

}  // namespace selfalign::binio
