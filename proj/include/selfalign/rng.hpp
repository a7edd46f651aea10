#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "selfalign/errors.hpp"

namespace selfalign {

// Deterministic RNG. The mt19937_64 engine is specified bit-for-bit by the
// standard; the distribution transforms are hand-rolled because the standard
// library's distributions are not portable across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // uniform in [0, 1), 53 bits of precision
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Box-Muller, one value cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1] so the log is finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ConfigError("Rng::below called with n = 0");
    std::uint64_t min = (0 - n) % n;  // 2^64 mod n via wraparound
    std::uint64_t x;
    do {
      x = eng_();
    } while (x < min);
    return x % n;
  }

  // Fisher-Yates with the unbiased draw above
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string save_state() const {
    std::ostringstream os;
    os << eng_ << ' ' << (has_spare_ ? 1 : 0) << ' '
       << std::bit_cast<std::uint64_t>(spare_);
    return os.str();
  }

  void load_state(const std::string& s) {
    std::istringstream is(s);
    int hs = 0;
    std::uint64_t bits = 0;
    is >> eng_ >> hs >> bits;
    if (!is) throw ParseError("malformed rng state string");
    has_spare_ = hs != 0;
    spare_ = std::bit_cast<double>(bits);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// 64-bit finalizer used wherever a seed or hash needs dispersal.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace selfalign
