// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sidpmm {

// mt19937_64 wrapped with hand-rolled draws so that sampling sequences do not
// depend on the standard library's distribution implementations. State is
// round-trippable as text, which the checkpoint format relies on.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased via rejection.
  uint64_t uniform_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be > 0");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via the polar method. The spare value is discarded so the
  // object carries no extra state beyond the engine.
  double normal() {
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  static Rng deserialize(const std::string& s) {
    Rng r;
    std::istringstream is(s);
    is >> r.engine_;
    if (is.fail()) throw std::runtime_error("Rng::deserialize: bad state string");
    return r;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Derives a child seed for a named pipeline stage from the master seed.
inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
  uint64_t h = 14695981039346656037ull ^ master;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace sidpmm
