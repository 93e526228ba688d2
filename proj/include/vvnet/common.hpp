#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vvnet {

// Error categories surfaced by the CLI as "error: <category>: <message>".
enum class ErrorCategory { io, parse, config, shape, domain };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), cat_(cat) {}

  ErrorCategory category() const noexcept { return cat_; }

  const char* category_name() const noexcept {
    switch (cat_) {
      case ErrorCategory::io: return "io";
      case ErrorCategory::parse: return "parse";
      case ErrorCategory::config: return "config";
      case ErrorCategory::shape: return "shape";
      case ErrorCategory::domain: return "domain";
    }
    return "unknown";
  }

private:
  ErrorCategory cat_;
};

[[noreturn]] inline void fail(ErrorCategory cat, const std::string& msg) {
  throw Error(cat, msg);
}

inline void require(bool cond, ErrorCategory cat, const std::string& msg) {
  if (!cond) fail(cat, msg);
}

// Deterministic RNG. splitmix64 core with hand-rolled distributions so that
// identical seeds give bit-identical streams on every platform; the standard
// library distributions are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller, one cached draw
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace vvnet
