#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace orgbin {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, records, labels).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or usage; detected before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Failure while running an otherwise valid job (I/O on output, divergence).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

namespace log {

enum class Level { info, warn };

using Sink = std::function<void(Level, std::string_view)>;

// Info messages are dropped by the default sink unless verbose is set.
inline bool& verbose() {
  static bool v = false;
  return v;
}

inline Sink& sink() {
  static Sink s = [](Level level, std::string_view msg) {
    if (level == Level::warn)
      std::clog << "warning: " << msg << '\n';
    else if (verbose())
      std::clog << msg << '\n';
  };
  return s;
}

inline void set_sink(Sink s) { sink() = std::move(s); }

inline void warn(std::string_view msg) {
  if (sink()) sink()(Level::warn, msg);
}

inline void info(std::string_view msg) {
  if (sink()) sink()(Level::info, msg);
}

// Swaps the sink for the lifetime of the guard.
class ScopedSink {
 public:
  explicit ScopedSink(Sink s) : previous_(std::exchange(sink(), std::move(s))) {}
  ~ScopedSink() { sink() = std::move(previous_); }
  ScopedSink(const ScopedSink&) = delete;
  ScopedSink& operator=(const ScopedSink&) = delete;

 private:
  Sink previous_;
};

}  // namespace log

// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }
  void update_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<unsigned char>(v >> (8 * i));
      state_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a label.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                                 std::uint64_t index = 0) {
  Fnv1a h;
  h.update(label);
  return splitmix64(splitmix64(base ^ h.digest()) + index);
}

// Seeded generator whose outputs are fixed by the standard engine definition.
// Distributions are computed here rather than with <random> adaptors, whose
// algorithms vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform in [0, n).
  std::size_t below(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace orgbin
