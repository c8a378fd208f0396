#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace isac {

inline constexpr double kSpeedOfLight = 299792458.0;

template <typename Scalar>
constexpr Scalar deg2rad(Scalar deg) { return deg * std::numbers::pi_v<Scalar> / Scalar(180); }

template <typename Scalar>
constexpr Scalar rad2deg(Scalar rad) { return rad * Scalar(180) / std::numbers::pi_v<Scalar>; }

/// Wraps an angle in radians to (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi_v<Scalar>) a += two_pi;
  return a;
}

// Error hierarchy. The CLI maps ConfigError to exit code 2 and FormatError to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Frame/grid shape mismatch between pipeline stages.
class FrameError : public Error {
 public:
  using Error::Error;
};

/// Out-of-order or inconsistent streaming input.
class StreamError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : Error(what + " (at byte offset " + std::to_string(byte_offset) + ")"), offset_(byte_offset) {}
  std::uint64_t byte_offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// splitmix64 finalizer; used to derive independent per-stream seeds from counters.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename... Ts>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Ts... counters) {
  std::uint64_t h = mix64(seed);
  ((h = mix64(h ^ static_cast<std::uint64_t>(counters))), ...);
  return h;
}

}  // namespace isac
