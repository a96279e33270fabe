#pragma once

// Shared primitives: ids, 2D geometry, angle helpers, error taxonomy and a
// deterministic random generator (the stdlib distributions are
// implementation-defined, so anything that must reproduce byte-for-byte
// across toolchains draws through Rng instead).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace crowdocean {

using AgentId = std::int64_t;
using FrameIndex = std::int64_t;

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

// Hall's proxemics: social space radius in meters.
inline constexpr double kSocialSpaceRadius = 3.6;

// ---------------------------------------------------------------------------
// Errors. Every failure the CLI can surface maps onto one of three exit
// codes: 1 usage/config, 2 data validation, 3 training/runtime.

class Error : public std::runtime_error {
public:
  Error(std::string message, int exit_code)
      : std::runtime_error(std::move(message)), exit_code_(exit_code) {}

  [[nodiscard]] int exit_code() const noexcept { return exit_code_; }

private:
  int exit_code_;
};

struct UsageError : Error {
  explicit UsageError(std::string m) : Error(std::move(m), 1) {}
};

struct ConfigError : Error {
  explicit ConfigError(std::string m) : Error(std::move(m), 1) {}
};

struct ParseError : Error {
  explicit ParseError(std::string m) : Error(std::move(m), 2) {}
};

struct ValidationError : Error {
  explicit ValidationError(std::string m) : Error(std::move(m), 2) {}
};

struct InsufficientDataError : Error {
  explicit InsufficientDataError(std::string m) : Error(std::move(m), 2) {}
};

// Structural problems in serialized artifacts (model files, score files).
struct FormatError : Error {
  explicit FormatError(std::string m) : Error(std::move(m), 2) {}
};

struct TrainingError : Error {
  explicit TrainingError(std::string m) : Error(std::move(m), 3) {}
};

// ---------------------------------------------------------------------------
// Geometry.

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

  [[nodiscard]] double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Direction of a displacement w.r.t. the reference vector (1,0), in [0,360).
inline double heading_deg(Vec2 displacement) {
  double deg = std::atan2(displacement.y, displacement.x) * kDegPerRad;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg = 0.0;
  return deg;
}

// Smallest absolute angle between two headings in degrees, in [0,180].
inline double angle_gap_deg(double a_deg, double b_deg) {
  double d = std::fabs(a_deg - b_deg);
  d = std::fmod(d, 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

// ---------------------------------------------------------------------------
// Deterministic RNG. The mt19937_64 output sequence is fixed by the standard;
// the distribution mappings are not, so we provide our own.

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0,1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; two uniforms per draw, no cached spare.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Bounded draw via multiply-shift; n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(gen_()) * n) >> 64);
  }

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j =
          static_cast<decltype(i)>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(first[i], first[j]);
    }
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace crowdocean
