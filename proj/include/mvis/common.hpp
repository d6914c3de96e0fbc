#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mvis {

using cplx = std::complex<double>;

// Bad user input: CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (non-convergence, broken invariant): exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

inline Axis axis_from_char(char c) {
  switch (c) {
    case 'x': case 'X': return Axis::X;
    case 'y': case 'Y': return Axis::Y;
    case 'z': case 'Z': return Axis::Z;
    default: throw ConfigError(std::string("invalid Pauli axis label '") + c + "'");
  }
}

// Flat index of the (site, axis) coefficient, site-major. Sites are 1-based.
inline int coeff_index(int site, Axis axis) {
  return 3 * (site - 1) + static_cast<int>(axis);
}

// Inner product with extended-precision accumulation; vectors up to 2^24
// entries keep ~1e-15 relative error this way.
inline cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  long double re = 0.0L, im = 0.0L;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const cplx t = std::conj(a[i]) * b[i];
    re += t.real();
    im += t.imag();
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

inline double norm_sq(const std::vector<cplx>& a) {
  long double s = 0.0L;
  for (const cplx& v : a) s += std::norm(v);
  return static_cast<double>(s);
}

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
// worker. Results must not depend on the partition (each index written by
// exactly one worker), which keeps outputs bit-identical for any thread
// count.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    fn(0, n);
    return;
  }
  const std::size_t nt = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(fn, lo, hi);
  }
  for (auto& th : pool) th.join();
}

// Deterministic standard normals from raw mt19937_64 output. Avoids
// std::normal_distribution, whose value sequence is implementation-defined.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  cplx complex_normal() { return {(*this)(), (*this)()}; }

  std::uint64_t next_u64() {
    // xorshift* step; period and quality are plenty for test-vector seeding
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

 private:
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// FNV-1a, used for state-cache keys.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace mvis
