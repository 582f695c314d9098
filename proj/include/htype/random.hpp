#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "htype/linalg.hpp"

namespace htype {

/// Seeded generator with platform-independent uniform and normal draws
/// (the std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller, one draw per call
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  /// Haar-ish random orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
  Matrix orthogonal(Eigen::Index n) {
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i)
      if (r(i, i) < 0) q.col(i) = -q.col(i);
    return q;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

namespace detail {
inline constexpr std::array<int, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                23, 29, 31, 37, 41, 43, 47, 53,
                                                59, 61, 67, 71, 73, 79, 83, 89};

inline double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}
}  // namespace detail

/// Halton points in the box [lo, hi]^dim with a seeded Cranley-Patterson shift,
/// skipping points within `exclusion_radius` of the origin.
inline std::vector<Vector> quasi_random_points(int count, int dim, std::uint64_t seed,
                                               double lo = -2.0, double hi = 2.0,
                                               double exclusion_radius = 0.1) {
  if (dim > static_cast<int>(detail::kPrimes.size()))
    throw InvalidArgument("quasi_random_points: dimension too large");
  Rng rng(seed);
  std::vector<double> shift(dim);
  for (auto& s : shift) s = rng.uniform();
  std::vector<Vector> out;
  out.reserve(count);
  for (std::uint64_t i = 1; static_cast<int>(out.size()) < count; ++i) {
    Vector p(dim);
    for (int d = 0; d < dim; ++d) {
      double u = detail::radical_inverse(i, detail::kPrimes[d]) + shift[d];
      u -= std::floor(u);
      p(d) = lo + (hi - lo) * u;
    }
    if (p.norm() > exclusion_radius) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace htype
