#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "htype/group.hpp"
#include "htype/random.hpp"

namespace htype::fields {

inline ScalarField constant(int dim, double value) {
  return ScalarField(dim, [value](std::span<const Jet> y) { return Jet::constant(value, y[0].dim()); },
                     "constant");
}

/// base + amp * exp(-|y|^2 / width^2) over all coordinates.
inline ScalarField gaussian(int dim, double base, double amp, double width) {
  if (!(width > 0.0)) throw InvalidArgument("gaussian: width must be positive");
  return ScalarField(dim, [=](std::span<const Jet> y) {
    Jet r2 = Jet::constant(0.0, y[0].dim());
    for (const Jet& c : y) r2 += c * c;
    return base + amp * exp(r2 * (-1.0 / (width * width)));
  }, "gaussian");
}

/// One monomial: coeff * prod y_i^{powers[i]}.
struct Monomial {
  double coeff = 0.0;
  std::vector<int> powers;
};

inline Jet eval_polynomial(const std::vector<Monomial>& terms, std::span<const Jet> y) {
  Jet acc = Jet::constant(0.0, y[0].dim());
  for (const auto& m : terms) {
    Jet term = Jet::constant(m.coeff, y[0].dim());
    for (std::size_t i = 0; i < m.powers.size(); ++i)
      for (int e = 0; e < m.powers[i]; ++e) term *= y[i];
    acc += term;
  }
  return acc;
}

inline ScalarField polynomial(int dim, std::vector<Monomial> terms) {
  for (const auto& m : terms)
    if (static_cast<int>(m.powers.size()) != dim) throw InvalidArgument("polynomial: monomial arity mismatch");
  return ScalarField(dim, [terms = std::move(terms)](std::span<const Jet> y) { return eval_polynomial(terms, y); },
                     "poly");
}

/// exp of a polynomial; always positive.
inline ScalarField exp_polynomial(int dim, std::vector<Monomial> terms) {
  for (const auto& m : terms)
    if (static_cast<int>(m.powers.size()) != dim) throw InvalidArgument("exp_polynomial: monomial arity mismatch");
  return ScalarField(dim, [terms = std::move(terms)](std::span<const Jet> y) { return exp(eval_polynomial(terms, y)); },
                     "exppoly");
}

inline ScalarField product(const ScalarField& a, const ScalarField& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("product: dimension mismatch");
  return ScalarField(a.dim(), [a, b](std::span<const Jet> y) { return a(y) * b(y); }, a.name() + "*" + b.name());
}

inline ScalarField power(const ScalarField& a, double p) {
  return ScalarField(a.dim(), [a, p](std::span<const Jet> y) { return pow(a(y), p); }, a.name() + "^p");
}

/// C ((1 + |x|^2)^2 + 16 |t|^2)^{-(Q-2)/4}.
inline ScalarField gv_profile(int n2, int k, double c) {
  if (!(c > 0.0)) throw InvalidArgument("gv_profile: C must be positive");
  const int q = n2 + 2 * k;
  return ScalarField(n2 + k, [=](std::span<const Jet> y) {
    Jet x2 = Jet::constant(1.0, y[0].dim());
    for (int a = 0; a < n2; ++a) x2 += y[a] * y[a];
    Jet t2 = Jet::constant(0.0, y[0].dim());
    for (int j = 0; j < k; ++j) t2 += y[n2 + j] * y[n2 + j];
    return c * pow(x2 * x2 + 16.0 * t2, -(q - 2) / 4.0);
  }, "gv");
}

/// Smooth positive field exp(sum_i a_i sin(b_i . y + phi_i)) with random
/// frequencies; bounded between exp(-sum|a_i|) and exp(sum|a_i|).
inline ScalarField random_positive(int dim, std::uint64_t seed, int modes = 3, double amplitude = 0.2,
                                   double frequency = 0.7) {
  Rng rng(seed);
  std::vector<double> a(modes), phi(modes);
  std::vector<Vector> b(modes);
  for (int i = 0; i < modes; ++i) {
    a[i] = amplitude * rng.uniform(0.5, 1.0);
    b[i] = frequency * rng.normal_vector(dim);
    phi[i] = rng.uniform(0.0, 6.283185307179586);
  }
  return ScalarField(dim, [=](std::span<const Jet> y) {
    Jet s = Jet::constant(0.0, y[0].dim());
    for (int i = 0; i < modes; ++i) {
      Jet arg = Jet::constant(phi[i], y[0].dim());
      for (int d = 0; d < dim; ++d) arg += b[i](d) * y[d];
      s += a[i] * sin(arg);
    }
    return exp(s);
  }, "random");
}

}  // namespace htype::fields
