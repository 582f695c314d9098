#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "htype/errors.hpp"
#include "htype/linalg.hpp"

namespace htype {

/// Real Clifford module: k antisymmetric 2n x 2n matrices with
/// J_i J_j + J_j J_i = -2 delta_ij I.
struct CliffordModule {
  int k = 0;
  int n2 = 0;
  std::vector<Matrix> generators;

  /// J_T = sum_j t_j J_j for a center vector t.
  Matrix j_of(const Vector& t) const {
    Matrix out = Matrix::Zero(n2, n2);
    for (int j = 0; j < k; ++j) out += t(j) * generators[j];
    return out;
  }
};

struct VerificationReport {
  double max_antisymmetry = 0.0;
  double max_relation = 0.0;
  double tolerance = 1e-10;
  bool pass = false;
};

struct IwasawaWitness {
  int x_index = 0;   // basis vector e_x of the horizontal space
  int t1 = 0;        // center basis indices, t1 != t2
  int t2 = 0;
  double residual = 0.0;
};

struct IwasawaResult {
  bool iwasawa = false;
  double max_residual = 0.0;
  double tolerance = 1e-9;
  std::optional<IwasawaWitness> witness;
};

/// d(k): minimal dimension of a real Cl_{0,k} module. d(1..8) = 2,4,4,8,8,8,8,16,
/// d(k+8) = 16 d(k).
inline int minimal_module_dimension(int k) {
  if (k < 1) throw InvalidArgument("minimal_module_dimension: k must be >= 1");
  static constexpr std::array<int, 8> base = {2, 4, 4, 8, 8, 8, 8, 16};
  int factor = 1;
  while (k > 8) {
    k -= 8;
    factor *= 16;
  }
  return factor * base[k - 1];
}

namespace detail {

using Quat = std::array<double, 4>;

inline Quat quat_mul(const Quat& a, const Quat& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}
inline Quat quat_conj(const Quat& a) { return {a[0], -a[1], -a[2], -a[3]}; }

using Oct = std::array<double, 8>;

// Cayley-Dickson: (a,b)(c,d) = (ac - d*b, da + bc*)
inline Oct oct_mul(const Oct& x, const Oct& y) {
  Quat a{x[0], x[1], x[2], x[3]}, b{x[4], x[5], x[6], x[7]};
  Quat c{y[0], y[1], y[2], y[3]}, d{y[4], y[5], y[6], y[7]};
  Quat ac = quat_mul(a, c), db = quat_mul(quat_conj(d), b);
  Quat da = quat_mul(d, a), bc = quat_mul(b, quat_conj(c));
  Oct out;
  for (int i = 0; i < 4; ++i) {
    out[i] = ac[i] - db[i];
    out[i + 4] = da[i] + bc[i];
  }
  return out;
}

inline Matrix quaternion_left(int unit) {
  Matrix m(4, 4);
  Quat q{};
  q[unit] = 1.0;
  for (int c = 0; c < 4; ++c) {
    Quat e{};
    e[c] = 1.0;
    Quat r = quat_mul(q, e);
    for (int i = 0; i < 4; ++i) m(i, c) = r[i];
  }
  return m;
}

inline Matrix octonion_left(int unit) {
  Matrix m(8, 8);
  Oct q{};
  q[unit] = 1.0;
  for (int c = 0; c < 8; ++c) {
    Oct e{};
    e[c] = 1.0;
    Oct r = oct_mul(q, e);
    for (int i = 0; i < 8; ++i) m(i, c) = r[i];
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Generators of the irreducible module for k in 1..8 (integer entries).
inline std::vector<Matrix> irreducible_base(int k) {
  std::vector<Matrix> gens;
  if (k == 1) {
    Matrix j(2, 2);
    j << 0.0, -1.0, 1.0, 0.0;
    gens.push_back(j);
  } else if (k <= 3) {
    for (int u = 1; u <= k; ++u) gens.push_back(quaternion_left(u));
  } else if (k <= 7) {
    for (int u = 1; u <= k; ++u) gens.push_back(octonion_left(u));
  } else {
    // k = 8: double the k = 7 module, diag(E_i, -E_i) plus [[0,-I],[I,0]]
    const Matrix i8 = Matrix::Identity(8, 8);
    for (int u = 1; u <= 7; ++u) {
      Matrix e = octonion_left(u);
      Matrix d = Matrix::Zero(16, 16);
      d.topLeftCorner(8, 8) = e;
      d.bottomRightCorner(8, 8) = -e;
      gens.push_back(d);
    }
    Matrix last = Matrix::Zero(16, 16);
    last.topRightCorner(8, 8) = -i8;
    last.bottomLeftCorner(8, 8) = i8;
    gens.push_back(last);
  }
  return gens;
}

inline std::vector<Matrix> irreducible(int k) {
  if (k <= 8) return irreducible_base(k);
  // period 8: F_a (x) I and omega (x) E_i, omega = F_1...F_8 (symmetric, omega^2 = I)
  const std::vector<Matrix> f = irreducible_base(8);
  const std::vector<Matrix> e = irreducible(k - 8);
  Matrix omega = Matrix::Identity(16, 16);
  for (const auto& fa : f) omega = omega * fa;
  const Matrix id = Matrix::Identity(e.front().rows(), e.front().rows());
  std::vector<Matrix> gens;
  for (const auto& fa : f) gens.push_back(kron(fa, id));
  for (const auto& ei : e) gens.push_back(kron(omega, ei));
  return gens;
}

}  // namespace detail

/// Deterministic generator family with 2n = multiplicity * d(k). Entries are 0, +-1.
inline CliffordModule build_generators(int k, int multiplicity) {
  if (k < 1) throw InvalidArgument("build_generators: k must be >= 1");
  if (multiplicity < 1) throw InvalidArgument("build_generators: multiplicity must be >= 1");
  const std::vector<Matrix> irr = detail::irreducible(k);
  const int d = static_cast<int>(irr.front().rows());
  CliffordModule m;
  m.k = k;
  m.n2 = d * multiplicity;
  for (const auto& g : irr) {
    Matrix block = Matrix::Zero(m.n2, m.n2);
    for (int r = 0; r < multiplicity; ++r) block.block(r * d, r * d, d, d) = g;
    m.generators.push_back(std::move(block));
  }
  return m;
}

inline VerificationReport verify_clifford(const CliffordModule& module, double tolerance = 1e-10) {
  VerificationReport rep;
  rep.tolerance = tolerance;
  if (module.k < 1 || module.n2 < 2 || module.n2 % 2 != 0 ||
      static_cast<int>(module.generators.size()) != module.k) {
    rep.max_antisymmetry = rep.max_relation = std::numeric_limits<double>::infinity();
    return rep;
  }
  const Matrix id = Matrix::Identity(module.n2, module.n2);
  for (int i = 0; i < module.k; ++i) {
    const Matrix& ji = module.generators[i];
    if (ji.rows() != module.n2 || ji.cols() != module.n2) {
      rep.max_antisymmetry = rep.max_relation = std::numeric_limits<double>::infinity();
      return rep;
    }
    rep.max_antisymmetry = std::max(rep.max_antisymmetry, (ji + ji.transpose()).norm());
    for (int j = i; j < module.k; ++j) {
      const Matrix& jj = module.generators[j];
      Matrix rel = ji * jj + jj * ji + (i == j ? 2.0 : 0.0) * id;
      rep.max_relation = std::max(rep.max_relation, rel.norm());
    }
  }
  rep.pass = rep.max_antisymmetry <= tolerance && rep.max_relation <= tolerance;
  return rep;
}

inline void require_verified(const CliffordModule& module, const char* where) {
  const VerificationReport rep = verify_clifford(module);
  if (!rep.pass)
    throw UnverifiedModule(std::string(where) + ": module fails the Clifford relations (antisymmetry " +
                           std::to_string(rep.max_antisymmetry) + ", relation " +
                           std::to_string(rep.max_relation) + ")");
}

/// J_{T1} J_{T2} X in span{J_1 X, ..., J_k X} for every basis X and every
/// orthonormal pair T1 != T2 of the center basis.
inline IwasawaResult is_iwasawa_type(const CliffordModule& module, double tolerance = 1e-9) {
  require_verified(module, "is_iwasawa_type");
  IwasawaResult res;
  res.tolerance = tolerance;
  const int n2 = module.n2, k = module.k;
  for (int a = 0; a < n2; ++a) {
    Matrix span(n2, k);
    for (int l = 0; l < k; ++l) span.col(l) = module.generators[l].col(a);
    auto qr = span.colPivHouseholderQr();
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const Vector v = module.generators[i] * module.generators[j].col(a);
        const Vector coef = qr.solve(v);
        const double r = (span * coef - v).norm();
        if (r > res.max_residual) res.max_residual = r;
        if (r > tolerance && !res.witness) res.witness = IwasawaWitness{a, i, j, r};
      }
    }
  }
  res.iwasawa = !res.witness.has_value();
  return res;
}

}  // namespace htype
