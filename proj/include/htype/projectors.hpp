#pragma once

#include <vector>

#include "htype/clifford.hpp"
#include "htype/linalg.hpp"

namespace htype {

/// Flat index of a (0,3)-tensor component t(a,b,c) on an n-dimensional space.
inline Eigen::Index tensor_index(int n, int a, int b, int c) { return (static_cast<Eigen::Index>(a) * n + b) * n + c; }

/// Orthogonal projectors onto Sigma(h) (on (0,3)-tensors) and Xi(h) (on
/// endomorphisms, column-major vectorization), plus the inverse Theta of the
/// first-slot antisymmetrization restricted to D.
///
/// Xi = {A : A^T = -A, A J_i = J_i A}.
/// D  = {t : t(a,b,c) = -t(a,c,b), and for each a the map M_a(c,b) = t(a,b,c) commutes with every J_i}.
/// Sigma = A12(D) with (A12 t)(a,b,c) = t(a,b,c) - t(b,a,c).
struct ProjectorPair {
  int n2 = 0;
  Matrix p_sigma;
  Matrix p_xi;
  Matrix basis_sigma;  // orthonormal columns
  Matrix basis_xi;
  Matrix basis_d;
  Matrix theta;  // Sigma -> D, Theta A12 = id on D
  RankInfo injectivity;
  int dim_sigma() const { return static_cast<int>(basis_sigma.cols()); }
  int dim_xi() const { return static_cast<int>(basis_xi.cols()); }
  int dim_d() const { return static_cast<int>(basis_d.cols()); }
};

inline constexpr int kMaxProjectorDimension = 8;

namespace detail {

inline Matrix endomorphism(const Vector& v, int n) { return Eigen::Map<const Matrix>(v.data(), n, n); }
inline Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix antisymmetrize_first_two(int n) {
  const Eigen::Index size = static_cast<Eigen::Index>(n) * n * n;
  Matrix a = Matrix::Zero(size, size);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < n; ++c) {
        a(tensor_index(n, i, j, c), tensor_index(n, i, j, c)) += 1.0;
        a(tensor_index(n, i, j, c), tensor_index(n, j, i, c)) -= 1.0;
      }
  return a;
}

}  // namespace detail

inline Matrix build_xi_basis(const CliffordModule& module) {
  const int n = module.n2;
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  auto constraints = [&](const Vector& v) {
    const Matrix a = detail::endomorphism(v, n);
    Vector out(nn * (1 + module.k));
    out.head(nn) = detail::flatten(a + a.transpose());
    for (int i = 0; i < module.k; ++i) {
      const Matrix& j = module.generators[i];
      out.segment(nn * (1 + i), nn) = detail::flatten(a * j - j * a);
    }
    return out;
  };
  return null_space(matrix_of(constraints, nn));
}

inline Matrix build_d_basis(const CliffordModule& module) {
  const int n = module.n2;
  const Eigen::Index n3 = static_cast<Eigen::Index>(n) * n * n;
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  auto constraints = [&](const Vector& t) {
    Vector out = Vector::Zero(n3 + n3 * module.k);
    for (int a = 0; a < n; ++a) {
      Matrix m(n, n);  // m(c, b) = t(a, b, c)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          m(c, b) = t(tensor_index(n, a, b, c));
          out(tensor_index(n, a, b, c)) = t(tensor_index(n, a, b, c)) + t(tensor_index(n, a, c, b));
        }
      for (int i = 0; i < module.k; ++i) {
        const Matrix& j = module.generators[i];
        out.segment(n3 + (i * n + a) * nn, nn) = detail::flatten(m * j - j * m);
      }
    }
    return out;
  };
  return null_space(matrix_of(constraints, n3));
}

inline ProjectorPair build_projectors(const CliffordModule& module) {
  require_verified(module, "build_projectors");
  if (module.n2 > kMaxProjectorDimension)
    throw InvalidArgument("build_projectors: dense tensor projectors are limited to 2n <= 8");
  ProjectorPair pp;
  pp.n2 = module.n2;
  pp.basis_xi = build_xi_basis(module);
  pp.p_xi = pp.basis_xi * pp.basis_xi.transpose();
  pp.basis_d = build_d_basis(module);
  const Matrix image = detail::antisymmetrize_first_two(module.n2) * pp.basis_d;
  Eigen::BDCSVD<Matrix> svd(image, Eigen::ComputeThinU | Eigen::ComputeThinV);
  pp.injectivity = detail::rank_from_singular_values(svd.singularValues(), kRankCutoff);
  if (pp.injectivity.rank != pp.basis_d.cols() || pp.injectivity.gap < kMinGap)
    throw InjectivityLoss("build_projectors: antisymmetrization is not injective on D (rank " +
                          std::to_string(pp.injectivity.rank) + " of " + std::to_string(pp.basis_d.cols()) + ")");
  const Eigen::Index r = pp.injectivity.rank;
  pp.basis_sigma = svd.matrixU().leftCols(r);
  pp.p_sigma = pp.basis_sigma * pp.basis_sigma.transpose();
  // Theta = B_D (A12 B_D)^+
  const Vector inv_s = svd.singularValues().head(r).cwiseInverse();
  pp.theta = pp.basis_d * svd.matrixV().leftCols(r) * inv_s.asDiagonal() * svd.matrixU().leftCols(r).transpose();
  return pp;
}

}  // namespace htype
