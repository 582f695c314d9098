#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "htype/errors.hpp"

namespace htype {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Outcome of a numerical rank decision.
struct RankInfo {
  int rank = 0;
  double sigma_max = 0.0;
  double smallest_kept = 0.0;     // 0 when rank == 0
  double largest_dropped = 0.0;   // 0 when nothing was dropped
  /// smallest_kept / largest_dropped; when nothing is dropped the machine
  /// roundoff floor eps * sigma_max stands in for the dropped value.
  double gap = std::numeric_limits<double>::infinity();
};

inline constexpr double kRankCutoff = 1e-8;
inline constexpr double kMinGap = 1e6;

namespace detail {

inline RankInfo rank_from_singular_values(const Vector& s, double cutoff) {
  RankInfo info;
  if (s.size() == 0) return info;
  info.sigma_max = s(0);
  if (info.sigma_max == 0.0) return info;
  const double threshold = cutoff * info.sigma_max;
  int r = 0;
  while (r < s.size() && s(r) > threshold) ++r;
  info.rank = r;
  info.smallest_kept = r > 0 ? s(r - 1) : 0.0;
  info.largest_dropped = r < s.size() ? s(r) : 0.0;
  const double floor = std::numeric_limits<double>::epsilon() * info.sigma_max;
  if (r == 0) {
    info.gap = 0.0;
  } else {
    info.gap = info.smallest_kept / std::max(info.largest_dropped, floor);
  }
  return info;
}

inline void require_gap(const RankInfo& info, const char* what) {
  if (info.rank > 0 && info.largest_dropped > 0.0 && info.gap < kMinGap) {
    throw RankAmbiguity(std::string(what) + ": no spectral gap (kept " +
                        std::to_string(info.smallest_kept) + ", dropped " +
                        std::to_string(info.largest_dropped) + ")");
  }
}

}  // namespace detail

/// Orthonormal basis of ker(A) (columns) by SVD with a relative rank cutoff.
/// Throws RankAmbiguity when kept and dropped singular values are not separated.
inline Matrix null_space(const Matrix& a, RankInfo* info_out = nullptr,
                         double cutoff = kRankCutoff) {
  const Eigen::Index cols = a.cols();
  if (a.rows() == 0) {
    if (info_out) *info_out = RankInfo{};
    return Matrix::Identity(cols, cols);
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullV);
  Vector s = svd.singularValues();
  // pad to `cols` so that columns beyond min(rows, cols) count as dropped
  Vector padded = Vector::Zero(cols);
  padded.head(s.size()) = s;
  RankInfo info = detail::rank_from_singular_values(padded, cutoff);
  detail::require_gap(info, "null_space");
  if (info_out) *info_out = info;
  return svd.matrixV().rightCols(cols - info.rank);
}

/// Orthonormal basis of range(A) (columns).
inline Matrix range_basis(const Matrix& a, RankInfo* info_out = nullptr,
                          double cutoff = kRankCutoff) {
  if (a.cols() == 0 || a.rows() == 0) {
    if (info_out) *info_out = RankInfo{};
    return Matrix(a.rows(), 0);
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU);
  RankInfo info = detail::rank_from_singular_values(svd.singularValues(), cutoff);
  detail::require_gap(info, "range_basis");
  if (info_out) *info_out = info;
  return svd.matrixU().leftCols(info.rank);
}

/// Build the dense matrix of a linear map given as a callable acting on
/// flat coordinate vectors of length `n`.
template <class LinearMap>
Matrix matrix_of(LinearMap&& map, Eigen::Index n) {
  Vector e = Vector::Zero(n);
  Vector first = map(e);  // zero image, fixes row count
  Matrix out(first.size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    e.setZero();
    e(i) = 1.0;
    out.col(i) = map(e);
  }
  return out;
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace htype
