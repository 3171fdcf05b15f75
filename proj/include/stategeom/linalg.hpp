#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include "stategeom/common.hpp"

namespace stategeom {

// Matrix exponential (scaling-and-squaring Pade, via Eigen).
inline Mat expm(const Mat& a) { return a.exp(); }

// SVD pseudo-inverse solve of a real system with a relative singular-value
// cutoff. Optionally reports the condition number of the retained part.
inline RVec pinv_solve(const RMat& a, const RVec& b, double rel_cutoff,
                       double* cond = nullptr) {
  Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax <= 0.0) throw Error(errc::singular_metric, "matrix is numerically zero");
  const double cut = rel_cutoff * smax;
  double smin_kept = smax;
  int kept = 0;
  RVec y = svd.matrixU().transpose() * b;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cut) {
      y(k) /= sv(k);
      smin_kept = sv(k);
      ++kept;
    } else {
      y(k) = 0.0;
    }
  }
  if (kept == 0) throw Error(errc::singular_metric, "all singular values below cutoff");
  if (cond) *cond = smax / smin_kept;
  return svd.matrixV() * y;
}

// Real least-squares solution of a complex system A x = b for a real unknown
// x: stacks real and imaginary parts into a 2n x n real system.
inline RVec complex_lsq_real(const Mat& a, const Vec& b, double rel_cutoff,
                             double* cond = nullptr) {
  const Eigen::Index r = a.rows(), c = a.cols();
  RMat s(2 * r, c);
  s.topRows(r) = a.real();
  s.bottomRows(r) = a.imag();
  RVec rhs(2 * r);
  rhs.head(r) = b.real();
  rhs.tail(r) = b.imag();
  return pinv_solve(s, rhs, rel_cutoff, cond);
}

inline double spectral_radius(const Mat& h) {
  Eigen::ComplexEigenSolver<Mat> es(h, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace stategeom
