#pragma once

#include <vector>

#include "stategeom/common.hpp"

namespace stategeom {

// An n x n complex 2-tensor on the parameter manifold together with its four
// canonical parts. With T the stored matrix,
//   g      = real symmetric part,
//   omega  = imaginary antisymmetric part (values; the tensor itself is i*omega),
//   gtilde = imaginary symmetric part (values; tensor is i*gtilde),
//   omtilde = real antisymmetric part,
// so that T = g + omtilde + i*(gtilde + omega).
class GeometricTensor {
 public:
  GeometricTensor() = default;
  explicit GeometricTensor(Mat m) : m_(std::move(m)) {}

  const Mat& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  RMat g() const { return 0.5 * (m_.real() + m_.real().transpose()); }
  RMat omega() const { return 0.5 * (m_.imag() - m_.imag().transpose()); }
  RMat gtilde() const { return 0.5 * (m_.imag() + m_.imag().transpose()); }
  RMat omtilde() const { return 0.5 * (m_.real() - m_.real().transpose()); }

  Mat sym() const { return 0.5 * (m_ + m_.transpose()); }
  Mat asym() const { return 0.5 * (m_ - m_.transpose()); }

  double hermiticity_defect() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

 private:
  Mat m_;
};

// Rank-3 connection coefficients Gamma_{ij,k}, symmetric in (i,j). Stored as
// one complex matrix per k index.
class ConnectionField {
 public:
  ConnectionField() = default;
  explicit ConnectionField(int n) : n_(n), slabs_(n, Mat::Zero(n, n)) {}

  int dim() const { return n_; }
  cxd& at(int i, int j, int k) { return slabs_[k](i, j); }
  cxd at(int i, int j, int k) const { return slabs_[k](i, j); }
  const Mat& slab(int k) const { return slabs_[k]; }

  double symmetry_defect() const {
    double d = 0.0;
    for (int k = 0; k < n_; ++k) d = std::max(d, (slabs_[k] - slabs_[k].transpose()).cwiseAbs().maxCoeff());
    return d;
  }

  double max_imag() const {
    double d = 0.0;
    for (int k = 0; k < n_; ++k) d = std::max(d, slabs_[k].imag().cwiseAbs().maxCoeff());
    return d;
  }

  double max_abs() const {
    double d = 0.0;
    for (int k = 0; k < n_; ++k) d = std::max(d, slabs_[k].cwiseAbs().maxCoeff());
    return d;
  }

  ConnectionField real() const {
    ConnectionField out(n_);
    for (int k = 0; k < n_; ++k) out.slabs_[k] = slabs_[k].real().cast<cxd>();
    return out;
  }

  ConnectionField conjugate() const {
    ConnectionField out(n_);
    for (int k = 0; k < n_; ++k) out.slabs_[k] = slabs_[k].conjugate();
    return out;
  }

  friend ConnectionField operator+(const ConnectionField& a, const ConnectionField& b) {
    ConnectionField out(a.n_);
    for (int k = 0; k < a.n_; ++k) out.slabs_[k] = a.slabs_[k] + b.slabs_[k];
    return out;
  }
  friend ConnectionField operator-(const ConnectionField& a, const ConnectionField& b) {
    ConnectionField out(a.n_);
    for (int k = 0; k < a.n_; ++k) out.slabs_[k] = a.slabs_[k] - b.slabs_[k];
    return out;
  }
  friend ConnectionField operator*(double s, const ConnectionField& a) {
    ConnectionField out(a.n_);
    for (int k = 0; k < a.n_; ++k) out.slabs_[k] = s * a.slabs_[k];
    return out;
  }

  static double max_diff(const ConnectionField& a, const ConnectionField& b) {
    double d = 0.0;
    for (int k = 0; k < a.n_; ++k) d = std::max(d, (a.slabs_[k] - b.slabs_[k]).cwiseAbs().maxCoeff());
    return d;
  }

 private:
  int n_ = 0;
  std::vector<Mat> slabs_;
};

}  // namespace stategeom
