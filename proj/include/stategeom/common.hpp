#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace stategeom {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

constexpr cxd I{0.0, 1.0};

// Shared tolerances, stated once and reused by every module.
namespace tol {
constexpr double eps_norm = 1e-8;        // norm / biorthonormalization drift
constexpr double eps_fd = 1e-4;          // identity residuals, FD derivative mode
constexpr double eps_analytic = 1e-10;   // identity residuals, analytic derivative mode
constexpr double eps_p = 1e-12;          // below this |Psi|^2 the phase is degenerate
constexpr double ep_tol = 1e-8;          // exceptional-point gap, relative to spectral radius
constexpr int dense_dim_cap = 512;       // density-matrix trace forms stay dense below this
}  // namespace tol

namespace errc {
inline constexpr const char* config = "CONFIG_ERROR";
inline constexpr const char* shape_mismatch = "SHAPE_MISMATCH";
inline constexpr const char* domain_violation = "DOMAIN_VIOLATION";
inline constexpr const char* non_finite = "NON_FINITE";
inline constexpr const char* normalization = "NORMALIZATION_VIOLATION";
inline constexpr const char* exceptional_point = "EXCEPTIONAL_POINT";
inline constexpr const char* dimension_cap = "DIMENSION_CAP";
inline constexpr const char* singular_metric = "SINGULAR_METRIC";
inline constexpr const char* alpha_domain = "ALPHA_DOMAIN";
inline constexpr const char* degenerate_phase = "DEGENERATE_PHASE";
inline constexpr const char* numerical = "NUMERICAL_ERROR";
}  // namespace errc

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  Error(std::string code, const std::string& msg, RVec theta)
      : std::runtime_error(msg), code_(std::move(code)), theta_(std::move(theta)) {}

  const std::string& code() const { return code_; }
  const std::optional<RVec>& theta() const { return theta_; }

 private:
  std::string code_;
  std::optional<RVec> theta_;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const RVec& v) { return v.allFinite(); }

}  // namespace stategeom
