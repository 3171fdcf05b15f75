#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "stategeom/biortho.hpp"
#include "stategeom/common.hpp"
#include "stategeom/fs.hpp"
#include "stategeom/linalg.hpp"
#include "stategeom/state.hpp"

namespace stategeom {

enum class CostKind { hermitian_expectation, biortho_expectation, rr_variance };

struct CostSpec {
  Mat op;
  CostKind kind = CostKind::hermitian_expectation;
};

inline void require_hermitian(const Mat& h) {
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(errc::config, "hermitian_expectation requires H = H^dagger");
}

struct OptimizerOptions {
  double eta = 0.1;
  double eta_r = 0.1;
  double eta_i = 0.1;
  double svd_cutoff = 1e-10;
  int max_iters = 200;
  double grad_tol = 1e-10;
  double cost_tol = 1e-10;
};

inline void validate(const OptimizerOptions& opt) {
  if (!(opt.svd_cutoff > 0.0 && opt.svd_cutoff < 1.0))
    throw Error(errc::config, "svd_cutoff must lie in (0, 1)");
  if (opt.eta < 0.0 || opt.eta_r < 0.0 || opt.eta_i < 0.0)
    throw Error(errc::config, "step sizes must be nonnegative");
  if (opt.max_iters < 0) throw Error(errc::config, "iteration budget must be nonnegative");
}

struct StepRecord {
  RVec theta;
  cxd cost;              // L, E, or the complex biortho cost
  double aux = 0.0;      // rr: the variance cost L^RR
  double grad_norm = 0.0;
  double cond = 0.0;     // metric condition number (retained part)
  double incompatibility = 0.0;
};

struct OptimizerTrace {
  std::vector<StepRecord> steps;
  std::string termination;
  RVec final_theta;
};

namespace detail {

inline Vec apply_op(const Mat& op, const PureState& s) {
  if (s.is_grid) throw Error(errc::config, "matrix costs require a basis-set family");
  if (op.rows() != s.size()) throw Error(errc::shape_mismatch, "operator dimension mismatch");
  return op * s.amplitudes;
}

}  // namespace detail

struct HermitianStep {
  RVec dtheta;
  RVec grad;
  double cond = 0.0;
};

// One natural-gradient step: solve g^FS dtheta = -eta grad L by SVD
// pseudo-inverse with a relative cutoff.
inline HermitianStep qng_step_hermitian(const StateFamily& fam, const CostSpec& cost,
                                        const RVec& theta, const OptimizerOptions& opt) {
  validate(opt);
  if (cost.kind != CostKind::hermitian_expectation)
    throw Error(errc::config, "qng_step_hermitian expects a hermitian_expectation cost");
  require_hermitian(cost.op);
  const PureState s = evaluate(fam, theta);
  require_unit_norm(s, theta);
  const Vec hpsi = detail::apply_op(cost.op, s);
  HermitianStep out;
  out.grad.resize(fam.n);
  for (int i = 0; i < fam.n; ++i)
    out.grad[i] = 2.0 * std::real(inner_on(s, derivative(fam, theta, i), hpsi));
  const RMat g = fs_tensor(fam, theta).g();
  out.dtheta = pinv_solve(g, RVec(-opt.eta * out.grad), opt.svd_cutoff, &out.cond);
  return out;
}

inline OptimizerTrace qng_optimize_hermitian(const StateFamily& fam, const CostSpec& cost,
                                             const RVec& theta0,
                                             const OptimizerOptions& opt) {
  OptimizerTrace trace;
  RVec theta = theta0;
  for (int it = 0; it < opt.max_iters; ++it) {
    const PureState s = evaluate(fam, theta);
    const cxd L = inner_on(s, s.amplitudes, detail::apply_op(cost.op, s));
    const HermitianStep step = qng_step_hermitian(fam, cost, theta, opt);
    trace.steps.push_back({theta, L, 0.0, step.grad.norm(), step.cond, 0.0});
    if (step.grad.norm() < opt.grad_tol) {
      trace.termination = "GRADIENT_CONVERGED";
      trace.final_theta = theta;
      return trace;
    }
    theta += step.dtheta;
  }
  trace.termination = "MAX_ITERS";
  trace.final_theta = theta;
  return trace;
}

struct NhDualStep {
  RVec dtheta_r;
  RVec dtheta_i;
  double incompatibility = 0.0;  // angle between the two steps, radians
  bool singular_r = false;
  bool singular_i = false;
  cxd cost;
};

// Dual non-Hermitian scheme: the real-symmetric part of the LR tensor drives
// the real part of the cost, the imaginary-symmetric part drives the
// imaginary part. The two steps are returned side by side; no merged update
// is fabricated.
inline NhDualStep qng_step_nh_dual(const StateFamily& left, const StateFamily& right,
                                   const CostSpec& cost, const RVec& theta,
                                   const OptimizerOptions& opt) {
  validate(opt);
  if (cost.kind != CostKind::biortho_expectation)
    throw Error(errc::config, "qng_step_nh_dual expects a biortho_expectation cost");
  const PureState l = evaluate(left, theta);
  const PureState r = evaluate(right, theta);
  detail::require_kind_normalization(l, r, NhKind::LR, theta);
  const Vec ar = detail::apply_op(cost.op, r);
  NhDualStep out;
  out.cost = inner_on(l, l.amplitudes, ar);
  Vec grad(left.n);
  for (int i = 0; i < left.n; ++i) {
    grad[i] = inner_on(l, derivative(left, theta, i), ar) +
              inner_on(l, l.amplitudes, detail::apply_op(cost.op, {derivative(right, theta, i), r.is_grid, r.grid_spacing, NormKind::unnormalized}));
  }
  const GeometricTensor T = nh_fs_tensor(left, right, theta, NhKind::LR);
  out.dtheta_r = RVec::Zero(left.n);
  out.dtheta_i = RVec::Zero(left.n);
  try {
    out.dtheta_r = pinv_solve(T.g(), RVec(-opt.eta_r * grad.real()), opt.svd_cutoff);
  } catch (const Error&) {
    out.singular_r = true;
  }
  try {
    out.dtheta_i = pinv_solve(T.gtilde(), RVec(-opt.eta_i * grad.imag()), opt.svd_cutoff);
  } catch (const Error&) {
    out.singular_i = true;
  }
  const double nr = out.dtheta_r.norm(), ni = out.dtheta_i.norm();
  if (nr > 1e-14 && ni > 1e-14) {
    double c = out.dtheta_r.dot(out.dtheta_i) / (nr * ni);
    c = std::clamp(c, -1.0, 1.0);
    out.incompatibility = std::acos(c);
  }
  return out;
}

// Variational eigensolver for a non-Hermitian H via its Hermitian counterpart
// H~ = (H^dag - conj(E)) (H - E), with E re-estimated from the Rayleigh
// quotient each iterate. Cost L^RR = <psi|H~|psi> = |(H - E) psi|^2 >= 0;
// convergence certifies a right eigenstate.
inline OptimizerTrace rr_variational_eigensolver(const StateFamily& right, const Mat& h,
                                                 const RVec& theta0,
                                                 const OptimizerOptions& opt) {
  validate(opt);
  OptimizerTrace trace;
  RVec theta = theta0;
  for (int it = 0; it <= opt.max_iters; ++it) {
    const PureState s = evaluate(right, theta);
    require_unit_norm(s, theta);
    const Vec hpsi = detail::apply_op(h, s);
    const cxd E = inner_on(s, s.amplitudes, hpsi);
    const Vec res = hpsi - E * s.amplitudes;
    const double lrr = std::real(inner_on(s, res, res));
    // fixed-E gradient; the E(theta) variation cancels against the Rayleigh
    // stationarity of the residual
    RVec grad(right.n);
    double cond = 0.0;
    for (int i = 0; i < right.n; ++i) {
      const Vec di = derivative(right, theta, i);
      const Vec hdi = detail::apply_op(h, {di, s.is_grid, s.grid_spacing, NormKind::unnormalized});
      grad[i] = 2.0 * std::real(inner_on(s, Vec(hdi - E * di), res));
    }
    trace.steps.push_back({theta, E, lrr, grad.norm(), 0.0, 0.0});
    if (lrr < opt.cost_tol) {
      trace.termination = "CONVERGED";
      trace.final_theta = theta;
      return trace;
    }
    if (grad.norm() < opt.grad_tol) {
      trace.termination = "LOCAL_MINIMUM";
      trace.final_theta = theta;
      return trace;
    }
    if (it == opt.max_iters) break;
    const RMat g = fs_tensor(right, theta).g();
    theta += pinv_solve(g, RVec(-opt.eta * grad), opt.svd_cutoff, &cond);
    trace.steps.back().cond = cond;
  }
  trace.termination = "MAX_ITERS";
  trace.final_theta = theta;
  return trace;
}

struct ComparatorReport {
  std::vector<double> deviations;  // per-step |dtheta_IT - dtheta_QNG|
  std::vector<RVec> thetas;
  double max_deviation = 0.0;
  double mean_deviation = 0.0;
};

// Imaginary-time evolution against the natural-gradient flow. The right
// state evolves by e^{-H dtau}; its associated left state evolves by the
// biorthogonal adjoint, which coincides with the bra-evolution by H exactly
// when the spectrum is real (H^# = H). Both steps solve the same complex
// system Sym(FS^LR) dtheta = rhs for a real dtheta (stacked least squares);
// the imaginary-time right-hand side is measured from the exactly evolved
// pair, the natural-gradient one is -dtau * dL with L = <Psi_L|H|Psi_R>.
inline ComparatorReport imaginary_time_comparator(const StateFamily& left,
                                                  const StateFamily& right, const Mat& h,
                                                  const RVec& theta0, double dtau, int steps,
                                                  double svd_cutoff = 1e-10) {
  const BiorthoEigensystem sys = biortho_eig(h);
  // H^# = sum_n conj(lambda_n) |R_n><L_n|; the left states evolve with its
  // Hermitian adjoint.
  Mat hsharp = Mat::Zero(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    hsharp += std::conj(sys.eigenvalues[k]) * sys.right.col(k) * sys.left.col(k).adjoint();
  const Mat prop_r = expm(Mat(-dtau * h));
  const Mat prop_l = expm(Mat(-dtau * hsharp.adjoint()));

  ComparatorReport rep;
  RVec theta = theta0;
  for (int t = 0; t < steps; ++t) {
    const PureState l = evaluate(left, theta);
    const PureState r = evaluate(right, theta);
    detail::require_kind_normalization(l, r, NhKind::LR, theta);
    const int n = left.n;
    std::vector<Vec> dl(n), dr(n);
    for (int i = 0; i < n; ++i) {
      dl[i] = derivative(left, theta, i);
      dr[i] = derivative(right, theta, i);
    }
    // exact evolution, biorthogonally renormalized with a symmetric split
    Vec rev = prop_r * r.amplitudes;
    Vec lev = prop_l * l.amplitudes;
    const cxd c = lev.dot(rev);
    if (std::abs(c) < 1e-150)
      throw Error(errc::numerical, "evolved pair lost biorthogonal pairing", theta);
    const cxd sq = std::sqrt(c);
    rev /= sq;
    lev /= std::conj(sq);

    const Mat A = nh_fs_tensor(left, right, theta, NhKind::LR).sym();
    Vec b(n), v(n);
    const Vec hr = h * r.amplitudes;
    for (int i = 0; i < n; ++i) {
      b[i] = inner_on(l, dl[i], Vec(rev - r.amplitudes)) +
             inner_on(l, Vec(lev - l.amplitudes), dr[i]);
      v[i] = inner_on(l, dl[i], hr) + inner_on(l, l.amplitudes, Vec(h * dr[i]));
    }
    const RVec step_it = complex_lsq_real(A, b, svd_cutoff);
    const RVec step_qng = complex_lsq_real(A, Vec(-dtau * v), svd_cutoff);
    rep.thetas.push_back(theta);
    rep.deviations.push_back((step_it - step_qng).norm());
    theta += step_qng;
  }
  for (double d : rep.deviations) {
    rep.max_deviation = std::max(rep.max_deviation, d);
    rep.mean_deviation += d;
  }
  if (!rep.deviations.empty()) rep.mean_deviation /= static_cast<double>(rep.deviations.size());
  return rep;
}

}  // namespace stategeom
