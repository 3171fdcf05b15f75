#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "stategeom/common.hpp"

namespace stategeom {

enum class NormKind { unit, unnormalized };
enum class DerivMode { analytic, central_fd, richardson_fd };

// A pure state: complex amplitudes over a basis index set, or complex samples
// over a uniform grid. Grid states carry the spacing so that inner products
// become trapezoid quadrature.
struct PureState {
  Vec amplitudes;
  bool is_grid = false;
  double grid_spacing = 1.0;
  NormKind norm_kind = NormKind::unit;

  Eigen::Index size() const { return amplitudes.size(); }

  double weight(Eigen::Index m) const {
    if (!is_grid) return 1.0;
    const bool edge = (m == 0 || m == amplitudes.size() - 1);
    return edge ? 0.5 * grid_spacing : grid_spacing;
  }
};

// Polar decomposition Psi = sqrt(P) e^{i phi}. P is the density |Psi|^2
// (quadrature weights are applied separately, see expectation()). phi is
// unwrapped along the grid ordering; entries with P < eps_p carry phi = 0 and
// are flagged degenerate.
struct PolarForm {
  RVec P;
  RVec phi;
  RVec weights;
  std::vector<bool> degenerate;

  Eigen::Index size() const { return P.size(); }
};

struct DomainBox {
  RVec lo;
  RVec hi;
};

// A differentiable map theta -> PureState. Analytic first/second parameter
// derivatives are optional; absent ones fall back to central finite
// differences (optionally Richardson-extrapolated).
struct StateFamily {
  int n = 0;  // parameter dimension
  std::function<PureState(const RVec&)> eval;
  std::function<Vec(const RVec&, int)> d1;            // optional
  std::function<Vec(const RVec&, int, int)> d2;       // optional
  DerivMode mode = DerivMode::central_fd;
  double fd_step = 1e-5;
  double fd_step2 = 2e-4;  // second-derivative stencils use a wider step
  std::optional<DomainBox> domain;

  bool has_analytic() const { return static_cast<bool>(d1); }
};

inline void check_domain(const StateFamily& fam, const RVec& theta) {
  if (theta.size() != fam.n)
    throw Error(errc::shape_mismatch, "parameter point has wrong dimension");
  if (!all_finite(theta))
    throw Error(errc::non_finite, "parameter point has non-finite entries", theta);
  if (fam.domain) {
    for (int i = 0; i < fam.n; ++i)
      if (theta[i] < fam.domain->lo[i] || theta[i] > fam.domain->hi[i])
        throw Error(errc::domain_violation, "parameter outside declared domain", theta);
  }
}

inline PureState evaluate(const StateFamily& fam, const RVec& theta) {
  check_domain(fam, theta);
  PureState s = fam.eval(theta);
  if (!all_finite(s.amplitudes))
    throw Error(errc::non_finite, "state has non-finite amplitudes", theta);
  return s;
}

namespace detail {

inline double step_for(double base, double coord) {
  return base * std::max(1.0, std::abs(coord));
}

inline Vec fd_first(const StateFamily& fam, const RVec& theta, int i, double h) {
  RVec tp = theta, tm = theta;
  tp[i] += h;
  tm[i] -= h;
  return (evaluate(fam, tp).amplitudes - evaluate(fam, tm).amplitudes) / (2.0 * h);
}

inline Vec fd_second(const StateFamily& fam, const RVec& theta, int i, int j, double hi,
                     double hj) {
  if (i == j) {
    RVec tp = theta, tm = theta;
    tp[i] += hi;
    tm[i] -= hi;
    const Vec f0 = evaluate(fam, theta).amplitudes;
    return (evaluate(fam, tp).amplitudes - 2.0 * f0 + evaluate(fam, tm).amplitudes) /
           (hi * hi);
  }
  RVec tpp = theta, tpm = theta, tmp = theta, tmm = theta;
  tpp[i] += hi;
  tpp[j] += hj;
  tpm[i] += hi;
  tpm[j] -= hj;
  tmp[i] -= hi;
  tmp[j] += hj;
  tmm[i] -= hi;
  tmm[j] -= hj;
  return (evaluate(fam, tpp).amplitudes - evaluate(fam, tpm).amplitudes -
          evaluate(fam, tmp).amplitudes + evaluate(fam, tmm).amplitudes) /
         (4.0 * hi * hj);
}

}  // namespace detail

// d/dtheta_i of the state vector.
inline Vec derivative(const StateFamily& fam, const RVec& theta, int i) {
  if (i < 0 || i >= fam.n) throw Error(errc::shape_mismatch, "axis index out of range");
  if (fam.mode == DerivMode::analytic && fam.d1) return fam.d1(theta, i);
  if (fam.fd_step <= 0.0) throw Error(errc::config, "fd_step must be positive");
  const double h = detail::step_for(fam.fd_step, theta[i]);
  if (fam.mode == DerivMode::richardson_fd) {
    const Vec dh = detail::fd_first(fam, theta, i, h);
    const Vec dh2 = detail::fd_first(fam, theta, i, 0.5 * h);
    return (4.0 * dh2 - dh) / 3.0;
  }
  return detail::fd_first(fam, theta, i, h);
}

// d^2/dtheta_i dtheta_j of the state vector.
inline Vec second_derivative(const StateFamily& fam, const RVec& theta, int i, int j) {
  if (i < 0 || i >= fam.n || j < 0 || j >= fam.n)
    throw Error(errc::shape_mismatch, "axis index out of range");
  if (fam.mode == DerivMode::analytic && fam.d2) return fam.d2(theta, i, j);
  const double hi = detail::step_for(fam.fd_step2, theta[i]);
  const double hj = detail::step_for(fam.fd_step2, theta[j]);
  if (fam.mode == DerivMode::richardson_fd) {
    const Vec dh = detail::fd_second(fam, theta, i, j, hi, hj);
    const Vec dh2 = detail::fd_second(fam, theta, i, j, 0.5 * hi, 0.5 * hj);
    return (4.0 * dh2 - dh) / 3.0;
  }
  return detail::fd_second(fam, theta, i, j, hi, hj);
}

// Hermitian inner product <bra|ket>, conjugate-linear in the bra. Grid states
// use trapezoid quadrature with the grid spacing as weight.
inline cxd inner(const PureState& bra, const PureState& ket) {
  if (bra.size() != ket.size() || bra.is_grid != ket.is_grid)
    throw Error(errc::shape_mismatch, "inner product of mismatched states");
  cxd acc = 0.0;
  for (Eigen::Index m = 0; m < bra.size(); ++m)
    acc += bra.weight(m) * std::conj(bra.amplitudes[m]) * ket.amplitudes[m];
  return acc;
}

// Inner product of raw derivative vectors that live on the same basis/grid as
// a reference state.
inline cxd inner_on(const PureState& ref, const Vec& bra, const Vec& ket) {
  if (bra.size() != ref.size() || ket.size() != ref.size())
    throw Error(errc::shape_mismatch, "inner product of mismatched vectors");
  cxd acc = 0.0;
  for (Eigen::Index m = 0; m < ref.size(); ++m)
    acc += ref.weight(m) * std::conj(bra[m]) * ket[m];
  return acc;
}

inline double norm_of(const PureState& s) { return std::sqrt(std::real(inner(s, s))); }

inline void require_unit_norm(const PureState& s, const RVec& theta) {
  const double defect = std::abs(std::real(inner(s, s)) - 1.0);
  if (defect > tol::eps_norm)
    throw Error(errc::normalization,
                "state is not unit-normalized (defect " + std::to_string(defect) + ")",
                theta);
}

// Polar decomposition with 2*pi-continuous phase along the grid ordering.
// Ambiguity at exact +-pi jumps resolves toward the smaller |delta phi|.
inline PolarForm polar(const PureState& s) {
  const Eigen::Index M = s.size();
  PolarForm pf;
  pf.P.resize(M);
  pf.phi.resize(M);
  pf.weights.resize(M);
  pf.degenerate.assign(M, false);
  double total = 0.0;
  for (Eigen::Index m = 0; m < M; ++m) {
    pf.P[m] = std::norm(s.amplitudes[m]);
    pf.weights[m] = s.weight(m);
    total += pf.P[m] * pf.weights[m];
  }
  if (total <= 0.0) throw Error(errc::numerical, "polar decomposition of all-zero state");
  double prev = 0.0;
  bool have_prev = false;
  for (Eigen::Index m = 0; m < M; ++m) {
    if (pf.P[m] < tol::eps_p) {
      pf.degenerate[m] = true;
      pf.phi[m] = 0.0;
      continue;
    }
    double a = std::arg(s.amplitudes[m]);
    if (s.is_grid && have_prev) {
      // nearest-branch continuation
      const double k = std::round((prev - a) / (2.0 * M_PI));
      a += 2.0 * M_PI * k;
    }
    pf.phi[m] = a;
    prev = a;
    have_prev = true;
  }
  return pf;
}

// E_p[f] = sum/integral of f * P, using density-times-grid-weight convention.
inline double expectation(const PolarForm& pf, const RVec& f) {
  if (f.size() != pf.size()) throw Error(errc::shape_mismatch, "sample vector size mismatch");
  double acc = 0.0;
  for (Eigen::Index m = 0; m < pf.size(); ++m) {
    if (pf.P[m] < tol::eps_p) continue;
    if (!std::isfinite(f[m]))
      throw Error(errc::non_finite, "integrand is non-finite on the support of P");
    acc += pf.weights[m] * pf.P[m] * f[m];
  }
  return acc;
}

inline PureState recompose(const PolarForm& pf, const PureState& like) {
  PureState out = like;
  for (Eigen::Index m = 0; m < pf.size(); ++m)
    out.amplitudes[m] = std::sqrt(pf.P[m]) * std::exp(I * pf.phi[m]);
  return out;
}

// Log-derivative fields of a family at theta:
//   D_i  = (d_i Psi)/Psi          = d_i l/2 + i d_i phi
//   D_ij = (d_i d_j Psi)/Psi - D_i D_j = d_i d_j l/2 + i d_i d_j phi
// evaluated per sample, with degenerate samples (P < eps_p) masked to zero.
// These carry all the P/phi parameter derivatives used by the polar-form
// tensor and connection expressions.
struct LogDerivs {
  PureState state;
  PolarForm pf;
  std::vector<Vec> D;                // n vectors
  std::vector<std::vector<Vec>> DD;  // n x n, filled on request
};

inline LogDerivs log_derivatives(const StateFamily& fam, const RVec& theta,
                                 bool second = false) {
  LogDerivs ld;
  ld.state = evaluate(fam, theta);
  ld.pf = polar(ld.state);
  const Eigen::Index M = ld.state.size();
  ld.D.resize(fam.n);
  std::vector<Vec> dpsi(fam.n);
  for (int i = 0; i < fam.n; ++i) {
    dpsi[i] = derivative(fam, theta, i);
    ld.D[i] = Vec::Zero(M);
    for (Eigen::Index m = 0; m < M; ++m)
      if (!ld.pf.degenerate[m]) ld.D[i][m] = dpsi[i][m] / ld.state.amplitudes[m];
  }
  if (second) {
    ld.DD.assign(fam.n, std::vector<Vec>(fam.n));
    for (int i = 0; i < fam.n; ++i)
      for (int j = i; j < fam.n; ++j) {
        const Vec dd = second_derivative(fam, theta, i, j);
        Vec v = Vec::Zero(M);
        for (Eigen::Index m = 0; m < M; ++m)
          if (!ld.pf.degenerate[m])
            v[m] = dd[m] / ld.state.amplitudes[m] - ld.D[i][m] * ld.D[j][m];
        ld.DD[i][j] = v;
        ld.DD[j][i] = v;
      }
  }
  return ld;
}

// Real-valued polar derivative views: d_i l = 2 Re D_i, d_i phi = Im D_i.
inline RVec dlog(const LogDerivs& ld, int i) { return 2.0 * ld.D[i].real(); }
inline RVec dphi(const LogDerivs& ld, int i) { return ld.D[i].imag(); }
inline RVec d2log(const LogDerivs& ld, int i, int j) { return 2.0 * ld.DD[i][j].real(); }
inline RVec d2phi(const LogDerivs& ld, int i, int j) { return ld.DD[i][j].imag(); }

// E_p-moment over the family's own density.
inline double moment(const LogDerivs& ld, const RVec& f) { return expectation(ld.pf, f); }

inline double moment(const LogDerivs& ld, const RVec& f, const RVec& g) {
  return expectation(ld.pf, f.cwiseProduct(g));
}

inline double moment(const LogDerivs& ld, const RVec& f, const RVec& g, const RVec& h) {
  return expectation(ld.pf, f.cwiseProduct(g).cwiseProduct(h));
}

// Multiplies the family by exp(i beta(theta)); used by gauge-invariance
// checks. beta takes theta, dbeta its gradient, d2beta its Hessian.
inline StateFamily with_phase(const StateFamily& base,
                              std::function<double(const RVec&)> beta,
                              std::function<RVec(const RVec&)> dbeta,
                              std::function<RMat(const RVec&)> d2beta) {
  StateFamily out = base;
  out.eval = [base, beta](const RVec& th) {
    PureState s = base.eval(th);
    s.amplitudes *= std::exp(I * beta(th));
    return s;
  };
  if (base.d1) {
    out.d1 = [base, beta, dbeta](const RVec& th, int i) {
      const PureState s = base.eval(th);
      const cxd ph = std::exp(I * beta(th));
      return Vec(ph * (base.d1(th, i) + I * dbeta(th)[i] * s.amplitudes));
    };
  }
  if (base.d2) {
    out.d2 = [base, beta, dbeta, d2beta](const RVec& th, int i, int j) {
      const PureState s = base.eval(th);
      const cxd ph = std::exp(I * beta(th));
      const RVec db = dbeta(th);
      const RMat ddb = d2beta(th);
      Vec v = base.d2(th, i, j);
      v += I * db[i] * base.d1(th, j) + I * db[j] * base.d1(th, i);
      v += (I * ddb(i, j) - db[i] * db[j]) * s.amplitudes;
      return Vec(ph * v);
    };
  }
  return out;
}

}  // namespace stategeom
