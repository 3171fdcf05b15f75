#pragma once

#include <cmath>
#include <vector>

#include "stategeom/common.hpp"
#include "stategeom/state.hpp"
#include "stategeom/tensor.hpp"

namespace stategeom {

// Quantum geometric tensor FS_ij = <d_i Psi|d_j Psi> - <d_i Psi|Psi><Psi|d_j Psi>.
inline GeometricTensor fs_tensor(const StateFamily& fam, const RVec& theta) {
  const PureState s = evaluate(fam, theta);
  require_unit_norm(s, theta);
  std::vector<Vec> d(fam.n);
  for (int i = 0; i < fam.n; ++i) d[i] = derivative(fam, theta, i);
  Vec overlaps(fam.n);  // <Psi|d_i Psi>
  for (int i = 0; i < fam.n; ++i) overlaps[i] = inner_on(s, s.amplitudes, d[i]);
  Mat T(fam.n, fam.n);
  for (int i = 0; i < fam.n; ++i)
    for (int j = 0; j < fam.n; ++j)
      T(i, j) = inner_on(s, d[i], d[j]) - std::conj(overlaps[i]) * overlaps[j];
  return GeometricTensor(T);
}

// Quantum metric tensor from the polar decomposition:
// (1/4) E_p[d_i l d_j l] + Cov_p[d_i phi, d_j phi].
inline RMat qmt_polar(const StateFamily& fam, const RVec& theta) {
  const LogDerivs ld = log_derivatives(fam, theta);
  RMat g(fam.n, fam.n);
  RVec mean_phi(fam.n);
  for (int i = 0; i < fam.n; ++i) mean_phi[i] = moment(ld, dphi(ld, i));
  for (int i = 0; i < fam.n; ++i)
    for (int j = i; j < fam.n; ++j) {
      const double cl = 0.25 * moment(ld, dlog(ld, i), dlog(ld, j));
      const double ph = moment(ld, dphi(ld, i), dphi(ld, j)) - mean_phi[i] * mean_phi[j];
      g(i, j) = cl + ph;
      g(j, i) = g(i, j);
    }
  return g;
}

// Fraction of support points whose phase is degenerate (P < eps_p). A value
// above 0.5 marks phase expectations as unreliable; the computation itself
// proceeds.
inline double phase_degenerate_fraction(const StateFamily& fam, const RVec& theta) {
  const PolarForm pf = polar(evaluate(fam, theta));
  Eigen::Index bad = 0;
  for (Eigen::Index m = 0; m < pf.size(); ++m)
    if (pf.degenerate[m]) ++bad;
  return static_cast<double>(bad) / static_cast<double>(pf.size());
}

// Berry connection A_i = Im <Psi|d_i Psi> = E_p[d_i phi]; real for unit-norm
// states.
inline RVec berry_connection(const StateFamily& fam, const RVec& theta) {
  const PureState s = evaluate(fam, theta);
  require_unit_norm(s, theta);
  RVec A(fam.n);
  for (int i = 0; i < fam.n; ++i)
    A[i] = std::imag(inner_on(s, s.amplitudes, derivative(fam, theta, i)));
  return A;
}

// Berry curvature as the field strength of the connection above,
// F_ij = d_i A_j - d_j A_i = E_p[d_i l d_j phi - d_j l d_i phi].
inline RMat berry_curvature(const StateFamily& fam, const RVec& theta) {
  const PureState s = evaluate(fam, theta);
  require_unit_norm(s, theta);
  const LogDerivs ld = log_derivatives(fam, theta);
  RMat F = RMat::Zero(fam.n, fam.n);
  for (int i = 0; i < fam.n; ++i)
    for (int j = i + 1; j < fam.n; ++j) {
      F(i, j) = moment(ld, dlog(ld, i), dphi(ld, j)) - moment(ld, dlog(ld, j), dphi(ld, i));
      F(j, i) = -F(i, j);
    }
  return F;
}

// Metric-compatible connection in bra-ket form:
// Gamma^(c)_{ij,k} = Re[ <dd_ij Psi|d_k Psi> - <dd_ij Psi|Psi><Psi|d_k Psi>
//                        - <d_i Psi|Psi><d_j Psi|d_k Psi> - <d_j Psi|Psi><d_i Psi|d_k Psi> ].
inline ConnectionField metric_connection(const StateFamily& fam, const RVec& theta) {
  const PureState s = evaluate(fam, theta);
  require_unit_norm(s, theta);
  std::vector<Vec> d(fam.n);
  for (int i = 0; i < fam.n; ++i) d[i] = derivative(fam, theta, i);
  Vec sp(fam.n);  // <Psi|d_i Psi>
  for (int i = 0; i < fam.n; ++i) sp[i] = inner_on(s, s.amplitudes, d[i]);
  ConnectionField gamma(fam.n);
  for (int i = 0; i < fam.n; ++i)
    for (int j = i; j < fam.n; ++j) {
      const Vec dd = second_derivative(fam, theta, i, j);
      const cxd t_dd_psi = inner_on(s, dd, s.amplitudes);
      for (int k = 0; k < fam.n; ++k) {
        cxd v = inner_on(s, dd, d[k]);
        v -= t_dd_psi * sp[k];
        v -= std::conj(sp[i]) * inner_on(s, d[j], d[k]);
        v -= std::conj(sp[j]) * inner_on(s, d[i], d[k]);
        gamma.at(i, j, k) = std::real(v);
        gamma.at(j, i, k) = std::real(v);
      }
    }
  return gamma;
}

namespace detail {

struct PolarMoments {
  int n;
  std::vector<RVec> dl, dp;
  std::vector<std::vector<RVec>> ddl, ddp;
  const LogDerivs* ld;

  double E(const RVec& a) const { return moment(*ld, a); }
  double E(const RVec& a, const RVec& b) const { return moment(*ld, a, b); }
  double E(const RVec& a, const RVec& b, const RVec& c) const { return moment(*ld, a, b, c); }
};

inline PolarMoments polar_moments(const LogDerivs& ld, int n) {
  PolarMoments pm;
  pm.n = n;
  pm.ld = &ld;
  pm.dl.resize(n);
  pm.dp.resize(n);
  for (int i = 0; i < n; ++i) {
    pm.dl[i] = dlog(ld, i);
    pm.dp[i] = dphi(ld, i);
  }
  pm.ddl.assign(n, std::vector<RVec>(n));
  pm.ddp.assign(n, std::vector<RVec>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      pm.ddl[i][j] = d2log(ld, i, j);
      pm.ddp[i][j] = d2phi(ld, i, j);
    }
  return pm;
}

}  // namespace detail

// The same connection evaluated through the polar decomposition (P, phi).
inline ConnectionField metric_connection_polar(const StateFamily& fam, const RVec& theta) {
  const LogDerivs ld = log_derivatives(fam, theta, true);
  const auto pm = detail::polar_moments(ld, fam.n);
  ConnectionField gamma(fam.n);
  for (int i = 0; i < fam.n; ++i)
    for (int j = i; j < fam.n; ++j)
      for (int k = 0; k < fam.n; ++k) {
        double v = 0.25 * (2.0 * pm.E(pm.ddl[i][j], pm.dl[k]) + pm.E(pm.dl[i], pm.dl[j], pm.dl[k]));
        v += 2.0 * pm.E(pm.ddp[i][j], pm.dp[k]);
        v += pm.E(pm.dl[i].cwiseProduct(pm.dp[j]) + pm.dl[j].cwiseProduct(pm.dp[i]), pm.dp[k]);
        v -= pm.E(pm.dp[i], pm.dp[j], pm.dl[k]);
        double sub = 2.0 * pm.E(pm.ddp[i][j]) * pm.E(pm.dp[k]);
        sub += (pm.E(pm.dp[i], pm.dl[j]) + pm.E(pm.dp[j], pm.dl[i])) * pm.E(pm.dp[k]);
        sub += pm.E(pm.dp[i]) * (pm.E(pm.dp[k], pm.dl[j]) - pm.E(pm.dp[j], pm.dl[k]));
        sub += pm.E(pm.dp[j]) * (pm.E(pm.dp[k], pm.dl[i]) - pm.E(pm.dp[i], pm.dl[k]));
        gamma.at(i, j, k) = gamma.at(j, i, k) = 0.5 * (v - sub);
      }
  return gamma;
}

// Non-metricity N_{ij,k}(alpha); N(0) = 0 and the trivial-phase limit is the
// classical non-metricity with the 1/4 weight.
inline ConnectionField nonmetricity(const StateFamily& fam, const RVec& theta, double alpha) {
  const LogDerivs ld = log_derivatives(fam, theta, true);
  const auto pm = detail::polar_moments(ld, fam.n);
  ConnectionField N(fam.n);
  const double a2 = 0.5 * alpha;
  for (int i = 0; i < fam.n; ++i)
    for (int j = i; j < fam.n; ++j)
      for (int k = 0; k < fam.n; ++k) {
        double v = -a2 * 0.25 * pm.E(pm.dl[i], pm.dl[j], pm.dl[k]);
        double mid = 2.0 * pm.E(pm.ddp[i][j], pm.dp[k]);
        mid += pm.E(pm.dp[i].cwiseProduct(pm.dl[j]) + pm.dp[j].cwiseProduct(pm.dl[i]), pm.dp[k]);
        mid -= pm.E(pm.dp[i], pm.dp[j], pm.dl[k]);
        v -= a2 * mid;
        double sub = 2.0 * pm.E(pm.ddp[i][j]) * pm.E(pm.dp[k]);
        sub += (pm.E(pm.dp[i], pm.dl[j]) + pm.E(pm.dp[j], pm.dl[i])) * pm.E(pm.dp[k]);
        sub += pm.E(pm.dp[i]) * (pm.E(pm.dl[j], pm.dp[k]) - pm.E(pm.dl[k], pm.dp[j]));
        sub += pm.E(pm.dp[j]) * (pm.E(pm.dl[i], pm.dp[k]) - pm.E(pm.dl[k], pm.dp[i]));
        v += a2 * sub;
        N.at(i, j, k) = N.at(j, i, k) = v;
      }
  return N;
}

// Gamma^(alpha) = Gamma^(c) + N_{ij,k}(alpha).
inline ConnectionField alpha_family_connection(const StateFamily& fam, const RVec& theta,
                                               double alpha) {
  return metric_connection(fam, theta) + nonmetricity(fam, theta, alpha);
}

// Evaluates the QFI-style trace forms for the metric and the metric
// connection on the pure-state density matrix and returns the maximal
// deviations from the bra-ket evaluations.
inline std::pair<double, double> qfi_trace_forms(const StateFamily& fam, const RVec& theta,
                                                 int dim_cap = tol::dense_dim_cap) {
  const PureState s = evaluate(fam, theta);
  if (s.is_grid)
    throw Error(errc::dimension_cap, "trace forms require a basis-set state");
  if (s.size() > dim_cap)
    throw Error(errc::dimension_cap, "basis dimension exceeds the dense cap");
  require_unit_norm(s, theta);
  const int n = fam.n;
  const Vec& psi = s.amplitudes;
  std::vector<Vec> d(n);
  for (int i = 0; i < n; ++i) d[i] = derivative(fam, theta, i);
  const Mat rho = psi * psi.adjoint();
  std::vector<Mat> drho(n);
  for (int i = 0; i < n; ++i) drho[i] = d[i] * psi.adjoint() + psi * d[i].adjoint();

  const GeometricTensor fs = fs_tensor(fam, theta);
  const ConnectionField gc = metric_connection(fam, theta);

  double metric_check = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cxd tr = 0.25 * ((rho * drho[i] * drho[j]).trace() +
                             (drho[j] * drho[i] * rho).trace() +
                             (rho * drho[j] * drho[i]).trace() +
                             (drho[i] * drho[j] * rho).trace());
      metric_check = std::max(metric_check, std::abs(tr - cxd(fs.g()(i, j), 0.0)));
    }

  double conn_check = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Vec dd = second_derivative(fam, theta, i, j);
      const Mat ddrho = dd * psi.adjoint() + d[i] * d[j].adjoint() + d[j] * d[i].adjoint() +
                        psi * dd.adjoint();
      for (int k = 0; k < n; ++k) {
        const cxd tr = 0.25 * ((rho * ddrho * drho[k]).trace() +
                               (rho * drho[k] * ddrho).trace() +
                               (ddrho * drho[k] * rho).trace() +
                               (drho[k] * ddrho * rho).trace() +
                               (drho[i] * drho[k] * drho[j]).trace() +
                               (drho[j] * drho[k] * drho[i]).trace());
        conn_check = std::max(conn_check, std::abs(tr - gc.at(i, j, k)));
      }
    }
  return {metric_check, conn_check};
}

// Smallest eigenvalue of a real symmetric matrix; used by positive
// semidefiniteness checks.
inline double min_eigenvalue(const RMat& g) {
  Eigen::SelfAdjointEigenSolver<RMat> es(g);
  return es.eigenvalues().minCoeff();
}

// Lowered Levi-Civita coefficients of an arbitrary metric evaluator,
// Gamma_{ij,k} = (1/2)(d_i g_jk + d_j g_ik - d_k g_ij), by central FD.
inline ConnectionField levi_civita_lowered(const std::function<RMat(const RVec&)>& metric,
                                           const RVec& theta, double fd_step2 = 2e-4) {
  const int n = static_cast<int>(theta.size());
  std::vector<RMat> dg(n);
  for (int k = 0; k < n; ++k) {
    const double h = detail::step_for(fd_step2, theta[k]);
    RVec tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    dg[k] = (metric(tp) - metric(tm)) / (2.0 * h);
  }
  ConnectionField gamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        gamma.at(i, j, k) = 0.5 * (dg[i](j, k) + dg[j](i, k) - dg[k](i, j));
  return gamma;
}

}  // namespace stategeom
