#pragma once

#include <cmath>
#include <vector>

#include "stategeom/common.hpp"
#include "stategeom/fs.hpp"
#include "stategeom/state.hpp"
#include "stategeom/tensor.hpp"

namespace stategeom {

inline void require_alpha_open_interval(double alpha) {
  if (!(std::abs(alpha) < 1.0 - 1e-12))
    throw Error(errc::alpha_domain, "alpha must lie in the open interval (-1, 1)");
}

// The alpha-representation pair built from the polar decomposition with the
// unwrapped phase (never a principal-branch complex power):
//   l1 = l_{1(alpha)}  = P^{(1-a)/2} e^{i(1-a)phi} / (1-a)
//   l2 = l_{2(-alpha)} = P^{(1+a)/2} e^{i(1-a)phi} / (1+a)
// with <l1|l2> = 1/(1-a^2) identically.
struct AlphaDerivs {
  double alpha = 0.0;
  PureState ref;  // carries the quadrature weights
  Vec l1, l2;
  std::vector<Vec> dl1, dl2;
  std::vector<std::vector<Vec>> ddl1, ddl2;
};

inline AlphaDerivs alpha_derivs(const StateFamily& fam, const RVec& theta, double alpha,
                                bool second = false) {
  require_alpha_open_interval(alpha);
  const LogDerivs ld = log_derivatives(fam, theta, second);
  const Eigen::Index M = ld.state.size();
  AlphaDerivs ad;
  ad.alpha = alpha;
  ad.ref = ld.state;
  ad.l1.resize(M);
  ad.l2.resize(M);
  const double am = 1.0 - alpha, ap = 1.0 + alpha;
  for (Eigen::Index m = 0; m < M; ++m) {
    if (ld.pf.degenerate[m]) {
      ad.l1[m] = 0.0;
      ad.l2[m] = 0.0;
      continue;
    }
    const cxd ph = std::exp(I * am * ld.pf.phi[m]);
    ad.l1[m] = std::pow(ld.pf.P[m], 0.5 * am) / am * ph;
    ad.l2[m] = std::pow(ld.pf.P[m], 0.5 * ap) / ap * ph;
  }
  ad.dl1.resize(fam.n);
  ad.dl2.resize(fam.n);
  for (int i = 0; i < fam.n; ++i) {
    ad.dl1[i].resize(M);
    ad.dl2[i].resize(M);
    for (Eigen::Index m = 0; m < M; ++m) {
      const cxd D = ld.D[i][m];
      ad.dl1[i][m] = am * D * ad.l1[m];
      const cxd E(ap * std::real(D), am * std::imag(D));
      ad.dl2[i][m] = E * ad.l2[m];
    }
  }
  if (second) {
    ad.ddl1.assign(fam.n, std::vector<Vec>(fam.n));
    ad.ddl2.assign(fam.n, std::vector<Vec>(fam.n));
    for (int i = 0; i < fam.n; ++i)
      for (int j = i; j < fam.n; ++j) {
        Vec v1(M), v2(M);
        for (Eigen::Index m = 0; m < M; ++m) {
          const cxd Di = ld.D[i][m], Dj = ld.D[j][m], Dij = ld.DD[i][j][m];
          v1[m] = am * (Dij + am * Di * Dj) * ad.l1[m];
          const cxd Ei(ap * std::real(Di), am * std::imag(Di));
          const cxd Ej(ap * std::real(Dj), am * std::imag(Dj));
          const cxd Eij(ap * std::real(Dij), am * std::imag(Dij));
          v2[m] = (Eij + Ei * Ej) * ad.l2[m];
        }
        ad.ddl1[i][j] = v1;
        ad.ddl1[j][i] = v1;
        ad.ddl2[i][j] = v2;
        ad.ddl2[j][i] = v2;
      }
  }
  return ad;
}

inline cxd alpha_norm(const AlphaDerivs& ad) { return inner_on(ad.ref, ad.l1, ad.l2); }

inline void require_alpha_norm(const AlphaDerivs& ad) {
  const double target = 1.0 / (1.0 - ad.alpha * ad.alpha);
  const double defect = std::abs(alpha_norm(ad) - target);
  if (defect > tol::eps_norm * std::max(1.0, target))
    throw Error(errc::normalization, "<l1|l2> drifted from 1/(1-alpha^2)");
}

// Case-2 biorthogonal tensor
// FS^(a)_ij = <d_i l1|d_j l2> - (1-a^2) <d_i l1|l2><l1|d_j l2>.
inline GeometricTensor case2_tensor(const StateFamily& fam, const RVec& theta, double alpha) {
  const AlphaDerivs ad = alpha_derivs(fam, theta, alpha);
  require_alpha_norm(ad);
  const double w = 1.0 - alpha * alpha;
  const int n = fam.n;
  Vec a(n), b(n);
  for (int i = 0; i < n; ++i) {
    b[i] = inner_on(ad.ref, ad.dl1[i], ad.l2);
    a[i] = inner_on(ad.ref, ad.l1, ad.dl2[i]);
  }
  Mat T(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      T(i, j) = inner_on(ad.ref, ad.dl1[i], ad.dl2[j]) - w * b[i] * a[j];
  return GeometricTensor(T);
}

// P/phi-form components of the Case-2 tensor:
//   g^(a)      = (1/4) E[dl dl] + (1-a)/(1+a) Cov[dphi, dphi]
//   omega^(a)  = 1/(2(1+a)) E[d_i l d_j phi - d_j l d_i phi]   (values)
//   gtilde^(a) = -a/(2(1+a)) E[d_i l d_j phi + d_j l d_i phi]  (values)
// and the real antisymmetric part vanishes identically.
struct Case2Components {
  RMat g, omega, gtilde;
};

inline Case2Components case2_components(const StateFamily& fam, const RVec& theta,
                                        double alpha) {
  require_alpha_open_interval(alpha);
  const LogDerivs ld = log_derivatives(fam, theta);
  const int n = fam.n;
  Case2Components out;
  out.g.resize(n, n);
  out.omega.resize(n, n);
  out.gtilde.resize(n, n);
  RVec mp(n);
  for (int i = 0; i < n; ++i) mp[i] = moment(ld, dphi(ld, i));
  const double r = (1.0 - alpha) / (1.0 + alpha);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double ll = moment(ld, dlog(ld, i), dlog(ld, j));
      const double pp = moment(ld, dphi(ld, i), dphi(ld, j));
      const double lp = moment(ld, dlog(ld, i), dphi(ld, j));
      const double pl = moment(ld, dlog(ld, j), dphi(ld, i));
      out.g(i, j) = 0.25 * ll + r * (pp - mp[i] * mp[j]);
      out.omega(i, j) = (lp - pl) / (2.0 * (1.0 + alpha));
      out.gtilde(i, j) = -alpha * (lp + pl) / (2.0 * (1.0 + alpha));
    }
  return out;
}

// Field strength of the alpha-gauge connection A_i = -i <l1|d_i l2>, as a
// central-difference curl; carries the two antisymmetric tensor parts as
// B = 2*omega - 2i*omtilde.
inline Mat alpha_berry_field_strength(const StateFamily& fam, const RVec& theta,
                                      double alpha) {
  require_alpha_open_interval(alpha);
  const int n = fam.n;
  auto connection = [&](const RVec& th) {
    const AlphaDerivs ad = alpha_derivs(fam, th, alpha);
    Vec A(n);
    for (int j = 0; j < n; ++j) A[j] = -I * inner_on(ad.ref, ad.l1, ad.dl2[j]);
    return A;
  };
  Mat B = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double h = detail::step_for(fam.fd_step2, theta[i]);
    RVec tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const Vec dA = (connection(tp) - connection(tm)) / (2.0 * h);
    for (int j = 0; j < n; ++j) {
      B(i, j) += dA[j];
      B(j, i) -= dA[j];
    }
  }
  return B;
}

// alpha-density matrix rho^(a) = |l2><l1| (basis sets only).
inline Mat alpha_density(const StateFamily& fam, const RVec& theta, double alpha,
                         int dim_cap = tol::dense_dim_cap) {
  const AlphaDerivs ad = alpha_derivs(fam, theta, alpha);
  if (ad.ref.is_grid)
    throw Error(errc::dimension_cap, "alpha-density matrix requires a basis-set state");
  if (ad.ref.size() > dim_cap)
    throw Error(errc::dimension_cap, "basis dimension exceeds the dense cap");
  return ad.l2 * ad.l1.adjoint();
}

// Observable (Hermitian) part of the alpha-density matrix.
inline Mat alpha_density_observable(const StateFamily& fam, const RVec& theta, double alpha,
                                    int dim_cap = tol::dense_dim_cap) {
  const Mat rho = alpha_density(fam, theta, alpha, dim_cap);
  return 0.5 * (rho + rho.adjoint());
}

// Modified alpha-QFI: (1-a^2)^2 Tr[rho^(a) d_i rho^(a) d_j rho^(a)]; equals
// the Case-2 tensor.
inline GeometricTensor alpha_qfi_trace(const StateFamily& fam, const RVec& theta,
                                       double alpha, int dim_cap = tol::dense_dim_cap) {
  const AlphaDerivs ad = alpha_derivs(fam, theta, alpha);
  if (ad.ref.is_grid)
    throw Error(errc::dimension_cap, "alpha-QFI trace requires a basis-set state");
  if (ad.ref.size() > dim_cap)
    throw Error(errc::dimension_cap, "basis dimension exceeds the dense cap");
  require_alpha_norm(ad);
  const int n = fam.n;
  const Mat rho = ad.l2 * ad.l1.adjoint();
  std::vector<Mat> drho(n);
  for (int i = 0; i < n; ++i)
    drho[i] = ad.dl2[i] * ad.l1.adjoint() + ad.l2 * ad.dl1[i].adjoint();
  const double w = 1.0 - alpha * alpha;
  Mat T(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) T(i, j) = w * w * (rho * drho[i] * drho[j]).trace();
  return GeometricTensor(T);
}

// Case-1 symmetric generalisation, shipped as a diagnostic: the pair
// l_{+a} = Psi^{1-a}/(1-a), l_{-a} = Psi^{1+a}/(1+a) is not mutually
// normalized for nontrivial phase, and the defect |<l_a|l_-a> - 1| is
// reported alongside the four tensor parts.
struct Case1Result {
  GeometricTensor tensor;
  double normalization_defect = 0.0;
};

inline Case1Result case1_tensor(const StateFamily& fam, const RVec& theta, double alpha) {
  require_alpha_open_interval(alpha);
  const LogDerivs ld = log_derivatives(fam, theta);
  const Eigen::Index M = ld.state.size();
  const int n = fam.n;
  const double am = 1.0 - alpha, ap = 1.0 + alpha;
  Vec la(M), lb(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    if (ld.pf.degenerate[m]) {
      la[m] = 0.0;
      lb[m] = 0.0;
      continue;
    }
    la[m] = std::pow(ld.pf.P[m], 0.5 * am) / am * std::exp(I * am * ld.pf.phi[m]);
    lb[m] = std::pow(ld.pf.P[m], 0.5 * ap) / ap * std::exp(I * ap * ld.pf.phi[m]);
  }
  std::vector<Vec> dla(n), dlb(n);
  for (int i = 0; i < n; ++i) {
    dla[i].resize(M);
    dlb[i].resize(M);
    for (Eigen::Index m = 0; m < M; ++m) {
      dla[i][m] = am * ld.D[i][m] * la[m];
      dlb[i][m] = ap * ld.D[i][m] * lb[m];
    }
  }
  Mat T(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      T(i, j) = inner_on(ld.state, dla[i], dlb[j]) -
                inner_on(ld.state, dla[i], lb) * inner_on(ld.state, la, dlb[j]);
  Case1Result out;
  out.tensor = GeometricTensor(T);
  out.normalization_defect = std::abs(inner_on(ld.state, la, lb) - 1.0);
  return out;
}

// Bare and gauge-invariant +-alpha connection pairs.
struct DualConnectionPair {
  ConnectionField gamma1;  // Gamma^{1(alpha)}, gauge-invariant
  ConnectionField gamma2;  // Gamma^{2(-alpha)}, gauge-invariant
  ConnectionField bare1;   // <dd l1|d_k l2>
  ConnectionField bare2;   // <d_k l1|dd l2>
};

inline DualConnectionPair dual_connections(const StateFamily& fam, const RVec& theta,
                                           double alpha) {
  const AlphaDerivs ad = alpha_derivs(fam, theta, alpha, true);
  require_alpha_norm(ad);
  const int n = fam.n;
  const double w = 1.0 - alpha * alpha;
  Vec a(n), b(n);
  for (int i = 0; i < n; ++i) {
    b[i] = inner_on(ad.ref, ad.dl1[i], ad.l2);
    a[i] = inner_on(ad.ref, ad.l1, ad.dl2[i]);
  }
  Mat M1(n, n), M2(n, n);  // <d_i l1|d_j l2>
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M1(i, j) = inner_on(ad.ref, ad.dl1[i], ad.dl2[j]);
  DualConnectionPair out;
  out.gamma1 = ConnectionField(n);
  out.gamma2 = ConnectionField(n);
  out.bare1 = ConnectionField(n);
  out.bare2 = ConnectionField(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const cxd dd1_l2 = inner_on(ad.ref, ad.ddl1[i][j], ad.l2);
      const cxd l1_dd2 = inner_on(ad.ref, ad.l1, ad.ddl2[i][j]);
      for (int k = 0; k < n; ++k) {
        const cxd t1 = inner_on(ad.ref, ad.ddl1[i][j], ad.dl2[k]);
        const cxd t2 = inner_on(ad.ref, ad.dl1[k], ad.ddl2[i][j]);
        out.bare1.at(i, j, k) = out.bare1.at(j, i, k) = t1;
        out.bare2.at(i, j, k) = out.bare2.at(j, i, k) = t2;
        cxd g1 = t1 - w * (dd1_l2 * a[k] + b[i] * M1(j, k) + b[j] * M1(i, k)) +
                 2.0 * w * w * b[i] * b[j] * a[k];
        cxd g2 = t2 - w * (b[k] * l1_dd2 + a[i] * M1(k, j) + a[j] * M1(k, i)) +
                 2.0 * w * w * b[k] * a[i] * a[j];
        out.gamma1.at(i, j, k) = out.gamma1.at(j, i, k) = g1;
        out.gamma2.at(i, j, k) = out.gamma2.at(j, i, k) = g2;
      }
    }
  return out;
}

// ** duality (alpha -> -alpha, 1 <-> 2, conjugate) applied to the bare
// second connection must reproduce the bare first one.
inline double star_star_residual(const StateFamily& fam, const RVec& theta, double alpha) {
  const AlphaDerivs ad = alpha_derivs(fam, theta, alpha, true);
  const int n = fam.n;
  double res = 0.0;
  const ConnectionField bare1 = dual_connections(fam, theta, alpha).bare1;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        // Gamma^2-form at -alpha with the 1<->2 label swap:
        // <d_k l_{2(-a)} | dd l_{1(a)}>
        const cxd x = inner_on(ad.ref, ad.dl2[k], ad.ddl1[i][j]);
        res = std::max(res, std::abs(std::conj(x) - bare1.at(i, j, k)));
      }
  return res;
}

// |D^(a)(theta, theta') - (D^(-a)(theta', theta))^{**}| for the biorthogonal
// overlap D^(a) = <l1(th') - l1(th) | l2(th') - l2(th)>.
inline double overlap_conjugation_check(const StateFamily& fam, const RVec& theta,
                                        const RVec& theta2, double alpha) {
  const AlphaDerivs p = alpha_derivs(fam, theta, alpha);
  const AlphaDerivs q = alpha_derivs(fam, theta2, alpha);
  const Vec du1 = q.l1 - p.l1, du2 = q.l2 - p.l2;
  const cxd d_forward = inner_on(p.ref, du1, du2);
  // D^(-a)(theta', theta) with the 1<->2 swap is <l2(th)-l2(th') | l1(th)-l1(th')>
  const Vec dv1 = p.l2 - q.l2, dv2 = p.l1 - q.l1;
  const cxd d_backward = inner_on(p.ref, dv1, dv2);
  return std::abs(d_forward - std::conj(d_backward));
}

}  // namespace stategeom
