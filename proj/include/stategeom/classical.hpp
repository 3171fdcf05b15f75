#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "stategeom/common.hpp"
#include "stategeom/state.hpp"
#include "stategeom/tensor.hpp"

namespace stategeom {

// A parametrized probability density theta -> P(x; theta) on a grid or a
// finite outcome set. The weights play the role of the quadrature measure
// (all ones for finite outcome sets).
struct ClassicalFamily {
  int n = 0;
  std::function<RVec(const RVec&)> density;
  RVec weights;
  std::function<RVec(const RVec&, int)> d1;       // optional analytic dP
  std::function<RVec(const RVec&, int, int)> d2;  // optional analytic ddP
  DerivMode mode = DerivMode::central_fd;
  double fd_step = 1e-5;
  double fd_step2 = 2e-4;
};

namespace detail {

struct ClassicalDerivs {
  RVec P;
  std::vector<RVec> dl;                // d_i ln P, support-masked
  std::vector<std::vector<RVec>> ddl;  // d_i d_j ln P
};

inline ClassicalDerivs classical_log_derivs(const ClassicalFamily& fam, const RVec& theta,
                                            bool second = false) {
  ClassicalDerivs cd;
  cd.P = fam.density(theta);
  const Eigen::Index M = cd.P.size();
  const bool analytic = fam.mode == DerivMode::analytic && fam.d1;
  auto dP = [&](int i) {
    if (analytic) return fam.d1(theta, i);
    const double h = step_for(fam.fd_step, theta[i]);
    RVec tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    return RVec((fam.density(tp) - fam.density(tm)) / (2.0 * h));
  };
  cd.dl.resize(fam.n);
  std::vector<RVec> dPv(fam.n);
  for (int i = 0; i < fam.n; ++i) {
    dPv[i] = dP(i);
    cd.dl[i] = RVec::Zero(M);
    for (Eigen::Index m = 0; m < M; ++m)
      if (cd.P[m] >= tol::eps_p) cd.dl[i][m] = dPv[i][m] / cd.P[m];
  }
  if (second) {
    cd.ddl.assign(fam.n, std::vector<RVec>(fam.n));
    for (int i = 0; i < fam.n; ++i)
      for (int j = i; j < fam.n; ++j) {
        RVec ddP(M);
        if (analytic && fam.d2) {
          ddP = fam.d2(theta, i, j);
        } else if (i == j) {
          const double hi = step_for(fam.fd_step2, theta[i]);
          RVec tp = theta, tm = theta;
          tp[i] += hi;
          tm[i] -= hi;
          ddP = (fam.density(tp) - 2.0 * cd.P + fam.density(tm)) / (hi * hi);
        } else {
          const double hi = step_for(fam.fd_step2, theta[i]);
          const double hj = step_for(fam.fd_step2, theta[j]);
          RVec tpp = theta, tpm = theta, tmp = theta, tmm = theta;
          tpp[i] += hi;
          tpp[j] += hj;
          tpm[i] += hi;
          tpm[j] -= hj;
          tmp[i] -= hi;
          tmp[j] += hj;
          tmm[i] -= hi;
          tmm[j] -= hj;
          ddP = (fam.density(tpp) - fam.density(tpm) - fam.density(tmp) + fam.density(tmm)) /
                (4.0 * hi * hj);
        }
        RVec v = RVec::Zero(M);
        for (Eigen::Index m = 0; m < M; ++m)
          if (cd.P[m] >= tol::eps_p)
            v[m] = ddP[m] / cd.P[m] - cd.dl[i][m] * cd.dl[j][m];
        cd.ddl[i][j] = v;
        cd.ddl[j][i] = v;
      }
  }
  return cd;
}

inline double pmoment(const ClassicalFamily& fam, const RVec& P, const RVec& f) {
  double acc = 0.0;
  for (Eigen::Index m = 0; m < P.size(); ++m)
    if (P[m] >= tol::eps_p) acc += fam.weights[m] * P[m] * f[m];
  return acc;
}

}  // namespace detail

// Classical Fisher-Rao metric g_ij = E_p[d_i ln P  d_j ln P].
inline RMat fisher_rao(const ClassicalFamily& fam, const RVec& theta) {
  const auto cd = detail::classical_log_derivs(fam, theta);
  RMat g(fam.n, fam.n);
  for (int i = 0; i < fam.n; ++i)
    for (int j = i; j < fam.n; ++j) {
      g(i, j) = detail::pmoment(fam, cd.P, cd.dl[i].cwiseProduct(cd.dl[j]));
      g(j, i) = g(i, j);
    }
  return g;
}

// alpha-representation l_alpha = F_alpha(P) with F_alpha(x) = 2/(1-alpha) x^{(1-alpha)/2}.
inline RVec alpha_embedding(const RVec& P, double alpha) {
  if (std::abs(alpha - 1.0) < 1e-14)
    throw Error(errc::alpha_domain, "alpha = 1 embedding is logarithmic, not polynomial");
  RVec out(P.size());
  const double e = 0.5 * (1.0 - alpha);
  for (Eigen::Index m = 0; m < P.size(); ++m)
    out[m] = (P[m] >= tol::eps_p) ? (1.0 / e) * std::pow(P[m], e) : 0.0;
  return out;
}

// g^(alpha)_ij = int d_i l_alpha d_j l_{-alpha} dx. Equals the Fisher-Rao
// metric for every alpha; evaluated through the embeddings so that the
// identity is a genuine numerical check.
inline RMat classical_alpha_metric(const ClassicalFamily& fam, const RVec& theta,
                                   double alpha) {
  if (std::abs(std::abs(alpha) - 1.0) < 1e-14)
    throw Error(errc::alpha_domain, "alpha must differ from +-1");
  const Eigen::Index M = fam.density(theta).size();
  auto dl_alpha = [&](int i, double a) {
    const double h = detail::step_for(fam.fd_step, theta[i]);
    RVec tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    return RVec((alpha_embedding(fam.density(tp), a) - alpha_embedding(fam.density(tm), a)) /
                (2.0 * h));
  };
  RMat g(fam.n, fam.n);
  for (int i = 0; i < fam.n; ++i) {
    const RVec di = dl_alpha(i, alpha);
    for (int j = 0; j < fam.n; ++j) {
      const RVec dj = dl_alpha(j, -alpha);
      double acc = 0.0;
      for (Eigen::Index m = 0; m < M; ++m) acc += fam.weights[m] * di[m] * dj[m];
      g(i, j) = acc;
    }
  }
  return RMat(0.5 * (g + g.transpose()));
}

// Gamma^(alpha)_{ij,k} = E_p[(d_i d_j l + (1-alpha)/2 d_i l d_j l) d_k l].
// The reduced expectation form is well-defined for every real alpha,
// including the exponential-family flatness case alpha = 1.
inline ConnectionField classical_alpha_connection(const ClassicalFamily& fam,
                                                  const RVec& theta, double alpha) {
  const auto cd = detail::classical_log_derivs(fam, theta, true);
  ConnectionField gamma(fam.n);
  const double w = 0.5 * (1.0 - alpha);
  for (int i = 0; i < fam.n; ++i)
    for (int j = i; j < fam.n; ++j) {
      const RVec core = cd.ddl[i][j] + w * cd.dl[i].cwiseProduct(cd.dl[j]);
      for (int k = 0; k < fam.n; ++k) {
        const double v = detail::pmoment(fam, cd.P, core.cwiseProduct(cd.dl[k]));
        gamma.at(i, j, k) = v;
        gamma.at(j, i, k) = v;
      }
    }
  return gamma;
}

// max_{ijk} | d_k g_ij - Gamma^(alpha)_{ik,j} - Gamma^(-alpha)_{jk,i} |,
// with d_k g by central finite differences of the Fisher-Rao metric.
inline double classical_duality_residual(const ClassicalFamily& fam, const RVec& theta,
                                         double alpha) {
  const ConnectionField gp = classical_alpha_connection(fam, theta, alpha);
  const ConnectionField gm = classical_alpha_connection(fam, theta, -alpha);
  double res = 0.0;
  for (int k = 0; k < fam.n; ++k) {
    const double h = detail::step_for(fam.fd_step2, theta[k]);
    auto dg_at = [&](double step) {
      RVec tp = theta, tm = theta;
      tp[k] += step;
      tm[k] -= step;
      return RMat((fisher_rao(fam, tp) - fisher_rao(fam, tm)) / (2.0 * step));
    };
    // one Richardson level keeps the metric-derivative error below the
    // connection's own floor
    const RMat dg = (4.0 * dg_at(0.5 * h) - dg_at(h)) / 3.0;
    for (int i = 0; i < fam.n; ++i)
      for (int j = 0; j < fam.n; ++j) {
        const double lhs = dg(i, j);
        const double rhs = std::real(gp.at(i, k, j)) + std::real(gm.at(j, k, i));
        res = std::max(res, std::abs(lhs - rhs));
      }
  }
  return res;
}

}  // namespace stategeom
