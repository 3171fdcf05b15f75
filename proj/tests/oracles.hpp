#pragma once

// Test-only oracles, independent of the library's tensor/connection
// evaluation paths: overlap-expansion fits, finite-difference curls and raw
// two-point sums.

#include <cmath>
#include <functional>
#include <vector>

#include "stategeom/common.hpp"
#include "stategeom/state.hpp"

namespace oracles {

using stategeom::cxd;
using stategeom::Mat;
using stategeom::PureState;
using stategeom::RMat;
using stategeom::RVec;
using stategeom::StateFamily;
using stategeom::Vec;

inline cxd overlap(const StateFamily& fam, const RVec& a, const RVec& b) {
  return stategeom::inner(fam.eval(a), fam.eval(b));
}

// Provost-Vallee metric fit: 1 - |<Psi(theta)|Psi(theta + d)>|^2 expanded to
// quadratic order, sampled symmetrically and Richardson-extrapolated.
inline RMat pv_metric_fit(const StateFamily& fam, const RVec& theta, double h = 1e-2) {
  const int n = static_cast<int>(theta.size());
  auto infidelity = [&](const RVec& d) {
    const cxd ov = overlap(fam, theta, RVec(theta + d));
    return 1.0 - std::norm(ov);
  };
  auto sym = [&](const RVec& d) { return 0.5 * (infidelity(d) + infidelity(RVec(-d))); };
  auto fit = [&](double step) {
    RMat g(n, n);
    for (int i = 0; i < n; ++i) {
      RVec ei = RVec::Zero(n);
      ei[i] = step;
      g(i, i) = sym(ei) / (step * step);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        RVec eij = RVec::Zero(n);
        eij[i] = step;
        eij[j] = step;
        RVec ei = RVec::Zero(n), ej = RVec::Zero(n);
        ei[i] = step;
        ej[j] = step;
        g(i, j) = (sym(eij) - sym(ei) - sym(ej)) / (2.0 * step * step);
        g(j, i) = g(i, j);
      }
    return g;
  };
  const RMat gh = fit(h);
  const RMat gh2 = fit(0.5 * h);
  return (4.0 * gh2 - gh) / 3.0;
}

// Berry connection by the oracle's own central difference of the state, and
// the curvature as a second-level FD curl.
inline RVec berry_connection_fd(const StateFamily& fam, const RVec& theta, double h = 1e-5) {
  const int n = static_cast<int>(theta.size());
  const PureState s = fam.eval(theta);
  RVec a(n);
  for (int i = 0; i < n; ++i) {
    RVec tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const Vec d = (fam.eval(tp).amplitudes - fam.eval(tm).amplitudes) / (2.0 * h);
    a[i] = std::imag(stategeom::inner_on(s, s.amplitudes, d));
  }
  return a;
}

inline RMat berry_curvature_fd(const StateFamily& fam, const RVec& theta, double h = 2e-4) {
  const int n = static_cast<int>(theta.size());
  RMat f = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    RVec tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const RVec da = (berry_connection_fd(fam, tp) - berry_connection_fd(fam, tm)) / (2.0 * h);
    for (int j = 0; j < n; ++j) {
      f(i, j) += da[j];
      f(j, i) -= da[j];
    }
  }
  return f;
}

// Biorthogonal overlap-expansion fit of the symmetric part of
// <d_i bra|d_j ket>, from D(d) = <bra(theta+d) - bra(theta)|ket(theta+d) - ket(theta)>.
inline Mat biortho_overlap_fit(const StateFamily& braf, const StateFamily& ketf,
                               const RVec& theta, double h = 1e-3) {
  const int n = static_cast<int>(theta.size());
  const PureState b0 = braf.eval(theta);
  const PureState k0 = ketf.eval(theta);
  auto dval = [&](const RVec& d) {
    const PureState b = braf.eval(RVec(theta + d));
    const PureState k = ketf.eval(RVec(theta + d));
    return stategeom::inner_on(b0, Vec(b.amplitudes - b0.amplitudes),
                               Vec(k.amplitudes - k0.amplitudes));
  };
  auto sym = [&](const RVec& d) { return 0.5 * (dval(d) + dval(RVec(-d))); };
  auto fit = [&](double step) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
      RVec ei = RVec::Zero(n);
      ei[i] = step;
      m(i, i) = sym(ei) / (step * step);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        RVec eij = RVec::Zero(n);
        eij[i] = step;
        eij[j] = step;
        RVec ei = RVec::Zero(n), ej = RVec::Zero(n);
        ei[i] = step;
        ej[j] = step;
        m(i, j) = (sym(eij) - sym(ei) - sym(ej)) / (2.0 * step * step);
        m(j, i) = m(i, j);
      }
    return m;
  };
  const Mat mh = fit(h);
  const Mat mh2 = fit(0.5 * h);
  return (4.0 * mh2 - mh) / 3.0;
}

// Raw two-point sums for the Bloch qubit: E-moments of the two-outcome
// distribution P = (cos^2(t/2), sin^2(t/2)) with phases (0, p).
struct QubitMoments {
  double t, p;

  double P0() const { return std::cos(0.5 * t) * std::cos(0.5 * t); }
  double P1() const { return std::sin(0.5 * t) * std::sin(0.5 * t); }
  // d_theta ln P, d_phi ln P, d_theta phi_x, d_phi phi_x per outcome
  double dl(int x, int axis) const {
    if (axis == 1) return 0.0;
    return x == 0 ? -std::tan(0.5 * t) : 1.0 / std::tan(0.5 * t);
  }
  double dp(int x, int axis) const { return (axis == 1 && x == 1) ? 1.0 : 0.0; }
  double phase(int x) const { return x == 0 ? 0.0 : p; }

  double expect(const std::function<double(int)>& f) const {
    return P0() * f(0) + P1() * f(1);
  }
  cxd expect_c(const std::function<cxd(int)>& f) const { return P0() * f(0) + P1() * f(1); }
};

// Case-2 tensor of the qubit from the trig-weighted two-point sums:
// FS^(a)_ij = (1/4) E[dl dl] + r Cov[dp dp] + (i/2) E[r dl dp - dp dl],
// r = (1-a)/(1+a).
inline Mat qubit_case2_oracle(double t, double p, double a) {
  QubitMoments q{t, p};
  const double r = (1.0 - a) / (1.0 + a);
  Mat T(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double ll = q.expect([&](int x) { return q.dl(x, i) * q.dl(x, j); });
      const double pp = q.expect([&](int x) { return q.dp(x, i) * q.dp(x, j); });
      const double mi = q.expect([&](int x) { return q.dp(x, i); });
      const double mj = q.expect([&](int x) { return q.dp(x, j); });
      const double lp = q.expect([&](int x) { return q.dl(x, i) * q.dp(x, j); });
      const double pl = q.expect([&](int x) { return q.dp(x, i) * q.dl(x, j); });
      T(i, j) = 0.25 * ll + r * (pp - mi * mj) + 0.5 * cxd(0.0, 1.0) * (r * lp - pl);
    }
  return T;
}

// Case-1 tensor of the qubit from the trig-weighted expectations:
// <d_i l_a|d_j l_-a> = (1/4) E[(dl - 2i dp)_i (dl + 2i dp)_j e^{2iap}]
// minus E_i E_j / (4 (1-a^2)) with E_i, E_j the corresponding first moments.
inline Mat qubit_case1_oracle(double t, double p, double a) {
  QubitMoments q{t, p};
  Mat T(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      auto wi = [&](int x) {
        return (q.dl(x, i) - 2.0 * cxd(0.0, 1.0) * q.dp(x, i)) *
               std::exp(cxd(0.0, 2.0 * a * q.phase(x)));
      };
      auto wj = [&](int x) {
        return (q.dl(x, j) + 2.0 * cxd(0.0, 1.0) * q.dp(x, j)) *
               std::exp(cxd(0.0, 2.0 * a * q.phase(x)));
      };
      const cxd second = q.expect_c([&](int x) {
        return (q.dl(x, i) - 2.0 * cxd(0.0, 1.0) * q.dp(x, i)) *
               (q.dl(x, j) + 2.0 * cxd(0.0, 1.0) * q.dp(x, j)) *
               std::exp(cxd(0.0, 2.0 * a * q.phase(x)));
      });
      T(i, j) = 0.25 * second - q.expect_c(wi) * q.expect_c(wj) / (4.0 * (1.0 - a * a));
    }
  return T;
}

// Measured convergence order from values at h and h/2.
inline double measured_order(double err_h, double err_h2) { return std::log2(err_h / err_h2); }

}  // namespace oracles
