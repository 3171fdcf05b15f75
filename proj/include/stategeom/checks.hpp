#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "stategeom/alpha_fs.hpp"
#include "stategeom/biortho.hpp"
#include "stategeom/classical.hpp"
#include "stategeom/common.hpp"
#include "stategeom/fs.hpp"
#include "stategeom/models.hpp"
#include "stategeom/qng.hpp"

namespace stategeom {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool lower_bound = false;  // counter-tests pass when residual EXCEEDS tolerance
  bool pass = false;
  std::string note;
};

namespace checks {

inline CheckResult bounded(const std::string& name, double residual, double tolerance,
                           double tol_scale, const std::string& note = "") {
  CheckResult r{name, residual, tolerance * tol_scale, false, false, note};
  r.pass = residual <= r.tolerance;
  return r;
}

inline CheckResult exceeds(const std::string& name, double residual, double floor,
                           double tol_scale, const std::string& note = "") {
  CheckResult r{name, residual, floor * tol_scale, true, false, note};
  r.pass = residual >= r.tolerance;
  return r;
}

// --- shared fixtures ------------------------------------------------------

inline ClassicalFamily gaussian_density_family() {
  ClassicalFamily fam;
  fam.n = 2;
  const GridSpec grid{-12.0, 12.0, 3001};
  const RVec x = grid.samples();
  fam.weights = RVec::Constant(x.size(), grid.spacing());
  fam.weights[0] *= 0.5;
  fam.weights[x.size() - 1] *= 0.5;
  fam.density = [x](const RVec& th) {
    const double mu = th[0], s = th[1];
    RVec p(x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      const double u = (x[m] - mu) / s;
      p[m] = std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * M_PI));
    }
    return p;
  };
  return fam;
}

inline ClassicalFamily bernoulli_family() {
  ClassicalFamily fam;
  fam.n = 1;
  fam.weights = RVec::Ones(2);
  fam.density = [](const RVec& th) {
    RVec p(2);
    p << th[0], 1.0 - th[0];
    return p;
  };
  fam.d1 = [](const RVec&, int) {
    RVec d(2);
    d << 1.0, -1.0;
    return d;
  };
  fam.d2 = [](const RVec&, int, int) { return RVec(RVec::Zero(2)); };
  fam.mode = DerivMode::analytic;
  return fam;
}

inline ClassicalFamily classical_exp_density_family() {
  ClassicalFamily fam;
  fam.n = 2;
  const ExponentialFamilySpec spec = default_exp_family_spec();
  fam.weights = RVec::Constant(spec.x.size(), spec.dx);
  fam.weights[0] *= 0.5;
  fam.weights[spec.x.size() - 1] *= 0.5;
  fam.density = [spec](const RVec& th) { return detail::expfam_density(spec, th); };
  return fam;
}

inline ClassicalFamily density_of(const StateFamily& fam) {
  ClassicalFamily cf;
  cf.n = fam.n;
  const StateFamily base = fam;
  cf.density = [base](const RVec& th) {
    const PureState s = base.eval(th);
    return RVec(s.amplitudes.cwiseAbs2());
  };
  const PureState probe = fam.eval(RVec::Constant(fam.n, 0.5));
  cf.weights.resize(probe.size());
  for (Eigen::Index m = 0; m < probe.size(); ++m) cf.weights[m] = probe.weight(m);
  return cf;
}

inline std::vector<double> alpha_sweep() { return {-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9}; }

// Families with a representative probe point inside their domain.
inline std::vector<std::pair<StateFamily, RVec>> probe_families() {
  std::vector<std::pair<StateFamily, RVec>> out;
  RVec tq(2);
  tq << 1.1, 0.4;
  out.emplace_back(make_qubit(), tq);
  RVec tr(2);
  tr << 0.2, -0.3;
  out.emplace_back(make_rand3(), tr);
  return out;
}

inline StateFamily gauged(const StateFamily& base) {
  // beta(theta) = theta_1^2 + theta_2 (and its tail for higher n)
  auto beta = [](const RVec& th) {
    double b = th[0] * th[0];
    for (int i = 1; i < th.size(); ++i) b += th[i];
    return b;
  };
  auto dbeta = [](const RVec& th) {
    RVec d = RVec::Ones(th.size());
    d[0] = 2.0 * th[0];
    return d;
  };
  auto ddbeta = [](const RVec& th) {
    RMat d = RMat::Zero(th.size(), th.size());
    d(0, 0) = 2.0;
    return d;
  };
  return with_phase(base, beta, dbeta, ddbeta);
}

// --- classical baseline ---------------------------------------------------

inline CheckResult classical_duality(double ts) {
  const ClassicalFamily gauss = gaussian_density_family();
  const ClassicalFamily bern = bernoulli_family();
  RVec tg(2);
  tg << 0.3, 0.9;
  RVec tb(1);
  tb << 0.37;
  double res = 0.0;
  for (double a : alpha_sweep()) {
    res = std::max(res, classical_duality_residual(gauss, tg, a));
    res = std::max(res, classical_duality_residual(bern, tb, a));
  }
  return bounded("classical_duality", res, 1e-4, ts, "gaussian + bernoulli, alpha in [-0.9, 0.9]");
}

inline CheckResult classical_alpha_metric_independence(double ts) {
  const ClassicalFamily gauss = gaussian_density_family();
  RVec tg(2);
  tg << 0.3, 0.9;
  const RMat fr = fisher_rao(gauss, tg);
  double res = 0.0;
  for (double a : {-0.9, -0.5, 0.0, 0.5, 0.9})
    res = std::max(res, (classical_alpha_metric(gauss, tg, a) - fr).cwiseAbs().maxCoeff());
  return bounded("classical_alpha_metric", res, 1e-6, ts, "g^(alpha) = Fisher-Rao for all alpha");
}

inline CheckResult classical_exp_flatness(double ts) {
  const ClassicalFamily fam = classical_exp_density_family();
  double res = 0.0;
  for (double t1 : {-0.3, 0.2}) {
    for (double t2 : {-0.15, 0.25}) {
      RVec th(2);
      th << t1, t2;
      res = std::max(res, classical_alpha_connection(fam, th, 1.0).max_abs());
    }
  }
  return bounded("classical_exp_flatness", res, 1e-6, ts, "Gamma^(1) = 0 on the exponential family");
}

// --- Hermitian geometry ---------------------------------------------------

inline CheckResult qmt_vs_fs(double ts) {
  double res = 0.0;
  RVec th(2);
  th << 1.1, 0.4;
  res = std::max(res, (fs_tensor(make_qubit(), th).g() - qmt_polar(make_qubit(), th)).cwiseAbs().maxCoeff());
  th << 0.3, 0.7;
  const StateFamily gp = make_gaussian_phase();
  res = std::max(res, (fs_tensor(gp, th).g() - qmt_polar(gp, th)).cwiseAbs().maxCoeff());
  th << 0.2, -0.3;
  const StateFamily r3 = make_rand3();
  res = std::max(res, (fs_tensor(r3, th).g() - qmt_polar(r3, th)).cwiseAbs().maxCoeff());
  return bounded("qmt_vs_fs", res, 1e-8, ts, "polar-form QMT equals Re-sym FS tensor");
}

inline CheckResult fs_hermiticity(double ts) {
  double res = 0.0;
  for (const auto& [fam, th] : probe_families()) {
    const GeometricTensor T = fs_tensor(fam, th);
    res = std::max(res, T.hermiticity_defect());
    res = std::max(res, T.gtilde().cwiseAbs().maxCoeff());
    res = std::max(res, T.omtilde().cwiseAbs().maxCoeff());
  }
  return bounded("fs_hermiticity", res, 1e-10, ts, "Hermitian tensors have no flipped parts");
}

inline CheckResult classical_reduction(double ts) {
  const StateFamily g = make_gaussian();
  RVec th(2);
  th << 0.4, 1.2;
  const RMat quarter_fr = 0.25 * fisher_rao(density_of(g), th);
  const double res = (fs_tensor(g, th).g() - quarter_fr).cwiseAbs().maxCoeff();
  return bounded("classical_reduction", res, 1e-8, ts, "trivial phase: g^FS = (1/4) g^FR");
}

inline CheckResult fs_gauge_invariance(double ts) {
  double res = 0.0;
  for (const auto& [fam, th] : probe_families()) {
    const StateFamily fam2 = gauged(fam);
    res = std::max(res, (fs_tensor(fam, th).matrix() - fs_tensor(fam2, th).matrix()).cwiseAbs().maxCoeff());
    res = std::max(res, (berry_curvature(fam, th) - berry_curvature(fam2, th)).cwiseAbs().maxCoeff());
    res = std::max(res, ConnectionField::max_diff(nonmetricity(fam, th, 0.7), nonmetricity(fam2, th, 0.7)));
  }
  return bounded("fs_gauge_invariance", res, 1e-6, ts, "FS, Berry, N under exp(i(t1^2 + t2))");
}

inline CheckResult gauge_counter_test(double ts) {
  const StateFamily fam = make_qubit();
  const StateFamily fam2 = gauged(fam);
  RVec th(2);
  th << 1.1, 0.4;
  auto bare = [&](const StateFamily& f) {
    const PureState s = evaluate(f, th);
    Mat T(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        T(i, j) = inner_on(s, derivative(f, th, i), derivative(f, th, j));
    return T;
  };
  double res = (bare(fam) - bare(fam2)).cwiseAbs().maxCoeff();
  const ConnectionField b1 = dual_connections(fam, th, 0.3).bare1;
  const ConnectionField b2 = dual_connections(fam2, th, 0.3).bare1;
  res = std::min(res, ConnectionField::max_diff(b1, b2));
  return exceeds("gauge_counter_test", res, 10.0 * tol::eps_fd, ts,
                 "bare overlaps and bare connections must move under a gauge");
}

inline CheckResult metric_compatibility(double ts) {
  double res = 0.0;
  auto residual_for = [](const StateFamily& fam, const RVec& th) {
    const ConnectionField gc = metric_connection(fam, th);
    double r = 0.0;
    for (int k = 0; k < fam.n; ++k) {
      const double h = detail::step_for(fam.fd_step2, th[k]);
      RVec tp = th, tm = th;
      tp[k] += h;
      tm[k] -= h;
      const RMat dg = (fs_tensor(fam, tp).g() - fs_tensor(fam, tm).g()) / (2.0 * h);
      for (int i = 0; i < fam.n; ++i)
        for (int j = 0; j < fam.n; ++j)
          r = std::max(r, std::abs(dg(i, j) - std::real(gc.at(k, i, j)) - std::real(gc.at(k, j, i))));
    }
    return r;
  };
  RVec th(2);
  th << 1.1, 0.4;
  res = std::max(res, residual_for(make_qubit(), th));
  th << 0.2, -0.1;
  res = std::max(res, residual_for(make_exp_family(default_exp_family_spec()), th));
  return bounded("metric_compatibility", res, 1e-4, ts, "d_k g = Gamma_{ki,j} + Gamma_{kj,i} (FD)");
}

inline CheckResult gamma_polar_vs_braket(double ts) {
  double res = 0.0;
  RVec th(2);
  th << 1.1, 0.4;
  res = std::max(res, ConnectionField::max_diff(metric_connection(make_qubit(), th),
                                                metric_connection_polar(make_qubit(), th)));
  th << 0.3, 0.7;
  const StateFamily gp = make_gaussian_phase();
  res = std::max(res, ConnectionField::max_diff(metric_connection(gp, th),
                                                metric_connection_polar(gp, th)));
  th << 0.2, -0.3;
  const StateFamily r3 = make_rand3();
  res = std::max(res, ConnectionField::max_diff(metric_connection(r3, th),
                                                metric_connection_polar(r3, th)));
  return bounded("gamma_polar_vs_braket", res, 1e-6, ts, "bra-ket and (P, phi) forms agree");
}

inline CheckResult exp_family_closed_forms_check(double ts) {
  const ExponentialFamilySpec spec = default_exp_family_spec();
  const StateFamily fam = make_exp_family(spec);
  RVec th(2);
  th << 0.2, -0.1;
  const auto cf = exp_family_closed_forms(spec, th, 0.6);
  const GeometricTensor T = fs_tensor(fam, th);
  double res = (cf.g - T.g()).cwiseAbs().maxCoeff();
  res = std::max(res, (cf.omega - T.omega()).cwiseAbs().maxCoeff());
  res = std::max(res, ConnectionField::max_diff(cf.gamma_c, metric_connection(fam, th)));
  res = std::max(res, ConnectionField::max_diff(cf.N, nonmetricity(fam, th, 0.6)));
  return bounded("exp_family_closed_forms", res, 1e-6, ts, "moment closed forms match the generic path");
}

inline CheckResult exp_family_one_flat(double ts) {
  const ExponentialFamilySpec spec = default_exp_family_spec();
  const StateFamily fam = make_exp_family(spec);
  double res = 0.0;
  for (double t1 : {-0.3, 0.2}) {
    for (double t2 : {-0.15, 0.25}) {
      RVec th(2);
      th << t1, t2;
      res = std::max(res, alpha_family_connection(fam, th, 1.0).max_abs());
      const auto cf = exp_family_closed_forms(spec, th, 1.0);
      res = std::max(res, ConnectionField::max_diff(cf.gamma_c, -1.0 * cf.N));
    }
  }
  return bounded("exp_family_one_flat", res, 1e-5, ts, "Gamma^(1) vanishes for the exponential family");
}

inline CheckResult qfi_trace_metric(double ts) {
  RVec th(2);
  th << 1.1, 0.4;
  double res = qfi_trace_forms(make_qubit(), th).first;
  th << 0.2, -0.3;
  res = std::max(res, qfi_trace_forms(make_rand4(), th).first);
  return bounded("qfi_trace_metric", res, 1e-8, ts, "four-term trace form reproduces g^FS");
}

inline CheckResult qfi_trace_connection(double ts) {
  RVec th(2);
  th << 1.1, 0.4;
  double res = qfi_trace_forms(make_qubit(), th).second;
  th << 0.2, -0.3;
  res = std::max(res, qfi_trace_forms(make_rand4(), th).second);
  return bounded("qfi_trace_connection", res, 1e-8, ts, "six-term trace form reproduces Gamma^(c)");
}

inline CheckResult psd_qmt(double ts) {
  double worst = 0.0;
  for (double t1 : {0.4, 1.2, 2.3}) {
    for (double t2 : {0.1, 0.9}) {
      RVec th(2);
      th << t1, t2;
      worst = std::min(worst, min_eigenvalue(fs_tensor(make_qubit(), th).g()));
      worst = std::min(worst, min_eigenvalue(fs_tensor(make_rand3(), th.array() * 0.3).g()));
    }
  }
  return bounded("psd_qmt", std::max(0.0, -worst), 1e-10, ts, "QMT eigenvalues >= -1e-10");
}

// --- Case-2 alpha geometry ------------------------------------------------

inline CheckResult case2_alpha_zero(double ts) {
  double res = 0.0;
  for (const auto& [fam, th] : probe_families()) {
    const GeometricTensor fs = fs_tensor(fam, th);
    res = std::max(res, (case2_tensor(fam, th, 0.0).matrix() - fs.matrix()).cwiseAbs().maxCoeff());
    const Case2Components c = case2_components(fam, th, 0.0);
    res = std::max(res, (c.g - fs.g()).cwiseAbs().maxCoeff());
    res = std::max(res, (c.omega - fs.omega()).cwiseAbs().maxCoeff());
    res = std::max(res, c.gtilde.cwiseAbs().maxCoeff());
    const auto dc = dual_connections(fam, th, 0.0);
    res = std::max(res, ConnectionField::max_diff(dc.gamma1.real(), metric_connection(fam, th)));
  }
  return bounded("case2_alpha_zero", res, 1e-8, ts, "alpha = 0 collapses to the FS objects");
}

inline CheckResult case2_norm_constant(double ts) {
  double res = 0.0;
  RVec th(2);
  th << 1.1, 0.4;
  for (double a : {0.5, -0.3}) {
    const double target = 1.0 / (1.0 - a * a);
    res = std::max(res, std::abs(alpha_norm(alpha_derivs(make_qubit(), th, a)) - target));
    RVec tg(2);
    tg << 0.3, 0.7;
    res = std::max(res, std::abs(alpha_norm(alpha_derivs(make_gaussian_phase(), tg, a)) - target));
    res = std::max(res, std::abs(alpha_density(make_qubit(), th, a).trace() - target));
  }
  return bounded("case2_norm_constant", res, 1e-10, ts, "<l1|l2> = Tr rho^(a) = 1/(1-a^2)");
}

inline CheckResult case2_omtilde_zero(double ts) {
  double res = 0.0;
  for (double a : {0.5, -0.3, 0.8})
    for (const auto& [fam, th] : probe_families())
      res = std::max(res, case2_tensor(fam, th, a).omtilde().cwiseAbs().maxCoeff());
  return bounded("case2_omtilde_zero", res, 1e-10, ts, "real antisymmetric part vanishes identically");
}

inline CheckResult case2_phase_scaling(double ts) {
  const StateFamily gp = make_gaussian_phase();
  RVec th(2);
  th << 0.3, 0.7;
  const RMat g0 = case2_tensor(gp, th, 0.0).g();
  double res = 0.0;
  for (double a : {0.5, -0.25}) {
    const RMat ga = case2_tensor(gp, th, a).g();
    const double ratio = ga(1, 1) / g0(1, 1);
    res = std::max(res, std::abs(ratio - (1.0 - a) / (1.0 + a)));
    res = std::max(res, std::abs(ga(0, 0) - g0(0, 0)));  // classical block is alpha-free
  }
  return bounded("case2_phase_scaling", res, 1e-6, ts, "phase block scales by (1-a)/(1+a)");
}

inline CheckResult alpha_qfi_matches_case2(double ts) {
  double res = 0.0;
  RVec th(2);
  th << 1.1, 0.4;
  for (double a : {0.5, -0.3}) {
    res = std::max(res, (alpha_qfi_trace(make_qubit(), th, a).matrix() -
                         case2_tensor(make_qubit(), th, a).matrix())
                            .cwiseAbs()
                            .maxCoeff());
    RVec tr(2);
    tr << 0.2, -0.3;
    res = std::max(res, (alpha_qfi_trace(make_rand4(), tr, a).matrix() -
                         case2_tensor(make_rand4(), tr, a).matrix())
                            .cwiseAbs()
                            .maxCoeff());
  }
  return bounded("alpha_qfi_trace", res, 1e-8, ts, "(1-a^2)^2 Tr[rho d rho d rho] = Case-2 tensor");
}

inline CheckResult alpha_field_strength_check(double ts) {
  double res = 0.0;
  for (double a : {0.0, 0.4}) {
    for (const auto& [fam, th] : probe_families()) {
      const Mat B = alpha_berry_field_strength(fam, th, a);
      const GeometricTensor T = case2_tensor(fam, th, a);
      const Mat expected = 2.0 * T.omega().cast<cxd>() - 2.0 * I * T.omtilde().cast<cxd>();
      res = std::max(res, (B - expected).cwiseAbs().maxCoeff());
    }
  }
  return bounded("alpha_field_strength", res, 1e-5, ts,
                 "curl of the alpha connection carries both antisymmetric parts");
}

inline CheckResult case1_alpha_zero(double ts) {
  RVec th(2);
  th << 1.1, 0.4;
  const Case1Result c = case1_tensor(make_qubit(), th, 0.0);
  double res = (c.tensor.matrix() - fs_tensor(make_qubit(), th).matrix()).cwiseAbs().maxCoeff();
  res = std::max(res, c.normalization_defect);
  return bounded("case1_alpha_zero", res, 1e-10, ts, "Case-1 collapses to FS at alpha = 0");
}

inline CheckResult case1_diagnostic(double ts) {
  RVec th(2);
  th << 1.1, 0.4;
  const Case1Result c = case1_tensor(make_qubit(), th, 0.3);
  if (!c.tensor.matrix().allFinite())
    return exceeds("case1_diagnostic", 0.0, 1e-8, ts, "non-finite Case-1 tensor");
  return exceeds("case1_diagnostic", c.normalization_defect, 1e-8, ts,
                 "Case-1 pair is not mutually normalized for nontrivial phase");
}

inline CheckResult star_star_duality(double ts) {
  double res = 0.0;
  for (double a : {0.3, 0.6})
    for (const auto& [fam, th] : probe_families())
      res = std::max(res, star_star_residual(fam, th, a));
  return bounded("star_star_duality", res, 1e-6, ts,
                 "(alpha -> -alpha, 1 <-> 2, conj) maps bare2 to bare1");
}

// Re[Gamma^1 + Gamma^2] is the metric connection of the QMT of the section:
// at alpha = 0 that is Gamma^(c) itself, at alpha != 0 the Levi-Civita
// connection of the alpha-QMT g^(alpha) (forced by the +-alpha duality).
inline CheckResult re_sum_duality(double ts) {
  double res = 0.0;
  for (const auto& [fam, th] : probe_families()) {
    {
      const auto dc0 = dual_connections(fam, th, 0.0);
      res = std::max(res, ConnectionField::max_diff((dc0.gamma1 + dc0.gamma2).real(),
                                                    2.0 * metric_connection(fam, th)));
    }
    for (double a : {0.3, 0.6}) {
      const auto dc = dual_connections(fam, th, a);
      const StateFamily f = fam;
      const ConnectionField lc = levi_civita_lowered(
          [&f, a](const RVec& t) { return case2_tensor(f, t, a).g(); }, th, fam.fd_step2);
      res = std::max(res, ConnectionField::max_diff((dc.gamma1 + dc.gamma2).real(), 2.0 * lc));
    }
  }
  return bounded("re_sum_duality", res, 1e-5, ts,
                 "Re[Gamma^1 + Gamma^2] = 2 x metric connection of the alpha-QMT");
}

inline CheckResult pm_alpha_duality(double ts) {
  double res = 0.0;
  for (double a : {0.3, -0.3, 0.6, -0.6}) {
    for (const auto& [fam, th] : probe_families()) {
      const auto dc = dual_connections(fam, th, a);
      for (int k = 0; k < fam.n; ++k) {
        const double h = detail::step_for(fam.fd_step2, th[k]);
        RVec tp = th, tm = th;
        tp[k] += h;
        tm[k] -= h;
        const Mat dfs = (case2_tensor(fam, tp, a).sym() - case2_tensor(fam, tm, a).sym()) / (2.0 * h);
        for (int i = 0; i < fam.n; ++i)
          for (int j = 0; j < fam.n; ++j) {
            const cxd rhs = 0.5 * (dc.gamma1.at(i, k, j) + dc.gamma2.at(j, k, i) +
                                   dc.gamma1.at(j, k, i) + dc.gamma2.at(i, k, j));
            res = std::max(res, std::abs(dfs(i, j) - rhs));
          }
      }
    }
  }
  return bounded("pm_alpha_duality", res, 1e-4, ts,
                 "d_k Sym FS^(a) = (Gamma^1 + Gamma^2) symmetrised (FD)");
}

inline CheckResult case2_gauge_invariance(double ts) {
  double res = 0.0;
  RVec th(2);
  th << 1.1, 0.4;
  const StateFamily fam = make_qubit();
  const StateFamily fam2 = gauged(fam);
  for (double a : {0.4}) {
    res = std::max(res, (case2_tensor(fam, th, a).matrix() - case2_tensor(fam2, th, a).matrix()).cwiseAbs().maxCoeff());
    res = std::max(res, (alpha_berry_field_strength(fam, th, a) - alpha_berry_field_strength(fam2, th, a)).cwiseAbs().maxCoeff());
    const auto d1 = dual_connections(fam, th, a);
    const auto d2 = dual_connections(fam2, th, a);
    res = std::max(res, ConnectionField::max_diff(d1.gamma1, d2.gamma1));
    res = std::max(res, ConnectionField::max_diff(d1.gamma2, d2.gamma2));
  }
  return bounded("case2_gauge_invariance", res, 1e-6, ts,
                 "tensor, field strength, gauge-invariant connections under simultaneous U(1)");
}

// --- non-Hermitian classification -----------------------------------------

inline CheckResult nh_hermitian_collapse(double ts) {
  const NhBandFamilies f = hermitian_band_families(0);
  RVec th(2);
  th << 0.7, 1.1;
  const Mat lr = nh_fs_tensor(f.left_lr, f.right_lr, th, NhKind::LR).matrix();
  const Mat rl = nh_fs_tensor(f.left_lr, f.right_lr, th, NhKind::RL).matrix();
  const Mat ll = nh_fs_tensor(f.left_unit, f.right_unit, th, NhKind::LL).matrix();
  const Mat rr = nh_fs_tensor(f.left_unit, f.right_unit, th, NhKind::RR).matrix();
  double res = (lr - rl).cwiseAbs().maxCoeff();
  res = std::max(res, (lr - ll).cwiseAbs().maxCoeff());
  res = std::max(res, (lr - rr).cwiseAbs().maxCoeff());
  return bounded("nh_hermitian_collapse", res, 1e-8, ts,
                 "LR = RL = LL = RR on a Hermitian family");
}

inline CheckResult nh_flipped_vanish(double ts) {
  const NhBandFamilies f = pt_band_families(0);
  RVec th(2);
  th << 0.4, 1.2;
  double res = 0.0;
  for (NhKind k : {NhKind::LL, NhKind::RR}) {
    const GeometricTensor T = nh_fs_tensor(f.left_unit, f.right_unit, th, k);
    res = std::max(res, T.gtilde().cwiseAbs().maxCoeff());
    res = std::max(res, T.omtilde().cwiseAbs().maxCoeff());
  }
  return bounded("nh_flipped_vanish", res, 1e-8, ts, "LL/RR tensors have no flipped parts");
}

inline CheckResult nh_field_strength(double ts) {
  double res = 0.0;
  for (int model = 0; model < 2; ++model) {
    const NhBandFamilies f = model == 0 ? pt_band_families(0) : nh3_band_families(0);
    RVec th(2);
    if (model == 0)
      th << 0.4, 1.2;
    else
      th << 0.3, -0.2;
    for (NhKind k : {NhKind::LR, NhKind::RL, NhKind::LL, NhKind::RR}) {
      const bool pair = (k == NhKind::LR || k == NhKind::RL);
      const StateFamily& l = pair ? f.left_lr : f.left_unit;
      const StateFamily& r = pair ? f.right_lr : f.right_unit;
      const Mat B = nh_berry_curvature(l, r, th, k);
      const GeometricTensor T = nh_fs_tensor(l, r, th, k);
      const Mat expected = 2.0 * T.omega().cast<cxd>() - 2.0 * I * T.omtilde().cast<cxd>();
      res = std::max(res, (B - expected).cwiseAbs().maxCoeff());
    }
  }
  return bounded("nh_field_strength", res, 1e-5, ts, "curvature = both antisymmetric parts, per kind");
}

inline CheckResult nh_biorthonormality(double ts) {
  double res = 0.0;
  for (double gamma : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const Mat h = pt_two_level(gamma, 1.0);
    const BiorthoEigensystem sys = biortho_eig(h);
    res = std::max(res, (sys.left.adjoint() * sys.right - Mat::Identity(2, 2)).cwiseAbs().maxCoeff());
    for (int k = 0; k < 2; ++k) {
      res = std::max(res, (h * sys.right.col(k) - sys.eigenvalues[k] * sys.right.col(k)).norm());
      res = std::max(res, (h.adjoint() * sys.left.col(k) -
                           std::conj(sys.eigenvalues[k]) * sys.left.col(k))
                              .norm());
    }
  }
  return bounded("nh_biorthonormality", res, 1e-10, ts, "<L|R> = id and eigen-residuals, pt sweep");
}

inline CheckResult nh_ep_detection(double ts) {
  bool raised = false;
  try {
    biortho_eig(pt_two_level(1.0, 1.0));
  } catch (const Error& e) {
    raised = (e.code() == std::string(errc::exceptional_point));
  }
  return exceeds("nh_ep_detection", raised ? 1.0 : 0.0, 1.0, ts,
                 "pt_two_level(1,1) must raise EXCEPTIONAL_POINT");
}

inline CheckResult lr_duality(double ts) {
  const NhBandFamilies f = pt_band_families(0);
  double res = 0.0;
  for (double gamma : {0.4, 0.6}) {
    RVec th(2);
    th << gamma, 1.1;
    res = std::max(res, lr_duality_residual(f.left_lr, f.right_lr, th));
  }
  const NhBandFamilies g = nh3_band_families(0);
  RVec th(2);
  th << 0.3, -0.2;
  res = std::max(res, lr_duality_residual(g.left_lr, g.right_lr, th));
  return bounded("lr_duality", res, 1e-5, ts, "(L <-> R, conj) maps Gamma^{LR} to Gamma^{RL}");
}

inline CheckResult nh_gauge_lr(double ts) {
  const NhBandFamilies f = pt_band_families(0);
  RVec th(2);
  th << 0.4, 1.2;
  auto beta = [](const RVec& t) { return 0.3 * t[0] * t[0] - 0.2 * t[1]; };
  const StateFamily l2 = with_phase(f.left_lr, beta, nullptr, nullptr);
  const StateFamily r2 = with_phase(f.right_lr, beta, nullptr, nullptr);
  const double res = (nh_fs_tensor(f.left_lr, f.right_lr, th, NhKind::LR).matrix() -
                      nh_fs_tensor(l2, r2, th, NhKind::LR).matrix())
                         .cwiseAbs()
                         .maxCoeff();
  return bounded("nh_gauge_lr", res, 1e-6, ts, "LR tensor under beta_L = beta_R");
}

// --- appendices -------------------------------------------------------------

inline GeneratorFamilySpec generator_pair(bool consistent) {
  GeneratorFamilySpec spec;
  Mat m(2, 2);
  m << cxd(0.3, 0.1), cxd(0.5, -0.2), cxd(-0.1, 0.4), cxd(0.8, 0.0);
  spec.A2 = {m};
  spec.A1 = {consistent ? Mat(m.adjoint()) : Mat(m.adjoint() + 0.2 * Mat::Identity(2, 2) * I)};
  Vec u(2), v(2);
  u << 1.0, 0.0;
  v << 1.0, 0.3;
  v /= u.dot(v);  // <u|v> = 1
  spec.l0_1 = u;
  spec.l0_2 = v;
  spec.variant = GeneratorVariant::biortho_pair;
  return spec;
}

inline CheckResult pairing_preservation(double ts) {
  const GeneratorFamilySpec good = generator_pair(true);
  double res = 0.0;
  for (double s : {0.0, 0.3, 0.7, 1.1})
    res = std::max(res, biortho_preservation_defect(good, s));
  const CheckResult ok = bounded("pairing_preservation", res, 1e-10, ts,
                                 "A_1^dag = A_2 preserves biorthonormality for all s");
  const double bad = biortho_preservation_defect(generator_pair(false), 0.7);
  CheckResult out = ok;
  if (bad <= 1e-3 * ts) {
    out.pass = false;
    out.note += " (mismatched pair failed to show a defect)";
  }
  return out;
}

inline CheckResult imag_time_qng_order(double ts) {
  const NhBandFamilies f = pt_band_families(0);
  const Mat h = pt_two_level(0.3, 1.0);  // real spectrum: biorthogonal-Hermitian
  RVec th0(2);
  th0 << 0.2, 1.2;
  const auto rep1 = imaginary_time_comparator(f.left_lr, f.right_lr, h, th0, 2e-3, 15);
  const auto rep2 = imaginary_time_comparator(f.left_lr, f.right_lr, h, th0, 1e-3, 15);
  const double order = std::log2(rep1.mean_deviation / rep2.mean_deviation);
  CheckResult r = exceeds("imag_time_qng_order", order, 1.9, ts,
                          "imaginary-time vs QNG deviation order in dtau");
  return r;
}

inline CheckResult norm_invariant_qfi_hermitian(double ts) {
  Mat h(2, 2);
  h << 1.0, 0.3, 0.3, -0.5;
  Vec psi0(2);
  psi0 << 0.8, 0.6;
  const Vec hpsi = h * psi0;
  const cxd mean = psi0.dot(hpsi);
  const double var4 = 4.0 * (std::real(hpsi.dot(hpsi)) - std::norm(mean));
  double res = 0.0;
  for (double t : {0.0, 0.4, 1.0})
    res = std::max(res, std::abs(normalized_generator_qfi(h, psi0, t)(0, 0) - var4));
  return bounded("norm_invariant_qfi_hermitian", res, 1e-8, ts,
                 "QFI = 4 Var(H), independent of theta, for Hermitian H");
}

inline CheckResult norm_invariant_qfi_pt(double ts) {
  const Mat h = pt_two_level(0.6, 1.0);
  Vec psi0(2);
  psi0 << 1.0, 0.0;
  StateFamily orbit = make_normalized_orbit(h, psi0);
  orbit.mode = DerivMode::central_fd;  // the cross-check is against FD geometry
  double res = 0.0;
  for (double t : {0.3, 0.7}) {
    RVec th(1);
    th << t;
    const double qfi = normalized_generator_qfi(h, psi0, t)(0, 0);
    res = std::max(res, std::abs(qfi - 4.0 * fs_tensor(orbit, th).g()(0, 0)));
  }
  return bounded("norm_invariant_qfi_pt", res, 1e-5, ts,
                 "path-dependent QFI matches the FD FS tensor of the normalized orbit");
}

// --- optimizers -------------------------------------------------------------

inline CheckResult qng_hermitian_ground(double ts) {
  Mat sz(2, 2);
  sz << 1.0, 0.0, 0.0, -1.0;
  CostSpec cost{sz, CostKind::hermitian_expectation};
  OptimizerOptions opt;
  opt.eta = 0.1;
  opt.max_iters = 200;
  RVec th0(2);
  th0 << 2.5, 0.3;
  const OptimizerTrace trace = qng_optimize_hermitian(make_qubit(), cost, th0, opt);
  const double final_cost = std::real(trace.steps.back().cost);
  return bounded("qng_hermitian_ground", std::abs(final_cost + 1.0), 1e-6, ts,
                 "sigma_z ground cost -1 reached in <= 200 steps");
}

inline CheckResult rr_eigensolver(double ts) {
  const Mat h = pt_two_level(0.6, 1.0);
  OptimizerOptions opt;
  opt.eta = 0.2;
  opt.max_iters = 500;
  opt.cost_tol = 1e-10;
  RVec th0(2);
  th0 << 1.2, 0.8;
  const OptimizerTrace trace = rr_variational_eigensolver(make_qubit(), h, th0, opt);
  const double lrr = trace.steps.back().aux;
  const double e_abs = std::abs(trace.steps.back().cost);
  double res = std::max(lrr / 1e-8, std::abs(e_abs - 0.8) / 1e-5);
  return bounded("rr_eigensolver", res, 1.0, ts,
                 "L^RR < 1e-8 and |E| = 0.8 within 1e-5 on pt_two_level(0.6, 1.0)");
}

inline CheckResult nh_dual_smoke(double) {
  const NhBandFamilies f = pt_band_families(0);
  const Mat h = pt_two_level(0.5, 1.1);
  CostSpec cost{h, CostKind::biortho_expectation};
  OptimizerOptions opt;
  RVec th(2);
  th << 0.5, 1.1;
  const NhDualStep s1 = qng_step_nh_dual(f.left_lr, f.right_lr, cost, th, opt);
  const NhDualStep s2 = qng_step_nh_dual(f.left_lr, f.right_lr, cost, th, opt);
  double res = (s1.dtheta_r - s2.dtheta_r).cwiseAbs().maxCoeff();
  res = std::max(res, (s1.dtheta_i - s2.dtheta_i).cwiseAbs().maxCoeff());
  const bool finite = s1.dtheta_r.allFinite() && s1.dtheta_i.allFinite() &&
                      std::isfinite(s1.incompatibility) && s1.incompatibility >= 0.0 &&
                      s1.incompatibility <= M_PI;
  CheckResult r{"nh_dual_smoke", finite ? res : 1.0, 0.0, false, false,
                "dual steps are finite and bit-deterministic"};
  r.pass = finite && res == 0.0;
  return r;
}

}  // namespace checks

using CheckFn = std::function<CheckResult(double)>;

inline const std::vector<std::pair<std::string, CheckFn>>& check_registry() {
  static const std::vector<std::pair<std::string, CheckFn>> reg = {
      {"classical_duality", checks::classical_duality},
      {"classical_alpha_metric", checks::classical_alpha_metric_independence},
      {"classical_exp_flatness", checks::classical_exp_flatness},
      {"qmt_vs_fs", checks::qmt_vs_fs},
      {"fs_hermiticity", checks::fs_hermiticity},
      {"classical_reduction", checks::classical_reduction},
      {"fs_gauge_invariance", checks::fs_gauge_invariance},
      {"gauge_counter_test", checks::gauge_counter_test},
      {"metric_compatibility", checks::metric_compatibility},
      {"gamma_polar_vs_braket", checks::gamma_polar_vs_braket},
      {"exp_family_closed_forms", checks::exp_family_closed_forms_check},
      {"exp_family_one_flat", checks::exp_family_one_flat},
      {"qfi_trace_metric", checks::qfi_trace_metric},
      {"qfi_trace_connection", checks::qfi_trace_connection},
      {"psd_qmt", checks::psd_qmt},
      {"case2_alpha_zero", checks::case2_alpha_zero},
      {"case2_norm_constant", checks::case2_norm_constant},
      {"case2_omtilde_zero", checks::case2_omtilde_zero},
      {"case2_phase_scaling", checks::case2_phase_scaling},
      {"alpha_qfi_trace", checks::alpha_qfi_matches_case2},
      {"alpha_field_strength", checks::alpha_field_strength_check},
      {"case1_alpha_zero", checks::case1_alpha_zero},
      {"case1_diagnostic", checks::case1_diagnostic},
      {"star_star_duality", checks::star_star_duality},
      {"re_sum_duality", checks::re_sum_duality},
      {"pm_alpha_duality", checks::pm_alpha_duality},
      {"case2_gauge_invariance", checks::case2_gauge_invariance},
      {"nh_hermitian_collapse", checks::nh_hermitian_collapse},
      {"nh_flipped_vanish", checks::nh_flipped_vanish},
      {"nh_field_strength", checks::nh_field_strength},
      {"nh_biorthonormality", checks::nh_biorthonormality},
      {"nh_ep_detection", checks::nh_ep_detection},
      {"lr_duality", checks::lr_duality},
      {"nh_gauge_lr", checks::nh_gauge_lr},
      {"pairing_preservation", checks::pairing_preservation},
      {"imag_time_qng_order", checks::imag_time_qng_order},
      {"norm_invariant_qfi_hermitian", checks::norm_invariant_qfi_hermitian},
      {"norm_invariant_qfi_pt", checks::norm_invariant_qfi_pt},
      {"qng_hermitian_ground", checks::qng_hermitian_ground},
      {"rr_eigensolver", checks::rr_eigensolver},
      {"nh_dual_smoke", checks::nh_dual_smoke},
  };
  return reg;
}

inline CheckResult run_check(const std::string& name, double tol_scale = 1.0) {
  for (const auto& [n, fn] : check_registry())
    if (n == name) return fn(tol_scale);
  throw Error(errc::config, "unknown check: " + name);
}

inline std::vector<CheckResult> run_all_checks(double tol_scale = 1.0) {
  std::vector<CheckResult> out;
  for (const auto& [n, fn] : check_registry()) out.push_back(fn(tol_scale));
  return out;
}

}  // namespace stategeom
