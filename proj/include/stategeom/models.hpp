#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stategeom/biortho.hpp"
#include "stategeom/common.hpp"
#include "stategeom/fs.hpp"
#include "stategeom/linalg.hpp"
#include "stategeom/state.hpp"
#include "stategeom/tensor.hpp"

namespace stategeom {

struct GridSpec {
  double lo = -8.0;
  double hi = 8.0;
  int points = 2048;

  RVec samples() const {
    RVec x(points);
    const double dx = (hi - lo) / (points - 1);
    for (int m = 0; m < points; ++m) x[m] = lo + m * dx;
    return x;
  }
  double spacing() const { return (hi - lo) / (points - 1); }
};

// Families defined by a per-sample log-amplitude Lambda(x; theta) with
// analytic parameter derivatives: Psi = exp(Lambda).
inline StateFamily log_amplitude_family(
    int n, bool is_grid, double spacing,
    std::function<Vec(const RVec&)> lam,
    std::function<Vec(const RVec&, int)> dlam,
    std::function<Vec(const RVec&, int, int)> ddlam) {
  StateFamily fam;
  fam.n = n;
  fam.mode = DerivMode::analytic;
  fam.eval = [=](const RVec& th) {
    PureState s;
    s.amplitudes = lam(th).array().exp();
    s.is_grid = is_grid;
    s.grid_spacing = spacing;
    s.norm_kind = NormKind::unit;
    return s;
  };
  fam.d1 = [=](const RVec& th, int i) {
    const Vec psi = lam(th).array().exp();
    return Vec(dlam(th, i).cwiseProduct(psi));
  };
  fam.d2 = [=](const RVec& th, int i, int j) {
    const Vec psi = lam(th).array().exp();
    const Vec di = dlam(th, i), dj = dlam(th, j);
    return Vec((ddlam(th, i, j) + di.cwiseProduct(dj)).cwiseProduct(psi));
  };
  return fam;
}

// ---------------------------------------------------------------------------
// Bloch qubit: Psi(theta, phi) = (cos(theta/2), e^{i phi} sin(theta/2)).
inline StateFamily make_qubit() {
  StateFamily fam;
  fam.n = 2;
  fam.mode = DerivMode::analytic;
  fam.eval = [](const RVec& th) {
    PureState s;
    s.amplitudes.resize(2);
    s.amplitudes << std::cos(0.5 * th[0]), std::exp(I * th[1]) * std::sin(0.5 * th[0]);
    return s;
  };
  fam.d1 = [](const RVec& th, int i) {
    Vec d(2);
    const cxd ph = std::exp(I * th[1]);
    if (i == 0)
      d << -0.5 * std::sin(0.5 * th[0]), 0.5 * ph * std::cos(0.5 * th[0]);
    else
      d << 0.0, I * ph * std::sin(0.5 * th[0]);
    return d;
  };
  fam.d2 = [](const RVec& th, int i, int j) {
    Vec d(2);
    const cxd ph = std::exp(I * th[1]);
    if (i == 0 && j == 0)
      d << -0.25 * std::cos(0.5 * th[0]), -0.25 * ph * std::sin(0.5 * th[0]);
    else if (i == 1 && j == 1)
      d << 0.0, -ph * std::sin(0.5 * th[0]);
    else
      d << 0.0, 0.5 * I * ph * std::cos(0.5 * th[0]);
    return d;
  };
  return fam;
}

// ---------------------------------------------------------------------------
// Gaussian wave packet Psi(x; mu, sigma) = (pi sigma^2)^{-1/4}
// exp(-(x-mu)^2/(2 sigma^2)); at (0, 1) this is pi^{-1/4} e^{-x^2/2}.
inline StateFamily make_gaussian(const GridSpec& grid = {}) {
  const RVec x = grid.samples();
  auto lam = [x](const RVec& th) {
    const double mu = th[0], s = th[1];
    Vec v(x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      const double u = x[m] - mu;
      v[m] = -u * u / (2.0 * s * s) - 0.5 * std::log(s) - 0.25 * std::log(M_PI);
    }
    return v;
  };
  auto dlam = [x](const RVec& th, int i) {
    const double mu = th[0], s = th[1];
    Vec v(x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      const double u = x[m] - mu;
      v[m] = (i == 0) ? u / (s * s) : (u * u / (s * s * s) - 0.5 / s);
    }
    return v;
  };
  auto ddlam = [x](const RVec& th, int i, int j) {
    const double mu = th[0], s = th[1];
    Vec v(x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      const double u = x[m] - mu;
      if (i == 0 && j == 0)
        v[m] = -1.0 / (s * s);
      else if (i == 1 && j == 1)
        v[m] = -3.0 * u * u / (s * s * s * s) + 0.5 / (s * s);
      else
        v[m] = -2.0 * u / (s * s * s);
    }
    return v;
  };
  StateFamily fam = log_amplitude_family(2, true, grid.spacing(), lam, dlam, ddlam);
  DomainBox box;
  box.lo = RVec(2);
  box.hi = RVec(2);
  box.lo << grid.lo / 2.0, 0.2;
  box.hi << grid.hi / 2.0, 3.0;
  fam.domain = box;
  return fam;
}

// Gaussian amplitude with plane-wave phase: parameters (mu, k),
// Psi = gauss(x; mu, sqrt(2)) e^{i k x}, so P = N(mu, 1) and the phase block
// of the metric is Var_P[x] = 1 at k-independent leading order.
inline StateFamily make_gaussian_phase(const GridSpec& grid = {}) {
  const RVec x = grid.samples();
  const double s = std::sqrt(2.0);
  auto lam = [x, s](const RVec& th) {
    Vec v(x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      const double u = x[m] - th[0];
      v[m] = -u * u / (2.0 * s * s) - 0.5 * std::log(s) - 0.25 * std::log(M_PI) +
             I * th[1] * x[m];
    }
    return v;
  };
  auto dlam = [x, s](const RVec& th, int i) {
    Vec v(x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m)
      v[m] = (i == 0) ? cxd((x[m] - th[0]) / (s * s)) : I * x[m];
    return v;
  };
  auto ddlam = [x, s](const RVec&, int i, int j) {
    Vec v = Vec::Zero(x.size());
    if (i == 0 && j == 0) v.setConstant(-1.0 / (s * s));
    return v;
  };
  StateFamily fam = log_amplitude_family(2, true, grid.spacing(), lam, dlam, ddlam);
  DomainBox box;
  box.lo = RVec(2);
  box.hi = RVec(2);
  box.lo << grid.lo / 2.0, -4.0;
  box.hi << grid.hi / 2.0, 4.0;
  fam.domain = box;
  return fam;
}

// ---------------------------------------------------------------------------
// Exponential-family wavefunction
// Psi = exp[ (C + sum_j theta^j (F_j + i G_j) - psi(theta)) / 2 ].
struct ExponentialFamilySpec {
  RVec x;
  double dx = 0.0;
  RVec C;
  std::vector<RVec> F;
  std::vector<RVec> G;

  int n() const { return static_cast<int>(F.size()); }
};

namespace detail {

inline double trap_weight(Eigen::Index m, Eigen::Index size, double dx) {
  return (m == 0 || m == size - 1) ? 0.5 * dx : dx;
}

inline RVec expfam_density(const ExponentialFamilySpec& spec, const RVec& theta,
                           double* psi_out = nullptr) {
  const Eigen::Index M = spec.x.size();
  RVec e = spec.C;
  for (int j = 0; j < spec.n(); ++j) e += theta[j] * spec.F[j];
  const double shift = e.maxCoeff();  // log-sum-exp guard
  double z = 0.0;
  for (Eigen::Index m = 0; m < M; ++m)
    z += trap_weight(m, M, spec.dx) * std::exp(e[m] - shift);
  const double psi = shift + std::log(z);
  if (psi_out) *psi_out = psi;
  RVec P(M);
  for (Eigen::Index m = 0; m < M; ++m) P[m] = std::exp(e[m] - psi);
  return P;
}

inline double expfam_moment(const ExponentialFamilySpec& spec, const RVec& P, const RVec& f) {
  double acc = 0.0;
  for (Eigen::Index m = 0; m < P.size(); ++m)
    acc += trap_weight(m, P.size(), spec.dx) * P[m] * f[m];
  return acc;
}

}  // namespace detail

// psi(theta) = ln int exp(C + theta.F) dx; makes the state unit norm.
inline double exp_family_normalizer(const ExponentialFamilySpec& spec, const RVec& theta) {
  double psi = 0.0;
  detail::expfam_density(spec, theta, &psi);
  return psi;
}

inline StateFamily make_exp_family(const ExponentialFamilySpec& spec) {
  const int n = spec.n();
  // {F_1..F_n, 1} must be numerically independent for theta -> P to be
  // one-to-one.
  {
    const Eigen::Index M = spec.x.size();
    RMat basis(M, n + 1);
    for (int j = 0; j < n; ++j) basis.col(j) = spec.F[j] / std::max(1.0, spec.F[j].norm());
    basis.col(n) = RVec::Ones(M) / std::sqrt(static_cast<double>(M));
    const RMat gram = basis.transpose() * basis;
    if (min_eigenvalue(gram) <= 1e-10)
      throw Error(errc::config, "exponential-family functions {F_j, 1} are dependent");
  }
  auto lam = [spec](const RVec& th) {
    double psi = 0.0;
    detail::expfam_density(spec, th, &psi);
    RVec re = spec.C;
    RVec im = RVec::Zero(spec.x.size());
    for (int j = 0; j < spec.n(); ++j) {
      re += th[j] * spec.F[j];
      im += th[j] * spec.G[j];
    }
    Vec v(spec.x.size());
    for (Eigen::Index m = 0; m < spec.x.size(); ++m)
      v[m] = 0.5 * cxd(re[m] - psi, im[m]);
    return v;
  };
  auto dlam = [spec](const RVec& th, int i) {
    const RVec P = detail::expfam_density(spec, th);
    const double dpsi = detail::expfam_moment(spec, P, spec.F[i]);
    Vec v(spec.x.size());
    for (Eigen::Index m = 0; m < spec.x.size(); ++m)
      v[m] = 0.5 * cxd(spec.F[i][m] - dpsi, spec.G[i][m]);
    return v;
  };
  auto ddlam = [spec](const RVec& th, int i, int j) {
    const RVec P = detail::expfam_density(spec, th);
    const double mi = detail::expfam_moment(spec, P, spec.F[i]);
    const double mj = detail::expfam_moment(spec, P, spec.F[j]);
    const double mij = detail::expfam_moment(spec, P, spec.F[i].cwiseProduct(spec.F[j]));
    return Vec(Vec::Constant(spec.x.size(), cxd(-0.5 * (mij - mi * mj), 0.0)));
  };
  return log_amplitude_family(n, true, spec.dx, lam, dlam, ddlam);
}

// Closed forms for the exponential family at a point: FS metric, Berry
// 2-form part, metric connection and non-metricity, all as moments of
// A_i = F_i - d_i psi and G_i under P — no parameter differentiation.
struct ExpFamilyClosedForms {
  RMat g;        // (1/4)(Hess psi + Cov[G_i, G_j])
  RMat omega;    // imaginary-antisymmetric part values
  ConnectionField gamma_c;
  ConnectionField N;
};

inline ExpFamilyClosedForms exp_family_closed_forms(const ExponentialFamilySpec& spec,
                                                    const RVec& theta, double alpha) {
  const int n = spec.n();
  const RVec P = detail::expfam_density(spec, theta);
  auto E = [&](const RVec& f) { return detail::expfam_moment(spec, P, f); };
  std::vector<RVec> A(n);
  for (int i = 0; i < n; ++i) A[i] = spec.F[i].array() - E(spec.F[i]);
  const auto& G = spec.G;
  auto E2 = [&](const RVec& a, const RVec& b) { return E(a.cwiseProduct(b)); };
  auto E3 = [&](const RVec& a, const RVec& b, const RVec& c) {
    return E(a.cwiseProduct(b).cwiseProduct(c));
  };

  ExpFamilyClosedForms out;
  out.g.resize(n, n);
  out.omega.resize(n, n);
  RVec eg(n);
  for (int i = 0; i < n; ++i) eg[i] = E(G[i]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.g(i, j) = 0.25 * (E2(A[i], A[j]) + E2(G[i], G[j]) - eg[i] * eg[j]);
      out.omega(i, j) = 0.25 * (E2(A[i], G[j]) - E2(A[j], G[i]));
    }

  out.gamma_c = ConnectionField(n);
  out.N = ConnectionField(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double aag = E3(A[i], A[j], A[k]) - E3(G[i], G[j], A[k]);
        const double agg = E3(A[i], G[j], G[k]) + E3(A[j], G[i], G[k]);
        const double sub = (E2(A[i], G[j]) + E2(A[j], G[i])) * eg[k] +
                           eg[i] * (E2(A[j], G[k]) - E2(A[k], G[j])) +
                           eg[j] * (E2(A[i], G[k]) - E2(A[k], G[i]));
        out.gamma_c.at(i, j, k) = out.gamma_c.at(j, i, k) = 0.125 * (aag + agg - sub);

        const double naag = E3(A[i], A[j], A[k]) - E3(G[i], G[j], A[k]);
        const double nagg = E3(G[i], A[j], G[k]) + E3(G[j], A[i], G[k]);
        const double nsub = (E2(G[i], A[j]) + E2(G[j], A[i])) * eg[k] +
                            eg[i] * (E2(A[j], G[k]) - E2(A[k], G[j])) +
                            eg[j] * (E2(A[i], G[k]) - E2(A[k], G[i]));
        out.N.at(i, j, k) = out.N.at(j, i, k) =
            -0.125 * alpha * (naag + nagg - nsub);
      }
  return out;
}

// Built-in two-parameter spec used by tests and the CLI model registry.
inline ExponentialFamilySpec default_exp_family_spec(const GridSpec& grid = {-8.0, 8.0, 2048}) {
  ExponentialFamilySpec spec;
  spec.x = grid.samples();
  spec.dx = grid.spacing();
  spec.C = -spec.x.cwiseProduct(spec.x);
  spec.F.resize(2);
  spec.G.resize(2);
  spec.F[0] = spec.x;
  spec.F[1] = 0.5 * spec.x.cwiseProduct(spec.x);
  spec.G[0] = spec.x.cwiseProduct(spec.x);
  spec.G[1] = spec.x;
  return spec;
}

// ---------------------------------------------------------------------------
// Unitary-orbit families with commuting generators:
// |l_1(s)> = e^{i s_k A^k_1} |l0_1>,  |l_2(s)> = e^{i s_k A^k_2} |l0_2>.
enum class GeneratorVariant { hermitian, biortho_pair };

struct GeneratorFamilySpec {
  std::vector<Mat> A1;
  std::vector<Mat> A2;
  Vec l0_1;
  Vec l0_2;
  GeneratorVariant variant = GeneratorVariant::hermitian;

  int n() const { return static_cast<int>(A1.size()); }
};

namespace detail {

inline void require_commuting(const std::vector<Mat>& A) {
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = i + 1; j < A.size(); ++j) {
      const double c = (A[i] * A[j] - A[j] * A[i]).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, A[i].cwiseAbs().maxCoeff() * A[j].cwiseAbs().maxCoeff());
      if (c > 1e-10 * scale)
        throw Error(errc::config, "generators do not commute");
    }
}

inline Vec evolve(const std::vector<Mat>& A, const Vec& v0, const RVec& s) {
  Mat gen = Mat::Zero(v0.size(), v0.size());
  for (size_t k = 0; k < A.size(); ++k) gen += I * s[static_cast<int>(k)] * A[k];
  return expm(gen) * v0;
}

}  // namespace detail

inline std::pair<StateFamily, StateFamily> make_generator_families(
    const GeneratorFamilySpec& spec) {
  detail::require_commuting(spec.A1);
  detail::require_commuting(spec.A2);
  if (spec.variant == GeneratorVariant::biortho_pair &&
      std::abs(spec.l0_1.dot(spec.l0_2) - 1.0) > tol::eps_norm)
    throw Error(errc::normalization, "<l0_1|l0_2> must be 1 for a biortho_pair");
  auto build = [n = spec.n()](std::vector<Mat> A, Vec v0) {
    StateFamily fam;
    fam.n = n;
    fam.mode = DerivMode::analytic;
    fam.eval = [A, v0](const RVec& s) {
      PureState st;
      st.amplitudes = detail::evolve(A, v0, s);
      st.norm_kind = NormKind::unnormalized;
      return st;
    };
    fam.d1 = [A, v0](const RVec& s, int i) {
      return Vec(I * A[i] * detail::evolve(A, v0, s));
    };
    fam.d2 = [A, v0](const RVec& s, int i, int j) {
      return Vec(-A[i] * (A[j] * detail::evolve(A, v0, s)));
    };
    return fam;
  };
  return {build(spec.A1, spec.l0_1), build(spec.A2, spec.l0_2)};
}

// FS_ij = <l_1|(A^i_1)^dag A^j_2|l_2> - <l_1|(A^i_1)^dag|l_2><l_1|A^j_2|l_2>
// for mutually commuting generator sets; valid while <l_1|l_2> = 1.
inline GeometricTensor commuting_generator_tensor(const GeneratorFamilySpec& spec,
                                                  const RVec& s) {
  detail::require_commuting(spec.A1);
  detail::require_commuting(spec.A2);
  const Vec l1 = detail::evolve(spec.A1, spec.l0_1, s);
  const Vec l2 = detail::evolve(spec.A2, spec.l0_2, s);
  const cxd ov = l1.dot(l2);
  if (std::abs(ov - 1.0) > tol::eps_norm)
    throw Error(errc::normalization,
                "biorthogonal normalization drifted: <l1|l2> = " + std::to_string(std::real(ov)) +
                    (std::imag(ov) >= 0 ? "+" : "") + std::to_string(std::imag(ov)) + "i",
                s);
  const int n = spec.n();
  Mat T(n, n);
  for (int i = 0; i < n; ++i) {
    const Vec a1l1 = spec.A1[i] * l1;
    for (int j = 0; j < n; ++j) {
      const Vec a2l2 = spec.A2[j] * l2;
      T(i, j) = a1l1.dot(a2l2) - a1l1.dot(l2) * l1.dot(a2l2);
    }
  }
  return GeometricTensor(T);
}

// Pairing-preservation defect: |f'(s)| with f(s) = <l_1(s)|l_2(s)>,
// f'(s) = i <u| Z(s)>, Z(s) = (M(s) A_2 - A_1^dag M(s)) v,
// M(s) = e^{-i s A_1^dag} e^{i s A_2}. Zero iff biorthogonality is preserved.
inline double biortho_preservation_defect(const GeneratorFamilySpec& spec, double s) {
  if (spec.n() != 1)
    throw Error(errc::config, "preservation defect is defined for a single evolution parameter");
  const Mat& A1 = spec.A1[0];
  const Mat& A2 = spec.A2[0];
  const Vec& u = spec.l0_1;
  const Vec& v = spec.l0_2;
  const Mat M = expm(Mat(-I * s * A1.adjoint())) * expm(Mat(I * s * A2));
  if (!M.allFinite()) throw Error(errc::numerical, "singular evolution kernel M(s)");
  const Vec Z = (M * A2 - A1.adjoint() * M) * v;
  return std::abs(cxd(I) * u.dot(Z));
}

// ---------------------------------------------------------------------------
// PT-symmetric two-level testbed H = [[i gamma, g], [g, -i gamma]] with
// eigenvalues +-sqrt(g^2 - gamma^2) and an exceptional point at |g| = |gamma|.
inline Mat pt_two_level(double gamma, double g) {
  Mat h(2, 2);
  h << I * gamma, g, g, -I * gamma;
  return h;
}

// Eigenvector families of a parametrized Hamiltonian builder.
// LR pairs hold <L|R> = 1 with R unit-norm and gauge-fixed; unit families are
// pointwise unit-normalized single-sided states.
struct NhBandFamilies {
  StateFamily left_lr, right_lr;   // biorthogonal pair
  StateFamily left_unit, right_unit;
};

inline NhBandFamilies band_families(std::function<Mat(const RVec&)> builder, int n_params,
                                    int band, double ep_tol = tol::ep_tol) {
  auto eig = [builder, ep_tol](const RVec& th) { return biortho_eig(builder(th), ep_tol); };
  auto mk = [&eig, n_params](auto pick) {
    StateFamily fam;
    fam.n = n_params;
    fam.mode = DerivMode::central_fd;
    fam.eval = [eig, pick](const RVec& th) {
      PureState s;
      s.amplitudes = pick(eig(th));
      return s;
    };
    return fam;
  };
  NhBandFamilies out;
  out.right_lr = mk([band](const BiorthoEigensystem& sys) { return Vec(sys.right.col(band)); });
  out.left_lr = mk([band](const BiorthoEigensystem& sys) { return Vec(sys.left.col(band)); });
  out.right_unit = mk([band](const BiorthoEigensystem& sys) {
    Vec v = sys.right.col(band);  // already unit norm and gauge-fixed
    return v;
  });
  out.left_unit = mk([band](const BiorthoEigensystem& sys) {
    Vec v = sys.left.col(band);
    v.normalize();
    fix_gauge(v);
    return v;
  });
  return out;
}

// A non-Hermitian model: a Hamiltonian builder plus its exceptional-point
// tolerance.
struct NonHermitianModelSpec {
  std::function<Mat(const RVec&)> hamiltonian;
  int n_params = 0;
  double ep_tol = tol::ep_tol;
};

inline NhBandFamilies band_families(const NonHermitianModelSpec& spec, int band) {
  return band_families(spec.hamiltonian, spec.n_params, band, spec.ep_tol);
}

inline NhBandFamilies pt_band_families(int band, double ep_tol = tol::ep_tol) {
  return band_families([](const RVec& th) { return pt_two_level(th[0], th[1]); }, 2, band,
                       ep_tol);
}

// Hermitian two-level family H(a, b) = a sigma_x + b sigma_z; left and right
// eigenvectors coincide everywhere, so all four tensor kinds must agree.
inline NhBandFamilies hermitian_band_families(int band, double ep_tol = tol::ep_tol) {
  return band_families(
      [](const RVec& th) {
        Mat h(2, 2);
        h << th[1], th[0], th[0], -th[1];
        return h;
      },
      2, band, ep_tol);
}

// Generic non-Hermitian three-level model. pt_two_level is complex symmetric
// (H^T = H), which makes its single-band LR tensor exactly symmetric; this
// model has no such structure, so the flipped tensor parts and the complex
// Berry curvature are generically nonzero.
inline Mat nh_three_level(const RVec& th) {
  Mat a0(3, 3), a1(3, 3), a2(3, 3);
  a0 << cxd(0.6, 0.2), cxd(0.3, 0.0), cxd(0.0, 0.1),
        cxd(0.0, 0.0), cxd(-0.2, -0.4), cxd(0.5, 0.0),
        cxd(0.2, 0.0), cxd(0.0, 0.1), cxd(1.0, 0.1);
  a1 << cxd(0.0, 0.0), cxd(0.4, 0.0), cxd(0.0, 0.0),
        cxd(0.0, 0.3), cxd(0.2, 0.0), cxd(0.0, 0.0),
        cxd(0.0, 0.0), cxd(0.1, 0.0), cxd(0.0, -0.3);
  a2 << cxd(0.0, 0.1), cxd(0.0, 0.0), cxd(0.2, 0.0),
        cxd(0.0, 0.0), cxd(0.3, 0.0), cxd(0.1, 0.0),
        cxd(0.4, 0.0), cxd(0.0, 0.0), cxd(-0.2, 0.0);
  return a0 + th[0] * a1 + th[1] * a2;
}

inline NhBandFamilies nh3_band_families(int band, double ep_tol = tol::ep_tol) {
  return band_families(nh_three_level, 2, band, ep_tol);
}

// ---------------------------------------------------------------------------
// Pointwise normalization adapter; keeps analytic derivatives when present.
inline StateFamily normalize_family(const StateFamily& base) {
  StateFamily fam = base;
  fam.eval = [base](const RVec& th) {
    PureState s = base.eval(th);
    const double nn = norm_of(s);
    if (nn < 1e-150) throw Error(errc::numerical, "normalization underflow", th);
    s.amplitudes /= nn;
    s.norm_kind = NormKind::unit;
    return s;
  };
  if (base.d1) {
    fam.d1 = [base](const RVec& th, int i) {
      const PureState u = base.eval(th);
      const Vec du = base.d1(th, i);
      const double n2 = std::real(inner(u, u));
      const double dn2 = 2.0 * std::real(inner_on(u, u.amplitudes, du));
      const double t = 1.0 / std::sqrt(n2);
      return Vec(t * du - 0.5 * t * t * t * dn2 * u.amplitudes);
    };
  }
  if (base.d1 && base.d2) {
    fam.d2 = [base](const RVec& th, int i, int j) {
      const PureState u = base.eval(th);
      const Vec di = base.d1(th, i), dj = base.d1(th, j);
      const Vec dd = base.d2(th, i, j);
      const double n2 = std::real(inner(u, u));
      const double dni = 2.0 * std::real(inner_on(u, u.amplitudes, di));
      const double dnj = 2.0 * std::real(inner_on(u, u.amplitudes, dj));
      const double ddn =
          2.0 * std::real(inner_on(u, dj, di) + inner_on(u, u.amplitudes, dd));
      const double t = 1.0 / std::sqrt(n2);
      const double t3 = t * t * t, t5 = t3 * t * t;
      return Vec(t * dd - 0.5 * t3 * (dnj * di + dni * dj + ddn * u.amplitudes) +
                 0.75 * t5 * dni * dnj * u.amplitudes);
    };
  }
  return fam;
}

// Deterministic analytic multi-level families: components
// u_m(theta) = c_m (1 + a_m . theta) exp(i b_m . theta), normalized.
inline StateFamily make_rational_phase_family(const std::vector<double>& c,
                                              const std::vector<RVec>& a,
                                              const std::vector<RVec>& b) {
  const int levels = static_cast<int>(c.size());
  const int n = static_cast<int>(a[0].size());
  StateFamily base;
  base.n = n;
  base.mode = DerivMode::analytic;
  auto amp = [=](const RVec& th, int m) {
    return c[m] * (1.0 + a[m].dot(th)) * std::exp(I * b[m].dot(th));
  };
  auto q = [=](const RVec& th, int m, int i) {
    return cxd(a[m][i] / (1.0 + a[m].dot(th)), b[m][i]);
  };
  base.eval = [=](const RVec& th) {
    PureState s;
    s.amplitudes.resize(levels);
    for (int m = 0; m < levels; ++m) s.amplitudes[m] = amp(th, m);
    s.norm_kind = NormKind::unnormalized;
    return s;
  };
  base.d1 = [=](const RVec& th, int i) {
    Vec d(levels);
    for (int m = 0; m < levels; ++m) d[m] = q(th, m, i) * amp(th, m);
    return d;
  };
  base.d2 = [=](const RVec& th, int i, int j) {
    Vec d(levels);
    for (int m = 0; m < levels; ++m) {
      const double den = 1.0 + a[m].dot(th);
      d[m] = (q(th, m, i) * q(th, m, j) - a[m][i] * a[m][j] / (den * den)) * amp(th, m);
    }
    return d;
  };
  DomainBox box;
  box.lo = RVec::Constant(n, -1.0);
  box.hi = RVec::Constant(n, 1.0);
  base.domain = box;
  return normalize_family(base);
}

inline StateFamily make_rand3() {
  std::vector<double> c = {1.0, 0.8, 0.6};
  std::vector<RVec> a(3, RVec(2)), b(3, RVec(2));
  a[0] << 0.30, -0.20;
  a[1] << -0.10, 0.25;
  a[2] << 0.20, 0.15;
  b[0] << 0.70, 0.10;
  b[1] << -0.30, 0.50;
  b[2] << 0.20, -0.60;
  return make_rational_phase_family(c, a, b);
}

inline StateFamily make_rand4() {
  std::vector<double> c = {0.9, 0.7, 0.8, 0.5};
  std::vector<RVec> a(4, RVec(2)), b(4, RVec(2));
  a[0] << 0.25, -0.15;
  a[1] << -0.20, 0.10;
  a[2] << 0.15, 0.30;
  a[3] << 0.05, -0.25;
  b[0] << 0.40, 0.20;
  b[1] << -0.50, 0.35;
  b[2] << 0.15, -0.45;
  b[3] << 0.60, 0.10;
  return make_rational_phase_family(c, a, b);
}

// Pointwise-normalized non-unitary orbit
// theta -> e^{-i H theta} Psi0 / N(theta), single parameter.
inline StateFamily make_normalized_orbit(const Mat& h, const Vec& psi0) {
  StateFamily base;
  base.n = 1;
  base.mode = DerivMode::analytic;
  base.eval = [h, psi0](const RVec& th) {
    PureState s;
    s.amplitudes = expm(Mat(-I * th[0] * h)) * psi0;
    s.norm_kind = NormKind::unnormalized;
    return s;
  };
  base.d1 = [h, psi0](const RVec& th, int) {
    return Vec(-I * h * (expm(Mat(-I * th[0] * h)) * psi0));
  };
  base.d2 = [h, psi0](const RVec& th, int, int) {
    return Vec(-h * (h * (expm(Mat(-I * th[0] * h)) * psi0)));
  };
  return normalize_family(base);
}

// ---------------------------------------------------------------------------
// Model registry for the CLI. Grid-backed families also accept a caller
// grid spec (min, max, points).
struct ModelInfo {
  std::string name;
  std::string description;
  std::vector<std::string> params;
  std::function<StateFamily()> build;                    // null for pair-only models
  std::function<NhBandFamilies()> build_nh;              // null unless non-Hermitian
  std::function<StateFamily(const GridSpec&)> build_grid;  // null unless grid-backed
};

inline const std::vector<ModelInfo>& model_registry() {
  static const std::vector<ModelInfo> reg = [] {
    std::vector<ModelInfo> r;
    r.push_back({"qubit", "Bloch qubit (cos(t/2), e^{i p} sin(t/2))", {"theta", "phi"},
                 [] { return make_qubit(); }, nullptr, nullptr});
    r.push_back({"gaussian", "Gaussian wave packet over (mu, sigma)", {"mu", "sigma"},
                 [] { return make_gaussian(); }, nullptr,
                 [](const GridSpec& g) { return make_gaussian(g); }});
    r.push_back({"gaussian_phase", "Gaussian amplitude with plane-wave phase (mu, k)",
                 {"mu", "k"}, [] { return make_gaussian_phase(); }, nullptr,
                 [](const GridSpec& g) { return make_gaussian_phase(g); }});
    r.push_back({"expfam", "exponential-family wavefunction, 2 parameters", {"t1", "t2"},
                 [] { return make_exp_family(default_exp_family_spec()); }, nullptr,
                 [](const GridSpec& g) { return make_exp_family(default_exp_family_spec(g)); }});
    r.push_back({"rand3", "deterministic analytic 3-level family", {"t1", "t2"},
                 [] { return make_rand3(); }, nullptr, nullptr});
    r.push_back({"rand4", "deterministic analytic 4-level family", {"t1", "t2"},
                 [] { return make_rand4(); }, nullptr, nullptr});
    r.push_back({"pt2", "PT-symmetric two-level eigenvector families over (gamma, g)",
                 {"gamma", "g"}, nullptr, [] { return pt_band_families(0); }, nullptr});
    r.push_back({"herm2", "Hermitian two-level eigenvector families, H = a sx + b sz",
                 {"a", "b"}, nullptr, [] { return hermitian_band_families(0); }, nullptr});
    r.push_back({"nh3", "generic non-Hermitian three-level eigenvector families",
                 {"t1", "t2"}, nullptr, [] { return nh3_band_families(0); }, nullptr});
    return r;
  }();
  return reg;
}

inline const ModelInfo& find_model(const std::string& name) {
  for (const auto& m : model_registry())
    if (m.name == name) return m;
  throw Error(errc::config, "unknown model: " + name);
}

}  // namespace stategeom
