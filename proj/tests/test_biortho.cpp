#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stategeom/biortho.hpp"
#include "stategeom/checks.hpp"
#include "stategeom/models.hpp"

using namespace stategeom;

namespace {

RVec pt2(double a, double b) {
  RVec th(2);
  th << a, b;
  return th;
}

}  // namespace

TEST_CASE("biortho_eig on a Hermitian matrix: left = right, real spectrum") {
  Mat h(2, 2);
  h << 1.0, 0.3, 0.3, -0.5;
  const BiorthoEigensystem sys = biortho_eig(h);
  CHECK((sys.left - sys.right).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sys.eigenvalues.imag().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("biortho_eig on pt_two_level(0.6, 1.0)") {
  const BiorthoEigensystem sys = biortho_eig(pt_two_level(0.6, 1.0));
  CHECK(std::abs(sys.eigenvalues[0] - cxd(-0.8, 0.0)) < 1e-12);
  CHECK(std::abs(sys.eigenvalues[1] - cxd(0.8, 0.0)) < 1e-12);
  CHECK((sys.left.adjoint() * sys.right - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  const Mat h = pt_two_level(0.6, 1.0);
  for (int k = 0; k < 2; ++k) {
    CHECK((h * sys.right.col(k) - sys.eigenvalues[k] * sys.right.col(k)).norm() < 1e-10);
    CHECK((h.adjoint() * sys.left.col(k) - std::conj(sys.eigenvalues[k]) * sys.left.col(k))
              .norm() < 1e-10);
  }
}

TEST_CASE("eigenvalue ordering is deterministic by (Re, Im)") {
  const BiorthoEigensystem broken = biortho_eig(pt_two_level(1.3, 1.0));
  CHECK(std::imag(broken.eigenvalues[0]) < std::imag(broken.eigenvalues[1]));
  const BiorthoEigensystem sys = biortho_eig(nh_three_level(pt2(0.3, -0.2)));
  for (int k = 0; k + 1 < 3; ++k) {
    const cxd a = sys.eigenvalues[k], b = sys.eigenvalues[k + 1];
    CHECK((std::real(a) < std::real(b) ||
           (std::real(a) == std::real(b) && std::imag(a) <= std::imag(b))));
  }
}

TEST_CASE("exceptional point raises") {
  CHECK_THROWS_AS((void)biortho_eig(pt_two_level(1.0, 1.0)), Error);
  try {
    (void)biortho_eig(pt_two_level(1.0, 1.0));
  } catch (const Error& e) {
    CHECK(e.code() == std::string(errc::exceptional_point));
  }
}

TEST_CASE("kind/normalization guard refuses mismatched pairs") {
  const NhBandFamilies f = pt_band_families(0);
  const RVec th = pt2(0.4, 1.2);
  // LL with the biorthogonally scaled left family: <L|L> != 1
  CHECK_THROWS_AS((void)nh_fs_tensor(f.left_lr, f.right_lr, th, NhKind::LL), Error);
  try {
    (void)nh_fs_tensor(f.left_lr, f.right_lr, th, NhKind::LL);
  } catch (const Error& e) {
    CHECK(e.code() == std::string(errc::normalization));
  }
}

TEST_CASE("LL and RR tensors are Hermitian with no flipped parts") {
  const NhBandFamilies f = pt_band_families(0);
  const RVec th = pt2(0.4, 1.2);
  for (NhKind k : {NhKind::LL, NhKind::RR}) {
    const GeometricTensor T = nh_fs_tensor(f.left_unit, f.right_unit, th, k);
    CHECK(T.hermiticity_defect() < 1e-8);
    CHECK(T.gtilde().cwiseAbs().maxCoeff() < 1e-8);
    CHECK(T.omtilde().cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("pt LR tensor is symmetric (complex-symmetric H) and fits the overlap oracle") {
  const NhBandFamilies f = pt_band_families(0);
  const RVec th = pt2(0.4, 1.2);
  const GeometricTensor T = nh_fs_tensor(f.left_lr, f.right_lr, th, NhKind::LR);
  // H^T = H forces L ∝ conj(R); the tensor ends up symmetric with no
  // antisymmetric parts at all
  CHECK(T.omega().cwiseAbs().maxCoeff() < 1e-8);
  CHECK(T.omtilde().cwiseAbs().maxCoeff() < 1e-8);
  // overlap-expansion oracle fits Sym<d bra|d ket>; add the gauge term back
  const PureState l = f.left_lr.eval(th);
  const PureState r = f.right_lr.eval(th);
  Mat gauge(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      gauge(i, j) = inner_on(l, derivative(f.left_lr, th, i), r.amplitudes) *
                    inner_on(l, l.amplitudes, derivative(f.right_lr, th, j));
  const Mat bare_sym = 0.5 * ((T.matrix() + gauge) + (T.matrix() + gauge).transpose());
  const Mat fit = oracles::biortho_overlap_fit(f.left_lr, f.right_lr, th);
  CHECK((bare_sym - fit).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("generic three-level model: flipped parts are nonzero and the fit agrees") {
  const NhBandFamilies f = nh3_band_families(0);
  const RVec th = pt2(0.3, -0.2);
  const GeometricTensor T = nh_fs_tensor(f.left_lr, f.right_lr, th, NhKind::LR);
  const double flipped =
      std::max(T.gtilde().cwiseAbs().maxCoeff(), T.omtilde().cwiseAbs().maxCoeff());
  CHECK(flipped > 1e-6);
  const PureState l = f.left_lr.eval(th);
  const PureState r = f.right_lr.eval(th);
  Mat gauge(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      gauge(i, j) = inner_on(l, derivative(f.left_lr, th, i), r.amplitudes) *
                    inner_on(l, l.amplitudes, derivative(f.right_lr, th, j));
  const Mat bare_sym = 0.5 * ((T.matrix() + gauge) + (T.matrix() + gauge).transpose());
  const Mat fit = oracles::biortho_overlap_fit(f.left_lr, f.right_lr, th);
  CHECK((bare_sym - fit).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("Hermitian family: curvature is real and matches fs_core") {
  const NhBandFamilies f = hermitian_band_families(0);
  const RVec th = pt2(0.7, 1.1);
  const Mat B = nh_berry_curvature(f.left_lr, f.right_lr, th, NhKind::LR);
  CHECK(B.imag().cwiseAbs().maxCoeff() < 1e-6);  // FD-of-FD noise floor
  CHECK((B.real() - berry_curvature(f.right_unit, th)).cwiseAbs().maxCoeff() < 2e-6);
}

TEST_CASE("generic model: LR curvature is complex and differs from RL") {
  const NhBandFamilies f = nh3_band_families(0);
  const RVec th = pt2(0.3, -0.2);
  const Mat B = nh_berry_curvature(f.left_lr, f.right_lr, th, NhKind::LR);
  CHECK(B.imag().cwiseAbs().maxCoeff() > 1e-6);
  CHECK(B.real().cwiseAbs().maxCoeff() > 1e-6);
  // LR and RL are reported separately and differ in general
  const Mat Brl = nh_berry_curvature(f.left_lr, f.right_lr, th, NhKind::RL);
  CHECK((B - Brl).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("one-parameter sweep has no curvature") {
  const NhBandFamilies f = pt_band_families(0);
  StateFamily l1;
  l1.n = 1;
  l1.mode = DerivMode::central_fd;
  const StateFamily base_l = f.left_lr, base_r = f.right_lr;
  l1.eval = [base_l](const RVec& t) { return base_l.eval(pt2(t[0], 1.2)); };
  StateFamily r1 = l1;
  r1.eval = [base_r](const RVec& t) { return base_r.eval(pt2(t[0], 1.2)); };
  const Mat B = nh_berry_curvature(l1, r1, RVec::Constant(1, 0.4), NhKind::LR);
  CHECK(B.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("connections: Hermitian limit is real and equals Gamma^(c)") {
  const NhBandFamilies f = hermitian_band_families(0);
  const RVec th = pt2(0.7, 1.1);
  const NhConnectionPair pc = nh_connections(f.left_lr, f.right_lr, th, NhKind::LR);
  CHECK(pc.first.max_imag() < 1e-7);
  CHECK(pc.second.max_imag() < 1e-7);
  const ConnectionField gc = metric_connection(f.right_unit, th);
  CHECK(ConnectionField::max_diff(pc.first.real(), gc) < 1e-5);
  CHECK(ConnectionField::max_diff(pc.second.real(), gc) < 1e-5);
}

TEST_CASE("LR <-> RL duality and the II conjugate pair") {
  const NhBandFamilies f = pt_band_families(0);
  for (double gamma : {0.4, 0.6})
    CHECK(lr_duality_residual(f.left_lr, f.right_lr, pt2(gamma, 1.1)) < 1e-5);
  const NhConnectionPair ii = nh_connections(f.left_unit, f.right_unit, pt2(0.4, 1.2), NhKind::RR);
  CHECK(ConnectionField::max_diff(ii.first, ii.second.conjugate()) < 1e-7);
}

TEST_CASE("gauge invariance of the LR pair under beta_L = beta_R") {
  CHECK(checks::nh_gauge_lr(1.0).pass);
}

TEST_CASE("LL tensor is invariant under an independent single-sided phase") {
  const NhBandFamilies f = pt_band_families(0);
  auto beta = [](const RVec& t) { return 0.4 * t[0] - 0.3 * t[1] * t[1]; };
  const StateFamily l2 = with_phase(f.left_unit, beta, nullptr, nullptr);
  const RVec th = pt2(0.4, 1.2);
  CHECK((nh_fs_tensor(l2, f.right_unit, th, NhKind::LL).matrix() -
         nh_fs_tensor(f.left_unit, f.right_unit, th, NhKind::LL).matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-6);
}

TEST_CASE("normalized-generator QFI of non-unitary orbits") {
  // Hermitian: 4 Var(H), theta independent
  Mat h(2, 2);
  h << 1.0, 0.3, 0.3, -0.5;
  Vec psi0(2);
  psi0 << 0.8, 0.6;
  CHECK_THROWS_AS((void)normalized_generator_qfi(h, Vec(2.0 * psi0), 0.2), Error);
  const double q1 = normalized_generator_qfi(h, psi0, 0.2)(0, 0);
  const double q2 = normalized_generator_qfi(h, psi0, 0.9)(0, 0);
  CHECK(std::abs(q1 - q2) < 1e-8);

  // anti-Hermitian generator on an eigenvector: the ray is stationary
  Mat ah = Mat::Zero(2, 2);
  ah(0, 0) = I * 0.7;
  ah(1, 1) = I * -0.2;
  Vec e0 = Vec::Zero(2);
  e0[0] = 1.0;
  CHECK(std::abs(normalized_generator_qfi(ah, e0, 0.5)(0, 0)) < 1e-12);

  // pt generator: QFI depends on the path and matches the FD FS tensor
  const Mat pt = pt_two_level(0.6, 1.0);
  StateFamily orbit = make_normalized_orbit(pt, e0);
  orbit.mode = DerivMode::central_fd;
  const double qa = normalized_generator_qfi(pt, e0, 0.3)(0, 0);
  const double qb = normalized_generator_qfi(pt, e0, 0.7)(0, 0);
  CHECK(std::abs(qa - qb) > 1e-4);  // explicitly path dependent
  for (double t : {0.3, 0.7}) {
    RVec th(1);
    th << t;
    CHECK(std::abs(normalized_generator_qfi(pt, e0, t)(0, 0) -
                   4.0 * fs_tensor(orbit, th).g()(0, 0)) < 1e-5);
  }
}

TEST_CASE("curvature carries exactly the two antisymmetric parts, per kind") {
  CHECK(checks::nh_field_strength(1.0).pass);
}

TEST_CASE("four-kind Hermitian collapse") { CHECK(checks::nh_hermitian_collapse(1.0).pass); }
