#include <doctest.h>

#include <cmath>

#include "stategeom/checks.hpp"
#include "stategeom/models.hpp"
#include "stategeom/qng.hpp"

using namespace stategeom;

namespace {

RVec pt2v(double a, double b) {
  RVec th(2);
  th << a, b;
  return th;
}

CostSpec sz_cost() {
  Mat sz(2, 2);
  sz << 1.0, 0.0, 0.0, -1.0;
  return {sz, CostKind::hermitian_expectation};
}

}  // namespace

TEST_CASE("hermitian step: zero gradient at an eigenstate") {
  const StateFamily q = make_qubit();
  OptimizerOptions opt;
  const HermitianStep s = qng_step_hermitian(q, sz_cost(), pt2v(M_PI, 0.3), opt);
  CHECK(s.grad.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.dtheta.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("hermitian step is linear in eta") {
  const StateFamily q = make_qubit();
  OptimizerOptions o1, o2;
  o1.eta = 0.1;
  o2.eta = 0.05;
  const RVec th = pt2v(2.0, 0.3);
  const HermitianStep s1 = qng_step_hermitian(q, sz_cost(), th, o1);
  const HermitianStep s2 = qng_step_hermitian(q, sz_cost(), th, o2);
  CHECK((s1.dtheta - 2.0 * s2.dtheta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pseudo-inverse step solves the metric system") {
  const StateFamily q = make_qubit();
  OptimizerOptions opt;
  const RVec th = pt2v(2.0, 0.3);
  const HermitianStep s = qng_step_hermitian(q, sz_cost(), th, opt);
  const RMat g = fs_tensor(q, th).g();
  CHECK((g * s.dtheta + opt.eta * s.grad).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pseudo-inverse respects the metric's numerical null space") {
  RMat g = RMat::Zero(2, 2);
  g(0, 0) = 0.25;  // second direction is numerically null
  RVec rhs(2);
  rhs << 0.5, 0.3;
  double cond = 0.0;
  const RVec x = pinv_solve(g, rhs, 1e-10, &cond);
  CHECK(std::abs(x[0] - 2.0) < 1e-14);
  CHECK(x[1] == 0.0);  // no component along the null space
  CHECK(cond == 1.0);
  CHECK_THROWS_AS((void)pinv_solve(RMat::Zero(2, 2), rhs, 1e-10), Error);
  // residual bound on the retained subspace
  CHECK((g * x - rhs).cwiseAbs().minCoeff() < 1e-14);
}

TEST_CASE("optimizer options are validated") {
  OptimizerOptions bad;
  bad.svd_cutoff = 2.0;
  CHECK_THROWS_AS((void)qng_step_hermitian(make_qubit(), sz_cost(), pt2v(1.0, 0.2), bad), Error);
  bad = OptimizerOptions{};
  bad.eta = -0.1;
  CHECK_THROWS_AS((void)qng_step_hermitian(make_qubit(), sz_cost(), pt2v(1.0, 0.2), bad), Error);
}

TEST_CASE("non-hermitian cost is rejected by the hermitian step") {
  CostSpec bad{pt_two_level(0.3, 1.0), CostKind::hermitian_expectation};
  OptimizerOptions opt;
  CHECK_THROWS_AS((void)qng_step_hermitian(make_qubit(), bad, pt2v(1.0, 0.2), opt), Error);
}

TEST_CASE("qubit ground-state run reaches cost -1 monotonically") {
  OptimizerOptions opt;
  opt.eta = 0.1;
  opt.max_iters = 200;
  const OptimizerTrace tr = qng_optimize_hermitian(make_qubit(), sz_cost(), pt2v(2.5, 0.3), opt);
  CHECK(std::abs(std::real(tr.steps.back().cost) + 1.0) < 1e-6);
  CHECK(static_cast<int>(tr.steps.size()) <= 200);
  for (size_t k = 1; k < tr.steps.size(); ++k)
    CHECK(std::real(tr.steps[k].cost) <= std::real(tr.steps[k - 1].cost) + 1e-12);
}

TEST_CASE("dual scheme: Hermitian limit gives a vanishing imaginary flow") {
  const NhBandFamilies f = hermitian_band_families(0);
  Mat a(2, 2);
  a << 0.4, 0.1, 0.1, -0.9;
  CostSpec cost{a, CostKind::biortho_expectation};
  OptimizerOptions opt;
  const NhDualStep s = qng_step_nh_dual(f.left_lr, f.right_lr, cost, pt2v(0.7, 1.1), opt);
  CHECK(std::abs(std::imag(s.cost)) < 1e-10);
  CHECK(s.dtheta_i.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(s.incompatibility == 0.0);
}

TEST_CASE("dual scheme: zero step sizes give zero steps") {
  const NhBandFamilies f = pt_band_families(0);
  CostSpec cost{pt_two_level(0.5, 1.1), CostKind::biortho_expectation};
  OptimizerOptions opt;
  opt.eta_r = 0.0;
  opt.eta_i = 0.0;
  const NhDualStep s = qng_step_nh_dual(f.left_lr, f.right_lr, cost, pt2v(0.5, 1.1), opt);
  CHECK(s.dtheta_r.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.dtheta_i.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dual scheme smoke: finite steps, incompatibility logged, deterministic") {
  CHECK(checks::nh_dual_smoke(1.0).pass);
  const NhBandFamilies f = pt_band_families(0);
  CostSpec cost{pt_two_level(0.5, 1.1), CostKind::biortho_expectation};
  OptimizerOptions opt;
  const NhDualStep s = qng_step_nh_dual(f.left_lr, f.right_lr, cost, pt2v(0.5, 1.1), opt);
  CHECK(s.dtheta_r.norm() > 0.0);
  CHECK(s.incompatibility >= 0.0);
  CHECK(s.incompatibility <= M_PI);
}

TEST_CASE("rr eigensolver on pt_two_level(0.6, 1.0)") {
  OptimizerOptions opt;
  opt.eta = 0.2;
  opt.max_iters = 500;
  opt.cost_tol = 1e-10;
  const OptimizerTrace tr =
      rr_variational_eigensolver(make_qubit(), pt_two_level(0.6, 1.0), pt2v(1.2, 0.8), opt);
  CHECK(tr.termination == "CONVERGED");
  CHECK(tr.steps.back().aux < 1e-8);
  CHECK(std::abs(std::abs(tr.steps.back().cost) - 0.8) < 1e-5);
  // variance certificate: |(H - E) psi| = sqrt(L^RR)
  const PureState s = evaluate(make_qubit(), tr.final_theta);
  const Vec hpsi = pt_two_level(0.6, 1.0) * s.amplitudes;
  const cxd e = s.amplitudes.dot(hpsi);
  CHECK((hpsi - e * s.amplitudes).norm() < std::sqrt(tr.steps.back().aux) + 1e-10);
}

TEST_CASE("rr eigensolver: Hermitian H reduces to variance minimization") {
  Mat h(2, 2);
  h << 0.4, 0.7, 0.7, -0.4;
  OptimizerOptions opt;
  opt.eta = 0.2;
  opt.max_iters = 500;
  const OptimizerTrace tr = rr_variational_eigensolver(make_qubit(), h, pt2v(1.0, 0.4), opt);
  CHECK(tr.steps.back().aux < 1e-8);
  CHECK(std::abs(std::imag(tr.steps.back().cost)) < 1e-8);
}

TEST_CASE("rr eigensolver: starting at an exact right eigenvector") {
  // eigenvector of pt(0.6, 1.0) for lambda = 0.8: (1, 0.8 - 0.6i)/sqrt(2)
  const double phi = std::atan2(-0.6, 0.8);
  OptimizerOptions opt;
  opt.cost_tol = 1e-12;
  const OptimizerTrace tr = rr_variational_eigensolver(make_qubit(), pt_two_level(0.6, 1.0),
                                                       pt2v(M_PI / 2.0, phi), opt);
  CHECK(tr.steps.size() == 1);
  CHECK(tr.steps.front().aux < 1e-12);
  CHECK(tr.termination == "CONVERGED");
}

TEST_CASE("rr eigensolver reports LOCAL_MINIMUM when no eigenvector is reachable") {
  // freeze phi = 0: the pt(0.6, 1.0) eigenvectors need phi = -+atan2(0.6, 0.8)
  StateFamily slice;
  slice.n = 1;
  const StateFamily q = make_qubit();
  slice.eval = [q](const RVec& t) { return q.eval(pt2v(t[0], 0.0)); };
  slice.mode = DerivMode::central_fd;
  OptimizerOptions opt;
  opt.eta = 0.2;
  opt.max_iters = 5000;
  opt.grad_tol = 1e-8;
  const OptimizerTrace tr =
      rr_variational_eigensolver(slice, pt_two_level(0.6, 1.0), RVec::Constant(1, 1.2), opt);
  CHECK(tr.termination == "LOCAL_MINIMUM");
  CHECK(tr.steps.back().aux > 1e-8);
}

TEST_CASE("imaginary-time comparator: Hermitian deviation quarters with dtau") {
  const StateFamily q = make_qubit();
  Mat h(2, 2);
  h << 1.0, 0.3, 0.3, -1.0;
  const RVec th0 = pt2v(2.0, 0.4);
  const auto r1 = imaginary_time_comparator(q, q, h, th0, 2e-3, 10);
  const auto r2 = imaginary_time_comparator(q, q, h, th0, 1e-3, 10);
  CHECK(r1.mean_deviation > 0.0);
  CHECK(std::log2(r1.mean_deviation / r2.mean_deviation) > 1.9);
}

TEST_CASE("imaginary-time comparator: biorthogonal-Hermitian pair stays close") {
  const NhBandFamilies f = pt_band_families(0);
  const Mat h = pt_two_level(0.3, 1.0);  // real spectrum
  const auto rep = imaginary_time_comparator(f.left_lr, f.right_lr, h, pt2v(0.2, 1.2), 1e-3, 50);
  CHECK(rep.max_deviation < 1e-6);
}

TEST_CASE("imaginary-time comparator: H^# != H leaves a first-order deviation") {
  const NhBandFamilies f = pt_band_families(0);
  Mat h(2, 2);  // generic complex spectrum, not complex-symmetric
  h << cxd(0.3, 0.5), cxd(0.8, 0.0), cxd(0.2, 0.0), cxd(-0.1, -0.3);
  const RVec th0 = pt2v(0.4, 1.1);
  const auto r1 = imaginary_time_comparator(f.left_lr, f.right_lr, h, th0, 2e-3, 10);
  const auto r2 = imaginary_time_comparator(f.left_lr, f.right_lr, h, th0, 1e-3, 10);
  CHECK(r1.mean_deviation > 1e-8);
  CHECK(std::log2(r1.mean_deviation / r2.mean_deviation) < 1.7);  // not second order
}
