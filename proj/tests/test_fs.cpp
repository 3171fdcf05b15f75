#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stategeom/checks.hpp"
#include "stategeom/fs.hpp"
#include "stategeom/models.hpp"

using namespace stategeom;

namespace {

RVec pt2(double a, double b) {
  RVec th(2);
  th << a, b;
  return th;
}

StateFamily one_param_qubit_slice() {
  StateFamily fam;
  fam.n = 1;
  const StateFamily q = make_qubit();
  fam.eval = [q](const RVec& th) { return q.eval(pt2(th[0], 0.7)); };
  fam.mode = DerivMode::central_fd;
  return fam;
}

}  // namespace

TEST_CASE("qubit FS tensor against the Provost-Vallee overlap fit") {
  const StateFamily q = make_qubit();
  for (double t : {0.6, 1.1, 2.2}) {
    const RVec th = pt2(t, 0.4);
    const GeometricTensor T = fs_tensor(q, th);
    CHECK(std::abs(T.g()(0, 0) - 0.25) < 1e-12);
    CHECK(std::abs(T.g()(1, 1) - std::sin(t) * std::sin(t) / 4.0) < 1e-12);
    const RMat fit = oracles::pv_metric_fit(q, th);
    CHECK((T.g() - fit).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(T.omega()(0, 1) - std::sin(t) / 4.0) < 1e-12);
  }
}

TEST_CASE("real-valued family has vanishing Berry structure") {
  const StateFamily g = make_gaussian();
  const RVec th = pt2(0.4, 1.1);
  CHECK(fs_tensor(g, th).omega().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(berry_curvature(g, th).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gauge transformation leaves the FS tensor untouched") {
  const StateFamily q = make_qubit();
  const StateFamily q2 = checks::gauged(q);  // beta = t1^2 + t2
  const RVec th = pt2(1.1, 0.4);
  CHECK((fs_tensor(q, th).matrix() - fs_tensor(q2, th).matrix()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("norm violation is rejected") {
  StateFamily bad;
  bad.n = 1;
  bad.eval = [](const RVec&) {
    PureState s;
    s.amplitudes = Vec::Zero(2);
    s.amplitudes[0] = 1.2;
    return s;
  };
  RVec th(1);
  th << 0.0;
  CHECK_THROWS_AS((void)fs_tensor(bad, th), Error);
}

TEST_CASE("qmt_polar equals the FS metric and reduces classically") {
  const StateFamily q = make_qubit();
  const RVec th = pt2(1.1, 0.4);
  CHECK((qmt_polar(q, th) - fs_tensor(q, th).g()).cwiseAbs().maxCoeff() < 1e-8);

  // trivial phase: (1/4) Fisher-Rao
  const StateFamily g = make_gaussian();
  const RVec tg = pt2(0.4, 1.2);
  const RMat fr = fisher_rao(checks::density_of(g), tg);
  CHECK((qmt_polar(g, tg) - 0.25 * fr).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("plane-wave phase block carries Var_P[x] = 1") {
  const StateFamily f = make_gaussian_phase();  // P = N(mu, 1)
  const RMat g = qmt_polar(f, pt2(0.0, 0.7));
  CHECK(std::abs(g(1, 1) - 1.0) < 1e-6);
}

TEST_CASE("berry curvature equals its FD-curl oracle") {
  const StateFamily q = make_qubit();
  for (double t : {0.7, 1.1}) {
    const RVec th = pt2(t, 0.4);
    const RMat F = berry_curvature(q, th);
    CHECK(std::abs(F(0, 1) - 0.5 * std::sin(t)) < 1e-6);
    CHECK((F - oracles::berry_curvature_fd(q, th)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(F(0, 1) + F(1, 0)) == 0.0);
    // connection itself: A_i = E_p[d_i phi]
    const RVec A = berry_connection(q, th);
    CHECK(std::abs(A[0]) < 1e-12);
    CHECK(std::abs(A[1] - std::sin(0.5 * t) * std::sin(0.5 * t)) < 1e-12);
  }
  CHECK(berry_curvature(one_param_qubit_slice(), RVec::Constant(1, 1.1)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("metric connection: compatibility, symmetry, realness") {
  const StateFamily q = make_qubit();
  const RVec th = pt2(1.1, 0.4);
  const ConnectionField gc = metric_connection(q, th);
  CHECK(gc.symmetry_defect() < 1e-12);
  CHECK(gc.max_imag() == 0.0);
  double res = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double h = 2e-4;
    RVec tp = th, tm = th;
    tp[k] += h;
    tm[k] -= h;
    const RMat dg = (fs_tensor(q, tp).g() - fs_tensor(q, tm).g()) / (2.0 * h);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        res = std::max(res, std::abs(dg(i, j) - std::real(gc.at(k, i, j)) -
                                     std::real(gc.at(k, j, i))));
  }
  CHECK(res < 1e-4);
}

TEST_CASE("metric connection of a constant family is zero") {
  StateFamily c;
  c.n = 2;
  c.eval = [](const RVec&) {
    PureState s;
    s.amplitudes = Vec::Zero(2);
    s.amplitudes[0] = 1.0;
    return s;
  };
  CHECK(metric_connection(c, pt2(0.2, 0.4)).max_abs() == 0.0);
}

TEST_CASE("trivial phase: metric connection is the 1/4-weighted classical one") {
  ExponentialFamilySpec spec = default_exp_family_spec();
  spec.G[0].setZero();
  spec.G[1].setZero();
  const StateFamily fam = make_exp_family(spec);
  const RVec th = pt2(0.2, -0.1);
  ClassicalFamily dens;
  dens.n = 2;
  dens.weights = RVec::Constant(spec.x.size(), spec.dx);
  dens.weights[0] *= 0.5;
  dens.weights[spec.x.size() - 1] *= 0.5;
  dens.density = [spec](const RVec& t) { return detail::expfam_density(spec, t); };
  const ConnectionField classical = classical_alpha_connection(dens, th, 0.0);
  CHECK(ConnectionField::max_diff(metric_connection(fam, th), 0.25 * classical) < 1e-6);
  // and the alpha-connection reduces to the classical alpha-connection / 4
  const ConnectionField qa = alpha_family_connection(fam, th, 0.6);
  const ConnectionField ca = classical_alpha_connection(dens, th, 0.6);
  CHECK(ConnectionField::max_diff(qa, 0.25 * ca) < 1e-6);
}

TEST_CASE("bra-ket and polar-form metric connections agree") {
  const StateFamily f = make_gaussian_phase();
  const RVec th = pt2(0.3, 0.7);
  CHECK(ConnectionField::max_diff(metric_connection(f, th), metric_connection_polar(f, th)) <
        1e-6);
}

TEST_CASE("alpha family connection: N(0) = 0 bit-exactly, exp family is 1-flat") {
  const StateFamily q = make_qubit();
  const RVec th = pt2(1.1, 0.4);
  const ConnectionField gc = metric_connection(q, th);
  const ConnectionField ga = alpha_family_connection(q, th, 0.0);
  CHECK(ConnectionField::max_diff(gc, ga) == 0.0);

  const StateFamily ef = make_exp_family(default_exp_family_spec());
  CHECK(alpha_family_connection(ef, pt2(0.2, -0.1), 1.0).max_abs() < 1e-5);
}

TEST_CASE("QFI trace forms reproduce the bra-ket objects") {
  const auto [mq, cq] = qfi_trace_forms(make_qubit(), pt2(1.1, 0.4));
  CHECK(mq < 1e-10);
  CHECK(cq < 1e-8);
  const auto [m4, c4] = qfi_trace_forms(make_rand4(), pt2(0.2, -0.3));
  CHECK(m4 < 1e-8);
  CHECK(c4 < 1e-8);
  // grid states are refused: the trace forms stay dense
  CHECK_THROWS_AS((void)qfi_trace_forms(make_gaussian(), pt2(0.0, 1.0)), Error);
  CHECK_THROWS_AS((void)qfi_trace_forms(make_qubit(), pt2(1.1, 0.4), 1), Error);  // cap
}

TEST_CASE("FS metric stays positive semidefinite") {
  const StateFamily q = make_qubit();
  for (double t : {0.4, 1.2, 2.3})
    CHECK(min_eigenvalue(fs_tensor(q, pt2(t, 0.9)).g()) > -1e-10);
}

TEST_CASE("majority-degenerate phase is reported, not fatal") {
  StateFamily basis;
  basis.n = 1;
  basis.eval = [](const RVec&) {
    PureState s;
    s.amplitudes = Vec::Zero(4);
    s.amplitudes[0] = 1.0;
    return s;
  };
  basis.mode = DerivMode::central_fd;
  const RVec th = RVec::Zero(1);
  CHECK(phase_degenerate_fraction(basis, th) == 0.75);
  CHECK(qmt_polar(basis, th).allFinite());
}

TEST_CASE("bare overlap matrix is NOT gauge invariant (counter-test)") {
  const auto r = checks::gauge_counter_test(1.0);
  CHECK(r.pass);
  CHECK(r.residual > 10.0 * tol::eps_fd);
}
