#include <doctest.h>

#include <cmath>

#include "stategeom/checks.hpp"
#include "stategeom/classical.hpp"

using namespace stategeom;

namespace {

RVec gpoint(double mu, double sigma) {
  RVec th(2);
  th << mu, sigma;
  return th;
}

ClassicalFamily theta_independent() {
  ClassicalFamily fam;
  fam.n = 2;
  fam.weights = RVec::Ones(3);
  fam.density = [](const RVec&) {
    RVec p(3);
    p << 0.2, 0.5, 0.3;
    return p;
  };
  return fam;
}

}  // namespace

TEST_CASE("Fisher-Rao of the Gaussian is diag(1/s^2, 2/s^2)") {
  const ClassicalFamily g = checks::gaussian_density_family();
  for (double s : {0.8, 1.0, 1.3}) {
    const RMat fr = fisher_rao(g, gpoint(0.3, s));
    CHECK(std::abs(fr(0, 0) - 1.0 / (s * s)) < 1e-6);
    CHECK(std::abs(fr(1, 1) - 2.0 / (s * s)) < 1e-6);
    CHECK(std::abs(fr(0, 1)) < 1e-6);
    CHECK(min_eigenvalue(fr) > -1e-10);
  }
}

TEST_CASE("Fisher-Rao against a 10x finer quadrature") {
  ClassicalFamily coarse = checks::gaussian_density_family();
  ClassicalFamily fine;
  fine.n = 2;
  const GridSpec grid{-12.0, 12.0, 30001};
  const RVec x = grid.samples();
  fine.weights = RVec::Constant(x.size(), grid.spacing());
  fine.weights[0] *= 0.5;
  fine.weights[x.size() - 1] *= 0.5;
  fine.density = [x](const RVec& th) {
    RVec p(x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      const double u = (x[m] - th[0]) / th[1];
      p[m] = std::exp(-0.5 * u * u) / (th[1] * std::sqrt(2.0 * M_PI));
    }
    return p;
  };
  const RVec th = gpoint(0.3, 0.9);
  CHECK((fisher_rao(coarse, th) - fisher_rao(fine, th)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("Bernoulli Fisher information is 1/(p(1-p))") {
  const ClassicalFamily b = checks::bernoulli_family();
  RVec half(1);
  half << 0.5;
  CHECK(std::abs(fisher_rao(b, half)(0, 0) - 4.0) < 1e-10);
}

TEST_CASE("theta-independent family has zero metric and connection") {
  const ClassicalFamily f = theta_independent();
  RVec th(2);
  th << 0.4, -0.2;
  CHECK(fisher_rao(f, th).cwiseAbs().maxCoeff() == 0.0);
  CHECK(classical_alpha_connection(f, th, 0.4).max_abs() == 0.0);
}

TEST_CASE("alpha metric equals Fisher-Rao for every alpha") {
  const ClassicalFamily g = checks::gaussian_density_family();
  const RVec th = gpoint(0.3, 0.9);
  const RMat fr = fisher_rao(g, th);
  CHECK((classical_alpha_metric(g, th, 0.0) - fr).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((classical_alpha_metric(g, th, 0.7) - fr).cwiseAbs().maxCoeff() < 1e-6);

  const ClassicalFamily b = checks::bernoulli_family();
  RVec half(1);
  half << 0.5;
  CHECK(std::abs(classical_alpha_metric(b, half, -0.3)(0, 0) - 4.0) < 1e-8);

  CHECK_THROWS_AS((void)classical_alpha_metric(g, th, 1.0), Error);
  CHECK_THROWS_AS((void)classical_alpha_metric(g, th, -1.0), Error);
}

TEST_CASE("Gaussian 0-connection against the lowered Levi-Civita oracle") {
  const ClassicalFamily g = checks::gaussian_density_family();
  const double s = 0.9;
  const RVec th = gpoint(0.3, s);
  const ConnectionField gamma = classical_alpha_connection(g, th, 0.0);
  // Levi-Civita of diag(1/s^2, 2/s^2), lowered: the only nonzero patterns
  const double smm_s = 1.0 / (s * s * s);    // Gamma_{mm,s}
  const double sms_m = -1.0 / (s * s * s);   // Gamma_{ms,m}
  const double sss_s = -2.0 / (s * s * s);   // Gamma_{ss,s}
  CHECK(std::abs(std::real(gamma.at(0, 0, 1)) - smm_s) < 1e-5);
  CHECK(std::abs(std::real(gamma.at(0, 1, 0)) - sms_m) < 1e-5);
  CHECK(std::abs(std::real(gamma.at(1, 1, 1)) - sss_s) < 1e-5);
  // full comparison against FD Levi-Civita of the measured metric
  const ConnectionField lc = levi_civita_lowered(
      [&g](const RVec& t) { return fisher_rao(g, t); }, th);
  CHECK(ConnectionField::max_diff(gamma, lc) < 1e-5);
}

TEST_CASE("classical 1-connection vanishes on the exponential family") {
  const ClassicalFamily f = checks::classical_exp_density_family();
  for (double t1 : {-0.3, 0.2})
    for (double t2 : {-0.15, 0.25}) {
      RVec th(2);
      th << t1, t2;
      CHECK(classical_alpha_connection(f, th, 1.0).max_abs() < 1e-6);
    }
}

TEST_CASE("classical duality residuals") {
  const ClassicalFamily g = checks::gaussian_density_family();
  const ClassicalFamily b = checks::bernoulli_family();
  const RVec th = gpoint(0.3, 0.9);
  RVec pb(1);
  pb << 0.37;
  CHECK(classical_duality_residual(g, th, 0.5) < 1e-4);
  CHECK(classical_duality_residual(g, th, 0.0) < 1e-4);  // self-dual metric compatibility
  CHECK(classical_duality_residual(b, pb, 0.9) < 1e-6);
  for (double a : checks::alpha_sweep()) {
    CHECK(classical_duality_residual(g, th, a) < 1e-4);
    CHECK(classical_duality_residual(b, pb, a) < 1e-4);
  }
}
