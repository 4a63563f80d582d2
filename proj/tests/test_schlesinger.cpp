#include <doctest.h>

#include <random>

#include "frob/pr.hpp"
#include "frob/schlesinger.hpp"

using namespace frob;

namespace {

SchlesingerSystem commuting_pair() {
  SchlesingerSystem s;
  s.m = 2;
  s.u = VectorXcd(2);
  s.u << cplx(0.0), cplx(1.0);
  s.g = MatrixXcd::Identity(2, 2);
  s.A.resize(2);
  s.A[0] = MatrixXcd::Zero(2, 2);
  s.A[0](0, 0) = 1.0;
  s.A[1] = MatrixXcd::Zero(2, 2);
  s.A[1](1, 1) = 1.0;
  s.W = s.A[0] + s.A[1];
  return s;
}

SchlesingerSystem random_pair(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SchlesingerSystem s;
  s.m = 2;
  s.u = VectorXcd(2);
  s.u << cplx(0.0), cplx(1.0);
  s.g = MatrixXcd::Identity(2, 2);
  s.A.resize(2);
  for (auto& a : s.A) {
    a = MatrixXcd(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a(i, j) = cplx(unif(rng), unif(rng));
  }
  s.W = s.A[0] + s.A[1];
  return s;
}

}  // namespace

TEST_CASE("right-hand side basics") {
  // commuting residues give a vanishing flow
  SchlesingerSystem s = commuting_pair();
  auto dA = schlesinger_rhs(s, VectorXcd::Ones(2));
  CHECK(dA[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(dA[1].cwiseAbs().maxCoeff() == 0.0);

  // hand-evaluated two-point example
  SchlesingerSystem h = commuting_pair();
  h.A[0] << 0, 1, 0, 0;
  h.A[1] << 0, 0, 1, 0;
  h.W = h.A[0] + h.A[1];
  VectorXcd e1 = VectorXcd::Zero(2);
  e1[0] = 1.0;
  auto d = schlesinger_rhs(h, e1);
  // dA_1 = [A_2, A_1](du^2 - du^1)/(u^2 - u^1) = -[A_2,A_1] = [A_1,A_2]
  MatrixXcd want(2, 2);
  want << 1, 0, 0, -1;
  CHECK((d[0] - want).cwiseAbs().maxCoeff() < 1e-15);
  // conservation: the flow vectors sum to zero
  std::mt19937_64 rng(5);
  for (unsigned seed : {7u, 8u, 9u}) {
    SchlesingerSystem r = random_pair(seed);
    VectorXcd dir(2);
    dir << cplx(0.3, 0.1), cplx(-0.2, 0.4);
    auto dr = schlesinger_rhs(r, dir);
    CHECK((dr[0] + dr[1]).cwiseAbs().maxCoeff() < 1e-14);
  }

  SchlesingerSystem bad = commuting_pair();
  bad.u[1] = bad.u[0];
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("special initial data space") {
  // m = 2: no free choices, the unique solution
  VectorXcd eta(2);
  eta << cplx(1.0), cplx(-1.0);
  SpecialInitData init = sample_initial_space(2, 0.0, eta, {});
  CHECK(std::abs(init.v(0, 1) - 1.0) < 1e-14);
  CHECK(std::abs(init.v(1, 0) - 1.0) < 1e-14);
  CHECK_NOTHROW(init.validate());

  // m = 3: one free choice
  VectorXcd eta3(3);
  eta3 << cplx(1.0), cplx(1.0), cplx(-2.0);
  SpecialInitData i3 = sample_initial_space(3, -1.0, eta3, {cplx(0.4, 0.2)});
  CHECK_NOTHROW(i3.validate());
  CHECK_THROWS_AS(sample_initial_space(3, -1.0, eta3, {}), Error);
  VectorXcd etabad(2);
  etabad << cplx(1.0), cplx(-0.5);
  CHECK_THROWS_AS(sample_initial_space(2, 0.0, etabad, {}), Error);

  // D = 2 with v = 0 is a valid special family
  SpecialInitData d2;
  d2.m = 2;
  d2.D = 2.0;
  d2.eta = eta;
  d2.v = MatrixXcd::Zero(2, 2);
  CHECK_NOTHROW(d2.validate());
  SchlesingerSystem s = build_special(d2);
  s.u << cplx(0.0), cplx(1.0);
  for (int j = 0; j < 2; ++j) {
    MatrixXcd want = MatrixXcd::Zero(2, 2);
    want(j, j) = -0.5;
    CHECK((s.A[j] - want).cwiseAbs().maxCoeff() < 1e-15);
  }
  auto rep = check_solution(s);
  CHECK(rep.is_special);
}

TEST_CASE("integration of constant commuting data returns to the start") {
  SchlesingerSystem s = commuting_pair();
  std::vector<MatrixXcd> A0 = s.A;
  IntegrationPath path;
  path.waypoints = {s.u, s.u + VectorXcd::Constant(2, cplx(0.0, 0.4)),
                    s.u + VectorXcd::Constant(2, cplx(0.3, 0.4)), s.u};
  IntegrateOptions opts;
  opts.check_monitors = false;
  integrate(s, path, opts);
  for (int j = 0; j < 2; ++j)
    CHECK((s.A[j] - A0[j]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projective-plane loop conserves the special structure") {
  SchlesingerSystem s = pr::schlesinger_from_closed_forms(2, 0.3, -0.7);
  std::vector<MatrixXcd> A0 = s.A;
  double gap = s.min_gap();
  double rho = 0.5 * gap / 8.0;  // small square loop, circumference ~ gap/2
  VectorXcd e1 = VectorXcd::Zero(3);
  e1[0] = 1.0;
  VectorXcd u0 = s.u;
  IntegrationPath loop;
  loop.waypoints = {u0, u0 + rho * e1, u0 + rho * e1 + cplx(0, 1) * rho * e1,
                    u0 + cplx(0, 1) * rho * e1, u0};
  IntegrateOptions opts;
  opts.rtol = 1e-11;
  opts.atol = 1e-13;
  opts.monitor_tol = 1e-8;
  Trajectory traj = integrate(s, loop, opts);
  for (int j = 0; j < 3; ++j)
    CHECK((s.A[j] - A0[j]).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(traj.max_conservation < 1e-8);
  CHECK(traj.max_rank1_defect < 1e-8);
  CHECK(traj.max_quad_defect < 1e-8);
  CHECK(std::abs(std::exp(traj.logtau) - 1.0) < 1e-6);  // closed loop

  // isospectrality along a non-closed stretch
  SchlesingerSystem s2 = pr::schlesinger_from_closed_forms(2, 0.3, -0.7);
  IntegrationPath arc;
  arc.waypoints = {s2.u, s2.u + 0.4 * gap * e1};
  integrate(s2, arc, opts);
  for (int j = 0; j < 3; ++j) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(s2.A[j]);
    for (int k = 0; k < 3; ++k) {
      double dmin = std::min(std::abs(es.eigenvalues()[k]),
                             std::abs(es.eigenvalues()[k] + 0.5));
      CHECK(dmin < 1e-8);
    }
  }
}

TEST_CASE("loop endpoint agrees with a tighter-tolerance rerun") {
  auto run = [](double tol) {
    SchlesingerSystem s = pr::schlesinger_from_closed_forms(2, 0.3, -0.7);
    double rho = 0.5 * s.min_gap() / 8.0;
    VectorXcd e1 = VectorXcd::Zero(3);
    e1[0] = 1.0;
    VectorXcd u0 = s.u;
    IntegrationPath loop;
    loop.waypoints = {u0, u0 + rho * e1, u0 + rho * e1 + cplx(0, 1) * rho * e1,
                      u0 + cplx(0, 1) * rho * e1, u0};
    IntegrateOptions opts;
    opts.rtol = tol;
    opts.atol = tol * 1e-2;
    integrate(s, loop, opts);
    return s.A;
  };
  auto coarse = run(1e-8);
  auto fine = run(1e-12);
  for (int j = 0; j < 3; ++j)
    CHECK((coarse[j] - fine[j]).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("pair traces drift only within tolerance for three points") {
  SchlesingerSystem s = pr::schlesinger_from_closed_forms(2, 0.1, -0.4);
  cplx tr01 = (s.A[0] * s.A[1]).trace();
  double gap = s.min_gap();
  // move only the third point, far from the (0,1) pair
  IntegrationPath path;
  VectorXcd d = VectorXcd::Zero(3);
  d[2] = cplx(0.25, 0.1) * gap;
  path.waypoints = {s.u, s.u + d};
  IntegrateOptions opts;
  opts.rtol = 1e-11;
  opts.atol = 1e-13;
  integrate(s, path, opts);
  // the pair trace is an adiabatic quantity: small drift at tight tolerance
  CHECK(std::abs((s.A[0] * s.A[1]).trace() - tr01) < 5e-2 * std::abs(tr01));
}

TEST_CASE("paths crossing the guard band are rejected") {
  SchlesingerSystem s = commuting_pair();
  IntegrationPath path;
  path.waypoints = {s.u, VectorXcd::Zero(2)};  // ends on the diagonal
  CHECK_THROWS_AS(integrate(s, path, IntegrateOptions{}), Error);
}

TEST_CASE("tau function closed form for two points") {
  SchlesingerSystem s = random_pair(42);
  cplx tr = (s.A[0] * s.A[1]).trace();
  VectorXcd target(2);
  target << cplx(-0.2, 0.35), cplx(1.4, -0.1);
  IntegrationPath path;
  path.waypoints = {s.u, target};
  IntegrateOptions opts;
  opts.rtol = 1e-12;
  opts.atol = 1e-14;
  opts.check_monitors = false;
  TauReport rep = tau(s, path, opts);
  cplx want = std::pow((target[0] - target[1]) / (s.u[0] - s.u[1]), tr);
  CHECK(std::abs(rep.tau - want) < 1e-8);
  CHECK(rep.closedness < 1e-6);

  // trace of the pair product is conserved by the flow
  SchlesingerSystem moved = s;
  integrate(moved, path, opts);
  CHECK(std::abs((moved.A[0] * moved.A[1]).trace() - tr) < 1e-10);

  // homotopic paths agree
  IntegrationPath other;
  other.waypoints = {s.u, s.u + VectorXcd::Constant(2, cplx(0.1, -0.3)),
                     target};
  TauReport rep2 = tau(s, other, opts);
  CHECK(std::abs(rep2.tau - rep.tau) / std::abs(rep.tau) < 1e-6);

  // trivial pairing: commuting diagonal data has tau identically one
  SchlesingerSystem c = commuting_pair();
  IntegrationPath p2;
  p2.waypoints = {c.u, c.u + VectorXcd::Constant(2, cplx(0.2, 0.1))};
  IntegrateOptions o2;
  o2.check_monitors = false;
  TauReport trep = tau(c, p2, o2);
  CHECK(std::abs(trep.tau - 1.0) < 1e-12);
}

TEST_CASE("fixed-step order verification on the closed-form case") {
  auto endpoint_error = [&](double hstep) {
    SchlesingerSystem s = random_pair(11);
    cplx tr = (s.A[0] * s.A[1]).trace();
    VectorXcd target(2);
    target << cplx(0.1, 0.2), cplx(1.3, -0.25);
    IntegrationPath path;
    path.waypoints = {s.u, target};
    IntegrateOptions opts;
    opts.fixed_step = true;
    opts.fixed_h = hstep;
    opts.check_monitors = false;
    SchlesingerSystem moved = s;
    Trajectory traj = integrate(moved, path, opts);
    cplx want = std::pow((target[0] - target[1]) / (s.u[0] - s.u[1]), tr);
    return std::abs(std::exp(traj.logtau) - want);
  };
  double e1 = endpoint_error(0.05);
  double e2 = endpoint_error(0.025);
  double ratio = e1 / e2;
  // fifth-order global convergence: halving the step gains about 2^5
  CHECK(ratio > 16.0);
  CHECK(ratio < 90.0);
}

TEST_CASE("classification of special and strict-special data") {
  // construction route: always special
  VectorXcd eta(3);
  eta << cplx(1.0, 0.2), cplx(-0.4, 0.1), cplx(-0.6, -0.3);
  SpecialInitData init = sample_initial_space(3, 0.5, eta, {cplx(0.3, -0.2)});
  SchlesingerSystem s = build_special(init);
  s.u = VectorXcd(3);
  s.u << cplx(0.0), cplx(1.0), cplx(0.4, 0.9);
  auto rep = check_solution(s);
  CHECK(rep.is_special);
  CHECK(rep.has_identity);
  CHECK(std::abs(rep.weight_D - 0.5) < 1e-9);

  // r = 2: W invertible, strictness via the spectral shortcut
  SchlesingerSystem s2 = pr::schlesinger_from_closed_forms(2, 0.0, 0.0);
  auto rep2 = check_solution(s2);
  CHECK(rep2.is_special);
  CHECK(rep2.is_strict_special);
  CHECK(rep2.strict_route == "w-invertible");
  CHECK(std::abs(rep2.weight_D - 0.0) < 1e-9);

  // r = 3: zero eigenvalue forces the finite-difference route
  SchlesingerSystem s3 = pr::schlesinger_from_closed_forms(3, 0.1, 0.2);
  auto rep3 = check_solution(s3);
  CHECK(rep3.is_special);
  CHECK(rep3.strict_route == "finite-difference");
  CHECK(rep3.is_strict_special);

  // random data is generically not special
  SchlesingerSystem bad = random_pair(3);
  auto repb = check_solution(bad);
  CHECK_FALSE(repb.is_special);

  // wrong identity vector: eigen-relation fails upstream
  SchlesingerSystem s4 = pr::schlesinger_from_closed_forms(2, 0.0, 0.0);
  s4.e << cplx(1.0), cplx(2.0), cplx(-0.3);
  auto rep4 = check_solution(s4);
  CHECK(rep4.identity_residual > 1e-3);
  CHECK_FALSE(rep4.has_identity);
}

TEST_CASE("metric reconstruction from the flow") {
  SchlesingerSystem s = pr::schlesinger_from_closed_forms(2, 0.3, -0.7);
  auto rep = reconstruct_frobenius(s);
  CHECK(rep.t_shift == 0.0);
  pr::ClosedForms cf = pr::closed_forms(2, 0.3, -0.7);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(rep.eta[j] - cf.eta[j]) < 1e-9);
  CHECK(rep.symmetry_residual < 1e-6);
  CHECK(rep.euler_residual < 1e-6);

  // D = 1 (and singular W) exercises the t-shift
  VectorXcd eta(2);
  eta << cplx(1.0), cplx(-1.0);
  SpecialInitData init = sample_initial_space(2, 1.0, eta, {});
  SchlesingerSystem s1 = build_special(init);
  s1.u = VectorXcd(2);
  s1.u << cplx(0.0), cplx(1.0);
  auto rep1 = reconstruct_frobenius(s1);
  CHECK(rep1.t_shift != 0.0);
  CHECK(std::isfinite(rep1.symmetry_residual));
  CHECK(rep1.symmetry_residual < 1e-5);
}
