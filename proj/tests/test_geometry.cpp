#include <doctest.h>

#include <json.hpp>
#include <numbers>
#include <random>

#include "frob/geometry.hpp"

using namespace frob;

namespace {

std::shared_ptr<const PotentialField> cubic_line_field() {
  // one-dimensional model Phi = x^3/6, g = (1), E = x d/dx
  MatrixXcd g = MatrixXcd::Identity(1, 1);
  EulerData e;
  e.jac = MatrixXcd::Identity(1, 1);
  e.shift = VectorXcd::Zero(1);
  e.d0 = 1.0;
  e.D = 2.0;
  auto fn = [](const VectorXcd& x, std::vector<MatrixXcd>& phi) {
    phi.assign(1, MatrixXcd::Zero(1, 1));
    phi[0](0, 0) = x[0];
  };
  return std::make_shared<ExplicitField>(1, g, fn, e);
}

std::shared_ptr<const PotentialField> componentwise_field(int n) {
  // A = componentwise product in the standard basis, g diagonal
  MatrixXcd g = MatrixXcd::Identity(n, n);
  auto fn = [n](const VectorXcd&, std::vector<MatrixXcd>& phi) {
    phi.assign(n, MatrixXcd::Zero(n, n));
    for (int a = 0; a < n; ++a) phi[a](a, a) = 1.0;
  };
  return std::make_shared<ExplicitField>(n, g, fn);
}

std::shared_ptr<const PotentialField> broken_field() {
  // x-dependent structure tensor that is not integrable and not associative
  MatrixXcd g = MatrixXcd::Identity(2, 2);
  auto fn = [](const VectorXcd& x, std::vector<MatrixXcd>& phi) {
    phi.assign(2, MatrixXcd::Zero(2, 2));
    phi[0](0, 0) = 1.0;
    phi[0](1, 1) = x[1];
    phi[1](0, 1) = phi[1](1, 0) = x[1];
    phi[1](1, 1) = 0.7 + x[0] * x[0];
  };
  // symmetrize to keep phi[a](b,c) = phi (a<->b) consistent
  auto sym = [fn](const VectorXcd& x, std::vector<MatrixXcd>& phi) {
    fn(x, phi);
    std::vector<MatrixXcd> out(2, MatrixXcd::Zero(2, 2));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          cplx s = phi[a](b, c) + phi[b](c, a) + phi[c](a, b);
          out[a](b, c) = s / 3.0;
        }
    phi = out;
  };
  return std::make_shared<ExplicitField>(2, g, sym);
}

}  // namespace

TEST_CASE("one-dimensional cubic model") {
  auto field = cubic_line_field();
  VectorXcd x(1);
  x << cplx(1.0, 0.0);
  FrobeniusPoint p = build_point(field, x);
  CHECK(std::abs(p.mult[0](0, 0) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(associativity_residual(p) == 0.0);
  CanonicalChart chart = semisimple_split(p);
  OperatorPair ops = uv_operators(p, chart);
  CHECK(std::abs(ops.V(0, 0)) < 1e-14);  // skew 1x1
}

TEST_CASE("projective line model splits in closed form") {
  auto field = make_qh_p1_field();
  VectorXcd x(2);
  x << cplx(0.4, -0.1), cplx(0.6, 0.3);
  FrobeniusPoint p = build_point(field, x);
  CanonicalChart chart = semisimple_split(p);
  cplx up = x[0] + 2.0 * std::exp(x[1] / 2.0);
  cplx um = x[0] - 2.0 * std::exp(x[1] / 2.0);
  // labels are ordered deterministically; match by value
  double d1 = std::abs(chart.u[0] - um) + std::abs(chart.u[1] - up);
  double d2 = std::abs(chart.u[0] - up) + std::abs(chart.u[1] - um);
  CHECK(std::min(d1, d2) < 1e-12);
  // idempotents e_pm = (d0 pm e^{-x1/2} d1)/2
  for (int i = 0; i < 2; ++i) {
    VectorXcd e = chart.frame.col(i);
    CHECK(std::abs(e[0] - 0.5) < 1e-12);
    CHECK(std::abs(std::abs(e[1]) - std::abs(0.5 * std::exp(-x[1] / 2.0))) <
          1e-12);
  }
}

TEST_CASE("projective plane canonical coordinates") {
  auto field = make_qh_field(2, 3);
  VectorXcd x = VectorXcd::Zero(3);
  x[0] = cplx(0.3, 0.0);
  x[1] = cplx(-0.7, 0.0);
  FrobeniusPoint p = build_point(field, x);

  // identity row of the structure tensor
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(std::abs(p.mult[0](a, b) - (a == b ? 1.0 : 0.0)) < 1e-13);
  // multiplication by d1 against the closed small-phase values
  cplx q = std::exp(x[1]);
  CHECK(std::abs(p.mult[1](0, 2) - q) < 1e-13);  // d1 o d2 = e^{x1} d0
  CHECK(std::abs(p.mult[1](2, 1) - 1.0) < 1e-13);

  CHECK(associativity_residual(p) < 1e-10);

  CanonicalChart chart = semisimple_split(p);
  cplx zeta = std::exp(cplx(0, 2.0 * std::numbers::pi / 3.0));
  for (int i = 0; i < 3; ++i) {
    double best = 1e9;
    for (int k = 0; k < 3; ++k)
      best = std::min(best,
                      std::abs(chart.u[i] -
                               (x[0] + std::pow(zeta, k) * 3.0 *
                                           std::exp(x[1] / 3.0))));
    CHECK(best < 1e-10);
  }
  // sum of idempotents is the flat identity
  VectorXcd e = chart.identity();
  CHECK(std::abs(e[0] - 1.0) < 1e-10);
  CHECK(std::abs(e[1]) < 1e-10);
  CHECK(std::abs(e[2]) < 1e-10);
}

TEST_CASE("componentwise algebra splits exactly") {
  auto field = componentwise_field(3);
  FrobeniusPoint p = build_point(field, VectorXcd::Zero(3));
  ProbePolicy policy;
  policy.with_gamma = false;
  CanonicalChart chart = semisimple_split(p, policy);
  // idempotents are the standard basis vectors (up to order)
  for (int i = 0; i < 3; ++i) {
    VectorXcd e = chart.frame.col(i);
    int big = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(e[k]) > std::abs(e[big])) big = k;
    CHECK(std::abs(e[big] - 1.0) < 1e-12);
    CHECK(e.cwiseAbs().sum() - std::abs(e[big]) < 1e-12);
  }
}

TEST_CASE("broken structure tensor fails associativity and potentiality") {
  auto field = broken_field();
  VectorXcd x(2);
  x << cplx(0.3, 0.1), cplx(1.2, -0.2);
  FrobeniusPoint p = build_point(field, x);
  CHECK(associativity_residual(p) > 1e-3);
  auto rep = connection_residual(p, ConnectionKind::First,
                                 {cplx(0.5), cplx(1.1), cplx(-0.7)});
  CHECK(rep.r1 > 1e-3);  // potentiality broken
}

TEST_CASE("first structure connection splits into curvature parts") {
  auto field = make_qh_field(2, 3);
  VectorXcd x = VectorXcd::Zero(3);
  x[0] = 0.3;
  x[1] = -0.7;
  FrobeniusPoint p = build_point(field, x);
  auto rep = connection_residual(p, ConnectionKind::First,
                                 {cplx(0.5), cplx(1.1), cplx(-0.7)});
  CHECK(rep.r0 < 1e-9);
  CHECK(rep.r1 < 1e-8);
  CHECK(rep.r2 < 1e-8);
}

TEST_CASE("second, deformed and extended connections are flat") {
  auto field = make_qh_field(2, 3);
  VectorXcd x = VectorXcd::Zero(3);
  x[0] = 0.25;
  x[1] = -0.8;
  FrobeniusPoint p = build_point(field, x);
  std::vector<cplx> lams = {cplx(0.1, 0.9)};
  auto rep = connection_residual(p, ConnectionKind::Second, lams);
  CHECK(rep.base < 2e-7);
  CHECK(rep.mixed < 2e-7);
  auto repd = connection_residual(p, ConnectionKind::Deformed, lams, 0, 0.8);
  CHECK(repd.base < 2e-7);
  CHECK(repd.mixed < 2e-7);
  auto repe = connection_residual(p, ConnectionKind::Extended, lams);
  CHECK(repe.base < 1e-7);
  CHECK(repe.mixed < 1e-7);

  // s = 0 deformation coincides with the second connection coefficientwise
  auto c2 = connection_coefficients(p, ConnectionKind::Second, lams[0]);
  auto cd = connection_coefficients(p, ConnectionKind::Deformed, lams[0], 0.0);
  for (int a = 0; a < 3; ++a)
    CHECK((c2.coeff[a] - cd.coeff[a]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c2.lambda_dir - cd.lambda_dir).cwiseAbs().maxCoeff() == 0.0);

  // lambda on a canonical value trips the guard
  CanonicalChart chart = semisimple_split(p);
  CHECK_THROWS_AS(
      connection_coefficients(p, ConnectionKind::Second, chart.u[0]), Error);
}

TEST_CASE("rotation coefficient system on the projective plane") {
  auto field = make_qh_field(2, 3);
  VectorXcd x = VectorXcd::Zero(3);
  x[0] = 0.3;
  x[1] = -0.7;
  FrobeniusPoint p = build_point(field, x);
  CanonicalChart chart = semisimple_split(p);
  auto rep = darboux_egoroff_residual(p, chart);
  CHECK_FALSE(rep.de_closed_vacuous);
  CHECK(rep.de_closed < 1e-5);
  CHECK(rep.de_identity < 1e-5);
  CHECK(rep.de_euler < 1e-5);

  // gamma is symmetric
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(chart.gamma(i, j) - chart.gamma(j, i)) < 1e-8);
}

TEST_CASE("two-point chart reports the closedness family as vacuous") {
  auto field = make_qh_p1_field();
  VectorXcd x(2);
  x << cplx(0.0), cplx(0.4);
  FrobeniusPoint p = build_point(field, x);
  CanonicalChart chart = semisimple_split(p);
  auto rep = darboux_egoroff_residual(p, chart);
  CHECK(rep.de_closed_vacuous);
  CHECK(rep.de_identity < 1e-5);
}

TEST_CASE("euler field checks") {
  auto field = make_qh_field(2, 3);
  VectorXcd x = VectorXcd::Zero(3);
  x[0] = 0.2;
  x[1] = -0.6;
  FrobeniusPoint p = build_point(field, x);
  auto rep = euler_check(p);
  CHECK(rep.conformal < 1e-12);
  CHECK(rep.product < 1e-7);
  CHECK(rep.potential < 1e-7);
  CHECK(rep.pairing_checked);
  CHECK(rep.pairing < 1e-12);
  // null identity: g(e, e) = g_00 = 0 for r > 0
  CHECK(std::abs(p.g(0, 0)) == 0.0);

  // zero conformal data: the product residual measures d0 times the product
  EulerData ze;
  ze.jac = MatrixXcd::Zero(3, 3);
  ze.shift = VectorXcd::Zero(3);
  ze.d0 = 1.0;
  ze.D = 0.0;
  auto qh = make_qh_field(2, 3);
  auto fn = [qh](const VectorXcd& xx, std::vector<MatrixXcd>& phi) {
    qh->third(xx, phi);
  };
  auto zfield =
      std::make_shared<ExplicitField>(3, qh->metric(), fn, ze);
  FrobeniusPoint zp = build_point(zfield, x);
  auto zrep = euler_check(zp);
  CHECK(zrep.conformal < 1e-12);
  CHECK(zrep.product > 0.5);
}

TEST_CASE("operator pair and chart invariants") {
  auto field = make_qh_field(2, 3);
  VectorXcd x = VectorXcd::Zero(3);
  x[0] = cplx(0.3, 0.05);
  x[1] = cplx(-0.7, 0.1);
  FrobeniusPoint p = build_point(field, x);
  CanonicalChart chart = semisimple_split(p);
  OperatorPair ops = uv_operators(p, chart);

  // U diagonal with the canonical values in the normalized frame
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(ops.U(i, i) - chart.u[i]) < 1e-10);
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(ops.U(i, j)) < 1e-10);
  }
  // V computed two ways
  MatrixXcd vg = v_from_gamma(chart);
  CHECK((ops.V - vg).cwiseAbs().maxCoeff() < 1e-8);
  // V flat-frame skewness
  MatrixXcd V = flat_v_operator(p);
  CHECK((p.g * V + V.transpose() * p.g).cwiseAbs().maxCoeff() < 1e-12);
  // V e = (1 - D/2) e for the flat identity
  VectorXcd e0 = VectorXcd::Zero(3);
  e0[0] = 1.0;
  double D = p.euler()->D;
  CHECK(((V * e0) - (1.0 - D / 2.0) * e0).cwiseAbs().maxCoeff() < 1e-12);

  // eta product equals det(g) det(frame)^2
  cplx lhs = chart.eta.prod();
  cplx rhs = p.g.determinant() *
             chart.frame.determinant() * chart.frame.determinant();
  CHECK(std::abs(lhs - rhs) < 1e-8);

  // pencil metric in flat and canonical frames
  cplx lam(0.37, 0.21);
  MatrixXcd U = flat_u_operator(p);
  MatrixXcd res =
      (U - lam * MatrixXcd::Identity(3, 3)).partialPivLu().inverse();
  MatrixXcd flatform = res.transpose() * p.g;
  Eigen::PartialPivLU<MatrixXcd> plu(chart.frame);
  MatrixXcd pinv = plu.inverse();
  MatrixXcd canon = MatrixXcd::Zero(3, 3);
  for (int i = 0; i < 3; ++i)
    canon += chart.eta[i] / (chart.u[i] - lam) *
             (pinv.row(i).transpose() * pinv.row(i));
  CHECK((flatform - canon).cwiseAbs().maxCoeff() < 1e-10);

  // relabelling equivariance: permuted chart keeps the identities
  CanonicalChart perm = chart;
  std::swap(perm.u[0], perm.u[2]);
  perm.frame.col(0).swap(perm.frame.col(2));
  std::swap(perm.eta[0], perm.eta[2]);
  std::swap(perm.sqrt_eta[0], perm.sqrt_eta[2]);
  MatrixXcd pg = perm.gamma;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int pi = i == 0 ? 2 : (i == 2 ? 0 : i);
      int pj = j == 0 ? 2 : (j == 2 ? 0 : j);
      perm.gamma(i, j) = pg(pi, pj);
    }
  MatrixXcd vperm = v_from_gamma(perm);
  OperatorPair opsp = uv_operators(p, perm);
  CHECK((opsp.V - vperm).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("chart export is valid json") {
  auto field = make_qh_p1_field();
  VectorXcd x(2);
  x << cplx(0.1), cplx(0.2);
  FrobeniusPoint p = build_point(field, x);
  CanonicalChart chart = semisimple_split(p);
  auto j = nlohmann::json::parse(chart_to_json(chart));
  CHECK(j["u"].size() == 2);
  CHECK(j["eta"].size() == 2);
  CHECK(j["gamma"].size() == 2);
  CHECK(j["frame"].size() == 2);
  CHECK(j["branches"].size() == 2);
}

TEST_CASE("degenerate inputs raise typed errors") {
  // singular metric
  auto bad = std::make_shared<ExplicitField>(
      2, MatrixXcd::Zero(2, 2),
      [](const VectorXcd&, std::vector<MatrixXcd>& phi) {
        phi.assign(2, MatrixXcd::Zero(2, 2));
      });
  CHECK_THROWS_AS(build_point(bad, VectorXcd::Zero(2)), Error);

  // collision of canonical values at the tip of the instanton cone
  auto field = make_qh_p1_field();
  VectorXcd x(2);
  x << cplx(0.0), cplx(-80.0);  // u_+ - u_- = 4 e^{x1/2} ~ 0
  FrobeniusPoint p = build_point(field, x);
  CHECK_THROWS_AS(semisimple_split(p), Error);
}
