#include <doctest.h>

#include "frob/potential.hpp"

using namespace frob;

TEST_CASE("identity direction reproduces the metric") {
  TruncatedPotential pot(gw::compute_gw_table(2, 3));
  VectorXcd x(3);
  x << cplx(0.2, 0.1), cplx(-0.4, 0.2), cplx(0.3, -0.1);
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b) {
      cplx v = pot.third(x, 0, a, b).value;
      cplx want = (a + b == 2) ? 1.0 : 0.0;
      CHECK(std::abs(v - want) < 1e-15);
    }
}

TEST_CASE("structure values on the small phase plane match the closed forms") {
  TruncatedPotential pot(gw::compute_gw_table(2, 4));
  VectorXcd x = VectorXcd::Zero(3);
  x[1] = cplx(-0.3, 0.2);
  cplx q = std::exp(x[1]);
  // Phi_{122} = e^{x1} exactly on the plane (only degree one contributes)
  CHECK(std::abs(pot.third(x, 1, 2, 2).value - q) < 1e-14);
  // Phi_{111} vanishes there, classical and instanton alike
  CHECK(std::abs(pot.third(x, 1, 1, 1).value) < 1e-14);
  // deep negative x1 kills the instanton sum entirely
  VectorXcd far = VectorXcd::Zero(3);
  far[1] = -40.0;
  CHECK(std::abs(pot.third(far, 1, 2, 2).value) < 1e-16);
  CHECK(std::abs(pot.third(far, 2, 2, 2).value) < 1e-16);
}

TEST_CASE("jet directions and input validation") {
  TruncatedPotential pot(gw::compute_gw_table(2, 3), 2);
  VectorXcd x = VectorXcd::Zero(3);
  x[1] = -0.5;
  // fourth derivative with two phase directions picks up I(1;2,2) e^{x1}
  cplx v = pot.derivative(x, {1, 1, 2, 2}).value;
  CHECK(std::abs(v - std::exp(x[1])) < 1e-14);
  // the grading kills {1,2,2,2}: no key of any degree contains exactly 2,2,2
  CHECK(std::abs(pot.derivative(x, {1, 2, 2, 2}).value) == 0.0);
  CHECK_THROWS_AS(pot.derivative(x, {0, 1}), Error);
  CHECK_THROWS_AS(pot.derivative(x, {1, 2, 2, 2, 2, 2}), Error);
  CHECK_THROWS_AS(pot.derivative(x, {3, 2, 2}), Error);
  // truncation diagnostic is live away from the small phase plane
  VectorXcd hot = VectorXcd::Zero(3);
  hot[1] = 1.5;
  hot[2] = 0.8;
  auto res = pot.third(hot, 2, 2, 2);
  CHECK(res.trunc_rel > 0);
}

TEST_CASE("qh field wiring") {
  auto field = make_qh_field(2, 3);
  CHECK(field->dim() == 3);
  CHECK(field->euler() != nullptr);
  CHECK(field->euler()->d0 == 1.0);
  CHECK(field->euler()->D == 0.0);
  CHECK(std::abs(field->euler()->shift[1] - cplx(3.0, 0.0)) < 1e-15);
  auto p1 = make_qh_p1_field();
  CHECK(p1->dim() == 2);
  CHECK(p1->euler()->D == 1.0);
}
