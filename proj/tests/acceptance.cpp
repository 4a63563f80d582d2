// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "frob/geometry.hpp"
#include "frob/gw.hpp"
#include "frob/pr.hpp"
#include "frob/schlesinger.hpp"
#include "frob/super.hpp"

using namespace frob;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%2d] %-34s %s  (%s)\n", idx, name.c_str(),
              ok ? "PASS" : "FAIL", detail.c_str());
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<Int> plane_curve_oracle(int dmax) {
  std::vector<Int> N(dmax + 1, 0);
  N[1] = 1;
  for (int d = 2; d <= dmax; ++d) {
    Int sum = 0;
    for (int d1 = 1; d1 < d; ++d1) {
      int d2 = d - d1;
      Int term = N[d1] * N[d2] * Int(d1) * Int(d1) * Int(d2);
      sum += term * (Int(d2) * binomial(3 * d - 4, 3 * d1 - 2) -
                     Int(d1) * binomial(3 * d - 4, 3 * d1 - 1));
    }
    N[d] = sum;
  }
  return N;
}

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream detail;
  gw::GWTable t2 = gw::compute_gw_table(2, 5);
  auto oracle = plane_curve_oracle(5);
  std::vector<Int> want = {0, 1, 1, 12, 620, 87304};
  for (int d = 1; d <= 5; ++d) {
    gw::Multiset key(3 * d - 1, 2);
    ok = ok && t2.at(d, key) == oracle[d] && t2.at(d, key) == want[d];
  }
  gw::GWTable t3 = gw::compute_gw_table(3, 1);
  ok = ok && t3.at(1, {2, 2, 3}) == 1;
  ok = ok && t3.at(1, {2, 2, 2, 2}) == 2;
  double secs = seconds_since(t0);
  ok = ok && secs < 5.0;
  detail << "plane-curve table + oracle match, " << secs << " s";
  report(1, "degree table vs oracle", ok, detail.str());
}

void criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (int r : {2, 3}) {
    gw::GWTable t = gw::compute_gw_table(r, 4);
    auto rep = gw::wdvv_residual_exact(t, 4);
    ok = ok && !rep.violated && rep.max_abs_residual == 0;
  }
  double secs = seconds_since(t0);
  ok = ok && secs < 30.0;
  std::ostringstream detail;
  detail << "rational residual identically zero, " << secs << " s";
  report(2, "associativity exactness", ok, detail.str());
}

void criterion3() {
  bool ok = true;
  double worst = 0;
  for (int r : {2, 3, 4}) {
    auto rep = pr::cross_validate(r, 0.3, -0.7, 1e-8);
    worst = std::max({worst, rep.u_dev, rep.eta_dev, rep.v_dev});
    ok = ok && rep.u_dev <= 1e-8 && rep.eta_dev <= 1e-8 && rep.v_dev <= 1e-8;
  }
  std::ostringstream detail;
  detail << "max deviation " << worst;
  report(3, "closed-form cross-validation", ok, detail.str());
}

void criterion4() {
  bool ok = true;
  double worst_sum = 0, worst_spec = 0;
  for (int r = 2; r <= 8; ++r) {
    auto rep = pr::spectrum_checks(r);
    worst_sum = std::max(worst_sum, rep.row_sum_dev);
    worst_spec = std::max(worst_spec, rep.spectrum_dev);
    ok = ok && rep.row_sum_dev <= 1e-12 && rep.spectrum_dev <= 1e-10;
    ok = ok && rep.zero_in_spectrum == (r % 2 == 1);
  }
  std::ostringstream detail;
  detail << "row sums dev " << worst_sum << ", spectrum dev " << worst_spec;
  report(4, "identity sum and spectrum", ok, detail.str());
}

SchlesingerSystem loop_system() {
  return pr::schlesinger_from_closed_forms(2, 0.3, -0.7);
}

IntegrationPath loop_path(const SchlesingerSystem& s) {
  double rho = 0.5 * s.min_gap() / 8.0;  // circumference about half the gap
  VectorXcd e1 = VectorXcd::Zero(3);
  e1[0] = 1.0;
  VectorXcd u0 = s.u;
  IntegrationPath loop;
  loop.waypoints = {u0, u0 + rho * e1, u0 + rho * e1 + cplx(0, 1) * rho * e1,
                    u0 + cplx(0, 1) * rho * e1, u0};
  return loop;
}

void criterion5() {
  SchlesingerSystem s = loop_system();
  std::vector<MatrixXcd> A0 = s.A;
  IntegrationPath loop = loop_path(s);
  IntegrateOptions opts;
  opts.rtol = 1e-11;
  opts.atol = 1e-13;
  opts.monitor_tol = 1e-8;
  bool ok = true;
  std::ostringstream detail;
  try {
    Trajectory traj = integrate(s, loop, opts);
    double dev = 0;
    for (int j = 0; j < 3; ++j)
      dev = std::max(dev, (s.A[j] - A0[j]).cwiseAbs().maxCoeff());
    ok = dev <= 1e-6 && traj.max_conservation <= 1e-8 &&
         traj.max_rank1_defect <= 1e-8 && traj.max_quad_defect <= 1e-8;
    detail << "endpoint dev " << dev << ", conservation "
           << traj.max_conservation << ", rank1 " << traj.max_rank1_defect
           << ", quad " << traj.max_quad_defect;
  } catch (const Error& e) {
    ok = false;
    detail << "aborted: " << e.what();
  }
  report(5, "loop conservation", ok, detail.str());
}

void criterion6() {
  bool ok = true;
  std::ostringstream detail;
  try {
    SchlesingerSystem s = loop_system();
    IntegrationPath loop = loop_path(s);
    IntegrateOptions opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;
    double sym = 0, eul = 0;
    // along the trajectory: at waypoints of the same loop
    for (size_t stop = 1; stop < loop.waypoints.size(); ++stop) {
      SchlesingerSystem sys = loop_system();
      IntegrationPath seg;
      seg.waypoints.assign(loop.waypoints.begin(),
                           loop.waypoints.begin() + stop + 1);
      integrate(sys, seg, opts);
      auto rep = reconstruct_frobenius(sys);
      sym = std::max(sym, rep.symmetry_residual);
      eul = std::max(eul, rep.euler_residual);
    }
    ok = sym <= 1e-6 && eul <= 1e-6;
    detail << "symmetry " << sym << ", euler " << eul << " (D = 0)";
  } catch (const Error& e) {
    ok = false;
    detail << "aborted: " << e.what();
  }
  report(6, "metric reconstruction", ok, detail.str());
}

void criterion7() {
  bool ok = true;
  std::ostringstream detail;
  try {
    // closedness and path independence on the special system
    SchlesingerSystem s = loop_system();
    VectorXcd target = s.u;
    target[0] += 0.2 * s.min_gap();
    target[1] += cplx(0.0, 0.1) * s.min_gap();
    IntegrationPath p1, p2;
    p1.waypoints = {s.u, target};
    p2.waypoints = {s.u, s.u + cplx(0.0, 0.15) * s.min_gap() * VectorXcd::Unit(3, 0),
                    target};
    IntegrateOptions opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;
    TauReport r1 = tau(s, p1, opts);
    TauReport r2 = tau(s, p2, opts);
    double pathdev = std::abs(r1.tau - r2.tau) / std::abs(r1.tau);

    // closed form for two points
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(-0.6, 0.6);
    SchlesingerSystem two;
    two.m = 2;
    two.u = VectorXcd(2);
    two.u << cplx(0.0), cplx(1.0);
    two.g = MatrixXcd::Identity(2, 2);
    two.A.resize(2);
    for (auto& a : two.A) {
      a = MatrixXcd(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = cplx(unif(rng), unif(rng));
    }
    two.W = two.A[0] + two.A[1];
    cplx tr = (two.A[0] * two.A[1]).trace();
    VectorXcd t2(2);
    t2 << cplx(-0.3, 0.2), cplx(1.2, -0.4);
    IntegrationPath path2;
    path2.waypoints = {two.u, t2};
    IntegrateOptions o2 = opts;
    o2.check_monitors = false;
    TauReport rc = tau(two, path2, o2);
    cplx closed = std::pow((t2[0] - t2[1]) / (two.u[0] - two.u[1]), tr);
    double closeddev = std::abs(rc.tau - closed);

    ok = r1.closedness <= 1e-6 && pathdev <= 1e-6 && closeddev <= 1e-8;
    detail << "closedness " << r1.closedness << ", homotopy " << pathdev
           << ", closed form " << closeddev;
  } catch (const Error& e) {
    ok = false;
    detail << "aborted: " << e.what();
  }
  report(7, "tau function", ok, detail.str());
}

void criterion8() {
  std::mt19937_64 rng(0xACCE5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double worst = 0;
  bool ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 2 + int(rng() % 7);  // up to 8 generators
    auto rnd = [&](int parity) {
      GrassmannElement x(n);
      for (std::uint32_t m = 0; m < (1u << n); ++m) {
        if (parity != 2 && int(std::popcount(m)) % 2 != parity) continue;
        x.set_coeff(m, cplx(unif(rng), unif(rng)));
      }
      return x;
    };
    GrassmannElement a = rnd(2), b = rnd(2), c = rnd(2);
    worst = std::max(worst, ((a * b) * c - a * (b * c)).max_abs());
    GrassmannElement ae = rnd(0), ao = rnd(1), bo = rnd(1);
    worst = std::max(worst, (ae * bo - bo * ae).max_abs());
    worst = std::max(worst, (ao * bo + bo * ao).max_abs());
    for (int k = 0; k < std::min(n, 3); ++k) {
      GrassmannElement lhs = (ao * b).theta_derivative(k);
      GrassmannElement rhs =
          ao.theta_derivative(k) * b - ao * b.theta_derivative(k);
      worst = std::max(worst, (lhs - rhs).max_abs());
    }
    GrassmannElement inv = rnd(2);
    inv.set_coeff(0, cplx(1.6 + 0.5 * unif(rng), unif(rng)));
    worst = std::max(
        worst,
        (inv * inv.inverse() - GrassmannElement::scalar(n, 1.0)).max_abs());
    GrassmannElement ev = rnd(0);
    ev.set_coeff(0, cplx(1.6 + 0.5 * unif(rng), unif(rng)));
    worst = std::max(worst, (ev.sqrt() * ev.sqrt() - ev).max_abs());
  }
  ok = worst <= 1e-12;
  std::ostringstream detail;
  detail << "1000 samples, n <= 8, worst " << worst;
  report(8, "Grassmann property suite", ok, detail.str());
}

void criterion9() {
  double res = super::ns_representation_check(3, 4, 7);
  std::ostringstream detail;
  detail << "n = 3, a,b <= 4, half-integer indices <= 7/2, residual " << res;
  report(9, "Neveu-Schwarz relations", res == 0.0, detail.str());
}

void criterion10() {
  std::mt19937_64 rng(0x600D);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  double worst = 0;
  auto num = [&]() {
    std::ostringstream os;
    os.precision(17);
    os << std::showpos << unif(rng);
    return os.str();
  };
  for (int trial = 0; trial < 100; ++trial) {
    PsiSpec psi;
    psi.n = 3;
    psi.declared_parity = -1;
    for (std::uint32_t mask = 1; mask < 8u; ++mask) {
      if (std::popcount(mask) % 2 == 0) continue;
      std::ostringstream os;
      os << "(2" << num() << "*u1" << num() << "*u2" << num() << "*u3" << num()
         << "*u1*u2" << num() << "*u2*u3" << num() << "*exp(" << num()
         << "*u2)" << ")";
      PsiTerm t;
      t.mask = mask;
      t.coeff = parse_expression(os.str(), 3);
      psi.terms.push_back(std::move(t));
    }
    VectorXcd u(3);
    for (int k = 0; k < 3; ++k) u[k] = cplx(unif(rng), unif(rng));
    auto rep = super::tnabla_and_metrics(psi, u, rng());
    worst = std::max({worst, rep.isotropy, rep.parallel_h, rep.parallel_gt,
                      rep.frobenius});
    // anticommutation identity of the metric coefficients
    super::SuperChart ch = super::egoroff_chart(psi, u, 2);
    for (int mu = 0; mu < 3; ++mu)
      for (int al = 0; al < 3; ++al) {
        SuperJet lhs = e_dot(ch.eta_dot[al], mu) + e_dot(ch.eta_dot[mu], al);
        if (mu == al) lhs -= 2.0 * ch.eta_undot[al];
        worst = std::max(worst, jet_value(lhs).max_abs());
      }
  }
  std::ostringstream detail;
  detail << "100 random odd potentials, n = 3, worst " << worst;
  report(10, "unconditional super identities", worst <= 1e-9, detail.str());
}

void criterion11() {
  bool ok = true;
  std::ostringstream detail;
  // exact body reduction on theta-independent fields
  std::mt19937_64 rng(0xB0D4);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  super::AFieldFn fields = [&](const VectorXcd& uu, int order) {
    std::mt19937_64 local(0xB0D4);
    std::uniform_real_distribution<double> lu(-1.0, 1.0);
    const int n = int(uu.size());
    std::vector<super::SJMat> A(
        n, super::SJMat(n, std::vector<SuperJet>(n, SuperJet(n))));
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          A[j][r][c] = SuperJet::scalar(
              n, Jet::constant(cplx(lu(local), lu(local)), n, order));
    return A;
  };
  VectorXcd u(2);
  u << cplx(0.1, -0.2), cplx(1.1, 0.4);
  auto red = super::super_schlesinger_residual(2, fields, u);
  ok = ok && red.body_reduction == 0.0;
  detail << "body reduction " << red.body_reduction;

  // kappa-linear cancellation on the homogeneous strict-special fixture
  PsiSpec hom;
  hom.n = 2;
  hom.declared_parity = -1;
  PsiTerm h1;
  h1.mask = 1;
  h1.coeff = parse_expression("u1 - u2", 2);
  PsiTerm h2;
  h2.mask = 2;
  h2.coeff = parse_expression("u2 - u1", 2);
  hom.terms = {h1, h2};
  VectorXcd uh(2);
  uh << cplx(0.9, 0.2), cplx(-0.4, -0.1);
  auto kap = super::kappa_linearity_check(hom, uh, 2.5);
  ok = ok && kap.order1 <= 1e-10;
  detail << ", kappa linear " << kap.order1;

  // crafted n = 2 fixture: closure equations and the full field equations
  PsiSpec crafted = super::crafted_psi_n2();
  VectorXcd uc(2);
  uc << cplx(0.3, 0.1), cplx(-0.2, 0.25);
  auto res = super::super_residuals(
      crafted, uc, {super::SuperEq::DarbouxEgoroff, super::SuperEq::TnablaFlat},
      0.0);
  ok = ok && res.values.at("de_identity") <= 1e-9 &&
       res.values.at("tnabla_flat") <= 1e-9;
  auto fix = super::crafted_super_schlesinger_n2(0.5, 0.3);
  auto rep = super::super_schlesinger_residual(2, fix.a_fields, fix.u0);
  ok = ok && rep.off_diag <= 1e-9 && rep.diag <= 1e-9;
  detail << ", closure " << std::max(res.values.at("de_identity"),
                                     res.values.at("tnabla_flat"))
         << ", field eqs " << std::max(rep.off_diag, rep.diag);
  report(11, "super Schlesinger", ok, detail.str());
}

void criterion12() {
  // byte-identical exact outputs, 1e-12 floating outputs across reruns
  auto run_csv = [] {
    std::ostringstream os;
    gw::write_csv(gw::compute_gw_table(3, 3), os);
    return os.str();
  };
  std::string csv1 = run_csv(), csv2 = run_csv();

  auto run_float = [] {
    auto rep = pr::cross_validate(2, 0.3, -0.7, 1e-8);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", rep.u_dev, rep.eta_dev,
                  rep.v_dev);
    return std::string(buf);
  };
  std::string f1 = run_float(), f2 = run_float();
  bool ok = csv1 == csv2 && f1 == f2;
  std::ostringstream detail;
  detail << "csv bytes " << (csv1 == csv2 ? "identical" : "DIFFER")
         << ", float reports " << (f1 == f2 ? "identical" : "DIFFER");
  report(12, "determinism", ok, detail.str());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  criterion12();
  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
