#include "frob/pr.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "frob/geometry.hpp"

namespace frob::pr {

namespace {

cplx zeta_pow(int r, long k) {
  long n = r + 1;
  long kk = ((k % n) + n) % n;
  double ang = 2.0 * std::numbers::pi * double(kk) / double(n);
  return {std::cos(ang), std::sin(ang)};
}

}  // namespace

ClosedForms closed_forms(int r, cplx x0, cplx x1) {
  if (r < 2) fail(ErrorKind::InvalidParameter, "r must be >= 2");
  const int n = r + 1;
  ClosedForms cf;
  cf.r = r;
  cf.zeta = zeta_pow(r, 1);
  cf.D = 2.0 - r;
  cf.u = VectorXcd(n);
  cf.eta = VectorXcd(n);
  cf.v = MatrixXcd::Zero(n, n);
  cf.eta_ki = MatrixXcd::Zero(n, n);
  const cplx q = std::exp(x1 / double(n));
  const cplx etau = std::exp(-x1 * double(r) / double(n));
  for (int i = 0; i < n; ++i) {
    cf.u[i] = x0 + zeta_pow(r, i) * double(n) * q;
    cf.eta[i] = zeta_pow(r, i) / double(n) * etau;
  }
  const cplx em = std::exp(-x1) / double(n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      cplx w = zeta_pow(r, j - k);
      cf.v(j, k) = -w / (1.0 - w);
      if (k > j) {
        // symmetric in the pair, so computed once and mirrored
        cplx wik = zeta_pow(r, k - j);
        cf.eta_ki(j, k) = -2.0 * wik / ((wik - 1.0) * (wik - 1.0)) * em;
        cf.eta_ki(k, j) = cf.eta_ki(j, k);
      }
    }
  return cf;
}

PerturbativeChart perturbative_chart(int r, cplx x0, cplx x1) {
  if (r < 2) fail(ErrorKind::InvalidParameter, "r must be >= 2");
  const int n = r + 1;
  ClosedForms cf = closed_forms(r, x0, x1);
  PerturbativeChart ch;
  ch.r = r;
  ch.u = cf.u;
  ch.eta = cf.eta;
  ch.eta_ki = cf.eta_ki;
  ch.frame = MatrixXcd(n, n);
  ch.grad_u = MatrixXcd(n, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) {
      ch.frame(a, i) = zeta_pow(r, -(long(i) * a)) *
                       std::exp(-double(a) * x1 / double(n)) / double(n);
      ch.grad_u(a, i) =
          zeta_pow(r, long(a) * i) * std::exp(double(a) * x1 / double(n));
    }
  return ch;
}

SchlesingerSystem schlesinger_from_closed_forms(int r, cplx x0, cplx x1) {
  ClosedForms cf = closed_forms(r, x0, x1);
  const int n = r + 1;
  SchlesingerSystem s;
  s.m = n;
  s.u = cf.u;
  s.g = MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) s.g(i, i) = cf.eta[i];
  MatrixXcd V = cf.v.transpose();  // column j = image of e_j
  MatrixXcd I = MatrixXcd::Identity(n, n);
  s.A.resize(n);
  for (int j = 0; j < n; ++j) {
    MatrixXcd P = MatrixXcd::Zero(n, n);
    P(j, j) = 1.0;
    s.A[j] = -(V + 0.5 * I) * P;
  }
  s.W = -V - 0.5 * I;
  s.e = VectorXcd::Ones(n);
  s.D = cf.D;
  s.special_built = true;
  s.has_identity = true;
  return s;
}

CrossValidationReport cross_validate(int r, cplx x0, cplx x1, double tol,
                                     int d_max, bool wrong_metric,
                                     std::uint64_t probe_seed) {
  const int n = r + 1;
  auto qh = make_qh_field(r, d_max);
  std::shared_ptr<const PotentialField> field = qh;
  if (wrong_metric) {
    auto fn = [qh](const VectorXcd& x, std::vector<MatrixXcd>& phi) {
      qh->third(x, phi);
    };
    field = std::make_shared<ExplicitField>(n, MatrixXcd::Identity(n, n), fn,
                                            *qh->euler());
  }
  VectorXcd x = VectorXcd::Zero(n);
  x[0] = x0;
  x[1] = x1;
  FrobeniusPoint p = build_point(field, x);
  ClosedForms cf = closed_forms(r, x0, x1);
  ProbePolicy policy;
  policy.seed = probe_seed;
  CanonicalChart chart;
  try {
    chart = semisimple_split(p, policy);
  } catch (const Error&) {
    // structure so corrupted that no tame splitting exists: flag everything
    CrossValidationReport rep;
    rep.u_dev = rep.eta_dev = rep.v_dev =
        std::numeric_limits<double>::infinity();
    rep.special_ok = false;
    return rep;
  }

  // nearest-u label matching, chart label i -> closed-form label sigma[i]
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      gap = std::min(gap, std::abs(cf.u[i] - cf.u[j]));
  std::vector<int> sigma(n, -1);
  std::vector<bool> used(n, false);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      double d = std::abs(chart.u[i] - cf.u[j]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    if (best > 0.45 * gap)
      fail(ErrorKind::NotTame, "ambiguous label matching against closed forms");
    sigma[i] = arg;
    used[arg] = true;
  }

  CrossValidationReport rep;
  for (int i = 0; i < n; ++i) {
    rep.u_dev = std::max(rep.u_dev, std::abs(chart.u[i] - cf.u[sigma[i]]));
    rep.eta_dev =
        std::max(rep.eta_dev, std::abs(chart.eta[i] - cf.eta[sigma[i]]));
  }
  // v_jk from the chart's rotation coefficients, branch-independently
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      cplx vjk = (chart.u[k] - chart.u[j]) * chart.gamma(j, k) *
                 chart.sqrt_eta[j] / chart.sqrt_eta[k];
      rep.v_dev = std::max(rep.v_dev, std::abs(vjk - cf.v(sigma[j], sigma[k])));
    }

  SchlesingerSystem s = schlesinger_from_closed_forms(r, x0, x1);
  auto cls = check_solution(s, tol);
  rep.special_residual = cls.special_residual;
  rep.special_ok = cls.is_special && cls.has_identity &&
                   std::abs(cls.weight_D - (2.0 - r)) < 1e-6;
  return rep;
}

SpectrumReport spectrum_checks(int r) {
  if (r < 2) fail(ErrorKind::InvalidParameter, "r must be >= 2");
  const int n = r + 1;
  ClosedForms cf = closed_forms(r, 0.0, 0.0);
  SpectrumReport rep;
  for (int j = 0; j < n; ++j) {
    cplx sum = 0;
    for (int k = 0; k < n; ++k)
      if (k != j) sum += cf.v(j, k);
    rep.row_sum_dev =
        std::max(rep.row_sum_dev, std::abs(sum - cplx(r / 2.0, 0.0)));
  }
  MatrixXcd W =
      -cf.v.transpose() - 0.5 * MatrixXcd::Identity(n, n);
  Eigen::ComplexEigenSolver<MatrixXcd> es(W);
  VectorXcd ev = es.eigenvalues();
  std::sort(ev.data(), ev.data() + n, [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  rep.eigenvalues = ev;
  for (int a = 0; a < n; ++a) {
    double want = a - 0.5 * n;
    rep.spectrum_dev = std::max(rep.spectrum_dev, std::abs(ev[a] - want));
    if (std::abs(ev[a]) < 1e-8) rep.zero_in_spectrum = true;
  }
  return rep;
}

}  // namespace frob::pr
