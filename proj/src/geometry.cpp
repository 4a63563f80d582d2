#include "frob/geometry.hpp"

#include "frob/parallel.hpp"

#include <json.hpp>

#include <mutex>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace frob {

namespace {

double mat_norm(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

double point_scale(const VectorXcd& x) { return 1.0 + x.cwiseAbs().maxCoeff(); }

// directional finite difference of a matrix-valued function, central with one
// Richardson extrapolation
template <class F>
auto richardson_dir(F&& f, const VectorXcd& x, const VectorXcd& dir, double h)
    -> decltype(f(x)) {
  auto d_at = [&](double hh) {
    return ((f(x + hh * dir) - f(x - hh * dir)) / (2.0 * hh)).eval();
  };
  auto d1 = d_at(h);
  auto d2 = d_at(h / 2.0);
  return ((4.0 * d2 - d1) / 3.0).eval();
}

}  // namespace

MatrixXcd FrobeniusPoint::mult_by(const VectorXcd& v) const {
  MatrixXcd m = MatrixXcd::Zero(dim(), dim());
  for (int a = 0; a < dim(); ++a) m += v[a] * mult[a];
  return m;
}

FrobeniusPoint build_point(std::shared_ptr<const PotentialField> field,
                           const VectorXcd& x) {
  FrobeniusPoint p;
  p.field = std::move(field);
  p.x = x;
  p.g = p.field->metric();
  const int n = p.field->dim();
  if (p.g.rows() != n || (p.g - p.g.transpose()).cwiseAbs().maxCoeff() > 1e-14)
    fail(ErrorKind::InvalidModel, "metric must be square symmetric");
  Eigen::FullPivLU<MatrixXcd> lu(p.g);
  if (!lu.isInvertible())
    fail(ErrorKind::InvalidModel, "metric must be invertible");
  p.ginv = lu.inverse();
  p.field->third(x, p.phi);
  p.mult.resize(n);
  for (int a = 0; a < n; ++a) p.mult[a] = p.ginv * p.phi[a];
  return p;
}

double associativity_residual(const FrobeniusPoint& p) {
  const int n = p.dim();
  std::vector<MatrixXcd> q(n);  // q[a] = phi[a] * ginv
  for (int a = 0; a < n; ++a) q[a] = p.phi[a] * p.ginv;
  double worst = 0;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      MatrixXcd lhs = q[a] * p.phi[c];  // (b,d) entry: sum Phi_abe g^ef Phi_fcd
      for (int b = 0; b < n; ++b) {
        MatrixXcd rhs = q[b] * p.phi[a];
        for (int d = 0; d < n; ++d)
          worst = std::max(worst, std::abs(lhs(b, d) - rhs(c, d)));
      }
    }
  return worst;
}

namespace {

// chart without rotation coefficients
CanonicalChart split_core(const FrobeniusPoint& p, const ProbePolicy& policy) {
  const int n = p.dim();
  const EulerData* eu = p.euler();
  std::mt19937_64 rng(policy.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  MatrixXcd probe;
  bool euler_probe = policy.prefer_euler && eu != nullptr;
  int attempt = 0;
  Eigen::ComplexEigenSolver<MatrixXcd> es;
  double gap = 0, scale = 1;
  for (;;) {
    if (euler_probe) {
      probe = p.mult_by(eu->at(p.x));
    } else {
      VectorXcd xi(n);
      for (int a = 0; a < n; ++a) xi[a] = cplx(unif(rng), unif(rng));
      probe = p.mult_by(xi);
    }
    es.compute(probe);
    scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        gap = std::min(gap, std::abs(es.eigenvalues()[i] - es.eigenvalues()[j]));
    if (n == 1) gap = scale;
    if (gap / scale >= policy.tame_tol) break;
    if (euler_probe)
      fail(ErrorKind::NotTame,
           "canonical values collide: relative gap " + std::to_string(gap / scale));
    if (++attempt >= policy.max_retries)
      fail(ErrorKind::NotTame, "probe spectrum degenerate after retries");
  }

  CanonicalChart chart;
  chart.u = VectorXcd(n);
  chart.frame = MatrixXcd(n, n);
  chart.eta = VectorXcd(n);
  chart.sqrt_eta = VectorXcd(n);
  chart.gamma = MatrixXcd::Zero(n, n);
  chart.values_from_euler = eu != nullptr;

  for (int i = 0; i < n; ++i) {
    VectorXcd v = es.eigenvectors().col(i);
    // scale to an exact idempotent: one Newton step on the scaling factor
    VectorXcd s = p.mult_by(v) * v;
    cplx c = v.dot(s) / v.dot(v);  // s = c v for a simple eigenvector
    if (std::abs(c) < 1e-14)
      fail(ErrorKind::DegenerateFrame, "nilpotent eigenvector in splitting");
    cplx alpha = 1.0 / c;
    alpha = alpha * (2.0 - c * alpha);
    VectorXcd e = alpha * v;
    double defect = (p.mult_by(e) * e - e).cwiseAbs().maxCoeff();
    if (defect > 1e-7)
      fail(ErrorKind::NotTame, "idempotent normalization defect " +
                                   std::to_string(defect));
    chart.frame.col(i) = e;
    chart.eta[i] = e.transpose() * p.g * e;
    chart.sqrt_eta[i] = std::sqrt(chart.eta[i]);
  }

  // canonical values: eigenvalues of E o when Euler data is present
  if (eu != nullptr) {
    MatrixXcd U = p.mult_by(eu->at(p.x));
    for (int i = 0; i < n; ++i) {
      VectorXcd e = chart.frame.col(i);
      chart.u[i] = e.dot(U * e) / e.dot(e);
    }
  } else {
    for (int i = 0; i < n; ++i) chart.u[i] = es.eigenvalues()[i];
    chart.values_from_euler = false;
  }

  // deterministic ordering by canonical value
  std::vector<int> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](int i, int j) {
    if (chart.u[i].real() != chart.u[j].real())
      return chart.u[i].real() < chart.u[j].real();
    return chart.u[i].imag() < chart.u[j].imag();
  });
  CanonicalChart out = chart;
  for (int i = 0; i < n; ++i) {
    out.u[i] = chart.u[ord[i]];
    out.frame.col(i) = chart.frame.col(ord[i]);
    out.eta[i] = chart.eta[ord[i]];
    out.sqrt_eta[i] = chart.sqrt_eta[ord[i]];
  }
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.min_gap = std::min(out.min_gap, std::abs(out.u[i] - out.u[j]));
  if (n == 1) out.min_gap = scale;
  return out;
}

// relabel/rebranch cand so it continues ref
void match_to(CanonicalChart& cand, const CanonicalChart& ref) {
  const int n = cand.dim();
  std::vector<int> pick(n, -1);
  std::vector<bool> used(n, false);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity(), second = best;
    int arg = -1;
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      double d = std::abs(cand.u[j] - ref.u[i]);
      if (d < best) {
        second = best;
        best = d;
        arg = j;
      } else {
        second = std::min(second, d);
      }
    }
    if (arg < 0 || !(best < 0.25 * std::max(second, 1e-300)) ||
        best > 0.45 * std::max(ref.min_gap, 0.0))
      fail(ErrorKind::NotTame, "ambiguous idempotent labelling in stencil");
    pick[i] = arg;
    used[arg] = true;
  }
  CanonicalChart tmp = cand;
  for (int i = 0; i < n; ++i) {
    cand.u[i] = tmp.u[pick[i]];
    cand.frame.col(i) = tmp.frame.col(pick[i]);
    cand.eta[i] = tmp.eta[pick[i]];
    cplx s = tmp.sqrt_eta[pick[i]];
    cand.sqrt_eta[i] =
        std::abs(s - ref.sqrt_eta[i]) <= std::abs(-s - ref.sqrt_eta[i]) ? s : -s;
  }
}

// eta_j as a function of the flat point, labels matched to ref
VectorXcd eta_at(const FrobeniusPoint& base, const CanonicalChart& ref,
                 const ProbePolicy& policy, const VectorXcd& x) {
  FrobeniusPoint p = build_point(base.field, x);
  CanonicalChart c = split_core(p, policy);
  match_to(c, ref);
  return c.eta;
}

void fill_gamma(const FrobeniusPoint& p, CanonicalChart& chart,
                const ProbePolicy& policy) {
  const int n = chart.dim();
  const double h = policy.fd_step * point_scale(p.x);
  MatrixXcd etader(n, n);  // etader(i,j) = e_i eta_j
  parallel_for(n, [&](int i) {
    VectorXcd dir = chart.frame.col(i);
    auto f = [&](const VectorXcd& xx) { return eta_at(p, chart, policy, xx); };
    VectorXcd d = richardson_dir(f, p.x, dir, h);
    etader.row(i) = d.transpose();
  });
  chart.gamma = MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        chart.gamma(i, j) =
            etader(i, j) / (2.0 * chart.sqrt_eta[i] * chart.sqrt_eta[j]);
}

}  // namespace

MatrixXcd CanonicalChart::normalized_frame() const {
  MatrixXcd f = frame;
  for (int i = 0; i < dim(); ++i) f.col(i) /= sqrt_eta[i];
  return f;
}

CanonicalChart semisimple_split(const FrobeniusPoint& p,
                                const ProbePolicy& policy) {
  CanonicalChart chart = split_core(p, policy);
  if (policy.with_gamma) fill_gamma(p, chart, policy);
  return chart;
}

CanonicalChart matched_chart(const FrobeniusPoint& p, const CanonicalChart& ref,
                             const ProbePolicy& policy) {
  CanonicalChart chart = split_core(p, policy);
  match_to(chart, ref);
  if (policy.with_gamma) fill_gamma(p, chart, policy);
  return chart;
}

MatrixXcd flat_u_operator(const FrobeniusPoint& p) {
  const EulerData* eu = p.euler();
  if (!eu) fail(ErrorKind::InvalidParameter, "U operator needs Euler data");
  return p.mult_by(eu->at(p.x));
}

MatrixXcd flat_v_operator(const FrobeniusPoint& p) {
  const EulerData* eu = p.euler();
  if (!eu) fail(ErrorKind::InvalidParameter, "V operator needs Euler data");
  return eu->jac - 0.5 * eu->D * MatrixXcd::Identity(p.dim(), p.dim());
}

OperatorPair uv_operators(const FrobeniusPoint& p,
                          const CanonicalChart& chart) {
  for (int i = 0; i < chart.dim(); ++i)
    if (std::abs(chart.eta[i]) < 1e-13 * point_scale(p.x))
      fail(ErrorKind::DegenerateFrame,
           "eta_" + std::to_string(i) + " vanishes");
  MatrixXcd F = chart.normalized_frame();
  Eigen::PartialPivLU<MatrixXcd> lu(F);
  OperatorPair op;
  op.U = lu.solve(flat_u_operator(p) * F);
  op.V = lu.solve(flat_v_operator(p) * F);
  return op;
}

MatrixXcd v_from_gamma(const CanonicalChart& chart) {
  const int n = chart.dim();
  MatrixXcd v = MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) v(j, i) = (chart.u[j] - chart.u[i]) * chart.gamma(i, j);
  return v;
}

ConnectionCoefficients connection_coefficients(const FrobeniusPoint& p,
                                               ConnectionKind kind, cplx lambda,
                                               double s, double guard) {
  const int n = p.dim();
  ConnectionCoefficients cc;
  cc.coeff.resize(n);
  switch (kind) {
    case ConnectionKind::First: {
      for (int a = 0; a < n; ++a) cc.coeff[a] = lambda * p.mult[a];
      cc.has_lambda_dir = false;
      break;
    }
    case ConnectionKind::Extended: {
      const EulerData* eu = p.euler();
      if (!eu) fail(ErrorKind::InvalidParameter, "extended connection needs Euler data");
      if (std::abs(lambda) < guard)
        fail(ErrorKind::PoleProximity, "lambda too close to 0");
      for (int a = 0; a < n; ++a) cc.coeff[a] = lambda * p.mult[a];
      MatrixXcd V = flat_v_operator(p);
      cc.lambda_dir =
          (flat_u_operator(p) +
           (V + 0.5 * eu->D * MatrixXcd::Identity(n, n)) / lambda) /
          eu->d0;
      cc.has_lambda_dir = true;
      break;
    }
    case ConnectionKind::Second:
    case ConnectionKind::Deformed: {
      double shift = 0.5 + (kind == ConnectionKind::Deformed ? s : 0.0);
      MatrixXcd U = flat_u_operator(p);
      Eigen::ComplexEigenSolver<MatrixXcd> es(U);
      for (int i = 0; i < n; ++i)
        if (std::abs(es.eigenvalues()[i] - lambda) < guard)
          fail(ErrorKind::PoleProximity,
               "lambda collides with a canonical value");
      MatrixXcd res = (U - lambda * MatrixXcd::Identity(n, n)).partialPivLu().inverse();
      MatrixXcd C = flat_v_operator(p) + shift * MatrixXcd::Identity(n, n);
      for (int a = 0; a < n; ++a) cc.coeff[a] = -C * res * p.mult[a];
      cc.lambda_dir = C * res;
      cc.has_lambda_dir = true;
      break;
    }
  }
  return cc;
}

ConnectionReport connection_residual(const FrobeniusPoint& p,
                                     ConnectionKind kind,
                                     const std::vector<cplx>& lambdas,
                                     double fd_step, double s, double guard) {
  const int n = p.dim();
  const double h =
      (fd_step > 0 ? fd_step : 1e-5) * point_scale(p.x);

  auto coeffs_at = [&](const VectorXcd& x, cplx lam) {
    FrobeniusPoint q = build_point(p.field, x);
    return connection_coefficients(q, kind, lam, s, guard);
  };

  ConnectionReport rep;
  if (kind == ConnectionKind::First) {
    if (lambdas.size() < 3)
      fail(ErrorKind::InvalidParameter, "need three lambda samples");
    // curvature at three lambdas, then split R0 + lambda R1 + lambda^2 R2
    std::vector<std::vector<MatrixXcd>> curv;
    for (cplx lam : lambdas) {
      std::vector<MatrixXcd> r;
      std::vector<std::vector<MatrixXcd>> dcoeff(n);
      for (int a = 0; a < n; ++a) {
        VectorXcd dir = VectorXcd::Zero(n);
        dir[a] = 1.0;
        auto f = [&](const VectorXcd& xx) {
          FrobeniusPoint q = build_point(p.field, xx);
          MatrixXcd m = MatrixXcd::Zero(n, n * n);
          auto c = connection_coefficients(q, kind, lam, s, guard);
          for (int b = 0; b < n; ++b) m.block(0, b * n, n, n) = c.coeff[b];
          return m;
        };
        MatrixXcd d = richardson_dir(f, p.x, dir, h);
        dcoeff[a].resize(n);
        for (int b = 0; b < n; ++b) dcoeff[a][b] = d.block(0, b * n, n, n);
      }
      auto base = connection_coefficients(p, kind, lam, s, guard);
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          r.push_back(dcoeff[a][b] - dcoeff[b][a] +
                      base.coeff[a] * base.coeff[b] -
                      base.coeff[b] * base.coeff[a]);
      curv.push_back(std::move(r));
    }
    // solve the 3x3 Vandermonde entrywise
    Eigen::Matrix3cd Vd;
    for (int i = 0; i < 3; ++i) {
      Vd(i, 0) = 1.0;
      Vd(i, 1) = lambdas[i];
      Vd(i, 2) = lambdas[i] * lambdas[i];
    }
    Eigen::PartialPivLU<Eigen::Matrix3cd> lu(Vd);
    for (size_t k = 0; k < curv[0].size(); ++k) {
      MatrixXcd R0 = MatrixXcd::Zero(n, n), R1 = R0, R2 = R0;
      for (int ii = 0; ii < n; ++ii)
        for (int jj = 0; jj < n; ++jj) {
          Eigen::Vector3cd y(curv[0][k](ii, jj), curv[1][k](ii, jj),
                             curv[2][k](ii, jj));
          Eigen::Vector3cd c = lu.solve(y);
          R0(ii, jj) = c[0];
          R1(ii, jj) = c[1];
          R2(ii, jj) = c[2];
        }
      rep.r0 = std::max(rep.r0, mat_norm(R0));
      rep.r1 = std::max(rep.r1, mat_norm(R1));
      rep.r2 = std::max(rep.r2, mat_norm(R2));
    }
    return rep;
  }

  for (cplx lam : lambdas) {
    auto base = coeffs_at(p.x, lam);
    // x-derivatives of all coefficient matrices at fixed lambda
    std::vector<std::vector<MatrixXcd>> dcoeff(n);
    std::vector<MatrixXcd> dlamdir(n);
    for (int a = 0; a < n; ++a) {
      VectorXcd dir = VectorXcd::Zero(n);
      dir[a] = 1.0;
      auto f = [&](const VectorXcd& xx) {
        auto c = coeffs_at(xx, lam);
        MatrixXcd m = MatrixXcd::Zero(n, n * (n + 1));
        for (int b = 0; b < n; ++b) m.block(0, b * n, n, n) = c.coeff[b];
        m.block(0, n * n, n, n) = c.lambda_dir;
        return m;
      };
      MatrixXcd d = richardson_dir(f, p.x, dir, h);
      dcoeff[a].resize(n);
      for (int b = 0; b < n; ++b) dcoeff[a][b] = d.block(0, b * n, n, n);
      dlamdir[a] = d.block(0, n * n, n, n);
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        rep.base = std::max(
            rep.base, mat_norm(dcoeff[a][b] - dcoeff[b][a] +
                               base.coeff[a] * base.coeff[b] -
                               base.coeff[b] * base.coeff[a]));
    // lambda-derivative of the x-direction coefficients, analytic via a small
    // complex-step in lambda-free form is unavailable; use central difference
    double hl = 1e-5 * std::max(1.0, std::abs(lam));
    auto cplus = coeffs_at(p.x, lam + hl);
    auto cminus = coeffs_at(p.x, lam - hl);
    auto cplus2 = coeffs_at(p.x, lam + hl / 2.0);
    auto cminus2 = coeffs_at(p.x, lam - hl / 2.0);
    for (int a = 0; a < n; ++a) {
      MatrixXcd d1 = (cplus.coeff[a] - cminus.coeff[a]) / (2.0 * hl);
      MatrixXcd d2 = (cplus2.coeff[a] - cminus2.coeff[a]) / hl;
      MatrixXcd dlam_coeff = (4.0 * d2 - d1) / 3.0;
      rep.mixed = std::max(
          rep.mixed, mat_norm(dlamdir[a] - dlam_coeff +
                              base.coeff[a] * base.lambda_dir -
                              base.lambda_dir * base.coeff[a]));
    }
  }
  return rep;
}

DarbouxReport darboux_egoroff_residual(const FrobeniusPoint& p,
                                       const CanonicalChart& chart,
                                       double step) {
  const int n = chart.dim();
  ProbePolicy policy;
  const double h = step * point_scale(p.x);

  // e_k gamma_ij for all k via matched full charts
  std::vector<MatrixXcd> dgamma(n);
  parallel_for(n, [&](int k) {
    VectorXcd dir = chart.frame.col(k);
    auto gamma_of = [&](const VectorXcd& xx) {
      FrobeniusPoint q = build_point(p.field, xx);
      return matched_chart(q, chart, policy).gamma;
    };
    dgamma[k] = ((gamma_of(p.x + h * dir) - gamma_of(p.x - h * dir)) / (2.0 * h))
                    .eval();
  });

  DarbouxReport rep;
  rep.de_closed_vacuous = n < 3;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      cplx esum = 0, usum = 0;
      for (int k = 0; k < n; ++k) {
        esum += dgamma[k](i, j);
        usum += chart.u[k] * dgamma[k](i, j);
        if (k != i && k != j)
          rep.de_closed =
              std::max(rep.de_closed, std::abs(dgamma[k](i, j) -
                                               chart.gamma(i, k) *
                                                   chart.gamma(k, j)));
      }
      rep.de_identity = std::max(rep.de_identity, std::abs(esum));
      rep.de_euler = std::max(rep.de_euler, std::abs(usum + chart.gamma(i, j)));
    }
  return rep;
}

EulerReport euler_check(const FrobeniusPoint& p) {
  const EulerData* eu = p.euler();
  if (!eu) fail(ErrorKind::InvalidParameter, "euler_check needs Euler data");
  const int n = p.dim();
  EulerReport rep;

  rep.conformal = mat_norm(eu->jac.transpose() * p.g + p.g * eu->jac -
                           eu->D * p.g);

  // directional derivatives along E of the structure tensor and of Phi
  VectorXcd Evec = eu->at(p.x);
  double h = 1e-5 * point_scale(p.x) / std::max(1.0, Evec.cwiseAbs().maxCoeff());
  auto multmat = [&](const VectorXcd& xx) {
    FrobeniusPoint q = build_point(p.field, xx);
    MatrixXcd m(n, n * n);
    for (int a = 0; a < n; ++a) m.block(0, a * n, n, n) = q.mult[a];
    return m;
  };
  MatrixXcd dmult = richardson_dir(multmat, p.x, Evec, h);
  for (int a = 0; a < n; ++a) {
    MatrixXcd EA = dmult.block(0, a * n, n, n);
    // [E, X o Y] - [E,X] o Y - X o [E,Y] - d0 X o Y at X = d_a, col Y = d_b
    MatrixXcd res = EA - eu->jac * p.mult[a] + p.mult[a] * eu->jac -
                    eu->d0 * p.mult[a];
    for (int c = 0; c < n; ++c) res += eu->jac(c, a) * p.mult[c];
    rep.product = std::max(rep.product, mat_norm(res));
  }

  auto phimat = [&](const VectorXcd& xx) {
    FrobeniusPoint q = build_point(p.field, xx);
    MatrixXcd m(n, n * n);
    for (int a = 0; a < n; ++a) m.block(0, a * n, n, n) = q.phi[a];
    return m;
  };
  MatrixXcd dphi = richardson_dir(phimat, p.x, Evec, h);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        cplx r = dphi.block(0, a * n, n, n)(b, c) -
                 (eu->d0 + eu->D) * p.phi[a](b, c);
        for (int e = 0; e < n; ++e)
          r += eu->jac(e, a) * p.phi[e](b, c) + eu->jac(e, b) * p.phi[a](e, c) +
               eu->jac(e, c) * p.phi[a](b, e);
        rep.potential = std::max(rep.potential, std::abs(r));
      }

  // spectrum pairing (1.18) when ad E is diagonal on flat fields
  bool diag = true;
  for (int a = 0; a < n && diag; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && std::abs(eu->jac(a, b)) > 1e-13) {
        diag = false;
        break;
      }
  if (diag) {
    rep.pairing_checked = true;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        rep.pairing = std::max(
            rep.pairing,
            std::abs((eu->jac(a, a) + eu->jac(b, b) - eu->D) * p.g(a, b)));
  }
  return rep;
}

std::string chart_to_json(const CanonicalChart& chart) {
  using nlohmann::json;
  auto c2j = [](cplx z) { return json::array({z.real(), z.imag()}); };
  json j;
  j["u"] = json::array();
  j["eta"] = json::array();
  j["branches"] = json::array();
  for (int i = 0; i < chart.dim(); ++i) {
    j["u"].push_back(c2j(chart.u[i]));
    j["eta"].push_back(c2j(chart.eta[i]));
    j["branches"].push_back(c2j(chart.sqrt_eta[i]));
  }
  j["gamma"] = json::array();
  j["frame"] = json::array();
  for (int i = 0; i < chart.dim(); ++i) {
    json rowg = json::array(), rowf = json::array();
    for (int k = 0; k < chart.dim(); ++k) {
      rowg.push_back(c2j(chart.gamma(i, k)));
      rowf.push_back(c2j(chart.frame(i, k)));
    }
    j["gamma"].push_back(rowg);
    j["frame"].push_back(rowf);
  }
  return j.dump(2);
}

}  // namespace frob
