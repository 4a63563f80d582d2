#include "frob/schlesinger.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace frob {

namespace {

double mat_norm(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// minimum of |a + tau b| over tau in [0,1]
double segment_min_abs(cplx a, cplx b) {
  double bb = std::norm(b);
  if (bb == 0) return std::abs(a);
  double tau = -(a.real() * b.real() + a.imag() * b.imag()) / bb;
  tau = std::clamp(tau, 0.0, 1.0);
  return std::abs(a + tau * b);
}

MatrixXcd commutator(const MatrixXcd& x, const MatrixXcd& y) {
  return x * y - y * x;
}

// g-orthogonal rank-1 projector onto span(t)
MatrixXcd g_projector(const VectorXcd& t, const MatrixXcd& g) {
  cplx denom = t.transpose() * g * t;
  if (std::abs(denom) < 1e-300)
    fail(ErrorKind::DegenerateFrame, "isotropic kernel line in projector");
  return (t * (g * t).transpose()) / denom;
}

}  // namespace

MatrixXcd SchlesingerSystem::V() const {
  return -W - 0.5 * MatrixXcd::Identity(m, m);
}

double SchlesingerSystem::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      gap = std::min(gap, std::abs(u[i] - u[j]));
  return gap;
}

void SchlesingerSystem::validate(double guard) const {
  if (m < 2) fail(ErrorKind::InvalidData, "need m >= 2");
  if (int(u.size()) != m || int(A.size()) != m)
    fail(ErrorKind::InvalidData, "size mismatch in system");
  if (min_gap() <= guard)
    fail(ErrorKind::PoleProximity, "coincident positions u^i = u^j");
}

void SpecialInitData::validate(double tol) const {
  if (m < 2) fail(ErrorKind::InvalidData, "need m >= 2");
  if (int(eta.size()) != m || v.rows() != m || v.cols() != m)
    fail(ErrorKind::InvalidData, "size mismatch in initial data");
  cplx sum = eta.sum();
  if (std::abs(sum) > tol) fail(ErrorKind::InvalidData, "eta must sum to zero");
  for (int i = 0; i < m; ++i)
    if (std::abs(eta[i]) < tol)
      fail(ErrorKind::InvalidData, "eta entries must be nonzero");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (std::abs(v(i, j) * eta[j] + v(j, i) * eta[i]) > tol)
        fail(ErrorKind::InvalidData, "v_ij eta_j + v_ji eta_i != 0");
  cplx want = cplx(1.0 - D / 2.0, 0.0);
  for (int j = 0; j < m; ++j) {
    cplx col = 0;
    for (int i = 0; i < m; ++i) col += v(i, j);
    if (std::abs(col - want) > tol)
      fail(ErrorKind::InvalidData, "column sums of v must equal 1 - D/2");
  }
}

SpecialInitData sample_initial_space(int m, double D, const VectorXcd& eta,
                                     const std::vector<cplx>& upper_w) {
  if (m < 2) fail(ErrorKind::InvalidData, "need m >= 2");
  if (int(eta.size()) != m) fail(ErrorKind::InvalidData, "eta size mismatch");
  if (std::abs(eta.sum()) > 1e-12)
    fail(ErrorKind::InvalidData, "eta must sum to zero");
  for (int i = 0; i < m; ++i)
    if (std::abs(eta[i]) < 1e-14)
      fail(ErrorKind::InvalidData, "eta entries must be nonzero");
  size_t nfree = size_t((m - 1) * (m - 2) / 2);
  if (upper_w.size() != nfree)
    fail(ErrorKind::InvalidData, "expected (m-1)(m-2)/2 free choices");

  MatrixXcd w = MatrixXcd::Zero(m, m);
  size_t k = 0;
  for (int i = 0; i < m - 1; ++i)
    for (int j = i + 1; j < m - 1; ++j) {
      w(i, j) = upper_w[k++];
      w(j, i) = -w(i, j);
    }
  cplx factor = cplx(1.0 - D / 2.0, 0.0);
  for (int kk = 0; kk < m - 1; ++kk) {
    cplx sum = 0;
    for (int i = 0; i < m - 1; ++i) sum += w(i, kk);
    w(m - 1, kk) = eta[kk] * factor - sum;
    w(kk, m - 1) = -w(m - 1, kk);
  }
  // the remaining equation holds automatically; verified here
  cplx last = 0;
  for (int i = 0; i < m; ++i) last += w(i, m - 1);
  if (std::abs(last - eta[m - 1] * factor) > 1e-9 * (1.0 + std::abs(factor)))
    fail(ErrorKind::Internal, "last column identity failed");

  SpecialInitData init;
  init.m = m;
  init.D = D;
  init.eta = eta;
  init.v = MatrixXcd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) init.v(i, j) = w(i, j) / eta[j];
  init.validate(1e-9);
  return init;
}

SchlesingerSystem build_special(const SpecialInitData& init) {
  init.validate();
  const int m = init.m;
  SchlesingerSystem s;
  s.m = m;
  s.u = VectorXcd::Zero(m);  // caller sets positions
  s.g = MatrixXcd::Zero(m, m);
  for (int i = 0; i < m; ++i) s.g(i, i) = init.eta[i];
  // V acts by e_i -> sum_j v_ij e_j, so as a matrix column i is row i of v
  MatrixXcd V = init.v.transpose();
  MatrixXcd I = MatrixXcd::Identity(m, m);
  s.A.resize(m);
  for (int j = 0; j < m; ++j) {
    MatrixXcd P = MatrixXcd::Zero(m, m);
    P(j, j) = 1.0;
    s.A[j] = -(V + 0.5 * I) * P;
  }
  s.W = -V - 0.5 * I;
  s.e = VectorXcd::Ones(m);
  s.D = init.D;
  s.special_built = true;
  s.has_identity = true;
  return s;
}

std::vector<MatrixXcd> schlesinger_rhs(const SchlesingerSystem& s,
                                       const VectorXcd& direction,
                                       double guard) {
  const int m = s.m;
  std::vector<MatrixXcd> dA(m, MatrixXcd::Zero(m, m));
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (i == j) continue;
      cplx denom = s.u[i] - s.u[j];
      if (std::abs(denom) <= guard)
        fail(ErrorKind::PoleProximity, "u gap below guard band");
      dA[j] += commutator(s.A[i], s.A[j]) *
               ((direction[i] - direction[j]) / denom);
    }
  return dA;
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640,
                 E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

struct SegmentOde {
  const SchlesingerSystem* s;
  VectorXcd u0, delta;
  double guard;
  int m;

  // state: m matrices (m*m each) then logtau. The stored A_j are residues of
  // the logarithmic connection d + sum A_i dlog(lambda - u^i); their
  // isomonodromic flow is dA_j = -sum [A_i,A_j] dlog(u^i - u^j), so that
  // -A_j follows the textbook orientation computed by schlesinger_rhs.
  VectorXcd rhs(double tau, const VectorXcd& y) const {
    VectorXcd out = VectorXcd::Zero(y.size());
    VectorXcd u = u0 + tau * delta;
    auto Aof = [&](int j) {
      return Eigen::Map<const MatrixXcd>(y.data() + j * m * m, m, m);
    };
    for (int j = 0; j < m; ++j) {
      MatrixXcd dAj = MatrixXcd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        if (i == j) continue;
        cplx denom = u[i] - u[j];
        if (std::abs(denom) <= guard)
          fail(ErrorKind::PoleProximity, "pole guard band hit during step");
        dAj += (Aof(j) * Aof(i) - Aof(i) * Aof(j)) *
               ((delta[i] - delta[j]) / denom);
      }
      Eigen::Map<MatrixXcd>(out.data() + j * m * m, m, m) = dAj;
    }
    cplx dtau = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        dtau += (Aof(i) * Aof(j)).trace() * (delta[i] - delta[j]) /
                (u[i] - u[j]);
    out[y.size() - 1] = dtau;
    return out;
  }
};

}  // namespace

Trajectory integrate(SchlesingerSystem& s, const IntegrationPath& path,
                     const IntegrateOptions& opts) {
  s.validate();
  if (path.waypoints.size() < 2)
    fail(ErrorKind::InvalidData, "path needs at least two waypoints");
  if ((path.waypoints.front() - s.u).cwiseAbs().maxCoeff() > 1e-9)
    fail(ErrorKind::InvalidData, "path must start at the current positions");
  const int m = s.m;
  const double guard = path.guard_rel * s.min_gap();

  Trajectory traj;
  const int nst = m * m * m;
  VectorXcd y(nst + 1);
  for (int j = 0; j < m; ++j)
    Eigen::Map<MatrixXcd>(y.data() + j * m * m, m, m) = s.A[j];
  y[nst] = 0.0;

  auto monitors_of = [&](const VectorXcd& yy, StepRecord& rec) {
    MatrixXcd sum = MatrixXcd::Zero(m, m);
    rec.rank1_defect = 0;
    rec.quad_defect = 0;
    for (int j = 0; j < m; ++j) {
      MatrixXcd Aj = Eigen::Map<const MatrixXcd>(yy.data() + j * m * m, m, m);
      sum += Aj;
      if (s.special_built) {
        Eigen::JacobiSVD<MatrixXcd> svd(Aj);
        if (m >= 2) rec.rank1_defect = std::max(rec.rank1_defect, svd.singularValues()[1]);
        rec.quad_defect =
            std::max(rec.quad_defect, mat_norm(Aj * Aj + 0.5 * Aj));
      }
    }
    rec.conservation = mat_norm(sum - s.W);
  };

  auto record_state = [&](double tglobal, const VectorXcd& uu,
                          const VectorXcd& yy) {
    StepRecord rec;
    rec.t = tglobal;
    rec.u = uu;
    monitors_of(yy, rec);
    traj.max_conservation = std::max(traj.max_conservation, rec.conservation);
    traj.max_rank1_defect = std::max(traj.max_rank1_defect, rec.rank1_defect);
    traj.max_quad_defect = std::max(traj.max_quad_defect, rec.quad_defect);
    if (opts.check_monitors) {
      if (rec.conservation > opts.monitor_tol)
        fail(ErrorKind::MonitorBreach, "sum A_j drifted from W by " +
                                           std::to_string(rec.conservation));
      if (s.special_built &&
          std::max(rec.rank1_defect, rec.quad_defect) > opts.monitor_tol)
        fail(ErrorKind::MonitorBreach, "special-solution monitor breach");
    }
    if (opts.record) {
      rec.A.resize(m);
      for (int j = 0; j < m; ++j)
        rec.A[j] = Eigen::Map<const MatrixXcd>(yy.data() + j * m * m, m, m);
      traj.steps.push_back(std::move(rec));
    }
  };

  record_state(0.0, s.u, y);

  for (size_t seg = 0; seg + 1 < path.waypoints.size(); ++seg) {
    SegmentOde ode{&s, path.waypoints[seg],
                   path.waypoints[seg + 1] - path.waypoints[seg], guard, m};
    // pole precheck on the straight segment
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (segment_min_abs(ode.u0[i] - ode.u0[j],
                            ode.delta[i] - ode.delta[j]) <= guard)
          fail(ErrorKind::PoleProximity, "path segment enters guard band");

    double tau0 = 0.0;
    double h = opts.fixed_step ? opts.fixed_h : opts.h0;
    while (tau0 < 1.0) {
      h = std::min(h, 1.0 - tau0);
      // one embedded Dormand-Prince step
      VectorXcd k1 = ode.rhs(tau0, y);
      VectorXcd k2 = ode.rhs(tau0 + h / 5.0, y + h * (A21 * k1));
      VectorXcd k3 = ode.rhs(tau0 + 3.0 * h / 10.0, y + h * (A31 * k1 + A32 * k2));
      VectorXcd k4 = ode.rhs(tau0 + 4.0 * h / 5.0,
                             y + h * (A41 * k1 + A42 * k2 + A43 * k3));
      VectorXcd k5 = ode.rhs(tau0 + 8.0 * h / 9.0,
                             y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
      VectorXcd k6 = ode.rhs(
          tau0 + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
      VectorXcd y5 =
          y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
      VectorXcd k7 = ode.rhs(tau0 + h, y5);
      VectorXcd errv = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 +
                            E7 * k7);
      double err = 0;
      for (int i = 0; i < errv.size(); ++i) {
        double scale = opts.atol + opts.rtol * std::max(std::abs(y[i]),
                                                        std::abs(y5[i]));
        err = std::max(err, std::abs(errv[i]) / scale);
      }
      if (opts.fixed_step || err <= 1.0) {
        tau0 += h;
        y = y5;
        record_state(double(seg) + tau0, ode.u0 + tau0 * ode.delta, y);
        if (!opts.fixed_step) {
          double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
          h *= std::clamp(fac, 0.2, 5.0);
        }
      } else {
        double fac = 0.9 * std::pow(err, -0.2);
        h *= std::clamp(fac, 0.1, 1.0);
      }
      if (h < opts.hmin) {
        double anorm = 0;
        for (int j = 0; j < m; ++j)
          anorm = std::max(anorm, mat_norm(Eigen::Map<const MatrixXcd>(
                                      y.data() + j * m * m, m, m)));
        fail(ErrorKind::StepUnderflow,
             "step size collapsed (suspected theta-divisor crossing), |A| ~ " +
                 std::to_string(anorm));
      }
    }
  }

  for (int j = 0; j < m; ++j)
    s.A[j] = Eigen::Map<const MatrixXcd>(y.data() + j * m * m, m, m);
  s.u = path.waypoints.back();
  traj.logtau = y[nst];
  return traj;
}

TauReport tau(const SchlesingerSystem& s, const IntegrationPath& path,
              const IntegrateOptions& opts) {
  SchlesingerSystem copy = s;
  Trajectory traj = integrate(copy, path, opts);
  TauReport rep;
  rep.logtau = traj.logtau;
  rep.tau = std::exp(traj.logtau);
  auto omega_of = [](const SchlesingerSystem& sys) {
    VectorXcd w = VectorXcd::Zero(sys.m);
    for (int k = 0; k < sys.m; ++k)
      for (int j = 0; j < sys.m; ++j) {
        if (j == k) continue;
        w[k] += (sys.A[k] * sys.A[j]).trace() / (sys.u[k] - sys.u[j]);
      }
    return w;
  };
  rep.omega_start = omega_of(s);
  rep.omega_end = omega_of(copy);

  // closedness of omega at the start point: d_l omega_k - d_k omega_l by
  // central differences of short re-integrations
  const int m = s.m;
  const double h = 1e-5 * std::max(1.0, s.min_gap());
  auto omega_at = [&](const VectorXcd& uu) {
    SchlesingerSystem sys = s;
    if ((uu - s.u).cwiseAbs().maxCoeff() > 0) {
      IntegrationPath p2;
      p2.waypoints = {s.u, uu};
      p2.guard_rel = path.guard_rel;
      IntegrateOptions o2 = opts;
      o2.record = false;
      integrate(sys, p2, o2);
    }
    VectorXcd w = VectorXcd::Zero(m);
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j) {
        if (j == k) continue;
        w[k] += (sys.A[k] * sys.A[j]).trace() / (sys.u[k] - sys.u[j]);
      }
    return w;
  };
  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l) {
      VectorXcd ek = VectorXcd::Zero(m), el = VectorXcd::Zero(m);
      ek[k] = 1.0;
      el[l] = 1.0;
      VectorXcd dk = (omega_at(s.u + h * el) - omega_at(s.u - h * el)) / (2 * h);
      VectorXcd dl = (omega_at(s.u + h * ek) - omega_at(s.u - h * ek)) / (2 * h);
      rep.closedness = std::max(rep.closedness, std::abs(dk[k] - dl[l]));
    }
  return rep;
}

ClassificationReport check_solution(const SchlesingerSystem& s, double tol) {
  const int m = s.m;
  ClassificationReport rep;
  rep.P.resize(m);

  // kernel-intersection construction of the projector family
  bool ok = true;
  double resid = 0;
  for (int j = 0; j < m && ok; ++j) {
    MatrixXcd stack(m * (m - 1), m);
    int row = 0;
    for (int i = 0; i < m; ++i) {
      if (i == j) continue;
      stack.block(row, 0, m, m) = s.A[i];
      row += m;
    }
    Eigen::JacobiSVD<MatrixXcd> svd(stack, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double scale = std::max(1.0, sv[0]);
    if (sv[m - 1] > tol * scale || (m >= 2 && sv[m - 2] <= tol * scale)) {
      ok = false;  // intersection of kernels is not one-dimensional
      resid = std::max(resid, sv[m - 1] / scale);
      break;
    }
    VectorXcd t = svd.matrixV().col(m - 1);
    rep.P[j] = g_projector(t, s.g);
  }
  if (ok) {
    // pairwise g-orthogonality, A_j = W P_j, A_j nowhere zero (here: at u)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        resid = std::max(resid, mat_norm(rep.P[i] * rep.P[j]));
      }
    MatrixXcd sump = MatrixXcd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      sump += rep.P[j];
      resid = std::max(resid, mat_norm(s.A[j] - s.W * rep.P[j]));
      if (mat_norm(s.A[j]) < tol) ok = false;  // vanishing residue matrix
    }
    resid = std::max(resid, mat_norm(sump - MatrixXcd::Identity(m, m)));
    // metric side: V = -W - 1/2 must be g-skew
    MatrixXcd V = s.V();
    resid = std::max(resid, mat_norm(s.g * V + V.transpose() * s.g));
  }
  rep.special_residual = resid;
  rep.is_special = ok && resid <= tol;

  if (rep.is_special) {
    Eigen::JacobiSVD<MatrixXcd> wsvd(s.W);
    double cond = wsvd.singularValues()[0] /
                  std::max(wsvd.singularValues()[m - 1], 1e-300);
    if (wsvd.singularValues()[m - 1] > tol && cond < 1e6) {
      rep.strict_route = "w-invertible";
      rep.strict_residual = 0;
      rep.is_strict_special = true;
    } else {
      rep.strict_route = "finite-difference";
      // dP_j against the strictness equation, via short re-integrations
      const double h = 1e-6 * s.min_gap();
      auto projs_at = [&](const VectorXcd& uu) {
        SchlesingerSystem sys = s;
        IntegrationPath p2;
        p2.waypoints = {s.u, uu};
        integrate(sys, p2, IntegrateOptions{});
        std::vector<MatrixXcd> P(m);
        for (int j = 0; j < m; ++j) {
          MatrixXcd stack(m * (m - 1), m);
          int row = 0;
          for (int i = 0; i < m; ++i) {
            if (i == j) continue;
            stack.block(row, 0, m, m) = sys.A[i];
            row += m;
          }
          Eigen::JacobiSVD<MatrixXcd> svd(stack, Eigen::ComputeFullV);
          P[j] = g_projector(svd.matrixV().col(m - 1), s.g);
        }
        return P;
      };
      double worst = 0;
      for (int k = 0; k < m; ++k) {
        VectorXcd dir = VectorXcd::Zero(m);
        dir[k] = 1.0;
        auto Pp = projs_at(s.u + h * dir);
        auto Pm = projs_at(s.u - h * dir);
        for (int j = 0; j < m; ++j) {
          MatrixXcd dPj = (Pp[j] - Pm[j]) / (2.0 * h);
          // the d+omega orientation of the flow negates the textbook
          // projector equation
          MatrixXcd want = MatrixXcd::Zero(m, m);
          if (k != j) {
            want = -(rep.P[k] * s.W * rep.P[j] - rep.P[j] * s.W * rep.P[k]) /
                   (s.u[k] - s.u[j]);
          } else {
            for (int i = 0; i < m; ++i) {
              if (i == j) continue;
              want += (rep.P[i] * s.W * rep.P[j] - rep.P[j] * s.W * rep.P[i]) /
                      (s.u[i] - s.u[j]);
            }
          }
          worst = std::max(worst, mat_norm(dPj - want));
        }
      }
      rep.strict_residual = worst;
      rep.is_strict_special = worst <= std::max(tol, 1e-4);
    }

    if (s.e.size() == s.u.size()) {
      MatrixXcd V = s.V();
      cplx lam = s.e.dot(V * s.e) / s.e.dot(s.e);
      rep.weight_D = 2.0 * (1.0 - lam.real());
      double r = (V * s.e - lam * s.e).cwiseAbs().maxCoeff();
      double minP = std::numeric_limits<double>::infinity();
      for (int j = 0; j < m; ++j)
        minP = std::min(minP, (rep.P[j] * s.e).cwiseAbs().maxCoeff());
      rep.identity_residual = r;
      rep.has_identity = r <= tol && minP > tol;
    }
  }
  return rep;
}

ReconstructionReport reconstruct_frobenius(const SchlesingerSystem& s,
                                           double fd_rel) {
  const int m = s.m;
  if (s.e.size() != s.u.size())
    fail(ErrorKind::InvalidData, "reconstruction needs an identity vector");

  // t-shift when the weight is degenerate or W is non-invertible
  double t = 0.0;
  {
    bool need = std::abs(1.0 - s.D) < 1e-9;
    Eigen::JacobiSVD<MatrixXcd> wsvd(s.W);
    double cond = wsvd.singularValues()[0] /
                  std::max(wsvd.singularValues()[m - 1], 1e-300);
    if (cond >= 1e6) need = true;
    if (need) {
      for (double cand : {1.0, -1.0, 2.0, -2.0, 3.0, -3.0}) {
        MatrixXcd Wt = s.W + cand * MatrixXcd::Identity(m, m);
        Eigen::JacobiSVD<MatrixXcd> svd(Wt);
        double c = svd.singularValues()[0] /
                   std::max(svd.singularValues()[m - 1], 1e-300);
        if (std::abs(0.5 * (1.0 - s.D) + cand) > 1e-9 && c < 1e6) {
          t = cand;
          break;
        }
      }
      if (t == 0.0)
        fail(ErrorKind::DegenerateWeight, "no usable t-shift found");
    }
  }

  auto eta_of = [&](const SchlesingerSystem& sys) {
    auto cls = check_solution(sys, 1e-6);
    if (!cls.is_special)
      fail(ErrorKind::InvalidData, "reconstruction expects a special solution");
    VectorXcd eta(m);
    cplx denom = cplx(0.5 * (1.0 - sys.D) + t, 0.0);
    for (int j = 0; j < m; ++j) {
      MatrixXcd At = sys.A[j] + t * cls.P[j];
      eta[j] = (s.e.transpose() * sys.g * (At * s.e)).value() / denom;
    }
    return eta;
  };

  ReconstructionReport rep;
  rep.t_shift = t;
  rep.eta = eta_of(s);

  const double h = fd_rel * s.min_gap();
  std::vector<VectorXcd> detas(m);
  for (int k = 0; k < m; ++k) {
    VectorXcd dir = VectorXcd::Zero(m);
    dir[k] = 1.0;
    auto shifted = [&](double sgn) {
      SchlesingerSystem sys = s;
      IntegrationPath p2;
      p2.waypoints = {s.u, s.u + sgn * h * dir};
      integrate(sys, p2, IntegrateOptions{});
      return eta_of(sys);
    };
    detas[k] = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
  }
  rep.symmetry_residual = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      rep.symmetry_residual =
          std::max(rep.symmetry_residual, std::abs(detas[i][j] - detas[j][i]));
  rep.euler_residual = 0;
  for (int j = 0; j < m; ++j) {
    cplx val = 0;
    for (int k = 0; k < m; ++k) val += s.u[k] * detas[k][j];
    rep.euler_residual =
        std::max(rep.euler_residual, std::abs(val - (s.D - 2.0) * rep.eta[j]));
  }
  return rep;
}

}  // namespace frob
