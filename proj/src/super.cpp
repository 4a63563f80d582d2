#include "frob/super.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "frob/schlesinger.hpp"

namespace frob::super {

namespace {

// (-1)^{|f|} adjustment used when an odd object moves across the coefficient
SJ parity_flip(const SJ& f) { return f.even_part() - f.odd_part(); }

Jet jet_one(int n, int order) { return Jet::constant(1.0, n, order); }

SJ sj_scalar(int n, const Jet& j) { return SJ::scalar(n, j); }
SJ sj_theta(int n, int k, int order) {
  return SJ::theta(n, k, jet_one(n, order));
}

double value_norm(const SJ& x) { return jet_value(x).max_abs(); }

}  // namespace

SuperVec& SuperVec::operator+=(const SuperVec& o) {
  for (int a = 0; a < n(); ++a) {
    dot[a] += o.dot[a];
    undot[a] += o.undot[a];
  }
  return *this;
}
SuperVec& SuperVec::operator-=(const SuperVec& o) {
  for (int a = 0; a < n(); ++a) {
    dot[a] -= o.dot[a];
    undot[a] -= o.undot[a];
  }
  return *this;
}
double SuperVec::max_abs() const {
  double r = 0;
  for (const auto& c : dot) r = std::max(r, value_norm(c));
  for (const auto& c : undot) r = std::max(r, value_norm(c));
  return r;
}

namespace {

// shared product kernel: basis-level tables extended with the Koszul sign
// (-1)^{|Y_B| |E_A|}; slot: 0 = dotted (odd basis), 1 = undotted (even basis)
template <class Rule>
SuperVec product_impl(const SuperVec& x, const SuperVec& y, Rule&& rule) {
  if (x.n() != y.n())
    fail(ErrorKind::InvalidParameter, "basis dimension mismatch in product");
  const int n = x.n();
  SuperVec out(n);
  for (int a = 0; a < n; ++a) {
    const SJ* xs[2] = {&x.dot[a], &x.undot[a]};
    const SJ* ys[2] = {&y.dot[a], &y.undot[a]};
    for (int sx = 0; sx < 2; ++sx)
      for (int sy = 0; sy < 2; ++sy) {
        if (xs[sx]->is_zero() || ys[sy]->is_zero()) continue;
        // basis slot sx odd iff sx == 0
        SJ coeff = (sx == 0) ? *xs[sx] * parity_flip(*ys[sy])
                             : *xs[sx] * *ys[sy];
        rule(a, sx, sy, std::move(coeff), out);
      }
  }
  return out;
}

}  // namespace

SuperVec circ_product(const SuperVec& x, const SuperVec& y) {
  // dot o dot = undot, dot o undot = undot o dot = dot, undot o undot = undot
  return product_impl(x, y, [](int a, int sx, int sy, SJ c, SuperVec& out) {
    if (sx == 0 && sy == 0) out.undot[a] += c;
    else if (sx == 1 && sy == 1) out.undot[a] += c;
    else out.dot[a] += c;
  });
}

// left odd involution swapping the two summands, Pi(aX) = (-1)^{|a|} a Pi(X)
static SuperVec parity_involution(const SuperVec& x) {
  SuperVec out(x.n());
  for (int a = 0; a < x.n(); ++a) {
    out.undot[a] = parity_flip(x.dot[a]);
    out.dot[a] = parity_flip(x.undot[a]);
  }
  return out;
}

SuperVec bullet_product(const SuperVec& x, const SuperVec& y) {
  // X . Y = X o (Pi Y)
  return circ_product(x, parity_involution(y));
}

SuperVec identity_e(int n) {
  SuperVec v(n);
  for (int a = 0; a < n; ++a) v.undot[a] = sj_scalar(n, jet_one(n, 2));
  return v;
}
SuperVec identity_eps(int n) {
  SuperVec v(n);
  for (int a = 0; a < n; ++a) v.dot[a] = sj_scalar(n, jet_one(n, 2));
  return v;
}

SuperChart egoroff_chart(const PsiSpec& psi, const VectorXcd& u,
                         int jet_order) {
  if (jet_order < 1)
    fail(ErrorKind::OrderError, "charts need at least first-order jets");
  const int n = psi.n;
  SuperChart ch;
  ch.n = n;
  ch.jet_order = jet_order;
  ch.u = u;
  ch.psi = psi.eval(u, jet_order);
  if (ch.psi.parity() != -1)
    fail(ErrorKind::ParityError, "Egoroff potential must be odd");

  ch.eta_dot.reserve(n);
  ch.eta_undot.reserve(n);
  ch.sqrt_eta.reserve(n);
  for (int a = 0; a < n; ++a) {
    SJ ed = e_dot(ch.psi, a);
    if (!ed.is_zero() && ed.parity() != +1)
      fail(ErrorKind::ParityError, "eta_dot must be even");
    if (std::abs(ed.body_coeff().value()) < 1e-12)
      fail(ErrorKind::DegeneratePotential,
           "eta body vanishes at direction " + std::to_string(a));
    ch.eta_dot.push_back(ed);
    ch.eta_undot.push_back(jet_derivative(ch.psi, a));
    ch.sqrt_eta.push_back(ed.sqrt());
  }

  ch.gamma.assign(n, std::vector<SJ>(n, SJ(n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      SJ inv2 = (2.0 * (ch.sqrt_eta[a] * ch.sqrt_eta[b])).inverse();
      ch.gamma[a][b] = e_dot(ch.eta_dot[b], a) * inv2;
    }

  auto half_inv = [&](int idx) { return (2.0 * ch.eta_dot[idx]).inverse(); };

  ch.lc_dot.assign(n, std::vector<SuperVec>(n, SuperVec(n)));
  ch.lc_undot.assign(n, std::vector<SuperVec>(n, SuperVec(n)));
  ch.tn_dot.assign(n, std::vector<SuperVec>(n, SuperVec(n)));
  ch.tn_undot.assign(n, std::vector<SuperVec>(n, SuperVec(n)));

  for (int mu = 0; mu < n; ++mu)
    for (int al = 0; al < n; ++al) {
      // Levi-Civita on the odd frame
      SuperVec& d = ch.lc_dot[mu][al];
      if (mu == al) d.undot[al] += sj_scalar(n, jet_one(n, jet_order));
      d.dot[al] += e_dot(ch.eta_dot[al], mu) * half_inv(al);
      d.dot[mu] -= e_dot(ch.eta_dot[mu], al) * half_inv(mu);

      // Levi-Civita on the coordinate fields
      SuperVec& v = ch.lc_undot[mu][al];
      v.dot[al] += e_dot(ch.eta_undot[al] * half_inv(al), mu);
      v.dot[mu] += jet_derivative(ch.eta_dot[mu], al) * half_inv(mu);
      if (mu == al)
        for (int be = 0; be < n; ++be)
          v.dot[be] -= e_dot(e_dot(ch.eta_dot[mu], be) * half_inv(be), be);
      v.undot[al] += e_dot(ch.eta_dot[al], mu) * half_inv(al);
      if (mu == al) {
        v.undot[al] -= ch.eta_undot[al] * ch.eta_dot[al].inverse();
        for (int be = 0; be < n; ++be)
          v.undot[be] += e_dot(ch.eta_dot[al], be) * half_inv(be);
      }

      // the induced connection on T1 and T0
      SuperVec& t1 = ch.tn_dot[mu][al];
      if (mu == al)
        for (int be = 0; be < n; ++be)
          t1.dot[be] += e_dot(ch.eta_dot[al], be) * half_inv(be);
      t1.dot[al] += e_dot(ch.eta_dot[al], mu) * half_inv(al);
      t1.dot[mu] -= e_dot(ch.eta_dot[mu], al) * half_inv(mu);

      SuperVec& t0 = ch.tn_undot[mu][al];
      if (mu == al)
        for (int be = 0; be < n; ++be)
          t0.undot[be] += e_dot(ch.eta_dot[al], be) * half_inv(be);
      t0.undot[al] += e_dot(ch.eta_dot[al], mu) * half_inv(al);
      t0.undot[mu] -= e_dot(ch.eta_dot[mu], al) * half_inv(mu);
    }
  return ch;
}

SuperVec covariant_derivative(const SuperChart& chart, int mu,
                              const SuperVec& X, bool tilde) {
  const int n = chart.n;
  SuperVec out(n);
  const auto& tdot = tilde ? chart.tn_dot : chart.lc_dot;
  const auto& tundot = tilde ? chart.tn_undot : chart.lc_undot;
  for (int a = 0; a < n; ++a) {
    out.dot[a] += e_dot(X.dot[a], mu);
    out.undot[a] += e_dot(X.undot[a], mu);
  }
  for (int a = 0; a < n; ++a) {
    if (!X.dot[a].is_zero()) {
      SJ f = parity_flip(X.dot[a]);
      const SuperVec& gamma = tdot[mu][a];
      for (int b = 0; b < n; ++b) {
        if (!gamma.dot[b].is_zero()) out.dot[b] += f * gamma.dot[b];
        if (!gamma.undot[b].is_zero()) out.undot[b] += f * gamma.undot[b];
      }
    }
    if (!X.undot[a].is_zero()) {
      SJ f = parity_flip(X.undot[a]);
      const SuperVec& gamma = tundot[mu][a];
      for (int b = 0; b < n; ++b) {
        if (!gamma.dot[b].is_zero()) out.dot[b] += f * gamma.dot[b];
        if (!gamma.undot[b].is_zero()) out.undot[b] += f * gamma.undot[b];
      }
    }
  }
  return out;
}

namespace {

// pairings as Koszul-signed contractions against the component tables
SJ pair_g(const SuperChart& ch, const SuperVec& X, const SuperVec& Y) {
  const int n = ch.n;
  SJ out(n);
  for (int a = 0; a < n; ++a) {
    // E_A = d_a (even)
    if (!X.undot[a].is_zero()) {
      out -= X.undot[a] * Y.undot[a] * ch.eta_undot[a];
      out -= X.undot[a] * Y.dot[a] * ch.eta_dot[a];
    }
    // E_A = e_a-dot (odd): flip odd coefficient parts of Y
    if (!X.dot[a].is_zero())
      out -= X.dot[a] * parity_flip(Y.undot[a]) * ch.eta_dot[a];
  }
  return out;
}

SJ pair_h(const SuperChart& ch, const SuperVec& X, const SuperVec& Y) {
  const int n = ch.n;
  SJ out(n);
  for (int a = 0; a < n; ++a) {
    if (!X.undot[a].is_zero()) out += X.undot[a] * Y.undot[a] * ch.eta_dot[a];
    if (!X.dot[a].is_zero())
      out += X.dot[a] * parity_flip(Y.dot[a]) * ch.eta_dot[a];
  }
  return out;
}

SJ pair_gt(const SuperChart& ch, const SuperVec& X, const SuperVec& Y) {
  const int n = ch.n;
  SJ out(n);
  for (int a = 0; a < n; ++a) {
    if (!X.undot[a].is_zero()) out += X.undot[a] * Y.dot[a] * ch.eta_dot[a];
    if (!X.dot[a].is_zero())
      out += X.dot[a] * parity_flip(Y.undot[a]) * ch.eta_dot[a];
  }
  return out;
}

SuperVec basis_dot(int n, int a, int order) {
  SuperVec v(n);
  v.dot[a] = sj_scalar(n, jet_one(n, order));
  return v;
}
SuperVec basis_undot(int n, int a, int order) {
  SuperVec v(n);
  v.undot[a] = sj_scalar(n, jet_one(n, order));
  return v;
}

// E = sum(u^a d_a + theta^a e_a-dot / 2) applied to a superfunction
SJ euler_apply(const VectorXcd& u, const SJ& f) {
  const int n = int(u.size());
  SJ out(n);
  for (int a = 0; a < n; ++a) {
    out += u[a] * jet_derivative(f, a);
    out += 0.5 * e_dot(f, a).theta_times(a);
  }
  return out;
}

}  // namespace

double ResidualReport::max() const {
  double m = 0;
  for (const auto& [k, v] : values) m = std::max(m, v);
  return m;
}

ResidualReport super_residuals(const PsiSpec& psi, const VectorXcd& u,
                               const std::vector<SuperEq>& which, double D) {
  SuperChart ch = egoroff_chart(psi, u, 2);
  const int n = ch.n;
  ResidualReport rep;
  for (SuperEq eq : which) {
    switch (eq) {
      case SuperEq::DarbouxEgoroff: {
        double r43 = 0, r44 = 0;
        bool vac = n < 3;
        for (int mu = 0; mu < n; ++mu)
          for (int al = 0; al < n; ++al)
            for (int be = 0; be < n; ++be) {
              if (mu == al || mu == be || al == be) continue;
              r43 = std::max(r43,
                             value_norm(e_dot(ch.gamma[al][be], mu) -
                                        ch.gamma[mu][al] * ch.gamma[mu][be]));
            }
        for (int al = 0; al < n; ++al)
          for (int be = 0; be < n; ++be) {
            if (al == be) continue;
            SJ s(n);
            for (int a = 0; a < n; ++a)
              s += jet_derivative(ch.gamma[al][be], a);
            r44 = std::max(r44, value_norm(s));
          }
        if (vac) rep.vacuous.push_back("de_closed");
        else rep.values["de_closed"] = r43;
        rep.values["de_identity"] = r44;
        break;
      }
      case SuperEq::TnablaFlat: {
        double r = 0;
        for (int mu = 0; mu < n; ++mu)
          for (int nu = 0; nu < n; ++nu) {
            if (mu == nu) continue;
            SJ s(n);
            for (int be = 0; be < n; ++be)
              if (be != mu && be != nu) s += e_dot(ch.gamma[mu][nu], be);
            s -= e_dot(ch.gamma[mu][nu], mu);
            s -= e_dot(ch.gamma[mu][nu], nu);
            r = std::max(r, value_norm(s));
          }
        rep.values["tnabla_flat"] = r;
        break;
      }
      case SuperEq::FlatIdentityE: {
        double r = 0;
        for (int al = 0; al < n; ++al) {
          SJ s(n);
          for (int b = 0; b < n; ++b) s += jet_derivative(ch.eta_dot[al], b);
          r = std::max(r, value_norm(s));
        }
        // drift of the even-weight sum (constancy = flatness of e)
        SJ sum_e(n);
        for (int al = 0; al < n; ++al) sum_e += ch.eta_undot[al];
        double d = 0;
        for (int b = 0; b < n; ++b) {
          d = std::max(d, value_norm(jet_derivative(sum_e, b)));
          d = std::max(d, value_norm(e_dot(sum_e, b)));
        }
        rep.values["flat_e"] = std::max(r, d);
        rep.values["flat_e_drift"] = d;
        break;
      }
      case SuperEq::FlatIdentityEps: {
        double r49 = 0, r410 = 0;
        for (int mu = 0; mu < n; ++mu)
          for (int al = 0; al < n; ++al) {
            if (mu == al) continue;
            SJ f = sj_theta(n, mu, ch.jet_order) - sj_theta(n, al, ch.jet_order);
            r49 = std::max(r49, value_norm(f * e_dot(ch.eta_dot[al], mu)));
          }
        for (int al = 0; al < n; ++al) {
          SJ s(n);
          for (int b = 0; b < n; ++b) s += ch.eta_dot[al].theta_derivative(b);
          r410 = std::max(r410, value_norm(s - ch.eta_undot[al]));
        }
        // drift of the odd-weight sum (constancy = flatness of eps)
        SJ sum_eps(n);
        for (int al = 0; al < n; ++al) sum_eps += ch.eta_dot[al];
        double d = 0;
        for (int b = 0; b < n; ++b) {
          d = std::max(d, value_norm(jet_derivative(sum_eps, b)));
          d = std::max(d, value_norm(e_dot(sum_eps, b)));
        }
        rep.values["flat_eps_49"] = r49;
        rep.values["flat_eps_410"] = r410;
        rep.values["flat_eps_drift"] = d;
        break;
      }
      case SuperEq::Euler: {
        double r12 = 0, r14 = 0;
        for (int al = 0; al < n; ++al)
          r12 = std::max(r12, value_norm(euler_apply(u, ch.eta_dot[al]) -
                                         (D - 1.5) * ch.eta_dot[al]));
        for (int mu = 0; mu < n; ++mu)
          for (int nu = 0; nu < n; ++nu) {
            if (mu == nu) continue;
            r14 = std::max(r14, value_norm(euler_apply(u, ch.gamma[mu][nu]) +
                                           0.5 * ch.gamma[mu][nu]));
          }
        rep.values["euler_eta"] = r12;
        rep.values["euler_gamma"] = r14;
        break;
      }
      case SuperEq::Orthogonality: {
        SJ s(n);
        for (int al = 0; al < n; ++al) s += ch.eta_dot[al];
        rep.values["orthogonality"] = value_norm(s);
        break;
      }
    }
  }
  // odd-identity flatness controls even-identity flatness: report the ratio
  if (rep.values.count("flat_e_drift") && rep.values.count("flat_eps_drift")) {
    double eps = rep.values.at("flat_eps_drift");
    rep.values["eps_to_e_drift_ratio"] =
        rep.values.at("flat_e_drift") / std::max(eps, 1e-300);
  }
  return rep;
}

TnablaReport tnabla_and_metrics(const PsiSpec& psi, const VectorXcd& u,
                                std::uint64_t seed) {
  SuperChart ch = egoroff_chart(psi, u, 2);
  const int n = ch.n;
  const int ord = ch.jet_order;
  TnablaReport rep;

  // isotropy of the new splitting
  std::vector<SuperVec> etil(n, SuperVec(n));
  for (int a = 0; a < n; ++a) {
    etil[a].undot[a] = sj_scalar(n, jet_one(n, ord));
    for (int mu = 0; mu < n; ++mu)
      etil[a].dot[mu] -=
          e_dot(ch.eta_dot[a], mu) * (2.0 * ch.eta_dot[mu]).inverse();
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      rep.isotropy = std::max(rep.isotropy, value_norm(pair_g(ch, etil[a], etil[b])));

  // metric component tables
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      SJ want = (a == b) ? ch.eta_dot[a] : SJ(n);
      rep.metric_tables = std::max(
          rep.metric_tables,
          value_norm(pair_h(ch, basis_undot(n, a, ord), basis_undot(n, b, ord)) -
                     want));
      rep.metric_tables = std::max(
          rep.metric_tables,
          value_norm(pair_gt(ch, basis_undot(n, a, ord), basis_dot(n, b, ord)) -
                     want));
      rep.metric_tables = std::max(
          rep.metric_tables,
          value_norm(pair_h(ch, basis_undot(n, a, ord), basis_dot(n, b, ord))));
    }

  // parallelism of h and g-tilde under the induced connection:
  // (nabla_Z m)(X,Y) = Z m(X,Y) - m(nabla X, Y) - (-1)^{|Z||X|} m(X, nabla Y)
  auto parallel = [&](auto&& pairing) {
    double worst = 0;
    for (int mu = 0; mu < n; ++mu)
      for (int sa = 0; sa < 2; ++sa)
        for (int a = 0; a < n; ++a)
          for (int sb = 0; sb < 2; ++sb)
            for (int b = 0; b < n; ++b) {
              SuperVec X = sa ? basis_undot(n, a, ord) : basis_dot(n, a, ord);
              SuperVec Y = sb ? basis_undot(n, b, ord) : basis_dot(n, b, ord);
              SJ val = pairing(ch, X, Y);
              SJ res = e_dot(val, mu);
              res -= pairing(ch, covariant_derivative(ch, mu, X, true), Y);
              SJ second = pairing(ch, X, covariant_derivative(ch, mu, Y, true));
              // X odd basis vector iff sa == 0
              res -= (sa == 0) ? -second : second;
              worst = std::max(worst, value_norm(res));
            }
    return worst;
  };
  rep.parallel_h = parallel(pair_h);
  rep.parallel_gt = parallel(pair_gt);

  // Pi-compatibility: definitional induced connections agree with the tables
  // and with each other under the dotted/undotted identification
  for (int mu = 0; mu < n; ++mu)
    for (int a = 0; a < n; ++a) {
      SuperVec d1 = covariant_derivative(ch, mu, basis_dot(n, a, ord), false);
      for (int b = 0; b < n; ++b) {
        // project to T1 along the tilde splitting: d_b -> sum c e_beta-dot
        SJ cb = d1.undot[b];
        if (!cb.is_zero())
          for (int be = 0; be < n; ++be)
            d1.dot[be] +=
                cb * (e_dot(ch.eta_dot[b], be) * (2.0 * ch.eta_dot[be]).inverse());
      }
      SuperVec d0 = covariant_derivative(ch, mu, etil[a], false);
      for (int b = 0; b < n; ++b) {
        rep.pi_compat = std::max(
            rep.pi_compat, value_norm(d1.dot[b] - ch.tn_dot[mu][a].dot[b]));
        rep.pi_compat = std::max(
            rep.pi_compat, value_norm(d0.undot[b] - ch.tn_undot[mu][a].undot[b]));
        rep.pi_compat = std::max(
            rep.pi_compat,
            value_norm(ch.tn_dot[mu][a].dot[b] - ch.tn_undot[mu][a].undot[b]));
      }
    }

  // Frobenius pairing on random Grassmann-coefficient triples
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_vec = [&]() {
    SuperVec v(n);
    for (int a = 0; a < n; ++a) {
      SJ d(n), w(n);
      for (std::uint32_t m = 0; m < (1u << n); ++m) {
        d.set_coeff(m, Jet::constant(cplx(unif(rng), unif(rng)), n, ord));
        w.set_coeff(m, Jet::constant(cplx(unif(rng), unif(rng)), n, ord));
      }
      v.dot[a] = d;
      v.undot[a] = w;
    }
    return v;
  };
  for (int trial = 0; trial < 8; ++trial) {
    SuperVec X = random_vec(), Y = random_vec(), Z = random_vec();
    rep.frobenius = std::max(
        rep.frobenius, value_norm(pair_gt(ch, circ_product(X, Y), Z) -
                                  pair_gt(ch, X, circ_product(Y, Z))));
  }

  // characterization 4.10.4 (b), (c) on the T1 tables ((a) is parallel_h)
  for (int mu = 0; mu < n; ++mu)
    for (int al = 0; al < n; ++al) {
      SuperVec s = ch.tn_dot[mu][al];
      s += ch.tn_dot[al][mu];
      if (mu == al) {
        s -= ch.tn_dot[mu][mu];
        s -= ch.tn_dot[mu][mu];
      }
      for (int b = 0; b < n; ++b)
        rep.characterization =
            std::max(rep.characterization, value_norm(s.dot[b]));
      for (int be = 0; be < n; ++be) {
        if (be == mu || be == al || mu == al) continue;
        rep.characterization = std::max(
            rep.characterization,
            value_norm(pair_h(ch, ch.tn_dot[mu][al], basis_dot(n, be, ord))));
      }
    }
  return rep;
}

SuperVReport super_v_operator(const PsiSpec& psi, const VectorXcd& u,
                              double D) {
  SuperChart ch = egoroff_chart(psi, u, 3);
  const int n = ch.n;
  const int ord = ch.jet_order;
  SuperVReport rep;

  // Euler field as a coefficient vector
  SuperVec E(n);
  for (int b = 0; b < n; ++b) {
    E.undot[b] = sj_scalar(n, Jet::variable(u[b], b, n, ord));
    E.dot[b] = 0.5 * sj_theta(n, b, ord);
  }

  auto project1 = [&](const SuperVec& X) {
    SuperVec out(n);
    out.dot = X.dot;
    for (int b = 0; b < n; ++b) {
      if (X.undot[b].is_zero()) continue;
      for (int be = 0; be < n; ++be)
        out.dot[be] += X.undot[b] * (e_dot(ch.eta_dot[b], be) *
                                     (2.0 * ch.eta_dot[be]).inverse());
    }
    return out;
  };

  rep.V.assign(n, std::vector<SJ>(n, SJ(n)));
  for (int al = 0; al < n; ++al) {
    SuperVec cd = covariant_derivative(ch, al, E, false);
    SuperVec p1 = project1(cd);
    for (int b = 0; b < n; ++b) {
      rep.V[b][al] = p1.dot[b];
      if (b == al)
        rep.V[b][al] -= sj_scalar(n, Jet::constant(0.5 * (D - 0.5), n, ord));
    }
  }

  // formula route on the normalized frame
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be) {
      if (be == al) {
        rep.def_vs_formula = std::max(rep.def_vs_formula, value_norm(rep.V[be][al]));
        continue;
      }
      SJ coeff = sj_theta(n, al, ord) * ch.gamma[be][al];
      coeff += u[be] * e_dot(ch.gamma[be][al], be);
      coeff -= u[al] * e_dot(ch.gamma[al][be], al);
      for (int c = 0; c < n; ++c) {
        if (c == al || c == be) continue;
        coeff += u[c] * e_dot(ch.gamma[al][be], c);
      }
      SJ formula = ch.sqrt_eta[al] * coeff * ch.sqrt_eta[be].inverse();
      rep.def_vs_formula =
          std::max(rep.def_vs_formula, value_norm(rep.V[be][al] - formula));
    }

  // h-symmetry: V(be,al) eta_be + V(al,be) eta_al = 0
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      rep.h_symmetry = std::max(
          rep.h_symmetry, value_norm(rep.V[be][al] * ch.eta_dot[be] +
                                     rep.V[al][be] * ch.eta_dot[al]));

  // eigenvector eps = sum e_al-dot with eigenvalue (3 - 2D)/4
  for (int b = 0; b < n; ++b) {
    SJ sum(n);
    for (int al = 0; al < n; ++al) sum += rep.V[b][al];
    sum -= sj_scalar(n, Jet::constant(0.25 * (3.0 - 2.0 * D), n, ord));
    rep.eps_eigenvalue = std::max(rep.eps_eigenvalue, value_norm(sum));
  }

  // covariant constancy of V under the induced connection
  for (int mu = 0; mu < n; ++mu)
    for (int al = 0; al < n; ++al) {
      SuperVec Val(n);
      for (int b = 0; b < n; ++b) Val.dot[b] = rep.V[b][al];
      SuperVec lhs = covariant_derivative(ch, mu, Val, true);
      // V applied to tilde-nabla e_al-dot
      SuperVec rhs(n);
      for (int b = 0; b < n; ++b) {
        SJ f = ch.tn_dot[mu][al].dot[b];
        if (f.is_zero()) continue;
        for (int c = 0; c < n; ++c) rhs.dot[c] += f * rep.V[c][b];
      }
      for (int b = 0; b < n; ++b)
        rep.tnabla_v = std::max(rep.tnabla_v, value_norm(lhs.dot[b] - rhs.dot[b]));
    }
  return rep;
}

// ---------- Neveu-Schwarz representation ----------

namespace {

// polynomial superfunctions: u-exponents x theta-mask -> coefficient
struct PolySuper {
  int n = 0;
  std::map<std::pair<std::vector<int>, std::uint32_t>, cplx> c;

  static PolySuper zero(int n) { return PolySuper{n, {}}; }
  static PolySuper coord_u(int n, int k, int power) {
    PolySuper p{n, {}};
    std::vector<int> e(n, 0);
    e[k] = power;
    p.c[{e, 0}] = 1.0;
    return p;
  }
  static PolySuper coord_theta(int n, int k) {
    PolySuper p{n, {}};
    p.c[{std::vector<int>(n, 0), 1u << k}] = 1.0;
    return p;
  }
  void add(const std::vector<int>& e, std::uint32_t m, cplx v) {
    auto key = std::make_pair(e, m);
    auto it = c.find(key);
    if (it == c.end()) {
      if (v != cplx(0.0)) c[key] = v;
    } else {
      it->second += v;
      if (it->second == cplx(0.0)) c.erase(it);
    }
  }
  PolySuper operator*(const PolySuper& o) const {
    PolySuper out{n, {}};
    for (const auto& [ka, va] : c)
      for (const auto& [kb, vb] : o.c) {
        if (ka.second & kb.second) continue;
        std::vector<int> e = ka.first;
        for (int i = 0; i < n; ++i) e[i] += kb.first[i];
        cplx v = va * vb;
        if (GrassmannElement::koszul_sign(ka.second, kb.second) < 0) v = -v;
        out.add(e, ka.second | kb.second, v);
      }
    return out;
  }
  PolySuper& operator+=(const PolySuper& o) {
    for (const auto& [k, v] : o.c) add(k.first, k.second, v);
    return *this;
  }
  PolySuper& operator-=(const PolySuper& o) {
    for (const auto& [k, v] : o.c) add(k.first, k.second, -v);
    return *this;
  }
  PolySuper du(int k) const {
    PolySuper out{n, {}};
    for (const auto& [key, v] : c) {
      if (key.first[k] == 0) continue;
      std::vector<int> e = key.first;
      e[k] -= 1;
      out.add(e, key.second, double(key.first[k]) * v);
    }
    return out;
  }
  PolySuper dtheta(int k) const {
    PolySuper out{n, {}};
    std::uint32_t bit = 1u << k;
    for (const auto& [key, v] : c) {
      if (!(key.second & bit)) continue;
      int below = std::popcount(key.second & (bit - 1));
      out.add(key.first, key.second & ~bit, (below % 2) ? -v : v);
    }
    return out;
  }
  double max_abs() const {
    double m = 0;
    for (const auto& [k, v] : c) m = std::max(m, std::abs(v));
    return m;
  }
};

struct PolyVF {
  int n = 0;
  int parity = +1;  // +1 even, -1 odd
  std::vector<PolySuper> comp_u, comp_theta;

  static PolyVF zero(int n) {
    return PolyVF{n, +1, std::vector<PolySuper>(n, PolySuper::zero(n)),
                  std::vector<PolySuper>(n, PolySuper::zero(n))};
  }
  PolySuper apply(const PolySuper& f) const {
    PolySuper out = PolySuper::zero(n);
    for (int a = 0; a < n; ++a) {
      out += comp_u[a] * f.du(a);
      out += comp_theta[a] * f.dtheta(a);
    }
    return out;
  }
};

PolyVF commutator_vf(const PolyVF& X, const PolyVF& Y) {
  PolyVF out = PolyVF::zero(X.n);
  out.parity = X.parity * Y.parity;
  double sign = (X.parity == -1 && Y.parity == -1) ? +1.0 : -1.0;
  for (int b = 0; b < X.n; ++b) {
    PolySuper ub = PolySuper::coord_u(X.n, b, 1);
    PolySuper tb = PolySuper::coord_theta(X.n, b);
    PolySuper cu = X.apply(Y.apply(ub));
    PolySuper cu2 = Y.apply(X.apply(ub));
    for (const auto& [k, v] : cu2.c) cu.add(k.first, k.second, sign * v);
    out.comp_u[b] = cu;
    PolySuper ct = X.apply(Y.apply(tb));
    PolySuper ct2 = Y.apply(X.apply(tb));
    for (const auto& [k, v] : ct2.c) ct.add(k.first, k.second, sign * v);
    out.comp_theta[b] = ct;
  }
  return out;
}

// e_a = sum u^{a+1} d_u + (a+1)/2 u^a theta d_theta
PolyVF ns_e(int n, int a) {
  PolyVF v = PolyVF::zero(n);
  v.parity = +1;
  for (int al = 0; al < n; ++al) {
    v.comp_u[al] += PolySuper::coord_u(n, al, a + 1);
    PolySuper t = PolySuper::coord_u(n, al, a) * PolySuper::coord_theta(n, al);
    for (auto& [k, c] : t.c) c *= 0.5 * (a + 1);
    v.comp_theta[al] += t;
  }
  return v;
}

// f_{k/2} (k odd) = sum u^{(k+1)/2} e_al-dot
PolyVF ns_f(int n, int k) {
  PolyVF v = PolyVF::zero(n);
  v.parity = -1;
  int p = (k + 1) / 2;
  for (int al = 0; al < n; ++al) {
    v.comp_theta[al] += PolySuper::coord_u(n, al, p);
    v.comp_u[al] +=
        PolySuper::coord_u(n, al, p) * PolySuper::coord_theta(n, al);
  }
  return v;
}

double vf_diff(const PolyVF& a, const PolyVF& b) {
  double m = 0;
  for (int i = 0; i < a.n; ++i) {
    PolySuper d = a.comp_u[i];
    d -= b.comp_u[i];
    m = std::max(m, d.max_abs());
    PolySuper e = a.comp_theta[i];
    e -= b.comp_theta[i];
    m = std::max(m, e.max_abs());
  }
  return m;
}

PolyVF vf_scale(PolyVF v, double s) {
  for (int i = 0; i < v.n; ++i) {
    for (auto& [k, c] : v.comp_u[i].c) c *= s;
    for (auto& [k, c] : v.comp_theta[i].c) c *= s;
  }
  return v;
}

}  // namespace

double ns_representation_check(int n, int a_max, int i2_max) {
  if (n < 1) fail(ErrorKind::InvalidParameter, "n must be >= 1");
  double worst = 0;
  for (int a = 0; a <= a_max; ++a)
    for (int b = 0; b <= a_max; ++b)
      worst = std::max(worst, vf_diff(commutator_vf(ns_e(n, a), ns_e(n, b)),
                                      vf_scale(ns_e(n, a + b), double(b - a))));
  for (int a = 0; a <= a_max; ++a)
    for (int k = 1; k <= i2_max; k += 2)
      worst = std::max(
          worst, vf_diff(commutator_vf(ns_e(n, a), ns_f(n, k)),
                         vf_scale(ns_f(n, k + 2 * a), 0.5 * k - 0.5 * a)));
  for (int k = 1; k <= i2_max; k += 2)
    for (int l = 1; l <= i2_max; l += 2)
      worst = std::max(worst, vf_diff(commutator_vf(ns_f(n, k), ns_f(n, l)),
                                      vf_scale(ns_e(n, (k + l) / 2), 2.0)));
  return worst;
}

// ---------- supersymmetric Schlesinger ----------

namespace {

SJ mat_entry_zero(int n) { return SJ(n); }

SJMat mat_zero(int n) { return SJMat(n, std::vector<SJ>(n, mat_entry_zero(n))); }

SJMat mat_mul(const SJMat& A, const SJMat& B) {
  const int n = int(A.size());
  SJMat out = mat_zero(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (A[i][k].is_zero()) continue;
      for (int j = 0; j < n; ++j) {
        if (B[k][j].is_zero()) continue;
        out[i][j] += A[i][k] * B[k][j];
      }
    }
  return out;
}

SJMat mat_sub(SJMat A, const SJMat& B) {
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < A.size(); ++j) A[i][j] -= B[i][j];
  return A;
}

SJMat mat_add(SJMat A, const SJMat& B) {
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < A.size(); ++j) A[i][j] += B[i][j];
  return A;
}

SJMat mat_comm(const SJMat& A, const SJMat& B) {
  return mat_sub(mat_mul(A, B), mat_mul(B, A));
}

SJMat mat_edot(const SJMat& A, int mu) {
  SJMat out = A;
  for (auto& row : out)
    for (auto& e : row) e = e_dot(e, mu);
  return out;
}

SJMat mat_scal(const SJ& s, const SJMat& A) {
  SJMat out = A;
  for (auto& row : out)
    for (auto& e : row) e = s * e;
  return out;
}

double mat_value_norm(const SJMat& A) {
  double m = 0;
  for (const auto& row : A)
    for (const auto& e : row) m = std::max(m, value_norm(e));
  return m;
}

}  // namespace

SuperSchlesingerReport super_schlesinger_residual(int n, const AFieldFn& fields,
                                                  const VectorXcd& u) {
  if (int(u.size()) != n) fail(ErrorKind::InvalidParameter, "dimension mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(u[i] - u[j]) < 1e-9)
        fail(ErrorKind::PoleProximity, "body positions collide");

  std::vector<SJMat> A = fields(u, 1);
  const int ord = 1;
  SuperSchlesingerReport rep;

  auto den_inv = [&](int mu, int nu) {
    SJ den = sj_scalar(n, Jet::constant(u[mu] - u[nu], n, ord));
    den -= sj_theta(n, mu, ord) * sj_theta(n, nu, ord);
    return den.inverse();
  };
  auto ffac = [&](int mu, int nu) {
    return sj_theta(n, mu, ord) - sj_theta(n, nu, ord);
  };

  auto track_levels = [&](const SJMat& R) {
    for (const auto& row : R)
      for (const auto& e : row) {
        GrassmannElement v = jet_value(e);
        for (const auto& [mask, c] : v.coefficients()) {
          int deg = std::popcount(mask);
          int level = (deg + 1) / 2;  // theta-degree (2k-1) feeds level k
          auto& slot = rep.level_residual[level];
          slot = std::max(slot, std::abs(c));
        }
      }
  };

  for (int mu = 0; mu < n; ++mu) {
    for (int nu = 0; nu < n; ++nu) {
      if (nu == mu) continue;
      SJ fg = ffac(mu, nu) * den_inv(mu, nu);
      SJMat R = mat_add(mat_edot(A[nu], mu), mat_scal(fg, mat_comm(A[mu], A[nu])));
      rep.off_diag = std::max(rep.off_diag, mat_value_norm(R));
      track_levels(R);
    }
    SJMat R = mat_edot(A[mu], mu);
    for (int nu = 0; nu < n; ++nu) {
      if (nu == mu) continue;
      SJ fg = ffac(mu, nu) * den_inv(mu, nu);
      R = mat_sub(R, mat_scal(fg, mat_comm(A[mu], A[nu])));
    }
    rep.diag = std::max(rep.diag, mat_value_norm(R));
    track_levels(R);
  }

  // body reduction: the theta-degree-0 right-hand sides of the derived even
  // equations against the classical right-hand side on the negated bodies
  SchlesingerSystem cls;
  cls.m = n;
  cls.u = u;
  cls.g = Eigen::MatrixXcd::Identity(n, n);
  cls.A.resize(n);
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXcd B(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) B(r, c) = -jet_value(A[j][r][c]).body_coeff();
    cls.A[j] = B;
  }
  cls.W = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) cls.W += cls.A[j];

  for (int be = 0; be < n; ++be) {
    VectorXcd dir = VectorXcd::Zero(n);
    dir[be] = 1.0;
    std::vector<Eigen::MatrixXcd> rhs = schlesinger_rhs(cls, dir);
    for (int nu = 0; nu < n; ++nu) {
      Eigen::MatrixXcd super_rhs = Eigen::MatrixXcd::Zero(n, n);
      auto body_of = [&](const SJMat& M) {
        Eigen::MatrixXcd B(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) B(r, c) = jet_value(M[r][c]).body_coeff();
        return B;
      };
      if (nu != be) {
        cplx inv = jet_value(den_inv(nu, be)).body_coeff();
        super_rhs = body_of(mat_comm(A[be], A[nu])) * inv;
      } else {
        for (int mu2 = 0; mu2 < n; ++mu2) {
          if (mu2 == be) continue;
          super_rhs += body_of(mat_comm(A[be], A[mu2])) *
                       jet_value(den_inv(be, mu2)).body_coeff();
        }
      }
      rep.body_reduction = std::max(
          rep.body_reduction, (super_rhs + rhs[nu]).cwiseAbs().maxCoeff());
    }
  }
  rep.level_residual[0] = 0;  // filled by expand_theta_components callers
  return rep;
}

HierarchyView expand_theta_components(int n, const AFieldFn& fields,
                                      const VectorXcd& u) {
  if (n > 4) fail(ErrorKind::InvalidParameter, "theta expansion supports n <= 4");
  std::vector<SJMat> A = fields(u, 1);
  std::vector<bool> occupied(size_t(n / 2 + 1), false);
  for (const auto& M : A)
    for (const auto& row : M)
      for (const auto& e : row)
        for (const auto& [mask, jet] : e.coefficients()) {
          int deg = std::popcount(mask);
          if (deg % 2 != 0)
            fail(ErrorKind::ParityError, "odd theta-component in an even field");
          if (!jet.is_zero()) occupied[size_t(deg / 2)] = true;
        }

  SuperSchlesingerReport rep = super_schlesinger_residual(n, fields, u);
  HierarchyView view;
  view.levels = n / 2 + 1;
  for (bool b : occupied) view.present_levels += b ? 1 : 0;
  view.residual_by_level[0] = rep.body_reduction;
  for (const auto& [lvl, v] : rep.level_residual)
    if (lvl > 0) view.residual_by_level[lvl] = v;
  for (int l = 0; l < view.levels; ++l)
    if (!view.residual_by_level.count(l)) view.residual_by_level[l] = 0.0;
  return view;
}

KappaReport kappa_linearity_check(const PsiSpec& psi, const VectorXcd& u,
                                  double D) {
  SuperChart ch = egoroff_chart(psi, u, 3);
  const int n = ch.n;
  const int ord = ch.jet_order;
  SuperVReport vrep = super_v_operator(psi, u, D);

  auto residuals_at = [&](double kappa) {
    // A_nu = -(V + kappa) P_nu in the moving frame; covariant equations
    std::vector<SJMat> A(n, mat_zero(n));
    for (int nu = 0; nu < n; ++nu)
      for (int b = 0; b < n; ++b) {
        A[nu][b][nu] -= vrep.V[b][nu];
        if (b == nu)
          A[nu][b][nu] -= sj_scalar(n, Jet::constant(kappa, n, ord));
      }
    std::vector<SJMat> G(n, mat_zero(n));
    for (int mu = 0; mu < n; ++mu)
      for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) G[mu][b][a] = ch.tn_dot[mu][a].dot[b];

    auto den_inv = [&](int mu, int nu) {
      SJ den = sj_scalar(n, Jet::constant(u[mu] - u[nu], n, ord));
      den -= sj_theta(n, mu, ord) * sj_theta(n, nu, ord);
      return den.inverse();
    };
    std::vector<SJMat> res;
    for (int mu = 0; mu < n; ++mu) {
      for (int nu = 0; nu < n; ++nu) {
        if (nu == mu) continue;
        SJ fg = (sj_theta(n, mu, ord) - sj_theta(n, nu, ord)) * den_inv(mu, nu);
        SJMat R = mat_edot(A[nu], mu);
        R = mat_add(R, mat_sub(mat_mul(G[mu], A[nu]), mat_mul(A[nu], G[mu])));
        R = mat_add(R, mat_scal(fg, mat_comm(A[mu], A[nu])));
        res.push_back(std::move(R));
      }
      SJMat R = mat_edot(A[mu], mu);
      R = mat_add(R, mat_sub(mat_mul(G[mu], A[mu]), mat_mul(A[mu], G[mu])));
      for (int nu = 0; nu < n; ++nu) {
        if (nu == mu) continue;
        SJ fg = (sj_theta(n, mu, ord) - sj_theta(n, nu, ord)) * den_inv(mu, nu);
        R = mat_sub(R, mat_scal(fg, mat_comm(A[mu], A[nu])));
      }
      res.push_back(std::move(R));
    }
    return res;
  };

  KappaReport rep;
  std::vector<SJMat> r0 = residuals_at(0.0);
  std::vector<SJMat> r1 = residuals_at(1.0);
  for (size_t k = 0; k < r0.size(); ++k) {
    rep.order0 = std::max(rep.order0, mat_value_norm(r0[k]));
    rep.order1 = std::max(rep.order1, mat_value_norm(mat_sub(r1[k], r0[k])));
  }
  return rep;
}

StrictSpecialReport strict_special_super(const SuperSchlesingerSystem& s,
                                         const std::vector<VectorXcd>& samples) {
  const int n = s.n;
  StrictSpecialReport rep;
  rep.min_e_dot = std::numeric_limits<double>::infinity();
  const int ord = 2;

  for (const VectorXcd& u : samples) {
    std::vector<SJMat> P = s.P_fields(u, ord);
    std::vector<SJMat> A(n, mat_zero(n));
    for (int nu = 0; nu < n; ++nu)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          SJ acc(n);
          for (int k = 0; k < n; ++k) {
            cplx w = s.Vop(i, k) + (k == i ? cplx(s.kappa) : cplx(0.0));
            if (w != cplx(0.0)) acc += w * P[nu][k][j];
          }
          A[nu][i][j] = -acc;
        }

    // (5.11)
    SJMat sum = mat_zero(n);
    for (int nu = 0; nu < n; ++nu) {
      sum = mat_add(sum, P[nu]);
      for (int mu = 0; mu < n; ++mu) {
        SJMat prod = mat_mul(P[nu], P[mu]);
        if (mu == nu) prod = mat_sub(prod, P[nu]);
        rep.projectors = std::max(rep.projectors, mat_value_norm(prod));
      }
    }
    for (int i = 0; i < n; ++i) sum[i][i] -= sj_scalar(n, jet_one(n, ord));
    rep.projectors = std::max(rep.projectors, mat_value_norm(sum));

    // images e_nu-dot = P_nu(eps), h-orthogonality and nonvanishing
    std::vector<std::vector<SJ>> edot(n, std::vector<SJ>(n, SJ(n)));
    for (int nu = 0; nu < n; ++nu)
      for (int i = 0; i < n; ++i) {
        SJ acc(n);
        for (int j = 0; j < n; ++j) acc += s.eps[j] * P[nu][i][j];
        edot[nu][i] = acc;
      }
    auto hpair = [&](const std::vector<SJ>& x, const std::vector<SJ>& y) {
      SJ acc(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (s.h(i, j) != cplx(0.0)) acc += s.h(i, j) * (x[i] * y[j]);
      return acc;
    };
    for (int mu = 0; mu < n; ++mu) {
      double nrm = 0;
      for (int i = 0; i < n; ++i) nrm = std::max(nrm, value_norm(edot[mu][i]));
      rep.min_e_dot = std::min(rep.min_e_dot, nrm);
      for (int nu = 0; nu < n; ++nu)
        if (mu != nu)
          rep.projectors =
              std::max(rep.projectors, value_norm(hpair(edot[mu], edot[nu])));
    }

    // (5.12)
    VectorXcd veps = s.Vop * s.eps - 0.25 * (3.0 - 2.0 * s.D) * s.eps;
    rep.eps_eigen = std::max(rep.eps_eigen, veps.cwiseAbs().maxCoeff());

    // eta and the reconstruction identities
    std::vector<SJ> eta_dot(n, SJ(n)), eta_un(n, SJ(n));
    std::vector<SJ> epsvec(n, SJ(n));
    for (int i = 0; i < n; ++i)
      epsvec[i] = sj_scalar(n, Jet::constant(s.eps[i], n, ord));
    for (int nu = 0; nu < n; ++nu) {
      eta_dot[nu] = hpair(epsvec, edot[nu]);
      eta_un[nu] = e_dot(eta_dot[nu], nu);
    }

    // (5.13)
    for (int nu = 0; nu < n; ++nu) {
      std::vector<SJ> Aeps(n, SJ(n));
      for (int i = 0; i < n; ++i) {
        SJ acc(n);
        for (int j = 0; j < n; ++j) acc += s.eps[j] * A[nu][i][j];
        Aeps[i] = acc;
      }
      SJ lhs = hpair(epsvec, Aeps);
      lhs -= 0.25 * (3.0 - 2.0 * s.D - 4.0 * s.kappa) * eta_dot[nu];
      rep.id_513 = std::max(rep.id_513, value_norm(lhs));
    }

    // step 1: the three component families equivalent to d omega = 0
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu) {
        SJ r = e_dot(eta_dot[nu], mu) + e_dot(eta_dot[mu], nu);
        if (mu == nu) r -= 2.0 * eta_un[mu];
        rep.omega_closed = std::max(rep.omega_closed, value_norm(r));
        rep.omega_closed = std::max(
            rep.omega_closed,
            value_norm(e_dot(eta_un[nu], mu) - jet_derivative(eta_dot[mu], nu)));
        rep.omega_closed = std::max(
            rep.omega_closed,
            value_norm(jet_derivative(eta_un[nu], mu) -
                       jet_derivative(eta_un[mu], nu)));
      }

    // step 3
    for (int nu = 0; nu < n; ++nu)
      rep.euler_eta = std::max(
          rep.euler_eta, value_norm(euler_apply(u, eta_dot[nu]) -
                                    (s.D - 1.5) * eta_dot[nu]));

    // step 4
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu) {
        if (mu == nu) continue;
        SJ f = sj_theta(n, mu, ord) - sj_theta(n, nu, ord);
        rep.step4 =
            std::max(rep.step4, value_norm(f * e_dot(eta_dot[nu], mu)));
      }
  }
  return rep;
}

// ---------- crafted fixtures ----------

PsiSpec crafted_psi_n2() {
  PsiSpec spec;
  spec.n = 2;
  spec.declared_parity = -1;
  PsiTerm t1;
  t1.mask = 0b01;
  t1.coeff = parse_expression("2 + 0.5*exp(0.4*u1 - 0.4*u2)", 2);
  PsiTerm t2;
  t2.mask = 0b10;
  t2.coeff = parse_expression("1 - 0.5*exp(0.4*u1 - 0.4*u2)", 2);
  spec.terms = {t1, t2};
  return spec;
}

CraftedSuperSchlesinger crafted_super_schlesinger_n2(double D, double kappa) {
  const int n = 2;
  CraftedSuperSchlesinger out;
  out.u0 = VectorXcd(n);
  out.u0 << cplx(0.0, 0.0), cplx(1.0, 0.3);

  const double c = 0.25 * (3.0 - 2.0 * D);
  Eigen::MatrixXcd V(2, 2);
  V << 0.0, c, c, 0.0;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  Eigen::MatrixXcd Ws = V + kappa * Eigen::MatrixXcd::Identity(2, 2);

  out.system.n = n;
  out.system.h = h;
  out.system.Vop = V;
  out.system.kappa = kappa;
  out.system.D = D;
  out.system.eps = VectorXcd::Ones(2);

  // body flow: C = Ws P follows the textbook orientation, so hand the
  // integrator (which flows the d+omega orientation) the negated matrices
  VectorXcd u0 = out.u0;
  auto pointwise = [u0, Ws, n](const VectorXcd& u) {
    SchlesingerSystem sys;
    sys.m = n;
    sys.u = u0;
    sys.g = Eigen::MatrixXcd::Identity(n, n);
    sys.A.resize(n);
    for (int j = 0; j < n; ++j) {
      Eigen::MatrixXcd P0 = Eigen::MatrixXcd::Zero(n, n);
      P0(j, j) = 1.0;
      sys.A[j] = -(Ws * P0);
    }
    sys.W = -Ws;
    if ((u - u0).cwiseAbs().maxCoeff() > 0) {
      IntegrationPath path;
      path.waypoints = {u0, u};
      IntegrateOptions opts;
      opts.rtol = 1e-12;
      opts.atol = 1e-14;
      opts.check_monitors = false;
      integrate(sys, path, opts);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Ws);
    // masks: body and the full theta^1 theta^2 component
    std::vector<Eigen::MatrixXcd> body(n), top(n);
    for (int j = 0; j < n; ++j) body[j] = lu.solve((-sys.A[j]).eval());
    Eigen::MatrixXcd K =
        body[0] * Ws * body[1] - body[1] * Ws * body[0];
    cplx U = u[0] - u[1];
    top[0] = K / U;
    top[1] = -K / U;
    return std::make_pair(body, top);
  };

  out.system.P_fields = [pointwise, n](const VectorXcd& u, int order) {
    const double h1 = 1e-4;
    auto base = pointwise(u);
    std::vector<SJMat> P(n, mat_zero(n));
    auto fill = [&](int comp, std::uint32_t mask,
                    const std::vector<Eigen::MatrixXcd>& mats) {
      for (int j = 0; j < n; ++j)
        for (int r = 0; r < n; ++r)
          for (int cc = 0; cc < n; ++cc) {
            (void)comp;
            Jet jet = P[j][r][cc].coeff(mask);
            if (jet.nvars() == 0) jet = Jet(n, order);
            Jet::Mono m{};
            jet.set_coeff(m, mats[j](r, cc));
            P[j][r][cc].set_coeff(mask, jet);
          }
    };
    fill(0, 0u, base.first);
    fill(0, 0b11u, base.second);
    if (order >= 1) {
      for (int k = 0; k < n; ++k) {
        VectorXcd dir = VectorXcd::Zero(n);
        dir[k] = 1.0;
        auto up1 = pointwise(u + h1 * dir);
        auto um1 = pointwise(u - h1 * dir);
        auto up2 = pointwise(u + 0.5 * h1 * dir);
        auto um2 = pointwise(u - 0.5 * h1 * dir);
        for (int j = 0; j < n; ++j)
          for (int r = 0; r < n; ++r)
            for (int cc = 0; cc < n; ++cc) {
              auto rich = [&](const Eigen::MatrixXcd& p1,
                              const Eigen::MatrixXcd& m1,
                              const Eigen::MatrixXcd& p2,
                              const Eigen::MatrixXcd& m2) {
                cplx d1 = (p1(r, cc) - m1(r, cc)) / (2.0 * h1);
                cplx d2 = (p2(r, cc) - m2(r, cc)) / h1;
                return (4.0 * d2 - d1) / 3.0;
              };
              {
                Jet jet = P[j][r][cc].coeff(0u);
                Jet::Mono m{};
                m[k] = 1;
                jet.set_coeff(m, rich(up1.first[j], um1.first[j],
                                      up2.first[j], um2.first[j]));
                P[j][r][cc].set_coeff(0u, jet);
              }
              {
                Jet jet = P[j][r][cc].coeff(0b11u);
                Jet::Mono m{};
                m[k] = 1;
                jet.set_coeff(m, rich(up1.second[j], um1.second[j],
                                      up2.second[j], um2.second[j]));
                P[j][r][cc].set_coeff(0b11u, jet);
              }
            }
        if (order >= 2) {
          for (int j = 0; j < n; ++j)
            for (int r = 0; r < n; ++r)
              for (int cc = 0; cc < n; ++cc) {
                Jet jet = P[j][r][cc].coeff(0u);
                Jet::Mono m{};
                m[k] = 2;
                cplx dd = (up1.first[j](r, cc) - 2.0 * base.first[j](r, cc) +
                           um1.first[j](r, cc)) /
                          (h1 * h1);
                jet.set_coeff(m, dd / 2.0);
                P[j][r][cc].set_coeff(0u, jet);
                Jet jt = P[j][r][cc].coeff(0b11u);
                cplx dd2 = (up1.second[j](r, cc) - 2.0 * base.second[j](r, cc) +
                            um1.second[j](r, cc)) /
                           (h1 * h1);
                jt.set_coeff(m, dd2 / 2.0);
                P[j][r][cc].set_coeff(0b11u, jt);
              }
        }
      }
      if (order >= 2 && n >= 2) {
        // mixed second derivative
        VectorXcd d01 = VectorXcd::Zero(n), d0m1 = VectorXcd::Zero(n);
        d01[0] = 1.0;
        d01[1] = 1.0;
        d0m1[0] = 1.0;
        d0m1[1] = -1.0;
        auto pp = pointwise(u + h1 * d01);
        auto mm = pointwise(u - h1 * d01);
        auto pm = pointwise(u + h1 * d0m1);
        auto mp = pointwise(u - h1 * d0m1);
        for (int j = 0; j < n; ++j)
          for (int r = 0; r < n; ++r)
            for (int cc = 0; cc < n; ++cc) {
              Jet jet = P[j][r][cc].coeff(0u);
              Jet::Mono m{};
              m[0] = 1;
              m[1] = 1;
              cplx dd = (pp.first[j](r, cc) - pm.first[j](r, cc) -
                         mp.first[j](r, cc) + mm.first[j](r, cc)) /
                        (4.0 * h1 * h1);
              jet.set_coeff(m, dd);
              P[j][r][cc].set_coeff(0u, jet);
              Jet jt = P[j][r][cc].coeff(0b11u);
              cplx dd2 = (pp.second[j](r, cc) - pm.second[j](r, cc) -
                          mp.second[j](r, cc) + mm.second[j](r, cc)) /
                         (4.0 * h1 * h1);
              jt.set_coeff(m, dd2);
              P[j][r][cc].set_coeff(0b11u, jt);
            }
      }
    }
    return P;
  };

  auto pfields = out.system.P_fields;
  Eigen::MatrixXcd WsCopy = Ws;
  out.a_fields = [pfields, WsCopy, n](const VectorXcd& u, int order) {
    std::vector<SJMat> P = pfields(u, order);
    std::vector<SJMat> A(n, mat_zero(n));
    for (int nu = 0; nu < n; ++nu)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          SJ acc(n);
          for (int k = 0; k < n; ++k)
            if (WsCopy(i, k) != cplx(0.0)) acc += WsCopy(i, k) * P[nu][k][j];
          A[nu][i][j] = -acc;
        }
    return A;
  };
  return out;
}

}  // namespace frob::super
