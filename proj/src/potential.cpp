#include "frob/potential.hpp"

#include <algorithm>
#include <cmath>

namespace frob {

namespace {

// Neumaier compensated accumulator over complex terms.
struct Kahan {
  cplx sum{0.0, 0.0};
  cplx comp{0.0, 0.0};
  void add(cplx v) {
    cplx t = sum + v;
    cplx corr;
    corr.real(std::abs(sum.real()) >= std::abs(v.real())
                  ? (sum.real() - t.real()) + v.real()
                  : (v.real() - t.real()) + sum.real());
    corr.imag(std::abs(sum.imag()) >= std::abs(v.imag())
                  ? (sum.imag() - t.imag()) + v.imag()
                  : (v.imag() - t.imag()) + sum.imag());
    comp += corr;
    sum = t;
  }
  cplx total() const { return sum + comp; }
};

Int multiplicity_factorial(const gw::Multiset& m) {
  Int f = 1;
  size_t i = 0;
  while (i < m.size()) {
    size_t j = i;
    while (j < m.size() && m[j] == m[i]) ++j;
    f *= factorial(long(j - i));
    i = j;
  }
  return f;
}

bool contains_with_diff(const gw::Multiset& x, const gw::Multiset& y,
                        gw::Multiset& diff) {
  diff.clear();
  size_t i = 0, j = 0;
  while (i < x.size()) {
    if (j < y.size() && x[i] == y[j]) {
      ++i;
      ++j;
    } else if (j < y.size() && y[j] < x[i]) {
      return false;
    } else {
      diff.push_back(x[i]);
      ++i;
    }
  }
  return j == y.size();
}

}  // namespace

TruncatedPotential::TruncatedPotential(gw::GWTable table, int max_jet_order)
    : table_(std::move(table)), max_jet_order_(max_jet_order) {}

DerivValue TruncatedPotential::derivative(const VectorXcd& x,
                                          const std::vector<int>& idx) const {
  const int r = table_.r();
  if (int(idx.size()) < 3)
    fail(ErrorKind::InvalidParameter, "need at least a third derivative");
  if (int(idx.size()) > 3 + max_jet_order_)
    fail(ErrorKind::OrderError, "jet order exceeds configured maximum");
  if (x.size() != r + 1)
    fail(ErrorKind::InvalidParameter, "point dimension mismatch");
  bool zero = false;
  int ones = 0;
  long sum = 0;
  gw::Multiset L;
  for (int v : idx) {
    if (v < 0 || v > r) fail(ErrorKind::InvalidParameter, "index out of [0,r]");
    if (v == 0) zero = true;
    else if (v == 1) ones++;
    else L.push_back(v);
    sum += v;
  }
  std::sort(L.begin(), L.end());

  DerivValue out;
  Kahan acc;
  if (idx.size() == 3 && sum == r) acc.add(cplx(1.0, 0.0));

  cplx last{0.0, 0.0};
  if (!zero) {
    for (int d = 1; d <= table_.d_max(); ++d) {
      auto key = std::make_pair(d, L);
      const std::vector<std::pair<gw::Multiset, double>>* list = nullptr;
      {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
          std::vector<std::pair<gw::Multiset, double>> built;
          gw::Multiset m;
          for (const gw::Multiset& k : gw::admissible_keys(r, d)) {
            if (!contains_with_diff(k, L, m)) continue;
            Rational c = Rational(table_.at(d, k)) / multiplicity_factorial(m);
            built.emplace_back(m, c.convert_to<double>());
          }
          it = cache_.emplace(key, std::move(built)).first;
        }
        list = &it->second;
      }
      Kahan poly;
      for (const auto& [m, c] : *list) {
        cplx mono(c, 0.0);
        for (int v : m) mono *= x[v];
        poly.add(mono);
      }
      cplx term = std::pow(double(d), ones) * std::exp(double(d) * x[1]) *
                  poly.total();
      last = term;
      acc.add(term);
    }
  }
  out.value = acc.total();
  double denom = std::abs(out.value);
  out.trunc_rel = denom > 0 ? std::abs(last) / denom : std::abs(last);
  return out;
}

QhField::QhField(gw::GWTable table) : pot_(std::move(table)) {
  const int r = pot_.r();
  const int n = r + 1;
  g_ = MatrixXcd::Zero(n, n);
  for (int a = 0; a <= r; ++a) g_(a, r - a) = 1.0;
  euler_.jac = MatrixXcd::Zero(n, n);
  for (int a = 0; a <= r; ++a) euler_.jac(a, a) = cplx(1.0 - a, 0.0);
  euler_.shift = VectorXcd::Zero(n);
  euler_.shift(1) = cplx(r + 1, 0.0);
  euler_.d0 = 1.0;
  euler_.D = 2.0 - r;
}

void QhField::third(const VectorXcd& x, std::vector<MatrixXcd>& phi) const {
  const int n = dim();
  phi.assign(n, MatrixXcd::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = b; c < n; ++c) {
        cplx v = pot_.third(x, a, b, c).value;
        phi[a](b, c) = phi[a](c, b) = v;
        phi[b](a, c) = phi[b](c, a) = v;
        phi[c](a, b) = phi[c](b, a) = v;
      }
}

std::shared_ptr<const QhField> make_qh_field(int r, int d_max) {
  return std::make_shared<QhField>(gw::compute_gw_table(r, d_max));
}

std::shared_ptr<const PotentialField> make_qh_p1_field() {
  MatrixXcd g(2, 2);
  g << 0.0, 1.0, 1.0, 0.0;
  EulerData e;
  e.jac = MatrixXcd::Zero(2, 2);
  e.jac(0, 0) = 1.0;
  e.shift = VectorXcd::Zero(2);
  e.shift(1) = 2.0;
  e.d0 = 1.0;
  e.D = 1.0;
  auto fn = [](const VectorXcd& x, std::vector<MatrixXcd>& phi) {
    phi.assign(2, MatrixXcd::Zero(2, 2));
    phi[0](0, 1) = phi[0](1, 0) = 1.0;
    phi[1](0, 0) = 1.0;
    phi[1](1, 1) = std::exp(x[1]);
  };
  return std::make_shared<ExplicitField>(2, g, fn, e);
}

}  // namespace frob
