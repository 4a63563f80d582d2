#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "frob/error.hpp"

namespace frob {

using cplx = std::complex<double>;

// Truncated polynomial in up to 8 even deformation directions: value plus
// partial derivatives through a fixed total order. Ring operations drop
// monomials beyond the truncation order.
class Jet {
 public:
  static constexpr int kMaxVars = 8;
  using Mono = std::array<std::uint8_t, kMaxVars>;

  Jet() = default;
  Jet(int nvars, int order) : nvars_(nvars), order_(order) {
    if (nvars < 0 || nvars > kMaxVars) fail(ErrorKind::InvalidParameter, "jet vars");
  }

  static Jet constant(cplx c, int nvars, int order) {
    Jet j(nvars, order);
    if (c != cplx(0.0)) j.terms_[Mono{}] = c;
    return j;
  }
  // coordinate function centered at value: value + (direction var)
  static Jet variable(cplx value, int var, int nvars, int order) {
    Jet j = constant(value, nvars, order);
    if (var < 0 || var >= nvars) fail(ErrorKind::InvalidParameter, "jet var index");
    if (order >= 1) {
      Mono m{};
      m[var] = 1;
      j.terms_[m] += cplx(1.0);
      j.prune();
    }
    return j;
  }

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  bool is_zero() const { return terms_.empty(); }

  cplx value() const {
    auto it = terms_.find(Mono{});
    return it == terms_.end() ? cplx(0.0) : it->second;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& [mo, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  void set_coeff(const Mono& m, cplx c) {
    if (c == cplx(0.0)) terms_.erase(m);
    else terms_[m] = c;
  }
  cplx coeff(const Mono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? cplx(0.0) : it->second;
  }

  Jet operator-() const {
    Jet out = *this;
    for (auto& [m, c] : out.terms_) c = -c;
    return out;
  }
  Jet& operator+=(const Jet& o) {
    align(o);
    for (const auto& [m, c] : o.terms_) terms_[m] += c;
    prune();
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    align(o);
    for (const auto& [m, c] : o.terms_) terms_[m] -= c;
    prune();
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet out(std::max(a.nvars_, b.nvars_), std::max(a.order_, b.order_));
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Mono m{};
        int deg = 0;
        for (int i = 0; i < kMaxVars; ++i) {
          m[i] = std::uint8_t(ma[i] + mb[i]);
          deg += m[i];
        }
        if (deg > out.order_) continue;
        out.terms_[m] += ca * cb;
      }
    out.prune();
    return out;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

  friend Jet operator*(cplx s, Jet a) {
    for (auto& [m, c] : a.terms_) c *= s;
    a.prune();
    return a;
  }
  friend Jet operator*(Jet a, cplx s) { return s * a; }
  friend Jet operator*(double s, const Jet& a) { return cplx(s) * a; }
  friend Jet operator*(const Jet& a, double s) { return cplx(s) * a; }

  // nilpotent part (no constant term)
  Jet fluctuation() const {
    Jet out = *this;
    out.terms_.erase(Mono{});
    return out;
  }

  Jet inverse() const {
    cplx c = value();
    if (std::abs(c) == 0.0) fail(ErrorKind::NonInvertible, "jet constant term is zero");
    Jet q = (1.0 / c) * fluctuation();
    Jet acc = constant(1.0, nvars_, order_);
    Jet pw = constant(1.0, nvars_, order_);
    for (int k = 1; k <= order_; ++k) {
      pw = pw * q;
      if (pw.is_zero()) break;
      acc += (k % 2 ? -1.0 : 1.0) * pw;
    }
    return (1.0 / c) * acc;
  }

  Jet sqrt() const {
    cplx c = value();
    if (std::abs(c) == 0.0) fail(ErrorKind::NonInvertible, "jet sqrt needs a unit");
    cplx root = std::sqrt(c);
    Jet q = (1.0 / c) * fluctuation();
    Jet acc = constant(1.0, nvars_, order_);
    Jet pw = constant(1.0, nvars_, order_);
    double binom = 1.0;
    for (int k = 1; k <= order_; ++k) {
      pw = pw * q;
      binom *= (0.5 - (k - 1)) / k;
      if (pw.is_zero()) break;
      acc += binom * pw;
    }
    return root * acc;
  }

  Jet exp() const {
    cplx c = value();
    Jet p = fluctuation();
    Jet acc = constant(1.0, nvars_, order_);
    Jet pw = constant(1.0, nvars_, order_);
    double fact = 1.0;
    for (int k = 1; k <= order_; ++k) {
      pw = pw * p;
      fact *= k;
      if (pw.is_zero()) break;
      acc += (1.0 / fact) * pw;
    }
    return std::exp(c) * acc;
  }

  // d/dx_var, lowering the truncation content accordingly
  Jet derivative(int var) const {
    if (var < 0 || var >= nvars_) fail(ErrorKind::InvalidParameter, "jet var index");
    Jet out(nvars_, order_);
    for (const auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      Mono mm = m;
      mm[var] -= 1;
      out.terms_[mm] += double(m[var]) * c;
    }
    return out;
  }

  bool operator==(const Jet& o) const { return terms_ == o.terms_; }

  const std::map<Mono, cplx>& terms() const { return terms_; }

 private:
  void align(const Jet& o) {
    nvars_ = std::max(nvars_, o.nvars_);
    order_ = std::max(order_, o.order_);
  }
  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();)
      it = (it->second == cplx(0.0)) ? terms_.erase(it) : std::next(it);
  }

  int nvars_ = 0;
  int order_ = 0;
  std::map<Mono, cplx> terms_;
};

}  // namespace frob
