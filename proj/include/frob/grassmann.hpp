#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <type_traits>

#include "frob/jet.hpp"

namespace frob {

// Ring glue so Grassmann coefficients can be plain complex numbers or jets.
template <class Ring>
struct RingOps;

template <>
struct RingOps<cplx> {
  static cplx zero(const cplx&) { return 0.0; }
  static cplx one(const cplx&) { return 1.0; }
  static double max_abs(const cplx& v) { return std::abs(v); }
  static bool is_zero(const cplx& v) { return v == cplx(0.0); }
  static cplx inverse(const cplx& v) {
    if (v == cplx(0.0)) fail(ErrorKind::NonInvertible, "zero body");
    return 1.0 / v;
  }
  static cplx sqrt(const cplx& v) {
    if (v == cplx(0.0)) fail(ErrorKind::NonInvertible, "zero body in sqrt");
    return std::sqrt(v);
  }
  static cplx exp(const cplx& v) { return std::exp(v); }
  static cplx value(const cplx& v) { return v; }
};

template <>
struct RingOps<Jet> {
  static Jet zero(const Jet& like) { return Jet(like.nvars(), like.order()); }
  static Jet one(const Jet& like) {
    return Jet::constant(1.0, like.nvars(), like.order());
  }
  static double max_abs(const Jet& v) { return v.max_abs(); }
  static bool is_zero(const Jet& v) { return v.is_zero(); }
  static Jet inverse(const Jet& v) { return v.inverse(); }
  static Jet sqrt(const Jet& v) { return v.sqrt(); }
  static Jet exp(const Jet& v) { return v.exp(); }
  static cplx value(const Jet& v) { return v.value(); }
};

// Element of the Grassmann algebra on n generators, coefficients in Ring,
// keyed by subset bitmask. Multiplication follows the Koszul sign rule.
template <class Ring>
class Grassmann {
 public:
  using Mask = std::uint32_t;
  static constexpr int kMaxGenerators = 16;

  Grassmann() = default;
  explicit Grassmann(int n) : n_(n) {
    if (n < 0 || n > kMaxGenerators)
      fail(ErrorKind::InvalidParameter, "generator count out of range");
  }

  static Grassmann scalar(int n, Ring v) {
    Grassmann g(n);
    if (!RingOps<Ring>::is_zero(v)) g.c_[0] = std::move(v);
    return g;
  }
  static Grassmann theta(int n, int k, const Ring& one) {
    Grassmann g(n);
    if (k < 0 || k >= n) fail(ErrorKind::InvalidParameter, "generator index");
    g.c_[Mask(1) << k] = one;
    return g;
  }

  int generators() const { return n_; }
  const std::map<Mask, Ring>& coefficients() const { return c_; }
  bool is_zero() const { return c_.empty(); }

  Ring coeff(Mask m) const {
    auto it = c_.find(m);
    if (it != c_.end()) return it->second;
    return c_.empty() ? Ring{} : RingOps<Ring>::zero(c_.begin()->second);
  }
  void set_coeff(Mask m, Ring v) {
    if (RingOps<Ring>::is_zero(v)) c_.erase(m);
    else c_[m] = std::move(v);
  }

  // +1 even, -1 odd, 0 inhomogeneous or zero
  int parity() const {
    if (c_.empty()) return +1;
    int p = -2;
    for (const auto& [m, v] : c_) {
      int q = std::popcount(m) % 2;
      if (p == -2) p = q;
      else if (p != q) return 0;
    }
    return p == 0 ? +1 : -1;
  }

  Grassmann body() const {
    Grassmann g(n_);
    auto it = c_.find(0);
    if (it != c_.end()) g.c_[0] = it->second;
    return g;
  }
  Grassmann soul() const {
    Grassmann g = *this;
    g.c_.erase(0);
    return g;
  }
  Ring body_coeff() const { return coeff(0); }

  // parity-homogeneous parts
  Grassmann even_part() const {
    Grassmann g(n_);
    for (const auto& [m, v] : c_)
      if (std::popcount(m) % 2 == 0) g.c_[m] = v;
    return g;
  }
  Grassmann odd_part() const {
    Grassmann g(n_);
    for (const auto& [m, v] : c_)
      if (std::popcount(m) % 2 == 1) g.c_[m] = v;
    return g;
  }

  double max_abs() const {
    double r = 0;
    for (const auto& [m, v] : c_) r = std::max(r, RingOps<Ring>::max_abs(v));
    return r;
  }

  Grassmann operator-() const {
    Grassmann g = *this;
    for (auto& [m, v] : g.c_) v = -v;
    return g;
  }
  Grassmann& operator+=(const Grassmann& o) {
    n_ = std::max(n_, o.n_);
    for (const auto& [m, v] : o.c_) {
      auto it = c_.find(m);
      if (it == c_.end()) c_[m] = v;
      else {
        it->second += v;
        if (RingOps<Ring>::is_zero(it->second)) c_.erase(it);
      }
    }
    return g_self();
  }
  Grassmann& operator-=(const Grassmann& o) { return *this += -o; }
  friend Grassmann operator+(Grassmann a, const Grassmann& b) { return a += b; }
  friend Grassmann operator-(Grassmann a, const Grassmann& b) { return a -= b; }

  // sign of moving theta^T across theta^S into ascending order
  static int koszul_sign(Mask s, Mask t) {
    int inv = 0;
    Mask tt = t;
    while (tt) {
      int bit = std::countr_zero(tt);
      tt &= tt - 1;
      inv += std::popcount(s >> (bit + 1));
    }
    return inv % 2 ? -1 : +1;
  }

  friend Grassmann operator*(const Grassmann& a, const Grassmann& b) {
    Grassmann out(std::max(a.n_, b.n_));
    for (const auto& [ma, va] : a.c_)
      for (const auto& [mb, vb] : b.c_) {
        if (ma & mb) continue;  // nilpotency
        Ring prod = va * vb;
        if (RingOps<Ring>::is_zero(prod)) continue;
        if (koszul_sign(ma, mb) < 0) prod = -prod;
        auto it = out.c_.find(ma | mb);
        if (it == out.c_.end()) out.c_[ma | mb] = std::move(prod);
        else {
          it->second += prod;
          if (RingOps<Ring>::is_zero(it->second)) out.c_.erase(it);
        }
      }
    return out;
  }
  Grassmann& operator*=(const Grassmann& o) { return *this = *this * o; }

  friend Grassmann operator*(const Ring& s, const Grassmann& a) {
    Grassmann out(a.n_);
    for (const auto& [m, v] : a.c_) {
      Ring p = s * v;
      if (!RingOps<Ring>::is_zero(p)) out.c_[m] = std::move(p);
    }
    return out;
  }
  friend Grassmann operator*(const Grassmann& a, const Ring& s) {
    Grassmann out(a.n_);
    for (const auto& [m, v] : a.c_) {
      Ring p = v * s;
      if (!RingOps<Ring>::is_zero(p)) out.c_[m] = std::move(p);
    }
    return out;
  }
  friend Grassmann operator*(double s, const Grassmann& a) {
    Grassmann out(a.n_);
    for (const auto& [m, v] : a.c_) {
      Ring p = s * v;
      if (!RingOps<Ring>::is_zero(p)) out.c_[m] = std::move(p);
    }
    return out;
  }
  friend Grassmann operator*(const Grassmann& a, double s) { return s * a; }

  Grassmann inverse() const {
    Ring b = body_coeff();
    Ring binv = RingOps<Ring>::inverse(b);  // throws on zero body
    Grassmann nu = Grassmann::scalar(n_, binv) * soul();
    Grassmann acc = Grassmann::scalar(n_, RingOps<Ring>::one(b));
    Grassmann pw = acc;
    for (int k = 1; k <= n_; ++k) {
      pw = pw * nu;
      if (pw.is_zero()) break;
      acc += (k % 2 ? -1.0 : 1.0) * pw;
    }
    return Grassmann::scalar(n_, binv) * acc;
  }

  Grassmann sqrt() const {
    if (parity() != +1) fail(ErrorKind::ParityError, "sqrt of a non-even element");
    Ring b = body_coeff();
    Ring root = RingOps<Ring>::sqrt(b);  // principal branch on the body
    Grassmann nu = Grassmann::scalar(n_, RingOps<Ring>::inverse(b)) * soul();
    Grassmann acc = Grassmann::scalar(n_, RingOps<Ring>::one(b));
    Grassmann pw = acc;
    double binom = 1.0;
    for (int k = 1; k <= n_; ++k) {
      pw = pw * nu;
      binom *= (0.5 - (k - 1)) / k;
      if (pw.is_zero()) break;
      acc += binom * pw;
    }
    return Grassmann::scalar(n_, root) * acc;
  }

  Grassmann exp() const {
    Ring b = body_coeff();
    Grassmann nu = soul();
    Grassmann acc = Grassmann::scalar(n_, RingOps<Ring>::one(b));
    Grassmann pw = acc;
    double fact = 1.0;
    for (int k = 1; k <= n_ + 1; ++k) {
      pw = pw * nu;
      fact *= k;
      if (pw.is_zero()) break;
      acc += (1.0 / fact) * pw;
    }
    return Grassmann::scalar(n_, RingOps<Ring>::exp(b)) * acc;
  }

  // left derivative d/d theta_k
  Grassmann theta_derivative(int k) const {
    if (k < 0 || k >= n_) fail(ErrorKind::InvalidParameter, "generator index");
    Grassmann out(n_);
    Mask bit = Mask(1) << k;
    for (const auto& [m, v] : c_) {
      if (!(m & bit)) continue;
      int below = std::popcount(m & (bit - 1));
      out.c_[m & ~bit] = (below % 2) ? -v : v;
    }
    return out;
  }

  // left multiplication by theta_k
  Grassmann theta_times(int k) const {
    if (k < 0 || k >= n_) fail(ErrorKind::InvalidParameter, "generator index");
    Grassmann out(n_);
    Mask bit = Mask(1) << k;
    for (const auto& [m, v] : c_) {
      if (m & bit) continue;
      int below = std::popcount(m & (bit - 1));
      out.c_[m | bit] = (below % 2) ? -v : v;
    }
    return out;
  }

  bool operator==(const Grassmann& o) const { return n_ == o.n_ && c_ == o.c_; }

 private:
  Grassmann& g_self() {
    for (auto it = c_.begin(); it != c_.end();)
      it = RingOps<Ring>::is_zero(it->second) ? c_.erase(it) : std::next(it);
    return *this;
  }

  int n_ = 0;
  std::map<Mask, Ring> c_;
};

template <class Ring>
  requires(!std::is_same_v<Ring, cplx>)
Grassmann<Ring> operator*(cplx s, const Grassmann<Ring>& a) {
  Grassmann<Ring> out(a.generators());
  for (const auto& [m, v] : a.coefficients()) out.set_coeff(m, s * v);
  return out;
}

using GrassmannElement = Grassmann<cplx>;
using SuperJet = Grassmann<Jet>;

// jet-direction derivative of a jet-valued Grassmann element
inline SuperJet jet_derivative(const SuperJet& x, int var) {
  SuperJet out(x.generators());
  for (const auto& [m, v] : x.coefficients()) out.set_coeff(m, v.derivative(var));
  return out;
}

// superderivation e_k = d/dtheta_k + theta_k d/du_k
inline SuperJet e_dot(const SuperJet& x, int k) {
  return x.theta_derivative(k) + jet_derivative(x, k).theta_times(k);
}

// jet constant part: collapse jets to their values
inline GrassmannElement jet_value(const SuperJet& x) {
  GrassmannElement out(x.generators());
  for (const auto& [m, v] : x.coefficients()) out.set_coeff(m, v.value());
  return out;
}

}  // namespace frob
