#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "frob/gw.hpp"

namespace frob {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Affine Euler/conformal data: E(x) = jac x + shift, with jac(b,a) = dE^b/dx_a.
struct EulerData {
  MatrixXcd jac;
  VectorXcd shift;
  double d0 = 1.0;
  double D = 0.0;

  VectorXcd at(const VectorXcd& x) const { return jac * x + shift; }
};

struct DerivValue {
  cplx value{0.0, 0.0};
  double trunc_rel = 0.0;  // |last retained degree term| / |value|
};

// Floating evaluator for the truncated P^r potential built on an exact table.
class TruncatedPotential {
 public:
  TruncatedPotential() = default;
  explicit TruncatedPotential(gw::GWTable table, int max_jet_order = 2);

  int r() const { return table_.r(); }
  int d_max() const { return table_.d_max(); }
  int max_jet_order() const { return max_jet_order_; }
  const gw::GWTable& table() const { return table_; }

  // Mixed partial derivative of the potential for an index list of length
  // >= 3 (indices in [0, r]); lengths beyond 3 + max_jet_order are rejected.
  DerivValue derivative(const VectorXcd& x, const std::vector<int>& idx) const;

  DerivValue third(const VectorXcd& x, int a, int b, int c) const {
    return derivative(x, {a, b, c});
  }

 private:
  gw::GWTable table_;
  int max_jet_order_ = 2;
  // evaluation lists per (d, derivative multiset L): (monomial, coefficient);
  // guarded so evaluations may run concurrently
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, gw::Multiset>,
                   std::vector<std::pair<gw::Multiset, double>>>
      cache_;
};

// Pointwise source of Frobenius structure data in flat coordinates.
class PotentialField {
 public:
  virtual ~PotentialField() = default;
  virtual int dim() const = 0;
  virtual const MatrixXcd& metric() const = 0;
  // phi[a](b,c) = third derivative Phi_abc at x
  virtual void third(const VectorXcd& x, std::vector<MatrixXcd>& phi) const = 0;
  virtual const EulerData* euler() const { return nullptr; }
};

// Quantum cohomology of P^r over a computed table.
class QhField : public PotentialField {
 public:
  explicit QhField(gw::GWTable table);
  int dim() const override { return pot_.r() + 1; }
  const MatrixXcd& metric() const override { return g_; }
  void third(const VectorXcd& x, std::vector<MatrixXcd>& phi) const override;
  const EulerData* euler() const override { return &euler_; }
  const TruncatedPotential& potential() const { return pot_; }

 private:
  TruncatedPotential pot_;
  MatrixXcd g_;
  EulerData euler_;
};

std::shared_ptr<const QhField> make_qh_field(int r, int d_max);

// Function-backed field for models and negative controls in tests.
class ExplicitField : public PotentialField {
 public:
  using ThirdFn = std::function<void(const VectorXcd&, std::vector<MatrixXcd>&)>;
  ExplicitField(int n, MatrixXcd g, ThirdFn fn,
                std::optional<EulerData> euler = std::nullopt)
      : n_(n), g_(std::move(g)), fn_(std::move(fn)), euler_(std::move(euler)) {}
  int dim() const override { return n_; }
  const MatrixXcd& metric() const override { return g_; }
  void third(const VectorXcd& x, std::vector<MatrixXcd>& phi) const override {
    fn_(x, phi);
  }
  const EulerData* euler() const override {
    return euler_ ? &*euler_ : nullptr;
  }

 private:
  int n_;
  MatrixXcd g_;
  ThirdFn fn_;
  std::optional<EulerData> euler_;
};

// Quantum cohomology of the projective line, Phi = x0^2 x1 / 2 + exp(x1).
std::shared_ptr<const PotentialField> make_qh_p1_field();

}  // namespace frob
