#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "frob/superfun.hpp"

namespace frob::super {

using SJ = SuperJet;
using SJMat = std::vector<std::vector<SJ>>;  // n x n, entries Grassmann-jet

// Tangent element of T = T1 + T0 in the basis {e_alpha-dot, e_alpha}
// (on TM the undotted slots are the coordinate fields d/du^alpha).
struct SuperVec {
  std::vector<SJ> dot, undot;

  SuperVec() = default;
  explicit SuperVec(int n) : dot(n, SJ(n)), undot(n, SJ(n)) {}
  int n() const { return int(dot.size()); }
  SuperVec& operator+=(const SuperVec& o);
  SuperVec& operator-=(const SuperVec& o);
  friend SuperVec operator+(SuperVec a, const SuperVec& b) { return a += b; }
  friend SuperVec operator-(SuperVec a, const SuperVec& b) { return a -= b; }
  double max_abs() const;
};

// table products with Koszul-signed extension to Grassmann coefficients
SuperVec circ_product(const SuperVec& x, const SuperVec& y);
SuperVec bullet_product(const SuperVec& x, const SuperVec& y);

SuperVec identity_e(int n);        // sum of e_alpha
SuperVec identity_eps(int n);      // sum of e_alpha-dot

// Pointwise Egoroff data of an odd potential, with exact jets in u.
struct SuperChart {
  int n = 0;
  int jet_order = 2;
  VectorXcd u;
  SJ psi;
  std::vector<SJ> eta_dot;    // even, invertible body
  std::vector<SJ> eta_undot;  // odd
  std::vector<SJ> sqrt_eta;   // recorded branches
  std::vector<std::vector<SJ>> gamma;          // odd, antisymmetric
  std::vector<std::vector<SuperVec>> lc_dot;   // nabla_{e_mu}(e_alpha-dot)
  std::vector<std::vector<SuperVec>> lc_undot; // nabla_{e_mu}(d_alpha)
  std::vector<std::vector<SuperVec>> tn_dot;   // tilde-nabla on T1
  std::vector<std::vector<SuperVec>> tn_undot; // tilde-nabla on T0
};

SuperChart egoroff_chart(const PsiSpec& psi, const VectorXcd& u,
                         int jet_order = 2);

// covariant derivative along e_mu-dot of a coefficient vector field
SuperVec covariant_derivative(const SuperChart& chart, int mu,
                              const SuperVec& X, bool tilde = false);

struct ResidualReport {
  std::map<std::string, double> values;
  std::vector<std::string> vacuous;
  double max() const;
};

enum class SuperEq {
  DarbouxEgoroff,   // (4.3) and (4.4)
  TnablaFlat,       // (4.16)
  FlatIdentityE,    // (4.7)/(4.8)
  FlatIdentityEps,  // (4.9)/(4.10)
  Euler,            // (4.12) and (4.14), needs D
  Orthogonality,    // sum of eta_dot (null pairing of the two identities)
};

ResidualReport super_residuals(const PsiSpec& psi, const VectorXcd& u,
                               const std::vector<SuperEq>& which,
                               double D = 0.0);

struct TnablaReport {
  double isotropy = 0;       // g(e-tilde_a, e-tilde_b)
  double parallel_h = 0;     // tilde-nabla h
  double parallel_gt = 0;    // tilde-nabla g-tilde
  double pi_compat = 0;      // Lemma 4.8.3
  double frobenius = 0;      // g-tilde(X o Y, Z) = g-tilde(X, Y o Z)
  double characterization = 0;  // Proposition 4.10.4 (a)(b)(c)
  double metric_tables = 0;  // h and g-tilde component values
};

TnablaReport tnabla_and_metrics(const PsiSpec& psi, const VectorXcd& u,
                                std::uint64_t seed = 7);

struct SuperVReport {
  SJMat V;  // V(b,a) = coefficient of e_b-dot in V(e_a-dot)
  double def_vs_formula = 0;
  double h_symmetry = 0;
  double eps_eigenvalue = 0;
  double tnabla_v = 0;
};

SuperVReport super_v_operator(const PsiSpec& psi, const VectorXcd& u, double D);

// Neveu-Schwarz commutation relations as exact polynomial identities;
// i2_max is twice the largest half-integer index.
double ns_representation_check(int n, int a_max, int i2_max);

// ---- supersymmetric Schlesinger ----

// evaluator of the residue fields: u -> n matrices with jets of given order
using AFieldFn =
    std::function<std::vector<SJMat>(const VectorXcd& u, int jet_order)>;

struct SuperSchlesingerReport {
  double off_diag = 0;        // (5.2)
  double diag = 0;            // (5.3)
  double body_reduction = 0;  // against the classical right-hand side
  std::map<int, double> level_residual;  // theta-expansion levels
};

SuperSchlesingerReport super_schlesinger_residual(int n, const AFieldFn& fields,
                                                  const VectorXcd& u);

struct HierarchyView {
  int levels = 0;          // even subset sizes <= n
  int present_levels = 0;  // levels actually carrying field components
  std::map<int, double> residual_by_level;
};

HierarchyView expand_theta_components(int n, const AFieldFn& fields,
                                      const VectorXcd& u);

// kappa-linear terms of the covariant equations (5.8)-(5.9) built from a
// potential chart; returns {kappa^0 residual, kappa^1 residual}.
struct KappaReport {
  double order0 = 0;
  double order1 = 0;
};
KappaReport kappa_linearity_check(const PsiSpec& psi, const VectorXcd& u,
                                  double D);

struct SuperSchlesingerSystem {
  int n = 0;
  Eigen::MatrixXcd h;    // constant skew form values h(e_i, e_j)
  Eigen::MatrixXcd Vop;  // constant h-symmetric operator
  double kappa = 0;
  double D = 0;
  VectorXcd eps;
  // projector fields; A_nu = -(Vop + kappa) P_nu
  std::function<std::vector<SJMat>(const VectorXcd&, int)> P_fields;
};

struct StrictSpecialReport {
  double projectors = 0;      // (5.11)
  double decomposition = 0;   // (5.10)
  double eps_eigen = 0;       // (5.12)
  double id_513 = 0;          // the (5.13) pairing identity
  double omega_closed = 0;    // step 1: the three component families
  double euler_eta = 0;       // step 3
  double step4 = 0;           // (4.9)-type vanishing
  double min_e_dot = 0;       // nonvanishing of P_nu(eps)
};

StrictSpecialReport strict_special_super(const SuperSchlesingerSystem& s,
                                         const std::vector<VectorXcd>& samples);

// ---- crafted n = 2 fixtures (derived oracles live in the tests) ----

PsiSpec crafted_psi_n2();

struct CraftedSuperSchlesinger {
  SuperSchlesingerSystem system;
  AFieldFn a_fields;
  VectorXcd u0;
};

CraftedSuperSchlesinger crafted_super_schlesinger_n2(double D = 0.5,
                                                     double kappa = 0.3);

}  // namespace frob::super
