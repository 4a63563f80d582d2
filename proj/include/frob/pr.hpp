#pragma once

#include <cstdint>

#include "frob/gw.hpp"
#include "frob/schlesinger.hpp"

namespace frob::pr {

// Closed-form canonical data of quantum P^r at (x0, x1, 0, ..., 0).
struct ClosedForms {
  int r = 0;
  cplx zeta;
  double D = 0;
  VectorXcd u;       // u^i = x0 + zeta^i (r+1) e^{x1/(r+1)}
  VectorXcd eta;     // eta_i = zeta^i/(r+1) e^{-x1 r/(r+1)}
  MatrixXcd v;       // v(j,k) = -zeta^{j-k}/(1-zeta^{j-k}), zero diagonal
  MatrixXcd eta_ki;  // eta_ki(k,i) = e_k eta_i for k != i, zero diagonal
};

ClosedForms closed_forms(int r, cplx x0, cplx x1);

// Perturbative idempotent chart on the plane x_2 = ... = x_r = 0.
struct PerturbativeChart {
  int r = 0;
  VectorXcd u;
  VectorXcd eta;
  MatrixXcd frame;   // frame(a, i) = flat component a of e_i
  MatrixXcd eta_ki;
  MatrixXcd grad_u;  // grad_u(a, j) = d u^j / d x_a on the plane
};

PerturbativeChart perturbative_chart(int r, cplx x0, cplx x1);

// Residue matrices and metric of the special initial conditions at the point.
SchlesingerSystem schlesinger_from_closed_forms(int r, cplx x0, cplx x1);

struct CrossValidationReport {
  double u_dev = 0;
  double eta_dev = 0;
  double v_dev = 0;
  bool special_ok = false;
  double special_residual = 0;
};

// Numeric pipeline (recursion -> splitting) against the closed forms.
// wrong_metric replaces the Poincare pairing by the identity as a negative
// control; the deviations then flag the mismatch.
CrossValidationReport cross_validate(int r, cplx x0, cplx x1, double tol,
                                     int d_max = 1, bool wrong_metric = false,
                                     std::uint64_t probe_seed = 0x5eed5eedULL);

struct SpectrumReport {
  VectorXcd eigenvalues;      // of W = -V - 1/2, sorted by real part
  double spectrum_dev = 0;    // vs {a - (r+1)/2 : a = 0..r}
  bool zero_in_spectrum = false;
  double row_sum_dev = 0;     // sum_{k != j} v_jk vs r/2
};

SpectrumReport spectrum_checks(int r);

}  // namespace frob::pr
