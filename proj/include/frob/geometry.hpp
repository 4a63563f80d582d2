#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "frob/potential.hpp"

namespace frob {

struct FrobeniusPoint {
  std::shared_ptr<const PotentialField> field;
  VectorXcd x;
  MatrixXcd g, ginv;
  std::vector<MatrixXcd> phi;   // phi[a](b,c) = Phi_abc
  std::vector<MatrixXcd> mult;  // mult[a] * v = components of (d_a o v)

  int dim() const { return int(x.size()); }
  const EulerData* euler() const { return field->euler(); }
  // operator of multiplication by the tangent vector v
  MatrixXcd mult_by(const VectorXcd& v) const;
};

FrobeniusPoint build_point(std::shared_ptr<const PotentialField> field,
                           const VectorXcd& x);

// max over (a,b,c,d) of the associativity defect of the structure tensor
double associativity_residual(const FrobeniusPoint& p);

struct ProbePolicy {
  bool prefer_euler = true;
  std::uint64_t seed = 0x5eed5eedULL;
  int max_retries = 8;
  double tame_tol = 1e-6;       // relative eigenvalue gap
  double fd_step = 1e-5;        // rotation-coefficient stencil scale
  bool with_gamma = true;
};

struct CanonicalChart {
  VectorXcd u;
  MatrixXcd frame;     // columns are the idempotents e_i in the flat basis
  // metric weights g(e_i, e_i); these are simultaneously the increments of
  // the metric potential along e_i and the co-identity coefficients in the
  // dual canonical frame
  VectorXcd eta;
  VectorXcd sqrt_eta;  // recorded square-root branches
  MatrixXcd gamma;     // rotation coefficients from stencil derivatives
  bool values_from_euler = true;
  double min_gap = 0.0;

  int dim() const { return int(u.size()); }
  VectorXcd identity() const { return frame.rowwise().sum(); }
  MatrixXcd normalized_frame() const;  // columns f_i = e_i / sqrt(eta_i)
};

CanonicalChart semisimple_split(const FrobeniusPoint& p,
                                const ProbePolicy& policy = {});

// Split at p with labels and square-root branches matched to ref by
// nearest canonical value / nearest branch (eigenvalue continuity).
CanonicalChart matched_chart(const FrobeniusPoint& p, const CanonicalChart& ref,
                             const ProbePolicy& policy = {});

struct OperatorPair {
  MatrixXcd U, V;          // in the normalized frame f_i
  std::string frame_tag = "f";
};

MatrixXcd flat_u_operator(const FrobeniusPoint& p);  // E o
MatrixXcd flat_v_operator(const FrobeniusPoint& p);  // grad E - D/2
OperatorPair uv_operators(const FrobeniusPoint& p, const CanonicalChart& chart);
// V in the f-frame rebuilt from the chart's rotation coefficients
MatrixXcd v_from_gamma(const CanonicalChart& chart);

enum class ConnectionKind { First, Extended, Second, Deformed };

// Connection coefficient matrices in the flat trivialization at fixed lambda:
// covariant derivative along d_a is  d_a + coeff[a],  along d_lambda is
// d_lambda + lambda_dir.
struct ConnectionCoefficients {
  std::vector<MatrixXcd> coeff;
  MatrixXcd lambda_dir;
  bool has_lambda_dir = false;
};

ConnectionCoefficients connection_coefficients(const FrobeniusPoint& p,
                                               ConnectionKind kind, cplx lambda,
                                               double s = 0.0,
                                               double guard = 1e-8);

struct ConnectionReport {
  // First: curvature split over lambda samples
  double r0 = 0, r1 = 0, r2 = 0;
  // Second/Deformed/Extended: base curvature and mixed (x,lambda) residual
  double base = 0, mixed = 0;
};

ConnectionReport connection_residual(const FrobeniusPoint& p,
                                     ConnectionKind kind,
                                     const std::vector<cplx>& lambdas,
                                     double fd_step = 0.0, double s = 0.0,
                                     double guard = 1e-8);

struct DarbouxReport {
  double de_closed = 0;    // e_k gamma_ij vs gamma_ik gamma_kj
  double de_identity = 0;  // sum_k e_k gamma_ij
  double de_euler = 0;     // sum_k u^k e_k gamma_ij + gamma_ij
  bool de_closed_vacuous = false;
};

DarbouxReport darboux_egoroff_residual(const FrobeniusPoint& p,
                                       const CanonicalChart& chart,
                                       double step = 1e-4);

struct EulerReport {
  double conformal = 0;  // Lie_E g = D g
  double product = 0;    // Lie_E o = d0 o
  double potential = 0;  // E Phi = (d0 + D) Phi mod quadratic
  double pairing = 0;    // (d_a + d_b - D) g_ab, when ad E is diagonal
  bool pairing_checked = false;
};

EulerReport euler_check(const FrobeniusPoint& p);

std::string chart_to_json(const CanonicalChart& chart);

}  // namespace frob
