#pragma once

#include <string>
#include <vector>

#include "frob/potential.hpp"

namespace frob {

// Positions u in C^m with residue matrices A_j on a vector space T == C^m
// carrying a constant metric g, plus the constant data shared by the flow.
struct SchlesingerSystem {
  int m = 0;
  VectorXcd u;
  std::vector<MatrixXcd> A;
  MatrixXcd g;
  MatrixXcd W;  // sum of the A_j, constant along the flow
  VectorXcd e;  // identity vector, when declared
  double D = 0.0;
  bool special_built = false;
  bool has_identity = false;

  MatrixXcd V() const;  // -W - Id/2
  double min_gap() const;
  void validate(double guard = 0.0) const;
};

// Special initial data: eta with zero sum, v with v_ij eta_j = -v_ji eta_i and
// constant column sums 1 - D/2.
struct SpecialInitData {
  int m = 0;
  double D = 0.0;
  VectorXcd eta;
  MatrixXcd v;

  void validate(double tol = 1e-10) const;
};

// Solves the constraints explicitly from the free antisymmetric block
// w_ij = v_ij eta_j, 1 <= i < j <= m-1 (row-major order of that block).
SpecialInitData sample_initial_space(int m, double D, const VectorXcd& eta,
                                     const std::vector<cplx>& upper_w);

SchlesingerSystem build_special(const SpecialInitData& init);

// dA_j contracted with a tangent direction in C^m.
std::vector<MatrixXcd> schlesinger_rhs(const SchlesingerSystem& s,
                                       const VectorXcd& direction,
                                       double guard = 0.0);

struct IntegrationPath {
  std::vector<VectorXcd> waypoints;  // piecewise linear, first == start
  double guard_rel = 1e-3;           // fraction of the minimal initial gap
};

struct IntegrateOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double monitor_tol = 1e-6;
  double h0 = 1e-2;
  double hmin = 1e-12;
  bool check_monitors = true;
  bool record = false;
  bool fixed_step = false;  // order-verification mode
  double fixed_h = 1e-3;
};

struct StepRecord {
  double t = 0;  // global path parameter, one unit per segment
  VectorXcd u;
  std::vector<MatrixXcd> A;
  double conservation = 0;
  double rank1_defect = 0;
  double quad_defect = 0;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  cplx logtau{0.0, 0.0};
  double max_conservation = 0;
  double max_rank1_defect = 0;
  double max_quad_defect = 0;
};

// Advances s along the path (mutating u and A); returns the trajectory log.
// The stored A_j are residues of the logarithmic connection
// d + sum A_i dlog(lambda - u^i) and evolve by
// dA_j = -sum_{i != j} [A_i, A_j] dlog(u^i - u^j); equivalently, -A_j
// follows the textbook orientation evaluated by schlesinger_rhs.
Trajectory integrate(SchlesingerSystem& s, const IntegrationPath& path,
                     const IntegrateOptions& opts = {});

struct TauReport {
  cplx logtau{0.0, 0.0};
  cplx tau{1.0, 0.0};           // endpoint value relative to the start
  VectorXcd omega_start;        // components of the closed 1-form at the ends
  VectorXcd omega_end;
  double closedness = 0;  // finite-difference mixed partials of omega
};

TauReport tau(const SchlesingerSystem& s, const IntegrationPath& path,
              const IntegrateOptions& opts = {});

struct ClassificationReport {
  bool is_special = false;
  bool is_strict_special = false;
  bool has_identity = false;
  double special_residual = 0;
  double strict_residual = 0;
  double identity_residual = 0;
  double weight_D = 0;
  std::string strict_route;  // "w-invertible" or "finite-difference"
  std::vector<MatrixXcd> P;
};

ClassificationReport check_solution(const SchlesingerSystem& s,
                                    double tol = 1e-8);

struct ReconstructionReport {
  VectorXcd eta;             // eta_j at the current point
  double symmetry_residual;  // max |e_i eta_j - e_j eta_i|
  double euler_residual;     // max |E eta_j - (D-2) eta_j|
  double t_shift;            // 0 when no shift was needed
};

ReconstructionReport reconstruct_frobenius(const SchlesingerSystem& s,
                                           double fd_rel = 1e-6);

}  // namespace frob
