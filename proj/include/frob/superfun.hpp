#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "frob/grassmann.hpp"

namespace frob {

using Eigen::VectorXcd;

// Scalar expressions in u_1..u_n: sums, products, integer powers, quotients
// and exp(); evaluated with exact jets at a point.
class Expr {
 public:
  virtual ~Expr() = default;
  virtual Jet eval(const VectorXcd& u, int order) const = 0;
};

using ExprPtr = std::shared_ptr<const Expr>;

ExprPtr parse_expression(const std::string& text, int nvars);

// Odd-coordinate expansion of a superfunction: sum of coeff(u) * theta^S.
struct PsiTerm {
  std::uint32_t mask = 0;
  ExprPtr coeff;
};

struct PsiSpec {
  int n = 0;           // odd coordinates theta^1..theta^n, even u^1..u^n
  int declared_parity = -1;  // -1 odd, +1 even
  std::vector<PsiTerm> terms;

  SuperJet eval(const VectorXcd& u, int order) const;
};

PsiSpec psi_from_json(const std::string& text);

// Debug serialization: sorted-by-bitmask list of (subset, [re, im]) pairs.
// Round trips exactly.
std::string grassmann_debug_dump(const GrassmannElement& x);
GrassmannElement grassmann_debug_parse(const std::string& text);

}  // namespace frob
