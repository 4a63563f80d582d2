#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "frob/error.hpp"
#include "frob/rational.hpp"

namespace frob::gw {

// Multiset of cohomology degrees, sorted ascending, entries in [2, r].
using Multiset = std::vector<int>;

std::string multiset_to_string(const Multiset& a);
Multiset multiset_from_string(const std::string& s);

// Grading weight: sum(a_i - 1) carried by a degree-d instanton monomial.
inline long grading_weight(int r, int d) { return long(r + 1) * d + r - 3; }

struct GWKey {
  int d = 0;
  Multiset a;

  bool operator<(const GWKey& o) const {
    if (d != o.d) return d < o.d;
    return a < o.a;
  }
  bool operator==(const GWKey& o) const { return d == o.d && a == o.a; }
};

// Validates the key invariants for projective dimension r; throws on failure.
void validate_key(int r, const GWKey& key);

// All multisets a with entries in [2,r], |a| >= 2 and
// sum(a) = (r+1)d + r - 3 + |a|, lexicographically sorted.
std::vector<Multiset> admissible_keys(int r, int d);

class GWTable {
 public:
  GWTable() = default;
  GWTable(int r, int d_max) : r_(r), d_max_(d_max) {}

  int r() const { return r_; }
  int d_max() const { return d_max_; }

  const Int& at(int d, const Multiset& a) const;
  bool contains(int d, const Multiset& a) const;
  void set(int d, const Multiset& a, Int value);

  const std::map<GWKey, Int>& entries() const { return entries_; }

  bool operator==(const GWTable& o) const {
    return r_ == o.r_ && d_max_ == o.d_max_ && entries_ == o.entries_;
  }

 private:
  int r_ = 0;
  int d_max_ = 0;
  std::map<GWKey, Int> entries_;
};

// Builds the unique table for which the truncated potential satisfies all
// associativity identities up to instanton degree d_max, seeded by
// I(1; r, r) = 1. Exact rational elimination; entries come out integral.
GWTable compute_gw_table(int r, int d_max);

struct WdvvReport {
  Rational max_abs_residual = 0;          // 0 iff all identities hold
  bool violated = false;
  int degree = 0;                         // witness data below, when violated
  std::array<int, 4> indices{0, 0, 0, 0};
  Multiset monomial;
  Rational residual = 0;
};

// Exact check of every associativity coefficient identity with instanton
// degree <= window against the table.
WdvvReport wdvv_residual_exact(const GWTable& table, int window);

// CSV with header "r,d,a_multiset,value"; bit-exact round trip.
void write_csv(const GWTable& table, std::ostream& os);
GWTable read_csv(std::istream& is);

}  // namespace frob::gw
