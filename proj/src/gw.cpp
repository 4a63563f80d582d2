#include "frob/gw.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace frob::gw {

namespace {

// --- multiset helpers (sorted ascending vectors) ---

bool is_sorted_multiset(const Multiset& a) {
  return std::is_sorted(a.begin(), a.end());
}

Multiset merge(const Multiset& x, const Multiset& y) {
  Multiset out;
  out.reserve(x.size() + y.size());
  std::merge(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

// Whether x contains y with multiplicity; if so fills diff = x minus y.
bool contains_with_diff(const Multiset& x, const Multiset& y, Multiset& diff) {
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

Int multiplicity_factorial(const Multiset& m) {
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

using Poly = std::map<Multiset, Rational>;

// Derivative-index triple split: instanton third derivatives vanish when any
// index is 0; each index 1 contributes a factor d; indices >= 2 act on the
// degree-d polynomial.
struct TripleSplit {
  bool zero = false;
  int ones = 0;
  Multiset L;
};

TripleSplit split_triple(std::initializer_list<int> idx) {
  TripleSplit s;
  for (int v : idx) {
    if (v == 0) s.zero = true;
    else if (v == 1) s.ones++;
    else s.L.push_back(v);
  }
  std::sort(s.L.begin(), s.L.end());
  return s;
}

Rational int_pow(long base, int e) {
  Rational r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// G^(d)_L = sum over admissible degree-d keys k containing L of
// I(d;k)/mult!(k minus L) x^{k minus L}.
class GPolyCache {
 public:
  GPolyCache(const GWTable& t) : t_(t) {}

  const Poly& get(int d, const Multiset& L) {
    auto key = std::make_pair(d, L);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Poly p;
    Multiset m;
    for (const Multiset& k : admissible_keys(t_.r(), d)) {
      if (!contains_with_diff(k, L, m)) continue;
      p[m] += Rational(t_.at(d, k)) / multiplicity_factorial(m);
    }
    return cache_.emplace(key, std::move(p)).first->second;
  }

 private:
  const GWTable& t_;
  std::map<std::pair<int, Multiset>, Poly> cache_;
};

// Linear form c0 + sum coeffs[i] * unknown_i in the degree-D values.
struct LinForm {
  Rational c0 = 0;
  std::map<int, Rational> coeffs;
  bool trivial() const {
    if (c0 != 0) return false;
    for (const auto& [i, c] : coeffs)
      if (c != 0) return false;
    return true;
  }
};

using EqMap = std::map<Multiset, LinForm>;

struct DegreeContext {
  int r;
  int D;
  const std::vector<Multiset>* keys;   // admissible keys of degree D
  const std::map<Multiset, int>* idx;  // key -> unknown index
  GPolyCache* gcache;                  // degrees < D
};

// Adds sign * F^(D)_{triple} symbolically (unknown-bearing) into eq.
void add_symbolic(EqMap& eq, const DegreeContext& cx, TripleSplit s,
                  int sign) {
  if (s.zero) return;
  Rational factor = int_pow(cx.D, s.ones) * sign;
  Multiset m;
  for (const Multiset& k : *cx.keys) {
    if (!contains_with_diff(k, s.L, m)) continue;
    eq[m].coeffs[cx.idx->at(k)] += factor / multiplicity_factorial(m);
  }
}

// Adds sign * F^(d1)_{t1} * F^(d2)_{t2} (both known, d1,d2 < D) into eq.
void add_known_product(EqMap& eq, const DegreeContext& cx, TripleSplit t1,
                       int d1, TripleSplit t2, int d2, int sign) {
  if (t1.zero || t2.zero) return;
  const Poly& p1 = cx.gcache->get(d1, t1.L);
  const Poly& p2 = cx.gcache->get(d2, t2.L);
  if (p1.empty() || p2.empty()) return;
  Rational factor = int_pow(d1, t1.ones) * int_pow(d2, t2.ones) * sign;
  for (const auto& [m1, c1] : p1)
    for (const auto& [m2, c2] : p2)
      eq[merge(m1, m2)].c0 += factor * c1 * c2;
}

// Degree-D coefficient equations of the associativity identity for flat
// indices (a,b,c,z): sum_e Phi_abe Phi_{(r-e)cz} - sum_e Phi_bce Phi_{(r-e)az}.
EqMap assemble_equations(const DegreeContext& cx, int a, int b, int c, int z) {
  const int r = cx.r;
  EqMap eq;
  // classical x degree-D cross terms, left minus right
  if (a + b <= r) add_symbolic(eq, cx, split_triple({a + b, c, z}), +1);
  if (c + z <= r) add_symbolic(eq, cx, split_triple({a, b, c + z}), +1);
  if (b + c <= r) add_symbolic(eq, cx, split_triple({b + c, a, z}), -1);
  if (a + z <= r) add_symbolic(eq, cx, split_triple({b, c, a + z}), -1);
  // instanton x instanton cross terms
  for (int d1 = 1; d1 < cx.D; ++d1) {
    int d2 = cx.D - d1;
    for (int e = 0; e <= r; ++e) {
      add_known_product(eq, cx, split_triple({a, b, e}), d1,
                        split_triple({r - e, c, z}), d2, +1);
      add_known_product(eq, cx, split_triple({b, c, e}), d1,
                        split_triple({r - e, a, z}), d2, -1);
    }
  }
  return eq;
}

}  // namespace

std::string multiset_to_string(const Multiset& a) {
  std::string s;
  for (size_t i = 0; i < a.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(a[i]);
  }
  return s;
}

Multiset multiset_from_string(const std::string& s) {
  Multiset a;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, '-')) {
    if (part.empty()) fail(ErrorKind::ParseError, "bad multiset: " + s);
    a.push_back(std::stoi(part));
  }
  if (!is_sorted_multiset(a)) fail(ErrorKind::ParseError, "unsorted multiset: " + s);
  return a;
}

void validate_key(int r, const GWKey& key) {
  if (r < 2) fail(ErrorKind::InvalidParameter, "r must be >= 2");
  if (key.d < 1) fail(ErrorKind::InvalidParameter, "d must be >= 1");
  if (!is_sorted_multiset(key.a))
    fail(ErrorKind::InvalidParameter, "key multiset must be sorted ascending");
  long sum = 0;
  for (int v : key.a) {
    if (v < 2 || v > r)
      fail(ErrorKind::InvalidParameter, "key entries must lie in [2, r]");
    sum += v;
  }
  if (key.a.size() < 2)
    fail(ErrorKind::InvalidParameter, "keys with d >= 1 need n >= 2");
  if (sum != grading_weight(r, key.d) + long(key.a.size()))
    fail(ErrorKind::InvalidParameter,
         "grading violated for key d=" + std::to_string(key.d) + " a=" +
             multiset_to_string(key.a));
}

std::vector<Multiset> admissible_keys(int r, int d) {
  if (r < 2) fail(ErrorKind::InvalidParameter, "r must be >= 2");
  if (d < 1) fail(ErrorKind::InvalidParameter, "d must be >= 1");
  const long target = grading_weight(r, d);  // sum of (a_i - 1)
  std::vector<Multiset> out;
  Multiset cur;
  // ascending enumeration = lexicographic order on sorted multisets
  auto rec = [&](auto&& self, int minVal, long remaining) -> void {
    if (remaining == 0) {
      if (cur.size() >= 2) out.push_back(cur);
      return;
    }
    for (int v = minVal; v <= r; ++v) {
      if (v - 1 > remaining) break;
      cur.push_back(v);
      self(self, v, remaining - (v - 1));
      cur.pop_back();
    }
  };
  rec(rec, 2, target);
  return out;
}

const Int& GWTable::at(int d, const Multiset& a) const {
  auto it = entries_.find(GWKey{d, a});
  if (it == entries_.end())
    fail(ErrorKind::InvalidParameter,
         "no table entry d=" + std::to_string(d) + " a=" + multiset_to_string(a));
  return it->second;
}

bool GWTable::contains(int d, const Multiset& a) const {
  return entries_.count(GWKey{d, a}) > 0;
}

void GWTable::set(int d, const Multiset& a, Int value) {
  validate_key(r_, GWKey{d, a});
  entries_[GWKey{d, a}] = std::move(value);
}

GWTable compute_gw_table(int r, int d_max) {
  if (r < 2) fail(ErrorKind::InvalidParameter, "r must be >= 2");
  if (d_max < 1) fail(ErrorKind::InvalidParameter, "d_max must be >= 1");
  GWTable table(r, d_max);
  GPolyCache gcache(table);

  for (int D = 1; D <= d_max; ++D) {
    std::vector<Multiset> keys = admissible_keys(r, D);
    // unknown order: by (n, lexicographic a)
    std::vector<Multiset> order = keys;
    std::stable_sort(order.begin(), order.end(),
                     [](const Multiset& x, const Multiset& y) {
                       if (x.size() != y.size()) return x.size() < y.size();
                       return x < y;
                     });
    std::map<Multiset, int> idx;
    for (size_t i = 0; i < order.size(); ++i) idx[order[i]] = int(i);
    const int N = int(order.size());

    DegreeContext cx{r, D, &keys, &idx, &gcache};

    using Row = std::vector<Rational>;  // N coefficients then the constant
    std::vector<Row> rows;
    std::set<Row> seen;
    auto push_row = [&](Row row) {
      int lead = -1;
      for (int i = 0; i <= N; ++i)
        if (row[i] != 0) {
          lead = i;
          break;
        }
      if (lead < 0) return;
      Rational scale = row[lead];
      for (auto& v : row) v /= scale;
      if (seen.insert(row).second) rows.push_back(std::move(row));
    };

    if (D == 1) {
      // seed I(1; r, r) = 1
      Multiset seedKey{r, r};
      Row row(N + 1, Rational(0));
      row[idx.at(seedKey)] = 1;
      row[N] = -1;
      push_row(std::move(row));
    }

    for (int a = 0; a <= r; ++a)
      for (int b = 0; b <= r; ++b)
        for (int c = 0; c <= r; ++c)
          for (int z = 0; z <= r; ++z) {
            EqMap eq = assemble_equations(cx, a, b, c, z);
            for (const auto& [m, lf] : eq) {
              if (lf.trivial()) continue;
              Row row(N + 1, Rational(0));
              for (const auto& [i, v] : lf.coeffs) row[i] = v;
              row[N] = lf.c0;
              push_row(std::move(row));
            }
          }

    // exact Gaussian elimination with unit pivots
    std::vector<Row> pivot(N);
    std::vector<bool> have(N, false);
    for (Row& row : rows) {
      for (int j = 0; j < N; ++j) {
        if (row[j] == 0 || !have[j]) continue;
        Rational f = row[j];
        for (int k = j; k <= N; ++k) row[k] -= f * pivot[j][k];
      }
      int lead = -1;
      for (int j = 0; j < N; ++j)
        if (row[j] != 0) {
          lead = j;
          break;
        }
      if (lead < 0) {
        if (row[N] != 0)
          fail(ErrorKind::Internal,
               "inconsistent associativity system at degree " +
                   std::to_string(D) + " (uniqueness violated)");
        continue;
      }
      Rational s = row[lead];
      for (int k = lead; k <= N; ++k) row[k] /= s;
      pivot[lead] = row;
      have[lead] = true;
    }
    for (int j = 0; j < N; ++j)
      if (!have[j])
        fail(ErrorKind::Internal,
             "underdetermined associativity system at degree " +
                 std::to_string(D) + ", unknown a=" +
                 multiset_to_string(order[j]));

    // back substitution (pivot rows are upper triangular with unit pivots)
    std::vector<Rational> value(N);
    for (int j = N - 1; j >= 0; --j) {
      Rational v = -pivot[j][N];
      for (int k = j + 1; k < N; ++k)
        if (pivot[j][k] != 0) v -= pivot[j][k] * value[k];
      value[j] = v;
    }
    for (int j = 0; j < N; ++j) {
      const Rational& v = value[j];
      if (denominator(v) != 1)
        fail(ErrorKind::Internal, "non-integral invariant at degree " +
                                      std::to_string(D) + " a=" +
                                      multiset_to_string(order[j]));
      table.set(D, order[j], numerator(v));
    }
  }
  return table;
}

WdvvReport wdvv_residual_exact(const GWTable& table, int window) {
  if (window > table.d_max())
    fail(ErrorKind::InvalidParameter, "window exceeds table d_max");
  const int r = table.r();
  WdvvReport rep;
  GPolyCache gcache(table);

  for (int D = 1; D <= window; ++D) {
    std::vector<Multiset> keys = admissible_keys(r, D);
    std::map<Multiset, int> idx;
    for (size_t i = 0; i < keys.size(); ++i) idx[keys[i]] = int(i);
    std::vector<Rational> val(keys.size());
    for (size_t i = 0; i < keys.size(); ++i)
      val[i] = table.contains(D, keys[i]) ? Rational(table.at(D, keys[i]))
                                          : Rational(0);
    DegreeContext cx{r, D, &keys, &idx, &gcache};
    for (int a = 0; a <= r; ++a)
      for (int b = 0; b <= r; ++b)
        for (int c = 0; c <= r; ++c)
          for (int z = 0; z <= r; ++z) {
            EqMap eq = assemble_equations(cx, a, b, c, z);
            for (const auto& [m, lf] : eq) {
              Rational res = lf.c0;
              for (const auto& [i, cc] : lf.coeffs) res += cc * val[i];
              if (res == 0) continue;
              if (!rep.violated) {
                rep.violated = true;
                rep.degree = D;
                rep.indices = {a, b, c, z};
                rep.monomial = m;
                rep.residual = res;
              }
              if (abs(res) > rep.max_abs_residual)
                rep.max_abs_residual = abs(res);
            }
          }
  }
  return rep;
}

void write_csv(const GWTable& table, std::ostream& os) {
  os << "r,d,a_multiset,value\n";
  for (const auto& [key, value] : table.entries())
    os << table.r() << ',' << key.d << ',' << multiset_to_string(key.a) << ','
       << value << '\n';
}

GWTable read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "r,d,a_multiset,value")
    fail(ErrorKind::ParseError, "bad GW csv header");
  int r = -1, d_max = 0;
  std::vector<std::tuple<int, Multiset, Int>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string rs, ds, as, vs;
    if (!std::getline(ss, rs, ',') || !std::getline(ss, ds, ',') ||
        !std::getline(ss, as, ',') || !std::getline(ss, vs))
      fail(ErrorKind::ParseError, "bad GW csv row: " + line);
    int rr = std::stoi(rs);
    if (r < 0) r = rr;
    if (rr != r) fail(ErrorKind::ParseError, "mixed r values in GW csv");
    int d = std::stoi(ds);
    d_max = std::max(d_max, d);
    rows.emplace_back(d, multiset_from_string(as), Int(vs));
  }
  if (r < 0) fail(ErrorKind::ParseError, "empty GW csv");
  GWTable table(r, d_max);
  for (auto& [d, a, v] : rows) table.set(d, a, std::move(v));
  // the table contract: complete for every admissible key up to d_max
  for (int d = 1; d <= d_max; ++d)
    for (const Multiset& a : admissible_keys(r, d))
      if (!table.contains(d, a))
        fail(ErrorKind::ParseError,
             "incomplete GW csv: missing d=" + std::to_string(d) + " a=" +
                 multiset_to_string(a));
  return table;
}

}  // namespace frob::gw
