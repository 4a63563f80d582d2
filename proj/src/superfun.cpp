#include "frob/superfun.hpp"

#include <json.hpp>

#include <bit>
#include <cctype>

namespace frob {

namespace {

struct NumExpr : Expr {
  cplx v;
  explicit NumExpr(cplx c) : v(c) {}
  Jet eval(const VectorXcd& u, int order) const override {
    return Jet::constant(v, int(u.size()), order);
  }
};

struct VarExpr : Expr {
  int k;
  explicit VarExpr(int kk) : k(kk) {}
  Jet eval(const VectorXcd& u, int order) const override {
    return Jet::variable(u[k], k, int(u.size()), order);
  }
};

struct BinExpr : Expr {
  char op;
  ExprPtr a, b;
  BinExpr(char o, ExprPtr x, ExprPtr y) : op(o), a(std::move(x)), b(std::move(y)) {}
  Jet eval(const VectorXcd& u, int order) const override {
    Jet x = a->eval(u, order);
    Jet y = b->eval(u, order);
    switch (op) {
      case '+': return x + y;
      case '-': return x - y;
      case '*': return x * y;
      case '/': return x * y.inverse();
    }
    fail(ErrorKind::Internal, "bad operator");
  }
};

struct PowExpr : Expr {
  ExprPtr a;
  int e;
  PowExpr(ExprPtr x, int ee) : a(std::move(x)), e(ee) {}
  Jet eval(const VectorXcd& u, int order) const override {
    Jet x = a->eval(u, order);
    if (e < 0) {
      x = x.inverse();
    }
    Jet r = Jet::constant(1.0, int(u.size()), order);
    for (int i = 0; i < std::abs(e); ++i) r = r * x;
    return r;
  }
};

struct ExpExpr : Expr {
  ExprPtr a;
  explicit ExpExpr(ExprPtr x) : a(std::move(x)) {}
  Jet eval(const VectorXcd& u, int order) const override {
    return a->eval(u, order).exp();
  }
};

struct NegExpr : Expr {
  ExprPtr a;
  explicit NegExpr(ExprPtr x) : a(std::move(x)) {}
  Jet eval(const VectorXcd& u, int order) const override {
    return -a->eval(u, order);
  }
};

class Parser {
 public:
  Parser(const std::string& s, int nvars) : s_(s), nvars_(nvars) {}

  ExprPtr parse() {
    ExprPtr e = sum();
    skip();
    if (pos_ != s_.size())
      fail(ErrorKind::ParseError, "trailing input in expression: " + s_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(std::uint8_t(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  ExprPtr sum() {
    eat('+');
    ExprPtr e = eat('-') ? std::make_shared<NegExpr>(product()) : product();
    for (;;) {
      if (eat('+')) e = std::make_shared<BinExpr>('+', e, product());
      else if (eat('-')) e = std::make_shared<BinExpr>('-', e, product());
      else return e;
    }
  }
  ExprPtr product() {
    ExprPtr e = power();
    for (;;) {
      if (eat('*')) e = std::make_shared<BinExpr>('*', e, power());
      else if (eat('/')) e = std::make_shared<BinExpr>('/', e, power());
      else return e;
    }
  }
  ExprPtr power() {
    ExprPtr e = atom();
    if (eat('^')) {
      skip();
      bool neg = eat('-');
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(std::uint8_t(s_[pos_]))) ++pos_;
      if (pos_ == start) fail(ErrorKind::ParseError, "integer exponent expected");
      int ee = std::stoi(s_.substr(start, pos_ - start));
      e = std::make_shared<PowExpr>(e, neg ? -ee : ee);
    }
    return e;
  }
  ExprPtr atom() {
    skip();
    if (eat('(')) {
      ExprPtr e = sum();
      if (!eat(')')) fail(ErrorKind::ParseError, "missing )");
      return e;
    }
    if (eat('-')) return std::make_shared<NegExpr>(atom());
    if (pos_ + 3 <= s_.size() && s_.compare(pos_, 3, "exp") == 0) {
      pos_ += 3;
      if (!eat('(')) fail(ErrorKind::ParseError, "exp needs (");
      ExprPtr e = sum();
      if (!eat(')')) fail(ErrorKind::ParseError, "missing ) after exp");
      return std::make_shared<ExpExpr>(e);
    }
    if (peek() == 'i' &&
        (pos_ + 1 == s_.size() || !std::isalnum(std::uint8_t(s_[pos_ + 1])))) {
      ++pos_;
      return std::make_shared<NumExpr>(cplx(0.0, 1.0));
    }
    if (peek() == 'u') {
      ++pos_;
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(std::uint8_t(s_[pos_]))) ++pos_;
      if (pos_ == start) fail(ErrorKind::ParseError, "u needs an index");
      int k = std::stoi(s_.substr(start, pos_ - start));
      if (k < 1 || k > nvars_)
        fail(ErrorKind::ParseError, "coordinate index out of range: u" +
                                        std::to_string(k));
      return std::make_shared<VarExpr>(k - 1);
    }
    if (std::isdigit(std::uint8_t(peek())) || peek() == '.') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(std::uint8_t(s_[pos_])) || s_[pos_] == '.' ||
              s_[pos_] == 'e' || s_[pos_] == 'E' ||
              ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
               (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
        ++pos_;
      return std::make_shared<NumExpr>(std::stod(s_.substr(start, pos_ - start)));
    }
    fail(ErrorKind::ParseError, "unexpected input in expression: " + s_);
  }

  const std::string& s_;
  int nvars_;
  size_t pos_ = 0;
};

}  // namespace

ExprPtr parse_expression(const std::string& text, int nvars) {
  return Parser(text, nvars).parse();
}

SuperJet PsiSpec::eval(const VectorXcd& u, int order) const {
  if (int(u.size()) != n) fail(ErrorKind::InvalidParameter, "point dimension");
  SuperJet out(n);
  for (const auto& term : terms) {
    Jet c = term.coeff->eval(u, order);
    if (c.is_zero()) continue;
    SuperJet cur = out;
    out.set_coeff(term.mask, cur.coeff(term.mask) + c);
  }
  int p = out.parity();
  if (declared_parity == -1 && p != -1 && !out.is_zero())
    fail(ErrorKind::ParityError, "potential must be odd");
  if (declared_parity == +1 && p != +1 && !out.is_zero())
    fail(ErrorKind::ParityError, "declared-even function has odd part");
  return out;
}

std::string grassmann_debug_dump(const GrassmannElement& x) {
  using nlohmann::json;
  json j;
  j["n"] = x.generators();
  json terms = json::array();
  for (const auto& [mask, c] : x.coefficients()) {
    json subset = json::array();
    for (int k = 0; k < x.generators(); ++k)
      if (mask & (1u << k)) subset.push_back(k + 1);
    terms.push_back(json::array({subset, json::array({c.real(), c.imag()})}));
  }
  j["terms"] = std::move(terms);
  return j.dump();
}

GrassmannElement grassmann_debug_parse(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::ParseError, std::string("grassmann dump: ") + e.what());
  }
  GrassmannElement x(j.at("n").get<int>());
  for (const auto& t : j.at("terms")) {
    std::uint32_t mask = 0;
    for (const auto& v : t.at(0)) mask |= 1u << (v.get<int>() - 1);
    x.set_coeff(mask, cplx(t.at(1).at(0).get<double>(),
                           t.at(1).at(1).get<double>()));
  }
  return x;
}

PsiSpec psi_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::ParseError, std::string("psi json: ") + e.what());
  }
  PsiSpec spec;
  if (j.is_object()) {
    if (!j.contains("n") || !j.contains("terms"))
      fail(ErrorKind::ParseError, "psi json needs n and terms");
    spec.n = j["n"].get<int>();
    if (j.contains("parity"))
      spec.declared_parity = j["parity"].get<std::string>() == "even" ? +1 : -1;
    j = j["terms"];
  } else {
    fail(ErrorKind::ParseError, "psi json must be an object");
  }
  if (!j.is_array()) fail(ErrorKind::ParseError, "terms must be an array");
  for (const auto& t : j) {
    if (!t.contains("subset") || !t.contains("coeff"))
      fail(ErrorKind::ParseError, "each term needs subset and coeff");
    std::uint32_t mask = 0;
    for (const auto& v : t["subset"]) {
      int k = v.get<int>();
      if (k < 1 || k > spec.n)
        fail(ErrorKind::ParseError, "subset index out of range");
      std::uint32_t bit = 1u << (k - 1);
      if (mask & bit) fail(ErrorKind::ParseError, "repeated subset index");
      mask |= bit;
    }
    PsiTerm term;
    term.mask = mask;
    term.coeff = parse_expression(t["coeff"].get<std::string>(), spec.n);
    spec.terms.push_back(std::move(term));
  }
  return spec;
}

}  // namespace frob
