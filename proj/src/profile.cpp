#include "paneitz/profile.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace plab {

using Kind = ProfileNode::Kind;

ProfileNodePtr profile_number(double v) {
  auto n = std::make_shared<ProfileNode>();
  n->kind = Kind::Number;
  n->value = v;
  return n;
}

ProfileNodePtr profile_binary(Kind k, ProfileNodePtr a, ProfileNodePtr b) {
  auto n = std::make_shared<ProfileNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

ProfileNodePtr profile_pow(ProfileNodePtr a, double p) {
  auto n = std::make_shared<ProfileNode>();
  n->kind = Kind::Pow;
  n->value = p;
  n->a = std::move(a);
  return n;
}

ProfileNodePtr profile_func(Kind k, ProfileNodePtr a) {
  auto n = std::make_shared<ProfileNode>();
  n->kind = k;
  n->a = std::move(a);
  return n;
}

namespace {

ProfileNodePtr make_leaf(Kind k, std::string name = {}) {
  auto n = std::make_shared<ProfileNode>();
  n->kind = k;
  n->name = std::move(name);
  return n;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  ProfileNodePtr run() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("empty profile", pos_);
    ProfileNodePtr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) {
      if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }

  ProfileNodePtr expr() {
    ProfileNodePtr left = term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        left = profile_binary(Kind::Add, left, term());
      } else if (peek('-')) {
        ++pos_;
        left = profile_binary(Kind::Sub, left, term());
      } else {
        return left;
      }
    }
  }

  ProfileNodePtr term() {
    ProfileNodePtr left = factor();
    while (true) {
      if (peek('*')) {
        ++pos_;
        left = profile_binary(Kind::Mul, left, factor());
      } else if (peek('/')) {
        ++pos_;
        left = profile_binary(Kind::Div, left, factor());
      } else {
        return left;
      }
    }
  }

  ProfileNodePtr factor() {
    if (peek('-')) {
      ++pos_;
      ProfileNodePtr f = factor();
      if (f->kind == Kind::Number) return profile_number(-f->value);
      return profile_func(Kind::Neg, f);
    }
    ProfileNodePtr b = base();
    if (peek('^')) {
      ++pos_;
      skip();
      double sign = 1.0;
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
        if (s_[pos_] == '-') sign = -1.0;
        ++pos_;
      }
      skip();
      if (pos_ >= s_.size() || !(std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
        throw ParseError("exponent must be a signed number", pos_);
      return profile_pow(b, sign * number());
    }
    return b;
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
      if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
        pos_ = q;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    const std::string tok(s_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size()) throw ParseError("malformed number '" + tok + "'", start);
    return v;
  }

  ProfileNodePtr base() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of profile", pos_);
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return profile_number(number());
    if (c == '(') {
      ++pos_;
      ProfileNodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id(s_.substr(start, pos_ - start));
      if (id == "exp" || id == "log" || id == "sqrt") {
        if (!peek('(')) throw ParseError("function '" + id + "' needs '('", pos_);
        ++pos_;
        ProfileNodePtr arg = expr();
        expect(')');
        const Kind k = id == "exp" ? Kind::Exp : id == "log" ? Kind::Log : Kind::Sqrt;
        return profile_func(k, arg);
      }
      if (id == "r") return make_leaf(Kind::Var);
      return make_leaf(Kind::Ident, id);
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

int precedence(const ProfileNode& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    case Kind::Number: return n.value < 0 ? 3 : 5;
    default: return 5;
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string print(const ProfileNode& n);

std::string wrap(const ProfileNode& n, int min_prec) {
  std::string s = print(n);
  return precedence(n) < min_prec ? "(" + s + ")" : s;
}

std::string print(const ProfileNode& n) {
  switch (n.kind) {
    case Kind::Number: return fmt(n.value);
    case Kind::Var: return "r";
    case Kind::Ident: return n.name;
    case Kind::Add: return wrap(*n.a, 1) + " + " + wrap(*n.b, 2);
    case Kind::Sub: return wrap(*n.a, 1) + " - " + wrap(*n.b, 2);
    case Kind::Mul: return wrap(*n.a, 2) + "*" + wrap(*n.b, 3);
    case Kind::Div: return wrap(*n.a, 2) + "/" + wrap(*n.b, 3);
    case Kind::Neg: return "-" + wrap(*n.a, 4);
    case Kind::Pow: return wrap(*n.a, 5) + "^" + fmt(n.value);
    case Kind::Exp: return "exp(" + print(*n.a) + ")";
    case Kind::Log: return "log(" + print(*n.a) + ")";
    case Kind::Sqrt: return "sqrt(" + print(*n.a) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Evaluation

double apply_pow(double x, double p) {
  if (p != std::round(p) && !(x > 0.0))
    throw DomainError("non-integer power of non-positive value " + fmt(x));
  if (x == 0.0 && p < 0) throw DomainError("negative power of zero");
  return std::pow(x, p);
}

double eval(const ProfileNode& n, double r) {
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Var: return r;
    case Kind::Ident: throw UnboundIdentifierError("unbound identifier '" + n.name + "'");
    case Kind::Add: return eval(*n.a, r) + eval(*n.b, r);
    case Kind::Sub: return eval(*n.a, r) - eval(*n.b, r);
    case Kind::Mul: return eval(*n.a, r) * eval(*n.b, r);
    case Kind::Div: {
      const double d = eval(*n.b, r);
      if (d == 0.0) throw DomainError("division by zero in profile");
      return eval(*n.a, r) / d;
    }
    case Kind::Neg: return -eval(*n.a, r);
    case Kind::Pow: return apply_pow(eval(*n.a, r), n.value);
    case Kind::Exp: return std::exp(eval(*n.a, r));
    case Kind::Log: {
      const double x = eval(*n.a, r);
      if (!(x > 0.0)) throw DomainError("log of non-positive value " + fmt(x));
      return std::log(x);
    }
    case Kind::Sqrt: {
      const double x = eval(*n.a, r);
      if (x < 0.0) throw DomainError("sqrt of negative value " + fmt(x));
      return std::sqrt(x);
    }
  }
  return 0.0;
}

Jet eval(const ProfileNode& n, const Jet& r) {
  switch (n.kind) {
    case Kind::Number: return Jet::constant_like(n.value, r);
    case Kind::Var: return r;
    case Kind::Ident: throw UnboundIdentifierError("unbound identifier '" + n.name + "'");
    case Kind::Add: return eval(*n.a, r) + eval(*n.b, r);
    case Kind::Sub: return eval(*n.a, r) - eval(*n.b, r);
    case Kind::Mul: {
      if (n.a->kind == Kind::Number) return n.a->value * eval(*n.b, r);
      if (n.b->kind == Kind::Number) return eval(*n.a, r) * n.b->value;
      return eval(*n.a, r) * eval(*n.b, r);
    }
    case Kind::Div: {
      if (n.b->kind == Kind::Number) {
        if (n.b->value == 0.0) throw DomainError("division by zero in profile");
        return eval(*n.a, r) / n.b->value;
      }
      const Jet d = eval(*n.b, r);
      if (d.value() == 0.0) throw DomainError("division by zero in profile");
      if (n.a->kind == Kind::Number) return n.a->value * inv(d);
      return eval(*n.a, r) * inv(d);
    }
    case Kind::Neg: return -eval(*n.a, r);
    case Kind::Pow: return pow(eval(*n.a, r), n.value);
    case Kind::Exp: return exp(eval(*n.a, r));
    case Kind::Log: return log(eval(*n.a, r));
    case Kind::Sqrt: return sqrt(eval(*n.a, r));
  }
  return r;
}

ProfileNodePtr substitute(const ProfileNodePtr& n, const std::map<std::string, double>& params) {
  switch (n->kind) {
    case Kind::Number:
    case Kind::Var: return n;
    case Kind::Ident: {
      auto it = params.find(n->name);
      return it == params.end() ? n : profile_number(it->second);
    }
    default: break;
  }
  auto out = std::make_shared<ProfileNode>(*n);
  if (n->a) out->a = substitute(n->a, params);
  if (n->b) out->b = substitute(n->b, params);
  const bool a_num = !out->a || out->a->kind == Kind::Number;
  const bool b_num = !out->b || out->b->kind == Kind::Number;
  if (a_num && b_num) return profile_number(eval(*out, 0.0));
  return out;
}

void collect_idents(const ProfileNode& n, std::set<std::string>& out) {
  if (n.kind == Kind::Ident) out.insert(n.name);
  if (n.a) collect_idents(*n.a, out);
  if (n.b) collect_idents(*n.b, out);
}

// ---------------------------------------------------------------------------
// Asymptotic series at r = infinity: sum of c r^e over tracked exponents; terms
// with exponent <= floor are unknown.

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxTerms = 6;

struct Series {
  std::vector<std::pair<double, double>> t;  // (exponent, coefficient), descending exponent
  double floor = kNegInf;
};

bool same_exp(double a, double b) { return std::abs(a - b) < 1e-12; }

void normalize(Series& s, double scale_hint) {
  std::sort(s.t.begin(), s.t.end(), [](auto& x, auto& y) { return x.first > y.first; });
  std::vector<std::pair<double, double>> out;
  for (auto& [e, c] : s.t) {
    if (!out.empty() && same_exp(out.back().first, e))
      out.back().second += c;
    else
      out.emplace_back(e, c);
  }
  s.t.clear();
  for (auto& [e, c] : out) {
    if (e <= s.floor + 1e-12) continue;
    if (std::abs(c) <= 1e-13 * scale_hint) continue;
    s.t.emplace_back(e, c);
  }
  if (s.t.size() > kMaxTerms) {
    s.floor = std::max(s.floor, s.t[kMaxTerms].first);
    s.t.resize(kMaxTerms);
  }
}

double max_coef(const Series& s) {
  double m = 0.0;
  for (auto& [e, c] : s.t) m = std::max(m, std::abs(c));
  return m;
}

Series add(const Series& a, const Series& b, double sign) {
  Series s;
  s.floor = std::max(a.floor, b.floor);
  s.t = a.t;
  for (auto [e, c] : b.t) s.t.emplace_back(e, sign * c);
  normalize(s, std::max({1e-300, max_coef(a), max_coef(b)}));
  return s;
}

Series mul(const Series& a, const Series& b) {
  Series s;
  if (a.t.empty() && a.floor == kNegInf) return a;
  if (b.t.empty() && b.floor == kNegInf) return b;
  if (a.t.empty() || b.t.empty()) {
    s.floor = std::numeric_limits<double>::infinity();
    return s;
  }
  s.floor = std::max(a.floor + b.t[0].first, b.floor + a.t[0].first);
  for (auto [ea, ca] : a.t)
    for (auto [eb, cb] : b.t) s.t.emplace_back(ea + eb, ca * cb);
  normalize(s, std::max(1e-300, max_coef(a) * max_coef(b)));
  return s;
}

Series scale(Series s, double f, double shift) {
  for (auto& [e, c] : s.t) {
    e += shift;
    c *= f;
  }
  s.floor += shift;
  return s;
}

Series unknown() {
  Series s;
  s.floor = std::numeric_limits<double>::infinity();
  return s;
}

bool is_unknown(const Series& s) { return s.t.empty() && s.floor > kNegInf; }

// sum_k coef[k] d^k for d with only negative exponents; the omitted terms
// (k >= coef.size()) lie at or below coef.size() times the leading exponent of d.
Series power_series(const Series& d, const std::vector<double>& coef) {
  Series result;
  result.t.emplace_back(0.0, coef[0]);
  if (d.t.empty()) {
    result.floor = d.floor;
    return result;
  }
  Series dk;
  dk.t.emplace_back(0.0, 1.0);
  for (std::size_t k = 1; k < coef.size(); ++k) {
    dk = mul(dk, d);
    if (is_unknown(dk)) return dk;
    result = add(result, scale(dk, coef[k], 0.0), 1.0);
  }
  result.floor = std::max(result.floor, d.t[0].first * static_cast<double>(coef.size()));
  normalize(result, std::max(1e-300, max_coef(result)));
  return result;
}

Series analyse(const ProfileNode& n);

Series series_pow(const Series& f, double p) {
  if (is_unknown(f)) return f;
  const bool integral = p == std::round(p);
  if (f.t.empty()) {
    if (p > 0) return f;
    return unknown();
  }
  const auto [e0, a0] = f.t[0];
  if (!integral && !(a0 > 0)) return unknown();
  if (integral && p >= 0 && p <= 16) {
    Series r;
    r.t.emplace_back(0.0, 1.0);
    for (int k = 0; k < static_cast<int>(p); ++k) r = mul(r, f);
    return r;
  }
  Series d;
  d.floor = f.floor - e0;
  for (std::size_t k = 1; k < f.t.size(); ++k) d.t.emplace_back(f.t[k].first - e0, f.t[k].second / a0);
  std::vector<double> coef(9);
  double b = 1.0;
  for (int k = 0; k < 9; ++k) {
    coef[k] = b;
    b *= (p - k) / (k + 1);
  }
  Series s = power_series(d, coef);
  return scale(s, std::pow(std::abs(a0), p) * ((a0 < 0 && static_cast<long long>(p) % 2) ? -1.0 : 1.0), p * e0);
}

Series analyse(const ProfileNode& n) {
  Series s;
  switch (n.kind) {
    case Kind::Number:
      if (n.value != 0.0) s.t.emplace_back(0.0, n.value);
      return s;
    case Kind::Var: s.t.emplace_back(1.0, 1.0); return s;
    case Kind::Ident: return unknown();
    case Kind::Add: return add(analyse(*n.a), analyse(*n.b), 1.0);
    case Kind::Sub: return add(analyse(*n.a), analyse(*n.b), -1.0);
    case Kind::Mul: {
      Series a = analyse(*n.a), b = analyse(*n.b);
      if (is_unknown(a) || is_unknown(b)) return unknown();
      return mul(a, b);
    }
    case Kind::Div: {
      Series a = analyse(*n.a), b = series_pow(analyse(*n.b), -1.0);
      if (is_unknown(a) || is_unknown(b)) return unknown();
      return mul(a, b);
    }
    case Kind::Neg: return scale(analyse(*n.a), -1.0, 0.0);
    case Kind::Pow: return series_pow(analyse(*n.a), n.value);
    case Kind::Sqrt: return series_pow(analyse(*n.a), 0.5);
    case Kind::Exp: {
      Series f = analyse(*n.a);
      if (is_unknown(f)) return f;
      if (!f.t.empty() && f.t[0].first > 1e-12) return unknown();
      double c0 = 0.0;
      Series d;
      d.floor = f.floor;
      for (auto [e, c] : f.t) {
        if (same_exp(e, 0.0))
          c0 = c;
        else
          d.t.emplace_back(e, c);
      }
      std::vector<double> coef(9);
      double b = 1.0;
      for (int k = 0; k < 9; ++k) {
        coef[k] = b;
        b /= (k + 1);
      }
      return scale(power_series(d, coef), std::exp(c0), 0.0);
    }
    case Kind::Log: {
      Series f = analyse(*n.a);
      if (is_unknown(f) || f.t.empty()) return unknown();
      const auto [e0, a0] = f.t[0];
      if (!same_exp(e0, 0.0) || !(a0 > 0)) return unknown();
      Series d;
      d.floor = f.floor;
      for (std::size_t k = 1; k < f.t.size(); ++k) d.t.emplace_back(f.t[k].first, f.t[k].second / a0);
      std::vector<double> coef(9, 0.0);
      for (int k = 1; k < 9; ++k) coef[k] = ((k % 2) ? 1.0 : -1.0) / k;
      Series s = power_series(d, coef);
      return add(s, Series{{{0.0, std::log(a0)}}, kNegInf}, 1.0);
    }
  }
  return unknown();
}

}  // namespace

bool same_tree(const ProfileNodePtr& x, const ProfileNodePtr& y) {
  if (!x || !y) return x == y;
  if (x->kind != y->kind) return false;
  if ((x->kind == Kind::Number || x->kind == Kind::Pow) && x->value != y->value) return false;
  if (x->kind == Kind::Ident && x->name != y->name) return false;
  return same_tree(x->a, y->a) && same_tree(x->b, y->b);
}

RadialProfile RadialProfile::parse(std::string_view text) { return RadialProfile(Parser(text).run()); }

RadialProfile RadialProfile::bind(const std::map<std::string, double>& params) const {
  return RadialProfile(substitute(root_, params));
}

std::vector<std::string> RadialProfile::free_identifiers() const {
  std::set<std::string> ids;
  if (root_) collect_idents(*root_, ids);
  return {ids.begin(), ids.end()};
}

std::string RadialProfile::to_string() const { return root_ ? print(*root_) : std::string(); }

double RadialProfile::evaluate(double r) const { return eval(*root_, r); }
Jet RadialProfile::evaluate(const Jet& r) const { return eval(*root_, r); }

std::optional<ProfileTail> RadialProfile::tail() const {
  if (!root_ || !free_identifiers().empty()) return std::nullopt;
  const Series s = analyse(*root_);
  if (is_unknown(s)) return std::nullopt;
  ProfileTail t;
  if (s.t.empty()) {
    if (s.floor > kNegInf) return std::nullopt;
    t.decay = std::numeric_limits<double>::infinity();
    return t;
  }
  const auto [e0, c0] = s.t[0];
  if (e0 > 1e-12) return std::nullopt;
  if (same_exp(e0, 0.0)) {
    t.limit = c0;
    if (s.t.size() > 1) {
      t.coefficient = s.t[1].second;
      t.decay = -s.t[1].first;
      return t;
    }
    if (s.floor > kNegInf) return std::nullopt;
    t.decay = std::numeric_limits<double>::infinity();
    return t;
  }
  t.coefficient = c0;
  t.decay = -e0;
  return t;
}

RadialProfile parse_profile(std::string_view text, const std::map<std::string, double>& params) {
  RadialProfile p = RadialProfile::parse(text).bind(params);
  const auto ids = p.free_identifiers();
  if (!ids.empty()) {
    std::string msg = "unbound identifier(s):";
    for (const auto& id : ids) msg += " " + id;
    throw UnboundIdentifierError(msg);
  }
  return p;
}

}  // namespace plab
