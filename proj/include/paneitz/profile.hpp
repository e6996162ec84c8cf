#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paneitz/jets.hpp"

namespace plab {

/// Expression tree for a radial profile in the variable r.
///
/// Grammar (whitespace ignored):
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | '/') factor)*
///   factor := '-' factor | base ('^' signed-number)?
///   base   := number | 'r' | ident | '(' expr ')' | func '(' expr ')'
///   func   := exp | log | sqrt
/// A unary minus applied directly to a number literal is folded into the literal.
struct ProfileNode {
  enum class Kind { Number, Var, Ident, Add, Sub, Mul, Div, Neg, Pow, Exp, Log, Sqrt };
  Kind kind = Kind::Number;
  double value = 0.0;  // Number literal, or the exponent of Pow
  std::string name;    // Ident
  std::shared_ptr<const ProfileNode> a, b;
};

using ProfileNodePtr = std::shared_ptr<const ProfileNode>;

bool same_tree(const ProfileNodePtr& x, const ProfileNodePtr& y);

/// Leading asymptotics as r -> infinity: f = limit + coefficient * r^-decay + o(r^-decay).
struct ProfileTail {
  double limit = 0.0;
  double coefficient = 0.0;
  double decay = 0.0;  // +inf when f is eventually constant
};

class RadialProfile {
 public:
  RadialProfile() = default;
  explicit RadialProfile(ProfileNodePtr root) : root_(std::move(root)) {}

  /// Syntax only; identifiers stay symbolic.  Throws ParseError with a byte offset.
  static RadialProfile parse(std::string_view text);

  /// Substitute parameter values and fold constant subtrees.
  RadialProfile bind(const std::map<std::string, double>& params) const;
  std::vector<std::string> free_identifiers() const;
  std::string to_string() const;

  double evaluate(double r) const;
  Jet evaluate(const Jet& r) const;

  /// Asymptotic analysis of the tree; empty when the tree defeats it (log growth,
  /// cancellation beyond the tracked terms, non-positive bases of real powers...).
  std::optional<ProfileTail> tail() const;

  const ProfileNodePtr& root() const { return root_; }
  bool empty() const { return root_ == nullptr; }

 private:
  ProfileNodePtr root_;
};

/// Parse and bind; every identifier must be bound (UnboundIdentifierError otherwise).
RadialProfile parse_profile(std::string_view text, const std::map<std::string, double>& params);

// Tree builders used by callers that compose profiles programmatically.
ProfileNodePtr profile_number(double v);
ProfileNodePtr profile_binary(ProfileNode::Kind k, ProfileNodePtr a, ProfileNodePtr b);
ProfileNodePtr profile_pow(ProfileNodePtr a, double p);
ProfileNodePtr profile_func(ProfileNode::Kind k, ProfileNodePtr a);

}  // namespace plab
