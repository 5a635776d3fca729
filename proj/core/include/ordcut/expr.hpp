#ifndef ORDCUT_EXPR_HPP
#define ORDCUT_EXPR_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordcut/multi_index.hpp"

namespace ordcut {

/// Outcome of evaluating F: a value, or a domain fault (log of a
/// non-positive number, division by zero, ...). Faults are values rather
/// than exceptions so a root search can treat a faulting endpoint as
/// "outside the domain" and move on.
struct Eval {
  double value = 0.0;
  const char* fault = nullptr;
  bool ok() const { return fault == nullptr; }
  static Eval of(double v) { return {v, nullptr}; }
  static Eval bad(const char* why) { return {0.0, why}; }
};

enum class NodeKind { Number, Coord, Jet, Add, Sub, Mul, Div, Pow, Call };
enum class FuncId { Sin, Cos, Exp, Log, Abs, Min, Max };

struct ExprNode {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;
  int coord = -1;            // Coord: axis index
  MultiIndex jet_index;      // Jet: the p of D^p u
  int jet_slot = -1;         // Jet: position in OperatorSpec::jet_vars
  long long pow_num = 1;     // Pow: rational exponent num/den
  long long pow_den = 1;
  FuncId func = FuncId::Sin; // Call
  std::vector<ExprNode> children;
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, size_t offset)
      : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  size_t offset() const { return offset_; }

private:
  size_t offset_;
};

/// Parsed operator T(x,D): U |-> F(x, U, ..., D^p U).
struct OperatorSpec {
  int dimension = 1;  // n
  int order = 0;      // m = max |p| over jet variables present
  std::vector<std::string> coords;  // axis names, index = multi-index slot
  ExprNode lhs;
  std::string rhs_label;               // raw right-hand side text
  std::optional<ExprNode> rhs;         // present when the rhs is a coordinate expression
  std::vector<MultiIndex> jet_vars;    // degree ascending, lex within degree
  bool has_jet = false;                // false flags an algebraic identity

  /// Jet variables ordered degree descending, lex ascending within degree.
  /// The head of this list is the solver's default solve-for coefficient.
  std::vector<MultiIndex> free_jet_variables() const;

  int jet_slot_of(const MultiIndex& p) const;  // -1 if absent
};

OperatorSpec parse(const std::string& source);
OperatorSpec parse(const std::string& source,
                   const std::vector<std::string>& coord_names);

/// Parse an expression over coordinates only (no jet variables) -- used for
/// right-hand fields and closed-form oracles.
ExprNode parse_field(const std::string& source,
                     const std::vector<std::string>& coord_names);

/// F(x, jet); `jet` is aligned with op.jet_vars.
Eval eval_operator(const OperatorSpec& op, std::span<const double> x,
                   std::span<const double> jet);

/// Convenience: jet given as (multi-index, value) pairs.
Eval eval_operator(const OperatorSpec& op, std::span<const double> x,
                   const std::vector<std::pair<MultiIndex, double>>& jet);

Eval eval_field(const ExprNode& e, std::span<const double> x);

std::string pretty_print(const OperatorSpec& op);
std::string pretty_print(const ExprNode& e, const std::vector<std::string>& coords);

bool structurally_equal(const ExprNode& a, const ExprNode& b);

}  // namespace ordcut

#endif
