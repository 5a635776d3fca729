#include "ordcut/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace ordcut {

std::vector<MultiIndex> enumerate_multi_indices(int n, int m) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(static_cast<size_t>(n), 0);
  // Generate all tuples with sum <= m, then sort canonically.
  auto rec = [&](auto&& self, int axis, int budget) -> void {
    if (axis == n) {
      out.emplace_back(cur);
      return;
    }
    for (int k = 0; k <= budget; ++k) {
      cur[static_cast<size_t>(axis)] = k;
      self(self, axis + 1, budget - k);
    }
    cur[static_cast<size_t>(axis)] = 0;
  };
  rec(rec, 0, m);
  std::sort(out.begin(), out.end(),
            [](const MultiIndex& a, const MultiIndex& b) { return a.canonical_less(b); });
  return out;
}

namespace {

struct Token {
  enum Kind { Number, Ident, Punct, End } kind = End;
  std::string text;
  double num = 0.0;
  size_t offset = 0;
};

bool is_func_name(const std::string& s) {
  static const std::set<std::string> fns = {"sin", "cos", "exp", "log",
                                            "abs", "min", "max"};
  return fns.count(s) > 0;
}

FuncId func_id(const std::string& s) {
  if (s == "sin") return FuncId::Sin;
  if (s == "cos") return FuncId::Cos;
  if (s == "exp") return FuncId::Exp;
  if (s == "log") return FuncId::Log;
  if (s == "abs") return FuncId::Abs;
  if (s == "min") return FuncId::Min;
  return FuncId::Max;
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> toks;
  size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() &&
         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      size_t start = i;
      while (i < src.size() &&
             (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.'))
        ++i;
      // exponent part
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          i = j;
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      Token t;
      t.kind = Token::Number;
      t.text = src.substr(start, i - start);
      t.num = std::strtod(t.text.c_str(), nullptr);
      t.offset = start;
      toks.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = i;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) ||
                                src[i] == '_'))
        ++i;
      Token t;
      t.kind = Token::Ident;
      t.text = src.substr(start, i - start);
      t.offset = start;
      toks.push_back(std::move(t));
      continue;
    }
    if (std::string("+-*/^()[],=").find(c) != std::string::npos) {
      Token t;
      t.kind = Token::Punct;
      t.text = std::string(1, c);
      t.offset = i;
      toks.push_back(std::move(t));
      ++i;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i);
  }
  Token end;
  end.kind = Token::End;
  end.offset = src.size();
  toks.push_back(end);
  return toks;
}

bool is_deriv_shorthand(const std::vector<Token>& toks, size_t i) {
  const Token& t = toks[i];
  if (t.kind != Token::Ident || t.text.size() < 2 || t.text[0] != 'd') return false;
  for (size_t k = 1; k < t.text.size(); ++k)
    if (!std::islower(static_cast<unsigned char>(t.text[k]))) return false;
  return i + 3 < toks.size() && toks[i + 1].text == "(" &&
         toks[i + 2].text == "u" && toks[i + 3].text == ")";
}

std::vector<std::string> default_coords(int n) {
  if (n == 1) return {"x"};
  if (n == 2) return {"t", "x"};
  if (n == 3) return {"x", "y", "z"};
  std::vector<std::string> c;
  for (int i = 1; i <= n; ++i) c.push_back("x" + std::to_string(i));
  return c;
}

// Scan the token stream for coordinate letters used in derivative shorthands
// or as bare single-letter identifiers. 'f' is reserved for the rhs label.
std::vector<std::string> discover_coords(const std::vector<Token>& toks) {
  std::set<std::string> found;
  int explicit_n = 0;
  for (size_t i = 0; i + 1 < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != Token::Ident) continue;
    if (t.text == "u" || t.text == "pi" || is_func_name(t.text)) continue;
    if (t.text == "D" && toks[i + 1].text == "[") {
      int n = 1;
      for (size_t j = i + 2; j < toks.size() && toks[j].text != "]"; ++j)
        if (toks[j].text == ",") ++n;
      explicit_n = std::max(explicit_n, n);
      continue;
    }
    if (is_deriv_shorthand(toks, i)) {
      for (size_t k = 1; k < t.text.size(); ++k) found.insert(std::string(1, t.text[k]));
      continue;
    }
    if (t.text.size() == 1 && t.text != "f") found.insert(t.text);
  }
  std::vector<std::string> coords(found.begin(), found.end());
  std::sort(coords.begin(), coords.end());
  // Time-like axis leads when present.
  auto it = std::find(coords.begin(), coords.end(), "t");
  if (it != coords.end()) {
    coords.erase(it);
    coords.insert(coords.begin(), "t");
  }
  if (explicit_n > 0) {
    if (coords.empty()) return default_coords(explicit_n);
    if (static_cast<int>(coords.size()) != explicit_n)
      throw ParseError("dimension mismatch between D[...] form and named coordinates", 0);
  }
  if (coords.empty()) coords = default_coords(1);
  return coords;
}

class Parser {
public:
  Parser(const std::vector<Token>& toks, std::vector<std::string> coords,
         bool allow_jet)
      : toks_(toks), coords_(std::move(coords)), allow_jet_(allow_jet) {}

  ExprNode parse_expr() {
    ExprNode lhs = parse_term();
    while (peek().text == "+" || peek().text == "-") {
      bool plus = next().text == "+";
      ExprNode rhs = parse_term();
      ExprNode n;
      n.kind = plus ? NodeKind::Add : NodeKind::Sub;
      n.children = {std::move(lhs), std::move(rhs)};
      lhs = std::move(n);
    }
    return lhs;
  }

  const Token& peek() const { return toks_[pos_]; }
  bool at_end() const { return peek().kind == Token::End; }
  size_t pos() const { return pos_; }
  void seek(size_t p) { pos_ = p; }

  std::set<std::vector<int>> jet_indices;

private:
  const Token& next() { return toks_[pos_++]; }

  void expect(const std::string& text) {
    if (peek().text != text)
      throw ParseError("expected '" + text + "'", peek().offset);
    ++pos_;
  }

  ExprNode parse_term() {
    ExprNode lhs = parse_factor();
    while (peek().text == "*" || peek().text == "/") {
      bool mul = next().text == "*";
      ExprNode rhs = parse_factor();
      ExprNode n;
      n.kind = mul ? NodeKind::Mul : NodeKind::Div;
      n.children = {std::move(lhs), std::move(rhs)};
      lhs = std::move(n);
    }
    return lhs;
  }

  ExprNode parse_factor() {
    if (peek().text == "-") {
      ++pos_;
      ExprNode zero;
      zero.kind = NodeKind::Number;
      zero.number = 0.0;
      ExprNode n;
      n.kind = NodeKind::Sub;
      n.children = {std::move(zero), parse_factor()};
      return n;
    }
    ExprNode base = parse_base();
    if (peek().text == "^") {
      ++pos_;
      auto [num, den] = parse_rational();
      ExprNode n;
      n.kind = NodeKind::Pow;
      n.pow_num = num;
      n.pow_den = den;
      n.children = {std::move(base)};
      return n;
    }
    return base;
  }

  std::pair<long long, long long> parse_rational() {
    bool paren = false;
    if (peek().text == "(") {
      paren = true;
      ++pos_;
    }
    long long sign = 1;
    if (peek().text == "-") {
      sign = -1;
      ++pos_;
    }
    if (peek().kind != Token::Number)
      throw ParseError("expected rational exponent", peek().offset);
    const Token& numtok = next();
    if (numtok.text.find('.') != std::string::npos)
      throw ParseError("exponent must be rational n or n/d", numtok.offset);
    long long num = sign * std::stoll(numtok.text);
    long long den = 1;
    if (peek().text == "/") {
      ++pos_;
      if (peek().kind != Token::Number || peek().text.find('.') != std::string::npos)
        throw ParseError("expected integer denominator", peek().offset);
      den = std::stoll(next().text);
      if (den == 0) throw ParseError("zero denominator in exponent", peek().offset);
    }
    if (paren) expect(")");
    return {num, den};
  }

  ExprNode jet_node(std::vector<int> entries, size_t offset) {
    if (!allow_jet_)
      throw ParseError("jet variable not allowed in a field expression", offset);
    if (entries.size() != coords_.size())
      throw ParseError("dimension mismatch in derivative index", offset);
    jet_indices.insert(entries);
    ExprNode n;
    n.kind = NodeKind::Jet;
    n.jet_index = MultiIndex(std::move(entries));
    return n;
  }

  ExprNode parse_base() {
    const Token& t = peek();
    if (t.kind == Token::Number) {
      ++pos_;
      ExprNode n;
      n.kind = NodeKind::Number;
      n.number = t.num;
      return n;
    }
    if (t.text == "(") {
      ++pos_;
      ExprNode inner = parse_expr();
      expect(")");
      return inner;
    }
    if (t.kind != Token::Ident)
      throw ParseError("expected a value", t.offset);

    if (t.text == "pi") {
      ++pos_;
      ExprNode n;
      n.kind = NodeKind::Number;
      n.number = std::acos(-1.0);
      return n;
    }
    if (t.text == "u" && toks_[pos_ + 1].text != "(") {
      ++pos_;
      return jet_node(std::vector<int>(coords_.size(), 0), t.offset);
    }
    if (t.text == "D" && toks_[pos_ + 1].text == "[") {
      pos_ += 2;
      std::vector<int> entries;
      while (true) {
        if (peek().kind != Token::Number)
          throw ParseError("expected derivative order", peek().offset);
        entries.push_back(static_cast<int>(next().num));
        if (peek().text == ",") {
          ++pos_;
          continue;
        }
        break;
      }
      expect("]");
      expect("(");
      expect("u");
      expect(")");
      return jet_node(std::move(entries), t.offset);
    }
    if (is_deriv_shorthand(toks_, pos_)) {
      ++pos_;
      std::vector<int> entries(coords_.size(), 0);
      for (size_t k = 1; k < t.text.size(); ++k) {
        std::string axis(1, t.text[k]);
        auto it = std::find(coords_.begin(), coords_.end(), axis);
        if (it == coords_.end())
          throw ParseError("derivative names undeclared coordinate '" + axis + "'",
                           t.offset);
        entries[static_cast<size_t>(it - coords_.begin())] += 1;
      }
      expect("(");
      expect("u");
      expect(")");
      return jet_node(std::move(entries), t.offset);
    }
    if (toks_[pos_ + 1].text == "(") {
      if (!is_func_name(t.text))
        throw ParseError("unknown function '" + t.text + "'", t.offset);
      ++pos_;
      expect("(");
      ExprNode n;
      n.kind = NodeKind::Call;
      n.func = func_id(t.text);
      n.children.push_back(parse_expr());
      if (peek().text == ",") {
        ++pos_;
        n.children.push_back(parse_expr());
      }
      expect(")");
      bool binary = n.func == FuncId::Min || n.func == FuncId::Max;
      if (binary != (n.children.size() == 2))
        throw ParseError(binary ? "min/max take two arguments"
                                : "function takes one argument",
                         t.offset);
      return n;
    }
    // Bare identifier: a declared coordinate.
    auto it = std::find(coords_.begin(), coords_.end(), t.text);
    if (it == coords_.end())
      throw ParseError("unknown identifier '" + t.text + "'", t.offset);
    ++pos_;
    ExprNode n;
    n.kind = NodeKind::Coord;
    n.coord = static_cast<int>(it - coords_.begin());
    return n;
  }

  const std::vector<Token>& toks_;
  std::vector<std::string> coords_;
  bool allow_jet_;
  size_t pos_ = 0;
};

bool contains_jet(const ExprNode& e) {
  if (e.kind == NodeKind::Jet) return true;
  for (const auto& c : e.children)
    if (contains_jet(c)) return true;
  return false;
}

void resolve_jet_slots(ExprNode& e, const OperatorSpec& op) {
  if (e.kind == NodeKind::Jet) e.jet_slot = op.jet_slot_of(e.jet_index);
  for (auto& c : e.children) resolve_jet_slots(c, op);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<MultiIndex> OperatorSpec::free_jet_variables() const {
  std::vector<MultiIndex> out = jet_vars;
  // Degree descending; within a degree the lexicographically later index
  // leads, so d/dt (1,0) precedes d/dx (0,1) and (2,0) heads the Laplacian.
  std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.degree() != b.degree()) return a.degree() > b.degree();
    return b.lex_less(a);
  });
  return out;
}

int OperatorSpec::jet_slot_of(const MultiIndex& p) const {
  for (size_t i = 0; i < jet_vars.size(); ++i)
    if (jet_vars[i] == p) return static_cast<int>(i);
  return -1;
}

OperatorSpec parse(const std::string& source) {
  auto toks = lex(source);
  return parse(source, discover_coords(toks));
}

OperatorSpec parse(const std::string& source,
                   const std::vector<std::string>& coord_names) {
  auto toks = lex(source);
  for (const auto& c : discover_coords(toks)) {
    if (std::find(coord_names.begin(), coord_names.end(), c) == coord_names.end())
      throw ParseError("coordinate '" + c + "' not among declared axes", 0);
  }

  Parser p(toks, coord_names, /*allow_jet=*/true);
  ExprNode lhs = p.parse_expr();
  if (p.peek().text != "=")
    throw ParseError("expected '='", p.peek().offset);
  size_t rhs_start_tok = p.pos() + 1;
  p.seek(rhs_start_tok);

  OperatorSpec op;
  op.coords = coord_names;
  op.dimension = static_cast<int>(coord_names.size());
  op.rhs_label = trim(source.substr(toks[rhs_start_tok].offset));

  // The rhs may be: a bare function label, a coordinate expression, or an
  // expression containing jet variables (folded into the lhs).
  const Token& rt = toks[rhs_start_tok];
  if (rt.kind == Token::Ident && toks[rhs_start_tok + 1].kind == Token::End &&
      rt.text != "u" && rt.text != "pi" &&
      std::find(coord_names.begin(), coord_names.end(), rt.text) == coord_names.end()) {
    // bare label like "f"
  } else {
    ExprNode rhs = p.parse_expr();
    if (!p.at_end())
      throw ParseError("trailing input after equation", p.peek().offset);
    if (contains_jet(rhs)) {
      ExprNode folded;
      folded.kind = NodeKind::Sub;
      folded.children = {std::move(lhs), std::move(rhs)};
      lhs = std::move(folded);
      op.rhs_label = "0";
    } else {
      op.rhs = std::move(rhs);
    }
  }

  op.lhs = std::move(lhs);
  op.has_jet = !p.jet_indices.empty();
  op.jet_vars.clear();
  for (const auto& e : p.jet_indices) op.jet_vars.emplace_back(e);
  std::sort(op.jet_vars.begin(), op.jet_vars.end(),
            [](const MultiIndex& a, const MultiIndex& b) { return a.canonical_less(b); });
  op.order = 0;
  for (const auto& v : op.jet_vars) op.order = std::max(op.order, v.degree());
  resolve_jet_slots(op.lhs, op);
  return op;
}

ExprNode parse_field(const std::string& source,
                     const std::vector<std::string>& coord_names) {
  auto toks = lex(source);
  Parser p(toks, coord_names, /*allow_jet=*/false);
  ExprNode e = p.parse_expr();
  if (!p.at_end())
    throw ParseError("trailing input after expression", p.peek().offset);
  return e;
}

namespace {

Eval eval_node(const ExprNode& e, std::span<const double> x,
               std::span<const double> jet) {
  switch (e.kind) {
    case NodeKind::Number:
      return Eval::of(e.number);
    case NodeKind::Coord:
      return Eval::of(x[static_cast<size_t>(e.coord)]);
    case NodeKind::Jet:
      return Eval::of(jet[static_cast<size_t>(e.jet_slot)]);
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      Eval a = eval_node(e.children[0], x, jet);
      if (!a.ok()) return a;
      Eval b = eval_node(e.children[1], x, jet);
      if (!b.ok()) return b;
      double r = 0;
      if (e.kind == NodeKind::Add) r = a.value + b.value;
      else if (e.kind == NodeKind::Sub) r = a.value - b.value;
      else if (e.kind == NodeKind::Mul) r = a.value * b.value;
      else {
        if (b.value == 0.0) return Eval::bad("division by zero");
        r = a.value / b.value;
      }
      if (!std::isfinite(r)) return Eval::bad("non-finite result");
      return Eval::of(r);
    }
    case NodeKind::Pow: {
      Eval a = eval_node(e.children[0], x, jet);
      if (!a.ok()) return a;
      double r;
      if (e.pow_den == 1) {
        r = std::pow(a.value, static_cast<double>(e.pow_num));
      } else {
        if (a.value < 0.0) return Eval::bad("fractional power of negative");
        if (a.value == 0.0 && e.pow_num < 0) return Eval::bad("division by zero");
        r = std::pow(a.value,
                     static_cast<double>(e.pow_num) / static_cast<double>(e.pow_den));
      }
      if (!std::isfinite(r)) return Eval::bad("non-finite result");
      return Eval::of(r);
    }
    case NodeKind::Call: {
      Eval a = eval_node(e.children[0], x, jet);
      if (!a.ok()) return a;
      double r = 0;
      switch (e.func) {
        case FuncId::Sin: r = std::sin(a.value); break;
        case FuncId::Cos: r = std::cos(a.value); break;
        case FuncId::Exp: r = std::exp(a.value); break;
        case FuncId::Abs: r = std::fabs(a.value); break;
        case FuncId::Log:
          if (a.value <= 0.0) return Eval::bad("log of non-positive");
          r = std::log(a.value);
          break;
        case FuncId::Min:
        case FuncId::Max: {
          Eval b = eval_node(e.children[1], x, jet);
          if (!b.ok()) return b;
          r = e.func == FuncId::Min ? std::min(a.value, b.value)
                                    : std::max(a.value, b.value);
          break;
        }
      }
      if (!std::isfinite(r)) return Eval::bad("non-finite result");
      return Eval::of(r);
    }
  }
  return Eval::bad("corrupt expression node");
}

}  // namespace

Eval eval_operator(const OperatorSpec& op, std::span<const double> x,
                   std::span<const double> jet) {
  return eval_node(op.lhs, x, jet);
}

Eval eval_operator(const OperatorSpec& op, std::span<const double> x,
                   const std::vector<std::pair<MultiIndex, double>>& jet) {
  std::vector<double> aligned(op.jet_vars.size(), 0.0);
  for (const auto& [p, v] : jet) {
    int slot = op.jet_slot_of(p);
    if (slot >= 0) aligned[static_cast<size_t>(slot)] = v;
  }
  return eval_operator(op, x, aligned);
}

Eval eval_field(const ExprNode& e, std::span<const double> x) {
  return eval_node(e, x, {});
}

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* func_name(FuncId f) {
  switch (f) {
    case FuncId::Sin: return "sin";
    case FuncId::Cos: return "cos";
    case FuncId::Exp: return "exp";
    case FuncId::Log: return "log";
    case FuncId::Abs: return "abs";
    case FuncId::Min: return "min";
    case FuncId::Max: return "max";
  }
  return "?";
}

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Pow: return 3;
    default: return 4;
  }
}

std::string pp(const ExprNode& e, const std::vector<std::string>& coords,
               int parent_prec) {
  std::string s;
  int prec = precedence(e.kind);
  switch (e.kind) {
    case NodeKind::Number: s = fmt_num(e.number); break;
    case NodeKind::Coord: s = coords[static_cast<size_t>(e.coord)]; break;
    case NodeKind::Jet: {
      s = "D[";
      for (int i = 0; i < e.jet_index.dim(); ++i) {
        if (i) s += ",";
        s += std::to_string(e.jet_index[i]);
      }
      s += "](u)";
      break;
    }
    case NodeKind::Add:
      s = pp(e.children[0], coords, prec) + " + " + pp(e.children[1], coords, prec + 1);
      break;
    case NodeKind::Sub:
      s = pp(e.children[0], coords, prec) + " - " + pp(e.children[1], coords, prec + 1);
      break;
    case NodeKind::Mul:
      s = pp(e.children[0], coords, prec) + "*" + pp(e.children[1], coords, prec + 1);
      break;
    case NodeKind::Div:
      s = pp(e.children[0], coords, prec) + "/" + pp(e.children[1], coords, prec + 1);
      break;
    case NodeKind::Pow:
      s = pp(e.children[0], coords, prec + 1) + "^(" + std::to_string(e.pow_num) +
          "/" + std::to_string(e.pow_den) + ")";
      break;
    case NodeKind::Call:
      s = std::string(func_name(e.func)) + "(" + pp(e.children[0], coords, 0);
      if (e.children.size() == 2) s += ", " + pp(e.children[1], coords, 0);
      s += ")";
      break;
  }
  if (prec < parent_prec && e.kind != NodeKind::Number) s = "(" + s + ")";
  return s;
}

}  // namespace

std::string pretty_print(const ExprNode& e, const std::vector<std::string>& coords) {
  return pp(e, coords, 0);
}

std::string pretty_print(const OperatorSpec& op) {
  return pretty_print(op.lhs, op.coords) + " = " + op.rhs_label;
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case NodeKind::Number:
      if (a.number != b.number) return false;
      break;
    case NodeKind::Coord:
      if (a.coord != b.coord) return false;
      break;
    case NodeKind::Jet:
      if (!(a.jet_index == b.jet_index)) return false;
      break;
    case NodeKind::Pow:
      if (a.pow_num * b.pow_den != b.pow_num * a.pow_den) return false;
      break;
    case NodeKind::Call:
      if (a.func != b.func) return false;
      break;
    default: break;
  }
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  return true;
}

}  // namespace ordcut
