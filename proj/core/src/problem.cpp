#include "ordcut/problem.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

namespace ordcut {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
  size_t h = line.find('#');
  return h == std::string::npos ? line : line.substr(0, h);
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::istringstream in(s);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw ProblemError("bad number list for " + what + ": " + s);
  if (out.empty()) throw ProblemError("empty number list for " + what);
  return out;
}

// "key = value" split on the FIRST '=' of the line.
bool split_kv(const std::string& line, std::string& key, std::string& value) {
  size_t eq = line.find('=');
  if (eq == std::string::npos) return false;
  key = trim(line.substr(0, eq));
  value = trim(line.substr(eq + 1));
  return !key.empty();
}

}  // namespace

BenchmarkCase parse_problem(const std::string& text, const std::string& name) {
  BenchmarkCase bc;
  bc.name = name;

  std::istringstream in(text);
  std::string raw, section;
  std::string f_expr;
  std::vector<double> lo, hi;
  std::vector<int> res;
  std::vector<std::pair<std::vector<double>, double>> pins;
  std::string oracle_expr;
  bool have_equation = false;

  while (std::getline(in, raw)) {
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ProblemError("unterminated section header: " + line);
      section = line.substr(1, line.size() - 2);
      if (section != "domain" && section != "pins" && section != "oracle" &&
          section != "solver")
        throw ProblemError("unknown section [" + section + "]");
      continue;
    }
    if (section.empty()) {
      if (!have_equation) {
        bc.equation = line;
        have_equation = true;
        continue;
      }
      std::string key, value;
      if (split_kv(line, key, value) && key == "f") {
        f_expr = value;
        continue;
      }
      throw ProblemError("unexpected line before sections: " + line);
    }
    std::string key, value;
    if (!split_kv(line, key, value))
      throw ProblemError("expected key = value in [" + section + "]: " + line);
    if (section == "domain") {
      if (key == "lo")
        lo = parse_doubles(value, "lo");
      else if (key == "hi")
        hi = parse_doubles(value, "hi");
      else if (key == "resolution") {
        for (double v : parse_doubles(value, "resolution"))
          res.push_back(static_cast<int>(v));
      } else
        throw ProblemError("unknown [domain] key: " + key);
    } else if (section == "pins") {
      pins.emplace_back(parse_doubles(key, "pin point"),
                        parse_doubles(value, "pin value").front());
    } else if (section == "oracle") {
      if (key == "closed_form") {
        bc.oracle_kind = "closed_form";
        oracle_expr = value;  // parsed after the coordinates are known
      } else if (key == "kind" && value == "characteristics") {
        bc.oracle_kind = "characteristics";
      } else
        throw ProblemError("unknown [oracle] entry: " + line);
    } else {  // solver
      if (key == "eps0")
        bc.eps0 = parse_doubles(value, key).front();
      else if (key == "levels")
        bc.levels = static_cast<int>(parse_doubles(value, key).front());
      else if (key == "radius_cap")
        bc.params.radius_cap = parse_doubles(value, key).front();
      else if (key == "samples_per_axis")
        bc.params.samples_per_axis = static_cast<int>(parse_doubles(value, key).front());
      else if (key == "retry_budget")
        bc.params.retry_budget = static_cast<int>(parse_doubles(value, key).front());
      else if (key == "band_margin")
        bc.params.band_margin = parse_doubles(value, key).front();
      else if (key == "jump_ratio")
        bc.params.jump_ratio = parse_doubles(value, key).front();
      else if (key == "predictor") {
        if (value != "glimm") throw ProblemError("unknown predictor: " + value);
        bc.params.seed_value = glimm_predictor();
      } else
        throw ProblemError("unknown [solver] key: " + key);
    }
  }

  if (!have_equation) throw ProblemError("problem file has no equation line");
  try {
    bc.op = parse(bc.equation);
  } catch (const ParseError& e) {
    throw ProblemError(std::string("equation: ") + e.what());
  }
  bc.coords = bc.op.coords;

  if (lo.empty() || hi.empty() || res.empty())
    throw ProblemError("[domain] must set lo, hi and resolution");
  auto broadcast = [&](auto& v, const char* what) {
    if (static_cast<int>(v.size()) == 1 && bc.op.dimension > 1)
      v.resize(static_cast<size_t>(bc.op.dimension), v.front());
    if (static_cast<int>(v.size()) != bc.op.dimension)
      throw ProblemError(std::string(what) + " dimension mismatch");
  };
  broadcast(lo, "lo");
  broadcast(hi, "hi");
  broadcast(res, "resolution");
  bc.default_grid = Grid(lo, hi, res);

  for (auto& [pt, val] : pins) {
    if (static_cast<int>(pt.size()) != bc.op.dimension)
      throw ProblemError("pin point dimension mismatch");
    bc.pins.push_back({pt, val});
  }

  // Right-hand side: inline coordinate expression, named field, or zero.
  if (bc.op.rhs) {
    ExprNode rhs = *bc.op.rhs;
    bc.f = [rhs](std::span<const double> x) {
      Eval r = eval_field(rhs, x);
      return r.ok() ? r.value : std::numeric_limits<double>::quiet_NaN();
    };
  } else if (bc.op.rhs_label == "0" || bc.op.rhs_label.empty()) {
    bc.f = [](std::span<const double>) { return 0.0; };
  } else {
    if (f_expr.empty())
      throw ProblemError("equation names right-hand side '" + bc.op.rhs_label +
                         "' but no f = <expr> line defines it");
    ExprNode rhs;
    try {
      rhs = parse_field(f_expr, bc.coords);
    } catch (const ParseError& e) {
      throw ProblemError(std::string("f: ") + e.what());
    }
    bc.f = [rhs](std::span<const double> x) {
      Eval r = eval_field(rhs, x);
      return r.ok() ? r.value : std::numeric_limits<double>::quiet_NaN();
    };
  }

  if (!oracle_expr.empty()) {
    ExprNode node;
    try {
      node = parse_field(oracle_expr, bc.coords);
    } catch (const ParseError& e) {
      throw ProblemError(std::string("oracle: ") + e.what());
    }
    bc.oracle = [node](std::span<const double> x) {
      Eval r = eval_field(node, x);
      return r.ok() ? r.value : std::numeric_limits<double>::quiet_NaN();
    };
  }
  if (bc.oracle_kind.empty()) bc.oracle_kind = bc.oracle ? "closed_form" : "none";
  return bc;
}

BenchmarkCase load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemError("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (size_t slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  if (size_t dot = name.find_last_of('.'); dot != std::string::npos)
    name = name.substr(0, dot);
  return parse_problem(buf.str(), name);
}

}  // namespace ordcut
