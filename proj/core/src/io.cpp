#include "ordcut/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ordcut::io {

namespace {

json endpoint_to_json(double v) {
  if (v == std::numeric_limits<double>::infinity()) return "inf";
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  return v;
}

double endpoint_from_json(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw SchemaError("bad interval endpoint sentinel: " + s);
  }
  if (!j.is_number()) throw SchemaError("interval endpoint is not a number");
  return j.get<double>();
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing field: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad field ") + key + ": " + e.what());
  }
}

}  // namespace

json to_json(const JetPolynomial& p) {
  json coeffs = json::array();
  for (const auto& [mi, a] : p.coeffs())
    coeffs.push_back({{"p", mi.entries()}, {"a", a}});
  return {{"center", p.center()}, {"order", p.order()}, {"coeffs", coeffs}};
}

JetPolynomial jet_from_json(const json& j) {
  JetPolynomial p(field<std::vector<double>>(j, "center"), field<int>(j, "order"));
  for (const auto& c : field<json>(j, "coeffs"))
    p.set_coeff(MultiIndex(field<std::vector<int>>(c, "p")), field<double>(c, "a"));
  return p;
}

json to_json(const Grid& g) {
  return {{"bounds", {{"lo", g.lo()}, {"hi", g.hi()}}},
          {"resolution", g.resolution()}};
}

Grid grid_from_json(const json& j) {
  json b = field<json>(j, "bounds");
  return Grid(field<std::vector<double>>(b, "lo"), field<std::vector<double>>(b, "hi"),
              field<std::vector<int>>(j, "resolution"));
}

json to_json(const PiecewiseFn& u) {
  json values = json::array();
  json mask = json::array();
  for (size_t id = 0; id < u.grid.size(); ++id) {
    if (u.mask.marked(id)) {
      values.push_back(0.0);
      mask.push_back(id);
    } else {
      values.push_back(u.values[id]);
    }
  }
  json j = to_json(u.grid);
  j["values"] = std::move(values);
  j["mask"] = std::move(mask);
  j["smoothness"] = u.smoothness;
  return j;
}

PiecewiseFn piecewise_from_json(const json& j) {
  PiecewiseFn u;
  u.grid = grid_from_json(j);
  u.values = field<std::vector<double>>(j, "values");
  if (u.values.size() != u.grid.size())
    throw SchemaError("values length does not match the grid");
  u.mask = SingularMask(u.grid.size());
  for (size_t id : field<std::vector<size_t>>(j, "mask")) {
    if (id >= u.grid.size()) throw SchemaError("mask index out of range");
    u.mask.mark(id);
  }
  u.smoothness = j.value("smoothness", 0);
  return u;
}

json to_json(const IntervalFn& f) {
  json cells = json::array();
  for (const auto& c : f.cells)
    cells.push_back({{"lo", endpoint_to_json(c.lo)}, {"hi", endpoint_to_json(c.hi)}});
  json j = to_json(f.grid);
  j["cells"] = std::move(cells);
  return j;
}

IntervalFn intervalfn_from_json(const json& j) {
  IntervalFn f;
  f.grid = grid_from_json(j);
  for (const auto& c : field<json>(j, "cells")) {
    if (!c.contains("lo") || !c.contains("hi"))
      throw SchemaError("interval cell missing lo/hi");
    f.cells.push_back({endpoint_from_json(c.at("lo")), endpoint_from_json(c.at("hi"))});
  }
  if (f.cells.size() != f.grid.size())
    throw SchemaError("cells length does not match the grid");
  return f;
}

json to_json(const GlobalStats& s) {
  return {{"gamma_fraction", s.gamma_fraction},
          {"pass_fraction", s.pass_fraction},
          {"patches", s.patches},
          {"singletons", s.singletons},
          {"demoted", s.demoted},
          {"jump_marked", s.jump_marked},
          {"failed_nodes", s.failed_nodes},
          {"pins_applied", s.pins_applied},
          {"pins_rejected", s.pins_rejected},
          {"polish_sweeps", s.polish_sweeps},
          {"polish_moved", s.polish_moved},
          {"polish_violations", s.polish_violations},
          {"warnings", s.warnings}};
}

namespace {

json level_to_json(const GlobalResult& r, const char* side, double eps) {
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  for (const auto& p : r.patches) {
    dmin = std::min(dmin, p.defect_min);
    dmax = std::max(dmax, p.defect_max);
  }
  if (r.patches.empty()) dmin = dmax = 0.0;
  return {{"side", side},
          {"epsilon", eps},
          {"fn", to_json(r.fn)},
          {"gamma_fraction", r.stats.gamma_fraction},
          {"defect",
           {{"min", dmin}, {"max", dmax}, {"pass_fraction", r.stats.pass_fraction}}},
          {"stats", to_json(r.stats)}};
}

}  // namespace

json cut_to_json(const CutSolution& cut) {
  json levels = json::array();
  for (size_t k = 0; k < cut.subs.size(); ++k) {
    levels.push_back(level_to_json(cut.subs[k], "sub", cut.epsilons[k]));
    levels.push_back(level_to_json(cut.supers[k], "super", cut.epsilons[k]));
  }
  json j = {{"epsilons", cut.epsilons},
            {"levels", std::move(levels)},
            {"image_defect", cut.image_defect},
            {"complete", cut.complete}};
  if (!cut.subs.empty()) {
    j["lower"] = to_json(cut.lower);
    j["upper"] = to_json(cut.upper);
  }
  if (!cut.failure.empty()) j["failure"] = cut.failure;
  return j;
}

json report_to_json(const CaseReport& rep) {
  auto num = [](double v) -> json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  return {{"name", rep.name},
          {"solver_complete", rep.solver_complete},
          {"failure", rep.failure},
          {"eps_final", rep.eps_final},
          {"image_defect", rep.image_defect},
          {"pass_fraction", rep.pass_fraction},
          {"gamma_fraction", rep.gamma_fraction},
          {"patches", rep.patches},
          {"singletons", rep.singletons},
          {"oracle",
           {{"residual_max", num(rep.oracle_residual_max)},
            {"self_consistent", rep.oracle_self_consistent},
            {"containment_fraction", num(rep.containment_fraction)}}},
          {"gamma",
           {{"fraction_doubled", num(rep.gamma_fraction_doubled)},
            {"nonincreasing", rep.gamma_nonincreasing},
            {"nowhere_dense", rep.gamma_nowhere_dense}}},
          {"shock", {{"speed", num(rep.shock_speed)}, {"rows", rep.shock_rows}}}};
}

std::string to_csv(const PiecewiseFn& u) {
  std::ostringstream out;
  out.precision(17);
  for (int a = 0; a < u.grid.dim(); ++a) out << "x" << a << ",";
  out << "value,masked\n";
  std::vector<double> x;
  for (size_t id = 0; id < u.grid.size(); ++id) {
    u.grid.coord_into(id, x);
    for (double c : x) out << c << ",";
    if (u.mask.marked(id))
      out << "NaN,1\n";
    else
      out << u.values[id] << ",0\n";
  }
  return out.str();
}

std::string plot_script(const std::string& problem_name, int dim, size_t levels) {
  std::ostringstream out;
  out << "# gnuplot script for " << problem_name << "\n";
  out << "set datafile separator ','\n";
  out << "set key outside\n";
  if (dim == 1) {
    out << "set xlabel 'x0'\nset ylabel 'u'\n";
    out << "plot \\\n";
    for (size_t k = 0; k < levels; ++k) {
      out << "  'levels/sub_" << k << ".csv' using 1:2 with lines title 'sub "
          << k << "', \\\n";
      out << "  'levels/super_" << k << ".csv' using 1:2 with lines title 'super "
          << k << "'" << (k + 1 < levels ? ", \\" : "") << "\n";
    }
  } else {
    out << "set xlabel 'x0'\nset ylabel 'x1'\n";
    out << "set view map\nset pm3d interpolate 0,0\n";
    out << "splot 'levels/sub_" << (levels ? levels - 1 : 0)
        << ".csv' using 1:2:3 with pm3d title 'sub (finest)'\n";
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
}

}  // namespace ordcut::io
