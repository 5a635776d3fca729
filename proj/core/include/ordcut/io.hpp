#ifndef ORDCUT_IO_HPP
#define ORDCUT_IO_HPP

#include <string>

#include <nlohmann/json.hpp>

#include "ordcut/bench.hpp"
#include "ordcut/hausdorff.hpp"
#include "ordcut/jets.hpp"
#include "ordcut/solver.hpp"

namespace ordcut::io {

using json = nlohmann::ordered_json;

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Infinite interval endpoints serialize as the string sentinels "-inf"/"inf".
json to_json(const JetPolynomial& p);
JetPolynomial jet_from_json(const json& j);

json to_json(const Grid& g);
Grid grid_from_json(const json& j);

json to_json(const PiecewiseFn& u);
PiecewiseFn piecewise_from_json(const json& j);

json to_json(const IntervalFn& f);
IntervalFn intervalfn_from_json(const json& j);

json to_json(const GlobalStats& s);
json cut_to_json(const CutSolution& cut);
json report_to_json(const CaseReport& rep);

/// One row per node: coordinates, value or "NaN", masked flag.
std::string to_csv(const PiecewiseFn& u);

/// gnuplot script plotting the exported level CSVs.
std::string plot_script(const std::string& problem_name, int dim, size_t levels);

void write_text(const std::string& path, const std::string& text);
json read_json(const std::string& path);

}  // namespace ordcut::io

#endif
