#ifndef ORDCUT_PROBLEM_HPP
#define ORDCUT_PROBLEM_HPP

#include <string>

#include "ordcut/bench.hpp"

namespace ordcut {

struct ProblemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parse a problem file into a runnable case. Format: the PDE on the first
/// non-comment line, an optional `f = <expr>` definition for a named
/// right-hand side, then TOML-style sections:
///
///   dt(u) = u^2
///   [domain]
///   lo = 0
///   hi = 0.9
///   resolution = 257
///   [pins]
///   0.0 = 1.0
///   [oracle]
///   closed_form = 1/(1-t)
///   [solver]
///   eps0 = 0.4
///   levels = 4
///
/// `[pins]` lines read "<coordinates> = <value>". `[oracle]` accepts
/// `closed_form = <expr>` or `kind = characteristics` (recorded, no
/// evaluator). `[solver]` keys: eps0, levels, radius_cap, samples_per_axis,
/// retry_budget, band_margin, jump_ratio, predictor (= glimm).
BenchmarkCase parse_problem(const std::string& text, const std::string& name);
BenchmarkCase load_problem(const std::string& path);

}  // namespace ordcut

#endif
