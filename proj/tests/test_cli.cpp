#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "ordcut/io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(ORDCUT_BIN) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

fs::path workdir() {
  fs::path p = fs::temp_directory_path() / "ordcut_cli_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("bad invocations exit 2") {
  CHECK(run("") == 2);                                    // missing subcommand
  CHECK(run("solve") == 2);                               // missing --problem
  CHECK(run("solve --problem /nonexistent/file.txt") == 2);
  CHECK(run("solve --problem riccati --grid 2") == 2);    // resolution < 3
  CHECK(run("bench --filter nonexistent") == 2);
  fs::path bad = workdir() / "bad_problem.txt";
  ordcut::io::write_text(bad.string(), "dt(u +\n[domain]\nlo = 0\nhi = 1\n");
  CHECK(run("solve --problem " + bad.string()) == 2);
}

TEST_CASE("solve writes a complete artifact set and exits 0") {
  fs::path out = workdir() / "identity_out";
  fs::remove_all(out);
  REQUIRE(run("solve --problem identity_smoke --out " + out.string()) == 0);
  for (const char* name : {"cut.json", "report.json", "plot.gp"})
    CHECK(fs::exists(out / name));
  CHECK(fs::exists(out / "levels" / "sub_0.csv"));

  ordcut::io::json rep = ordcut::io::read_json((out / "report.json").string());
  CHECK(rep["solver_complete"] == true);
  CHECK(rep["eps_final"].get<double>() == doctest::Approx(0.05));
  CHECK(std::fabs(rep["image_defect"].get<double>() - 0.025) <= 1e-12);
  CHECK(rep["pass_fraction"].get<double>() == doctest::Approx(1.0));
  CHECK(rep.contains("meta"));
}

TEST_CASE("solve then verify round trip exits 0; a spike breaks it") {
  fs::path out = workdir() / "identity_rt";
  fs::remove_all(out);
  REQUIRE(run("solve --problem identity_smoke --out " + out.string()) == 0);

  ordcut::io::json cut = ordcut::io::read_json((out / "cut.json").string());
  double eps_final = cut["epsilons"].back().get<double>();
  // Levels alternate sub/super; the finest sub entry is second to last.
  const auto& levels = cut["levels"];
  ordcut::io::json fn = levels[levels.size() - 2]["fn"];
  REQUIRE(levels[levels.size() - 2]["side"] == "sub");

  fs::path cand = out / "candidate.json";
  ordcut::io::write_text(cand.string(), fn.dump());
  std::string eps_arg = " --eps0 " + std::to_string(eps_final) + " ";
  CHECK(run("verify --problem identity_smoke" + eps_arg + cand.string()) == 0);

  // One interior value pushed past the band by 2 eps: audit must fail.
  ordcut::io::json spiked = fn;
  size_t mid = spiked["values"].size() / 2;
  spiked["values"][mid] = spiked["values"][mid].get<double>() + 4.0 * eps_final;
  fs::path bad = out / "spiked.json";
  ordcut::io::write_text(bad.string(), spiked.dump());
  CHECK(run("verify --problem identity_smoke" + eps_arg + bad.string()) == 1);

  // Malformed candidate: bad input, not an audit failure.
  fs::path junk = out / "junk.json";
  ordcut::io::write_text(junk.string(), "{\"neither\": true}");
  CHECK(run("verify --problem identity_smoke" + eps_arg + junk.string()) == 2);
  CHECK(run("verify --problem identity_smoke" + eps_arg +
            (out / "missing.json").string()) == 4);
}

TEST_CASE("verify accepts an exact interval-function candidate") {
  using ordcut::Grid;
  // The zero function solves dt(u) = u^2 exactly, so it passes any band.
  Grid g({0.0}, {0.9}, {65});
  ordcut::PiecewiseFn zero;
  zero.grid = g;
  zero.values.assign(g.size(), 0.0);
  zero.mask = ordcut::SingularMask(g.size());
  fs::path cand = workdir() / "zero.json";
  ordcut::io::write_text(cand.string(), ordcut::io::to_json(zero).dump());
  CHECK(run("verify --problem riccati --eps0 0.05 " + cand.string()) == 0);
}
