// CSV formatting/parsing round-trips, sweep validation and execution
// (serial vs OpenMP), and the canned figure datasets.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicke/csv.hpp"
#include "dicke/fcs.hpp"
#include "dicke/model.hpp"
#include "dicke/sweep.hpp"

using dicke::ModelParams;
namespace csv = dicke::csv;
namespace sweep = dicke::sweep;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("format_double round-trips every value bit for bit") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 17.0,
                   3.141592653589793, 1e308, 5e-324}) {
    const std::string s = csv::format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("tables enforce a consistent width") {
  csv::Table t;
  t.header = {"a", "b"};
  CHECK_NOTHROW(t.add_row({"1", "2"}));
  CHECK_THROWS_AS(t.add_row({"only-one"}), std::invalid_argument);
}

TEST_CASE("emit quotes only what needs quoting") {
  csv::Table t;
  t.header = {"plain", "tricky"};
  t.add_row({"hello", "with,comma"});
  t.add_row({"1.5", "say \"hi\""});
  t.add_row({"", "line\nbreak"});
  std::ostringstream os;
  csv::emit(t, os);
  const std::string text = os.str();
  CHECK(text.find("hello") != std::string::npos);
  CHECK(text.find("\"hello\"") == std::string::npos);
  CHECK(text.find("\"with,comma\"") != std::string::npos);
  CHECK(text.find("\"say \"\"hi\"\"\"") != std::string::npos);
  CHECK(text.find("\"line\nbreak\"") != std::string::npos);
}

TEST_CASE("parse inverts emit, including hostile cells") {
  csv::Table t;
  t.header = {"x", "y", "z"};
  t.add_row({"plain", "a,b", "q\"uote"});
  t.add_row({"", "multi\nline\r\nmess", "trailing space "});
  t.add_row({"-1.25e-17", ",", "\""});
  std::ostringstream os;
  csv::emit(t, os);
  std::istringstream is(os.str());
  const csv::Table back = csv::parse(is);
  REQUIRE(back.header == t.header);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(back.rows[i] == t.rows[i]);
}

TEST_CASE("parse accepts a missing final newline and rejects malformed input") {
  std::istringstream ok("a,b\n1,2");
  const csv::Table t = csv::parse(ok);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "2"});

  std::istringstream unterminated("a,b\n\"open,2\n");
  CHECK_THROWS_AS((void)csv::parse(unterminated), std::runtime_error);
  std::istringstream ragged("a,b\n1,2,3\n");
  CHECK_THROWS_AS((void)csv::parse(ragged), std::runtime_error);
  std::istringstream empty("");
  CHECK_THROWS_AS((void)csv::parse(empty), std::runtime_error);
}

TEST_CASE("axis and method names round-trip and reject unknowns") {
  using sweep::Axis;
  using sweep::Method;
  for (Axis a : {Axis::N, Axis::n_s, Axis::n_d, Axis::gamma_s, Axis::gamma_d})
    CHECK(sweep::axis_from_string(sweep::to_string(a)) == a);
  for (Method m : {Method::me, Method::approx1, Method::approx2,
                   Method::approx3, Method::n1_analytic})
    CHECK(sweep::method_from_string(sweep::to_string(m)) == m);
  CHECK_THROWS_AS((void)sweep::axis_from_string("bogus"), std::invalid_argument);
  CHECK_THROWS_AS((void)sweep::method_from_string("bogus"),
                  std::invalid_argument);
}

TEST_CASE("sweep validation rejects malformed specifications") {
  sweep::SweepSpec spec;
  spec.grid = {1.0, 2.0};
  spec.methods = {sweep::Method::me};
  CHECK_NOTHROW(spec.validate());

  auto bad = spec;
  bad.grid.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = spec;
  bad.grid = {1.0, 3.0, 2.0};  // not monotone
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = spec;
  bad.methods.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = spec;
  bad.order = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.order = 7;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = spec;
  bad.axis = sweep::Axis::N;
  bad.grid = {2.0, 2.5};  // N must be integer-valued
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = spec;
  bad.me_cap = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  // The exact-diagonalization back-end is capped in N.
  bad = spec;
  bad.axis = sweep::Axis::N;
  bad.grid = {8.0, 1024.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.methods = {sweep::Method::approx1};  // closures have no cap
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("cumulant_rates dispatches to the right back-end") {
  ModelParams p;
  p.N = 3;
  p.n_s = 1.5;
  const auto me = sweep::cumulant_rates(p, sweep::Method::me, 3);
  const auto ref = dicke::fcs::stationary_cumulants(p, 3);
  REQUIRE(me.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(me[k] == ref.values[k]);

  // Closures fill odd and even orders with their two rates.
  const auto a1 = sweep::cumulant_rates(p, sweep::Method::approx1, 4);
  REQUIRE(a1.size() == 4);
  CHECK(a1[0] == a1[2]);
  CHECK(a1[1] == a1[3]);

  ModelParams p1 = p;
  p1.N = 1;
  const auto n1 = sweep::cumulant_rates(p1, sweep::Method::n1_analytic, 2);
  const auto n1ref = dicke::fcs::analytic_cumulants_n1(p1, 2);
  for (int k = 0; k < 2; ++k) CHECK(n1[k] == n1ref.values[k]);
  CHECK_THROWS_AS((void)sweep::cumulant_rates(p, sweep::Method::n1_analytic, 2),
                  std::invalid_argument);
}

TEST_CASE("run_sweep emits grid-major rows and captures per-row failures") {
  sweep::SweepSpec spec;
  spec.axis = sweep::Axis::n_s;
  spec.grid = {0.5, 2.0};
  spec.base.N = 3;
  spec.methods = {sweep::Method::me, sweep::Method::n1_analytic};
  spec.order = 2;
  const auto table = sweep::run_sweep(spec);

  REQUIRE(table.header ==
          std::vector<std::string>{"N", "gamma_s", "gamma_d", "n_s", "n_d",
                                   "method", "k1", "k2", "wall_time_s",
                                   "error"});
  REQUIRE(table.rows.size() == 4);

  // Grid-major ordering: both methods at grid[0], then both at grid[1].
  CHECK(table.rows[0][3] == csv::format_double(0.5));
  CHECK(table.rows[1][3] == csv::format_double(0.5));
  CHECK(table.rows[2][3] == csv::format_double(2.0));
  CHECK(table.rows[3][3] == csv::format_double(2.0));

  for (std::size_t i = 0; i < 4; ++i) {
    const auto& row = table.rows[i];
    if (row[5] == "me") {
      CHECK(row[9].empty());
      CHECK(!row[6].empty());
      CHECK(!row[7].empty());
    } else {
      // N = 3 is outside the N = 1 closed form: error recorded, values empty.
      CHECK(row[5] == "n1-analytic");
      CHECK(!row[9].empty());
      CHECK(row[6].empty());
      CHECK(row[7].empty());
    }
  }
}

TEST_CASE("serial and openmp sweeps agree except for timings") {
  sweep::SweepSpec spec;
  spec.axis = sweep::Axis::N;
  spec.grid = {1.0, 2.0, 5.0, 13.0};
  spec.base.n_s = 2.5;
  spec.base.n_d = 0.5;
  spec.methods = {sweep::Method::me, sweep::Method::approx1,
                  sweep::Method::approx2, sweep::Method::approx3};
  spec.order = 4;

  auto serial_spec = spec;
  serial_spec.exec = dicke::kernels::Exec::serial;
  const auto par = sweep::run_sweep(spec);
  const auto ser = sweep::run_sweep(serial_spec);

  REQUIRE(par.rows.size() == ser.rows.size());
  REQUIRE(par.header.size() == 12);
  REQUIRE(par.header[10] == "wall_time_s");
  for (std::size_t i = 0; i < par.rows.size(); ++i)
    for (std::size_t c = 0; c < par.header.size(); ++c) {
      if (c == 10) continue;  // wall time legitimately differs
      CHECK(par.rows[i][c] == ser.rows[i][c]);
    }
}

TEST_CASE("figure datasets are reproducible byte for byte") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dicke_sweep_test_figs";
  fs::remove_all(dir);

  const auto paths1 = sweep::reproduce_figure("fig3", dir.string());
  REQUIRE(paths1.size() == 2);
  const std::string first = read_file(paths1[0]);
  const std::string script = read_file(paths1[1]);
  CHECK(!script.empty());

  const auto paths2 = sweep::reproduce_figure("fig3", dir.string());
  CHECK(read_file(paths2[0]) == first);

  // Structure: header + 5 sizes x 51 occupations, k2 columns all populated.
  std::istringstream is(first);
  const csv::Table t = csv::parse(is);
  REQUIRE(t.header == std::vector<std::string>{"N", "n_s", "k2_me",
                                               "k2_approx1", "k2_approx2",
                                               "k2_approx3"});
  REQUIRE(t.rows.size() == 5 * 51);
  for (const auto& row : t.rows)
    for (const auto& cell : row) CHECK(!cell.empty());

  CHECK_THROWS_AS((void)sweep::reproduce_figure("fig9", dir.string()),
                  std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("the first-order closure column of fig2 sits exactly on the exact current") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dicke_sweep_test_fig2";
  fs::remove_all(dir);
  const auto paths = sweep::reproduce_figure("fig2", dir.string());
  std::istringstream is(read_file(paths[0]));
  const csv::Table t = csv::parse(is);
  REQUIRE(t.header ==
          std::vector<std::string>{"panel", "n_s", "N", "k1_ratio_approx1",
                                   "k1_ratio_approx2", "k1_ratio_approx3"});
  REQUIRE(!t.rows.empty());
  for (const auto& row : t.rows) {
    const double ratio1 = std::strtod(row[3].c_str(), nullptr);
    CHECK(std::abs(ratio1 - 1.0) < 1e-12);
    // Closure 2 overshoots the exact current by up to its 3/2 asymptote;
    // closure 3 undershoots by at most ~8% on this grid.
    const double ratio2 = std::strtod(row[4].c_str(), nullptr);
    const double ratio3 = std::strtod(row[5].c_str(), nullptr);
    CHECK(ratio2 >= 1.0 - 1e-12);
    CHECK(ratio2 <= 1.5 + 1e-6);
    CHECK(ratio3 <= 1.0 + 1e-12);
    CHECK(ratio3 >= 0.9);
  }
  fs::remove_all(dir);
}
