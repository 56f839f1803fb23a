// sweep.cpp — grid evaluation of the cumulant back-ends with per-row error
// capture, and deterministic figure-reproduction outputs.
#include "dicke/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "dicke/eom.hpp"
#include "dicke/fcs.hpp"
#include "dicke/liouvillian.hpp"

namespace dicke::sweep {

std::string to_string(Axis axis) {
  switch (axis) {
    case Axis::N: return "N";
    case Axis::n_s: return "ns";
    case Axis::n_d: return "nd";
    case Axis::gamma_s: return "gamma-s";
    case Axis::gamma_d: return "gamma-d";
  }
  return "?";
}

std::string to_string(Method method) {
  switch (method) {
    case Method::me: return "me";
    case Method::approx1: return "approx1";
    case Method::approx2: return "approx2";
    case Method::approx3: return "approx3";
    case Method::n1_analytic: return "n1-analytic";
  }
  return "?";
}

Axis axis_from_string(const std::string& name) {
  if (name == "N") return Axis::N;
  if (name == "ns") return Axis::n_s;
  if (name == "nd") return Axis::n_d;
  if (name == "gamma-s") return Axis::gamma_s;
  if (name == "gamma-d") return Axis::gamma_d;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

Method method_from_string(const std::string& name) {
  if (name == "me") return Method::me;
  if (name == "approx1") return Method::approx1;
  if (name == "approx2") return Method::approx2;
  if (name == "approx3") return Method::approx3;
  if (name == "n1-analytic") return Method::n1_analytic;
  throw std::invalid_argument("unknown method: " + name);
}

void SweepSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("sweep: grid is empty");
  for (double v : grid)
    if (!std::isfinite(v)) throw std::invalid_argument("sweep: grid value not finite");
  if (grid.size() > 1) {
    const bool increasing = grid[1] > grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (increasing ? grid[i] <= grid[i - 1] : grid[i] >= grid[i - 1])
        throw std::invalid_argument("sweep: grid must be strictly monotone");
  }
  if (axis == Axis::N)
    for (double v : grid)
      if (v < 1.0 || v != std::floor(v) || v > 1e9)
        throw std::invalid_argument("sweep: N grid values must be integers >= 1");
  if (methods.empty()) throw std::invalid_argument("sweep: no methods selected");
  if (order < 1 || order > 6)
    throw std::invalid_argument("sweep: order must be in 1..6");
  if (me_cap < 1) throw std::invalid_argument("sweep: me_cap must be >= 1");
  for (Method m : methods)
    if (m == Method::me) {
      double max_n = base.N;
      if (axis == Axis::N)
        for (double v : grid) max_n = std::max(max_n, v);
      if (max_n > me_cap)
        throw std::invalid_argument(
            "sweep: me method requires N <= " + std::to_string(me_cap));
    }
}

namespace {

ModelParams at_grid_point(const SweepSpec& spec, double v) {
  ModelParams p = spec.base;
  switch (spec.axis) {
    case Axis::N: p.N = static_cast<int>(v); break;
    case Axis::n_s: p.n_s = v; break;
    case Axis::n_d: p.n_d = v; break;
    case Axis::gamma_s: p.gamma_s = v; break;
    case Axis::gamma_d: p.gamma_d = v; break;
  }
  return p;
}

eom::ClosureKind closure_of(Method m) {
  switch (m) {
    case Method::approx1: return eom::ClosureKind::approx1;
    case Method::approx2: return eom::ClosureKind::approx2;
    case Method::approx3: return eom::ClosureKind::approx3;
    default: throw std::logic_error("closure_of: not a closure method");
  }
}

}  // namespace

std::vector<double> cumulant_rates(const ModelParams& p, Method method,
                                   int order) {
  switch (method) {
    case Method::me:
      return fcs::stationary_cumulants(p, order).values;
    case Method::n1_analytic:
      return fcs::analytic_cumulants_n1(p, order).values;
    default: {
      const auto r = eom::closure_steady_state(p, closure_of(method));
      const auto [odd, even] = eom::odd_even_cumulant_rates(p, r.jz1, r.jz2);
      std::vector<double> values(static_cast<std::size_t>(order));
      for (int k = 1; k <= order; ++k)
        values[static_cast<std::size_t>(k) - 1] = (k % 2 ? odd : even);
      return values;
    }
  }
}

namespace {

struct RowResult {
  std::vector<double> values;
  double seconds = 0.0;
  std::string error;
};

RowResult evaluate_row(const SweepSpec& spec, std::size_t flat_index) {
  const std::size_t m = spec.methods.size();
  const ModelParams p = at_grid_point(spec, spec.grid[flat_index / m]);
  const Method method = spec.methods[flat_index % m];
  RowResult out;
  const auto start = std::chrono::steady_clock::now();
  try {
    out.values = cumulant_rates(p, method, spec.order);
  } catch (const std::exception& e) {
    out.error = e.what();
  } catch (...) {
    out.error = "unknown error";
  }
  out.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

csv::Table run_sweep(const SweepSpec& spec) {
  spec.validate();

  csv::Table table;
  table.header = {"N", "gamma_s", "gamma_d", "n_s", "n_d", "method"};
  for (int k = 1; k <= spec.order; ++k)
    table.header.push_back("k" + std::to_string(k));
  table.header.push_back("wall_time_s");
  table.header.push_back("error");

  const std::size_t total = spec.grid.size() * spec.methods.size();
  std::vector<RowResult> results(total);
  if (spec.exec == kernels::Exec::openmp) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i)
      results[static_cast<std::size_t>(i)] =
          evaluate_row(spec, static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < total; ++i) results[i] = evaluate_row(spec, i);
  }

  for (std::size_t i = 0; i < total; ++i) {
    const ModelParams p = at_grid_point(spec, spec.grid[i / spec.methods.size()]);
    const Method method = spec.methods[i % spec.methods.size()];
    const RowResult& r = results[i];
    std::vector<std::string> row = {
        csv::format_double(p.N),      csv::format_double(p.gamma_s),
        csv::format_double(p.gamma_d), csv::format_double(p.n_s),
        csv::format_double(p.n_d),    to_string(method)};
    for (int k = 0; k < spec.order; ++k)
      row.push_back(r.error.empty() && k < static_cast<int>(r.values.size())
                        ? csv::format_double(r.values[static_cast<std::size_t>(k)])
                        : "");
    row.push_back(csv::format_double(r.seconds));
    row.push_back(r.error);
    table.add_row(std::move(row));
  }
  return table;
}

namespace {

// Log-spaced unique integers in [1, 500] — the figure's abscissa.
std::vector<int> figure_sizes() {
  std::vector<int> sizes;
  for (int i = 0; i <= 60; ++i) {
    const int n = static_cast<int>(
        std::lround(std::pow(10.0, i * (std::log10(500.0) / 60.0))));
    if (sizes.empty() || n > sizes.back()) sizes.push_back(n);
  }
  return sizes;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("write failed for " + path);
}

csv::Table fig2_table() {
  csv::Table t;
  t.header = {"panel", "n_s", "N", "k1_ratio_approx1", "k1_ratio_approx2",
              "k1_ratio_approx3"};
  const double panels[] = {0.1, 1.0, 10.0};
  for (int panel = 0; panel < 3; ++panel)
    for (int n : figure_sizes()) {
      const ModelParams p{n, 1.0, 1.0, panels[panel], 0.0, 1.0};
      const double me = first_cumulant_closed_form(p);
      std::vector<std::string> row = {csv::format_double(panel + 1),
                                      csv::format_double(panels[panel]),
                                      csv::format_double(n)};
      for (Method m : {Method::approx1, Method::approx2, Method::approx3})
        row.push_back(csv::format_double(cumulant_rates(p, m, 1)[0] / me));
      t.add_row(std::move(row));
    }
  return t;
}

csv::Table fig3_table() {
  csv::Table t;
  t.header = {"N", "n_s", "k2_me", "k2_approx1", "k2_approx2", "k2_approx3"};
  for (int n : {5, 10, 20, 40, 80})
    for (int j = 0; j <= 50; ++j) {
      const double ns = std::pow(10.0, -2.0 + 0.1 * j);
      const ModelParams p{n, 1.0, 1.0, ns, 0.0, 1.0};
      std::vector<std::string> row = {csv::format_double(n),
                                      csv::format_double(ns)};
      for (Method m : {Method::me, Method::approx1, Method::approx2,
                       Method::approx3})
        row.push_back(csv::format_double(cumulant_rates(p, m, 2)[1]));
      t.add_row(std::move(row));
    }
  return t;
}

const char kFig2Script[] = R"gp(# Ratio of closure to master-equation first cumulant versus system size.
set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 720,960
set output "fig2.png"
set multiplot layout 3,1
set logscale x
set logscale y
set xlabel "N"
set ylabel "k1 closure / k1 master equation"
do for [i=1:3] {
  set title sprintf("panel %d (n_s = %s)", i, word("0.1 1 10", i))
  plot "fig2.csv" using 3:(int(column(1)) == i ? column(4) : 1/0) \
         with points pt 6 lc rgb "black" title "approx1", \
       "" using 3:(int(column(1)) == i ? column(5) : 1/0) \
         with points pt 4 lc rgb "red" title "approx2", \
       "" using 3:(int(column(1)) == i ? column(6) : 1/0) \
         with points pt 12 lc rgb "blue" title "approx3"
}
unset multiplot
)gp";

const char kFig3Script[] = R"gp(# Second-cumulant rate versus source occupation for five system sizes.
set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 720,540
set output "fig3.png"
set logscale xy
set xlabel "n_s"
set ylabel "k2 rate"
Ns = "5 10 20 40 80"
plot for [i=1:5] "fig3.csv" \
       using 2:(int(column(1)) == (0 + word(Ns, i)) ? column(3) : 1/0) \
       with lines lw 3 lc i title sprintf("ME N=%s", word(Ns, i)), \
     for [i=1:5] "" \
       using 2:(int(column(1)) == (0 + word(Ns, i)) ? column(4) : 1/0) \
       with lines lc i dashtype 2 notitle, \
     for [i=1:5] "" \
       using 2:(int(column(1)) == (0 + word(Ns, i)) ? column(5) : 1/0) \
       with lines lc i dashtype 3 notitle, \
     for [i=1:5] "" \
       using 2:(int(column(1)) == (0 + word(Ns, i)) ? column(6) : 1/0) \
       with lines lc i dashtype 4 notitle
)gp";

}  // namespace

std::vector<std::string> reproduce_figure(const std::string& which,
                                          const std::string& out_dir) {
  if (which != "fig2" && which != "fig3")
    throw std::invalid_argument("reproduce_figure: expected fig2 or fig3");
  std::filesystem::create_directories(out_dir);
  const std::string csv_path = out_dir + "/" + which + ".csv";
  const std::string gp_path = out_dir + "/" + which + ".gp";
  csv::write_file(which == "fig2" ? fig2_table() : fig3_table(), csv_path);
  write_text(gp_path, which == "fig2" ? kFig2Script : kFig3Script);
  return {csv_path, gp_path};
}

}  // namespace dicke::sweep
