// dicke_cli.cpp — command-line front end: cumulant tables, CGF scans,
// transient propagation, counting distributions, parameter sweeps, canned
// figure datasets, and thermodynamic-limit checks. All tabular output is CSV
// (stdout by default, --out FILE to write a file); complex values occupy a
// re/im column pair. Errors print a single "error: ..." line on stderr and
// exit nonzero.
#include <cmath>
#include <complex>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dicke/csv.hpp"
#include "dicke/eom.hpp"
#include "dicke/fcs.hpp"
#include "dicke/model.hpp"
#include "dicke/sweep.hpp"

namespace {

using dicke::ModelParams;
namespace csv = dicke::csv;
namespace eom = dicke::eom;
namespace fcs = dicke::fcs;
namespace sweep = dicke::sweep;

void add_model_flags(CLI::App* cmd, ModelParams& p) {
  cmd->add_option("--N", p.N, "number of two-level systems")
      ->capture_default_str();
  cmd->add_option("--gamma-s", p.gamma_s, "source coupling rate")
      ->capture_default_str();
  cmd->add_option("--gamma-d", p.gamma_d, "drain coupling rate")
      ->capture_default_str();
  cmd->add_option("--ns", p.n_s, "source thermal occupation")
      ->capture_default_str();
  cmd->add_option("--nd", p.n_d, "drain thermal occupation")
      ->capture_default_str();
}

void write_table(const csv::Table& table, const std::string& out) {
  if (out == "-")
    csv::emit(table, std::cout);
  else
    csv::write_file(table, out);
}

std::vector<std::string> param_cells(const ModelParams& p) {
  return {csv::format_double(p.N), csv::format_double(p.gamma_s),
          csv::format_double(p.gamma_d), csv::format_double(p.n_s),
          csv::format_double(p.n_d)};
}

// "lo,hi,..." explicit list, or "log:lo:hi:count" / "lin:lo:hi:count".
std::vector<double> parse_grid(const std::string& text) {
  auto parse_num = [](const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad grid number: " + s);
    return v;
  };
  std::vector<std::string> parts;
  const bool ranged = text.find(':') != std::string::npos;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ranged ? ':' : ','))
    parts.push_back(item);
  if (!ranged) {
    std::vector<double> grid;
    for (const auto& s : parts) grid.push_back(parse_num(s));
    return grid;
  }
  if (parts.size() != 4 || (parts[0] != "log" && parts[0] != "lin"))
    throw std::invalid_argument(
        "grid must be a comma list or log:lo:hi:count / lin:lo:hi:count");
  const double lo = parse_num(parts[1]);
  const double hi = parse_num(parts[2]);
  const long count = std::lround(parse_num(parts[3]));
  if (count < 1) throw std::invalid_argument("grid count must be >= 1");
  if (parts[0] == "log" && (lo <= 0.0 || hi <= 0.0))
    throw std::invalid_argument("log grid endpoints must be positive");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    grid[static_cast<std::size_t>(i)] =
        parts[0] == "log" ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s;
  }
  grid.back() = hi;  // land on the endpoint exactly despite pow rounding
  return grid;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Counting statistics of boson transport through a collective "
      "two-level medium between two thermal reservoirs"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key = value configuration file ([subcommand] sections "
                 "override per command)");

  // ---- cumulants -----------------------------------------------------
  auto* cmd_cum = app.add_subcommand(
      "cumulants", "stationary cumulant rates 1..order for one back-end");
  ModelParams cum_p;
  int cum_order = 2;
  std::string cum_method = "me";
  std::string cum_out = "-";
  add_model_flags(cmd_cum, cum_p);
  cmd_cum->add_option("--order", cum_order, "highest cumulant order")
      ->capture_default_str();
  cmd_cum
      ->add_option("--method", cum_method,
                   "me | fd | approx1 | approx2 | approx3 | n1-analytic")
      ->capture_default_str();
  cmd_cum->add_option("--out", cum_out, "output CSV file (- for stdout)")
      ->capture_default_str();
  cmd_cum->callback([&] {
    std::vector<double> values;
    std::vector<std::string> warnings;
    if (cum_method == "fd") {
      const auto set = fcs::cross_check_cumulants(cum_p, cum_order);
      values = set.values;
      warnings = set.warnings;
    } else {
      values = sweep::cumulant_rates(
          cum_p, sweep::method_from_string(cum_method), cum_order);
    }
    csv::Table t;
    t.header = {"N", "gamma_s", "gamma_d", "n_s", "n_d", "method"};
    for (int k = 1; k <= cum_order; ++k)
      t.header.push_back("k" + std::to_string(k));
    t.header.push_back("warnings");
    auto row = param_cells(cum_p);
    row.push_back(cum_method);
    for (double v : values) row.push_back(csv::format_double(v));
    row.push_back(join(warnings, "; "));
    t.add_row(std::move(row));
    write_table(t, cum_out);
  });

  // ---- cgf-scan ------------------------------------------------------
  auto* cmd_scan = app.add_subcommand(
      "cgf-scan", "long-time CGF rate (dominant eigenvalue) on a chi grid");
  ModelParams scan_p;
  double scan_chi_max = std::numbers::pi;
  int scan_points = 41;
  std::string scan_out = "-";
  add_model_flags(cmd_scan, scan_p);
  cmd_scan->add_option("--chi-max", scan_chi_max, "largest chi (in (0, pi])")
      ->capture_default_str();
  cmd_scan->add_option("--grid", scan_points, "number of chi points")
      ->capture_default_str();
  cmd_scan->add_option("--out", scan_out, "output CSV file (- for stdout)")
      ->capture_default_str();
  cmd_scan->callback([&] {
    if (!(scan_chi_max > 0.0 && scan_chi_max <= std::numbers::pi + 1e-12))
      throw std::invalid_argument("cgf-scan: --chi-max must lie in (0, pi]");
    if (scan_points < 2)
      throw std::invalid_argument("cgf-scan: --grid must be >= 2");
    std::vector<double> chis(static_cast<std::size_t>(scan_points));
    for (int i = 0; i < scan_points; ++i)
      chis[static_cast<std::size_t>(i)] =
          scan_chi_max * i / (scan_points - 1);
    const auto values = fcs::dominant_eigenvalue_scan(scan_p, chis);
    csv::Table t;
    t.header = {"chi", "cgf_rate_re", "cgf_rate_im"};
    for (std::size_t i = 0; i < chis.size(); ++i)
      t.add_row({csv::format_double(chis[i]),
                 csv::format_double(values[i].real()),
                 csv::format_double(values[i].imag())});
    write_table(t, scan_out);
  });

  // ---- transient -----------------------------------------------------
  auto* cmd_tr = app.add_subcommand(
      "transient", "finite-time CGF C(chi, t) from the stationary state");
  ModelParams tr_p;
  double tr_chi = 0.7, tr_tfinal = 10.0, tr_rtol = 1e-9;
  int tr_samples = 101;
  std::string tr_out = "-";
  add_model_flags(cmd_tr, tr_p);
  cmd_tr->add_option("--chi", tr_chi, "counting field")->capture_default_str();
  cmd_tr->add_option("--t-final", tr_tfinal, "end of the time window")
      ->capture_default_str();
  cmd_tr->add_option("--grid", tr_samples, "number of sample times")
      ->capture_default_str();
  cmd_tr->add_option("--rtol", tr_rtol, "integrator relative tolerance")
      ->capture_default_str();
  cmd_tr->add_option("--out", tr_out, "output CSV file (- for stdout)")
      ->capture_default_str();
  cmd_tr->callback([&] {
    fcs::OdeOptions opt;
    opt.rtol = tr_rtol;
    const auto res = fcs::propagate_transient(
        tr_p, dicke::CountingField(tr_chi), tr_tfinal, tr_samples, opt);
    csv::Table t;
    t.header = {"t", "cgf_re", "cgf_im"};
    for (std::size_t i = 0; i < res.times.size(); ++i)
      t.add_row({csv::format_double(res.times[i]),
                 csv::format_double(res.values[i].real()),
                 csv::format_double(res.values[i].imag())});
    write_table(t, tr_out);
  });

  // ---- distribution ----------------------------------------------------
  auto* cmd_dist = app.add_subcommand(
      "distribution", "counting distribution P_n(t) for n in [-n-max, n-max]");
  ModelParams dist_p;
  double dist_t = 5.0, dist_rtol = 1e-9;
  int dist_nmax = 64;
  bool dist_serial = false;
  std::string dist_out = "-";
  add_model_flags(cmd_dist, dist_p);
  cmd_dist->add_option("--t", dist_t, "counting time")->capture_default_str();
  cmd_dist->add_option("--n-max", dist_nmax, "largest |n| reconstructed")
      ->capture_default_str();
  cmd_dist->add_option("--rtol", dist_rtol, "integrator relative tolerance")
      ->capture_default_str();
  cmd_dist->add_flag("--serial", dist_serial,
                     "propagate chi points serially (no OpenMP)");
  cmd_dist->add_option("--out", dist_out, "output CSV file (- for stdout)")
      ->capture_default_str();
  cmd_dist->callback([&] {
    fcs::DistributionOptions opt;
    opt.ode.rtol = dist_rtol;
    if (dist_serial) opt.exec = dicke::kernels::Exec::serial;
    const auto dist = fcs::counting_distribution(dist_p, dist_t, dist_nmax, opt);
    csv::Table t;
    t.header = {"n", "probability"};
    for (std::size_t j = 0; j < dist.probabilities.size(); ++j)
      t.add_row({csv::format_double(dist.n_min + static_cast<double>(j)),
                 csv::format_double(dist.probabilities[j])});
    write_table(t, dist_out);
  });

  // ---- sweep -----------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand(
      "sweep", "cumulant rates over a parameter grid for several back-ends");
  ModelParams sweep_p;
  std::string sweep_axis = "ns", sweep_grid, sweep_out = "-";
  std::vector<std::string> sweep_methods = {"me"};
  int sweep_order = 2, sweep_cap = 512;
  bool sweep_serial = false;
  add_model_flags(cmd_sweep, sweep_p);
  cmd_sweep
      ->add_option("--axis", sweep_axis, "N | ns | nd | gamma-s | gamma-d")
      ->capture_default_str();
  cmd_sweep
      ->add_option("--grid", sweep_grid,
                   "comma list, or log:lo:hi:count / lin:lo:hi:count")
      ->required();
  cmd_sweep
      ->add_option("--method", sweep_methods,
                   "me | approx1 | approx2 | approx3 | n1-analytic "
                   "(repeatable)")
      ->capture_default_str();
  cmd_sweep->add_option("--order", sweep_order, "highest cumulant order")
      ->capture_default_str();
  cmd_sweep->add_option("--me-cap", sweep_cap, "largest N for the me method")
      ->capture_default_str();
  cmd_sweep->add_flag("--serial", sweep_serial,
                      "evaluate grid points serially (no OpenMP)");
  cmd_sweep->add_option("--out", sweep_out, "output CSV file (- for stdout)")
      ->capture_default_str();
  cmd_sweep->callback([&] {
    sweep::SweepSpec spec;
    spec.axis = sweep::axis_from_string(sweep_axis);
    spec.grid = parse_grid(sweep_grid);
    spec.base = sweep_p;
    for (const auto& m : sweep_methods)
      spec.methods.push_back(sweep::method_from_string(m));
    spec.order = sweep_order;
    spec.me_cap = sweep_cap;
    if (sweep_serial) spec.exec = dicke::kernels::Exec::serial;
    write_table(sweep::run_sweep(spec), sweep_out);
  });

  // ---- reproduce -------------------------------------------------------
  auto* cmd_rep = app.add_subcommand(
      "reproduce", "write a canned figure dataset (CSV + gnuplot script)");
  std::string rep_which, rep_out = ".";
  cmd_rep->add_option("which", rep_which, "fig2 | fig3")->required();
  cmd_rep->add_option("--out", rep_out, "output directory")
      ->capture_default_str();
  cmd_rep->callback([&] {
    for (const auto& path : sweep::reproduce_figure(rep_which, rep_out))
      std::cout << path << "\n";
  });

  // ---- limits ----------------------------------------------------------
  auto* cmd_lim = app.add_subcommand(
      "limits", "closed-form scaling limits vs the closure CGFs");
  ModelParams lim_p;
  double lim_chi = 0.7, lim_t = 1.0;
  std::string lim_out = "-";
  add_model_flags(cmd_lim, lim_p);
  cmd_lim->add_option("--chi", lim_chi, "counting field")->capture_default_str();
  cmd_lim->add_option("--t", lim_t, "counting time")->capture_default_str();
  cmd_lim->add_option("--out", lim_out, "output CSV file (- for stdout)")
      ->capture_default_str();
  cmd_lim->callback([&] {
    csv::Table t;
    t.header = {"regime",       "method",    "coefficient",
                "predicted_re", "predicted_im", "actual_re",
                "actual_im",    "rel_err",   "error"};
    const dicke::CountingField chi(lim_chi);
    for (auto regime : {eom::LimitRegime::linear,
                        eom::LimitRegime::super_transmittance,
                        eom::LimitRegime::low_bias}) {
      const char* rname = regime == eom::LimitRegime::linear
                              ? "linear"
                              : regime == eom::LimitRegime::super_transmittance
                                    ? "super-transmittance"
                                    : "low-bias";
      for (auto kind : {eom::ClosureKind::approx1, eom::ClosureKind::approx2,
                        eom::ClosureKind::approx3}) {
        const std::string mname =
            "approx" + std::to_string(static_cast<int>(kind) + 1);
        try {
          const auto form = eom::thermodynamic_limit(lim_p, kind, regime);
          const auto pred = form.evaluate(chi, lim_t);
          const auto actual = eom::approximate_cgf(lim_p, kind, chi, lim_t);
          // The predicted value is identically zero when the occupations
          // vanish; fall back to the absolute difference there instead of
          // printing 0/0.
          const double denom = std::abs(pred);
          const double err = denom > 0.0 ? std::abs(actual - pred) / denom
                                         : std::abs(actual - pred);
          t.add_row({rname, mname, csv::format_double(form.coefficient),
                     csv::format_double(pred.real()),
                     csv::format_double(pred.imag()),
                     csv::format_double(actual.real()),
                     csv::format_double(actual.imag()),
                     csv::format_double(err), ""});
        } catch (const std::exception& e) {
          t.add_row({rname, mname, "", "", "", "", "", "", e.what()});
        }
      }
    }
    write_table(t, lim_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.get_exit_code() ? e.get_exit_code() : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
