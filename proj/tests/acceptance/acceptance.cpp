// One PASS/FAIL line per criterion. Exit status is nonzero if any selected
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "hawkesruin/analytic_exp.hpp"
#include "hawkesruin/gaussian.hpp"
#include "hawkesruin/hawkes_sim.hpp"
#include "hawkesruin/parallel.hpp"
#include "hawkesruin/ruin.hpp"
#include "hawkesruin/stats.hpp"
#include "hawkesruin/volterra.hpp"

using namespace hawkesruin;
namespace an = hawkesruin::analytic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

unsigned g_threads = 1;
std::string g_cli;
std::string g_config;

const an::ExpKernelParams fig1_params(0.3, 0.5);
const ExcitingKernel fig1_kernel = ExcitingKernel::exponential(0.3, 0.5);
const ClaimDistribution unit_exp = ClaimDistribution::exponential(1.0);

double max_rel_error(const GridFunction& f, const std::function<double(double)>& exact) {
  double worst = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double e = exact(f.grid.node(k));
    worst = std::max(worst, std::abs(f[k] - e) / std::abs(e));
  }
  return worst;
}

// Volterra solution against the closed forms.
Outcome criterion1() {
  const auto t0 = Clock::now();
  const TimeGrid grid(1.0, 1e-3);
  const auto g1 = solve_g1(fig1_kernel, grid);
  const auto g2 = solve_g2(fig1_kernel, g1);
  const double secs = seconds_since(t0);
  const double e1 = max_rel_error(g1, [](double t) { return an::g1_closed(fig1_params, t); });
  const double e2 = max_rel_error(g2, [](double t) { return an::g2_closed(fig1_params, t, an::FormulaSet::printed); });
  const double e2d = max_rel_error(g2, [](double t) { return an::g2_closed(fig1_params, t, an::FormulaSet::derived); });
  Outcome o;
  o.pass = e1 <= 1e-4 && e2 <= 1e-4 && secs < 1.0;
  o.detail = fmt::format("g1 max rel err {:.3g}, g2 vs printed closed form {:.3g} (vs derived {:.3g}), "
                         "g2(1) = {:.7f} printed {:.7f}, {:.2f} s",
                         e1, e2, e2d, g2.back(), an::g2_closed(fig1_params, 1.0, an::FormulaSet::printed), secs);
  return o;
}

// Counting-process mean and variance at T = 1, mu = 1.
Outcome criterion2() {
  const auto t0 = Clock::now();
  const std::size_t n = 100000;
  std::vector<double> counts(n);
  parallel_for(n, g_threads, [&](std::size_t i) {
    counts[i] = static_cast<double>(simulate_hawkes(fig1_kernel, 1.0, 1.0, StreamKey{0xacc2, i}).count_until(1.0));
  });
  const auto mean = stats::summarize(counts);
  const auto var = stats::sample_variance(counts);
  const double secs = seconds_since(t0);
  const double mean_ref = 1.140481;
  const double var_ref = 1.42794;
  const double zm = (mean.mean() - mean_ref) / mean.std_err();
  const double zv = (var.variance - var_ref) / var.std_err;
  Outcome o;
  o.pass = std::abs(zm) <= 3.0 && std::abs(zv) <= 3.0 && secs < 30.0;
  o.detail = fmt::format("mean {:.5f} +- {:.5f} vs {} (z {:.2f}); variance {:.5f} +- {:.5f} vs {} (z {:.2f}); "
                         "integral-equation variance {:.7f}; {:.1f} s",
                         mean.mean(), mean.std_err(), mean_ref, zm, var.variance, var.std_err, var_ref, zv,
                         an::var_N1(fig1_params, 1.0, an::FormulaSet::derived), secs);
  return o;
}

// Closed forms of the excitation-state moments against simulation.
Outcome criterion3() {
  const auto t0 = Clock::now();
  an::ValidationOptions vo;
  vo.threads = g_threads;
  vo.include_count_moments = false;
  const auto report = an::validate_formulas(fig1_params, vo);
  const double secs = seconds_since(t0);
  const bool printed = report.printed_passes();
  const bool derived = report.derived_passes();
  std::size_t printed_bad = 0;
  double worst_derived = 0.0;
  for (const auto& c : report.checks) {
    if (!c.printed_ok()) ++printed_bad;
    if (c.mc_se > 0.0) worst_derived = std::max(worst_derived, std::abs(c.derived_z()));
  }
  Outcome o;
  o.pass = (printed || derived) && secs < 120.0;
  o.detail = fmt::format("{} checks; printed set {} ({} outside 3 SE); fallback {} (worst |z| {:.2f}); "
                         "running with {}; {:.1f} s",
                         report.checks.size(), printed ? "passes" : "fails", printed_bad,
                         derived ? "passes" : "fails", worst_derived,
                         report.selected() == an::FormulaSet::printed ? "printed" : "derived", secs);
  return o;
}

// Empirical check of the Gaussian limit.
Outcome criterion4() {
  const auto t0 = Clock::now();
  FcltOptions ks_opts;
  ks_opts.threads = g_threads;
  ks_opts.reference_variance = 2.56842;
  const auto ks = fclt_check(fig1_kernel, unit_exp, 200.0, TimeGrid(1.0, 0.1), 5000, ks_opts);
  FcltOptions cov_opts;
  cov_opts.threads = g_threads;
  cov_opts.seed = 0xf1c8;
  const auto cov = fclt_check(fig1_kernel, unit_exp, 400.0, TimeGrid(1.0, 0.1), 10000, cov_opts);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = ks.ks_p_value > 0.01 && cov.max_cov_deviation_se <= 4.0 && secs < 300.0;
  o.detail = fmt::format("KS vs N(0, 2.56842) at mu=200: D {:.4f}, p {:.3f}; sample var {:.4f}; "
                         "max |cov dev| at mu=400 {:.2f} SE (t_i {:.1f}, t_j {:.1f}); {:.1f} s",
                         ks.ks_statistic, ks.ks_p_value, ks.sample_variance_T, cov.max_cov_deviation_se,
                         0.1 * static_cast<double>(cov.worst_i), 0.1 * static_cast<double>(cov.worst_j), secs);
  return o;
}

// h = 0 against the reflection principle.
Outcome criterion5() {
  const auto t0 = Clock::now();
  Outcome o;
  o.pass = true;
  for (double u : {1.0, 2.0, 3.0}) {
    const RuinProblem p{u, 0.3, 1.0, ExcitingKernel::zero(), unit_exp};
    GaussianRuinOptions g;
    g.n_paths = 100000;
    g.threads = g_threads;
    const auto e = ruin_mc_gaussian(p, TimeGrid(1.0, 0.01), g);
    const double exact = brownian_ruin_probability(u, 0.3, 1.0, unit_exp.moments().m2);
    const double z = (e.p_hat - exact) / e.std_err;
    o.pass = o.pass && std::abs(z) <= 3.0;
    o.detail += fmt::format("u={}: {:.5f} +- {:.5f} vs {:.5f} (z {:.2f}); ", u, e.p_hat, e.std_err, exact, z);
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < 60.0;
  o.detail += fmt::format("{:.1f} s", secs);
  return o;
}

// Pre-limit simulation against the Gaussian limit.
Outcome criterion6() {
  const auto t0 = Clock::now();
  const RuinProblem p{2.0, 0.3, 1.0, fig1_kernel, unit_exp};
  const TimeGrid grid(1.0, 0.01);
  DirectRuinOptions d;
  d.n_paths = 10000;
  d.threads = g_threads;
  GaussianRuinOptions g;
  g.n_paths = 10000;
  g.threads = g_threads;
  const auto direct = ruin_mc_direct(p, 400.0, grid, d);
  const auto gauss = ruin_mc_gaussian(p, grid, g);
  const double se = std::hypot(direct.std_err, gauss.std_err);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = std::abs(direct.p_hat - gauss.p_hat) <= 3.0 * se && secs < 300.0;
  o.detail = fmt::format("direct(mu=400) {:.5f} +- {:.5f}, gaussian {:.5f} +- {:.5f}, diff {:.2f} combined SE; {:.1f} s",
                         direct.p_hat, direct.std_err, gauss.p_hat, gauss.std_err,
                         std::abs(direct.p_hat - gauss.p_hat) / se, secs);
  return o;
}

// Parameter sweeps under common random numbers.
Outcome criterion7() {
  const auto t0 = Clock::now();
  const TimeGrid grid(1.0, 0.01);
  GaussianRuinOptions g;
  g.n_paths = 100000;
  g.threads = g_threads;
  g.seed = 0xc4;
  auto run = [&](ExcitingKernel k, ClaimDistribution c) {
    return ruin_mc_gaussian(RuinProblem{2.0, 0.3, 1.0, std::move(k), std::move(c)}, grid, g);
  };
  // direction +1: nondecreasing, -1: nonincreasing
  auto trend = [](const std::vector<RuinEstimate>& e, int direction, double& worst) {
    bool ok = true;
    for (std::size_t i = 1; i < e.size(); ++i) {
      const double step = direction * (e[i].p_hat - e[i - 1].p_hat);
      const double se = std::hypot(e[i].std_err, e[i - 1].std_err);
      worst = std::min(worst, step / se);
      ok = ok && step >= -2.0 * se;
    }
    return ok;
  };
  std::vector<RuinEstimate> by_alpha, by_rate, by_shape;
  for (double a : {0.1, 0.2, 0.3, 0.4}) by_alpha.push_back(run(ExcitingKernel::exponential(a, 0.5), unit_exp));
  for (double l : {0.5, 1.0, 2.0}) by_rate.push_back(run(fig1_kernel, ClaimDistribution::exponential(l)));
  for (double a : {0.5, 1.0, 2.0}) by_shape.push_back(run(fig1_kernel, ClaimDistribution::gamma(a, 0.5)));
  double wa = INFINITY, wl = INFINITY, ws = INFINITY;
  const bool oa = trend(by_alpha, +1, wa);
  const bool ol = trend(by_rate, -1, wl);
  const bool os = trend(by_shape, +1, ws);
  const double secs = seconds_since(t0);
  auto list = [](const std::vector<RuinEstimate>& e) {
    std::string s;
    for (const auto& x : e) s += fmt::format("{}{:.4f}", s.empty() ? "" : " ", x.p_hat);
    return s;
  };
  Outcome o;
  o.pass = oa && ol && os && secs < 600.0;
  o.detail = fmt::format("alpha [{}] min step {:.1f} SE; claim rate [{}] min step {:.1f} SE; "
                         "gamma shape [{}] min step {:.1f} SE; {:.1f} s",
                         list(by_alpha), wa, list(by_rate), wl, list(by_shape), ws, secs);
  return o;
}

// Piterbarg constants and the large-u asymptotic.
Outcome criterion8() {
  const auto t0 = Clock::now();
  Outcome o;
  o.pass = true;
  PiterbargOptions po;
  po.threads = g_threads;
  for (double R : {0.5, 1.0, 2.0}) {
    try {
      const auto e = piterbarg_constant(R, po);
      const bool ok = e.last_relative_change < 1e-2;
      o.pass = o.pass && ok;
      o.detail += fmt::format("P(R={}) = {:.4f} +- {:.4f} at S={} (change {:.4f}); ", R, e.value, e.std_err,
                              e.horizon, e.last_relative_change);
    } catch (const Error& err) {
      o.pass = false;
      o.detail += fmt::format("P(R={}) failed: {}; ", R, err.what());
    }
  }
  const RuinProblem p{2.0, 0.3, 1.0, fig1_kernel, unit_exp};
  const auto moments = horizon_moments(p);
  bool inapplicable = false;
  try {
    asymptotic_inputs(p, moments);
  } catch (const Error& err) {
    inapplicable = err.code() == ErrorCode::asymptotic_inapplicable;
  }
  if (inapplicable) {
    // documented outcome; the opt-in magnitude reading is reported alongside
    const auto in = asymptotic_inputs(p, moments, GTildeConvention::magnitude);
    RuinProblem far = p;
    far.u = 4.0 * in.sigma_T;
    const auto asym = ruin_asymptotic(far, in, po);
    GaussianRuinOptions g;
    g.n_paths = 100000;
    g.threads = g_threads;
    g.importance = ImportanceSampling::on;
    const auto mc = ruin_mc_gaussian(far, TimeGrid(1.0, 0.01), g);
    o.detail += fmt::format("G~ = {:.4f} <= 0: AsymptoticInapplicable raised; |G~| reading R = {:.3f}, "
                            "asymptotic/MC at u=4 sigma(T) = {:.3f} (informational); ",
                            in.g_tilde, in.piterbarg_argument, asym.p_hat / mc.p_hat);
  } else {
    const auto in = asymptotic_inputs(p, moments);
    RuinProblem far = p;
    far.u = 4.0 * in.sigma_T;
    const auto asym = ruin_asymptotic(far, in, po);
    GaussianRuinOptions g;
    g.n_paths = 100000;
    g.threads = g_threads;
    g.importance = ImportanceSampling::on;
    const auto mc = ruin_mc_gaussian(far, TimeGrid(1.0, 0.01), g);
    const double ratio = asym.p_hat / mc.p_hat;
    o.pass = o.pass && ratio >= 0.5 && ratio <= 2.0;
    o.detail += fmt::format("asymptotic/MC at u=4 sigma(T) = {:.3f}; ", ratio);
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < 300.0;
  o.detail += fmt::format("{:.1f} s", secs);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Two figures runs, byte-compared.
Outcome criterion9() {
  Outcome o;
  if (g_cli.empty() || g_config.empty()) {
    o.detail = "no CLI path or config given";
    return o;
  }
  const fs::path root = fs::temp_directory_path() / fmt::format("hr_determinism_{}", ::getpid());
  fs::remove_all(root);
  const auto t0 = Clock::now();
  for (const char* run : {"a", "b"}) {
    const std::string cmd = fmt::format("\"{}\" --config \"{}\" --out \"{}\" figures --paths 5000 > /dev/null",
                                        g_cli, g_config, (root / run).string());
    if (std::system(cmd.c_str()) != 0) {
      o.detail = "figures run failed: " + cmd;
      return o;
    }
  }
  std::set<std::string> names;
  for (const char* run : {"a", "b"}) {
    for (const auto& entry : fs::directory_iterator(root / run)) names.insert(entry.path().filename().string());
  }
  std::size_t same = 0;
  std::string differing;
  for (const auto& n : names) {
    const auto a = root / "a" / n;
    const auto b = root / "b" / n;
    if (fs::exists(a) && fs::exists(b) && slurp(a) == slurp(b)) {
      ++same;
    } else {
      differing += " " + n;
    }
  }
  fs::remove_all(root);
  o.pass = !names.empty() && same == names.size();
  o.detail = fmt::format("{}/{} artifacts byte-identical{}{}; {:.1f} s", same, names.size(),
                         differing.empty() ? "" : ", differing:", differing, seconds_since(t0));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--threads", g_threads, "Worker threads");
  app.add_option("--cli", g_cli, "Path to the command-line tool (criterion 9)");
  app.add_option("--config", g_config, "Config for the figures runs (criterion 9)");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3,
                                                          criterion4, criterion5, criterion6,
                                                          criterion7, criterion8, criterion9};
  bool all = true;
  for (int c : selected) {
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
