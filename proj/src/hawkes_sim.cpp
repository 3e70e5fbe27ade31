#include "hawkesruin/hawkes_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "hawkesruin/io.hpp"
#include "hawkesruin/parallel.hpp"

namespace hawkesruin {

std::size_t HawkesPath::count_until(double t) const noexcept {
  return static_cast<std::size_t>(
      std::upper_bound(event_times.begin(), event_times.end(), t) - event_times.begin());
}

double CompoundPath::aggregate_until(double t) const noexcept {
  const std::size_t n = events.count_until(t);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += claim_sizes[i];
  return total;
}

double excitation_at(const ExcitingKernel& kernel, const HawkesPath& path, double t) {
  double z = 0.0;
  for (double tau : path.event_times) {
    if (tau >= t) break;
    z += kernel(t - tau);
  }
  return z;
}

namespace {

void check_budget(const ExcitingKernel& kernel, double mu, double horizon,
                  const SimulationLimits& limits) {
  require(std::isfinite(mu) && mu > 0.0, ErrorCode::invalid_parameter, "mu: must be > 0");
  require(std::isfinite(horizon) && horizon > 0.0, ErrorCode::invalid_parameter,
          "horizon: must be > 0");
  const auto report = stability_check(kernel);
  require(report.stable, ErrorCode::unstable_kernel, "kernel: L1 norm >= 1");
  const double expected = mu * horizon / (1.0 - report.norm);
  if (expected > static_cast<double>(limits.max_events)) {
    std::ostringstream msg;
    msg << "expected " << expected << " events per path exceeds the budget of "
        << limits.max_events;
    fail(ErrorCode::path_budget_exceeded, msg.str());
  }
}

void push_event(std::vector<double>& events, double t, const SimulationLimits& limits) {
  if (events.size() >= limits.max_events) {
    fail(ErrorCode::path_budget_exceeded, "path exceeded its event budget");
  }
  events.push_back(t);
}

double exponential_draw(Philox4x32& engine, double rate) {
  return -std::log(engine.uniform_open()) / rate;
}

std::vector<double> simulate_exponential(double alpha, double beta, double mu, double horizon,
                                         Philox4x32& engine, const SimulationLimits& limits) {
  std::vector<double> events;
  double t = 0.0;
  double z = 0.0;  // excitation right after time t
  for (;;) {
    const double bound = mu + z;  // intensity only decays until the next event
    const double w = exponential_draw(engine, bound);
    if (t + w > horizon) break;
    t += w;
    z *= std::exp(-beta * w);
    if (engine.uniform_open() * bound <= mu + z) {
      push_event(events, t, limits);
      z += alpha;
    }
  }
  return events;
}

// Decreasing envelope sup_{y >= x} h(y), exact on the tabulated nodes.
class KernelEnvelope {
 public:
  explicit KernelEnvelope(const ExcitingKernel& kernel) : kernel_(kernel) {
    if (const auto* tab = kernel.as_tabulated()) {
      times_ = tab->times;
      tail_sup_.resize(tab->values.size());
      double run = 0.0;
      for (std::size_t i = tab->values.size(); i-- > 0;) {
        run = std::max(run, tab->values[i]);
        tail_sup_[i] = run;
      }
    }
  }

  double operator()(double x) const {
    if (times_.empty()) return kernel_(x);  // zero and exponential kernels already decrease
    if (x > times_.back()) return 0.0;
    const auto it = std::upper_bound(times_.begin(), times_.end(), x);
    const auto i = static_cast<std::size_t>(it - times_.begin());
    // Over [x, t_i] the interpolant is bounded by h(x) and the node sup beyond.
    const double tail = i < tail_sup_.size() ? tail_sup_[i] : 0.0;
    return std::max(kernel_(x), tail);
  }

 private:
  const ExcitingKernel& kernel_;
  std::vector<double> times_;
  std::vector<double> tail_sup_;
};

std::vector<double> simulate_generic(const ExcitingKernel& kernel, double mu, double horizon,
                                     Philox4x32& engine, const SimulationLimits& limits) {
  const KernelEnvelope envelope(kernel);
  const double support = kernel.support_end();
  std::vector<double> events;
  std::size_t first_live = 0;  // earliest event still inside the kernel support
  double t = 0.0;
  for (;;) {
    while (first_live < events.size() && t - events[first_live] > support) ++first_live;
    double bound = mu;
    for (std::size_t i = first_live; i < events.size(); ++i) bound += envelope(t - events[i]);
    const double w = exponential_draw(engine, bound);
    if (t + w > horizon) break;
    t += w;
    double lambda = mu;
    for (std::size_t i = first_live; i < events.size(); ++i) lambda += kernel(t - events[i]);
    if (engine.uniform_open() * bound <= lambda) push_event(events, t, limits);
  }
  return events;
}

}  // namespace

HawkesPath simulate_hawkes(const ExcitingKernel& kernel, double mu, double horizon,
                           Philox4x32& engine, const SimulationLimits& limits) {
  check_budget(kernel, mu, horizon, limits);
  HawkesPath path;
  path.horizon = horizon;
  path.mu = mu;
  if (kernel.is_zero() && !limits.force_generic) {
    path.event_times = simulate_exponential(0.0, 1.0, mu, horizon, engine, limits);
  } else if (const auto* e = kernel.as_exponential(); e && !limits.force_generic) {
    path.event_times = simulate_exponential(e->alpha, e->beta, mu, horizon, engine, limits);
  } else {
    path.event_times = simulate_generic(kernel, mu, horizon, engine, limits);
  }
  return path;
}

HawkesPath simulate_hawkes(const ExcitingKernel& kernel, double mu, double horizon,
                           StreamKey key, const SimulationLimits& limits) {
  auto engine = key.engine();
  return simulate_hawkes(kernel, mu, horizon, engine, limits);
}

CompoundPath simulate_compound(const ExcitingKernel& kernel, double mu, double horizon,
                               const ClaimDistribution& claims, Philox4x32& engine,
                               const SimulationLimits& limits) {
  require(claims.samplable(), ErrorCode::not_samplable,
          "claims: a distribution given by moments only cannot be simulated");
  CompoundPath out{simulate_hawkes(kernel, mu, horizon, engine, limits), {}};
  out.claim_sizes.resize(out.events.event_times.size());
  for (auto& y : out.claim_sizes) y = claims.sample(engine);
  return out;
}

CompoundPath simulate_compound(const ExcitingKernel& kernel, double mu, double horizon,
                               const ClaimDistribution& claims, StreamKey key,
                               const SimulationLimits& limits) {
  require(claims.samplable(), ErrorCode::not_samplable,
          "claims: a distribution given by moments only cannot be simulated");
  // Claim sizes come from a sibling stream so event times do not depend on
  // the claim law.
  auto event_engine = key.engine();
  auto claim_engine = Philox4x32(mix_seed(key.seed, 1), key.stream);
  CompoundPath out{simulate_hawkes(kernel, mu, horizon, event_engine, limits), {}};
  out.claim_sizes.resize(out.events.event_times.size());
  for (auto& y : out.claim_sizes) y = claims.sample(claim_engine);
  return out;
}

void RiskPathConfig::validate() const {
  require(std::isfinite(u) && u >= 0.0, ErrorCode::invalid_parameter, "u: must be >= 0");
  require(std::isfinite(c) && c > 0.0, ErrorCode::invalid_parameter, "c: must be > 0");
  require(std::isfinite(mu) && mu > 0.0, ErrorCode::invalid_parameter, "mu: must be > 0");
  require(std::isfinite(horizon) && horizon > 0.0, ErrorCode::invalid_parameter,
          "horizon: must be > 0");
  require_stable(kernel);
}

namespace {

GridFunction compensator_grid(const ExcitingKernel& kernel, double horizon, double step) {
  const double t_max = std::ceil(horizon / step - 1e-9) * step;
  return cumulative_integral(solve_g1(kernel, TimeGrid(std::max(t_max, step), step)));
}

}  // namespace

RiskPathSimulator::RiskPathSimulator(RiskPathConfig config, double volterra_step,
                                     SimulationLimits limits)
    : config_(std::move(config)),
      limits_(limits),
      int_g1_((config_.validate(), compensator_grid(config_.kernel, config_.horizon, volterra_step))) {}

CompoundPath RiskPathSimulator::simulate_claims(StreamKey key) const {
  return simulate_compound(config_.kernel, config_.mu, config_.horizon, config_.claims, key,
                           limits_);
}

GridFunction RiskPathSimulator::scaled_claims(const CompoundPath& path, const TimeGrid& grid) const {
  const double m1 = config_.claims.moments().m1;
  const double root_mu = std::sqrt(config_.mu);
  const auto& times = path.events.event_times;
  std::vector<double> out(grid.size());
  std::size_t next = 0;
  double x = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    while (next < times.size() && times[next] <= t) x += path.claim_sizes[next++];
    out[k] = (x - config_.mu * m1 * compensator(t)) / root_mu;
  }
  return GridFunction(grid, std::move(out));
}

GridFunction RiskPathSimulator::wealth(const CompoundPath& path, const TimeGrid& grid) const {
  auto g = scaled_claims(path, grid);
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    g.values[k] = config_.u + config_.c * grid.node(k) - g.values[k];
  }
  return g;
}

GridFunction RiskPathSimulator::simulate_wealth(const TimeGrid& grid, StreamKey key) const {
  return wealth(simulate_claims(key), grid);
}

double RiskPathSimulator::running_max_excess(const CompoundPath& path) const {
  const double m1 = config_.claims.moments().m1;
  const double root_mu = std::sqrt(config_.mu);
  const auto& times = path.events.event_times;
  double best = 0.0, x = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    x += path.claim_sizes[i];
    const double t = times[i];
    best = std::max(best, (x - config_.mu * m1 * compensator(t)) / root_mu - config_.c * t);
  }
  return best;
}

GridFunction simulate_risk_path(const RiskPathConfig& config, const TimeGrid& grid,
                                StreamKey key) {
  require(std::abs(grid.last() - config.horizon) < 1e-9 * config.horizon,
          ErrorCode::grid_mismatch, "risk path grid must end at the horizon");
  return RiskPathSimulator(config).simulate_wealth(grid, key);
}

std::vector<GridFunction> simulate_scaled_claims(const ExcitingKernel& kernel,
                                                 const ClaimDistribution& claims, double mu,
                                                 const TimeGrid& grid, std::size_t n_paths,
                                                 std::uint64_t seed, unsigned threads,
                                                 double volterra_step) {
  RiskPathConfig config;
  config.u = 0.0;
  config.c = 1.0;  // unused by the scaled claims
  config.mu = mu;
  config.claims = claims;
  config.kernel = kernel;
  config.horizon = grid.last();
  const RiskPathSimulator sim(config, volterra_step);
  std::vector<GridFunction> out(n_paths, GridFunction(grid, std::vector<double>(grid.size())));
  parallel_for(n_paths, threads, [&](std::size_t i) {
    out[i] = sim.scaled_claims(sim.simulate_claims(StreamKey{seed, i}), grid);
  });
  return out;
}

void write_events_csv(std::ostream& out, std::span<const CompoundPath> paths) {
  io::CsvWriter csv(out, {"path", "time", "claim"});
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    for (std::size_t i = 0; i < path.claim_sizes.size(); ++i) {
      csv.row({static_cast<double>(p), path.events.event_times[i], path.claim_sizes[i]});
    }
  }
}

CovarianceModel empirical_cov(std::span<const GridFunction> paths) {
  require(paths.size() >= 2, ErrorCode::insufficient_samples,
          "empirical covariance needs at least two paths");
  const TimeGrid grid = paths.front().grid;
  for (const auto& p : paths) {
    require(p.grid == grid, ErrorCode::grid_mismatch, "paths live on different grids");
  }
  require(grid.size() >= 2, ErrorCode::invalid_parameter, "grid has no node past t = 0");
  const std::size_t dim = grid.size() - 1;
  const std::size_t n = paths.size();
  Eigen::MatrixXd centred(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) centred(i, j) = paths[i][j + 1];
  }
  const Eigen::RowVectorXd mean = centred.colwise().mean();
  centred.rowwise() -= mean;
  const double nd = static_cast<double>(n);

  CovarianceModel model{grid, Eigen::MatrixXd(dim, dim), CovarianceSource::mc_estimated, n,
                        Eigen::MatrixXd(dim, dim)};
  model.matrix = centred.transpose() * centred / (nd - 1.0);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a; b < dim; ++b) {
      const auto prod = centred.col(a).cwiseProduct(centred.col(b));
      const double m = prod.mean();
      const double var = (prod.array() - m).square().sum() / (nd - 1.0);
      const double se = std::sqrt(var / nd);
      model.standard_error(a, b) = model.standard_error(b, a) = se;
    }
  }
  return model;
}

}  // namespace hawkesruin
