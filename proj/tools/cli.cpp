// Batch front end over the C API.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "hawkesruin.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LibraryError : std::runtime_error {
  hr_status status;
  LibraryError(hr_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(hr_status s, const std::string& context) {
  if (s != HR_OK) {
    throw LibraryError(s, context + ": " + hr_status_name(s) + ": " + hr_last_error());
  }
}

struct Config {
  // [kernels]
  std::string kernel = "exponential";
  double alpha = 0.3;
  double beta = 0.5;
  std::string table;
  std::string claims = "exponential";
  double claim_rate = 1.0;
  double shape = 1.0;
  double rate = 0.5;
  double m1 = 1.0;
  double m2 = 2.0;
  // [volterra]
  double volterra_step = 1e-3;
  // [hawkes_sim]
  double sim_mu = 1.0;
  std::size_t sim_paths = 10;
  double sim_grid_step = 0.01;
  // [gaussian]
  double fclt_mu = 200.0;
  std::size_t fclt_paths = 5000;
  double fclt_grid_step = 0.1;
  double reference_variance = 0.0;
  // [ruin]
  double u = 2.0;
  double c = 0.3;
  double horizon = 1.0;
  std::string method = "all";
  std::size_t ruin_paths = 10000;
  double ruin_grid_step = 0.01;
  double direct_mu = 400.0;
  std::string monitoring = "continuous";
  std::string gtilde = "as-printed";
  std::string formulas = "derived";
  bool bias_check = true;
  // [cli]
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = "out";
  // [sweep]
  std::string sweep_parameter;
  std::vector<double> sweep_values;
};

double parse_number(const std::string& section, const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": expected a number, got '" + text + "'");
  }
}

std::size_t parse_count(const std::string& section, const std::string& key, const std::string& text) {
  const double v = parse_number(section, key, text);
  if (v < 0 || v != std::floor(v) || v > 1e15) {
    throw ConfigError("[" + section + "] " + key + ": expected a non-negative integer, got '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& section, const std::string& key,
                               const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(section, key, trim(item)));
  if (out.empty()) throw ConfigError("[" + section + "] " + key + ": empty list");
  return out;
}

void one_of(const std::string& section, const std::string& key, const std::string& value,
            std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw ConfigError("[" + section + "] " + key + ": '" + value + "' is not one of " + list);
}

Config load_config(const std::string& path) {
  Config cfg;
  if (path.empty()) return cfg;
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"kernels",
       {{"kernel", [&](const std::string& v) { one_of("kernels", "kernel", v, {"zero", "exponential", "tabulated"}); cfg.kernel = v; }},
        {"alpha", [&](const std::string& v) { cfg.alpha = parse_number("kernels", "alpha", v); }},
        {"beta", [&](const std::string& v) { cfg.beta = parse_number("kernels", "beta", v); }},
        {"table", [&](const std::string& v) { cfg.table = v; }},
        {"claims", [&](const std::string& v) { one_of("kernels", "claims", v, {"exponential", "gamma", "moments"}); cfg.claims = v; }},
        {"claim_rate", [&](const std::string& v) { cfg.claim_rate = parse_number("kernels", "claim_rate", v); }},
        {"shape", [&](const std::string& v) { cfg.shape = parse_number("kernels", "shape", v); }},
        {"rate", [&](const std::string& v) { cfg.rate = parse_number("kernels", "rate", v); }},
        {"m1", [&](const std::string& v) { cfg.m1 = parse_number("kernels", "m1", v); }},
        {"m2", [&](const std::string& v) { cfg.m2 = parse_number("kernels", "m2", v); }}}},
      {"volterra", {{"step", [&](const std::string& v) { cfg.volterra_step = parse_number("volterra", "step", v); }}}},
      {"hawkes_sim",
       {{"mu", [&](const std::string& v) { cfg.sim_mu = parse_number("hawkes_sim", "mu", v); }},
        {"paths", [&](const std::string& v) { cfg.sim_paths = parse_count("hawkes_sim", "paths", v); }},
        {"grid_step", [&](const std::string& v) { cfg.sim_grid_step = parse_number("hawkes_sim", "grid_step", v); }}}},
      {"gaussian",
       {{"mu", [&](const std::string& v) { cfg.fclt_mu = parse_number("gaussian", "mu", v); }},
        {"paths", [&](const std::string& v) { cfg.fclt_paths = parse_count("gaussian", "paths", v); }},
        {"grid_step", [&](const std::string& v) { cfg.fclt_grid_step = parse_number("gaussian", "grid_step", v); }},
        {"reference_variance", [&](const std::string& v) { cfg.reference_variance = parse_number("gaussian", "reference_variance", v); }}}},
      {"ruin",
       {{"u", [&](const std::string& v) { cfg.u = parse_number("ruin", "u", v); }},
        {"c", [&](const std::string& v) { cfg.c = parse_number("ruin", "c", v); }},
        {"horizon", [&](const std::string& v) { cfg.horizon = parse_number("ruin", "horizon", v); }},
        {"method", [&](const std::string& v) { one_of("ruin", "method", v, {"mc-gaussian", "mc-direct", "asymptotic", "all"}); cfg.method = v; }},
        {"paths", [&](const std::string& v) { cfg.ruin_paths = parse_count("ruin", "paths", v); }},
        {"grid_step", [&](const std::string& v) { cfg.ruin_grid_step = parse_number("ruin", "grid_step", v); }},
        {"mu", [&](const std::string& v) { cfg.direct_mu = parse_number("ruin", "mu", v); }},
        {"monitoring", [&](const std::string& v) { one_of("ruin", "monitoring", v, {"continuous", "grid"}); cfg.monitoring = v; }},
        {"gtilde", [&](const std::string& v) { one_of("ruin", "gtilde", v, {"as-printed", "magnitude"}); cfg.gtilde = v; }},
        {"formulas", [&](const std::string& v) { one_of("ruin", "formulas", v, {"derived", "printed"}); cfg.formulas = v; }},
        {"bias_check", [&](const std::string& v) { one_of("ruin", "bias_check", v, {"true", "false"}); cfg.bias_check = v == "true"; }}}},
      {"cli",
       {{"seed", [&](const std::string& v) { cfg.seed = parse_count("cli", "seed", v); }},
        {"threads", [&](const std::string& v) { cfg.threads = static_cast<unsigned>(parse_count("cli", "threads", v)); }},
        {"out", [&](const std::string& v) { cfg.out = v; }}}},
      {"sweep",
       {{"parameter", [&](const std::string& v) {
          one_of("sweep", "parameter", v, {"alpha", "beta", "claim_rate", "shape", "rate", "u", "c", "horizon", "mu"});
          cfg.sweep_parameter = v; }},
        {"values", [&](const std::string& v) { cfg.sweep_values = parse_list("sweep", "values", v); }}}},
  };
  for (const auto& [section, body] : tree) {
    const auto s = schema.find(section);
    if (s == schema.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const auto k = s->second.find(key);
      if (k == s->second.end()) throw ConfigError("[" + section + "] " + key + ": unknown key");
      k->second(trim(value.data()));
    }
  }
  if (cfg.sweep_parameter.empty() != cfg.sweep_values.empty()) {
    throw ConfigError("[sweep] parameter and values must be given together");
  }
  // kernel tables are looked up next to the config file
  if (!cfg.table.empty() && std::filesystem::path(cfg.table).is_relative()) {
    cfg.table = (std::filesystem::path(path).parent_path() / cfg.table).lexically_normal().string();
  }
  return cfg;
}

ordered_json echo(const Config& c) {
  ordered_json j;
  j["kernels"] = {{"kernel", c.kernel}, {"alpha", c.alpha}, {"beta", c.beta}, {"table", c.table},
                  {"claims", c.claims}, {"claim_rate", c.claim_rate}, {"shape", c.shape},
                  {"rate", c.rate}, {"m1", c.m1}, {"m2", c.m2}};
  j["volterra"] = {{"step", c.volterra_step}};
  j["hawkes_sim"] = {{"mu", c.sim_mu}, {"paths", c.sim_paths}, {"grid_step", c.sim_grid_step}};
  j["gaussian"] = {{"mu", c.fclt_mu}, {"paths", c.fclt_paths}, {"grid_step", c.fclt_grid_step},
                   {"reference_variance", c.reference_variance}};
  j["ruin"] = {{"u", c.u}, {"c", c.c}, {"horizon", c.horizon}, {"method", c.method},
               {"paths", c.ruin_paths}, {"grid_step", c.ruin_grid_step}, {"mu", c.direct_mu},
               {"monitoring", c.monitoring}, {"gtilde", c.gtilde}, {"formulas", c.formulas},
               {"bias_check", c.bias_check}};
  j["cli"] = {{"seed", c.seed}, {"threads", c.threads}};
  j["sweep"] = {{"parameter", c.sweep_parameter}, {"values", c.sweep_values}};
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// RAII wrappers for the opaque handles.
struct Model {
  hr_model* p = nullptr;
  Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  ~Model() { hr_model_destroy(p); }
};

struct Table {
  hr_table* p = nullptr;
  Table() = default;
  Table(const Table&) = delete;
  Table& operator=(const Table&) = delete;
  ~Table() { hr_table_destroy(p); }
};

std::vector<std::pair<double, double>> read_kernel_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("[kernels] table: cannot open '" + path + "'");
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("[kernels] table: expected 't,h' rows");
    if (header) {
      header = false;
      if (!std::isdigit(static_cast<unsigned char>(trim(line.substr(0, comma))[0]))) continue;
    }
    rows.emplace_back(parse_number("kernels", "table", trim(line.substr(0, comma))),
                      parse_number("kernels", "table", trim(line.substr(comma + 1))));
  }
  return rows;
}

void build_model(const Config& c, Model& m) {
  if (c.kernel == "zero") {
    check(hr_model_zero(&m.p), "kernel");
  } else if (c.kernel == "exponential") {
    check(hr_model_exponential(c.alpha, c.beta, &m.p), "kernel");
  } else {
    if (c.table.empty()) throw ConfigError("[kernels] table: required for a tabulated kernel");
    const auto rows = read_kernel_table(c.table);
    std::vector<double> t, h;
    for (const auto& [a, b] : rows) {
      t.push_back(a);
      h.push_back(b);
    }
    check(hr_model_tabulated(t.data(), h.data(), t.size(), &m.p), "kernel");
  }
  if (c.claims == "exponential") {
    check(hr_model_claims_exponential(m.p, c.claim_rate), "claims");
  } else if (c.claims == "gamma") {
    check(hr_model_claims_gamma(m.p, c.shape, c.rate), "claims");
  } else {
    check(hr_model_claims_moments(m.p, c.m1, c.m2), "claims");
  }
  int stable = 0;
  double norm = 0.0;
  check(hr_model_stability(m.p, &stable, &norm, nullptr), "kernel");
  if (!stable) {
    std::ostringstream msg;
    msg << "kernel: UnstableKernel: L1 norm " << norm << " >= 1";
    throw LibraryError(HR_UNSTABLE_KERNEL, msg.str());
  }
}

hr_formulas formulas_of(const Config& c) {
  return c.formulas == "printed" ? HR_FORMULAS_PRINTED : HR_FORMULAS_DERIVED;
}

hr_gtilde gtilde_of(const Config& c) {
  return c.gtilde == "magnitude" ? HR_GTILDE_MAGNITUDE : HR_GTILDE_AS_PRINTED;
}

hr_mc_options mc_options(const Config& c) {
  auto o = hr_mc_options_default();
  o.n_paths = c.ruin_paths;
  o.seed = c.seed;
  o.threads = c.threads;
  o.grid_step = c.ruin_grid_step;
  o.monitoring = c.monitoring == "grid" ? HR_MONITOR_GRID : HR_MONITOR_CONTINUOUS;
  o.bias_check = c.bias_check ? 1 : 0;
  o.formulas = formulas_of(c);
  o.volterra_step = c.volterra_step;
  o.mu = c.direct_mu;
  return o;
}

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw LibraryError(HR_IO_ERROR, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void table(const std::string& name, const Table& t) {
    check(hr_table_write_csv(t.p, (dir_ / name).string().c_str()), name);
    names_.insert(name);
  }

  void json(const std::string& name, const ordered_json& j) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) throw LibraryError(HR_IO_ERROR, "write failed: " + (dir_ / name).string());
    names_.insert(name);
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    std::ofstream out(dir_ / name, std::ios::binary);
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << shortest(r[j]);
      out << '\n';
    }
    if (!out) throw LibraryError(HR_IO_ERROR, "write failed: " + (dir_ / name).string());
    names_.insert(name);
  }

  void manifest(const std::string& command, const Config& cfg) {
    ordered_json m;
    m["tool"] = "hawkesruin";
    m["version"] = hr_version();
    m["command"] = command;
    m["seed"] = cfg.seed;
    m["config"] = echo(cfg);
    m["config_hash"] = hex(fnv1a(command + '\n' + m["config"].dump()));
    ordered_json files = ordered_json::array();
    for (const auto& name : names_) {
      std::ifstream in(dir_ / name, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      files.push_back({{"file", name}, {"fnv1a", hex(fnv1a(ss.str()))}});
    }
    m["artifacts"] = files;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
  }

  static std::string shortest(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
  }

 private:
  fs::path dir_;
  std::set<std::string> names_;
};

ordered_json ruin_json(const hr_ruin_result& r, const Config& c) {
  static const char* methods[] = {"mc-gaussian", "mc-direct", "asymptotic"};
  ordered_json j;
  j["method"] = methods[r.method];
  j["p_hat"] = r.p_hat;
  j["std_err"] = r.std_err;
  j["ci95"] = {r.ci_low, r.ci_high};
  j["inputs"] = {{"u", c.u}, {"c", c.c}, {"horizon", c.horizon}, {"kernel", c.kernel},
                 {"alpha", c.alpha}, {"beta", c.beta}, {"claims", c.claims}};
  j["seed"] = r.seed;
  if (r.method != HR_METHOD_ASYMPTOTIC) {
    j["n_paths"] = r.n_paths;
    j["grid"] = {{"step", r.grid_step}, {"horizon", c.horizon},
                 {"monitoring", r.monitoring == HR_MONITOR_GRID ? "grid" : "continuous"}};
  }
  if (r.method == HR_METHOD_MC_DIRECT) j["mu"] = r.mu;
  if (r.method == HR_METHOD_MC_GAUSSIAN) {
    j["importance_sampled"] = r.importance_sampled != 0;
    if (r.importance_sampled) j["tilt"] = r.tilt;
    if (r.has_bias) {
      j["grid_bias"] = {{"refined_p_hat", r.refined_p_hat}, {"difference", r.bias_difference},
                        {"difference_se", r.bias_difference_se},
                        {"within_two_se", r.bias_within_two_se != 0}};
    }
  }
  if (r.method == HR_METHOD_ASYMPTOTIC) {
    j["piterbarg"] = r.piterbarg;
    j["tail"] = r.tail;
  }
  return j;
}

ordered_json error_json(const char* method, const LibraryError& e) {
  return {{"method", method}, {"error", hr_status_name(e.status)}, {"message", e.what()}};
}

double& sweep_field(Config& c, const std::string& name) {
  if (name == "alpha") return c.alpha;
  if (name == "beta") return c.beta;
  if (name == "claim_rate") return c.claim_rate;
  if (name == "shape") return c.shape;
  if (name == "rate") return c.rate;
  if (name == "u") return c.u;
  if (name == "c") return c.c;
  if (name == "horizon") return c.horizon;
  return c.direct_mu;
}

// ---- subcommands ----

int run_moments(const Config& cfg, bool gate, std::size_t gate_paths) {
  Model m;
  build_model(cfg, m);
  Artifacts out(cfg.out);
  Table t;
  check(hr_moments(m.p, cfg.sim_mu, cfg.horizon, cfg.volterra_step, formulas_of(cfg), &t.p), "moments");
  out.table("moments.csv", t);
  if (gate) {
    if (cfg.kernel != "exponential") {
      throw ConfigError("--gate: the closed-form gate needs [kernels] kernel = exponential");
    }
    Table v;
    int printed = 0, derived = 0;
    hr_formulas selected = HR_FORMULAS_DERIVED;
    check(hr_validate_formulas(cfg.alpha, cfg.beta, gate_paths, cfg.seed, cfg.threads, &printed,
                               &derived, &selected, &v.p), "gate");
    out.table("validation.csv", v);
    out.json("validation.json", {{"n_paths", gate_paths},
                                 {"printed_passes", printed != 0},
                                 {"derived_passes", derived != 0},
                                 {"selected", selected == HR_FORMULAS_PRINTED ? "printed" : "derived"}});
  }
  out.manifest("moments", cfg);
  return 0;
}

int run_simulate(const Config& cfg) {
  Model m;
  build_model(cfg, m);
  Artifacts out(cfg.out);
  Table events, scaled;
  check(hr_simulate_events(m.p, cfg.sim_mu, cfg.horizon, cfg.sim_paths, cfg.seed, &events.p), "simulate");
  check(hr_simulate_scaled(m.p, cfg.sim_mu, cfg.horizon, cfg.sim_grid_step, cfg.sim_paths, cfg.seed,
                           cfg.threads, &scaled.p), "simulate");
  out.table("events.csv", events);
  out.table("scaled_paths.csv", scaled);
  out.manifest("simulate", cfg);
  return 0;
}

int run_fclt(const Config& cfg) {
  Model m;
  build_model(cfg, m);
  Artifacts out(cfg.out);
  hr_fclt_report r{};
  check(hr_fclt_check(m.p, cfg.fclt_mu, cfg.horizon, cfg.fclt_grid_step, cfg.fclt_paths, cfg.seed,
                      cfg.threads, cfg.reference_variance, formulas_of(cfg), &r), "fclt-check");
  static const char* sources[] = {"analytic-exponential", "analytic-poisson", "mc-estimated"};
  out.json("fclt.json", {{"mu", r.mu},
                         {"n_paths", r.n_paths},
                         {"horizon", r.horizon},
                         {"model_source", sources[r.model_source]},
                         {"model_variance_T", r.model_variance_T},
                         {"reference_variance_T", r.reference_variance_T},
                         {"sample_mean_T", r.sample_mean_T},
                         {"sample_variance_T", r.sample_variance_T},
                         {"ks_statistic", r.ks_statistic},
                         {"ks_p_value", r.ks_p_value},
                         {"max_cov_deviation_se", r.max_cov_deviation_se},
                         {"worst_entry", {r.worst_t_i, r.worst_t_j}},
                         {"seed", cfg.seed}});
  out.manifest("fclt-check", cfg);
  return 0;
}

int run_covariance(const Config& cfg) {
  Model m;
  build_model(cfg, m);
  Artifacts out(cfg.out);
  Table t;
  hr_cov_source source{};
  double jitter = 0.0;
  check(hr_covariance(m.p, cfg.horizon, cfg.fclt_grid_step, formulas_of(cfg), cfg.seed, cfg.threads,
                      &source, &jitter, &t.p), "covariance");
  static const char* sources[] = {"analytic-exponential", "analytic-poisson", "mc-estimated"};
  out.table("covariance.csv", t);
  out.json("covariance.json", {{"source", sources[source]}, {"jitter", jitter},
                               {"grid_step", cfg.fclt_grid_step}, {"horizon", cfg.horizon}});
  out.manifest("covariance", cfg);
  return 0;
}

ordered_json ruin_methods(const Config& cfg, const hr_model* model, bool& explicit_failure) {
  const hr_ruin_problem problem{cfg.u, cfg.c, cfg.horizon};
  const auto opts = mc_options(cfg);
  ordered_json results = ordered_json::array();
  const bool all = cfg.method == "all";
  if (all || cfg.method == "mc-gaussian") {
    hr_ruin_result r{};
    check(hr_ruin_gaussian(model, &problem, &opts, &r), "mc-gaussian");
    results.push_back(ruin_json(r, cfg));
  }
  if (all || cfg.method == "mc-direct") {
    hr_ruin_result r{};
    try {
      check(hr_ruin_direct(model, &problem, &opts, &r), "mc-direct");
      results.push_back(ruin_json(r, cfg));
    } catch (const LibraryError& e) {
      if (!all || e.status != HR_NOT_SAMPLABLE) throw;
      results.push_back(error_json("mc-direct", e));
    }
  }
  if (all || cfg.method == "asymptotic") {
    hr_asymptotic_inputs in{};
    const hr_status s = hr_asymptotic_inputs_eval(model, &problem, gtilde_of(cfg), formulas_of(cfg),
                                                  cfg.seed, cfg.threads, &in);
    ordered_json inputs = {{"sigma_T", in.sigma_T}, {"n_tilde", in.n_tilde}, {"g_tilde", in.g_tilde},
                           {"g1_T", in.g1}, {"g2_T", in.g2}, {"cov_N_lambda_T", in.cov_N_lambda},
                           {"gtilde_convention", cfg.gtilde}};
    if (s == HR_OK) {
      auto popts = hr_piterbarg_options_default();
      popts.seed = cfg.seed;
      popts.threads = cfg.threads;
      hr_ruin_result r{};
      check(hr_ruin_asymptotic(model, &problem, gtilde_of(cfg), formulas_of(cfg), &popts, &r),
            "asymptotic");
      auto j = ruin_json(r, cfg);
      inputs["piterbarg_argument"] = in.piterbarg_argument;
      j["asymptotic_inputs"] = inputs;
      results.push_back(j);
    } else if (s == HR_ASYMPTOTIC_INAPPLICABLE) {
      auto j = error_json("asymptotic", LibraryError(s, std::string("asymptotic: ") + hr_last_error()));
      j["asymptotic_inputs"] = inputs;
      results.push_back(j);
      if (!all) explicit_failure = true;
    } else {
      check(s, "asymptotic");
    }
  }
  return results;
}

int run_ruin(const Config& cfg) {
  Artifacts out(cfg.out);
  bool explicit_failure = false;
  ordered_json report;
  if (cfg.sweep_parameter.empty()) {
    Model m;
    build_model(cfg, m);
    report["results"] = ruin_methods(cfg, m.p, explicit_failure);
  } else {
    // Every sweep point reuses the master seed, so neighbouring points share
    // random numbers.
    ordered_json points = ordered_json::array();
    for (double v : cfg.sweep_values) {
      Config point = cfg;
      sweep_field(point, cfg.sweep_parameter) = v;
      Model m;
      build_model(point, m);
      points.push_back({{cfg.sweep_parameter, v}, {"results", ruin_methods(point, m.p, explicit_failure)}});
    }
    report["sweep"] = {{"parameter", cfg.sweep_parameter}, {"points", points}};
  }
  out.json("ruin.json", report);
  out.manifest("ruin", cfg);
  if (explicit_failure) {
    std::cerr << "error: asymptotic method inapplicable for these parameters (see ruin.json)\n";
    return 3;
  }
  return 0;
}

std::vector<double> range(double from, double to, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  // snap to 12 decimals so 0.05 * 3 prints as 0.15
  for (long i = 0; i <= n; ++i) v.push_back(std::round((from + static_cast<double>(i) * step) * 1e12) / 1e12);
  return v;
}

// Default parameter sets per figure; the config supplies overrides for anything it sets.
int run_figures(const Config& base, const std::string& which) {
  static const std::set<std::string> known = {"fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b", "all"};
  if (!known.count(which)) throw ConfigError("--which: unknown figure '" + which + "'");
  auto wanted = [&](const char* f) { return which == "all" || which == f; };
  Artifacts out(base.out);
  const auto times = range(0.0, base.horizon, base.horizon / 20.0);

  auto ruin_point = [&](const Config& c) {
    Model m;
    build_model(c, m);
    const hr_ruin_problem problem{c.u, c.c, c.horizon};
    const auto opts = mc_options(c);
    hr_ruin_result r{};
    check(hr_ruin_gaussian(m.p, &problem, &opts, &r), "figures");
    return r;
  };
  auto var_point = [&](const Config& c, double t) {
    Model m;
    build_model(c, m);
    double v = 0.0;
    check(hr_var_G(m.p, t, c.volterra_step, formulas_of(c), &v), "figures");
    return v;
  };
  Config exp_claims = base;
  exp_claims.kernel = "exponential";
  Config gamma_claims = exp_claims;
  gamma_claims.claims = "gamma";

  const auto alphas = range(0.05, 0.45, 0.05);
  const auto lambdas = range(0.5, 3.0, 0.25);
  const auto shapes = range(0.5, 3.0, 0.25);

  if (wanted("fig1a")) {
    std::vector<std::vector<double>> rows;
    for (double a : alphas) {
      Config c = exp_claims;
      c.alpha = a;
      const auto r = ruin_point(c);
      rows.push_back({a, r.p_hat, r.std_err});
    }
    out.csv("fig1a.csv", {"alpha", "p_hat", "std_err"}, rows);
  }
  if (wanted("fig1b")) {
    std::vector<std::vector<double>> rows;
    for (double a : alphas) {
      Config c = exp_claims;
      c.alpha = a;
      for (double t : times) rows.push_back({a, t, var_point(c, t)});
    }
    out.csv("fig1b.csv", {"alpha", "t", "var_G"}, rows);
  }
  if (wanted("fig2a")) {
    std::vector<std::vector<double>> rows;
    for (double l : lambdas) {
      Config c = exp_claims;
      c.claim_rate = l;
      const auto r = ruin_point(c);
      rows.push_back({l, r.p_hat, r.std_err});
    }
    out.csv("fig2a.csv", {"lambda", "p_hat", "std_err"}, rows);
  }
  if (wanted("fig2b")) {
    std::vector<std::vector<double>> rows;
    for (double l : lambdas) {
      Config c = exp_claims;
      c.claim_rate = l;
      for (double t : times) rows.push_back({l, t, var_point(c, t)});
    }
    out.csv("fig2b.csv", {"lambda", "t", "var_G"}, rows);
  }
  if (wanted("fig3a")) {
    std::vector<std::vector<double>> rows;
    for (double a : shapes) {
      Config c = gamma_claims;
      c.shape = a;
      const auto r = ruin_point(c);
      rows.push_back({a, r.p_hat, r.std_err});
    }
    out.csv("fig3a.csv", {"a", "p_hat", "std_err"}, rows);
  }
  if (wanted("fig3b")) {
    std::vector<std::vector<double>> rows;
    for (double a : shapes) {
      Config c = gamma_claims;
      c.shape = a;
      for (double t : times) rows.push_back({a, t, var_point(c, t)});
    }
    out.csv("fig3b.csv", {"a", "t", "var_G"}, rows);
  }
  out.manifest("figures --which " + which, base);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hawkes-driven risk model: moments, simulation, Gaussian limit and ruin"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(hr_version()));

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  std::optional<double> mu, grid_step;
  std::optional<std::size_t> paths;
  std::string which = "all";
  bool gate = false;
  std::size_t gate_paths = 100000;

  auto* moments = app.add_subcommand("moments", "Integral-equation and closed-form moment tables");
  moments->add_option("--mu", mu, "Baseline intensity");
  moments->add_flag("--gate", gate, "Also run the Monte Carlo gate of the closed forms");
  moments->add_option("--paths", paths, "Paths for --gate");

  auto* simulate = app.add_subcommand("simulate", "Simulate compound Hawkes paths to CSV");
  simulate->add_option("--mu", mu, "Baseline intensity");
  simulate->add_option("--paths", paths, "Number of paths");
  simulate->add_option("--grid-step", grid_step, "Grid step of the scaled paths");

  auto* fclt = app.add_subcommand("fclt-check", "Empirical check of the Gaussian limit");
  fclt->add_option("--mu", mu, "Baseline intensity");
  fclt->add_option("--paths", paths, "Number of paths");
  fclt->add_option("--grid-step", grid_step, "Covariance grid step");

  auto* cov = app.add_subcommand("covariance", "Covariance matrix of the Gaussian limit");
  cov->add_option("--grid-step", grid_step, "Grid step");

  auto* ruin = app.add_subcommand("ruin", "Finite-horizon ruin probability");
  ruin->add_option("--mu", mu, "Baseline intensity of the direct method");
  ruin->add_option("--paths", paths, "Monte Carlo paths");
  ruin->add_option("--grid-step", grid_step, "Monitoring grid step");

  auto* figures = app.add_subcommand("figures", "Figure data sweeps");
  figures->add_option("--which", which, "fig1a, fig1b, fig2a, fig2b, fig3a, fig3b or all");
  figures->add_option("--paths", paths, "Monte Carlo paths per sweep point");
  figures->add_option("--grid-step", grid_step, "Monitoring grid step");

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = load_config(config_path);
    if (out_dir) cfg.out = *out_dir;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;

    if (moments->parsed()) {
      if (mu) cfg.sim_mu = *mu;
      if (paths) gate_paths = *paths;
      return run_moments(cfg, gate, gate_paths);
    }
    if (simulate->parsed()) {
      if (mu) cfg.sim_mu = *mu;
      if (paths) cfg.sim_paths = *paths;
      if (grid_step) cfg.sim_grid_step = *grid_step;
      return run_simulate(cfg);
    }
    if (fclt->parsed()) {
      if (mu) cfg.fclt_mu = *mu;
      if (paths) cfg.fclt_paths = *paths;
      if (grid_step) cfg.fclt_grid_step = *grid_step;
      return run_fclt(cfg);
    }
    if (cov->parsed()) {
      if (grid_step) cfg.fclt_grid_step = *grid_step;
      return run_covariance(cfg);
    }
    if (ruin->parsed()) {
      if (mu) cfg.direct_mu = *mu;
      if (paths) cfg.ruin_paths = *paths;
      if (grid_step) cfg.ruin_grid_step = *grid_step;
      return run_ruin(cfg);
    }
    if (figures->parsed()) {
      if (paths) cfg.ruin_paths = *paths;
      if (grid_step) cfg.ruin_grid_step = *grid_step;
      return run_figures(cfg, which);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const LibraryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
