#include "calsep/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "calsep/log.hpp"
#include "calsep/matrix_io.hpp"
#include "calsep/metrics.hpp"
#include "calsep/synth.hpp"

namespace calsep {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInstanceTag = 0xFFFFFFFFULL;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ParseError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ParseError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_smooth(const json& j, SmoothSolverConfig& c) {
  check_keys(j, "admm.inner",
             {"max_iters", "grad_tol", "armijo_shrink", "armijo_slope", "retraction", "direction",
              "max_halvings"});
  read(j, "max_iters", c.max_iters);
  read(j, "grad_tol", c.grad_tol);
  read(j, "armijo_shrink", c.armijo_shrink);
  read(j, "armijo_slope", c.armijo_slope);
  read(j, "max_halvings", c.max_halvings);
  if (j.contains("retraction")) c.retraction = parse_retraction(j.at("retraction").get<std::string>());
  if (j.contains("direction")) {
    const auto d = j.at("direction").get<std::string>();
    if (d == "cg") c.direction = Direction::cg;
    else if (d == "steepest") c.direction = Direction::steepest;
    else throw ParseError("direction must be cg or steepest");
  }
}

json smooth_json(const SmoothSolverConfig& c) {
  return {{"max_iters", c.max_iters},
          {"grad_tol", c.grad_tol},
          {"armijo_shrink", c.armijo_shrink},
          {"armijo_slope", c.armijo_slope},
          {"retraction", std::string(to_string(c.retraction))},
          {"direction", c.direction == Direction::cg ? "cg" : "steepest"},
          {"max_halvings", c.max_halvings}};
}

void read_admm(const json& j, AdmmConfig& c) {
  check_keys(j, "admm", {"rho", "lambda", "tau_abs", "tau_rel", "max_outer_iters", "inner"});
  read(j, "rho", c.rho);
  read(j, "lambda", c.lambda);
  read(j, "tau_abs", c.tau_abs);
  read(j, "tau_rel", c.tau_rel);
  read(j, "max_outer_iters", c.max_outer_iters);
  if (j.contains("inner")) read_smooth(j.at("inner"), c.inner);
}

json admm_json(const AdmmConfig& c) {
  return {{"rho", c.rho},         {"lambda", c.lambda},
          {"tau_abs", c.tau_abs}, {"tau_rel", c.tau_rel},
          {"max_outer_iters", c.max_outer_iters}, {"inner", smooth_json(c.inner)}};
}

void read_newton(const json& j, NewtonConfig& c) {
  check_keys(j, "pg.newton",
             {"tau", "gamma", "phi1", "phi2", "psi1", "psi2", "omega", "delta", "alpha0",
              "alpha_bar", "max_newton_iters", "tol_factor"});
  read(j, "tau", c.tau);
  read(j, "gamma", c.gamma);
  read(j, "phi1", c.phi1);
  read(j, "phi2", c.phi2);
  read(j, "psi1", c.psi1);
  read(j, "psi2", c.psi2);
  read(j, "omega", c.omega);
  read(j, "delta", c.delta);
  read(j, "alpha0", c.alpha0);
  read(j, "alpha_bar", c.alpha_bar);
  read(j, "max_newton_iters", c.max_newton_iters);
  read(j, "tol_factor", c.tol_factor);
}

json newton_json(const NewtonConfig& c) {
  return {{"tau", c.tau},           {"gamma", c.gamma},   {"phi1", c.phi1},
          {"phi2", c.phi2},         {"psi1", c.psi1},     {"psi2", c.psi2},
          {"omega", c.omega},       {"delta", c.delta},   {"alpha0", c.alpha0},
          {"alpha_bar", c.alpha_bar}, {"max_newton_iters", c.max_newton_iters},
          {"tol_factor", c.tol_factor}};
}

void read_pg(const json& j, PgConfig& c) {
  check_keys(j, "pg",
             {"lambda", "rho", "armijo_shrink", "kl_tol", "max_outer", "step_floor", "newton"});
  read(j, "lambda", c.lambda);
  read(j, "rho", c.rho);
  read(j, "armijo_shrink", c.armijo_shrink);
  read(j, "kl_tol", c.kl_tol);
  read(j, "max_outer", c.max_outer);
  read(j, "step_floor", c.step_floor);
  if (j.contains("newton")) read_newton(j.at("newton"), c.newton);
}

json pg_json(const PgConfig& c) {
  return {{"lambda", c.lambda},         {"rho", c.rho},
          {"armijo_shrink", c.armijo_shrink}, {"kl_tol", c.kl_tol},
          {"max_outer", c.max_outer},   {"step_floor", c.step_floor},
          {"newton", newton_json(c.newton)}};
}

void read_clin(const json& j, const std::string& where, CLinConfig& c) {
  check_keys(j, where,
             {"rho", "tau_sca", "eps_step", "tau_inner", "tau_abs", "tau_rel", "max_outer",
              "max_sca_iters", "refit"});
  read(j, "rho", c.rho);
  read(j, "tau_sca", c.tau_sca);
  read(j, "eps_step", c.eps_step);
  read(j, "tau_inner", c.tau_inner);
  read(j, "tau_abs", c.tau_abs);
  read(j, "tau_rel", c.tau_rel);
  read(j, "max_outer", c.max_outer);
  read(j, "max_sca_iters", c.max_sca_iters);
  read(j, "refit", c.refit);
}

json clin_json(const CLinConfig& c) {
  return {{"rho", c.rho},         {"tau_sca", c.tau_sca},   {"eps_step", c.eps_step},
          {"tau_inner", c.tau_inner}, {"tau_abs", c.tau_abs}, {"tau_rel", c.tau_rel},
          {"max_outer", c.max_outer}, {"max_sca_iters", c.max_sca_iters},
          {"refit", c.refit}};
}

struct Instance {
  CovariancePair cov;
  PriorMask mask;
  std::optional<Matrix> v_star;
};

Instance make_instance(const ExperimentConfig& cfg, int sim_id) {
  if (!cfg.sigma_l_path.empty()) {
    CovariancePair cov(read_matrix_csv(cfg.sigma_l_path), read_matrix_csv(cfg.sigma_h_path));
    Matrix b = cfg.b_path.empty() ? Matrix::Ones(cov.l(), cov.h()) : read_matrix_csv(cfg.b_path);
    std::optional<Matrix> vs;
    if (!cfg.v_star_path.empty()) vs = read_matrix_csv(cfg.v_star_path);
    return {std::move(cov), PriorMask(b), std::move(vs)};
  }
  const std::uint64_t inst_seed =
      derive_seed(cfg.seed, static_cast<std::uint64_t>(sim_id), kInstanceTag);
  GroundTruth gt = gen_instance(cfg.l, cfg.h, inst_seed);
  PriorMask mask = cfg.prior_mode == "full"
                       ? PriorMask(gt.b_star)
                       : degrade_prior(gt.b_star, cfg.prior_fraction, derive_seed(inst_seed, 3, 0));
  CovariancePair cov = gt.cov;
  if (cfg.n_samples > 0) cov = sample_and_estimate(gt.cov, cfg.n_samples, derive_seed(inst_seed, 4, 0));
  return {std::move(cov), std::move(mask), gt.v_star.matrix()};
}

SolverOutcome run_method(const ExperimentConfig& cfg, const Instance& inst, std::uint64_t seed) {
  const Eigen::Index l = inst.cov.l();
  const Eigen::Index h = inst.cov.h();
  switch (cfg.method) {
    case Method::linsepal_admm:
      return admm_solve(inst.cov, inst.mask, cfg.admm, random_point(l, h, seed));
    case Method::linsepal_pg:
      return pg_solve(inst.cov, inst.mask, cfg.pg, random_point(l, h, seed));
    case Method::clinsepal:
      return clin_solve(inst.cov, inst.mask, cfg.clin, clin_random_init(l, h, seed));
    case Method::clinsepal_full:
      return clin_solve_full_prior(inst.cov, inst.mask, cfg.clin_full,
                                   clin_random_init(l, h, seed).v0);
  }
  throw PreconditionError("unknown method");
}

RunRow run_one(const ExperimentConfig& cfg, const Instance& inst, int sim_id, int restart_id) {
  RunRow row;
  row.sim_id = sim_id;
  row.restart_id = restart_id;
  row.method = to_string(cfg.method);
  row.l = inst.cov.l();
  row.h = inst.cov.h();
  row.prior_mode = prior_mode_label(cfg);
  row.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(sim_id),
                         static_cast<std::uint64_t>(restart_id));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SolverOutcome out = run_method(cfg, inst, row.seed);
    row.iters = out.iters;
    row.converged = out.converged;
    const Matrix sup = support_of(out.v_hat, cfg.threshold);
    if (inst.v_star) {
      const MetricsRecord m = evaluate(out.v_hat, *inst.v_star, inst.cov, cfg.threshold);
      row.constructive = m.constructive;
      row.kl = m.kl_value.value_or(nan);
      row.frob_abs_dist = m.frob_abs_dist;
      row.f1 = m.f1;
    } else {
      row.constructive = constructiveness_score(sup) == 1.0;
      try {
        row.kl = kl_of_matrix(inst.cov, out.v_hat);
      } catch (const DomainError&) {
        row.kl = nan;
      }
      row.frob_abs_dist = nan;
      row.f1 = nan;
    }
  } catch (const Error& e) {
    row.error = e.what();
    row.kl = nan;
    row.frob_abs_dist = nan;
    row.f1 = nan;
    log_error("sim " + std::to_string(sim_id) + " restart " + std::to_string(restart_id) + ": " +
              e.what());
  }
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "linsepal-admm") return Method::linsepal_admm;
  if (name == "linsepal-pg") return Method::linsepal_pg;
  if (name == "clinsepal") return Method::clinsepal;
  if (name == "clinsepal-full") return Method::clinsepal_full;
  throw ParseError("unknown method '" + name + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::linsepal_admm: return "linsepal-admm";
    case Method::linsepal_pg: return "linsepal-pg";
    case Method::clinsepal: return "clinsepal";
    case Method::clinsepal_full: return "clinsepal-full";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (n_instances < 1 || n_restarts < 1) throw PreconditionError("n_instances and n_restarts must be >= 1");
  if (prior_mode != "full" && prior_mode != "partial") {
    throw PreconditionError("prior_mode must be full or partial");
  }
  if (prior_mode == "partial" && !(prior_fraction > 0.0 && prior_fraction <= 1.0)) {
    throw PreconditionError("partial prior needs a fraction in (0, 1]");
  }
  if (!(threshold >= 0.0)) throw PreconditionError("threshold must be nonnegative");
  if (sigma_l_path.empty()) {
    if (h < 1 || l <= h) throw PreconditionError("need l > h >= 1");
  } else {
    if (sigma_h_path.empty()) throw PreconditionError("sigma_h_path is required with sigma_l_path");
    if (n_instances != 1) throw PreconditionError("external covariances allow one instance");
  }
  if (method == Method::clinsepal_full && prior_mode != "full") {
    throw PreconditionError("clinsepal-full needs prior_mode full");
  }
  admm.validate();
  pg.validate();
  clin.validate();
  clin_full.validate();
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"method", "l", "h", "n_instances", "n_restarts", "prior_mode", "prior_fraction",
              "seed", "output", "n_samples", "threshold", "sigma_l_path", "sigma_h_path",
              "b_path", "v_star_path", "admm", "pg", "clinsepal", "clinsepal_full"});
  ExperimentConfig c;
  if (!j.contains("method")) throw ParseError("config needs a method");
  c.method = parse_method(j.at("method").get<std::string>());
  read(j, "l", c.l);
  read(j, "h", c.h);
  read(j, "n_instances", c.n_instances);
  read(j, "n_restarts", c.n_restarts);
  read(j, "prior_mode", c.prior_mode);
  read(j, "prior_fraction", c.prior_fraction);
  read(j, "seed", c.seed);
  read(j, "output", c.output);
  read(j, "n_samples", c.n_samples);
  read(j, "threshold", c.threshold);
  read(j, "sigma_l_path", c.sigma_l_path);
  read(j, "sigma_h_path", c.sigma_h_path);
  read(j, "b_path", c.b_path);
  read(j, "v_star_path", c.v_star_path);
  if (j.contains("admm")) read_admm(j.at("admm"), c.admm);
  if (j.contains("pg")) read_pg(j.at("pg"), c.pg);
  if (j.contains("clinsepal")) read_clin(j.at("clinsepal"), "clinsepal", c.clin);
  if (j.contains("clinsepal_full")) read_clin(j.at("clinsepal_full"), "clinsepal_full", c.clin_full);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  ExperimentConfig c = parse_experiment_config(ss.str());
  const auto base = path.parent_path();
  for (std::string* p : {&c.sigma_l_path, &c.sigma_h_path, &c.b_path, &c.v_star_path}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j = {{"method", to_string(c.method)},
            {"l", c.l},
            {"h", c.h},
            {"n_instances", c.n_instances},
            {"n_restarts", c.n_restarts},
            {"prior_mode", c.prior_mode},
            {"prior_fraction", c.prior_fraction},
            {"seed", c.seed},
            {"output", c.output},
            {"n_samples", c.n_samples},
            {"threshold", c.threshold},
            {"sigma_l_path", c.sigma_l_path},
            {"sigma_h_path", c.sigma_h_path},
            {"b_path", c.b_path},
            {"v_star_path", c.v_star_path},
            {"admm", admm_json(c.admm)},
            {"pg", pg_json(c.pg)},
            {"clinsepal", clin_json(c.clin)},
            {"clinsepal_full", clin_json(c.clin_full)}};
  return j.dump(2);
}

CovariancePair instance_covariances(const ExperimentConfig& cfg, int sim_id) {
  return make_instance(cfg, sim_id).cov;
}

std::string prior_mode_label(const ExperimentConfig& cfg) {
  if (cfg.prior_mode == "full") return "full";
  return "partial(" + format_double(cfg.prior_fraction) + ")";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  if (jobs < 1) throw PreconditionError("jobs must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<Instance> instances;
  instances.reserve(static_cast<std::size_t>(cfg.n_instances));
  for (int s = 0; s < cfg.n_instances; ++s) instances.push_back(make_instance(cfg, s));

  const std::size_t total = static_cast<std::size_t>(cfg.n_instances) *
                            static_cast<std::size_t>(cfg.n_restarts);
  std::vector<RunRow> rows(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const int s = static_cast<int>(k / static_cast<std::size_t>(cfg.n_restarts));
      const int r = static_cast<int>(k % static_cast<std::size_t>(cfg.n_restarts));
      rows[k] = run_one(cfg, instances[static_cast<std::size_t>(s)], s, r);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int s = 0; s < cfg.n_instances; ++s) {
    RunRow* best = nullptr;
    for (int r = 0; r < cfg.n_restarts; ++r) {
      RunRow& row = rows[static_cast<std::size_t>(s * cfg.n_restarts + r)];
      if (std::isnan(row.kl)) continue;
      if (!best || row.kl < best->kl) best = &row;
    }
    if (best) best->best = true;
  }

  ExperimentResult res;
  res.rows = std::move(rows);
  res.summary = summarize(res.rows);
  res.summary.instances = cfg.n_instances;
  res.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

ExperimentSummary summarize(const std::vector<RunRow>& rows) {
  ExperimentSummary sum;
  std::vector<double> kls;
  int constructive = 0;
  int f1_one = 0;
  std::set<int> sims;
  for (const RunRow& r : rows) {
    sims.insert(r.sim_id);
    if (!r.best) continue;
    kls.push_back(r.kl);
    constructive += r.constructive ? 1 : 0;
    f1_one += r.f1 == 1.0 ? 1 : 0;
  }
  sum.instances = static_cast<int>(sims.size());
  if (sum.instances == 0) return sum;
  sum.constructive_fraction = static_cast<double>(constructive) / sum.instances;
  sum.f1_one_fraction = static_cast<double>(f1_one) / sum.instances;
  if (kls.empty()) {
    sum.median_best_kl = sum.max_best_kl = std::numeric_limits<double>::quiet_NaN();
    return sum;
  }
  std::sort(kls.begin(), kls.end());
  const std::size_t n = kls.size();
  sum.median_best_kl = n % 2 ? kls[n / 2] : 0.5 * (kls[n / 2 - 1] + kls[n / 2]);
  sum.max_best_kl = kls.back();
  return sum;
}

std::string csv_header() {
  return "sim_id,restart_id,method,l,h,prior_mode,constructive,kl,frob_abs_dist,f1,iters,"
         "converged,wall_ms,seed,best";
}

std::string format_row(const RunRow& r) {
  std::ostringstream os;
  os << r.sim_id << ',' << r.restart_id << ',' << r.method << ',' << r.l << ',' << r.h << ','
     << r.prior_mode << ',' << (r.constructive ? 1 : 0) << ',' << format_double(r.kl) << ','
     << format_double(r.frob_abs_dist) << ',' << format_double(r.f1) << ',' << r.iters << ','
     << (r.converged ? 1 : 0) << ',' << format_double(r.wall_ms) << ',' << r.seed << ','
     << (r.best ? 1 : 0);
  return os.str();
}

void write_rows_csv(const std::filesystem::path& path, const std::vector<RunRow>& rows) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open " + path.string() + " for writing");
  os << csv_header() << '\n';
  for (const RunRow& r : rows) os << format_row(r) << '\n';
  if (!os) throw ParseError("failed writing " + path.string());
}

void write_meta_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                     const ExperimentResult& result) {
  json errors = json::array();
  for (const RunRow& r : result.rows) {
    if (!r.error.empty()) {
      errors.push_back({{"sim_id", r.sim_id}, {"restart_id", r.restart_id}, {"error", r.error}});
    }
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json j = {{"version", kVersion},
            {"finished_utc", stamp},
            {"wall_ms", result.wall_ms},
            {"kl_includes_constant", true},
            {"support_threshold", cfg.threshold},
            {"resolved_pg_rho_rule", cfg.pg.rho > 0 ? "fixed" : "1/(2*||sigma_l||_F^2)"},
            {"config", json::parse(config_to_json(cfg))},
            {"summary",
             {{"instances", result.summary.instances},
              {"constructive_fraction", result.summary.constructive_fraction},
              {"f1_one_fraction", result.summary.f1_one_fraction},
              {"median_best_kl", result.summary.median_best_kl},
              {"max_best_kl", result.summary.max_best_kl}}},
            {"errors", errors}};
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

}  // namespace calsep
