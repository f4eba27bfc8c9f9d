#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

#include "calsep/experiment.hpp"
#include "calsep/log.hpp"
#include "calsep/matrix_io.hpp"
#include "calsep/metrics.hpp"
#include "calsep/synth.hpp"

namespace fs = std::filesystem;
using namespace calsep;

namespace {

int cmd_gen(long l, long h, std::uint64_t seed, const std::string& out) {
  const fs::path dir(out);
  fs::create_directories(dir);
  const GroundTruth gt = gen_instance(l, h, seed);
  write_matrix_csv(dir / "sigma_l.csv", gt.cov.sigma_l().matrix());
  write_matrix_csv(dir / "sigma_h.csv", gt.cov.sigma_h().matrix());
  write_matrix_csv(dir / "v_star.csv", gt.v_star.matrix());
  write_matrix_csv(dir / "b_star.csv", gt.b_star);
  std::cout << "wrote instance (l=" << l << ", h=" << h << ", seed=" << seed << ") to "
            << dir.string() << "\n";
  return 0;
}

int cmd_run(const std::string& config, const std::string& out, int jobs,
            std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load_experiment_config(config);
  if (seed) cfg.seed = *seed;
  if (!out.empty()) cfg.output = out;
  if (cfg.output.empty()) throw PreconditionError("no output path: set output or pass --out");
  const ExperimentResult res = run_experiment(cfg, jobs);
  const fs::path csv(cfg.output);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  write_rows_csv(csv, res.rows);
  write_meta_json(fs::path(cfg.output + ".meta.json"), cfg, res);
  std::cout << "method " << to_string(cfg.method) << " l=" << cfg.l << " h=" << cfg.h << " prior "
            << prior_mode_label(cfg) << "\n"
            << "instances " << res.summary.instances << "  constructive "
            << res.summary.constructive_fraction << "  f1==1 " << res.summary.f1_one_fraction
            << "  median best KL " << res.summary.median_best_kl << "\n"
            << "rows written to " << csv.string() << "\n";
  return 0;
}

int cmd_check(const std::string& config) {
  const ExperimentConfig cfg = load_experiment_config(config);
  bool all_ok = true;
  for (int s = 0; s < cfg.n_instances; ++s) {
    const CovariancePair cov = instance_covariances(cfg, s);
    const SpectralReport rep = spectral_feasibility(cov);
    std::cout << "instance " << s << ": " << (rep.feasible ? "feasible" : "INFEASIBLE") << "\n";
    std::cout << "  lambda:";
    for (Eigen::Index i = 0; i < rep.lambda.size(); ++i) std::cout << ' ' << rep.lambda(i);
    std::cout << "\n  kappa:";
    for (Eigen::Index i = 0; i < rep.kappa.size(); ++i) std::cout << ' ' << rep.kappa(i);
    std::cout << "\n";
    for (const auto& v : rep.violations) {
      std::cout << "  violation at i=" << v.index + 1 << ": kappa=" << v.kappa << " not in ["
                << v.lower << ", " << v.upper << "]\n";
    }
    all_ok = all_ok && rep.feasible;
  }
  return all_ok ? 0 : 1;
}

int cmd_metrics(const std::string& v_hat, const std::string& v_star, const std::string& sigma_l,
                const std::string& sigma_h, double threshold) {
  const CovariancePair cov(read_matrix_csv(sigma_l), read_matrix_csv(sigma_h));
  const MetricsRecord m =
      evaluate(read_matrix_csv(v_hat), read_matrix_csv(v_star), cov, threshold);
  nlohmann::json j = {{"constructive", m.constructive},
                      {"constr_score", m.constr_score},
                      {"kl", m.kl_value ? nlohmann::json(*m.kl_value) : nlohmann::json()},
                      {"frob_abs_dist", m.frob_abs_dist},
                      {"f1", m.f1},
                      {"tpr", m.tpr},
                      {"fdr", m.fdr},
                      {"threshold", threshold}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear causal abstraction learning on the Stiefel manifold"};
  app.require_subcommand(1);

  long l = 12, h = 2;
  std::uint64_t seed = 0;
  std::string out, config;
  int jobs = 1;

  auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
  gen->set_help_flag("--help", "Print this help message and exit");
  gen->add_option("--l", l, "low-level dimension")->required();
  gen->add_option("--h", h, "high-level dimension")->required();
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out, "output directory")->required();

  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "run a benchmark sweep");
  run->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "CSV output path (overrides config)");
  run->add_option("--jobs", jobs, "parallel workers")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_seed, "master seed (overrides config)");

  auto* check = app.add_subcommand("check", "spectral existence preflight");
  check->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);

  std::string v_hat, v_star, sigma_l, sigma_h;
  double threshold = kDefaultSupportThreshold;
  auto* metrics = app.add_subcommand("metrics", "score a learned map against ground truth");
  metrics->add_option("--v-hat", v_hat, "learned map CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--v-star", v_star, "true map CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--sigma-l", sigma_l, "low-level covariance CSV")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--sigma-h", sigma_h, "high-level covariance CSV")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--threshold", threshold, "support threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    init_logging();
    if (*gen) return cmd_gen(l, h, seed, out);
    if (*run) return cmd_run(config, out, jobs, run_seed);
    if (*check) return cmd_check(config);
    if (*metrics) return cmd_metrics(v_hat, v_star, sigma_l, sigma_h, threshold);
  } catch (const calsep::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
