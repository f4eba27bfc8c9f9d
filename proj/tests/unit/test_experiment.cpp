#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "calsep/errors.hpp"
#include "calsep/experiment.hpp"
#include "calsep/matrix_io.hpp"
#include "calsep/synth.hpp"

using namespace calsep;

namespace {

// Every column of a CSV row except wall_ms (index 12).
std::string without_wall(const std::string& row) {
  std::stringstream in(row);
  std::string cell, out;
  for (int k = 0; std::getline(in, cell, ','); ++k)
    if (k != 12) out += cell + ',';
  return out;
}

std::vector<std::string> numeric_rows(const ExperimentResult& r) {
  std::vector<std::string> out;
  for (const auto& row : r.rows) out.push_back(without_wall(format_row(row)));
  return out;
}

}  // namespace

TEST(Config, ParsesAndRejectsUnknownKeys) {
  const auto cfg = parse_experiment_config(
      R"({"method":"clinsepal","l":4,"h":2,"prior_mode":"partial","prior_fraction":0.5,)"
      R"("seed":3,"clinsepal":{"refit":false,"rho":2.0},"pg":{"rho":0.25}})");
  EXPECT_EQ(cfg.method, Method::clinsepal);
  EXPECT_EQ(cfg.prior_fraction, 0.5);
  EXPECT_FALSE(cfg.clin.refit);
  EXPECT_EQ(cfg.clin.rho, 2.0);
  EXPECT_EQ(cfg.pg.rho, 0.25);
  EXPECT_EQ(cfg.clin_full.eps_step, CLinConfig::full_defaults().eps_step);

  EXPECT_THROW(parse_experiment_config(R"({"method":"clinsepal","lr":1})"), ParseError);
  EXPECT_THROW(parse_experiment_config(R"({"method":"clinsepal","pg":{"bogus":1}})"), ParseError);
  EXPECT_THROW(parse_experiment_config(R"({"method":"nope"})"), ParseError);
  EXPECT_THROW(parse_experiment_config("{not json"), ParseError);
  EXPECT_THROW(parse_experiment_config(R"({"l":4})"), ParseError);
}

TEST(Config, ValidateRejectsBadCombinations) {
  EXPECT_ANY_THROW(parse_experiment_config(R"({"method":"clinsepal","l":2,"h":2})"));
  EXPECT_ANY_THROW(parse_experiment_config(
      R"({"method":"clinsepal-full","prior_mode":"partial","prior_fraction":0.5})"));
  EXPECT_ANY_THROW(parse_experiment_config(R"({"method":"clinsepal","prior_mode":"partial"})"));
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.method = Method::linsepal_pg;
  cfg.l = 9;
  cfg.h = 3;
  cfg.seed = 12345678901234ULL;
  cfg.pg.rho = 0.125;
  cfg.clin.refit = false;
  const auto back = parse_experiment_config(config_to_json(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
  EXPECT_EQ(back.seed, cfg.seed);
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : {Method::linsepal_admm, Method::linsepal_pg, Method::clinsepal, Method::clinsepal_full}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
}

TEST(Summarize, BestRowsOnly) {
  std::vector<RunRow> rows(4);
  rows[0] = {.sim_id = 0, .constructive = true, .kl = 1e-3, .f1 = 1.0, .best = true};
  rows[1] = {.sim_id = 0, .constructive = false, .kl = 5.0, .f1 = 0.5, .best = false};
  rows[2] = {.sim_id = 1, .constructive = false, .kl = 3e-3, .f1 = 0.5, .best = true};
  rows[3] = {.sim_id = 2, .constructive = true, .kl = 2e-3, .f1 = 1.0, .best = true};
  const auto s = summarize(rows);
  EXPECT_EQ(s.instances, 3);
  EXPECT_DOUBLE_EQ(s.constructive_fraction, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.f1_one_fraction, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.median_best_kl, 2e-3);
  EXPECT_DOUBLE_EQ(s.max_best_kl, 3e-3);
}

TEST(Csv, HeaderMatchesRowWidth) {
  const auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  RunRow r;
  r.method = "clinsepal";
  r.prior_mode = "partial-0.5";
  r.kl = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(count(csv_header()), count(format_row(r)));
}

TEST(RunExperiment, DeterministicAcrossJobCounts) {
  ExperimentConfig cfg;
  cfg.method = Method::clinsepal;
  cfg.prior_mode = "partial";
  cfg.prior_fraction = 0.5;
  cfg.n_instances = 3;
  cfg.n_restarts = 2;
  cfg.seed = 21;
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 1);
  const auto c = run_experiment(cfg, 4);
  ASSERT_EQ(a.rows.size(), 6u);
  EXPECT_EQ(numeric_rows(a), numeric_rows(b));
  EXPECT_EQ(numeric_rows(a), numeric_rows(c));
  int best = 0;
  for (const auto& r : a.rows) best += r.best ? 1 : 0;
  EXPECT_EQ(best, 3);
}

TEST(RunExperiment, FullPriorSmallPreset) {
  ExperimentConfig cfg;
  cfg.method = Method::clinsepal_full;
  cfg.l = 12;
  cfg.h = 2;
  cfg.n_instances = 3;
  cfg.n_restarts = 2;
  cfg.seed = 5;
  const auto r = run_experiment(cfg, 1);
  EXPECT_EQ(r.summary.instances, 3);
  EXPECT_EQ(r.summary.constructive_fraction, 1.0);
  EXPECT_EQ(r.summary.f1_one_fraction, 1.0);
}

TEST(RunExperiment, ExternalCovariances) {
  const auto gt = gen_instance(5, 2, 4);
  const auto dir = std::filesystem::temp_directory_path() / "calsep_ext";
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "sl.csv", gt.cov.sigma_l().matrix());
  write_matrix_csv(dir / "sh.csv", gt.cov.sigma_h().matrix());
  write_matrix_csv(dir / "b.csv", gt.b_star);
  write_matrix_csv(dir / "v.csv", gt.v_star.matrix());
  ExperimentConfig cfg;
  cfg.method = Method::clinsepal_full;
  cfg.sigma_l_path = (dir / "sl.csv").string();
  cfg.sigma_h_path = (dir / "sh.csv").string();
  cfg.b_path = (dir / "b.csv").string();
  cfg.v_star_path = (dir / "v.csv").string();
  cfg.n_restarts = 2;
  const CovariancePair cov = instance_covariances(cfg, 0);
  EXPECT_EQ(cov.sigma_l().matrix(), gt.cov.sigma_l().matrix());
  const auto r = run_experiment(cfg, 1);
  EXPECT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.summary.constructive_fraction, 1.0);
  std::filesystem::remove_all(dir);
}

TEST(RunExperiment, WritesCsvAndMeta) {
  ExperimentConfig cfg;
  cfg.method = Method::linsepal_admm;
  cfg.l = 6;
  cfg.h = 2;
  cfg.seed = 2;
  const auto dir = std::filesystem::temp_directory_path() / "calsep_out";
  std::filesystem::create_directories(dir);
  const auto res = run_experiment(cfg, 1);
  write_rows_csv(dir / "rows.csv", res.rows);
  write_meta_json(dir / "rows.csv.meta.json", cfg, res);
  std::ifstream in(dir / "rows.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, csv_header());
  EXPECT_TRUE(std::filesystem::exists(dir / "rows.csv.meta.json"));
  std::filesystem::remove_all(dir);
}
