// Command-line harness: dataset generation, adversarial corruption,
// estimation, coupling verification, forced-error demonstrations, the regime
// table, and constant calibration.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "robustlr/adversary.hpp"
#include "robustlr/coupling.hpp"
#include "robustlr/dataset_io.hpp"
#include "robustlr/estimator.hpp"
#include "robustlr/harness.hpp"
#include "robustlr/model.hpp"
#include "robustlr/parallel.hpp"

namespace {

using namespace robustlr;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << content;
}

Eigen::VectorXd read_beta_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open beta file: " + path);
  std::vector<double> values;
  double v;
  while (is >> v) values.push_back(v);
  if (values.empty()) throw std::runtime_error("beta file is empty: " + path);
  Eigen::VectorXd beta(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) beta[static_cast<Eigen::Index>(i)] = values[i];
  return beta;
}

struct RegimeOptions {
  std::string regime = "big-eta";
  int d = 100;
  double b = 0.1, sigma = 1.0, r = 0.0;  // small-beta
  double s = 1.0;                        // big-eta / interm-eta scale
  double eps = 0.05;                     // interm-eta
  double B = 1.0, E = 0.01;              // small-eta
};

void add_regime_options(CLI::App* cmd, RegimeOptions& opt) {
  cmd->add_option("--regime", opt.regime, "one of small-beta|big-eta|interm-eta|small-eta")
      ->required();
  cmd->add_option("--d", opt.d, "dimension");
  cmd->add_option("--b", opt.b, "small-beta: coupled block norm");
  cmd->add_option("--sigma", opt.sigma, "additive noise level");
  cmd->add_option("--r", opt.r, "small-beta: shared first coefficient");
  cmd->add_option("--s", opt.s, "big-eta/interm-eta: coefficient scale");
  cmd->add_option("--eps", opt.eps, "interm-eta: flipped-half ratio");
  cmd->add_option("--B", opt.B, "small-eta: shared-half scale");
  cmd->add_option("--E", opt.E, "small-eta: flipped-half scale");
}

CouplingSpec make_spec(const RegimeOptions& opt) {
  if (opt.regime == "small-beta") return SmallBetaSpec{opt.d, opt.b, opt.sigma, opt.r};
  if (opt.regime == "big-eta") return BigEtaSpec{opt.d, opt.s, opt.sigma};
  if (opt.regime == "interm-eta") return IntermEtaSpec{opt.d, opt.s, opt.eps, opt.sigma};
  if (opt.regime == "small-eta") return SmallEtaSpec{opt.d, opt.B, opt.E, opt.sigma};
  throw CLI::ValidationError("--regime", "unknown regime: " + opt.regime);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear regression under adversarial coordinate-wise erasure/replacement"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::uint64_t seed = 1;
  std::string out_path;
  int trials = 10000;
  int threads = 0;  // 0 = hardware; ROBUSTLR_THREADS overrides either way
  app.add_option("--seed", seed, "root RNG seed")->capture_default_str();
  app.add_option("--out", out_path, "output file ('-' or empty = stdout)");
  app.add_option("--trials", trials, "Monte Carlo trials / runs")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  // generate
  auto* gen = app.add_subcommand("generate", "sample a clean dataset to JSON-lines");
  int gen_d = 10, gen_n = 1000;
  double gen_beta_norm = 1.0, gen_sigma = 1.0;
  std::string gen_beta_file;
  gen->add_option("--d", gen_d, "dimension");
  gen->add_option("--n", gen_n, "number of samples")->required();
  gen->add_option("--beta-norm", gen_beta_norm, "norm of beta = (b/sqrt(d)) 1");
  gen->add_option("--beta-file", gen_beta_file, "whitespace-separated coefficients (overrides --d/--beta-norm)");
  gen->add_option("--sigma", gen_sigma, "noise level");

  // corrupt
  auto* cor = app.add_subcommand("corrupt", "apply a named adversary to a clean dataset");
  std::string cor_data, cor_adversary = "erase";
  double cor_eta = 0.1;
  cor->add_option("--data", cor_data, "input JSON-lines dataset")->required();
  cor->add_option("--adversary", cor_adversary, "erase|sign-flip")->required();
  cor->add_option("--eta", cor_eta, "per-coordinate corruption fraction")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "run a named estimator on a dataset file");
  std::string est_alg, est_data;
  double est_eta = 0.0;
  est->add_option("--alg", est_alg, "a1|a2|a3|unified|ols")->required();
  est->add_option("--data", est_data, "input JSON-lines dataset")->required();
  est->add_option("--eta", est_eta, "claimed corruption fraction");

  // couple-verify
  auto* ver = app.add_subcommand("couple-verify", "marginal KS + disagreement budget suite");
  RegimeOptions ver_opt;
  add_regime_options(ver, ver_opt);
  int ver_n = 100000;
  std::optional<double> ver_premise_eta;
  ver->add_option("--n", ver_n, "draws for the marginal suite");
  ver->add_option("--premise-eta", ver_premise_eta,
                  "also check mean disagreements <= eta d (1 - c)");

  // forced-error
  auto* fe = app.add_subcommand("forced-error", "indistinguishability + forced-error demo");
  RegimeOptions fe_opt;
  add_regime_options(fe, fe_opt);
  double fe_eta = 0.45;
  int fe_n = 1000, fe_runs = 20;
  std::string fe_mode = "erase", fe_estimator = "all", fe_dump_pair;
  fe->add_option("--eta", fe_eta, "adversary budget fraction")->required();
  fe->add_option("--n", fe_n, "samples per run")->required();
  fe->add_option("--runs", fe_runs, "seeded adversary runs");
  fe->add_option("--mode", fe_mode, "erase|replace");
  fe->add_option("--estimator", fe_estimator, "a1|a2|a3|unified|ols|all");
  fe->add_option("--dump-pair", fe_dump_pair,
                 "also write one adversary run as <base>_{0,1}.jsonl + <base>_manifest.json");

  // regime-table
  auto* table = app.add_subcommand("regime-table", "grid sweep over the eta/beta regime tables");
  std::string table_config;
  table->add_option("--config", table_config, "experiment config JSON (default: frozen grid)");

  // calibrate
  app.add_subcommand("calibrate", "measure the unspecified absolute constants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  const int nthreads = resolve_thread_count(threads);
  try {
    if (gen->parsed()) {
      Eigen::VectorXd beta;
      if (!gen_beta_file.empty()) {
        beta = read_beta_file(gen_beta_file);
        gen_d = static_cast<int>(beta.size());
      } else {
        beta = Eigen::VectorXd::Constant(gen_d, gen_beta_norm / std::sqrt(double(gen_d)));
      }
      RngStream rng(seed);
      const RegressionInstance inst(gen_d, beta, gen_sigma);
      const auto data = sample_clean(inst, gen_n, rng);
      if (out_path.empty()) throw std::runtime_error("generate: --out is required");
      write_jsonl(out_path, data);
      return kExitPass;
    }
    if (cor->parsed()) {
      const auto data = to_labeled(read_jsonl(cor_data));
      RngStream rng(seed);
      std::vector<MaskedSample> masked;
      if (cor_adversary == "erase")
        masked = oblivious_erasure(data, cor_eta, rng);
      else if (cor_adversary == "sign-flip")
        masked = sign_flip_replacement(data, cor_eta, rng);
      else
        throw std::runtime_error("corrupt: unknown adversary " + cor_adversary);
      if (out_path.empty()) throw std::runtime_error("corrupt: --out is required");
      write_jsonl(out_path, masked);
      return kExitPass;
    }
    if (est->parsed()) {
      const auto data = read_jsonl(est_data);
      const EstimatorOutput out = run_named_estimator(est_alg, data, est_eta);
      write_output(out_path, to_json_string(out));
      return kExitPass;
    }
    if (ver->parsed()) {
      CouplingVerificationConfig cfg;
      cfg.specs = {make_spec(ver_opt)};
      cfg.n_marginal = ver_n;
      cfg.budget_trials = trials;
      cfg.premise_eta = ver_premise_eta;
      cfg.seed = seed;
      cfg.threads = nthreads;
      const auto result = run_coupling_verification(cfg);
      write_output(out_path, to_json_string(result));
      return result.pass ? kExitPass : kExitCheckFailed;
    }
    if (fe->parsed()) {
      ForcedErrorConfig cfg;
      cfg.spec = make_spec(fe_opt);
      cfg.eta = fe_eta;
      cfg.n = fe_n;
      cfg.runs = fe_runs;
      if (fe_estimator != "all") cfg.estimators = {fe_estimator};
      if (fe_mode == "replace")
        cfg.mode = CorruptionMode::Replace;
      else if (fe_mode != "erase")
        throw std::runtime_error("forced-error: unknown mode " + fe_mode);
      cfg.seed = seed;
      cfg.threads = nthreads;
      if (!fe_dump_pair.empty()) {
        RngStream rng(seed);
        const AdversaryConfig acfg{cfg.eta, 0.1, cfg.mode};
        write_paired_dataset(coupling_adversary(cfg.spec, cfg.n, acfg, rng), fe_dump_pair,
                             cfg.eta, seed);
      }
      const auto result = run_forced_error_demo(cfg);
      write_output(out_path, to_json_string(result));
      return result.pass ? kExitPass : kExitCheckFailed;
    }
    if (table->parsed()) {
      ExperimentConfig cfg;
      if (table_config.empty()) {
        cfg = default_regime_grid();
      } else {
        std::ifstream is(table_config);
        if (!is) throw std::runtime_error("cannot open config: " + table_config);
        const std::string text((std::istreambuf_iterator<char>(is)),
                               std::istreambuf_iterator<char>());
        cfg = parse_experiment_config(text);
      }
      cfg.seed = seed;
      cfg.threads = nthreads;
      const auto report = run_regime_table(cfg);
      write_output(out_path, results_to_csv(report.records));
      std::cerr << (report.pass ? "regime-table checks: pass\n" : "regime-table checks: FAIL\n");
      return report.pass ? kExitPass : kExitCheckFailed;
    }
    if (app.get_subcommand("calibrate")->parsed()) {
      write_output(out_path, run_calibration(seed, nthreads));
      return kExitPass;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}
