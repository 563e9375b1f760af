// sfpca: simulate / fit / deflate / bench front-end over the core library.
//
// Exit codes: 0 success, 2 usage or input parse failure, 3 fit finished
// without converging (outputs are still written), 4 numeric failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfpca/csv.hpp"
#include "sfpca/deflation.hpp"
#include "sfpca/man_sfpca.hpp"
#include "sfpca/rank1.hpp"
#include "sfpca/simbench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitNumeric = 4;

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sfpca::parse_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw sfpca::parse_error(path.string() + ": write failed");
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw sfpca::parse_error(out + ": cannot create output directory");
  return dir;
}

sfpca::SmootherPtr make_smoother(int dim, double alpha, int order) {
  if (alpha == 0.0) return sfpca::SmoothingOperator::identity(dim);
  return sfpca::SmoothingOperator::build(sfpca::build_difference_penalty(dim, order),
                                         alpha);
}

struct SimulateOpts {
  int scenario = 1;
  std::uint64_t seed = 0;
  std::string out = ".";
  int overlap_shift = -1;  // -1 = scenario default
};

int cmd_simulate(const SimulateOpts& opt) {
  sfpca::ScenarioSpec spec = sfpca::ScenarioSpec::scenario(opt.scenario, opt.seed);
  if (opt.overlap_shift >= 0) spec.overlap_shift = opt.overlap_shift;
  const sfpca::GroundTruth truth = sfpca::generate_scenario(spec);

  const fs::path dir = prepare_out_dir(opt.out);
  sfpca::write_matrix_csv((dir / "x.csv").string(), truth.x_noisy);
  sfpca::write_matrix_csv((dir / "u_star.csv").string(), truth.u_star);
  sfpca::write_matrix_csv((dir / "v_star.csv").string(), truth.v_star);
  sfpca::write_matrix_csv((dir / "d_star.csv").string(), truth.d_star);

  ordered_json meta;
  meta["schema_version"] = 1;
  meta["scenario"] = spec.id;
  meta["n"] = spec.n;
  meta["p"] = spec.p;
  meta["k"] = spec.k;
  meta["seed"] = spec.seed;
  meta["target_snr"] = spec.target_snr;
  meta["snr_realized"] = truth.snr_realized;
  meta["gram_deviation_u"] = truth.gram_dev_u;
  meta["gram_deviation_v"] = truth.gram_dev_v;
  meta["overlap_shift"] = truth.overlap_shift_used;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  return kExitOk;
}

struct FitOpts {
  std::string input;
  std::string method = "madmm";
  std::string deflation = "none";
  bool deflation_given = false;
  int rank = 1;
  double lambda_u = 0.0, lambda_v = 0.0;
  double alpha_u = 0.0, alpha_v = 0.0;
  int penalty_order = 2;
  bool tune = false;
  std::string out = ".";
};

sfpca::SchemeKind parse_scheme(const std::string& name) {
  if (name == "hotelling") return sfpca::SchemeKind::hotelling;
  if (name == "projection") return sfpca::SchemeKind::projection;
  if (name == "schur") return sfpca::SchemeKind::schur;
  throw CLI::ValidationError("deflation", "unknown scheme '" + name + "'");
}

int cmd_fit(const FitOpts& opt) {
  const sfpca::DenseMatrix x = sfpca::read_matrix_csv(opt.input);
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());

  sfpca::DenseMatrix u_hat, v_hat;
  sfpca::Vector d_hat;
  bool converged = true;
  std::vector<std::vector<double>> traces;
  double feas_u = 0.0, feas_v = 0.0;
  sfpca::EngineStats stats;
  ordered_json extra;

  if (opt.method == "rank1") {
    const sfpca::SchemeKind kind = parse_scheme(opt.deflation);
    u_hat = sfpca::DenseMatrix::Zero(n, opt.rank);
    v_hat = sfpca::DenseMatrix::Zero(p, opt.rank);
    d_hat = sfpca::Vector::Zero(opt.rank);

    sfpca::SmootherPtr s_u = make_smoother(n, opt.alpha_u, opt.penalty_order);
    sfpca::SmootherPtr s_v = make_smoother(p, opt.alpha_v, opt.penalty_order);
    sfpca::DeflationState state = sfpca::DeflationState::init(x);
    ordered_json tuned = ordered_json::array();
    for (int t = 0; t < opt.rank; ++t) {
      sfpca::Rank1Fit fit;
      if (opt.tune) {
        sfpca::TuneGrid grid = sfpca::TuneGrid::defaults();
        grid.penalty_order = opt.penalty_order;
        sfpca::TuneResult res = sfpca::bic_tune(state.x_current, grid);
        fit = std::move(res.fit);
        tuned.push_back({{"component", t + 1},
                         {"lambda_u", res.lambda_u},
                         {"lambda_v", res.lambda_v},
                         {"alpha_u", res.alpha_u},
                         {"alpha_v", res.alpha_v},
                         {"bic", res.bic}});
      } else {
        sfpca::Rank1Config cfg;
        cfg.lambda_u = opt.lambda_u;
        cfg.lambda_v = opt.lambda_v;
        cfg.s_u = s_u;
        cfg.s_v = s_v;
        fit = sfpca::fit_rank1(state.x_current, cfg);
      }
      ++stats.svd_calls;  // one initialization SVD per component
      converged &= fit.converged;
      traces.push_back(fit.objective_trace);
      if (fit.d == 0.0) break;  // collapsed: later components are zero too
      feas_u = std::max(feas_u, std::abs(s_u->apply(fit.u).col(0).dot(fit.u) - 1.0));
      feas_v = std::max(feas_v, std::abs(s_v->apply(fit.v).col(0).dot(fit.v) - 1.0));
      state = sfpca::deflate_vector(state, fit.u, fit.v,
                                    sfpca::DeflationScheme{kind, true});
      u_hat.col(t) = state.history.back().u.col(0);
      v_hat.col(t) = state.history.back().v.col(0);
      d_hat(t) = fit.d;
    }
    if (opt.tune) extra["tuned"] = std::move(tuned);
  } else {
    sfpca::ManConfig cfg;
    cfg.k = opt.rank;
    cfg.lambda_u = opt.lambda_u;
    cfg.lambda_v = opt.lambda_v;
    cfg.s_u = make_smoother(n, opt.alpha_u, opt.penalty_order);
    cfg.s_v = make_smoother(p, opt.alpha_v, opt.penalty_order);
    cfg.engine = opt.method == "madmm"   ? sfpca::Engine::madmm
                 : opt.method == "manpg" ? sfpca::Engine::manpg
                                         : sfpca::Engine::amanpg;
    sfpca::BlockFit fit = sfpca::fit_manifold(x, cfg);
    u_hat = fit.u;
    v_hat = fit.v;
    d_hat = fit.d;
    converged = fit.converged;
    traces.push_back(fit.objective_trace);
    stats = fit.stats;
    const sfpca::DenseMatrix eye =
        sfpca::DenseMatrix::Identity(opt.rank, opt.rank);
    feas_u = (u_hat.transpose() * cfg.s_u->apply(u_hat) - eye).norm();
    feas_v = (v_hat.transpose() * cfg.s_v->apply(v_hat) - eye).norm();
    extra["sweeps"] = fit.sweeps;
  }

  const fs::path dir = prepare_out_dir(opt.out);
  sfpca::write_matrix_csv((dir / "u_hat.csv").string(), u_hat);
  sfpca::write_matrix_csv((dir / "v_hat.csv").string(), v_hat);
  sfpca::write_matrix_csv((dir / "d_hat.csv").string(), d_hat);

  ordered_json report;
  report["schema_version"] = 1;
  report["method"] = opt.method;
  if (opt.method == "rank1") report["deflation"] = opt.deflation;
  report["rank"] = opt.rank;
  report["lambda_u"] = opt.lambda_u;
  report["lambda_v"] = opt.lambda_v;
  report["alpha_u"] = opt.alpha_u;
  report["alpha_v"] = opt.alpha_v;
  report["penalty_order"] = opt.penalty_order;
  report["tune"] = opt.tune;
  report["converged"] = converged;
  report["objective_trace"] = traces;
  report["feasibility"] = {{"u", feas_u}, {"v", feas_v}};
  report["engine_stats"] = {{"svd_calls", stats.svd_calls},
                            {"retraction_calls", stats.retraction_calls},
                            {"descent_solves", stats.descent_solves}};
  for (auto& [key, value] : extra.items()) report[key] = value;
  write_text(dir / "report.json", report.dump(2) + "\n");
  return converged ? kExitOk : kExitNotConverged;
}

struct DeflateOpts {
  std::string input, u_path, v_path;
  std::string scheme = "hotelling";
  std::string mode = "vector";
  bool no_normalize = false;
  std::string out = ".";
};

int cmd_deflate(const DeflateOpts& opt) {
  const sfpca::DenseMatrix x = sfpca::read_matrix_csv(opt.input);
  const sfpca::DenseMatrix u = sfpca::read_matrix_csv(opt.u_path);
  const sfpca::DenseMatrix v = sfpca::read_matrix_csv(opt.v_path);
  const sfpca::DeflationScheme scheme{parse_scheme(opt.scheme), !opt.no_normalize};

  sfpca::DeflationState state = sfpca::DeflationState::init(x);
  if (opt.mode == "vector") {
    if (u.cols() != v.cols()) {
      throw CLI::ValidationError("--u/--v", "component counts differ");
    }
    for (int t = 0; t < u.cols(); ++t) {
      state = sfpca::deflate_vector(state, u.col(t), v.col(t), scheme);
    }
  } else {
    state = sfpca::deflate_block(state, u, v, scheme);
  }

  const fs::path dir = prepare_out_dir(opt.out);
  sfpca::write_matrix_csv((dir / "x_deflated.csv").string(), state.x_current);
  write_text(dir / "orthogonality.json",
             sfpca::orthogonality_report(state).to_json());
  return kExitOk;
}

struct BenchOpts {
  int scenario = 1;
  std::uint64_t seed = 0;
  int replicates = 1;
  std::string methods = "svd,hd,pd,sd,madmm,manpg,amanpg";
  int rank = 3;
  double lambda_u = 1.0, lambda_v = 1.0;
  double alpha_u = 3.0, alpha_v = 3.0;
  int penalty_order = 2;
  bool tune = false;
  bool timings = false;
  std::string out = ".";
};

std::vector<std::string> split_methods(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

int cmd_bench(const BenchOpts& opt) {
  sfpca::BenchmarkConfig cfg;
  cfg.scenario = sfpca::ScenarioSpec::scenario(opt.scenario, opt.seed);
  cfg.methods = split_methods(opt.methods);
  if (cfg.methods.empty()) {
    throw CLI::ValidationError("--methods", "no method tokens given");
  }
  const std::vector<std::string> known = {"svd",   "hd",    "pd",    "sd",
                                          "madmm", "manpg", "amanpg"};
  for (const std::string& m : cfg.methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      std::string valid;
      for (const auto& k : known) valid += (valid.empty() ? "" : ", ") + k;
      throw CLI::ValidationError("--methods",
                                 "unknown method '" + m + "' (valid: " + valid + ")");
    }
  }
  cfg.replicates = opt.replicates;
  cfg.rank = opt.rank;
  cfg.lambda_u = opt.lambda_u;
  cfg.lambda_v = opt.lambda_v;
  cfg.alpha_u = opt.alpha_u;
  cfg.alpha_v = opt.alpha_v;
  cfg.penalty_order = opt.penalty_order;
  cfg.tune = opt.tune;

  const sfpca::BenchmarkResult result = sfpca::run_benchmark(cfg);
  const fs::path dir = prepare_out_dir(opt.out);
  write_text(dir / "bench.json", result.to_json(opt.timings));
  write_text(dir / "bench.csv", result.to_csv());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse and functional PCA toolkit"};
  app.require_subcommand(1);

  SimulateOpts sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a benchmark scenario");
  simulate->add_option("--scenario", sim.scenario, "Scenario id (1 or 2)")
      ->check(CLI::IsMember({1, 2}))
      ->required();
  simulate->add_option("--seed", sim.seed, "PRNG seed");
  simulate->add_option("--out", sim.out, "Output directory");
  simulate->add_option("--overlap-shift", sim.overlap_shift,
                       "Override the scenario-2 support shift");

  FitOpts fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit sparse PCs to a CSV matrix");
  fit_cmd->add_option("--input", fit.input, "Input matrix CSV")->required();
  fit_cmd->add_option("--method", fit.method, "rank1, madmm, manpg, or amanpg")
      ->check(CLI::IsMember({"rank1", "madmm", "manpg", "amanpg"}));
  CLI::Option* defl =
      fit_cmd->add_option("--deflation", fit.deflation,
                          "hotelling, projection, or schur (rank1 only)")
          ->check(CLI::IsMember({"hotelling", "projection", "schur", "none"}));
  fit_cmd->add_option("--rank", fit.rank, "Number of components")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--lambda-u", fit.lambda_u, "Left sparsity weight")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--lambda-v", fit.lambda_v, "Right sparsity weight")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--alpha-u", fit.alpha_u, "Left smoothing weight")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--alpha-v", fit.alpha_v, "Right smoothing weight")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--penalty-order", fit.penalty_order, "Difference order (2 or 4)")
      ->check(CLI::IsMember({2, 4}));
  fit_cmd->add_flag("--tune", fit.tune, "BIC-tune lambda/alpha per component");
  fit_cmd->add_option("--out", fit.out, "Output directory");

  DeflateOpts defl_opts;
  CLI::App* deflate = app.add_subcommand("deflate", "Deflate a matrix by given PCs");
  deflate->add_option("--input", defl_opts.input, "Input matrix CSV")->required();
  deflate->add_option("--u", defl_opts.u_path, "Left PCs CSV (columns)")->required();
  deflate->add_option("--v", defl_opts.v_path, "Right PCs CSV (columns)")->required();
  deflate->add_option("--scheme", defl_opts.scheme, "hotelling, projection, or schur")
      ->check(CLI::IsMember({"hotelling", "projection", "schur"}));
  deflate->add_option("--mode", defl_opts.mode, "vector (sequential) or block")
      ->check(CLI::IsMember({"vector", "block"}));
  deflate->add_flag("--no-normalize", defl_opts.no_normalize,
                    "Skip Euclidean normalization before HD/PD");
  deflate->add_option("--out", defl_opts.out, "Output directory");

  BenchOpts bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run the benchmark suite");
  bench_cmd->add_option("--scenario", bench.scenario, "Scenario id (1 or 2)")
      ->check(CLI::IsMember({1, 2}));
  bench_cmd->add_option("--seed", bench.seed, "Base PRNG seed");
  bench_cmd->add_option("--replicates", bench.replicates, "Replicate count")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated method tokens");
  bench_cmd->add_option("--rank", bench.rank, "Components per method")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--lambda-u", bench.lambda_u, "Left sparsity weight");
  bench_cmd->add_option("--lambda-v", bench.lambda_v, "Right sparsity weight");
  bench_cmd->add_option("--alpha-u", bench.alpha_u, "Left smoothing weight");
  bench_cmd->add_option("--alpha-v", bench.alpha_v, "Right smoothing weight");
  bench_cmd->add_option("--penalty-order", bench.penalty_order,
                        "Difference order (2 or 4)")
      ->check(CLI::IsMember({2, 4}));
  bench_cmd->add_flag("--tune", bench.tune, "BIC-tune the rank1 pipelines");
  bench_cmd->add_flag("--timings", bench.timings, "Include wall times in bench.json");
  bench_cmd->add_option("--out", bench.out, "Output directory");

  try {
    app.parse(argc, argv);

    if (fit_cmd->parsed()) {
      fit.deflation_given = defl->count() > 0;
      if (fit.method != "rank1" && fit.deflation_given && fit.deflation != "none") {
        std::cerr << "fit: --deflation applies only to --method rank1\n";
        return kExitUsage;
      }
      if (fit.method == "rank1" && (!fit.deflation_given || fit.deflation == "none")) {
        if (fit.rank >= 2) {
          std::cerr << "fit: --method rank1 with --rank >= 2 requires an explicit "
                       "--deflation scheme\n";
          return kExitUsage;
        }
        fit.deflation = "hotelling";  // rank 1: no deflation happens; any scheme works
      }
      return cmd_fit(fit);
    }
    if (simulate->parsed()) return cmd_simulate(sim);
    if (deflate->parsed()) return cmd_deflate(defl_opts);
    if (bench_cmd->parsed()) return cmd_bench(bench);
    throw CLI::CallForHelp();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const sfpca::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sfpca::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
