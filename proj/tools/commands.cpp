#include "commands.hpp"

#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>

#include "CLI11.hpp"
#include "covchan/serialize.hpp"

namespace covchan::cli {

namespace {

enum class LogLevel { kOff, kInfo, kDebug };

LogLevel log_level_from_env() {
  const char* v = std::getenv("COVCHAN_LOG");
  if (!v) return LogLevel::kOff;
  const std::string s(v);
  if (s == "debug") return LogLevel::kDebug;
  if (s == "info") return LogLevel::kInfo;
  return LogLevel::kOff;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  LogLevel level = LogLevel::kOff;
  double tol = kDefaultTolerance;
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::string out_path;

  void log(LogLevel at, const std::string& msg) const {
    if (level >= at) err << "[covchan] " << msg << '\n';
  }

  Json report(const std::string& command, Json results) const {
    return Json{{"command", command}, {"seed", seed},          {"tolerance", tol},
                {"trials", trials},   {"results", std::move(results)}, {"version", kVersion}};
  }

  void emit(const Json& report) const {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
      out << text;
    } else {
      write_file_atomic(out_path, text);
      log(LogLevel::kInfo, "wrote " + out_path);
    }
  }
};

CMatrix load_matrix(const std::string& file) {
  const Json j = load_json_file(file);
  try {
    return matrix_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(file + ": " + e.what());
  }
}

KrausSet load_kraus(const std::string& file) {
  const Json j = load_json_file(file);
  try {
    return kraus_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(file + ": " + e.what());
  }
}

FrameTransform load_frame(const std::string& file, double tol) {
  CMatrix m = load_matrix(file);
  try {
    return FrameTransform(std::move(m), std::max(tol, FrameTransform::kTolerance));
  } catch (const std::exception& e) {
    throw ParseError(file + ": " + e.what());
  }
}

int cmd_analyze(const Context& ctx, const std::string& kraus_file, const std::string& lprime_file,
                const std::string& lambda_file) {
  const KrausSet k = load_kraus(kraus_file);
  const KrausSet lprime = load_kraus(lprime_file);
  const FrameTransform f = load_frame(lambda_file, ctx.tol);
  if (k.dim() != lprime.dim() || k.dim() != f.dim())
    throw ParseError("dimension mismatch between " + kraus_file + ", " + lprime_file + " and " + lambda_file);
  const CovarianceReport r = analyze(k, lprime, f, ctx.tol);
  ctx.log(LogLevel::kInfo, "analyze: verdict " + std::string(to_string(r.verdict)));
  ctx.emit(ctx.report("analyze", to_json(r)));
  return r.verdict == Verdict::kIncompatible ? kIncompatible : kOk;
}

int cmd_freedom_sweep(const Context& ctx, std::size_t dim, std::size_t rank) {
  constexpr double kTrivialMixing = 1e-3;
  Json trials = Json::array();
  double max_residual = 0.0;
  double min_nontrivial = std::numeric_limits<double>::infinity();
  std::size_t noncovariant_compatible = 0;
  std::size_t nontrivial = 0;
  for (std::size_t t = 0; t < ctx.trials; ++t) {
    Rng rng(derive_seed(ctx.seed, 3, t));
    const KrausSet k = random_kraus(dim, rank, rng);
    const FrameTransform f(random_unitary(dim, rng));
    const MixingUnitary v(random_unitary(rank, rng));
    const KrausSet lprime = make_noncovariant_solution(k, f, v);
    const CovarianceReport r = analyze(k, lprime, f, ctx.tol);
    const bool trivial = distance_to_phase_permutation(v.matrix()) <= kTrivialMixing;
    max_residual = std::max(max_residual, r.residual);
    if (!trivial) {
      ++nontrivial;
      min_nontrivial = std::min(min_nontrivial, r.covariant_distance);
    }
    if (r.verdict == Verdict::kNoncovariantCompatible) ++noncovariant_compatible;
    ctx.log(LogLevel::kDebug, "trial " + std::to_string(t) + ": residual " + std::to_string(r.residual));
    trials.push_back(Json{{"index", t},
                          {"residual", real_to_json(r.residual)},
                          {"covariant_distance", real_to_json(r.covariant_distance)},
                          {"mixing_trivial", trivial},
                          {"verdict", std::string(to_string(r.verdict))}});
  }
  Json summary{{"max_residual", real_to_json(max_residual)},
               {"min_nontrivial_distance", real_to_json(min_nontrivial)},
               {"nontrivial_mixings", nontrivial},
               {"noncovariant_compatible", noncovariant_compatible}};
  ctx.emit(ctx.report("freedom-sweep",
                      Json{{"dim", dim}, {"rank", rank}, {"trials", std::move(trials)}, {"summary", std::move(summary)}}));
  return kOk;
}

int cmd_n1_search(const Context& ctx, const std::string& k1_file, const std::string& lambda_file,
                  std::size_t restarts) {
  const Json kj = load_json_file(k1_file);
  CMatrix k1 = [&] {
    try {
      if (kj.is_object() && kj.contains("ops")) {
        KrausSet k = kraus_from_json(kj);
        if (k.rank() != 1) throw ParseError("ops: expected exactly one Kraus operator");
        return k[0];
      }
      return matrix_from_json(kj);
    } catch (const ParseError& e) {
      throw ParseError(k1_file + ": " + e.what());
    }
  }();
  const FrameTransform f = load_frame(lambda_file, ctx.tol);
  if (!k1.square() || k1.rows() != f.dim()) throw ParseError("K1 and Lambda dimensions differ");
  if (const double defect = unitarity_defect(k1); defect > std::max(ctx.tol, KrausSet::kCompletenessTolerance))
    throw ParseError(k1_file + ": single Kraus operator violates completeness (defect " + std::to_string(defect) +
                     ")");

  N1SearchOptions opts;
  opts.trials = ctx.trials;
  opts.seed = ctx.seed;
  opts.tol = ctx.tol;
  opts.restarts = restarts;
  const N1SearchReport r = n1_covariance_search(k1, f, opts);
  ctx.log(LogLevel::kInfo, "n1-search: " + std::to_string(r.evaluations) + " evaluations, " +
                               std::to_string(r.violations) + " violations");
  Json payload = to_json(r);
  payload["dim"] = k1.rows();
  ctx.emit(ctx.report("n1-search", std::move(payload)));
  return (r.violations > 0 || r.cross_check_failures > 0) ? kImplementationFalsified : kOk;
}

int cmd_scenario(Context& ctx, const std::string& config_file) {
  const Json j = load_json_file(config_file);
  ScenarioConfig cfg = [&] {
    try {
      return scenario_from_json(j, ctx.tol);
    } catch (const ParseError& e) {
      throw ParseError(config_file + ": " + e.what());
    }
  }();
  ctx.tol = cfg.tol;
  ScenarioResult r = [&] {
    try {
      return run_scenario(cfg);
    } catch (const std::invalid_argument& e) {
      throw ParseError(config_file + ": " + e.what());
    } catch (const std::domain_error& e) {
      throw ParseError(config_file + ": " + e.what());
    }
  }();
  ctx.log(LogLevel::kInfo, "scenario: covariance defect " + std::to_string(r.covariance_defect));
  ctx.emit(ctx.report("scenario", to_json(r)));
  return r.covariant ? kOk : kIncompatible;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, log_level_from_env(), kDefaultTolerance, 0, 100, {}};

  CLI::App app{"Quantum-channel covariance toolkit", "covchan"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.add_option("--tol", ctx.tol, "Equality tolerance")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", ctx.seed, "Master seed");
  app.add_option("--trials", ctx.trials, "Number of random trials")->check(CLI::PositiveNumber);
  app.add_option("--out", ctx.out_path, "Report path (default: stdout)");

  std::string kraus_file, lprime_file, lambda_file, k1_file, config_file;
  std::size_t dim = 2, rank = 2, restarts = 8;

  auto* analyze_cmd = app.add_subcommand("analyze", "Classify a frame-S' Kraus set against a frame-S set");
  analyze_cmd->add_option("kraus", kraus_file, "Frame-S Kraus file")->required();
  analyze_cmd->add_option("lprime", lprime_file, "Frame-S' Kraus file")->required();
  analyze_cmd->add_option("lambda", lambda_file, "Frame transform matrix file")->required();

  auto* sweep_cmd = app.add_subcommand("freedom-sweep", "Random unitary-freedom sweep over (dim, rank)");
  sweep_cmd->add_option("--dim", dim, "Hilbert-space dimension")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--rank", rank, "Number of Kraus operators")->check(CLI::PositiveNumber);

  auto* n1_cmd = app.add_subcommand("n1-search", "Search for noncovariant single-operator solutions");
  n1_cmd->add_option("k1", k1_file, "K1 matrix or single-operator Kraus file")->required();
  n1_cmd->add_option("lambda", lambda_file, "Frame transform matrix file")->required();
  n1_cmd->add_option("--restarts", restarts, "Local minimization restarts");

  auto* scenario_cmd = app.add_subcommand("scenario", "Two-frame intervention scenario");
  scenario_cmd->add_option("config", config_file, "Scenario config file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(ctx, kraus_file, lprime_file, lambda_file);
    if (*sweep_cmd) return cmd_freedom_sweep(ctx, dim, rank);
    if (*n1_cmd) return cmd_n1_search(ctx, k1_file, lambda_file, restarts);
    if (*scenario_cmd) return cmd_scenario(ctx, config_file);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace covchan::cli
