#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pida2c/config.hpp"
#include "pida2c/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace pida2c;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

enum class LogLevel { kInfo, kDebug };

LogLevel log_level() {
  const char* env = std::getenv("PID_A2C_LOG");
  if (env && std::string(env) == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<Scale> scale;
};

ExperimentSpec load_spec(const CommonOpts& opts) {
  return load_config(opts.config_path, opts.scale, opts.seed);
}

int cmd_train(const CommonOpts& opts) {
  const ExperimentSpec spec = load_spec(opts);
  if (log_level() == LogLevel::kDebug) {
    std::cerr << "train: mode=" << mode_name(spec.mode)
              << " scale=" << scale_name(spec.scale) << " seed=" << spec.seed
              << "\n";
  }
  const RunArtifact art = run_experiment(spec, opts.out_dir);
  int learned = 0, crashes = 0;
  for (const auto& r : art.records) {
    if (r.recovery || r.skipped) continue;
    ++learned;
    if (r.crash) ++crashes;
  }
  std::cout << "steps: " << learned << "  crashes: " << crashes
            << "  baseline mean: " << format_g9(art.baseline.mean)
            << "  output: " << opts.out_dir << "\n";
  if (art.aborted) {
    std::cerr << "experiment aborted: " << art.abort_reason
              << " (partial results flushed)\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_baseline(const CommonOpts& opts) {
  const ExperimentSpec spec = load_spec(opts);
  std::vector<std::array<double, 3>> apples;
  if (spec.mode == Mode::kMultiApple) {
    Rng rng(mix_seed(spec.seed, kStreamApples));
    apples = sample_apples(spec.workspace, spec.train_coords, rng);
  } else {
    apples = {spec.apple};
  }
  const BaselineStats stats = evaluate_baseline(spec.geometry, spec.sim, apples,
                                                spec.baseline_runs);
  std::cout << "baseline reward mean: " << format_g9(stats.mean)
            << "  stddev: " << format_g9(stats.stddev) << "  ("
            << apples.size() << " coordinate(s) x " << spec.baseline_runs
            << " runs)\n";
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    const std::string path = (fs::path(opts.out_dir) / "baseline.csv").string();
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open for writing");
    out << "mean,stddev,coords,runs\n"
        << format_g9(stats.mean) << ',' << format_g9(stats.stddev) << ','
        << apples.size() << ',' << spec.baseline_runs << "\n";
  }
  return kExitOk;
}

int cmd_test(const CommonOpts& opts) {
  const ExperimentSpec spec = load_spec(opts);
  const std::string base = (fs::path(opts.out_dir) / "actor").string();
  const Checkpoint cp = load_checkpoint(base);
  const HeldoutResult result = evaluate_heldout(spec, cp.net);
  write_heldout_csv(result,
                    (fs::path(opts.out_dir) / "test_results.csv").string());
  std::cout << "improved on " << result.improved << " of "
            << result.coords.size() << " held-out coordinates ("
            << format_g9(100.0 * result.fraction_improved) << "%, "
            << result.ties << " ties)\n";
  return kExitOk;
}

int cmd_coeffs(const CommonOpts& opts) {
  const auto records =
      read_steps_csv((fs::path(opts.out_dir) / "steps.csv").string());
  const auto excluded = fit_coefficients(records, false);
  const auto included = fit_coefficients(records, true);
  write_coefficients_csv(
      excluded, included,
      (fs::path(opts.out_dir) / "coefficients.csv").string());
  auto print = [](const char* label, const GainCoefficients& c) {
    std::cout << label << ": ";
    if (!c.valid) {
      std::cout << c.message << "\n";
      return;
    }
    static const char* names[] = {"j1_kp", "j1_ki", "j1_kd",
                                  "j2_kp", "j2_ki", "j2_kd"};
    std::cout << "intercept=" << format_g9(c.intercept);
    for (int i = 0; i < 6; ++i)
      std::cout << ' ' << names[i] << '='
                << format_g9(c.slopes[static_cast<std::size_t>(i)]);
    if (c.singular) std::cout << "  [singular: collinear columns dropped]";
    std::cout << "\n";
  };
  print("crashes excluded", excluded);
  print("crashes included", included);
  return kExitOk;
}

int cmd_replot(const CommonOpts& opts) {
  const auto dir = fs::path(opts.out_dir);
  const auto records = read_steps_csv((dir / "steps.csv").string());

  std::ifstream meta_in((dir / "meta.json").string());
  if (!meta_in) throw IoError((dir / "meta.json").string(), "cannot open");
  const nlohmann::json meta = nlohmann::json::parse(meta_in);

  RunArtifact art;
  art.records = records;
  art.baseline.mean = meta.at("baseline_mean").get<double>();
  detail::write_reward_chart(art, (dir / "reward_vs_step.svg").string());
  detail::write_gain_charts(art, 0, (dir / "gains_vs_step_j1.svg").string());
  detail::write_gain_charts(art, 1, (dir / "gains_vs_step_j2.svg").string());
  std::cout << "charts rewritten in " << opts.out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PID autotuning via one-step continuous actor-critic on a "
               "simulated two-link arm"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string scale_str;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub, bool need_config, bool need_out) {
    auto* c = sub->add_option("--config", opts.config_path,
                              "experiment config JSON");
    if (need_config) c->required();
    auto* o = sub->add_option("--out", opts.out_dir, "run output directory");
    if (need_out) o->required();
    sub->add_option("--seed", seed_value, "override the config seed");
    sub->add_option("--scale", scale_str, "desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
  };

  auto* train = app.add_subcommand("train", "run a training experiment");
  add_common(train, true, true);
  auto* baseline =
      app.add_subcommand("baseline", "evaluate the baseline gains");
  add_common(baseline, true, false);
  auto* test = app.add_subcommand(
      "test", "greedy evaluation of a trained actor on held-out coordinates");
  add_common(test, true, true);
  auto* coeffs = app.add_subcommand(
      "coeffs", "fit gain coefficients from a run's steps.csv");
  add_common(coeffs, false, true);
  auto* replot =
      app.add_subcommand("replot", "regenerate the SVG charts of a run");
  add_common(replot, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) opts.seed = seed_value;
    if (sub->count("--scale")) opts.scale = pida2c::parse_scale(scale_str);
  }

  try {
    if (train->parsed()) return cmd_train(opts);
    if (baseline->parsed()) return cmd_baseline(opts);
    if (test->parsed()) return cmd_test(opts);
    if (coeffs->parsed()) return cmd_coeffs(opts);
    if (replot->parsed()) return cmd_replot(opts);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const pida2c::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
