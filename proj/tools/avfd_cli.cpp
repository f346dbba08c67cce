// avfd: command-line front end for the detection toolkit.
//
// Subcommands: train, evaluate, diagnose, corrupt, synth, prompts.
// Every command takes an optional key=value config file plus repeatable
// --set key=value overrides (flags win over file, env sits in between) and
// echoes the merged effective config into its output directory.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "avfd/errors.hpp"
#include "avfd/evaluation.hpp"
#include "avfd/fapl.hpp"
#include "avfd/manifest.hpp"
#include "avfd/perturbations.hpp"
#include "avfd/runconfig.hpp"
#include "avfd/synth.hpp"
#include "avfd/training.hpp"

namespace fs = std::filesystem;
using namespace avfd;

namespace {

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_file,
                  "key=value config file for this command");
  cmd->add_option("--set", args->sets,
                  "override one config key, e.g. --set seed=7 (repeatable)");
}

RunConfig merge_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_file.empty()) cfg = RunConfig::load(args.config_file);
  cfg.apply_env();
  for (const auto& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::string timestamp_tag() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

fs::path resolve_run_dir(const RunConfig& cfg) {
  if (cfg.has("run_dir")) return cfg.get_string("run_dir", "");
  const std::string tag = cfg.get_string("tag", "run");
  return fs::path("runs") / (timestamp_tag() + "-" + tag);
}

ModelHyper hyper_from(const RunConfig& cfg) {
  ModelHyper h;
  h.d = cfg.get_int("d", h.d);
  h.d_raw = cfg.get_int("d_raw", h.d_raw);
  h.d_tok = cfg.get_int("d_tok", h.d_tok);
  h.tokens_per_prompt = cfg.get_int("tokens_per_prompt", h.tokens_per_prompt);
  h.hidden = cfg.get_int("hidden", h.hidden);
  h.tau = cfg.get_double("tau", h.tau);
  h.tau_av = cfg.get_double("tau_av", h.tau_av);
  h.window = cfg.get_int("window", h.window);
  h.seed = cfg.get_u64("seed", h.seed);
  if (cfg.has("alpha")) {
    std::istringstream in(cfg.get_string("alpha", ""));
    Vector alpha(3);
    char comma = ',';
    if (!(in >> alpha(0) >> comma >> alpha(1) >> comma >> alpha(2))) {
      throw ConfigError("alpha expects three comma-separated numbers");
    }
    h.alpha = alpha;
  }
  return h;
}

const std::set<std::string> kHyperKeys = {
    "d", "d_raw", "d_tok", "tokens_per_prompt", "hidden",
    "tau", "tau_av", "window", "alpha", "seed"};

std::set<std::string> with_hyper(std::set<std::string> keys) {
  keys.insert(kHyperKeys.begin(), kHyperKeys.end());
  return keys;
}

// Minimal binary-PPM rendering of two overlaid score histograms
// (real = green, fake = red, overlap = yellow-ish mix).
void plot_histograms(const std::vector<double>& real,
                     const std::vector<double>& fake, const fs::path& path) {
  const int bins = 60, bar_w = 6, height = 200;
  const int width = bins * bar_w;
  double lo = 1e300, hi = -1e300;
  for (double v : real) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : fake) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!(hi > lo)) hi = lo + 1.0;
  std::vector<int> hr(bins, 0), hf(bins, 0);
  const auto bucket = [&](double v) {
    return std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
  };
  for (double v : real) ++hr[bucket(v)];
  for (double v : fake) ++hf[bucket(v)];
  int peak = 1;
  for (int b = 0; b < bins; ++b) peak = std::max({peak, hr[b], hf[b]});

  std::ofstream out(path, std::ios::binary);
  out << "P6\n" << width << " " << height << "\n255\n";
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int b = x / bar_w;
      const bool in_r = height - 1 - y < hr[b] * (height - 1) / peak;
      const bool in_f = height - 1 - y < hf[b] * (height - 1) / peak;
      unsigned char rgb[3] = {255, 255, 255};
      if (in_r && in_f) rgb[0] = 200, rgb[1] = 180, rgb[2] = 40;
      else if (in_r) rgb[0] = 40, rgb[1] = 170, rgb[2] = 60;
      else if (in_f) rgb[0] = 200, rgb[1] = 50, rgb[2] = 50;
      out.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
}

int cmd_train(const CommonArgs& args) {
  RunConfig cfg = merge_config(args);
  cfg.restrict_to(with_hyper({"manifest", "base_dir", "run_dir", "tag",
                              "epochs", "batch_size", "learning_rate",
                              "coeff_av", "coeff_ft"}),
                  "train");
  const fs::path manifest_path = cfg.require_string("manifest");
  const fs::path base_dir =
      cfg.get_string("base_dir", manifest_path.parent_path().string());

  TrainConfig tc;
  tc.hyper = hyper_from(cfg);
  tc.seed = tc.hyper.seed;
  tc.epochs = cfg.get_int("epochs", tc.epochs);
  tc.batch_size = cfg.get_int("batch_size", tc.batch_size);
  tc.learning_rate = cfg.get_double("learning_rate", tc.learning_rate);
  tc.loss_coeff_av = cfg.get_double("coeff_av", tc.loss_coeff_av);
  tc.loss_coeff_ft = cfg.get_double("coeff_ft", tc.loss_coeff_ft);

  const fs::path run_dir = resolve_run_dir(cfg);
  fs::create_directories(run_dir);
  cfg.set("manifest", manifest_path.string());
  cfg.set("base_dir", base_dir.string());
  cfg.set("seed", std::to_string(tc.seed));
  cfg.set("epochs", std::to_string(tc.epochs));
  cfg.echo(run_dir / "effective-config");

  const DatasetManifest manifest = load_manifest(manifest_path);
  const ToyEncoderSet encoders(tc.hyper.seed, tc.hyper);
  const Checkpoint ckpt = train(manifest, base_dir, tc, encoders);

  save_checkpoint(ckpt, run_dir / "checkpoint.avfdckpt");
  std::ofstream log(run_dir / "loss-log.txt", std::ios::binary);
  for (std::size_t i = 0; i < ckpt.loss_history.size(); ++i) {
    log << i << "\t" << ckpt.loss_history[i] << "\n";
  }
  std::cout << "checkpoint: " << (run_dir / "checkpoint.avfdckpt").string()
            << "\nsteps: " << ckpt.loss_history.size() << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, bool plots) {
  RunConfig cfg = merge_config(args);
  cfg.restrict_to({"manifest", "base_dir", "checkpoint", "run_dir", "tag",
                   "seed"},
                  "evaluate");
  const fs::path manifest_path = cfg.require_string("manifest");
  const fs::path base_dir =
      cfg.get_string("base_dir", manifest_path.parent_path().string());
  const fs::path ckpt_path = cfg.require_string("checkpoint");

  const fs::path run_dir = resolve_run_dir(cfg);
  fs::create_directories(run_dir);
  cfg.set("manifest", manifest_path.string());
  cfg.set("base_dir", base_dir.string());
  cfg.echo(run_dir / "effective-config");

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const ToyEncoderSet encoders(ckpt.state.hyper.seed, ckpt.state.hyper);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const EvaluationResult result =
      evaluate(manifest, base_dir, ckpt.state, encoders);

  write_score_reports(result.reports, run_dir / "reports.jsonl");
  write_metrics_record(result, run_dir / "metrics.json");
  {
    std::ofstream table(run_dir / "metrics.txt", std::ios::binary);
    write_metrics_table(result, table);
  }
  write_metrics_table(result, std::cout);

  if (plots) {
    std::vector<double> real, fake;
    for (const auto& r : result.reports) {
      (r.label == Label::kReal ? real : fake).push_back(r.video_score);
    }
    plot_histograms(real, fake, run_dir / "score-hist.ppm");
  }
  return 0;
}

int cmd_diagnose(const CommonArgs& args, bool plots) {
  RunConfig cfg = merge_config(args);
  cfg.restrict_to({"real_reports", "fake_reports", "run_dir", "tag", "bins",
                   "seed"},
                  "diagnose");
  const auto real = load_score_reports(cfg.require_string("real_reports"));
  const auto fake = load_score_reports(cfg.require_string("fake_reports"));
  if (real.empty() || fake.empty()) {
    throw EmptyGroup("diagnose needs non-empty real and fake report files");
  }
  const int bins = cfg.get_int("bins", 50);

  std::vector<double> real_scores, fake_scores;
  Matrix real_feat(static_cast<Eigen::Index>(real.size()),
                   real.front().channel_feature.size());
  Matrix fake_feat(static_cast<Eigen::Index>(fake.size()),
                   fake.front().channel_feature.size());
  for (std::size_t i = 0; i < real.size(); ++i) {
    real_scores.push_back(real[i].video_score);
    real_feat.row(static_cast<Eigen::Index>(i)) =
        real[i].channel_feature.transpose();
  }
  for (std::size_t i = 0; i < fake.size(); ++i) {
    fake_scores.push_back(fake[i].video_score);
    fake_feat.row(static_cast<Eigen::Index>(i)) =
        fake[i].channel_feature.transpose();
  }

  const double overlap = score_overlap(real_scores, fake_scores, bins);
  const double mmd_unbiased = mmd2(real_feat, fake_feat, true);
  const double mmd_biased = mmd2(real_feat, fake_feat, false);

  const fs::path run_dir = resolve_run_dir(cfg);
  fs::create_directories(run_dir);
  cfg.echo(run_dir / "effective-config");
  {
    std::ofstream out(run_dir / "diagnostics.json", std::ios::binary);
    out.precision(17);
    out << "{\n  \"score_overlap\": " << overlap
        << ",\n  \"mmd2_unbiased\": " << mmd_unbiased
        << ",\n  \"mmd2_biased\": " << mmd_biased
        << ",\n  \"n_real\": " << real.size()
        << ",\n  \"n_fake\": " << fake.size() << "\n}\n";
  }
  if (plots) {
    plot_histograms(real_scores, fake_scores, run_dir / "score-hist.ppm");
  }
  std::cout << "score_overlap: " << overlap
            << "\nmmd2_unbiased: " << mmd_unbiased
            << "\nmmd2_biased: " << mmd_biased << "\n";
  return 0;
}

int cmd_corrupt(const CommonArgs& args) {
  RunConfig cfg = merge_config(args);
  cfg.restrict_to({"manifest", "base_dir", "spec", "out_dir", "seed"},
                  "corrupt");
  const fs::path manifest_path = cfg.require_string("manifest");
  const fs::path base_dir =
      cfg.get_string("base_dir", manifest_path.parent_path().string());
  const fs::path out_dir = cfg.require_string("out_dir");

  CorruptionSpec spec = CorruptionSpec::parse(cfg.require_string("spec"));
  if (cfg.has("seed")) spec.seed = cfg.get_u64("seed", spec.seed);

  const DatasetManifest manifest = load_manifest(manifest_path);
  fs::create_directories(out_dir);
  cfg.set("spec", spec.describe());
  cfg.echo(out_dir / "effective-config");
  const DatasetManifest out = corrupt_dataset(manifest, base_dir, spec, out_dir);
  std::cout << "corrupted " << out.records.size() << " records into "
            << out_dir.string() << "\n";
  return 0;
}

int cmd_synth(const CommonArgs& args) {
  RunConfig cfg = merge_config(args);
  cfg.restrict_to(with_hyper({"n", "out_dir", "frames", "face_size",
                              "mouth_size", "sample_rate", "fps",
                              "all_test"}),
                  "synth");
  SynthConfig sc;
  sc.hyper = hyper_from(cfg);
  sc.seed = cfg.get_u64("seed", sc.seed);
  sc.n = cfg.get_int("n", sc.n);
  sc.frames = cfg.get_int("frames", sc.frames);
  sc.face_size = cfg.get_int("face_size", sc.face_size);
  sc.mouth_size = cfg.get_int("mouth_size", sc.mouth_size);
  sc.sample_rate_hz = cfg.get_int("sample_rate", sc.sample_rate_hz);
  sc.fps = cfg.get_double("fps", sc.fps);
  sc.all_test = cfg.get_bool("all_test", sc.all_test);
  const fs::path out_dir = cfg.require_string("out_dir");

  fs::create_directories(out_dir);
  cfg.set("n", std::to_string(sc.n));
  cfg.set("seed", std::to_string(sc.seed));
  cfg.echo(out_dir / "effective-config");

  const DatasetManifest manifest = synthesize_dataset(sc, out_dir);
  std::cout << "wrote " << manifest.records.size() << " clips to "
            << out_dir.string() << "\n";
  return 0;
}

int cmd_prompts(const CommonArgs& args, const std::string& action) {
  RunConfig cfg = merge_config(args);
  cfg.restrict_to({"file", "out", "seed"}, "prompts");
  if (action == "dump") {
    const fs::path out = cfg.require_string("out");
    save_prompts(PromptHierarchy::defaults(), out);
    std::cout << "wrote default prompts to " << out.string() << "\n";
    return 0;
  }
  if (action == "validate") {
    const PromptHierarchy p = load_prompts(cfg.require_string("file"));
    std::cout << "positives: " << p.positives.size()
              << "\nnegatives: " << p.negatives.size() << "\n";
    return 0;
  }
  throw ConfigError("prompts action must be 'dump' or 'validate'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"audio-visual forgery detection toolkit"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, diag_args, corrupt_args, synth_args,
      prompts_args;
  bool eval_plots = false, diag_plots = false;
  std::string prompts_action;

  add_common(app.add_subcommand("train", "fit a model on the train split"),
             &train_args);
  auto* eval_cmd =
      app.add_subcommand("evaluate", "score the test split of a manifest");
  add_common(eval_cmd, &eval_args);
  eval_cmd->add_flag("--plots", eval_plots, "write score histogram images");
  auto* diag_cmd = app.add_subcommand(
      "diagnose", "domain-shift diagnostics over two score report files");
  add_common(diag_cmd, &diag_args);
  diag_cmd->add_flag("--plots", diag_plots, "write score histogram images");
  add_common(app.add_subcommand("corrupt", "write a corrupted dataset copy"),
             &corrupt_args);
  add_common(app.add_subcommand("synth", "generate a synthetic toy dataset"),
             &synth_args);
  auto* prompts_cmd =
      app.add_subcommand("prompts", "dump or validate prompt files");
  add_common(prompts_cmd, &prompts_args);
  prompts_cmd->add_option("action", prompts_action, "dump | validate")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("train")) return cmd_train(train_args);
    if (app.got_subcommand("evaluate")) return cmd_evaluate(eval_args, eval_plots);
    if (app.got_subcommand("diagnose")) return cmd_diagnose(diag_args, diag_plots);
    if (app.got_subcommand("corrupt")) return cmd_corrupt(corrupt_args);
    if (app.got_subcommand("synth")) return cmd_synth(synth_args);
    if (app.got_subcommand("prompts"))
      return cmd_prompts(prompts_args, prompts_action);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
