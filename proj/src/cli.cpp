// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "distilrobust/config.hpp"
#include "distilrobust/error.hpp"
#include "distilrobust/gradcheck_suite.hpp"
#include "distilrobust/losses.hpp"
#include "distilrobust/manifest.hpp"
#include "distilrobust/plot.hpp"
#include "distilrobust/synthetic.hpp"
#include "distilrobust/tensor_io.hpp"
#include "distilrobust/trainer.hpp"

namespace distilrobust::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<Seed> env_seed() {
  const char* v = std::getenv("DISTILROBUST_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const Seed s = std::stoull(v, &used, 0);
    if (used == std::string_view(v).size()) return s;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kValidation, std::string("DISTILROBUST_SEED is not an integer: ") + v);
}

namespace {

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kIo:
    case ErrorKind::kFormat:
    case ErrorKind::kUnsupportedFormat:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

Seed resolve_seed(const std::optional<Seed>& flag) {
  if (flag) return *flag;
  return env_seed().value_or(0);
}

std::string file_stem_for(const std::string& id) {
  std::string out;
  for (char c : id)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out.empty() ? "utt" : out;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string manifest, noise_bank, rir_bank, out_dir;
  std::int64_t iterations = 1000;
  std::int64_t iter = 0;
  std::optional<Seed> seed;
  bool no_curriculum = false;
};

int cmd_augment(const AugmentArgs& a, std::ostream& out) {
  const augment::CurriculumState state =
      a.no_curriculum ? augment::CurriculumState::disabled(a.iterations)
                      : augment::CurriculumState(a.iter, a.iterations);
  const auto speech_records = data::read_manifest(a.manifest);
  const auto noise_records = data::read_manifest(a.noise_bank);
  const auto rir_records = data::read_manifest(a.rir_bank);

  // Collect every unreadable record across all three manifests.
  std::vector<data::Utterance> utts;
  augment::Banks banks;
  std::string problems;
  try {
    utts = data::load_speech(speech_records);
  } catch (const Error& e) {
    problems += std::string(e.what()) + "\n";
  }
  try {
    banks = data::load_banks(noise_records, rir_records);
  } catch (const Error& e) {
    problems += std::string(e.what()) + "\n";
  }
  if (!problems.empty()) throw Error(ErrorKind::kIo, problems);

  std::vector<audio::Waveform> clean;
  for (const auto& u : utts) clean.push_back(u.waveform);
  const Seed master = resolve_seed(a.seed);
  const auto result = augment::augment_batch(clean, state, banks, master);

  fs::create_directories(a.out_dir);
  std::string plans;
  for (std::size_t j = 0; j < result.size(); ++j) {
    const auto& p = result[j].plan;
    const std::string file = file_stem_for(utts[j].id) + ".wav";
    audio::write_wav(result[j].waveform, fs::path(a.out_dir) / file);
    json r;
    r["index"] = j;
    r["id"] = utts[j].id;
    r["output"] = file;
    r["action"] = augment::to_string(p.action);
    r["snr_db"] = p.snr_db ? json(*p.snr_db) : json(nullptr);
    if (p.noise_source) {
      r["noise"] = p.noise_source->is_white() ? "white" : "file";
      r["noise_id"] = p.noise_source->is_white()
                          ? json(nullptr)
                          : json(noise_records[*p.noise_source->file_index].id);
    } else {
      r["noise"] = nullptr;
      r["noise_id"] = nullptr;
    }
    r["rir_id"] = p.rir_index ? json(rir_records[*p.rir_index].id) : json(nullptr);
    r["reverb_applied"] = p.reverb_applied;
    r["seed"] = p.seed;
    plans += r.dump() + "\n";
  }
  io::write_file(fs::path(a.out_dir) / "plans.jsonl", plans);
  out << "wrote " << result.size() << " utterances to " << a.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config, out_dir = "run";
  std::optional<std::string> resume;
  std::optional<std::int64_t> stop_at;
  std::optional<Seed> seed;
  bool quiet = false;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const fs::path config_path(a.config);
  std::optional<Seed> fallback = a.seed;
  if (!fallback) fallback = env_seed();
  const TrainConfig cfg = config_from_json(io::read_file(config_path), fallback);

  std::vector<data::Utterance> corpus;
  augment::Banks banks;
  if (cfg.data.speech_manifest.empty()) {
    auto c = synthetic::training_corpus(cfg.seeds.data);
    corpus = std::move(c.speech);
    banks = std::move(c.banks);
  } else {
    const fs::path base = config_path.parent_path();
    corpus = data::load_speech(data::read_manifest(resolve(base, cfg.data.speech_manifest)));
    if (!cfg.data.noise_manifest.empty() || !cfg.data.rir_manifest.empty())
      banks = data::load_banks(data::read_manifest(resolve(base, cfg.data.noise_manifest)),
                               data::read_manifest(resolve(base, cfg.data.rir_manifest)));
  }

  std::optional<train::Trainer> trainer;
  if (a.resume) {
    const io::Checkpoint ckpt = io::read_checkpoint(*a.resume);
    trainer.emplace(train::Trainer::resume(ckpt, std::move(corpus), std::move(banks)));
    if (to_json(trainer->config()) != to_json(cfg))
      fail(ErrorKind::kValidation, "config: differs from the configuration stored in " + *a.resume);
  } else {
    trainer.emplace(cfg, std::move(corpus), std::move(banks));
  }

  train::TrainOptions opts;
  opts.output_dir = a.out_dir;
  opts.stop_at = a.stop_at;
  if (!a.quiet)
    opts.on_metrics = [&out, every = std::max<std::int64_t>(1, cfg.total_iterations / 20)](
                          const train::MetricsRecord& r) {
      if (r.iter % every == 0) out << train::to_jsonl(r) << "\n";
    };
  const train::TrainResult result = train::run(*trainer, opts);
  if (result.teacher_checksum_before != result.teacher_checksum_after)
    fail(ErrorKind::kNumeric, "teacher parameters changed during training");
  out << (trainer->finished() ? "finished" : "stopped at") << " iteration " << trainer->iteration()
      << " of " << cfg.total_iterations << "; outputs in " << a.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct LossesArgs {
  std::string teacher_dir, student_dir;
  std::vector<int> layers{4, 8, 12};
  bool normalize = false;
};

model::FeatureMaps read_features(const fs::path& dir, const std::vector<int>& layers,
                                 const char* side) {
  model::FeatureMaps maps;
  for (int l : layers) {
    const fs::path p = dir / ("layer" + std::to_string(l) + ".drtn");
    if (!fs::exists(p))
      fail(ErrorKind::kIo, std::string(side) + " features for layer " + std::to_string(l) +
                               " not found: " + p.string());
    try {
      maps.emplace(l, Tensor(io::read_matrix(p)));
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(side) + " layer " + std::to_string(l) + ": " + e.what());
    }
  }
  return maps;
}

int cmd_losses(const LossesArgs& a, std::ostream& out) {
  const auto teacher = read_features(a.teacher_dir, a.layers, "teacher");
  const auto student = read_features(a.student_dir, a.layers, "student");
  const losses::KdLoss kd = losses::kd_loss(teacher, student, a.layers, {a.normalize});
  const losses::CombinedLoss c = losses::combined_loss(kd, std::nullopt, 0.0);
  json j;
  j["kd_total"] = c.breakdown.kd_total;
  j["kd_l1"] = c.breakdown.kd_l1;
  j["kd_cos"] = c.breakdown.kd_cos;
  j["enh"] = nullptr;
  j["combined"] = c.breakdown.combined;
  j["lambda"] = c.breakdown.lambda;
  j["layers"] = a.layers;
  j["frames"] = teacher.begin()->second.rows();
  out << std::setprecision(17) << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
  bool all = false;
  std::vector<std::string> ops;
  double fault = 0.0;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  std::vector<const GradcheckCase*> cases;
  if (a.all) {
    for (const auto& c : gradcheck_cases()) cases.push_back(&c);
  } else {
    for (const auto& name : a.ops) {
      const GradcheckCase* c = find_gradcheck_case(name);
      if (!c) {
        std::string known;
        for (const auto& k : gradcheck_cases()) known += " " + k.name;
        fail(ErrorKind::kValidation, "unknown op '" + name + "'; known:" + known);
      }
      cases.push_back(c);
    }
  }
  GradcheckOptions opt;
  opt.analytic_fault = a.fault;
  bool ok = true;
  char line[160];
  std::snprintf(line, sizeof(line), "%-22s %14s  %s\n", "op", "max_rel_error", "result");
  out << line;
  for (const auto* c : cases) {
    const GradcheckReport r = c->run(opt);
    ok = ok && r.passed();
    std::snprintf(line, sizeof(line), "%-22s %14.3e  %s\n", c->name.c_str(), r.worst(),
                  r.passed() ? "PASS" : "FAIL");
    out << line;
  }
  out << (ok ? "all passed" : "FAILED") << " (tolerance " << opt.tolerance << ")\n";
  return ok ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------

int cmd_plot(const std::string& metrics, const std::string& svg, std::ostream& out) {
  const auto records = train::read_metrics(metrics);
  io::write_file(svg, plot::render_svg(plot::training_panels(records)));
  out << "wrote " << svg << " (" << records.size() << " records)\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust distillation of speech representations"};
  app.require_subcommand(1);

  AugmentArgs aug;
  auto* augment_cmd = app.add_subcommand("augment", "Contaminate a speech manifest offline");
  augment_cmd->add_option("--manifest", aug.manifest, "Speech manifest (JSON lines)")->required();
  augment_cmd->add_option("--noise-bank", aug.noise_bank, "Noise manifest")->required();
  augment_cmd->add_option("--rir-bank", aug.rir_bank, "RIR manifest")->required();
  augment_cmd->add_option("--iterations", aug.iterations, "Total training iterations N")
      ->check(CLI::PositiveNumber);
  augment_cmd->add_option("--iter", aug.iter, "Completed iterations it")->check(CLI::NonNegativeNumber);
  augment_cmd->add_option("--seed", aug.seed, "Master seed (default: $DISTILROBUST_SEED or 0)");
  augment_cmd->add_option("--out-dir", aug.out_dir, "Output directory")->required();
  augment_cmd->add_flag("--no-curriculum", aug.no_curriculum, "Ignore the schedule (tau 0, t 1)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Distill a student from the teacher surrogate");
  train_cmd->add_option("--config", tr.config, "Training config JSON")->required();
  train_cmd->add_option("--resume", tr.resume, "Checkpoint to resume from");
  train_cmd->add_option("--out-dir", tr.out_dir, "Checkpoint and metrics directory");
  train_cmd->add_option("--stop-at", tr.stop_at, "Stop after this iteration");
  train_cmd->add_option("--seed", tr.seed, "Seed for seeds left null in the config");
  train_cmd->add_flag("--quiet", tr.quiet, "No progress lines");

  LossesArgs lo;
  auto* losses_cmd = app.add_subcommand("losses", "Evaluate the distillation loss on saved features");
  losses_cmd->add_option("--teacher-features", lo.teacher_dir, "Directory of layer<l>.drtn")->required();
  losses_cmd->add_option("--student-features", lo.student_dir, "Directory of layer<l>.drtn")->required();
  losses_cmd->add_option("--layers", lo.layers, "Comma-separated layer indices")->delimiter(',');
  losses_cmd->add_flag("--normalize-by-frames", lo.normalize, "Divide by the frame count");

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  auto* all_opt = gc_cmd->add_flag("--all", gc.all, "Every registered op");
  auto* op_opt = gc_cmd->add_option("--op", gc.ops, "Op name (repeatable)");
  all_opt->excludes(op_opt);
  gc_cmd->add_option("--inject-gradient-fault", gc.fault)->group("");
  gc_cmd->add_flag("--list", "List registered ops");

  std::string metrics_path, svg_path;
  auto* plot_cmd = app.add_subcommand("plot", "Render a metrics log as SVG");
  plot_cmd->add_option("--metrics", metrics_path, "metrics.jsonl")->required();
  plot_cmd->add_option("--out", svg_path, "Output SVG")->required();

  std::string fixtures_dir;
  std::size_t n_speech = 20, n_noise = 4, n_rir = 3;
  std::optional<Seed> fixtures_seed;
  auto* fix_cmd = app.add_subcommand("fixtures", "Write a synthetic corpus with manifests");
  fix_cmd->add_option("--out-dir", fixtures_dir, "Output directory")->required();
  fix_cmd->add_option("--speech", n_speech, "Speech utterances");
  fix_cmd->add_option("--noise", n_noise, "Noise recordings");
  fix_cmd->add_option("--rir", n_rir, "Room impulse responses");
  fix_cmd->add_option("--seed", fixtures_seed, "Seed");

  std::string experiment = "C1";
  std::int64_t iterations = 2000;
  auto* cfg_cmd = app.add_subcommand("config", "Print an experiment preset as JSON");
  cfg_cmd->add_option("--experiment", experiment, "A, B, C1 or C2");
  cfg_cmd->add_option("--iterations", iterations, "Total iterations")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    for (auto* sub : app.get_subcommands()) out << sub->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*augment_cmd) return cmd_augment(aug, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*losses_cmd) return cmd_losses(lo, out);
    if (*gc_cmd) {
      if (gc_cmd->count("--list")) {
        for (const auto& c : gradcheck_cases()) out << c.name << "\n";
        return kExitOk;
      }
      if (!gc.all && gc.ops.empty()) {
        err << "usage error: gradcheck needs --all or --op NAME\n";
        return kExitValidation;
      }
      return cmd_gradcheck(gc, out);
    }
    if (*plot_cmd) return cmd_plot(metrics_path, svg_path, out);
    if (*fix_cmd) {
      const auto set = synthetic::write_fixtures(fixtures_dir, n_speech, n_noise, n_rir,
                                                 resolve_seed(fixtures_seed));
      out << set.speech_manifest.string() << "\n"
          << set.noise_manifest.string() << "\n"
          << set.rir_manifest.string() << "\n";
      return kExitOk;
    }
    if (*cfg_cmd) {
      out << to_json(preset(parse_experiment(experiment), iterations)) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace distilrobust::cli
