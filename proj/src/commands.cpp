#include "ndr/commands.hpp"

#include <bit>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

namespace ndr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

fs::path require_ckpt(const CommandOptions& opts, const char* cmd) {
  if (!opts.ckpt) throw Error(std::string(cmd) + ": --ckpt is required");
  return *opts.ckpt;
}

std::vector<Sample> training_set(const RunConfig& rc) {
  return rc.dataset_dir.empty() ? make_dataset(rc.dataset) : load_dataset(rc.dataset_dir);
}

std::vector<Sample> heldout_set(const RunConfig& rc) {
  return make_heldout(rc.dataset, rc.train.eval_per_kind, mix_seed(rc.seed, 777));
}

json config_echo(const CommandOptions& opts, const RunConfig& rc) {
  return {{"text", opts.config ? read_text(*opts.config) : std::string()}, {"resolved", rc.to_json()}};
}

Image pad_edges(const Image& img, std::size_t h, std::size_t w) {
  Image out(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        out.at(y, x, c) = img.at(std::min(y, img.height - 1), std::min(x, img.width - 1), c);
  return out;
}

Image crop(const Image& img, std::size_t h, std::size_t w) {
  Image out(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, x, c);
  return out;
}

}  // namespace

RunConfig resolve_config(const CommandOptions& opts) {
  RunConfig rc = opts.config ? load_run_config(*opts.config) : RunConfig{};
  if (opts.seed) {
    const bool own_dataset_seed = rc.dataset.seed != rc.seed;
    const std::uint64_t data_seed = rc.dataset.seed;
    rc.set_seed(*opts.seed);
    if (own_dataset_seed) rc.dataset.seed = data_seed;
  }
  if (opts.steps) rc.train.steps = *opts.steps;
  if (opts.lambda) rc.train.lambda = *opts.lambda;
  if (opts.alt_steps) rc.train.alt_steps = *opts.alt_steps;
  if (opts.out) rc.output_dir = *opts.out;
  rc.validate();
  return rc;
}

void cmd_synth(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = resolve_config(opts);
  const auto samples = make_dataset(rc.dataset);
  write_dataset(samples, rc.output_dir);
  log << "wrote " << samples.size() << " samples to " << rc.output_dir.string() << '\n';
}

TrainOutcome cmd_train(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = resolve_config(opts);
  Trainer trainer(rc.train, training_set(rc), heldout_set(rc), config_echo(opts, rc));
  if (opts.ckpt) {
    trainer.resume(load_checkpoint(*opts.ckpt));
    log << "resumed from " << opts.ckpt->string() << " at step " << trainer.current_step() << '\n';
  }
  const TrainOutcome outcome = trainer.run(rc.output_dir);
  log << "trained to step " << outcome.final_step << "; checkpoint " << outcome.final_checkpoint.string() << '\n';
  return outcome;
}

MetricReport cmd_eval(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = resolve_config(opts);
  const std::vector<Sample> samples = opts.data ? load_dataset(*opts.data) : heldout_set(rc);
  std::optional<NdrSystem> sys;
  json meta = json::object();
  if (opts.ckpt) {
    const Checkpoint ck = load_checkpoint(*opts.ckpt);
    sys.emplace(load_system(ck));
    meta = ck.meta.value("config", json::object());
  }
  const MetricReport report = evaluate(sys ? &sys->restore : nullptr, samples);
  json summary = report.to_json();
  summary["model"] = opts.ckpt ? opts.ckpt->string() : "none (degraded baseline)";
  summary["config"] = meta;
  fs::create_directories(rc.output_dir);
  write_text(rc.output_dir / "report.json", summary.dump(2) + "\n");
  write_text(rc.output_dir / "report.csv", report.to_csv());
  log << "psnr " << report.overall.psnr_restored << " ssim " << report.overall.ssim_restored << " over "
      << report.samples.size() << " samples\n";
  return report;
}

Image restore_image(const RestoreModel& model, const Image& img, bool pad, std::ostream& log) {
  const std::size_t f = std::size_t{1} << (model.config().scales - 1);
  const std::size_t h = (img.height + f - 1) / f * f, w = (img.width + f - 1) / f * f;
  NoGradGuard no_grad;
  if (h == img.height && w == img.width) return from_tensor(model.forward(to_tensor(img), true).y_hat);
  if (!pad) {
    throw DimensionError("image is " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                         "; sides must be divisible by " + std::to_string(f) + " (use --pad)");
  }
  log << "note: padded " << img.height << "x" << img.width << " to " << h << "x" << w << " by edge replication\n";
  const Image restored = from_tensor(model.forward(to_tensor(pad_edges(img, h, w)), true).y_hat);
  return crop(restored, img.height, img.width);
}

void cmd_infer(const CommandOptions& opts, std::ostream& log) {
  const NdrSystem sys = load_system(load_checkpoint(require_ckpt(opts, "infer")));
  const Image restored = restore_image(sys.restore, load_image(opts.input), opts.pad, log);
  if (opts.output.has_parent_path()) fs::create_directories(opts.output.parent_path());
  save_image(restored, opts.output);
  log << "wrote " << opts.output.string() << '\n';
}

void dump_tensor(const Tensor& t, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  const Shape& shape = t.shape();
  const std::size_t cols = shape.back();
  std::ostringstream csv;
  csv.precision(9);
  for (std::size_t i = 0; i < t.numel(); ++i) csv << t[i] << ((i + 1) % cols ? ',' : '\n');
  write_text(dir / (name + ".csv"), csv.str());

  std::string raw;
  raw.reserve(t.numel() * 4);
  for (std::size_t i = 0; i < t.numel(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(t[i]));
    for (int b = 0; b < 4; ++b) raw.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  write_text(dir / (name + ".f32"), raw);
  const json sidecar = {{"name", name}, {"shape", shape}, {"dtype", "float32"}, {"byte_order", "little"},
                        {"csv_rows", t.numel() / cols}, {"csv_cols", cols}};
  write_text(dir / (name + ".json"), sidecar.dump(2) + "\n");
}

void cmd_inspect_ndr(const CommandOptions& opts, std::ostream& log) {
  const Checkpoint ck = load_checkpoint(require_ckpt(opts, "inspect-ndr"));
  const NdrSystem sys = load_system(ck);
  const fs::path dir = opts.out.value_or("ndr_dump");
  const ModelConfig& mc = sys.restore.config();

  Image probe;
  if (opts.image) {
    probe = load_image(*opts.image);
  } else {
    DegradationSpec spec;
    spec.kind = DegradationKind::noise;
    spec.params = NoiseParams{25.0};
    spec.seed = mc.seed;
    probe = make_sample(0, 32, spec).degraded;
  }
  NoGradGuard no_grad;
  const RestoreOutput out = sys.restore.forward(to_tensor(probe));
  const Tensor& u = out.u.front();
  dump_tensor(ops::reshape(u, {u.dim(1), u.dim(2), u.dim(3)}), dir, "U");
  if (mc.variant == Variant::no_dq) {
    log << "variant no_dq has no dictionary; wrote U only\n";
    return;
  }
  dump_tensor(sys.restore.dictionary().D, dir, "D");
  dump_tensor(out.affinity.front(), dir, "S");
  log << "wrote D " << shape_str(sys.restore.dictionary().D.shape()) << ", S " << shape_str(out.affinity.front().shape())
      << ", U " << shape_str(u.shape()) << " to " << dir.string() << '\n';
}

AblationReport cmd_ablate(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = resolve_config(opts);
  std::vector<std::string> variants = opts.variants;
  if (variants.empty()) variants = {"full", "no_dq", "no_di", "no_cp", "lambda-sweep"};
  const AblationReport report = ablate(rc.train, variants, training_set(rc), heldout_set(rc));
  json j = report.to_json();
  j["config"] = config_echo(opts, rc);
  fs::create_directories(rc.output_dir);
  write_text(rc.output_dir / "ablation.csv", report.to_csv());
  write_text(rc.output_dir / "ablation.json", j.dump(2) + "\n");
  log << "wrote " << report.runs.size() << " ablation runs to " << rc.output_dir.string() << '\n';
  return report;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  bool json_errors = false;
  for (int i = 1; i < argc; ++i) json_errors = json_errors || std::string(argv[i]) == "--json-errors";

  CLI::App app{"Neural degradation representation: synthesis, training and restoration", "ndr"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "ndr 0.1.0");
  CommandOptions o;
  app.add_flag("--json-errors", json_errors, "Report errors as one JSON object on stderr");

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the run seed");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto* synth = app.add_subcommand("synth", "Synthesize a paired dataset with manifest");
  with_config(synth);
  auto* train = app.add_subcommand("train", "Train the restoration and degradation networks jointly");
  with_config(train);
  train->add_option("--steps", o.steps, "Override train.steps");
  train->add_option("--lambda", o.lambda, "Override train.lambda");
  train->add_option("--alt-steps", o.alt_steps, "Alternate blocks of this many steps between the two loss terms");
  train->add_option("--ckpt", o.ckpt, "Resume from this checkpoint")->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("eval", "Score a checkpoint (or the degraded baseline) on a dataset");
  with_config(eval);
  eval->add_option("--ckpt", o.ckpt, "Checkpoint; omit for the degraded baseline")->check(CLI::ExistingFile);
  eval->add_option("--data", o.data, "Dataset directory; defaults to the held-out set")->check(CLI::ExistingDirectory);
  auto* infer = app.add_subcommand("infer", "Restore one image");
  infer->add_option("--ckpt", o.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  infer->add_option("input", o.input, "Degraded image (.png or .ppm)")->required()->check(CLI::ExistingFile);
  infer->add_option("output", o.output, "Restored image")->required();
  infer->add_flag("--pad", o.pad, "Edge-pad images whose sides are not divisible by the scale factor");
  auto* inspect = app.add_subcommand("inspect-ndr", "Dump D, S and U as CSV and float32");
  inspect->add_option("--ckpt", o.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  inspect->add_option("--out", o.out, "Output directory");
  inspect->add_option("--image", o.image, "Probe image for S and U")->check(CLI::ExistingFile);
  auto* abl = app.add_subcommand("ablate", "Train ablation variants and the lambda grid");
  with_config(abl);
  abl->add_option("--steps", o.steps, "Override train.steps");
  abl->add_option("--variants", o.variants, "full, no_dq, no_di, no_cp, lambda-sweep")->delimiter(',');

  auto fail = [&](const std::string& command, const std::string& msg) {
    if (json_errors) {
      err << json{{"error", msg}, {"command", command}}.dump() << '\n';
    } else {
      err << "error: " << msg << '\n';
    }
    return 1;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("", e.what());
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (chosen == synth) cmd_synth(o, out);
    else if (chosen == train) cmd_train(o, out);
    else if (chosen == eval) cmd_eval(o, out);
    else if (chosen == infer) cmd_infer(o, out);
    else if (chosen == inspect) cmd_inspect_ndr(o, out);
    else cmd_ablate(o, out);
  } catch (const std::exception& e) {
    return fail(name, e.what());
  }
  return 0;
}

}  // namespace ndr
