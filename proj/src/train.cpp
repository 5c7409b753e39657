#include "ndr/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ndr {

using nlohmann::json;

void TrainingConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw Error("training: lambda must be a finite value >= 0");
  if (!(lr > 0.0)) throw Error("training: lr must be > 0");
  if (batch_size == 0) throw Error("training: batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw Error("training: betas must lie in [0,1)");
  if (!(eps > 0.0)) throw Error("training: eps must be > 0");
  if (weight_decay < 0.0) throw Error("training: weight_decay must be >= 0");
  model.validate();
  const std::size_t align = std::size_t{1} << (model.scales - 1);
  if (crop_size == 0 || crop_size % align) {
    throw Error("training: crop_size " + std::to_string(crop_size) + " must be a positive multiple of " +
                std::to_string(align));
  }
}

LossGraph bidirectional_losses(const RestoreModel& restore, const DegradeModel& degrade, const Tensor& x,
                               const Tensor& y, double lambda, bool detach_degradation) {
  LossGraph g;
  g.restored = restore.forward(x);
  std::vector<Tensor> u = g.restored.u;
  if (detach_degradation)
    for (Tensor& t : u) t = t.detach();
  g.x_prime = degrade.forward(y, u);
  g.x_recon = ops::mse(g.x_prime, x);
  g.y_recon = ops::mse(g.restored.y_hat, y);
  g.total = ops::add(g.x_recon, ops::scale(g.y_recon, lambda));
  return g;
}

NdrSystem::NdrSystem(const ModelConfig& cfg) : restore(cfg), degrade(cfg) {
  params = restore.params();
  for (auto& p : degrade.params()) params.push_back(p);
  adam.init_for(tensors());
}

std::vector<Tensor> NdrSystem::tensors() const {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

void NdrSystem::zero_grad() {
  for (auto& p : params) p.tensor.zero_grad();
}

Losses bidirectional_step(NdrSystem& sys, const Tensor& x, const Tensor& y, const TrainingConfig& cfg,
                          int phase_term) {
  sys.zero_grad();
  Tape::active().clear();
  LossGraph g;
  try {
    g = bidirectional_losses(sys.restore, sys.degrade, x, y, cfg.lambda, cfg.detach_degradation);
  } catch (...) {
    Tape::active().clear();
    throw;
  }
  Losses l{g.total.item(), g.x_recon.item(), g.y_recon.item()};
  if (!std::isfinite(l.total)) {
    Tape::active().clear();
    throw NonFiniteError("training: non-finite loss");
  }
  switch (phase_term) {
    case 0: backward(g.total); break;
    case 1: backward(g.x_recon); break;
    case 2: backward(ops::scale(g.y_recon, cfg.lambda)); break;
    default: Tape::active().clear(); throw Error("bidirectional_step: unknown phase term");
  }
  auto tensors = sys.tensors();
  adam_step(tensors, sys.adam, cfg.adam());
  return l;
}

std::size_t count_ndr_params(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) {
    const auto& s = p.name;
    if (s.find(".ndr.") != std::string::npos || s.find(".dq.") != std::string::npos ||
        s.find(".di.") != std::string::npos) {
      n += p.tensor.numel();
    }
  }
  return n;
}

// --- Trainer -----------------------------------------------------------------------

namespace {

json model_json(const ModelConfig& m) {
  return {{"channels", m.channels}, {"scales", m.scales}, {"feature_dim", m.feature_dim}, {"slots", m.slots},
          {"rank", m.rank},         {"variant", to_string(m.variant)}, {"seed", m.seed}};
}

json losses_json(const Losses& l) { return {{"total", l.total}, {"xrecon", l.x_recon}, {"yrecon", l.y_recon}}; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void copy_crop(const Image& img, std::size_t oy, std::size_t ox, std::size_t crop, std::span<double> dst) {
  for (std::size_t r = 0; r < crop; ++r)
    for (std::size_t c = 0; c < crop; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) dst[(r * crop + c) * 3 + ch] = img.at(oy + r, ox + c, ch);
}

}  // namespace

ModelConfig model_config_from_meta(const json& meta) {
  if (!meta.contains("model")) throw CheckpointError("checkpoint metadata has no model section");
  const json& m = meta.at("model");
  ModelConfig cfg;
  cfg.channels = m.at("channels").get<std::size_t>();
  cfg.scales = m.at("scales").get<std::size_t>();
  cfg.feature_dim = m.at("feature_dim").get<std::size_t>();
  cfg.slots = m.at("slots").get<std::size_t>();
  cfg.rank = m.at("rank").get<std::size_t>();
  cfg.variant = parse_variant(m.at("variant").get<std::string>());
  cfg.seed = m.at("seed").get<std::uint64_t>();
  return cfg;
}

NdrSystem load_system(const Checkpoint& ckpt) {
  NdrSystem sys(model_config_from_meta(ckpt.meta));
  for (auto& p : sys.params) ckpt.load_into(p.name, p.tensor);
  if (ckpt.meta.contains("adam_step")) {
    sys.adam.step = ckpt.meta.at("adam_step").get<std::uint64_t>();
    for (std::size_t i = 0; i < sys.params.size(); ++i) {
      const auto& m = ckpt.get("adam.m." + sys.params[i].name);
      const auto& v = ckpt.get("adam.v." + sys.params[i].name);
      if (m.values.size() != sys.adam.m[i].size() || v.values.size() != sys.adam.v[i].size()) {
        throw CheckpointError("optimizer state for '" + sys.params[i].name + "' has the wrong size");
      }
      for (std::size_t k = 0; k < m.values.size(); ++k) {
        sys.adam.m[i][k] = m.values[k];
        sys.adam.v[i][k] = v.values[k];
      }
    }
  }
  return sys;
}

Trainer::Trainer(const TrainingConfig& cfg, std::vector<Sample> train, std::vector<Sample> heldout, json echo)
    : cfg_(cfg),
      train_(std::move(train)),
      heldout_(std::move(heldout)),
      echo_(std::move(echo)),
      sys_((cfg.validate(), cfg.model)),
      rng_(mix_seed(cfg.seed, 101)) {
  if (train_.empty()) throw Error("training: empty training set");
  for (const Sample& s : train_) {
    if (s.degraded.height < cfg_.crop_size || s.degraded.width < cfg_.crop_size) {
      throw Error("training: crop_size " + std::to_string(cfg_.crop_size) + " exceeds sample " +
                  std::to_string(s.id) + " (" + std::to_string(s.degraded.height) + "x" +
                  std::to_string(s.degraded.width) + ")");
    }
  }
}

void Trainer::next_batch(Tensor& x, Tensor& y) {
  const std::size_t b = cfg_.batch_size, crop = cfg_.crop_size, per = crop * crop * 3;
  x = Tensor({b, crop, crop, 3});
  y = Tensor({b, crop, crop, 3});
  for (std::size_t i = 0; i < b; ++i) {
    const Sample& s = train_[rng_.index(train_.size())];
    const std::size_t oy = rng_.index(s.degraded.height - crop + 1);
    const std::size_t ox = rng_.index(s.degraded.width - crop + 1);
    copy_crop(s.degraded, oy, ox, crop, x.data().subspan(i * per, per));
    copy_crop(s.clean, oy, ox, crop, y.data().subspan(i * per, per));
  }
}

Losses Trainer::step() {
  Tensor x, y;
  next_batch(x, y);
  int phase = 0;
  if (cfg_.alt_steps > 0) phase = (step_ / cfg_.alt_steps) % 2 == 0 ? 1 : 2;
  const Losses l = bidirectional_step(sys_, x, y, cfg_, phase);
  constexpr double keep = 0.98;
  if (step_ == 0) {
    running_ = l;
  } else {
    running_.total = keep * running_.total + (1 - keep) * l.total;
    running_.x_recon = keep * running_.x_recon + (1 - keep) * l.x_recon;
    running_.y_recon = keep * running_.y_recon + (1 - keep) * l.y_recon;
  }
  ++step_;
  return l;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  for (const auto& p : sys_.params) ck.put(p.name, p.tensor);
  for (std::size_t i = 0; i < sys_.params.size(); ++i) {
    const auto& p = sys_.params[i];
    ck.put("adam.m." + p.name, p.tensor.shape(), sys_.adam.m[i]);
    ck.put("adam.v." + p.name, p.tensor.shape(), sys_.adam.v[i]);
  }
  ck.meta = {{"config", echo_},
             {"model", model_json(cfg_.model)},
             {"step", step_},
             {"adam_step", sys_.adam.step},
             {"rng_state", rng_.state()},
             {"running", losses_json(running_)}};
  return ck;
}

void Trainer::resume(const Checkpoint& ckpt) {
  const ModelConfig saved = model_config_from_meta(ckpt.meta);
  const ModelConfig& ours = cfg_.model;
  if (saved.channels != ours.channels || saved.scales != ours.scales || saved.feature_dim != ours.feature_dim ||
      saved.slots != ours.slots || saved.rank != ours.rank || saved.variant != ours.variant) {
    throw CheckpointError("checkpoint model configuration does not match the run configuration");
  }
  NdrSystem loaded = load_system(ckpt);
  for (std::size_t i = 0; i < sys_.params.size(); ++i) {
    auto dst = sys_.params[i].tensor.data();
    const auto src = loaded.params[i].tensor.data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
  sys_.adam = loaded.adam;
  step_ = ckpt.meta.at("step").get<std::size_t>();
  rng_.set_state(ckpt.meta.at("rng_state").get<std::string>());
  const json& r = ckpt.meta.at("running");
  running_ = {r.at("total").get<double>(), r.at("xrecon").get<double>(), r.at("yrecon").get<double>()};
}

MetricReport Trainer::evaluate_heldout() const { return evaluate(&sys_.restore, heldout_); }

TrainOutcome Trainer::run(const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  TrainOutcome out;
  out.metrics_csv = out_dir / "metrics.csv";

  // A resumed run appends to the existing log; rows past the resume point are dropped.
  std::vector<std::string> kept;
  if (step_ > 0 && fs::exists(out.metrics_csv)) {
    std::ifstream in(out.metrics_csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (std::stoull(line.substr(0, line.find(','))) <= step_) kept.push_back(line);
    }
  }
  std::ofstream csv(out.metrics_csv, std::ios::trunc);
  if (!csv) throw Error("cannot write " + out.metrics_csv.string());
  csv << kMetricsHeader << '\n';
  for (const auto& line : kept) csv << line << '\n';
  csv.flush();

  while (step_ < cfg_.steps) {
    Losses l;
    try {
      l = step();
    } catch (const NonFiniteError&) {
      save_checkpoint(checkpoint(), out_dir / "crash.ndrc");
      throw;
    }
    out.history.push_back(l);
    std::string psnr_col, ssim_col;
    if (cfg_.eval_every > 0 && step_ % cfg_.eval_every == 0 && !heldout_.empty()) {
      const MetricReport rep = evaluate_heldout();
      psnr_col = fmt(rep.overall.psnr_restored);
      ssim_col = fmt(rep.overall.ssim_restored);
    }
    csv << step_ << ',' << fmt(l.total) << ',' << fmt(l.x_recon) << ',' << fmt(cfg_.lambda * l.y_recon) << ','
        << psnr_col << ',' << ssim_col << '\n';
    csv.flush();
    if (cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0 && step_ < cfg_.steps) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%06zu.ndrc", step_);
      save_checkpoint(checkpoint(), out_dir / name);
    }
  }
  out.final_step = step_;
  out.final_checkpoint = out_dir / "final.ndrc";
  save_checkpoint(checkpoint(), out.final_checkpoint);
  return out;
}

// --- ablations -------------------------------------------------------------------

namespace {

AblationRun train_variant(const std::string& name, TrainingConfig cfg, const std::vector<Sample>& train,
                          const std::vector<Sample>& heldout) {
  Trainer t(cfg, train, heldout);
  Losses last;
  while (t.current_step() < cfg.steps) last = t.step();
  AblationRun run;
  run.name = name;
  run.variant = cfg.model.variant;
  run.lambda = cfg.lambda;
  run.restore_params = t.system().restore.count_params();
  run.ndr_params = count_ndr_params(t.system().restore.params());
  run.final_losses = last;
  run.report = t.evaluate_heldout();
  return run;
}

}  // namespace

AblationReport ablate(const TrainingConfig& base, const std::vector<std::string>& variants,
                      const std::vector<Sample>& train, const std::vector<Sample>& heldout) {
  AblationReport report;
  report.requested = variants;
  for (const std::string& v : variants) {
    if (v == "lambda-sweep") {
      for (double lam : kLambdaGrid) {
        TrainingConfig cfg = base;
        cfg.lambda = lam;
        cfg.model.variant = Variant::full;
        report.runs.push_back(train_variant("lambda=" + fmt(lam), cfg, train, heldout));
      }
    } else {
      TrainingConfig cfg = base;
      cfg.model.variant = parse_variant(v);
      report.runs.push_back(train_variant(v, cfg, train, heldout));
    }
  }
  return report;
}

std::string AblationReport::to_csv() const {
  std::set<std::string> kinds;
  for (const auto& r : runs)
    for (const auto& [k, s] : r.report.by_kind) kinds.insert(k);
  std::ostringstream os;
  os << "# variants:";
  for (std::size_t i = 0; i < requested.size(); ++i) os << (i ? "," : " ") << requested[i];
  os << "\nrun,variant,lambda,restore_params,ndr_params,loss_total";
  for (const auto& k : kinds) os << ",psnr_" << k << ",ssim_" << k;
  os << ",psnr_mean,ssim_mean\n";
  for (const auto& r : runs) {
    os << r.name << ',' << to_string(r.variant) << ',' << fmt(r.lambda) << ',' << r.restore_params << ','
       << r.ndr_params << ',' << fmt(r.final_losses.total);
    for (const auto& k : kinds) {
      const auto it = r.report.by_kind.find(k);
      if (it == r.report.by_kind.end()) {
        os << ",,";
      } else {
        os << ',' << fmt(it->second.psnr_restored) << ',' << fmt(it->second.ssim_restored);
      }
    }
    os << ',' << fmt(r.report.overall.psnr_restored) << ',' << fmt(r.report.overall.ssim_restored) << '\n';
  }
  return os.str();
}

json AblationReport::to_json() const {
  json rows = json::array();
  for (const auto& r : runs) {
    rows.push_back({{"run", r.name},
                    {"variant", to_string(r.variant)},
                    {"lambda", r.lambda},
                    {"restore_params", r.restore_params},
                    {"ndr_params", r.ndr_params},
                    {"final_losses", losses_json(r.final_losses)},
                    {"metrics", r.report.to_json()}});
  }
  return {{"variants", requested}, {"runs", rows}};
}

}  // namespace ndr
