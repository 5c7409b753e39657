#include "ndr/model.hpp"

#include <algorithm>

namespace ndr {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_dq: return "no_dq";
    case Variant::no_di: return "no_di";
    case Variant::no_cp: return "no_cp";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::full, Variant::no_dq, Variant::no_di, Variant::no_cp})
    if (to_string(v) == name) return v;
  throw Error("unknown model variant '" + name + "'");
}

void ModelConfig::validate() const {
  if (channels == 0 || feature_dim == 0 || slots == 0 || rank == 0) throw Error("model sizes must be positive");
  if (scales < 1 || scales > 3) throw Error("model scales must be 1, 2 or 3");
  if (rank >= channels) throw Error("CP rank K must be below the channel width");
}

void check_image_batch(const Tensor& x, std::size_t scales, const char* who) {
  if (x.rank() != 4 || x.dim(3) != 3) {
    throw DimensionError(std::string(who) + ": expected [B,H,W,3], got " + shape_str(x.shape()));
  }
  const std::size_t f = std::size_t{1} << (scales - 1);
  if (x.dim(1) % f || x.dim(2) % f) {
    throw DimensionError(std::string(who) + ": height and width must be divisible by " + std::to_string(f) +
                         ", got " + shape_str(x.shape()));
  }
}

ResBlock ResBlock::make(std::size_t channels, Rng& rng) {
  return {Conv3::make(channels, channels, rng), Pointwise::make(channels, channels, rng),
          Conv3::make(channels, channels, rng, 1, 0.5)};
}

Tensor ResBlock::operator()(const Tensor& x) const {
  const Tensor h = ops::silu(conv1(x));
  const Tensor g = ops::sigmoid(gate(ops::global_avg_pool(h)));
  return ops::add(x, conv2(ops::scale_channels(h, g)));
}

void ResBlock::collect(const std::string& prefix, ParamList& out) const {
  conv1.collect(prefix + ".conv1", out);
  gate.collect(prefix + ".gate", out);
  conv2.collect(prefix + ".conv2", out);
}

Junction Junction::make(Variant v, std::size_t channels, const ModelConfig& cfg, Rng& rng, bool with_query) {
  Junction j;
  j.variant = v;
  if (with_query) {
    if (v == Variant::no_dq) j.plain_query = Pointwise::make(channels, channels, rng);
    else j.dq = DqWeights::make(channels, cfg.feature_dim, rng);
  }
  if (v == Variant::no_di) j.plain_inject = Conv3::make(channels, channels, rng, 1, 0.5);
  else if (v == Variant::no_cp) j.concat_mix = Pointwise::make(2 * channels, channels, rng, 0.5);
  else j.di = DiWeights::make(channels, cfg.rank, rng);
  return j;
}

void Junction::collect(const std::string& prefix, ParamList& out) const {
  if (variant == Variant::no_dq) plain_query.collect(prefix + ".query", out);
  else dq.collect(prefix + ".dq", out);
  if (variant == Variant::no_di) plain_inject.collect(prefix + ".inject", out);
  else if (variant == Variant::no_cp) concat_mix.collect(prefix + ".mix", out);
  else di.collect(prefix + ".di", out);
}

Tensor inject(const Junction& j, const Tensor& f, const Tensor& u) {
  switch (j.variant) {
    case Variant::no_di: return ops::add(f, j.plain_inject(u));
    case Variant::no_cp: return ops::add(f, j.concat_mix(ops::concat_channels(f, u)));
    default: return di_inject(f, u, j.di);
  }
}

RestoreModel::RestoreModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(mix_seed(cfg.seed, 11));
  dict_ = NdrDictionary::random(cfg.feature_dim, cfg.slots, rng);
  head_ = Conv3::make(3, cfg.channels, rng);
  for (std::size_t s = 0; s < cfg.scales; ++s) {
    const std::size_t c = cfg.channels_at(s);
    if (s > 0) down_.push_back(Conv3::make(cfg.channels_at(s - 1), c, rng, 2));
    encoders_.push_back(ResBlock::make(c, rng));
    junctions_.push_back(Junction::make(cfg.variant, c, cfg, rng));
    decoders_.push_back(ResBlock::make(c, rng));
    if (s > 0) up_.push_back(Conv3::make(c, cfg.channels_at(s - 1), rng));
  }
  tail_ = Conv3::zeros(cfg.channels, 3);
}

RestoreOutput RestoreModel::forward(const Tensor& x, bool clamp_output) const {
  check_image_batch(x, cfg_.scales, "restore_forward");
  const std::size_t batch = x.dim(0);

  std::vector<Tensor> enc(cfg_.scales);
  enc[0] = encoders_[0](head_(x));
  for (std::size_t s = 1; s < cfg_.scales; ++s) enc[s] = encoders_[s](down_[s - 1](enc[s - 1]));

  RestoreOutput out;
  out.u.resize(cfg_.scales);
  if (cfg_.variant != Variant::no_dq) out.affinity.resize(cfg_.scales);

  // Coarsest scale first; each junction conditions the encoder feature on its
  // queried degradation before the decoder consumes it.
  Tensor dec;
  for (std::size_t s = cfg_.scales; s-- > 0;) {
    const Junction& j = junctions_[s];
    const Tensor& f = enc[s];
    Tensor u;
    if (cfg_.variant == Variant::no_dq) {
      u = j.plain_query(f);
    } else {
      Tensor affinity = dq_affinity(f, dict_, j.dq.map_in);
      u = dq_query(affinity, dict_, j.dq.map_out, batch, f.dim(1), f.dim(2)).u;
      out.affinity[s] = affinity;
    }
    out.u[s] = u;
    Tensor g = inject(j, f, u);
    if (s + 1 < cfg_.scales) g = ops::add(g, up_[s](ops::upsample_nearest2x(dec)));
    dec = decoders_[s](g);
  }

  out.y_hat = ops::add(x, tail_(dec));
  if (clamp_output) {
    out.y_hat = out.y_hat.clone();
    for (double& v : out.y_hat.data()) v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

ParamList RestoreModel::params() const {
  ParamList p;
  if (cfg_.variant != Variant::no_dq) p.push_back({"restore.ndr.D", dict_.D});
  head_.collect("restore.head", p);
  for (std::size_t s = 0; s < cfg_.scales; ++s) {
    const std::string k = std::to_string(s);
    encoders_[s].collect("restore.enc" + k, p);
    if (s > 0) down_[s - 1].collect("restore.down" + k, p);
    junctions_[s].collect("restore.junction" + k, p);
    decoders_[s].collect("restore.dec" + k, p);
    if (s > 0) up_[s - 1].collect("restore.up" + k, p);
  }
  tail_.collect("restore.tail", p);
  return p;
}

DegradeModel::DegradeModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(mix_seed(cfg.seed, 23));
  head_ = Conv3::make(3, cfg.channels, rng);
  block_ = ResBlock::make(cfg.channels, rng);
  // The degradation network always injects U; only the DI form follows the variant.
  Variant inj = cfg.variant == Variant::no_dq ? Variant::full : cfg.variant;
  injector_ = Junction::make(inj, cfg.channels, cfg, rng, false);
  decoder_ = ResBlock::make(cfg.channels, rng);
  tail_ = Conv3::zeros(cfg.channels, 3);
}

Tensor DegradeModel::forward(const Tensor& y, const std::vector<Tensor>& u_list) const {
  check_image_batch(y, 1, "degrade_forward");
  if (u_list.empty()) throw DimensionError("degrade_forward: missing degradation list");
  const Tensor& u = u_list.front();
  if (u.rank() != 4 || u.dim(0) != y.dim(0) || u.dim(1) != y.dim(1) || u.dim(2) != y.dim(2) ||
      u.dim(3) != cfg_.channels) {
    throw DimensionError("degrade_forward: finest U " + shape_str(u.shape()) + " does not match image " +
                         shape_str(y.shape()));
  }
  const Tensor h = block_(head_(y));
  const Tensor injected = inject(injector_, h, u);
  const Tensor m = decoder_(injected);
  return ops::add(y, tail_(m));
}

ParamList DegradeModel::params() const {
  ParamList p;
  head_.collect("degrade.head", p);
  block_.collect("degrade.block", p);
  if (injector_.variant == Variant::no_di) injector_.plain_inject.collect("degrade.inject", p);
  else if (injector_.variant == Variant::no_cp) injector_.concat_mix.collect("degrade.mix", p);
  else injector_.di.collect("degrade.di", p);
  decoder_.collect("degrade.dec", p);
  tail_.collect("degrade.tail", p);
  return p;
}

}  // namespace ndr
