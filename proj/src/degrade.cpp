#include "ndr/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace ndr {

using nlohmann::json;

std::string to_string(DegradationKind kind) {
  switch (kind) {
    case DegradationKind::noise: return "noise";
    case DegradationKind::rain: return "rain";
    case DegradationKind::haze: return "haze";
    case DegradationKind::downsample: return "downsample";
  }
  return "unknown";
}

DegradationKind parse_kind(const std::string& name) {
  for (DegradationKind k : kAllKinds)
    if (to_string(k) == name) return k;
  throw Error("unknown degradation kind '" + name + "'");
}

void DegradationSpec::validate() const {
  switch (kind) {
    case DegradationKind::noise: {
      const auto& p = std::get<NoiseParams>(params);
      if (p.sigma != 15.0 && p.sigma != 25.0 && p.sigma != 50.0) throw Error("noise sigma must be 15, 25 or 50");
      break;
    }
    case DegradationKind::rain: {
      const auto& p = std::get<RainParams>(params);
      if (!(p.density >= 0.0 && p.density <= 1.0)) throw Error("rain density must be in [0,1]");
      if (!(p.length >= 1.0 && p.length <= 64.0)) throw Error("rain streak length must be in [1,64]");
      if (!(p.intensity >= 0.0 && p.intensity <= 1.0)) throw Error("rain intensity must be in [0,1]");
      if (!(std::abs(p.angle_deg) <= 90.0)) throw Error("rain angle must be in [-90,90] degrees");
      break;
    }
    case DegradationKind::haze: {
      const auto& p = std::get<HazeParams>(params);
      if (!(p.transmission > 0.0 && p.transmission <= 1.0)) throw Error("haze transmission must be in (0,1]");
      if (!(p.airlight >= 0.7 && p.airlight <= 1.0)) throw Error("haze airlight must be in [0.7,1]");
      break;
    }
    case DegradationKind::downsample: {
      const auto& p = std::get<DownsampleParams>(params);
      if (p.scale != 2) throw Error("downsample scale must be 2");
      break;
    }
  }
}

json DegradationSpec::params_json() const {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NoiseParams>) return {{"sigma", p.sigma}};
        else if constexpr (std::is_same_v<P, RainParams>)
          return {{"density", p.density}, {"angle_deg", p.angle_deg}, {"length", p.length}, {"intensity", p.intensity}};
        else if constexpr (std::is_same_v<P, HazeParams>)
          return {{"transmission", p.transmission}, {"airlight", p.airlight}};
        else return {{"scale", p.scale}};
      },
      params);
}

DegradationSpec DegradationSpec::from_json(DegradationKind kind, const json& j, std::uint64_t seed) {
  DegradationSpec s;
  s.kind = kind;
  s.seed = seed;
  switch (kind) {
    case DegradationKind::noise: s.params = NoiseParams{j.at("sigma").get<double>()}; break;
    case DegradationKind::rain:
      s.params = RainParams{j.at("density").get<double>(), j.at("angle_deg").get<double>(),
                            j.at("length").get<double>(), j.at("intensity").get<double>()};
      break;
    case DegradationKind::haze:
      s.params = HazeParams{j.at("transmission").get<double>(), j.at("airlight").get<double>()};
      break;
    case DegradationKind::downsample: s.params = DownsampleParams{j.at("scale").get<std::size_t>()}; break;
  }
  s.validate();
  return s;
}

Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error("add_gaussian_noise: sigma must be >= 0");
  Image out = img;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  const double s = sigma / 255.0;
  for (double& v : out.values) v += rng.normal(0.0, s);
  out.clamp();
  return out;
}

std::vector<std::pair<int, int>> streak_kernel(const RainParams& p) {
  const double theta = p.angle_deg * std::numbers::pi / 180.0;
  const int taps = std::max(1, static_cast<int>(std::lround(p.length)));
  std::set<std::pair<int, int>> offsets;
  for (int i = 0; i < taps; ++i) {
    const double s = i - (taps - 1) / 2.0;
    offsets.emplace(static_cast<int>(std::lround(s * std::cos(theta))),
                    static_cast<int>(std::lround(s * std::sin(theta))));
  }
  return {offsets.begin(), offsets.end()};
}

std::vector<double> rain_layer(std::size_t height, std::size_t width, const RainParams& p, std::uint64_t seed) {
  DegradationSpec{DegradationKind::rain, p, seed}.validate();
  std::vector<double> layer(height * width, 0.0);
  if (p.density == 0.0 || p.intensity == 0.0) return layer;
  const auto kernel = streak_kernel(p);
  Rng rng(seed);
  // Sparse uniform seeds convolved with the line kernel.
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      if (rng.uniform() >= p.density) continue;
      const double strength = rng.uniform(0.5, 1.0);
      for (auto [dy, dx] : kernel) {
        const long yy = static_cast<long>(y) + dy, xx = static_cast<long>(x) + dx;
        if (yy < 0 || xx < 0 || yy >= static_cast<long>(height) || xx >= static_cast<long>(width)) continue;
        layer[yy * width + xx] += strength;
      }
    }
  for (double& v : layer) v = p.intensity * std::min(v, 1.0);
  return layer;
}

Image add_rain_streaks(const Image& img, const RainParams& p, std::uint64_t seed) {
  const auto layer = rain_layer(img.height, img.width, p, seed);
  Image out = img;
  for (std::size_t i = 0; i < layer.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c) out.values[i * 3 + c] += layer[i];
  out.clamp();
  return out;
}

Image apply_haze(const Image& img, double transmission, double airlight, bool allow_opaque) {
  const bool t_ok = allow_opaque ? (transmission >= 0.0 && transmission <= 1.0)
                                 : (transmission > 0.0 && transmission <= 1.0);
  if (!t_ok) throw Error("apply_haze: transmission out of range");
  if (!(airlight >= 0.0 && airlight <= 1.0)) throw Error("apply_haze: airlight out of range");
  Image out = img;
  for (double& v : out.values) v = v * transmission + airlight * (1.0 - transmission);
  out.clamp();
  return out;
}

Image downsample(const Image& img, std::size_t scale) {
  if (scale == 0 || img.height % scale || img.width % scale) {
    throw DimensionError("downsample: image dimensions not divisible by scale");
  }
  Image out(img.height / scale, img.width / scale);
  const double inv = 1.0 / static_cast<double>(scale * scale);
  for (std::size_t y = 0; y < out.height; ++y)
    for (std::size_t x = 0; x < out.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < scale; ++dy)
          for (std::size_t dx = 0; dx < scale; ++dx) acc += img.at(y * scale + dy, x * scale + dx, c);
        out.at(y, x, c) = acc * inv;
      }
  return out;
}

Image decimate(const Image& img, std::size_t scale) {
  if (scale == 0 || img.height % scale || img.width % scale) {
    throw DimensionError("decimate: image dimensions not divisible by scale");
  }
  Image out(img.height / scale, img.width / scale);
  for (std::size_t y = 0; y < out.height; ++y)
    for (std::size_t x = 0; x < out.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y * scale, x * scale, c);
  return out;
}

Image procedural_pattern(std::size_t height, std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  Image img(height, width);
  const double hh = static_cast<double>(height), ww = static_cast<double>(width);

  // Linear gradient between two colors.
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.uniform(0.1, 0.9);
    c1[c] = rng.uniform(0.1, 0.9);
  }
  const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(ang), gy = std::sin(ang);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double t = 0.5 + 0.5 * ((x / ww - 0.5) * gx + (y / hh - 0.5) * gy) * 1.4;
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = c0[c] + (c1[c] - c0[c]) * std::clamp(t, 0.0, 1.0);
    }

  // Smooth texture: bilinear value noise on a coarse lattice.
  const std::size_t cells = 4;
  std::vector<double> lattice((cells + 1) * (cells + 1));
  for (double& v : lattice) v = rng.uniform(-1.0, 1.0);
  const double amp = rng.uniform(0.03, 0.12);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double fy = y / hh * cells, fx = x / ww * cells;
      const std::size_t iy = static_cast<std::size_t>(fy), ix = static_cast<std::size_t>(fx);
      const double ty = fy - iy, tx = fx - ix;
      auto L = [&](std::size_t a, std::size_t b) { return lattice[a * (cells + 1) + b]; };
      const double n = (1 - ty) * ((1 - tx) * L(iy, ix) + tx * L(iy, ix + 1)) +
                       ty * ((1 - tx) * L(iy + 1, ix) + tx * L(iy + 1, ix + 1));
      for (int c = 0; c < 3; ++c) img.at(y, x, c) += amp * n;
    }

  // One to three filled shapes.
  const int shapes = 1 + static_cast<int>(rng.index(3));
  for (int s = 0; s < shapes; ++s) {
    double col[3];
    for (double& c : col) c = rng.uniform(0.0, 1.0);
    const double cy = rng.uniform(0.0, hh), cx = rng.uniform(0.0, ww);
    const double ry = rng.uniform(0.1, 0.35) * hh, rx = rng.uniform(0.1, 0.35) * ww;
    const bool ellipse = rng.uniform() < 0.5;
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const double dy = (y + 0.5 - cy) / ry, dx = (x + 0.5 - cx) / rx;
        const bool inside = ellipse ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (inside)
          for (int c = 0; c < 3; ++c) img.at(y, x, c) = col[c];
      }
  }
  img.clamp();
  return img;
}

Sample make_sample(std::size_t id, std::size_t size, const DegradationSpec& spec) {
  spec.validate();
  Sample s;
  s.id = id;
  s.spec = spec;
  s.size = size;
  const std::uint64_t pattern_seed = mix_seed(spec.seed, 0);
  const std::uint64_t degrade_seed = mix_seed(spec.seed, 1);
  switch (spec.kind) {
    case DegradationKind::noise:
      s.clean = procedural_pattern(size, size, pattern_seed);
      s.degraded = add_gaussian_noise(s.clean, std::get<NoiseParams>(spec.params).sigma, degrade_seed);
      break;
    case DegradationKind::rain:
      s.clean = procedural_pattern(size, size, pattern_seed);
      s.degraded = add_rain_streaks(s.clean, std::get<RainParams>(spec.params), degrade_seed);
      break;
    case DegradationKind::haze: {
      const auto& p = std::get<HazeParams>(spec.params);
      s.clean = procedural_pattern(size, size, pattern_seed);
      s.degraded = apply_haze(s.clean, p.transmission, p.airlight);
      break;
    }
    case DegradationKind::downsample: {
      const std::size_t f = std::get<DownsampleParams>(spec.params).scale;
      const Image source = procedural_pattern(size * f, size * f, pattern_seed);
      s.clean = downsample(source, f);
      s.degraded = decimate(source, f);
      break;
    }
  }
  return s;
}

void DatasetConfig::validate() const {
  if (count == 0) throw Error("dataset count must be positive");
  if (size < 8 || size % 2) throw Error("dataset image size must be even and >= 8");
  double total = 0.0;
  for (double w : mixture) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("mixture weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw Error("mixture weights must not all be zero");
  if (mixture[0] > 0.0) {
    if (noise_sigmas.empty()) throw Error("noise_sigmas must not be empty");
    for (double s : noise_sigmas)
      if (s != 15.0 && s != 25.0 && s != 50.0) throw Error("noise_sigmas entries must be 15, 25 or 50");
  }
}

DegradationSpec draw_spec(DegradationKind kind, const DatasetConfig& cfg, Rng& rng) {
  DegradationSpec spec;
  spec.kind = kind;
  switch (kind) {
    case DegradationKind::noise:
      spec.params = NoiseParams{cfg.noise_sigmas[rng.index(cfg.noise_sigmas.size())]};
      break;
    case DegradationKind::rain:
      spec.params = RainParams{rng.uniform(0.01, 0.04), rng.uniform(-25.0, 25.0),
                               static_cast<double>(5 + rng.index(7)), rng.uniform(0.3, 0.6)};
      break;
    case DegradationKind::haze:
      spec.params = HazeParams{rng.uniform(0.45, 0.8), rng.uniform(0.7, 1.0)};
      break;
    case DegradationKind::downsample: spec.params = DownsampleParams{2}; break;
  }
  spec.seed = rng.next_u64();
  return spec;
}

std::vector<Sample> make_dataset(const DatasetConfig& cfg) {
  cfg.validate();
  double total = 0.0;
  for (double w : cfg.mixture) total += w;
  std::vector<DegradationSpec> specs(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    Rng rng(mix_seed(cfg.seed, i));
    double pick = rng.uniform() * total;
    std::size_t chosen = cfg.mixture.size();
    for (std::size_t k = 0; k < cfg.mixture.size(); ++k) {
      if (cfg.mixture[k] == 0.0) continue;
      chosen = k;  // last nonzero kind absorbs rounding at the top end
      if (pick < cfg.mixture[k]) break;
      pick -= cfg.mixture[k];
    }
    specs[i] = draw_spec(kAllKinds[chosen], cfg, rng);
  }
  std::vector<Sample> samples(cfg.count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(cfg.count); ++i) {
    samples[i] = make_sample(static_cast<std::size_t>(i), cfg.size, specs[i]);
  }
  return samples;
}

std::vector<Sample> make_heldout(const DatasetConfig& cfg, std::size_t per_kind, std::uint64_t seed) {
  std::vector<DegradationSpec> specs;
  for (std::size_t k = 0; k < kAllKinds.size(); ++k) {
    if (cfg.mixture[k] <= 0.0) continue;
    for (std::size_t i = 0; i < per_kind; ++i) {
      Rng rng(mix_seed(seed, k * 100003 + i));
      specs.push_back(draw_spec(kAllKinds[k], cfg, rng));
    }
  }
  std::vector<Sample> samples(specs.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(specs.size()); ++i) {
    samples[i] = make_sample(static_cast<std::size_t>(i), cfg.size, specs[i]);
  }
  return samples;
}

namespace {

std::string sample_name(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.png", id);
  return buf;
}

json read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open manifest " + path.string());
  json j = json::parse(is);
  if (!j.is_array()) throw Error("manifest " + path.string() + " is not a JSON array");
  return j;
}

}  // namespace

void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "clean");
  fs::create_directories(dir / "degraded");
  json manifest = json::array();
  for (const Sample& s : samples) {
    const std::string name = sample_name(s.id);
    save_image(s.clean, dir / "clean" / name);
    save_image(s.degraded, dir / "degraded" / name);
    manifest.push_back({{"id", s.id},
                        {"kind", to_string(s.spec.kind)},
                        {"params", s.spec.params_json()},
                        {"seed", s.spec.seed},
                        {"size", s.size},
                        {"clean_path", "clean/" + name},
                        {"degraded_path", "degraded/" + name}});
  }
  std::ofstream os(dir / "manifest.json");
  os << manifest.dump(2) << '\n';
  if (!os) throw Error("failed writing manifest in " + dir.string());
}

std::vector<Sample> load_dataset(const std::filesystem::path& dir) {
  const json manifest = read_manifest(dir / "manifest.json");
  std::vector<Sample> samples;
  for (const json& e : manifest) {
    Sample s;
    s.id = e.at("id").get<std::size_t>();
    s.size = e.at("size").get<std::size_t>();
    s.spec = DegradationSpec::from_json(parse_kind(e.at("kind")), e.at("params"), e.at("seed").get<std::uint64_t>());
    s.clean = load_image(dir / e.at("clean_path").get<std::string>());
    s.degraded = load_image(dir / e.at("degraded_path").get<std::string>());
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<Sample> regenerate_from_manifest(const std::filesystem::path& manifest_path) {
  const json manifest = read_manifest(manifest_path);
  std::vector<Sample> samples;
  for (const json& e : manifest) {
    const auto spec = DegradationSpec::from_json(parse_kind(e.at("kind")), e.at("params"),
                                                 e.at("seed").get<std::uint64_t>());
    samples.push_back(make_sample(e.at("id").get<std::size_t>(), e.at("size").get<std::size_t>(), spec));
  }
  return samples;
}

}  // namespace ndr
