#include "ndr/metrics.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace ndr {

using nlohmann::json;

namespace {

void require_same_size(const Image& a, const Image& b, const char* who) {
  if (a.height != b.height || a.width != b.width) {
    throw DimensionError(std::string(who) + ": image sizes differ");
  }
}

std::vector<double> gaussian_window(std::size_t n, double sigma) {
  std::vector<double> g(n);
  const double mid = (static_cast<double>(n) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - mid;
    total += g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  for (double& v : g) v /= total;
  return g;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require_same_size(a, b, "psnr");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, const SsimParams& p) {
  require_same_size(a, b, "ssim");
  if (a.height < p.window || a.width < p.window) {
    throw DimensionError("ssim: image smaller than the " + std::to_string(p.window) + "px window");
  }
  const auto g = gaussian_window(p.window, p.sigma);
  const double c1 = p.k1 * p.k1, c2 = p.k2 * p.k2;
  const std::size_t oh = a.height - p.window + 1, ow = a.width - p.window + 1;
  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (std::size_t i = 0; i < p.window; ++i)
          for (std::size_t j = 0; j < p.window; ++j) {
            const double w = g[i] * g[j];
            const double va = a.at(y + i, x + j, c), vb = b.at(y + i, x + j, c);
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        const double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      }
  }
  return total / static_cast<double>(3 * oh * ow);
}

double MetricReport::mean_psnr_gain() const {
  if (by_kind.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& [kind, s] : by_kind) acc += s.psnr_restored - s.psnr_degraded;
  return acc / static_cast<double>(by_kind.size());
}

json MetricReport::to_json() const {
  auto summary = [](const KindSummary& s) {
    return json{{"count", s.count},
                {"psnr_restored", s.psnr_restored},
                {"ssim_restored", s.ssim_restored},
                {"psnr_degraded", s.psnr_degraded},
                {"ssim_degraded", s.ssim_degraded}};
  };
  json kinds = json::object();
  for (const auto& [kind, s] : by_kind) kinds[kind] = summary(s);
  return {{"overall", summary(overall)}, {"by_kind", kinds}, {"mean_psnr_gain", mean_psnr_gain()}};
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "id,kind,psnr_restored,ssim_restored,psnr_degraded,ssim_degraded\n";
  for (const auto& s : samples) {
    os << s.id << ',' << to_string(s.kind) << ',' << s.psnr_restored << ',' << s.ssim_restored << ','
       << s.psnr_degraded << ',' << s.ssim_degraded << '\n';
  }
  return os.str();
}

MetricReport evaluate(const RestoreModel* model, const std::vector<Sample>& samples, std::size_t batch) {
  MetricReport report;
  report.samples.resize(samples.size());
  NoGradGuard no_grad;
  for (std::size_t start = 0; start < samples.size(); start += batch) {
    const std::size_t end = std::min(samples.size(), start + batch);
    std::vector<Image> restored;
    if (model) {
      // Batch only equal-sized neighbours; fall back to one at a time otherwise.
      bool uniform = true;
      for (std::size_t i = start; i < end; ++i)
        uniform = uniform && samples[i].degraded.height == samples[start].degraded.height &&
                  samples[i].degraded.width == samples[start].degraded.width;
      if (uniform) {
        std::vector<const Image*> xs;
        for (std::size_t i = start; i < end; ++i) xs.push_back(&samples[i].degraded);
        const Tensor y_hat = model->forward(stack_images(xs), true).y_hat;
        for (std::size_t i = 0; i < xs.size(); ++i) restored.push_back(from_tensor(y_hat, i));
      } else {
        for (std::size_t i = start; i < end; ++i)
          restored.push_back(from_tensor(model->forward(to_tensor(samples[i].degraded), true).y_hat));
      }
    } else {
      for (std::size_t i = start; i < end; ++i) restored.push_back(samples[i].degraded);
    }
    for (std::size_t i = start; i < end; ++i) {
      const Sample& s = samples[i];
      SampleScore& sc = report.samples[i];
      sc.id = s.id;
      sc.kind = s.spec.kind;
      sc.psnr_restored = psnr(restored[i - start], s.clean);
      sc.ssim_restored = ssim(restored[i - start], s.clean);
      sc.psnr_degraded = psnr(s.degraded, s.clean);
      sc.ssim_degraded = ssim(s.degraded, s.clean);
    }
  }
  auto add = [](KindSummary& k, const SampleScore& s) {
    k.count += 1;
    k.psnr_restored += s.psnr_restored;
    k.ssim_restored += s.ssim_restored;
    k.psnr_degraded += s.psnr_degraded;
    k.ssim_degraded += s.ssim_degraded;
  };
  auto finish = [](KindSummary& k) {
    if (k.count == 0) return;
    const double n = static_cast<double>(k.count);
    k.psnr_restored /= n;
    k.ssim_restored /= n;
    k.psnr_degraded /= n;
    k.ssim_degraded /= n;
  };
  for (const auto& s : report.samples) {
    add(report.by_kind[to_string(s.kind)], s);
    add(report.overall, s);
  }
  for (auto& [kind, k] : report.by_kind) finish(k);
  finish(report.overall);
  return report;
}

json SeparationReport::to_json() const {
  json profiles_json = json::array();
  for (const auto& p : profiles) profiles_json.push_back({{"label", p.label}, {"mean_row", p.mean_row}});
  return {{"d_intra", d_intra}, {"d_inter", d_inter}, {"rho", rho}, {"capped", capped}, {"profiles", profiles_json}};
}

std::vector<std::vector<double>> mean_affinity_rows(const Tensor& affinity, std::size_t batch) {
  if (affinity.rank() != 2 || batch == 0 || affinity.dim(0) % batch) {
    throw DimensionError("mean_affinity_rows: affinity " + shape_str(affinity.shape()) + " for batch " +
                         std::to_string(batch));
  }
  const std::size_t per = affinity.dim(0) / batch, n = affinity.dim(1);
  std::vector<std::vector<double>> rows(batch, std::vector<double>(n, 0.0));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t p = 0; p < per; ++p)
      for (std::size_t j = 0; j < n; ++j) rows[b][j] += affinity[(b * per + p) * n + j];
    for (double& v : rows[b]) v /= static_cast<double>(per);
  }
  return rows;
}

SeparationReport affinity_separation(const std::vector<AffinityProfile>& profiles) {
  std::set<std::string> labels;
  for (const auto& p : profiles) labels.insert(p.label);
  if (labels.size() < 2) throw Error("affinity_separation: need at least two degradation classes");

  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (std::size_t j = i + 1; j < profiles.size(); ++j) {
      const auto& a = profiles[i].mean_row;
      const auto& b = profiles[j].mean_row;
      if (a.size() != b.size()) throw DimensionError("affinity_separation: profile lengths differ");
      double d2 = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
      const double d = std::sqrt(d2);
      if (profiles[i].label == profiles[j].label) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  SeparationReport r;
  r.profiles = profiles;
  r.d_intra = n_intra ? intra / static_cast<double>(n_intra) : 0.0;
  r.d_inter = inter / static_cast<double>(n_inter);
  if (r.d_intra < kIntraFloor && r.d_inter < kIntraFloor) {
    r.rho = 1.0;  // every profile coincides: no structure either way
  } else if (r.d_intra < kIntraFloor) {
    r.capped = true;
    r.rho = kRhoCap;
  } else {
    r.rho = std::min(kRhoCap, r.d_inter / r.d_intra);
  }
  return r;
}

SeparationReport affinity_separation(const RestoreModel& model, const std::vector<Sample>& samples) {
  if (model.config().variant == Variant::no_dq) throw Error("affinity_separation: model has no DQ module");
  NoGradGuard no_grad;
  std::vector<AffinityProfile> profiles;
  for (const Sample& s : samples) {
    const RestoreOutput out = model.forward(to_tensor(s.degraded));
    profiles.push_back({mean_affinity_rows(out.affinity.front(), 1).front(), to_string(s.spec.kind)});
  }
  return affinity_separation(profiles);
}

}  // namespace ndr
