#include "ndr/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ndr {

namespace {

constexpr char kMagic[4] = {'N', 'D', 'R', 'C'};

template <class T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>, std::uint32_t, T>>;
  U bits;
  static_assert(sizeof(U) == sizeof(T));
  std::memcpy(&bits, &value, sizeof bits);
  for (std::size_t i = 0; i < sizeof bits; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>, std::uint32_t, T>>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof bits; ++i)
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof bits;
    T value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("incompatible checkpoint: truncated data");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Checkpoint::put(const std::string& name, const Tensor& t) {
  put(name, t.shape(), std::vector<double>(t.data().begin(), t.data().end()));
}

void Checkpoint::put(const std::string& name, const Shape& shape, const std::vector<double>& values) {
  if (has(name)) throw CheckpointError("duplicate checkpoint record '" + name + "'");
  TensorRecord r{name, shape, std::vector<float>(values.size())};
  std::transform(values.begin(), values.end(), r.values.begin(), [](double v) { return static_cast<float>(v); });
  records.push_back(std::move(r));
}

bool Checkpoint::has(const std::string& name) const {
  return std::any_of(records.begin(), records.end(), [&](const TensorRecord& r) { return r.name == name; });
}

const TensorRecord& Checkpoint::get(const std::string& name) const {
  for (const auto& r : records)
    if (r.name == name) return r;
  throw CheckpointError("checkpoint has no record '" + name + "'");
}

void Checkpoint::load_into(const std::string& name, Tensor& t) const {
  const TensorRecord& r = get(name);
  if (r.shape != t.shape()) {
    throw CheckpointError("record '" + name + "' has shape " + shape_str(r.shape) + ", expected " +
                          shape_str(t.shape()));
  }
  auto dst = t.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<double>(r.values[i]);
}

std::string serialize(const Checkpoint& ckpt) {
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.records.size()));
  for (const auto& r : ckpt.records) {
    if (numel_of(r.shape) != r.values.size()) throw CheckpointError("record '" + r.name + "' shape/payload mismatch");
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out += r.name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.shape.size()));
    for (std::size_t d : r.shape) put_le<std::uint64_t>(out, d);
    for (float v : r.values) put_le<float>(out, v);
  }
  const std::string meta = ckpt.meta.dump();
  put_le<std::uint64_t>(out, meta.size());
  out += meta;
  return out;
}

Checkpoint deserialize(const std::string& bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || bytes.compare(0, 4, kMagic, 4) != 0) {
    throw CheckpointError("incompatible checkpoint: bad magic (expected \"NDRC\")");
  }
  in.take(4);
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("incompatible checkpoint: format version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  }
  Checkpoint ckpt;
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord r;
    r.name = in.take(in.get<std::uint32_t>());
    const auto rank = in.get<std::uint32_t>();
    for (std::uint32_t d = 0; d < rank; ++d) r.shape.push_back(static_cast<std::size_t>(in.get<std::uint64_t>()));
    const std::size_t n = numel_of(r.shape);
    if (n > bytes.size()) throw CheckpointError("incompatible checkpoint: implausible record size");
    r.values.resize(n);
    for (float& v : r.values) v = in.get<float>();
    ckpt.records.push_back(std::move(r));
  }
  const auto meta_len = in.get<std::uint64_t>();
  ckpt.meta = nlohmann::json::parse(in.take(static_cast<std::size_t>(meta_len)));
  if (!in.done()) throw CheckpointError("incompatible checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw CheckpointError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return deserialize(ss.str());
}

}  // namespace ndr
