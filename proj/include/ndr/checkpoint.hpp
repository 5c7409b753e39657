#pragma once

// "NDRC" checkpoint container.
//
// Layout (all integers little-endian):
//   magic    4 bytes  "NDRC"
//   version  u32      kCheckpointVersion
//   count    u32      number of tensor records
//   record*  { u32 name_len, name (UTF-8), u32 rank, u64 dims[rank],
//              f32 payload[prod(dims)] }
//   meta_len u64
//   meta     UTF-8 JSON (run config echo, step counter, RNG state, ...)

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ndr/tensor.hpp"

namespace ndr {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public Error {
 public:
  using Error::Error;
};

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::vector<TensorRecord> records;
  nlohmann::json meta = nlohmann::json::object();

  void put(const std::string& name, const Tensor& t);
  void put(const std::string& name, const Shape& shape, const std::vector<double>& values);
  const TensorRecord& get(const std::string& name) const;
  bool has(const std::string& name) const;
  /// Copies a record into an existing tensor of identical shape.
  void load_into(const std::string& name, Tensor& t) const;
};

std::string serialize(const Checkpoint& ckpt);
Checkpoint deserialize(const std::string& bytes);

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ndr
