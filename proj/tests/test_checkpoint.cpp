#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ndr/checkpoint.hpp"
#include "ndr/train.hpp"
#include "support.hpp"

namespace ndr {
namespace {

namespace fs = std::filesystem;

Checkpoint sample_checkpoint() {
  Checkpoint c;
  Rng rng(1);
  c.put("a", testing::random_tensor({2, 3}, rng));
  c.put("scalar", Shape{}, {0.25});
  c.put("empty", Shape{0}, {});
  c.meta = {{"step", 7}, {"note", "ünïcode"}};
  return c;
}

TEST(Checkpoint, SerializeRoundTripIsByteIdentical) {
  const std::string bytes = serialize(sample_checkpoint());
  EXPECT_EQ(bytes.substr(0, 4), "NDRC");
  const Checkpoint back = deserialize(bytes);
  EXPECT_EQ(serialize(back), bytes);
  EXPECT_EQ(back.meta["step"], 7);
  EXPECT_EQ(back.get("a").shape, (Shape{2, 3}));
  EXPECT_EQ(back.get("scalar").values, std::vector<float>{0.25f});
}

TEST(Checkpoint, FileRoundTripOfTrainedSystem) {
  TrainingConfig cfg;
  cfg.model.channels = 4;
  cfg.model.feature_dim = 4;
  cfg.model.slots = 3;
  cfg.model.rank = 2;
  DatasetConfig d;
  d.count = 2;
  d.size = 32;
  cfg.batch_size = 2;
  Trainer t(cfg, make_dataset(d), {});
  t.step();
  const fs::path dir = fs::temp_directory_path() / "ndr_ckpt";
  fs::create_directories(dir);
  save_checkpoint(t.checkpoint(), dir / "a.ndrc");
  save_checkpoint(load_checkpoint(dir / "a.ndrc"), dir / "b.ndrc");
  std::ifstream a(dir / "a.ndrc", std::ios::binary), b(dir / "b.ndrc", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);

  const NdrSystem loaded = load_system(load_checkpoint(dir / "a.ndrc"));
  const auto& orig = t.system().params;
  ASSERT_EQ(loaded.params.size(), orig.size());
  for (std::size_t i = 0; i < orig.size(); ++i) {
    EXPECT_EQ(loaded.params[i].name, orig[i].name);
    for (std::size_t k = 0; k < orig[i].tensor.numel(); ++k)
      EXPECT_EQ(loaded.params[i].tensor[k], static_cast<double>(static_cast<float>(orig[i].tensor[k])));
  }
}

TEST(Checkpoint, BadMagicIsIncompatible) {
  std::string bytes = serialize(sample_checkpoint());
  bytes[0] = 'X';
  try {
    deserialize(bytes);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("incompatible checkpoint"), std::string::npos);
  }
}

TEST(Checkpoint, BadVersionIsIncompatible) {
  std::string bytes = serialize(sample_checkpoint());
  bytes[4] = static_cast<char>(kCheckpointVersion + 1);
  try {
    deserialize(bytes);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("incompatible checkpoint"), std::string::npos);
  }
}

TEST(Checkpoint, TruncationIsDetected) {
  const std::string bytes = serialize(sample_checkpoint());
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1})
    EXPECT_THROW(deserialize(bytes.substr(0, cut)), CheckpointError) << cut;
  EXPECT_THROW(deserialize(bytes + "x"), CheckpointError);
}

TEST(Checkpoint, MissingRecordAndShapeMismatch) {
  const Checkpoint c = sample_checkpoint();
  EXPECT_FALSE(c.has("b"));
  EXPECT_THROW(c.get("b"), CheckpointError);
  Tensor wrong(Shape{3, 2});
  EXPECT_THROW(c.load_into("a", wrong), CheckpointError);
}

TEST(Checkpoint, MissingFile) {
  EXPECT_THROW(load_checkpoint("/nonexistent/x.ndrc"), CheckpointError);
}

}  // namespace
}  // namespace ndr
