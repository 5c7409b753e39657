#include <gtest/gtest.h>

#include "ndr/config.hpp"

namespace ndr {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, EmptyObjectGivesDefaults) {
  const RunConfig c = parse_run_config("{}");
  EXPECT_EQ(c.train.lambda, 1.0);
  EXPECT_EQ(c.train.lr, 1e-4);
  EXPECT_EQ(c.train.steps, 2000u);
  EXPECT_EQ(c.train.model.channels, 16u);
  EXPECT_EQ(c.train.model.feature_dim, 32u);
  EXPECT_EQ(c.train.model.slots, 8u);
  EXPECT_EQ(c.train.model.rank, 4u);
  EXPECT_EQ(c.output_dir, "runs/default");
}

TEST(Config, FieldsAreRead) {
  const RunConfig c = parse_run_config(R"({
    "seed": 5,
    "train": {"lambda": 0.5, "steps": 10, "alt_steps": 3},
    "model": {"M": 16, "N": 4, "K": 2, "variant": "no_cp"},
    "dataset": {"count": 12, "mixture": {"noise": 1, "rain": 0, "haze": 0}, "noise_sigmas": [15, 50]},
    "output": {"dir": "out/x"}
  })");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.train.seed, 5u);
  EXPECT_EQ(c.train.model.seed, 5u);
  EXPECT_EQ(c.dataset.seed, 5u);
  EXPECT_EQ(c.train.lambda, 0.5);
  EXPECT_EQ(c.train.alt_steps, 3u);
  EXPECT_EQ(c.train.model.feature_dim, 16u);
  EXPECT_EQ(c.train.model.variant, Variant::no_cp);
  EXPECT_EQ(c.dataset.count, 12u);
  EXPECT_EQ(c.dataset.mixture[1], 0.0);
  EXPECT_EQ(c.dataset.noise_sigmas, (std::vector<double>{15, 50}));
  EXPECT_EQ(c.output_dir, "out/x");
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_EQ(error_of(R"({"train": {"stepz": 3}})"), "config: unknown key 'train.stepz'");
  EXPECT_EQ(error_of(R"({"verbose": true})"), "config: unknown key 'verbose'");
  EXPECT_EQ(error_of(R"({"dataset": {"mixture": {"snow": 1}}})"), "config: unknown key 'dataset.mixture.snow'");
}

TEST(Config, TypeErrorsNameTheKey) {
  EXPECT_NE(error_of(R"({"train": {"lr": "fast"}})").find("'train.lr'"), std::string::npos);
  EXPECT_NE(error_of(R"({"train": {"steps": -1}})").find("'train.steps'"), std::string::npos);
  EXPECT_NE(error_of(R"({"model": {"variant": "tiny"}})").find("'model.variant'"), std::string::npos);
}

TEST(Config, MalformedJsonNamesTheLine) {
  const std::string e = error_of("{\n  \"seed\": 1,\n  \"train\": {,}\n}");
  EXPECT_NE(e.find("line 3"), std::string::npos) << e;
}

TEST(Config, SemanticValidation) {
  EXPECT_FALSE(error_of(R"({"dataset": {"noise_sigmas": [30]}})").empty());
  EXPECT_FALSE(error_of(R"({"dataset": {"mixture": {"noise": 0, "rain": 0, "haze": 0}}})").empty());
  EXPECT_FALSE(error_of(R"({"train": {"crop_size": 64}})").empty());
  EXPECT_FALSE(error_of(R"({"train": {"lr": 0}})").empty());
}

TEST(Config, ResolvedJsonReparsesToSameConfig) {
  const RunConfig c = parse_run_config(R"({"seed": 3, "train": {"lambda": 1.5}, "model": {"variant": "no_dq"}})");
  const RunConfig again = parse_run_config(c.to_json().dump());
  EXPECT_EQ(again.to_json(), c.to_json());
}

}  // namespace
}  // namespace ndr
