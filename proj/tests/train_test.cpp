// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "srmnet/srmnet.hpp"
#include "test_util.hpp"

namespace srmnet {
namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.patch_size = 16;
  c.patches_per_image = 4;
  c.base_channels = 4;
  c.scales = 3;
  c.blocks_per_srb = 1;
  c.batch_size = 2;
  c.iterations = 12;
  c.learning_rate = 1e-3;
  c.seed = 9;
  c.checkpoint_path.clear();
  return c;
}

std::vector<Tensor<float>> small_pool(std::size_t count, std::size_t size) {
  std::vector<Tensor<float>> pool;
  for (std::size_t i = 0; i < count; ++i) pool.push_back(image_to_tensor(synthetic_image(size, size, 40 + i)));
  return pool;
}

TEST(TrainConfig, Defaults) {
  const TrainConfig c;
  EXPECT_EQ(c.sigma_min, 5.0);
  EXPECT_EQ(c.sigma_max, 50.0);
  EXPECT_EQ(c.learning_rate, 2e-4);
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.adam_eps, 1e-8);
  EXPECT_NO_THROW(c.validate());
}

TEST(TrainConfig, ParsesEveryKey) {
  const auto j = nlohmann::json::parse(R"({
    "data_dir": "imgs", "patch_size": 32, "patches_per_image": 3, "sigma_min": 10, "sigma_max": 20,
    "base_channels": 8, "scales": 3, "blocks_per_srb": 1, "epsilon": 0.002, "loss_variant": "per_element",
    "learning_rate": 0.001, "beta1": 0.8, "beta2": 0.99, "batch_size": 2, "iterations": 5, "seed": 3,
    "checkpoint_path": "m.bin", "log_path": "l.csv", "skff_reduction": 4, "global_residual": false,
    "adam_eps": 1e-7, "snapshot_every": 2})");
  const TrainConfig c = train_config_from_json(j);
  EXPECT_EQ(c.data_dir, "imgs");
  EXPECT_EQ(c.patch_size, 32u);
  EXPECT_EQ(c.sigma_min, 10.0);
  EXPECT_EQ(c.loss_variant, CharbonnierVariant::PerElement);
  EXPECT_EQ(c.model().epsilon, 0.002);
  EXPECT_FALSE(c.model().global_residual);
  EXPECT_EQ(c.model().skff_reduction, 4u);
  EXPECT_EQ(c.adam().learning_rate, 0.001);
  EXPECT_EQ(c.log_path, "l.csv");
  EXPECT_EQ(c.snapshot_every, 2u);
}

TEST(TrainConfig, RejectsInvalidDocuments) {
  for (const char* text : {R"({"sigma_min": 30, "sigma_max": 20})", R"({"patch_size": 20, "scales": 4})",
                           R"({"iterations": 0})", R"({"learning_rat": 0.1})", R"({"patch_size": "big"})",
                           R"({"loss_variant": "l2"})", R"({"scales": 5})", R"([1, 2])"}) {
    expect_error(ErrorCode::ConfigInvalid, [&] { train_config_from_json(nlohmann::json::parse(text)); });
  }
  TempDir dir("cfg");
  expect_error(ErrorCode::ConfigInvalid, [&] { load_train_config(dir / "missing.json"); });
  write_text_file(dir / "bad.json", "{ not json");
  expect_error(ErrorCode::ConfigInvalid, [&] { load_train_config(dir / "bad.json"); });
}

TEST(Training, BatchesAreSeededPerIteration) {
  TrainConfig c = small_config();
  const auto pool = small_pool(3, 16);
  const TrainBatch a = make_train_batch(c, pool, 4);
  const TrainBatch b = make_train_batch(c, pool, 4);
  EXPECT_EQ(a.clean, b.clean);
  EXPECT_EQ(a.noisy, b.noisy);
  EXPECT_NE(make_train_batch(c, pool, 5).noisy, a.noisy);
  EXPECT_EQ(a.clean.shape(), (Shape{2, 3, 16, 16}));
  ASSERT_EQ(a.sigmas.size(), 2u);
  for (double s : a.sigmas) {
    EXPECT_GE(s, c.sigma_min);
    EXPECT_LE(s, c.sigma_max);
  }
}

TEST(Training, IdenticalRunsGiveIdenticalLogs) {
  const TrainConfig c = small_config();
  const auto pool = small_pool(3, 16);
  const TrainResult a = train_on_patches(c, pool);
  const TrainResult b = train_on_patches(c, pool);
  ASSERT_EQ(a.log.size(), c.iterations);
  EXPECT_EQ(train_log_csv(a.log), train_log_csv(b.log));
  EXPECT_TRUE(a.params.values_equal(b.params));
  EXPECT_EQ(train_log_csv(a.log).rfind("iteration,loss,psnr\n1,", 0), 0u);
}

TEST(Training, PrefetchWorkerDoesNotChangeResults) {
  const TrainConfig c = small_config();
  const auto pool = small_pool(3, 16);
  set_num_threads(1);
  const TrainResult serial = train_on_patches(c, pool);
  set_num_threads(3);
  const TrainResult threaded = train_on_patches(c, pool);
  set_num_threads(1);
  EXPECT_EQ(train_log_csv(serial.log), train_log_csv(threaded.log));
  EXPECT_TRUE(serial.params.values_equal(threaded.params));
}

TEST(Training, NonFiniteLossAborts) {
  const TrainConfig c = small_config();
  auto pool = small_pool(1, 16);
  pool[0][7] = std::numeric_limits<float>::quiet_NaN();
  expect_error(ErrorCode::NonFiniteLoss, [&] { train_on_patches(c, pool); });
}

TEST(Training, PoolValidation) {
  TrainConfig c = small_config();
  expect_error(ErrorCode::EmptyDataset, [&] { train_on_patches(c, {}); });
  expect_error(ErrorCode::ShapeMismatch, [&] { train_on_patches(c, small_pool(1, 24)); });
  TempDir dir("pool");
  c.data_dir = dir.path().string();
  expect_error(ErrorCode::EmptyDataset, [&] { build_patch_pool(c); });
  write_synthetic_set(dir.path(), 2, 20, 1);
  EXPECT_EQ(build_patch_pool(c).size(), 2 * c.patches_per_image);
}

TEST(Training, SnapshotsAreWholeModelFiles) {
  TempDir dir("snap");
  TrainConfig c = small_config();
  c.iterations = 4;
  c.snapshot_every = 2;
  c.checkpoint_path = (dir / "m.bin").string();
  const TrainResult r = train_on_patches(c, small_pool(2, 16));
  EXPECT_EQ(load_model(c.checkpoint_path + ".iter2").config, c.model());
  EXPECT_TRUE(load_model(c.checkpoint_path + ".iter4").params.values_equal(r.params));
}

TEST(Training, OverfitsOnePatch) {
  TrainConfig c;
  c.patch_size = 32;
  c.sigma_min = c.sigma_max = 25.0;
  c.base_channels = 8;
  c.blocks_per_srb = 2;
  c.iterations = 200;
  c.learning_rate = 1e-3;
  c.seed = 0;
  const Tensor<float> clean = image_to_tensor(synthetic_image(32, 32, 7));
  const TrainResult r = train_on_patches(c, {clean});
  ASSERT_EQ(r.log.size(), 200u);
  EXPECT_LT(r.log.back().loss, r.log.front().loss);

  std::vector<double> smoothed;
  for (std::size_t i = 0; i + 20 <= r.log.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = i; k < i + 20; ++k) acc += r.log[k].loss;
    smoothed.push_back(acc / 20.0);
  }
  for (std::size_t i = 1; i < smoothed.size(); ++i) EXPECT_LE(smoothed[i], smoothed[i - 1]) << "window " << i;

  const NoisySample<float> probe = add_awgn(clean, 25.0, 12345);
  const double before = psnr(clamp_unit(probe.noisy), clean);
  const double after = psnr(clamp_unit(denoise(r.params, c.model(), probe.noisy)), clean);
  EXPECT_GE(after, before + 3.0);
}

TEST(Inference, OddSizesRoundTripShape) {
  const MnetConfig config = small_config().model();
  const ModelParams<float> params = init_params<float>(config, 1);
  Rng rng(2);
  const Tensor<float> noisy = random_tensor<float>({1, 3, 37, 53}, rng);
  EXPECT_EQ(denoise(params, config, noisy).shape(), noisy.shape());
  const ModelParams<float> zero = zero_params<float>(build_mnet_graph(config));
  EXPECT_EQ(denoise(zero, config, noisy), noisy);
}

class EvalTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (std::size_t i = 0; i < 5; ++i) images.push_back(synthetic_image(24, 24, 60 + i));
  }
  MnetConfig config = small_config().model();
  std::vector<ImageBuffer> images;
};

TEST_F(EvalTest, HarderNoiseScoresLower) {
  const ModelParams<float> params = init_params<float>(config, 3);
  const EvalReport r = evaluate(params, config, images, {10.0, 50.0}, 0);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_GT(r.rows[0].psnr, r.rows[1].psnr);
  EXPECT_GT(r.rows[0].ssim, r.rows[1].ssim);
}

TEST_F(EvalTest, IdentityModelWithoutNoise) {
  const ModelParams<float> zero = zero_params<float>(build_mnet_graph(config));
  const EvalReport r = evaluate(zero, config, images, {0.0}, 0);
  EXPECT_EQ(r.rows[0].psnr, std::numeric_limits<double>::infinity());
  EXPECT_NEAR(r.rows[0].ssim, 1.0, 1e-12);
  const auto j = eval_to_json(r);
  EXPECT_EQ(j["results"][0]["psnr"], "inf");
  EXPECT_EQ(eval_from_json(j).rows[0].psnr, std::numeric_limits<double>::infinity());
}

TEST_F(EvalTest, JsonListsRequestedSigmasAndRoundTrips) {
  const ModelParams<float> params = init_params<float>(config, 4);
  const EvalReport r = evaluate(params, config, images, {10.0, 30.0, 50.0}, 5);
  const auto j = eval_to_json(r);
  EXPECT_EQ(j["sigmas"], nlohmann::ordered_json::parse("[10.0, 30.0, 50.0]"));
  EXPECT_EQ(j["images"], 5);
  const EvalReport back = eval_from_json(nlohmann::ordered_json::parse(j.dump(2)));
  EXPECT_EQ(format_eval_table(back), format_eval_table(r));
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].psnr, r.rows[i].psnr);
    EXPECT_EQ(back.rows[i].ssim, r.rows[i].ssim);
  }
  EXPECT_EQ(eval_to_json(evaluate(params, config, images, {10.0, 30.0, 50.0}, 5)).dump(), j.dump());
  expect_error(ErrorCode::EmptyDataset, [&] { evaluate(params, config, {}, {10.0}, 0); });
}

TEST(Gradcheck, TinyModelGuard) {
  MnetConfig big;
  big.base_channels = 32;
  expect_error(ErrorCode::ModelTooLarge, [&] { gradcheck_model(big, 16, 0, {}); });
}

}  // namespace
}  // namespace srmnet
