// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "srmnet/data.hpp"
#include "srmnet/gradcheck.hpp"
#include "srmnet/loss.hpp"
#include "srmnet/metrics.hpp"
#include "srmnet/model.hpp"
#include "srmnet/optim.hpp"
#include "srmnet/serialize.hpp"

namespace srmnet {

/// Training run description; mirrors the JSON config file key for key.
struct TrainConfig {
  std::string data_dir;
  std::size_t patch_size = 64;
  std::size_t patches_per_image = 16;
  double sigma_min = 5.0;
  double sigma_max = 50.0;
  std::size_t base_channels = 16;
  std::size_t scales = 4;
  std::size_t blocks_per_srb = 2;
  std::size_t skff_reduction = 8;
  bool global_residual = true;
  double epsilon = 1e-3;
  CharbonnierVariant loss_variant = CharbonnierVariant::Literal;
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 4;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::size_t snapshot_every = 0;
  std::string checkpoint_path = "srmnet_model.bin";
  std::string log_path = "train_log.csv";

  MnetConfig model() const {
    MnetConfig m;
    m.base_channels = base_channels;
    m.scales = scales;
    m.blocks_per_srb = blocks_per_srb;
    m.skff_reduction = skff_reduction;
    m.epsilon = epsilon;
    m.global_residual = global_residual;
    return m;
  }

  AdamOptions adam() const { return {learning_rate, beta1, beta2, adam_eps}; }

  void validate() const {
    auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::ConfigInvalid, what); };
    check(std::isfinite(sigma_min) && std::isfinite(sigma_max) && sigma_min >= 0.0,
          "sigma_min must be a non-negative number");
    check(sigma_min <= sigma_max, "sigma_min > sigma_max");
    check(patch_size > 0 && patches_per_image > 0 && batch_size > 0 && iterations > 0,
          "patch_size, patches_per_image, batch_size and iterations must be positive");
    check(base_channels > 0 && blocks_per_srb > 0 && skff_reduction > 0,
          "base_channels, blocks_per_srb and skff_reduction must be positive");
    check(scales >= 1 && scales <= 4, "scales must be in [1, 4]");
    check(patch_size % (std::size_t{1} << (scales - 1)) == 0,
          "patch_size must be divisible by 2^(scales-1)");
    check(epsilon > 0.0, "epsilon must be positive");
    check(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
    check(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "betas must be in [0, 1)");
    check(adam_eps > 0.0, "adam_eps must be positive");
  }
};

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorCode::ConfigInvalid, "config must be a JSON object");
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "data_dir") c.data_dir = value.get<std::string>();
      else if (key == "patch_size") c.patch_size = value.get<std::size_t>();
      else if (key == "patches_per_image") c.patches_per_image = value.get<std::size_t>();
      else if (key == "sigma_min") c.sigma_min = value.get<double>();
      else if (key == "sigma_max") c.sigma_max = value.get<double>();
      else if (key == "base_channels") c.base_channels = value.get<std::size_t>();
      else if (key == "scales") c.scales = value.get<std::size_t>();
      else if (key == "blocks_per_srb") c.blocks_per_srb = value.get<std::size_t>();
      else if (key == "skff_reduction") c.skff_reduction = value.get<std::size_t>();
      else if (key == "global_residual") c.global_residual = value.get<bool>();
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "loss_variant") c.loss_variant = parse_charbonnier_variant(value.get<std::string>());
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "adam_eps") c.adam_eps = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "iterations") c.iterations = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "snapshot_every") c.snapshot_every = value.get<std::size_t>();
      else if (key == "checkpoint_path") c.checkpoint_path = value.get<std::string>();
      else if (key == "log_path") c.log_path = value.get<std::string>();
      else fail(ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigInvalid, e.what());
  }
  c.validate();
  return c;
}

inline TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ConfigInvalid, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  return train_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainLogRow {
  std::size_t iteration = 0;
  double loss = 0.0;
  double psnr = 0.0;  // PSNR of the clamped prediction against the clean batch
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  ModelParams<float> params;
};

struct TrainBatch {
  Tensor<float> clean;
  Tensor<float> noisy;
  std::vector<double> sigmas;  // per sample, for logging only
};

template <typename T>
Tensor<T> clamp_unit(Tensor<T> t) {
  for (auto& v : t.data()) v = std::clamp(v, T(0), T(1));
  return t;
}

/// Batch for one iteration. Depends only on (seed, iteration), so it is the
/// same whether produced inline or by the prefetch worker.
inline TrainBatch make_train_batch(const TrainConfig& config, const std::vector<Tensor<float>>& pool,
                                   std::size_t iteration) {
  const std::uint64_t stream = mix_seed(config.seed, iteration);
  Rng rng(stream);
  std::vector<Tensor<float>> clean;
  std::vector<Tensor<float>> noisy;
  std::vector<double> sigmas;
  for (std::size_t b = 0; b < config.batch_size; ++b) {
    const Tensor<float>& patch = pool[rng.below(pool.size())];
    // sigma is drawn per sample; the network never sees it.
    const double sigma = rng.uniform(config.sigma_min, config.sigma_max);
    NoisySample<float> sample = add_awgn(patch, sigma, mix_seed(stream, b + 1));
    clean.push_back(std::move(sample.clean));
    noisy.push_back(std::move(sample.noisy));
    sigmas.push_back(sigma);
  }
  return {stack_batch(clean), stack_batch(noisy), std::move(sigmas)};
}

/// Runs the optimizer over a prepared patch pool.
inline TrainResult train_on_patches(const TrainConfig& config, const std::vector<Tensor<float>>& pool,
                                    const std::function<void(const TrainLogRow&)>& on_row = {}) {
  config.validate();
  require(!pool.empty(), ErrorCode::EmptyDataset, "no training patches");
  for (const auto& p : pool) {
    require(p.shape() == Shape{1, 3, config.patch_size, config.patch_size}, ErrorCode::ShapeMismatch,
            "training patch " + p.shape().str());
  }
  const MnetConfig model_config = config.model();
  LayerGraph graph = build_mnet_graph(model_config);
  TrainResult result{{}, init_params<float>(graph, config.seed)};
  Adam<float> optimizer(result.params, config.adam());

  const bool prefetch = num_threads() > 1;
  BoundedQueue<TrainBatch> queue(2);
  std::thread producer;
  if (prefetch) {
    producer = std::thread([&] {
      for (std::size_t t = 0; t < config.iterations; ++t) queue.push(make_train_batch(config, pool, t));
      queue.close();
    });
  }
  auto next_batch = [&](std::size_t t) {
    if (!prefetch) return make_train_batch(config, pool, t);
    auto item = queue.pop();
    require(item.has_value(), ErrorCode::EmptyDataset, "batch producer stopped early");
    return std::move(*item);
  };

  try {
    for (std::size_t t = 0; t < config.iterations; ++t) {
      TrainBatch batch = next_batch(t);
      result.params.zero_grad();
      const Var<float> clean = Var<float>::constant(std::move(batch.clean));
      const Var<float> prediction = run_graph(graph, result.params, Var<float>::constant(std::move(batch.noisy)));
      const Var<float> loss = charbonnier_loss(prediction, clean, config.epsilon, config.loss_variant);
      const double loss_value = loss.value()[0];
      require(std::isfinite(loss_value), ErrorCode::NonFiniteLoss,
              "loss became non-finite at iteration " + std::to_string(t + 1));
      const double batch_psnr = psnr(clamp_unit(prediction.value()), clean.value());
      backward(loss);
      optimizer.step();

      TrainLogRow row{t + 1, loss_value, batch_psnr};
      result.log.push_back(row);
      if (on_row) on_row(row);
      if (config.snapshot_every > 0 && (t + 1) % config.snapshot_every == 0 && !config.checkpoint_path.empty()) {
        save_model(result.params, model_config, config.checkpoint_path + ".iter" + std::to_string(t + 1));
      }
    }
  } catch (...) {
    queue.close();
    if (producer.joinable()) producer.join();
    throw;
  }
  if (producer.joinable()) producer.join();
  return result;
}

/// Loads every PPM under data_dir and crops the patch pool.
inline std::vector<Tensor<float>> build_patch_pool(const TrainConfig& config) {
  const auto files = list_ppm_files(config.data_dir);
  require(!files.empty(), ErrorCode::EmptyDataset, "no .ppm images in " + config.data_dir);
  std::vector<Tensor<float>> pool;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const ImageBuffer image = load_ppm(files[i]);
    auto patches = sample_patches(image, config.patch_size, config.patches_per_image,
                                  mix_seed(config.seed ^ 0x5EEDull, i));
    for (auto& p : patches) pool.push_back(std::move(p));
  }
  return pool;
}

inline std::string format_number(double v, const char* fmt) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

inline std::string train_log_csv(const std::vector<TrainLogRow>& log) {
  std::string out = "iteration,loss,psnr\n";
  for (const auto& row : log) {
    out += std::to_string(row.iteration) + "," + format_number(row.loss, "%.9g") + "," +
           format_number(row.psnr, "%.6f") + "\n";
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------------------
// Inference and evaluation
// ---------------------------------------------------------------------------

/// Restores a (B,3,H,W) batch of any size: reflect-pads to the network's
/// spatial multiple, runs without gradient tracking, and crops back.
template <typename T>
Tensor<T> denoise(const ModelParams<T>& params, const MnetConfig& config, const Tensor<T>& noisy) {
  const Shape& s = noisy.shape();
  const Tensor<T> padded = reflect_pad_to_multiple(noisy, config.spatial_multiple());
  LayerGraph graph = build_mnet_graph(config);
  graph.resolve(padded.shape());
  ModelParams<T> frozen;
  for (const auto& e : params.entries()) {
    frozen.add(e.name, e.var.value(), e.init);
    frozen[e.name].node()->requires_grad = false;
  }
  const Var<T> out = run_graph(graph, frozen, Var<T>::constant(padded));
  return crop(out.value(), s.h, s.w);
}

struct EvalRow {
  double sigma = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::uint64_t seed = 0;
  std::size_t images = 0;
  std::vector<EvalRow> rows;
};

inline std::uint64_t eval_noise_seed(std::uint64_t seed, double sigma, std::size_t image) {
  return mix_seed(mix_seed(seed, std::bit_cast<std::uint64_t>(sigma)), image);
}

/// Mean PSNR/SSIM of the denoised output per noise level.
inline EvalReport evaluate(const ModelParams<float>& params, const MnetConfig& config,
                           const std::vector<ImageBuffer>& images, const std::vector<double>& sigmas,
                           std::uint64_t seed) {
  require(!images.empty(), ErrorCode::EmptyDataset, "no evaluation images");
  EvalReport report{seed, images.size(), {}};
  for (double sigma : sigmas) {
    double psnr_total = 0.0;
    double ssim_total = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const Tensor<float> clean = image_to_tensor(images[i]);
      const NoisySample<float> sample = add_awgn(clean, sigma, eval_noise_seed(seed, sigma, i));
      const Tensor<float> restored = clamp_unit(denoise(params, config, sample.noisy));
      psnr_total += psnr(restored, clean);
      ssim_total += ssim(restored, clean);
    }
    const auto n = static_cast<double>(images.size());
    report.rows.push_back({sigma, psnr_total / n, ssim_total / n});
  }
  return report;
}

// Infinite PSNR is stored as the string "inf" since JSON has no infinity.
inline nlohmann::ordered_json metric_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double metric_from_json(const nlohmann::ordered_json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(ErrorCode::CorruptFile, "bad metric value '" + s + "'");
  }
  return j.get<double>();
}

inline nlohmann::ordered_json eval_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed;
  j["images"] = report.images;
  j["sigmas"] = nlohmann::ordered_json::array();
  j["results"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    j["sigmas"].push_back(row.sigma);
    nlohmann::ordered_json r;
    r["sigma"] = row.sigma;
    r["psnr"] = metric_to_json(row.psnr);
    r["ssim"] = metric_to_json(row.ssim);
    j["results"].push_back(std::move(r));
  }
  return j;
}

inline EvalReport eval_from_json(const nlohmann::ordered_json& j) {
  EvalReport report;
  report.seed = j.at("seed").get<std::uint64_t>();
  report.images = j.at("images").get<std::size_t>();
  for (const auto& r : j.at("results")) {
    report.rows.push_back({r.at("sigma").get<double>(), metric_from_json(r.at("psnr")),
                           metric_from_json(r.at("ssim"))});
  }
  return report;
}

/// Text table: one row per noise level.
inline std::string format_eval_table(const EvalReport& report) {
  std::ostringstream out;
  out << "sigma      PSNR(dB)    SSIM\n";
  for (const auto& row : report.rows) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-10s %-11s %s\n", format_number(row.sigma, "%g").c_str(),
                  format_number(row.psnr, "%.4f").c_str(), format_number(row.ssim, "%.4f").c_str());
    out << line;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Gradient verification of the full model
// ---------------------------------------------------------------------------

inline constexpr std::size_t kGradCheckParamLimit = 100000;

/// Tiny configuration used for end-to-end gradient checks.
inline MnetConfig tiny_config() {
  MnetConfig c;
  c.base_channels = 4;
  c.scales = 4;
  c.blocks_per_srb = 2;
  return c;
}

/// Finite-difference check of d(charbonnier(model(noisy), clean))/d(params)
/// on a seeded random image of size x size.
inline GradCheckReport gradcheck_model(const MnetConfig& config, std::size_t size, std::uint64_t seed,
                                       const GradCheckOptions& base = {}) {
  LayerGraph graph = build_mnet_graph(config);
  require(graph.param_count() < kGradCheckParamLimit, ErrorCode::ModelTooLarge,
          "gradcheck is limited to models with < 100000 parameters, this one has " +
              std::to_string(graph.param_count()));
  graph.resolve({1, 3, size, size});

  Rng rng(mix_seed(seed, 0xC0FFEEull));
  Tensor<double> clean({1, 3, size, size});
  for (auto& v : clean.data()) v = rng.uniform();
  const NoisySample<double> sample = add_awgn(clean, 25.0, mix_seed(seed, 1));
  const Var<double> target = Var<double>::constant(sample.clean);
  const Var<double> input = Var<double>::constant(sample.noisy);

  ModelParams<double> params = init_params<double>(graph, seed);
  GradCheckOptions options = base;
  options.seed = seed;
  return finite_diff_check(
      [&](const ModelParams<double>& p) {
        return charbonnier_loss(run_graph(graph, p, input), target, config.epsilon);
      },
      params, options);
}

}  // namespace srmnet
