// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Command implementations behind the `srmnet` executable. Each returns the
// process exit status and throws srmnet::Error on invalid input.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "srmnet/flops.hpp"
#include "srmnet/train.hpp"

namespace srmnet {

inline std::vector<double> parse_sigma_list(const std::string& text) {
  std::vector<double> sigmas;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == item.size() && !item.empty() && std::isfinite(v) && v >= 0.0,
            ErrorCode::ConfigInvalid, "bad sigma '" + item + "'");
    sigmas.push_back(v);
  }
  require(!sigmas.empty(), ErrorCode::ConfigInvalid, "empty sigma list");
  return sigmas;
}

inline int cmd_train(const std::filesystem::path& config_path, std::ostream& out) {
  const TrainConfig config = load_train_config(config_path);
  const std::vector<Tensor<float>> pool = build_patch_pool(config);
  const TrainResult result = train_on_patches(config, pool);
  save_model(result.params, config.model(), config.checkpoint_path);
  write_text_file(config.log_path, train_log_csv(result.log));
  const TrainLogRow& last = result.log.back();
  out << "trained " << last.iteration << " iterations on " << pool.size() << " patches, final loss "
      << format_number(last.loss, "%.6g") << ", batch psnr " << format_number(last.psnr, "%.3f") << " dB\n"
      << "model: " << config.checkpoint_path << "\nlog: " << config.log_path << "\n";
  return 0;
}

inline int cmd_denoise(const std::filesystem::path& model_path, const std::filesystem::path& input_path,
                       const std::filesystem::path& output_path,
                       const std::optional<std::filesystem::path>& reference_path, std::ostream& out) {
  const ImageBuffer input = load_ppm(input_path);
  std::optional<ImageBuffer> reference;
  if (reference_path) {
    reference = load_ppm(*reference_path);
    require(reference->width == input.width && reference->height == input.height, ErrorCode::ShapeMismatch,
            "reference is " + std::to_string(reference->width) + "x" + std::to_string(reference->height) +
                ", input is " + std::to_string(input.width) + "x" + std::to_string(input.height));
  }
  const LoadedModel model = load_model(model_path);
  const Tensor<float> restored = clamp_unit(denoise(model.params, model.config, image_to_tensor(input)));
  save_ppm(tensor_to_image(restored), output_path);
  if (reference) {
    const Tensor<float> clean = image_to_tensor(*reference);
    const Tensor<float> noisy = image_to_tensor(input);
    out << "input  psnr " << format_number(psnr(noisy, clean), "%.4f") << " dB  ssim "
        << format_number(ssim(noisy, clean), "%.4f") << "\n"
        << "output psnr " << format_number(psnr(restored, clean), "%.4f") << " dB  ssim "
        << format_number(ssim(restored, clean), "%.4f") << "\n";
  }
  return 0;
}

inline int cmd_eval(const std::filesystem::path& model_path, const std::filesystem::path& data_dir,
                    const std::string& sigma_text, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& json_path, std::ostream& out) {
  const std::vector<double> sigmas = parse_sigma_list(sigma_text);
  const auto files = list_ppm_files(data_dir);
  require(!files.empty(), ErrorCode::EmptyDataset, "no .ppm images in " + data_dir.string());
  std::vector<ImageBuffer> images;
  for (const auto& f : files) images.push_back(load_ppm(f));
  const LoadedModel model = load_model(model_path);
  const EvalReport report = evaluate(model.params, model.config, images, sigmas, seed);
  out << format_eval_table(report);
  const std::string json = eval_to_json(report).dump(2) + "\n";
  if (json_path) {
    write_text_file(*json_path, json);
  } else {
    out << json;
  }
  return 0;
}

inline nlohmann::ordered_json flops_to_json(const FlopsReport& report, const Shape& input) {
  nlohmann::ordered_json j;
  j["input"] = {input.n, input.c, input.h, input.w};
  j["macs"] = report.macs;
  j["flops_2x"] = report.flops_2x;
  j["other_ops"] = report.other_ops;
  j["params"] = report.params;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : report.nodes) {
    nlohmann::ordered_json node;
    node["name"] = n.name;
    node["shape"] = {n.shape.n, n.shape.c, n.shape.h, n.shape.w};
    node["macs"] = n.macs;
    node["other_ops"] = n.other_ops;
    node["params"] = n.params;
    j["nodes"].push_back(std::move(node));
  }
  return j;
}

inline std::string format_flops_table(const FlopsReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %-22s %16s %14s %10s\n", "node", "shape", "macs", "other_ops",
                "params");
  out << line;
  for (const auto& n : report.nodes) {
    std::snprintf(line, sizeof(line), "%-28s %-22s %16llu %14llu %10llu\n", n.name.c_str(),
                  n.shape.str().c_str(), static_cast<unsigned long long>(n.macs),
                  static_cast<unsigned long long>(n.other_ops), static_cast<unsigned long long>(n.params));
    out << line;
  }
  std::snprintf(line, sizeof(line), "total MACs      %llu (%.3f G)\ntotal 2xMACs+ops %llu (%.3f G)\nparams %llu (%.3f M)\n",
                static_cast<unsigned long long>(report.macs), report.macs / 1e9,
                static_cast<unsigned long long>(report.flops_2x), report.flops_2x / 1e9,
                static_cast<unsigned long long>(report.params), report.params / 1e6);
  out << line;
  return out.str();
}

inline int cmd_flops(const std::filesystem::path& config_path, std::size_t height, std::size_t width,
                     bool json_only, const std::optional<std::filesystem::path>& json_path, std::ostream& out) {
  const TrainConfig config = load_train_config(config_path);
  require(height > 0 && width > 0, ErrorCode::ConfigInvalid, "height and width must be positive");
  const Shape input{1, 3, height, width};
  const FlopsReport report = count_flops(config.model(), input);
  const std::string json = flops_to_json(report, input).dump(2) + "\n";
  if (!json_only) out << format_flops_table(report);
  if (json_path) write_text_file(*json_path, json);
  if (json_only) out << json;
  return 0;
}

inline int cmd_gradcheck(const std::optional<std::filesystem::path>& config_path, std::uint64_t seed,
                         double tolerance, std::size_t size, std::ostream& out) {
  MnetConfig model = tiny_config();
  if (config_path) model = load_train_config(*config_path).model();
  require(tolerance > 0.0, ErrorCode::ConfigInvalid, "tolerance must be positive");
  require(size > 0 && size % model.spatial_multiple() == 0, ErrorCode::ConfigInvalid,
          "size must be a positive multiple of " + std::to_string(model.spatial_multiple()));
  GradCheckOptions options;
  options.tolerance = tolerance;
  const GradCheckReport report = gradcheck_model(model, size, seed, options);
  char line[256];
  std::snprintf(line, sizeof(line), "gradcheck %s: max relative error %.6e over %zu coordinates (tolerance %.1e)\n",
                report.pass ? "PASS" : "FAIL", report.max_rel_err, report.coordinates, tolerance);
  out << line;
  std::snprintf(line, sizeof(line), "worst: %s[%zu] analytic %.10e numeric %.10e\n", report.worst_param.c_str(),
                report.worst_index, report.worst_analytic, report.worst_numeric);
  out << line;
  return report.pass ? 0 : 1;
}

}  // namespace srmnet
