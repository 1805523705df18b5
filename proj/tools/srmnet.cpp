// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "srmnet/cli.hpp"
#include "srmnet/synthetic.hpp"

namespace {

template <typename T>
std::optional<T> optional_if(const CLI::Option* opt, const T& value) {
  if (opt->count() == 0) return std::nullopt;
  return value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"srmnet: blind image denoising with a multi-scale residual network"};
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_option("--threads", threads, "worker threads (1 is bit-reproducible)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));

  std::string config_path;
  std::string model_path, input_path, output_path, reference_path, data_dir, json_path;
  std::string sigmas = "10,30,50";
  std::uint64_t seed = 0;
  std::size_t height = 256, width = 256, size = 16, count = 10;
  double tolerance = 1e-3;
  bool json_only = false;

  auto* train = app.add_subcommand("train", "train a model from a JSON config");
  train->add_option("--config", config_path, "training config (JSON)")->required();

  auto* denoise = app.add_subcommand("denoise", "denoise one PPM image");
  denoise->add_option("--model", model_path, "model file")->required();
  denoise->add_option("--input", input_path, "noisy input (PPM)")->required();
  denoise->add_option("--output", output_path, "denoised output (PPM)")->required();
  auto* reference_opt = denoise->add_option("--reference", reference_path, "clean reference (PPM)");

  auto* eval = app.add_subcommand("eval", "score a model on a directory of clean PPM images");
  eval->add_option("--model", model_path, "model file")->required();
  eval->add_option("--data", data_dir, "directory of clean PPM images")->required();
  eval->add_option("--sigmas", sigmas, "comma-separated noise levels (0-255 scale)");
  eval->add_option("--seed", seed, "noise seed");
  auto* eval_json_opt = eval->add_option("--json-out", json_path, "write the JSON report here");

  auto* flops = app.add_subcommand("flops", "count MACs and parameters");
  flops->add_option("--config", config_path, "config (JSON)")->required();
  flops->add_option("--height", height, "input height");
  flops->add_option("--width", width, "input width");
  flops->add_flag("--json", json_only, "print only the JSON report");
  auto* flops_json_opt = flops->add_option("--json-out", json_path, "write the JSON report here");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full model");
  auto* gc_config_opt = gradcheck->add_option("--config", config_path, "config (JSON); default is the tiny model");
  gradcheck->add_option("--tolerance", tolerance, "maximum relative error");
  gradcheck->add_option("--seed", seed, "parameter and input seed");
  gradcheck->add_option("--size", size, "input height and width");

  auto* synth = app.add_subcommand("synth", "write procedural test images");
  synth->add_option("--out", data_dir, "output directory")->required();
  synth->add_option("--count", count, "number of images");
  synth->add_option("--size", size, "image height and width");
  synth->add_option("--seed", seed, "scene seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error ConfigInvalid: " << e.what() << "\n";
    return 2;
  }

  try {
    srmnet::set_num_threads(threads);
    if (train->parsed()) return srmnet::cmd_train(config_path, std::cout);
    if (denoise->parsed()) {
      return srmnet::cmd_denoise(model_path, input_path, output_path,
                                 optional_if<std::filesystem::path>(reference_opt, reference_path), std::cout);
    }
    if (eval->parsed()) {
      return srmnet::cmd_eval(model_path, data_dir, sigmas, seed,
                              optional_if<std::filesystem::path>(eval_json_opt, json_path), std::cout);
    }
    if (flops->parsed()) {
      return srmnet::cmd_flops(config_path, height, width, json_only,
                               optional_if<std::filesystem::path>(flops_json_opt, json_path), std::cout);
    }
    if (gradcheck->parsed()) {
      return srmnet::cmd_gradcheck(optional_if<std::filesystem::path>(gc_config_opt, config_path), seed,
                                   tolerance, size, std::cout);
    }
    if (synth->parsed()) {
      for (const auto& p : srmnet::write_synthetic_set(data_dir, count, size, seed)) std::cout << p.string() << "\n";
      return 0;
    }
  } catch (const srmnet::Error& e) {
    std::cerr << "error " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error IoError: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
