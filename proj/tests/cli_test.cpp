// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <string>

#include "srmnet/srmnet.hpp"
#include "test_util.hpp"

namespace srmnet {
namespace {

CommandResult cli(const std::string& args) { return run_command(std::string(SRMNET_CLI) + " " + args); }

// A failed command prints exactly one line: "error <Code>: <detail>".
void expect_cli_error(const CommandResult& r, const std::string& code) {
  EXPECT_NE(r.status, 0) << r.output;
  EXPECT_EQ(r.output.rfind("error " + code + ":", 0), 0u) << r.output;
  EXPECT_EQ(r.output.find('\n'), r.output.size() - 1) << r.output;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

void write_config(const std::filesystem::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2)); }

nlohmann::json tiny_train_json(const TempDir& dir) {
  return {{"data_dir", (dir / "data").string()}, {"patch_size", 16}, {"patches_per_image", 2},
          {"base_channels", 4}, {"scales", 3}, {"blocks_per_srb", 1}, {"batch_size", 2},
          {"iterations", 6}, {"learning_rate", 1e-3}, {"seed", 1},
          {"checkpoint_path", (dir / "model.bin").string()}, {"log_path", (dir / "log.csv").string()}};
}

TEST(Cli, GradcheckPassesAndIsDeterministic) {
  const CommandResult a = cli("gradcheck");
  EXPECT_EQ(a.status, 0) << a.output;
  EXPECT_EQ(a.output.rfind("gradcheck PASS", 0), 0u) << a.output;
  EXPECT_EQ(cli("gradcheck --seed 0").output, a.output);
}

TEST(Cli, GradcheckFailsAtUnattainableTolerance) {
  const CommandResult r = cli("gradcheck --tolerance 1e-12");
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(r.output.rfind("gradcheck FAIL", 0), 0u) << r.output;
}

TEST(Cli, GradcheckRefusesLargeModels) {
  TempDir dir("gc");
  write_config(dir / "big.json", {{"base_channels", 32}});
  expect_cli_error(cli("gradcheck --config " + q(dir / "big.json")), "ModelTooLarge");
}

TEST(Cli, FlopsJsonMatchesLibrary) {
  TempDir dir("flops");
  write_config(dir / "tiny.json", {{"base_channels", 4}, {"scales", 4}, {"blocks_per_srb", 2}});
  const CommandResult r = cli("flops --json --height 16 --width 16 --config " + q(dir / "tiny.json"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto j = nlohmann::json::parse(r.output);
  const FlopsReport expected = count_flops(tiny_config(), {1, 3, 16, 16});
  EXPECT_EQ(j["macs"].get<std::uint64_t>(), expected.macs);
  EXPECT_EQ(j["flops_2x"].get<std::uint64_t>(), expected.flops_2x);
  EXPECT_EQ(j["params"].get<std::uint64_t>(), expected.params);
  EXPECT_EQ(j["nodes"].size(), expected.nodes.size());
  const CommandResult table = cli("flops --config " + q(dir / "tiny.json") + " --height 16 --width 16 --json-out " +
                                  q(dir / "f.json"));
  EXPECT_NE(table.output.find("total MACs      1109984"), std::string::npos) << table.output;
  EXPECT_EQ(read_file_bytes(dir / "f.json"), std::vector<std::uint8_t>(r.output.begin(), r.output.end()));
}

TEST(Cli, InvalidInvocationsReportOneErrorLine) {
  TempDir dir("invalid");
  write_config(dir / "sigma.json", {{"sigma_min", 40}, {"sigma_max", 10}});
  expect_cli_error(cli("train --config " + q(dir / "sigma.json")), "ConfigInvalid");
  expect_cli_error(cli("flops --config " + q(dir / "sigma.json")), "ConfigInvalid");
  expect_cli_error(cli("train"), "ConfigInvalid");
  expect_cli_error(cli("bogus"), "ConfigInvalid");
  write_text_file(dir / "bad.ppm", "P3\n1 1\n255\n0 0 0\n");
  expect_cli_error(cli("denoise --model " + q(dir / "m.bin") + " --input " + q(dir / "bad.ppm") + " --output " +
                       q(dir / "o.ppm")),
                   "UnsupportedFormat");
  save_ppm(synthetic_image(16, 16, 0), dir / "ok.ppm");
  write_text_file(dir / "m.bin", "SRMN garbage");
  expect_cli_error(cli("denoise --model " + q(dir / "m.bin") + " --input " + q(dir / "ok.ppm") + " --output " +
                       q(dir / "o.ppm")),
                   "CorruptFile");
  std::filesystem::create_directories(dir / "empty");
  expect_cli_error(cli("eval --model " + q(dir / "m.bin") + " --data " + q(dir / "empty")), "EmptyDataset");
  expect_cli_error(cli("eval --model " + q(dir / "m.bin") + " --data " + q(dir.path()) + " --sigmas 10,x"),
                   "ConfigInvalid");
}

TEST(Cli, TrainAndEvalAreByteReproducible) {
  TempDir dir("repro");
  ASSERT_EQ(cli("synth --out " + q(dir / "data") + " --count 3 --size 24 --seed 2").status, 0);
  write_config(dir / "train.json", tiny_train_json(dir));
  const CommandResult first = cli("--threads 1 train --config " + q(dir / "train.json"));
  ASSERT_EQ(first.status, 0) << first.output;
  const auto csv = read_file_bytes(dir / "log.csv");
  const auto model = read_file_bytes(dir / "model.bin");
  ASSERT_EQ(cli("--threads 1 train --config " + q(dir / "train.json")).status, 0);
  EXPECT_EQ(read_file_bytes(dir / "log.csv"), csv);
  EXPECT_EQ(read_file_bytes(dir / "model.bin"), model);
  const std::string text(csv.begin(), csv.end());
  EXPECT_EQ(text.rfind("iteration,loss,psnr\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);

  const std::string eval = "--threads 1 eval --model " + q(dir / "model.bin") + " --data " + q(dir / "data") +
                           " --sigmas 10,30,50 --seed 4 --json-out ";
  const CommandResult e1 = cli(eval + q(dir / "e1.json"));
  ASSERT_EQ(e1.status, 0) << e1.output;
  ASSERT_EQ(cli(eval + q(dir / "e2.json")).status, 0);
  EXPECT_EQ(read_file_bytes(dir / "e1.json"), read_file_bytes(dir / "e2.json"));
  const auto bytes = read_file_bytes(dir / "e1.json");
  const EvalReport report = eval_from_json(nlohmann::ordered_json::parse(bytes.begin(), bytes.end()));
  EXPECT_EQ(e1.output, format_eval_table(report));
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[1].sigma, 30.0);
}

TEST(Cli, ZeroModelDenoiseReproducesInput) {
  TempDir dir("identity");
  const MnetConfig config = tiny_config();
  save_model(zero_params<float>(build_mnet_graph(config)), config, dir / "zero.bin");
  save_ppm(synthetic_image(37, 53, 3), dir / "in.ppm");
  const CommandResult r = cli("denoise --model " + q(dir / "zero.bin") + " --input " + q(dir / "in.ppm") +
                              " --output " + q(dir / "out.ppm") + " --reference " + q(dir / "in.ppm"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(read_file_bytes(dir / "out.ppm"), read_file_bytes(dir / "in.ppm"));
  EXPECT_NE(r.output.find("output psnr inf dB  ssim 1.0000"), std::string::npos) << r.output;
}

}  // namespace
}  // namespace srmnet
