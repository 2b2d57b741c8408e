// rdnet command-line tool: gen, train, eval, predict, render, bench.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rdnet/cli/commands.hpp"
#include "rdnet/cli/run_config.hpp"
#include "rdnet/common/key_value.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string dataset, checkpoint, out;
  std::optional<int> verbosity;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config, "Config file (key=value, [section] headers)");
  app->add_option("-s,--set", o.overrides, "Override a config key, e.g. train.max_epochs=5");
  app->add_option("--seed", o.seed, "Seed for dataset, model and training (RDNET_SEED wins)");
  app->add_option("--dataset", o.dataset, "Dataset directory");
  app->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
  app->add_option("--out", o.out, "Output directory");
  app->add_option("-v,--verbosity", o.verbosity, "0 = quiet, 1 = progress");
}

rdnet::cli::RunConfig build_config(const CommonOptions& o, std::vector<std::string> extra) {
  std::vector<std::string> overrides;
  if (o.seed) overrides.push_back("seed=" + std::to_string(*o.seed));
  if (!o.dataset.empty()) overrides.push_back("paths.dataset=" + o.dataset);
  if (!o.checkpoint.empty()) overrides.push_back("paths.checkpoint=" + o.checkpoint);
  if (!o.out.empty()) overrides.push_back("paths.out=" + o.out);
  if (o.verbosity) overrides.push_back("verbosity=" + std::to_string(*o.verbosity));
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  overrides.insert(overrides.end(), o.overrides.begin(), o.overrides.end());
  return rdnet::cli::load_run_config(o.config, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-Doppler map estimation from OFDM radar channel estimates"};
  app.set_version_flag("--version", rdnet::cli::kVersion);
  app.require_subcommand(1);

  CommonOptions gen_o, train_o, eval_o, predict_o, bench_o;

  auto* gen = app.add_subcommand("gen", "Generate a dataset");
  add_common(gen, gen_o);
  std::optional<std::size_t> clean_count, snr_levels;
  gen->add_option("--clean-count", clean_count, "Number of noise-free scenes");
  gen->add_option("--snr-levels", snr_levels, "Number of SNR levels evenly spaced over the range");

  auto* train = app.add_subcommand("train", "Train the network");
  add_common(train, train_o);

  auto* eval = app.add_subcommand("eval", "Per-SNR metrics for one or more estimators");
  add_common(eval, eval_o);
  rdnet::cli::EvalRequest eval_req;
  std::string eval_split = "test";
  eval->add_option("-e,--estimator", eval_req.estimators, "cnn, periodogram or gt (repeatable)")
      ->capture_default_str();
  eval->add_option("--split", eval_split, "train, val or test")->capture_default_str();

  auto* predict = app.add_subcommand("predict", "Write the estimated map of one record");
  add_common(predict, predict_o);
  rdnet::cli::PredictRequest predict_req;
  std::string predict_split = "test", predict_output;
  predict->add_option("--split", predict_split, "train, val or test")->capture_default_str();
  predict->add_option("-i,--index", predict_req.index, "Record index in the split")->required();
  predict->add_option("-e,--estimator", predict_req.estimator, "cnn, periodogram or gt")
      ->capture_default_str();
  predict->add_option("-o,--output", predict_output, "Output map file (.rdmp)");
  predict->add_flag("--raw", predict_req.raw, "Keep negative network outputs");

  auto* render = app.add_subcommand("render", "Render a map file as an 8-bit PGM image");
  std::string render_in, render_out;
  render->add_option("map", render_in, "Input map file (.rdmp)")->required();
  render->add_option("-o,--output", render_out, "Output image (.pgm)")->required();

  auto* bench = app.add_subcommand("bench", "Training and prediction timing table");
  add_common(bench, bench_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      std::vector<std::string> extra;
      if (clean_count) extra.push_back("data.clean_count=" + std::to_string(*clean_count));
      if (snr_levels) extra.push_back("data.snr_count=" + std::to_string(*snr_levels));
      return rdnet::cli::cmd_gen(build_config(gen_o, extra), std::cout);
    }
    if (*train) return rdnet::cli::cmd_train(build_config(train_o, {}), std::cout);
    if (*eval) {
      eval_req.split = rdnet::cli::parse_split(eval_split);
      return rdnet::cli::cmd_eval(build_config(eval_o, {}), eval_req, std::cout);
    }
    if (*predict) {
      predict_req.split = rdnet::cli::parse_split(predict_split);
      predict_req.output = predict_output;
      return rdnet::cli::cmd_predict(build_config(predict_o, {}), predict_req, std::cout);
    }
    if (*render) return rdnet::cli::cmd_render(render_in, render_out, std::cout);
    if (*bench) return rdnet::cli::cmd_bench(build_config(bench_o, {}), std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
