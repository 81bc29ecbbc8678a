// Command-line driver: train a policy, evaluate a checkpoint, or run an experiment sweep.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "specshare/config.hpp"
#include "specshare/harness.hpp"
#include "specshare/policy.hpp"
#include "specshare/train.hpp"

namespace fs = std::filesystem;
using namespace specshare;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string checkpoint;
  int log_every = 10;
};

RunConfig load(const Options& o) { return o.config.empty() ? RunConfig{} : load_run_config(o.config); }

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

int cmd_train(const Options& o) {
  RunConfig rc = load(o);
  if (o.seed) rc.train.seed = *o.seed;
  make_dir(o.out);
  const std::string checkpoint = o.checkpoint.empty() ? (fs::path(o.out) / "checkpoint").string() : o.checkpoint;
  const auto result = run_training(rc.env, rc.train, [&](const EpisodeLog& e, const CompositeNet&) {
    if (o.log_every > 0 && (e.episode + 1) % o.log_every == 0) {
      std::cerr << "episode " << e.episode + 1 << "/" << rc.train.episodes << "  return " << e.episode_return
                << "  epsilon " << e.epsilon << "  loss " << e.loss_mean << '\n';
    }
  });
  const std::string log_path = (fs::path(o.out) / "training_log.csv").string();
  write_training_log(result.episodes, log_path);
  save_composite(result.net, checkpoint);
  std::cout << "wrote " << log_path << "\nwrote " << checkpoint << '\n';
  return 0;
}

int cmd_eval(const Options& o) {
  RunConfig rc = load(o);
  ExperimentSpec spec = rc.experiments.empty() ? ExperimentSpec{} : rc.experiments.front();
  if (o.seed) spec.test_seeds = {*o.seed};
  std::optional<CompositeNet> net;
  if (!o.checkpoint.empty()) {
    net = load_composite(o.checkpoint);
    spec.mode = net->shape.mode;
    spec.feedback_count = net->shape.feedback_count;
    spec.bits_per_value = net->shape.bits_per_value;
  } else {
    spec.mode = FeedbackMode::none;
  }
  make_dir(o.out);
  const EvalReport r = evaluate(net ? &*net : nullptr, rc.env, spec);
  const std::string csv = (fs::path(o.out) / "eval.csv").string();
  write_return_comparison_csv(r, csv);

  nlohmann::json summary = {{"policy_arp", r.policy_arp},
                            {"random_arp", r.random_arp},
                            {"mode", to_string(spec.mode)},
                            {"test_episodes", spec.test_episodes},
                            {"test_steps", spec.test_steps},
                            {"seeds", nlohmann::json::array()}};
  for (const auto& s : r.seeds) {
    summary["seeds"].push_back({{"seed", s.seed}, {"average_return", s.average_return}, {"arp", s.arp}});
  }
  const std::string summary_path = (fs::path(o.out) / "eval_summary.json").string();
  std::ofstream out(summary_path);
  if (!out) throw std::runtime_error("cannot write " + summary_path);
  out << summary.dump(2) << '\n';
  std::cout << "policy ARP " << r.policy_arp << "%  random ARP " << r.random_arp << "%\nwrote " << csv << "\nwrote "
            << summary_path << '\n';
  return 0;
}

int cmd_sweep(const Options& o) {
  RunConfig rc = load(o);
  if (o.seed) {
    for (auto& e : rc.experiments) e.train_seed = *o.seed;
  }
  const auto result = sweep(rc.plan(), o.out, [](const std::string& msg) { std::cerr << msg << '\n'; });
  for (const auto& f : result.files) std::cout << "wrote " << f << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"V2X spectrum sharing with learned feedback"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("-s,--seed", o.seed, "Override the seed (train seed, or the single test seed for eval)");
    sub->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  };
  auto* train = app.add_subcommand("train", "Train a policy and write training_log.csv plus a checkpoint");
  add_common(train);
  train->add_option("--checkpoint", o.checkpoint, "Checkpoint directory (default: <out>/checkpoint)");
  train->add_option("--log-every", o.log_every, "Progress line every N episodes (0 = quiet)");
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint against the optimal and random schemes");
  add_common(eval);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint directory; omit to evaluate the no-feedback scheme");
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate every experiment in the config");
  add_common(sweep_cmd);

  CLI11_PARSE(app, argc, argv);
  try {
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    return cmd_sweep(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
