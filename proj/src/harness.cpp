#include "specshare/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "specshare/baseline.hpp"

namespace specshare {

namespace fs = std::filesystem;

namespace {

struct FigureInfo {
  Figure figure;
  const char* name;
  const char* header;
  // Plot script parameters.
  const char* x;
  const char* y;
  const char* group;
  const char* xlabel;
  const char* ylabel;
};

constexpr FigureInfo kFigures[] = {
    {Figure::return_comparison, "return_comparison",
     "test_seed,episode,policy_return,optimal_return,random_return,policy_normalized,optimal_normalized,"
     "random_normalized",
     "episode", "policy_normalized", "", "Testing episode", "Normalized return"},
    {Figure::link_rates, "link_rates", "step,link,rate", "step", "rate", "link", "Testing step",
     "Rate (bits/s)"},
    {Figure::feedback_count, "feedback_count", "batch_size,feedback_count,arp,random_arp", "feedback_count", "arp",
     "batch_size", "Number of real feedback values", "ARP (%)"},
    {Figure::feedback_bits, "feedback_bits", "batch_size,feedback_bits,arp,random_arp", "feedback_bits", "arp",
     "batch_size", "Feedback bits per link", "ARP (%)"},
    {Figure::seed_study, "seed_study", "feedback_bits,test_seed,average_return,arp", "feedback_bits", "arp",
     "test_seed", "Feedback bits per link", "ARP (%)"},
    {Figure::feedback_interval, "feedback_interval", "mode,feedback_bits,interval,normalized_return", "interval",
     "normalized_return", "mode", "Feedback interval (steps)", "Normalized return"},
    {Figure::input_noise, "input_noise", "mode,feedback_bits,noise_db,arp", "noise_db", "arp", "mode",
     "Input noise ratio (dB)", "ARP (%)"},
    {Figure::feedback_noise, "feedback_noise", "mode,feedback_bits,noise_db,arp", "noise_db", "arp", "mode",
     "Feedback noise ratio (dB)", "ARP (%)"},
};

const FigureInfo& info(Figure f) {
  for (const auto& i : kFigures)
    if (i.figure == f) return i;
  throw std::logic_error("unknown figure");
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string noise_label(const std::optional<double>& db) { return db ? num(*db) : "off"; }

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream};
  std::uint64_t out = 0;
  seq.generate(&out, &out + 1);
  return out;
}

double scaled_noise(double value, const std::optional<double>& ratio_db, Rng& rng) {
  if (!ratio_db) return value;
  std::normal_distribution<double> normal(0.0, 1.0);
  return value + std::abs(value) * std::pow(10.0, *ratio_db / 20.0) * normal(rng);
}

EvalReport rollout(const CompositeNet* policy, const EnvConfig& env_config, const ExperimentSpec& spec,
                   int interval, bool compute_optimal) {
  spec.validate();
  if (policy == nullptr && spec.mode != FeedbackMode::none) {
    throw std::invalid_argument("evaluation needs a policy unless feedback mode is 'none'");
  }
  if (policy != nullptr) {
    if (policy->shape.num_pairs != env_config.num_pairs || policy->shape.num_channels != env_config.num_channels ||
        policy->shape.feedback_width() != PolicyShape{.mode = spec.mode,
                                                      .feedback_count = spec.feedback_count,
                                                      .bits_per_value = spec.bits_per_value}
                                              .feedback_width()) {
      throw std::invalid_argument("policy widths do not match the experiment");
    }
  }
  const int K = env_config.num_pairs;
  const int N = env_config.num_channels;
  EvalReport report;
  for (std::size_t si = 0; si < spec.test_seeds.size(); ++si) {
    const std::uint64_t seed = spec.test_seeds[si];
    Environment env(env_config, seed);
    Rng noise_rng(derive_seed(seed, 1));
    Rng random_rng(derive_seed(seed, 2));
    Rng blind_rng(derive_seed(seed, 3));
    std::vector<double> seed_policy, seed_optimal;
    for (int ep = 0; ep < spec.test_episodes; ++ep) {
      if (ep > 0) env.reset();
      double ret_policy = 0.0, ret_optimal = 0.0, ret_random = 0.0;
      std::vector<FeedbackVector> held;
      for (int t = 0; t < spec.test_steps; ++t) {
        std::size_t action = 0;
        if (policy == nullptr) {
          action = random_policy(blind_rng, K, N);
        } else {
          if (t % interval == 0) {
            std::vector<Observation> obs = env.observations();
            if (spec.input_noise_db) {
              for (auto& o : obs) o = add_input_noise(o, spec.input_noise_db, noise_rng);
            }
            held = feedback(*policy, obs);
            if (spec.feedback_noise_db) {
              for (auto& f : held) f = add_feedback_noise(f, spec.feedback_noise_db, noise_rng);
            }
          }
          action = argmax(q_values(policy->qnet, held));
        }
        if (compute_optimal) ret_optimal += brute_force(env.realization(), env_config).best_reward;
        ret_random += env.reward(action_decode(random_policy(random_rng, K, N), K, N));
        const StepOutcome out = env.step(action_decode(action, K, N));
        ret_policy += out.reward;
        if (si == 0 && ep == spec.trace_episode) {
          for (int k = 0; k < K; ++k) report.link_rate_trace.push_back({t, k, out.per_link_rate[k]});
        }
      }
      report.policy_returns.push_back(ret_policy);
      report.random_returns.push_back(ret_random);
      report.episode_seeds.push_back(seed);
      seed_policy.push_back(ret_policy);
      if (compute_optimal) {
        report.optimal_returns.push_back(ret_optimal);
        seed_optimal.push_back(ret_optimal);
      }
    }
    SeedSummary summary{seed, mean(seed_policy), 0.0};
    if (compute_optimal) summary.arp = arp(seed_policy, seed_optimal);
    report.seeds.push_back(summary);
  }
  if (compute_optimal) {
    report.policy_arp = arp(report.policy_returns, report.optimal_returns);
    report.random_arp = arp(report.random_returns, report.optimal_returns);
  }
  return report;
}

std::string plot_script(const FigureInfo& f) {
  std::ostringstream s;
  s << "#!/usr/bin/env python3\n"
    << "# Plots " << f.name << ".csv; reads only the CSV next to this script.\n"
    << "import csv\nimport os\nimport sys\nfrom collections import defaultdict\n\n"
    << "import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n"
    << "here = os.path.dirname(os.path.abspath(__file__))\n"
    << "path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, \"" << f.name << ".csv\")\n"
    << "rows = list(csv.DictReader(open(path)))\n"
    << "series = defaultdict(list)\n"
    << "for r in rows:\n"
    << "    key = r[\"" << f.group << "\"] if \"" << f.group << "\" else \"" << f.y << "\"\n"
    << "    x = r[\"" << f.x << "\"]\n"
    << "    x = -1e9 if x == \"off\" else float(x)\n"
    << "    series[key].append((x, float(r[\"" << f.y << "\"])))\n"
    << "fig, ax = plt.subplots()\n"
    << "for key, pts in sorted(series.items()):\n"
    << "    pts.sort()\n"
    << "    xs = [p[0] for p in pts]\n"
    << "    ys = [p[1] for p in pts]\n"
    << "    ax.plot(xs, ys, marker=\"o\", label=str(key))\n"
    << "ax.set_xlabel(\"" << f.xlabel << "\")\n"
    << "ax.set_ylabel(\"" << f.ylabel << "\")\n"
    << "ax.grid(True)\n"
    << "ax.legend(title=\"" << f.group << "\")\n"
    << "fig.savefig(os.path.splitext(path)[0] + \".png\", dpi=150)\n";
  return s.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string training_key(const TrainConfig& t) {
  std::ostringstream os;
  os << to_string(t.policy.mode) << '/' << t.policy.feedback_count << '/' << t.policy.bits_per_value << '/'
     << t.batch_size << '/' << t.seed << '/' << t.episodes << '/' << t.steps_per_episode;
  return os.str();
}

}  // namespace

std::string to_string(Figure figure) { return info(figure).name; }

Figure figure_from_string(const std::string& name) {
  for (const auto& i : kFigures)
    if (name == i.name) return i.figure;
  throw std::invalid_argument("unknown figure '" + name + "'");
}

std::string csv_header(Figure figure) { return info(figure).header; }

int ExperimentSpec::feedback_bits() const {
  return mode == FeedbackMode::binary ? feedback_count * bits_per_value : 0;
}

void ExperimentSpec::validate() const {
  if (feedback_interval < 1) throw std::invalid_argument("feedback_interval must be >= 1");
  if (mode == FeedbackMode::real && feedback_count < 1) throw std::invalid_argument("real feedback needs N_k >= 1");
  if (mode == FeedbackMode::binary && (feedback_count < 1 || bits_per_value < 1))
    throw std::invalid_argument("binary feedback needs N_k >= 1 and N_b >= 1");
  if (test_seeds.empty()) throw std::invalid_argument("at least one test seed required");
  if (test_episodes < 1 || test_steps < 1) throw std::invalid_argument("test episodes and steps must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (figure == Figure::feedback_interval && mode == FeedbackMode::none)
    throw std::invalid_argument("feedback interval evaluation needs a feedback policy");
}

std::vector<double> EvalReport::normalized(const std::vector<double>& returns) const {
  if (returns.size() != optimal_returns.size()) throw std::invalid_argument("optimal returns unavailable");
  std::vector<double> out(returns.size());
  for (std::size_t i = 0; i < returns.size(); ++i) out[i] = returns[i] / optimal_returns[i];
  return out;
}

double arp(const std::vector<double>& policy_returns, const std::vector<double>& optimal_returns) {
  if (policy_returns.empty() || policy_returns.size() != optimal_returns.size()) {
    throw std::invalid_argument("arp: return lists must be non-empty and of equal length");
  }
  const double opt = mean(optimal_returns);
  if (opt == 0.0) throw std::domain_error("arp: optimal mean return is zero");
  return mean(policy_returns) / opt * 100.0;
}

Observation add_input_noise(const Observation& observation, std::optional<double> ratio_db, Rng& rng) {
  Observation o = observation;
  for (double& v : o.gains_db) v = scaled_noise(v, ratio_db, rng);
  for (double& v : o.interference_db) v = scaled_noise(v, ratio_db, rng);
  o.power_dbm = scaled_noise(o.power_dbm, ratio_db, rng);
  return o;
}

FeedbackVector add_feedback_noise(const FeedbackVector& feedback, std::optional<double> ratio_db, Rng& rng) {
  FeedbackVector f = feedback;
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = scaled_noise(f(i), ratio_db, rng);
  return f;
}

EvalReport evaluate(const CompositeNet* policy, const EnvConfig& env_config, const ExperimentSpec& spec,
                    bool compute_optimal) {
  return rollout(policy, env_config, spec, spec.feedback_interval, compute_optimal);
}

EvalReport run_interval_eval(const CompositeNet& policy, const EnvConfig& env_config, const ExperimentSpec& spec) {
  EvalReport report = rollout(&policy, env_config, spec, spec.feedback_interval, false);
  report.reference_returns = rollout(&policy, env_config, spec, 1, false).policy_returns;
  report.normalized_return = mean(report.policy_returns) / mean(report.reference_returns);
  return report;
}

TrainConfig train_config_for(const TrainConfig& defaults, const ExperimentSpec& spec) {
  TrainConfig t = defaults;
  t.policy.mode = spec.mode;
  t.policy.feedback_count = spec.feedback_count;
  t.policy.bits_per_value = spec.bits_per_value;
  t.batch_size = spec.batch_size;
  t.seed = spec.train_seed;
  t.episodes = spec.train_episodes;
  t.steps_per_episode = spec.train_steps;
  return t;
}

void write_return_comparison_csv(const EvalReport& report, const std::string& path) {
  std::ostringstream s;
  s << csv_header(Figure::return_comparison) << '\n';
  const auto pn = report.normalized(report.policy_returns);
  const auto rn = report.normalized(report.random_returns);
  std::map<std::uint64_t, int> episode_of_seed;
  for (std::size_t i = 0; i < report.policy_returns.size(); ++i) {
    const auto seed = report.episode_seeds[i];
    s << seed << ',' << episode_of_seed[seed]++ << ',' << num(report.policy_returns[i]) << ','
      << num(report.optimal_returns[i]) << ',' << num(report.random_returns[i]) << ',' << num(pn[i]) << ",1,"
      << num(rn[i]) << '\n';
  }
  write_file(path, s.str());
}

SweepResult sweep(const SweepPlan& plan, const std::string& out_dir, const SweepProgress& progress) {
  SweepResult result;
  if (plan.experiments.empty()) return result;
  for (const auto& spec : plan.experiments) spec.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir + ": " + ec.message());

  std::map<std::string, CompositeNet> trained;
  std::map<Figure, std::vector<std::string>> rows;
  for (std::size_t i = 0; i < plan.experiments.size(); ++i) {
    const auto& spec = plan.experiments[i];
    const CompositeNet* policy = nullptr;
    if (spec.mode != FeedbackMode::none) {
      const TrainConfig tc = train_config_for(plan.train, spec);
      const std::string key = training_key(tc);
      auto it = trained.find(key);
      if (it == trained.end()) {
        if (progress) progress("training " + key);
        it = trained.emplace(key, run_training(plan.env, tc).net).first;
      }
      policy = &it->second;
    }
    if (progress) progress("evaluating point " + std::to_string(i + 1) + "/" + std::to_string(plan.experiments.size()) +
                           " (" + to_string(spec.figure) + ")");
    auto& out = rows[spec.figure];
    const std::string mode = to_string(spec.mode);
    std::ostringstream row;
    switch (spec.figure) {
      case Figure::return_comparison: {
        const auto r = evaluate(policy, plan.env, spec);
        const auto pn = r.normalized(r.policy_returns);
        const auto rn = r.normalized(r.random_returns);
        std::map<std::uint64_t, int> episode_of_seed;
        for (std::size_t e = 0; e < r.policy_returns.size(); ++e) {
          const auto seed = r.episode_seeds[e];
          out.push_back(std::to_string(seed) + ',' + std::to_string(episode_of_seed[seed]++) + ',' +
                        num(r.policy_returns[e]) + ',' + num(r.optimal_returns[e]) + ',' + num(r.random_returns[e]) +
                        ',' + num(pn[e]) + ",1," + num(rn[e]));
        }
        break;
      }
      case Figure::link_rates: {
        const auto r = evaluate(policy, plan.env, spec, false);
        for (const auto& s : r.link_rate_trace)
          out.push_back(std::to_string(s.step) + ',' + std::to_string(s.link) + ',' + num(s.rate));
        break;
      }
      case Figure::feedback_count: {
        const auto r = evaluate(policy, plan.env, spec);
        const int count = spec.mode == FeedbackMode::none ? 0 : spec.feedback_count;
        out.push_back(std::to_string(spec.batch_size) + ',' + std::to_string(count) + ',' + num(r.policy_arp) + ',' +
                      num(r.random_arp));
        break;
      }
      case Figure::feedback_bits: {
        const auto r = evaluate(policy, plan.env, spec);
        out.push_back(std::to_string(spec.batch_size) + ',' + std::to_string(spec.feedback_bits()) + ',' +
                      num(r.policy_arp) + ',' + num(r.random_arp));
        break;
      }
      case Figure::seed_study: {
        const auto r = evaluate(policy, plan.env, spec);
        for (const auto& s : r.seeds)
          out.push_back(std::to_string(spec.feedback_bits()) + ',' + std::to_string(s.seed) + ',' +
                        num(s.average_return) + ',' + num(s.arp));
        break;
      }
      case Figure::feedback_interval: {
        const auto r = run_interval_eval(*policy, plan.env, spec);
        out.push_back(mode + ',' + std::to_string(spec.feedback_bits()) + ',' +
                      std::to_string(spec.feedback_interval) + ',' + num(r.normalized_return));
        break;
      }
      case Figure::input_noise:
      case Figure::feedback_noise: {
        const auto r = evaluate(policy, plan.env, spec);
        const auto& db = spec.figure == Figure::input_noise ? spec.input_noise_db : spec.feedback_noise_db;
        out.push_back(mode + ',' + std::to_string(spec.feedback_bits()) + ',' + noise_label(db) + ',' +
                      num(r.policy_arp));
        break;
      }
    }
  }

  for (const auto& [figure, lines] : rows) {
    const auto& f = info(figure);
    std::string csv = std::string(f.header) + '\n';
    for (const auto& l : lines) csv += l + '\n';
    const fs::path csv_path = fs::path(out_dir) / (std::string(f.name) + ".csv");
    const fs::path script_path = fs::path(out_dir) / (std::string(f.name) + ".py");
    write_file(csv_path, csv);
    write_file(script_path, plot_script(f));
    result.files.push_back(csv_path.string());
    result.files.push_back(script_path.string());
  }
  return result;
}

}  // namespace specshare
