#include "specshare/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace specshare {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(source_ + ": " + what); }

  void require_object(const json& j, const std::string& where) const {
    if (!j.is_object()) fail(where + " must be an object");
  }

  EnvConfig env(const json& j) const {
    require_object(j, "env");
    EnvConfig c;
    for (const auto& [key, value] : j.items()) {
      if (key == "area_width") c.area_width = value.get<double>();
      else if (key == "area_height") c.area_height = value.get<double>();
      else if (key == "grid_blocks_x") c.grid_blocks_x = value.get<int>();
      else if (key == "grid_blocks_y") c.grid_blocks_y = value.get<int>();
      else if (key == "turn_probability") c.turn_probability = value.get<double>();
      else if (key == "num_pairs") c.num_pairs = value.get<int>();
      else if (key == "num_channels") c.num_channels = value.get<int>();
      else if (key == "v2v_power_dbm") c.v2v_power_dbm = value.get<double>();
      else if (key == "v2i_power_dbm") c.v2i_power_dbm = value.get<double>();
      else if (key == "noise_dbm") c.noise_dbm = value.get<double>();
      else if (key == "bandwidth_hz") c.bandwidth_hz = value.get<double>();
      else if (key == "carrier_ghz") c.carrier_ghz = value.get<double>();
      else if (key == "step_seconds") c.step_seconds = value.get<double>();
      else if (key == "pairing_radius") c.pairing_radius = value.get<double>();
      else if (key == "drop_radius") c.drop_radius = value.get<double>();
      else if (key == "min_speed_kmh") c.min_speed_kmh = value.get<double>();
      else if (key == "max_speed_kmh") c.max_speed_kmh = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else fail("unknown env key '" + key + "'");
    }
    return c;
  }

  PolicyShape policy(const json& j) const {
    require_object(j, "train.policy");
    PolicyShape p;
    for (const auto& [key, value] : j.items()) {
      if (key == "mode") p.mode = feedback_mode_from_string(value.get<std::string>());
      else if (key == "feedback_count") p.feedback_count = value.get<int>();
      else if (key == "bits_per_value") p.bits_per_value = value.get<int>();
      else if (key == "encoder_hidden") p.encoder_hidden = value.get<std::vector<int>>();
      else if (key == "qnet_hidden") p.qnet_hidden = value.get<std::vector<int>>();
      else fail("unknown train.policy key '" + key + "'");
    }
    return p;
  }

  TrainConfig train(const json& j) const {
    require_object(j, "train");
    TrainConfig c;
    for (const auto& [key, value] : j.items()) {
      if (key == "gamma") c.gamma = value.get<double>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "rmsprop_decay") c.rmsprop_decay = value.get<double>();
      else if (key == "rmsprop_epsilon") c.rmsprop_epsilon = value.get<double>();
      else if (key == "huber_delta") c.huber_delta = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "target_sync_every") c.target_sync_every = value.get<std::size_t>();
      else if (key == "steps_per_episode") c.steps_per_episode = value.get<int>();
      else if (key == "episodes") c.episodes = value.get<int>();
      else if (key == "epsilon_start") c.epsilon_start = value.get<double>();
      else if (key == "epsilon_end") c.epsilon_end = value.get<double>();
      else if (key == "epsilon_decay_fraction") c.epsilon_decay_fraction = value.get<double>();
      else if (key == "replay_capacity") c.replay_capacity = value.get<std::size_t>();
      else if (key == "warmup") c.warmup = value.get<std::size_t>();
      else if (key == "reward_scale") c.reward_scale = value.get<double>();
      else if (key == "learn") c.learn = value.get<bool>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "policy") c.policy = policy(value);
      else fail("unknown train key '" + key + "'");
    }
    return c;
  }

  static std::optional<double> noise(const json& v) {
    if (v.is_null() || (v.is_string() && v.get<std::string>() == "off")) return std::nullopt;
    return v.get<double>();
  }

  // One fully scalar experiment object.
  ExperimentSpec experiment(const json& j) const {
    ExperimentSpec e;
    std::optional<int> bits;
    for (const auto& [key, value] : j.items()) {
      if (key == "figure") e.figure = figure_from_string(value.get<std::string>());
      else if (key == "mode") e.mode = feedback_mode_from_string(value.get<std::string>());
      else if (key == "feedback_count") e.feedback_count = value.get<int>();
      else if (key == "bits_per_value") e.bits_per_value = value.get<int>();
      else if (key == "feedback_bits") bits = value.get<int>();
      else if (key == "batch_size") e.batch_size = value.get<std::size_t>();
      else if (key == "feedback_interval") e.feedback_interval = value.get<int>();
      else if (key == "input_noise_db") e.input_noise_db = noise(value);
      else if (key == "feedback_noise_db") e.feedback_noise_db = noise(value);
      else if (key == "train_seed") e.train_seed = value.get<std::uint64_t>();
      else if (key == "test_seeds") e.test_seeds = value.get<std::vector<std::uint64_t>>();
      else if (key == "train_episodes") e.train_episodes = value.get<int>();
      else if (key == "train_steps") e.train_steps = value.get<int>();
      else if (key == "test_episodes") e.test_episodes = value.get<int>();
      else if (key == "test_steps") e.test_steps = value.get<int>();
      else if (key == "trace_episode") e.trace_episode = value.get<int>();
      else fail("unknown experiment key '" + key + "'");
    }
    // feedback_bits is the per-link budget N_k * N_b of a binary encoder.
    if (bits) {
      if (*bits < 0) fail("feedback_bits must be non-negative");
      if (*bits == 0) {
        e.mode = FeedbackMode::none;
      } else {
        e.mode = FeedbackMode::binary;
        if (e.feedback_count < 1 || *bits % e.feedback_count != 0)
          fail("feedback_bits " + std::to_string(*bits) + " is not a multiple of feedback_count " +
               std::to_string(e.feedback_count));
        e.bits_per_value = *bits / e.feedback_count;
      }
    }
    // Zero feedback of any kind means the BS acts without information.
    if (e.mode == FeedbackMode::real && e.feedback_count == 0) e.mode = FeedbackMode::none;
    if (e.mode == FeedbackMode::binary && e.bits_per_value == 0) e.mode = FeedbackMode::none;
    try {
      e.validate();
    } catch (const std::invalid_argument& ex) {
      fail(std::string("experiment: ") + ex.what());
    }
    return e;
  }

  void expand(const json& j, std::vector<ExperimentSpec>& out) const {
    std::vector<std::string> axes;
    for (const auto& [key, value] : j.items()) {
      if (value.is_array() && key != "test_seeds") axes.push_back(key);
    }
    std::vector<std::size_t> index(axes.size(), 0);
    for (const auto& a : axes) {
      if (j.at(a).empty()) fail("experiment axis '" + a + "' is empty");
    }
    while (true) {
      json point = j;
      for (std::size_t i = 0; i < axes.size(); ++i) point[axes[i]] = j.at(axes[i]).at(index[i]);
      out.push_back(experiment(point));
      // Last axis varies fastest.
      std::size_t i = axes.size();
      while (i > 0) {
        --i;
        if (++index[i] < j.at(axes[i]).size()) break;
        index[i] = 0;
        if (i == 0) return;
      }
      if (axes.empty()) return;
    }
  }

  RunConfig run(const json& doc) const {
    require_object(doc, "config");
    RunConfig c;
    json defaults = json::object();
    for (const auto& [key, value] : doc.items()) {
      if (key == "env") c.env = env(value);
      else if (key == "train") c.train = train(value);
      else if (key == "experiment_defaults") {
        require_object(value, "experiment_defaults");
        defaults = value;
      } else if (key != "experiments") {
        fail("unknown top-level key '" + key + "'");
      }
    }
    if (doc.contains("experiments")) {
      const auto& list = doc.at("experiments");
      if (!list.is_array()) fail("experiments must be an array");
      for (const auto& item : list) {
        require_object(item, "experiment");
        json merged = defaults;
        merged.update(item);
        expand(merged, c.experiments);
      }
    }
    return c;
  }

 private:
  std::string source_;
};

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  Parser p(source);
  RunConfig c;
  try {
    c = p.run(parse_json(text, source));
    c.env.validate();
    c.train.validate();
  } catch (const json::exception& e) {
    p.fail(e.what());
  } catch (const std::invalid_argument& e) {
    p.fail(e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path), path); }

EnvConfig load_env_config(const std::string& path) { return load_run_config(path).env; }

}  // namespace specshare
