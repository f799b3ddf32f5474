/// @file  config.hpp
/// @brief Experiment configuration: flat `key = value` text files.
///
/// Syntax: one `key = value` per line; `#` starts a comment; blank lines are ignored. Lists
/// are comma separated, and a list item `start:stop:step` expands to an inclusive range.
/// Unknown keys, duplicate keys and malformed values are hard errors. See
/// configs/example.cfg for every key with its default.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "measure.hpp"
#include "params.hpp"
#include "ring.hpp"
#include "rules.hpp"

namespace ringca {

  /// Parse or validation failure. `line` is 0 when the problem is not tied to one line.
  class ConfigError : public std::invalid_argument {
    std::string m_field;
    int m_line;

  public:
    ConfigError(const std::string& message, std::string field = {}, int line = 0)
        : std::invalid_argument(message), m_field{std::move(field)}, m_line{line} {}
    const std::string& field() const noexcept { return m_field; }
    int line() const noexcept { return m_line; }
  };

  struct ExperimentConfig {
    Model model{Model::dtgblm};
    ModelParams params{};
    RunSpec run{};
    std::vector<double> densities{};  ///< fd sweep, veh/km
    double density{50.0};             ///< spacetime and wave runs, veh/km
    std::vector<double> p_d_sweep{0.01, 0.1, 0.3};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    long window_start{9500};
    long window_end{10000};
    std::optional<int> jam_threshold{};  ///< unset: params.v_cri
    std::vector<Model> wave_models{};    ///< empty: {model}
    double wave_min_density{36.0};
    unsigned threads{0};                 ///< 0: hardware concurrency
    std::string output_dir{"."};

    ExperimentConfig() {
      for (int k = 2; k <= 80; k += 2) {
        densities.push_back(k);
      }
    }

    int jam_speed() const noexcept { return jam_threshold.value_or(params.v_cri); }
    std::vector<Model> models_for_wave() const {
      return wave_models.empty() ? std::vector<Model>{model} : wave_models;
    }
    unsigned worker_threads() const noexcept {
      return threads == 0 ? detail::default_threads() : threads;
    }

    /// Throws ConfigError naming the field and constraint.
    void validate() const;
  };

  inline Model parse_model(const std::string& text) {
    if (text == "nasch") {
      return Model::nasch;
    }
    if (text == "dtgblm") {
      return Model::dtgblm;
    }
    if (text == "dbblm") {
      return Model::dbblm;
    }
    throw std::invalid_argument("unknown model '" + text + "' (expected nasch, dtgblm or dbblm)");
  }

  /// The moving-vehicle slowdown probability a p_d sweep value replaces for each model.
  inline ModelParams with_slowdown_variant(Model model, ModelParams params, double value) {
    switch (model) {
      case Model::nasch:
        params.p_nasch = value;
        break;
      case Model::dtgblm:
        params.p_d = value;
        break;
      case Model::dbblm:
        params.p_d2 = value;
        break;
    }
    return params;
  }

  inline void ExperimentConfig::validate() const {
    try {
      params.validate();
    } catch (const ParamError& e) {
      throw ConfigError(std::string("validation error: ") + e.what(), e.field());
    }
    for (double p : p_d_sweep) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("validation error: p_d_sweep: probability out of range [0, 1]",
                          "p_d_sweep");
      }
    }
    if (run.length_cells < 1) {
      throw ConfigError("validation error: L: must be >= 1", "L");
    }
    if (run.steps < 1) {
      throw ConfigError("validation error: steps: must be >= 1", "steps");
    }
    if (run.warmup < 0 || run.warmup >= run.steps) {
      throw ConfigError("validation error: warmup: must satisfy 0 <= warmup < steps", "warmup");
    }
    if (window_start < 0 || window_end <= window_start || window_end > run.steps) {
      throw ConfigError(
          "validation error: window: must satisfy 0 <= window_start < window_end <= steps",
          "window_start");
    }
    if (seeds.empty()) {
      throw ConfigError("validation error: seeds: at least one seed required", "seeds");
    }
    const double jam_density = count_to_density(
        static_cast<std::size_t>(run.length_cells / params.l_veh), run.length_cells,
        params.l_cell);
    auto check_density = [&](double k, const char* field) {
      if (!(k >= 0.0) || k > jam_density + 1e-9) {
        std::ostringstream msg;
        msg << "validation error: " << field << ": density " << k
            << " veh/km not feasible for L (jam density " << jam_density << " veh/km)";
        throw ConfigError(msg.str(), field);
      }
    };
    for (double k : densities) {
      check_density(k, "densities");
    }
    check_density(density, "density");
    if (jam_threshold && *jam_threshold < 0) {
      throw ConfigError("validation error: jam_threshold: must be >= 0", "jam_threshold");
    }
  }

  namespace detail {

    inline std::string trim(const std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) {
        return {};
      }
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    }

    inline std::vector<std::string> split_list(const std::string& value) {
      std::vector<std::string> items;
      if (trim(value).empty()) {
        return items;
      }
      std::stringstream ss{value};
      std::string item;
      while (std::getline(ss, item, ',')) {
        items.push_back(trim(item));
      }
      return items;
    }

    inline double parse_double(const std::string& text) {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size() || !std::isfinite(v)) {
        throw std::invalid_argument("not a number: '" + text + "'");
      }
      return v;
    }

    inline long parse_long(const std::string& text) {
      std::size_t used = 0;
      const long v = std::stol(text, &used);
      if (used != text.size()) {
        throw std::invalid_argument("not an integer: '" + text + "'");
      }
      return v;
    }

    inline int parse_int(const std::string& text) {
      const long v = parse_long(text);
      if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("integer out of range: '" + text + "'");
      }
      return static_cast<int>(v);
    }

    inline std::uint64_t parse_seed(const std::string& text) {
      std::size_t used = 0;
      if (!text.empty() && text.front() == '-') {
        throw std::invalid_argument("seed must be non-negative: '" + text + "'");
      }
      const auto v = std::stoull(text, &used);
      if (used != text.size()) {
        throw std::invalid_argument("not a seed: '" + text + "'");
      }
      return v;
    }

    /// Comma list; `a:b:s` expands to a, a+s, ... up to b inclusive.
    inline std::vector<double> parse_double_list(const std::string& value) {
      std::vector<double> out;
      for (const auto& item : split_list(value)) {
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
          out.push_back(parse_double(item));
          continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos) {
          throw std::invalid_argument("range needs start:stop:step, got '" + item + "'");
        }
        const double start = parse_double(trim(item.substr(0, c1)));
        const double stop = parse_double(trim(item.substr(c1 + 1, c2 - c1 - 1)));
        const double stride = parse_double(trim(item.substr(c2 + 1)));
        if (!(stride > 0.0)) {
          throw std::invalid_argument("range step must be > 0 in '" + item + "'");
        }
        // Index-based so 0.1-style steps do not accumulate error.
        const auto n = static_cast<long>(std::floor((stop - start) / stride + 1e-9));
        for (long i = 0; i <= n; ++i) {
          out.push_back(start + static_cast<double>(i) * stride);
        }
      }
      return out;
    }

    inline Placement parse_placement(const std::string& v) {
      if (v == "uniform") {
        return Placement::uniform;
      }
      if (v == "megajam") {
        return Placement::megajam;
      }
      throw std::invalid_argument("placement must be uniform or megajam, got '" + v + "'");
    }

    inline InitialSpeed parse_initial_speed(const std::string& v) {
      if (v == "zero") {
        return InitialSpeed::zero;
      }
      if (v == "vmax") {
        return InitialSpeed::vmax;
      }
      throw std::invalid_argument("v_init must be zero or vmax, got '" + v + "'");
    }

    inline void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
      auto& p = cfg.params;
      static const std::map<std::string, double ModelParams::*> doubles{
          {"l_cell", &ModelParams::l_cell}, {"h", &ModelParams::h},
          {"T", &ModelParams::T},           {"p_b", &ModelParams::p_b},
          {"p_0", &ModelParams::p_0},       {"p_d", &ModelParams::p_d},
          {"p_d1", &ModelParams::p_d1},     {"p_d2", &ModelParams::p_d2},
          {"p_nasch", &ModelParams::p_nasch}, {"phi_imp", &ModelParams::phi_imp}};
      static const std::map<std::string, int ModelParams::*> ints{
          {"l_veh", &ModelParams::l_veh},   {"v_max", &ModelParams::v_max},
          {"a", &ModelParams::a},           {"a_1", &ModelParams::a_1},
          {"a_2", &ModelParams::a_2},       {"a_3", &ModelParams::a_3},
          {"b_rand", &ModelParams::b_rand}, {"b_anti", &ModelParams::b_anti},
          {"b_m", &ModelParams::b_m},       {"v_cri", &ModelParams::v_cri}};

      if (auto it = doubles.find(key); it != doubles.end()) {
        p.*(it->second) = parse_double(value);
      } else if (auto jt = ints.find(key); jt != ints.end()) {
        p.*(jt->second) = parse_int(value);
      } else if (key == "a_blocked") {
        p.a_blocked = parse_int(value);
      } else if (key == "model") {
        cfg.model = parse_model(value);
      } else if (key == "L") {
        cfg.run.length_cells = parse_int(value);
      } else if (key == "steps") {
        cfg.run.steps = parse_long(value);
      } else if (key == "warmup") {
        cfg.run.warmup = parse_long(value);
      } else if (key == "placement") {
        cfg.run.placement = parse_placement(value);
      } else if (key == "v_init") {
        cfg.run.v_init = parse_initial_speed(value);
      } else if (key == "densities") {
        cfg.densities = parse_double_list(value);
      } else if (key == "density") {
        cfg.density = parse_double(value);
      } else if (key == "p_d_sweep") {
        cfg.p_d_sweep = parse_double_list(value);
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& s : split_list(value)) {
          cfg.seeds.push_back(parse_seed(s));
        }
      } else if (key == "window_start") {
        cfg.window_start = parse_long(value);
      } else if (key == "window_end") {
        cfg.window_end = parse_long(value);
      } else if (key == "jam_threshold") {
        cfg.jam_threshold = parse_int(value);
      } else if (key == "wave_models") {
        cfg.wave_models.clear();
        for (const auto& m : split_list(value)) {
          cfg.wave_models.push_back(parse_model(m));
        }
      } else if (key == "wave_min_density") {
        cfg.wave_min_density = parse_double(value);
      } else if (key == "threads") {
        const long n = parse_long(value);
        if (n < 0) {
          throw std::invalid_argument("threads must be >= 0");
        }
        cfg.threads = static_cast<unsigned>(n);
      } else if (key == "output_dir") {
        cfg.output_dir = value;
      } else {
        throw ConfigError("unknown key '" + key + "'", key);
      }
    }

  }  // namespace detail

  /// Parses config text; `source` names it in error messages. Validates before returning.
  inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    ExperimentConfig cfg;
    std::map<std::string, int> seen;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) {
        continue;
      }
      const auto where = source + ":" + std::to_string(line_no) + ": ";
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(where + "parse error: expected 'key = value'", {}, line_no);
      }
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError(where + "parse error: missing key", {}, line_no);
      }
      if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
        throw ConfigError(where + "parse error: duplicate key '" + key + "' (first on line " +
                              std::to_string(it->second) + ")",
                          key, line_no);
      }
      try {
        detail::apply_key(cfg, key, value);
      } catch (const ConfigError& e) {
        throw ConfigError(where + "parse error: " + e.what(), key, line_no);
      } catch (const std::exception& e) {
        throw ConfigError(where + "parse error: " + key + ": " + e.what(), key, line_no);
      }
    }
    cfg.validate();
    return cfg;
  }

  inline ExperimentConfig parse_config_string(const std::string& text,
                                              const std::string& source = "<config>") {
    std::istringstream in{text};
    return parse_config(in, source);
  }

  inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in{path};
    if (!in) {
      throw std::runtime_error("cannot open config file '" + path + "'");
    }
    return parse_config(in, path);
  }

}  // namespace ringca
