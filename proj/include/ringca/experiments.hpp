/// @file  experiments.hpp
/// @brief The fd, spacetime and wave experiments and their CSV artifacts.
///
/// Every CSV carries its header even when empty, uses '\n' line endings, prints speeds,
/// flows, densities and probabilities with 4 decimals and positions and counts as integers.
/// Runs may execute concurrently; rows are always assembled by sort key.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "measure.hpp"
#include "rules.hpp"

namespace ringca {

  inline constexpr const char* fd_header =
      "model,p_d,p_d1,p_d2,phi_imp,seed,density_vehkm,flow_vehh,speed_kmh";
  inline constexpr const char* spacetime_header = "t,veh,x,v,s,i";
  inline constexpr const char* wave_header =
      "model,p_d_variant,seed,speed_kmh,residual_cells,points";

  inline std::string fixed4(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    // Keep "-0.0000" out of the files.
    if (std::string_view{buf} == "-0.0000") {
      return "0.0000";
    }
    return buf;
  }

  namespace detail {
    inline std::filesystem::path prepare_output(const std::string& dir, const char* name) {
      std::filesystem::path out{dir};
      std::filesystem::create_directories(out);
      return out / name;
    }

    inline void write_file(const std::filesystem::path& path, const std::string& body) {
      std::ofstream out{path, std::ios::binary | std::ios::trunc};
      if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
      }
      out << body;
      if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
      }
    }

    inline std::vector<double> sweep_values(const ExperimentConfig& cfg, Model model) {
      if (!cfg.p_d_sweep.empty()) {
        return cfg.p_d_sweep;
      }
      switch (model) {
        case Model::nasch:
          return {cfg.params.p_nasch};
        case Model::dtgblm:
          return {cfg.params.p_d};
        case Model::dbblm:
          return {cfg.params.p_d2};
      }
      return {};
    }
  }  // namespace detail

  struct FdRow {
    double variant{0.0};
    double nominal_density{0.0};
    FdPoint point;
  };

  /// All (p_d variant, density, seed) points, sorted by that key.
  inline std::vector<FdRow> run_fd(const ExperimentConfig& cfg) {
    if (cfg.densities.empty()) {
      throw ConfigError("validation error: densities: fd needs at least one density",
                        "densities");
    }
    const auto variants = detail::sweep_values(cfg, cfg.model);
    std::vector<FdRow> rows;
    for (double variant : variants) {
      for (double k : cfg.densities) {
        for (auto seed : cfg.seeds) {
          rows.push_back({variant, k, {}});
          rows.back().point.seed = seed;
        }
      }
    }
    detail::parallel_for(rows.size(), cfg.worker_threads(), [&](std::size_t i) {
      auto& row = rows[i];
      const auto params = with_slowdown_variant(cfg.model, cfg.params, row.variant);
      row.point = measure_fd_point(cfg.model, row.nominal_density, cfg.run, row.point.seed, params);
    });
    std::stable_sort(rows.begin(), rows.end(), [](const FdRow& a, const FdRow& b) {
      if (a.variant != b.variant) {
        return a.variant < b.variant;
      }
      if (a.nominal_density != b.nominal_density) {
        return a.nominal_density < b.nominal_density;
      }
      return a.point.seed < b.point.seed;
    });
    return rows;
  }

  /// The `p_d` column holds the moving-vehicle slowdown probability actually used
  /// (p_nasch for the NaSch model).
  inline std::string format_fd_csv(const std::vector<FdRow>& rows) {
    std::string body = std::string(fd_header) + "\n";
    for (const auto& row : rows) {
      const auto& pt = row.point;
      const double p_d = pt.model == Model::nasch ? row.variant : pt.p_d;
      body += std::string(to_string(pt.model)) + "," + fixed4(p_d) + "," + fixed4(pt.p_d1) + "," +
              fixed4(pt.p_d2) + "," + fixed4(pt.phi_imp) + "," + std::to_string(pt.seed) + "," +
              fixed4(pt.density) + "," + fixed4(pt.flow) + "," + fixed4(pt.space_mean_speed) +
              "\n";
    }
    return body;
  }

  /// Writes <out>/fd.csv and returns its path.
  inline std::filesystem::path cmd_fd(const ExperimentConfig& cfg) {
    const auto body = format_fd_csv(run_fd(cfg));
    const auto path = detail::prepare_output(cfg.output_dir, "fd.csv");
    detail::write_file(path, body);
    return path;
  }

  inline std::size_t vehicles_for(const ExperimentConfig& cfg, double density) {
    return static_cast<std::size_t>(density_to_count(density, cfg.run.length_cells,
                                                     cfg.params.l_cell, cfg.params.l_veh));
  }

  inline SpaceTimeLog run_spacetime(const ExperimentConfig& cfg) {
    return record_run(cfg.model, cfg.run, vehicles_for(cfg, cfg.density), cfg.seeds.front(),
                      cfg.window_start, cfg.window_end, cfg.params);
  }

  inline std::string format_spacetime_csv(const SpaceTimeLog& log) {
    std::string body = std::string(spacetime_header) + "\n";
    for (const auto& r : log.records) {
      body += std::to_string(r.t) + "," + std::to_string(r.id) + "," + std::to_string(r.x) + "," +
              std::to_string(r.v) + "," + (r.brake ? "1" : "0") + "," +
              std::to_string(r.driver_class) + "\n";
    }
    return body;
  }

  /// Writes <out>/spacetime.csv for `density` and the first seed.
  inline std::filesystem::path cmd_spacetime(const ExperimentConfig& cfg) {
    const auto body = format_spacetime_csv(run_spacetime(cfg));
    const auto path = detail::prepare_output(cfg.output_dir, "spacetime.csv");
    detail::write_file(path, body);
    return path;
  }

  struct WaveRow {
    Model model{Model::dtgblm};
    double variant{0.0};
    std::uint64_t seed{0};
    std::optional<WaveSpeedEstimate> estimate;  ///< empty: insufficient jam signal
    std::size_t front_points{0};
  };

  struct WaveSummary {
    Model model{Model::dtgblm};
    std::vector<std::optional<double>> variant_means;  ///< seed-mean speed per variant, km/h
    std::optional<double> spread;  ///< max - min over variants with data; needs >= 2
  };

  struct WaveReport {
    std::vector<WaveRow> rows;
    std::vector<WaveSummary> summaries;
  };

  inline WaveSummary summarize_wave(Model model, const std::vector<double>& variants,
                                    const std::vector<WaveRow>& rows) {
    WaveSummary sum;
    sum.model = model;
    std::vector<double> means;
    for (double variant : variants) {
      double total = 0.0;
      int n = 0;
      for (const auto& r : rows) {
        if (r.model == model && r.variant == variant && r.estimate) {
          total += r.estimate->speed_kmh;
          ++n;
        }
      }
      if (n > 0) {
        sum.variant_means.emplace_back(total / n);
        means.push_back(total / n);
      } else {
        sum.variant_means.emplace_back(std::nullopt);
      }
    }
    if (means.size() >= 2) {
      const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
      sum.spread = *hi - *lo;
    }
    return sum;
  }

  /// @brief Jam-front wave speed for each (model, variant, seed).
  /// @details Window and jam threshold come from the config. Runs without a trackable front
  ///          stay in the report with no estimate.
  inline WaveReport run_wave(const ExperimentConfig& cfg) {
    if (cfg.density < cfg.wave_min_density) {
      throw ConfigError("validation error: density: wave needs density >= wave_min_density (" +
                            fixed4(cfg.wave_min_density) + " veh/km)",
                        "density");
    }
    const auto models = cfg.models_for_wave();
    WaveReport report;
    for (Model m : models) {
      for (double variant : detail::sweep_values(cfg, m)) {
        for (auto seed : cfg.seeds) {
          report.rows.push_back({m, variant, seed, std::nullopt, 0});
        }
      }
    }
    const std::size_t count = vehicles_for(cfg, cfg.density);
    detail::parallel_for(report.rows.size(), cfg.worker_threads(), [&](std::size_t i) {
      auto& row = report.rows[i];
      const auto params = with_slowdown_variant(row.model, cfg.params, row.variant);
      const auto log =
          record_run(row.model, cfg.run, count, row.seed, cfg.window_start, cfg.window_end, params);
      const auto series = jam_front_series(log, cfg.jam_speed());
      row.front_points = series.size();
      try {
        row.estimate = estimate_wave_speed(series, params.l_cell);
      } catch (const InsufficientSignal&) {
        row.estimate.reset();
      }
    });
    for (Model m : models) {
      report.summaries.push_back(summarize_wave(m, detail::sweep_values(cfg, m), report.rows));
    }
    return report;
  }

  /// Detail rows per model, then that model's summary row
  /// `<model>,spread,,<spread>,,<variants with data>`.
  inline std::string format_wave_csv(const WaveReport& report) {
    std::string body = std::string(wave_header) + "\n";
    for (const auto& sum : report.summaries) {
      const std::string name{to_string(sum.model)};
      for (const auto& r : report.rows) {
        if (r.model != sum.model) {
          continue;
        }
        body += name + "," + fixed4(r.variant) + "," + std::to_string(r.seed) + ",";
        if (r.estimate) {
          body += fixed4(r.estimate->speed_kmh) + "," + fixed4(r.estimate->residual_rms) + "," +
                  std::to_string(r.estimate->points);
        } else {
          body += ",," + std::to_string(r.front_points);
        }
        body += "\n";
      }
      const auto with_data = std::count_if(sum.variant_means.begin(), sum.variant_means.end(),
                                           [](const auto& m) { return m.has_value(); });
      body += name + ",spread,," + (sum.spread ? fixed4(*sum.spread) : std::string{}) + ",," +
              std::to_string(with_data) + "\n";
    }
    return body;
  }

  inline std::filesystem::path cmd_wave(const ExperimentConfig& cfg) {
    const auto body = format_wave_csv(run_wave(cfg));
    const auto path = detail::prepare_output(cfg.output_dir, "wave.csv");
    detail::write_file(path, body);
    return path;
  }

}  // namespace ringca
