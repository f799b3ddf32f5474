/// @file  measure.hpp
/// @brief Observables: global summaries, fundamental-diagram sweeps, space-time logs,
///        jam-front tracking, wave-speed fits and a heuristic phase classifier.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "params.hpp"
#include "ring.hpp"
#include "rules.hpp"

namespace ringca {

  /// km/h per cell/step.
  inline double kmh_per_cell_step(double l_cell) noexcept { return l_cell * 3.6; }

  struct Summary {
    double density{0.0};  ///< veh/km
    double speed{0.0};    ///< space-mean, km/h
    double flow{0.0};     ///< veh/h, density * speed
  };

  inline Summary summarize(const RoadState& road, const ModelParams& params) {
    Summary s;
    if (road.vehicles.empty()) {
      return s;
    }
    long total = 0;
    for (const auto& veh : road.vehicles) {
      total += veh.v;
    }
    s.density = count_to_density(road.size(), road.length_cells, params.l_cell);
    s.speed = static_cast<double>(total) / static_cast<double>(road.size()) *
              kmh_per_cell_step(params.l_cell);
    s.flow = s.density * s.speed;
    return s;
  }

  struct FdPoint {
    double density{0.0};
    double flow{0.0};
    double space_mean_speed{0.0};
    Model model{Model::dtgblm};
    double p_d{0.0};
    double p_d1{0.0};
    double p_d2{0.0};
    double phi_imp{0.0};
    std::uint64_t seed{0};
  };

  /// Shared run setup for sweeps and recordings.
  struct RunSpec {
    int length_cells{2500};
    long steps{10000};
    long warmup{5000};
    Placement placement{Placement::uniform};
    InitialSpeed v_init{InitialSpeed::zero};
  };

  struct SpaceTimeRecord {
    long t{0};
    std::size_t id{0};
    int x{0};
    int v{0};
    bool brake{false};
    int driver_class{0};

    friend bool operator==(const SpaceTimeRecord&, const SpaceTimeRecord&) = default;
  };

  /// @brief Per-step per-vehicle samples over [t_start, t_end), ordered by (t, id).
  struct SpaceTimeLog {
    int length_cells{0};
    std::size_t vehicle_count{0};
    long t_start{0};
    long t_end{0};
    std::vector<SpaceTimeRecord> records;

    long steps() const noexcept { return t_end - t_start; }
    /// The N records of step t_start + k.
    std::span<const SpaceTimeRecord> frame(long k) const {
      return std::span<const SpaceTimeRecord>(records).subspan(
          static_cast<std::size_t>(k) * vehicle_count, vehicle_count);
    }

    friend bool operator==(const SpaceTimeLog&, const SpaceTimeLog&) = default;
  };

  inline void append_frame(SpaceTimeLog& log, const RoadState& road) {
    for (const auto& veh : road.vehicles) {
      log.records.push_back({road.t, veh.id, veh.x, veh.v, veh.brake, veh.driver_class});
    }
  }

  /// @brief Vehicles crossing `site` per hour over the log window.
  /// @details A record at time t crossed the site on the step into t when the site lies in
  ///          the ring interval (x - v, x].
  inline double detector_flow(const SpaceTimeLog& log, int site, int length_cells) {
    if (site < 0 || site >= length_cells) {
      throw std::out_of_range("detector_flow: site outside [0, L)");
    }
    if (log.records.empty() || log.steps() <= 0) {
      return 0.0;
    }
    long crossings = 0;
    for (const auto& rec : log.records) {
      const int behind = ((rec.x - site) % length_cells + length_cells) % length_cells;
      if (behind < rec.v) {
        ++crossings;
      }
    }
    return static_cast<double>(crossings) * 3600.0 / static_cast<double>(log.steps());
  }

  namespace detail {
    /// Runs body(i) for i in [0, count) on up to `threads` workers.
    inline void parallel_for(std::size_t count, unsigned threads,
                             const std::function<void(std::size_t)>& body) {
      threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
      if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
          body(i);
        }
        return;
      }
      std::atomic<std::size_t> next{0};
      std::vector<std::exception_ptr> errors(threads);
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = next++; i < count; i = next++) {
              body(i);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) {
        th.join();
      }
      for (auto& e : errors) {
        if (e) {
          std::rethrow_exception(e);
        }
      }
    }

    inline unsigned default_threads() {
      return std::max(1u, std::thread::hardware_concurrency());
    }
  }  // namespace detail

  /// @brief Post-warmup average of summarize() for one (density, seed) run.
  inline FdPoint measure_fd_point(Model model, double density, const RunSpec& run,
                                  std::uint64_t seed, const ModelParams& params) {
    if (run.warmup >= run.steps || run.warmup < 0) {
      throw std::invalid_argument("fd_sweep: warmup must satisfy 0 <= warmup < steps");
    }
    const int count = density_to_count(density, run.length_cells, params.l_cell, params.l_veh);
    Simulation sim{model, params, run.length_cells, static_cast<std::size_t>(count),
                   run.placement, run.v_init, seed};
    sim.advance(run.warmup);
    double speed_sum = 0.0;
    const long samples = run.steps - run.warmup;
    for (long i = 0; i < samples; ++i) {
      sim.advance();
      speed_sum += summarize(sim.road(), params).speed;
    }
    FdPoint pt;
    pt.density = count_to_density(static_cast<std::size_t>(count), run.length_cells, params.l_cell);
    pt.space_mean_speed = speed_sum / static_cast<double>(samples);
    pt.flow = pt.density * pt.space_mean_speed;
    pt.model = model;
    pt.p_d = params.p_d;
    pt.p_d1 = params.p_d1;
    pt.p_d2 = params.p_d2;
    pt.phi_imp = params.phi_imp;
    pt.seed = seed;
    return pt;
  }

  /// One FdPoint per (density, seed), ordered by density index then seed index.
  inline std::vector<FdPoint> fd_sweep(Model model, std::span<const double> densities,
                                       const RunSpec& run, std::span<const std::uint64_t> seeds,
                                       const ModelParams& params,
                                       unsigned threads = detail::default_threads()) {
    params.validate();
    std::vector<FdPoint> out(densities.size() * seeds.size());
    detail::parallel_for(out.size(), threads, [&](std::size_t i) {
      out[i] = measure_fd_point(model, densities[i / seeds.size()], run, seeds[i % seeds.size()],
                                params);
    });
    return out;
  }

  /// @brief Records [t_start, t_end) of a run started at t = 0.
  inline SpaceTimeLog record_run(Model model, const RunSpec& run, std::size_t count,
                                 std::uint64_t seed, long t_start, long t_end,
                                 const ModelParams& params) {
    if (t_end <= t_start) {
      throw std::invalid_argument("record_run: empty window");
    }
    if (t_start < 0 || t_end > run.steps) {
      throw std::invalid_argument("record_run: window must lie within [0, steps]");
    }
    Simulation sim{model, params, run.length_cells, count, run.placement, run.v_init, seed};
    SpaceTimeLog log;
    log.length_cells = run.length_cells;
    log.vehicle_count = count;
    log.t_start = t_start;
    log.t_end = t_end;
    log.records.reserve(count * static_cast<std::size_t>(t_end - t_start));
    sim.advance(t_start);
    for (long t = t_start; t < t_end; ++t) {
      append_frame(log, sim.road());
      if (t + 1 < t_end) {
        sim.advance();
      }
    }
    return log;
  }

  struct JamCluster {
    std::size_t tail{0};  ///< upstream-most vehicle id
    std::size_t size{0};
  };

  /// @brief Largest run of consecutive (in driving order) vehicles with v <= threshold.
  /// @details Runs wrap around the ring. Nothing is returned when no vehicle or every vehicle
  ///          is jammed, since neither case has an upstream boundary. Ties go to the run whose
  ///          tail is nearest `hint` (ring distance), then to the lowest tail id.
  inline std::optional<JamCluster> largest_jam_cluster(std::span<const SpaceTimeRecord> frame,
                                                       int v_threshold, int length_cells,
                                                       std::optional<int> hint = {}) {
    const std::size_t count = frame.size();
    std::size_t start = count;
    for (std::size_t k = 0; k < count; ++k) {
      if (frame[k].v > v_threshold) {
        start = k;
        break;
      }
    }
    if (start == count) {
      return std::nullopt;
    }
    auto ring_distance = [&](int a, int b) {
      const int d = ((a - b) % length_cells + length_cells) % length_cells;
      return std::min(d, length_cells - d);
    };
    std::optional<JamCluster> best;
    std::size_t run = 0;
    std::size_t tail = 0;
    // Scan one full lap starting just after a free vehicle so no run is split.
    for (std::size_t step = 1; step <= count; ++step) {
      const std::size_t k = (start + step) % count;
      if (frame[k].v <= v_threshold) {
        if (run == 0) {
          tail = k;
        }
        ++run;
        continue;
      }
      if (run > 0) {
        JamCluster cand{tail, run};
        bool better = !best || cand.size > best->size;
        if (best && cand.size == best->size) {
          if (hint) {
            const int dc = ring_distance(frame[cand.tail].x, *hint);
            const int db = ring_distance(frame[best->tail].x, *hint);
            better = dc < db || (dc == db && cand.tail < best->tail);
          } else {
            better = cand.tail < best->tail;
          }
        }
        if (better) {
          best = cand;
        }
        run = 0;
      }
    }
    return best;
  }

  struct FrontSample {
    long t{0};
    double position{0.0};  ///< unwrapped, cells
  };

  /// @brief Upstream boundary of the largest jammed cluster per step, unwrapped in time.
  /// @details Consecutive positions are continued to the nearest image, so |delta| <= L/2.
  inline std::vector<FrontSample> jam_front_series(const SpaceTimeLog& log, int v_threshold) {
    std::vector<FrontSample> series;
    const int L = log.length_cells;
    std::optional<int> last_raw;
    double unwrapped = 0.0;
    for (long k = 0; k < log.steps(); ++k) {
      const auto frame = log.frame(k);
      const auto cluster = largest_jam_cluster(frame, v_threshold, L, last_raw);
      if (!cluster) {
        continue;
      }
      const int raw = frame[cluster->tail].x;
      if (!last_raw) {
        unwrapped = raw;
      } else {
        int delta = ((raw - *last_raw) % L + L) % L;
        if (delta > L / 2) {
          delta -= L;
        }
        unwrapped += delta;
      }
      last_raw = raw;
      series.push_back({frame[cluster->tail].t, unwrapped});
    }
    return series;
  }

  class InsufficientSignal : public std::runtime_error {
  public:
    InsufficientSignal() : std::runtime_error("insufficient jam signal") {}
  };

  struct WaveSpeedEstimate {
    double speed_kmh{0.0};  ///< negative = upstream
    double cells_per_step{0.0};
    double residual_rms{0.0};  ///< cells
    std::size_t points{0};
  };

  inline constexpr std::size_t min_wave_points = 10;

  /// Least-squares line through (t, position); throws InsufficientSignal below 10 points.
  inline WaveSpeedEstimate estimate_wave_speed(std::span<const FrontSample> series,
                                               double l_cell) {
    if (series.size() < min_wave_points) {
      throw InsufficientSignal{};
    }
    const auto n = static_cast<double>(series.size());
    // Centre on the first sample so long runs keep full precision.
    const double t0 = static_cast<double>(series.front().t);
    const double x0 = series.front().position;
    double mt = 0.0, mx = 0.0;
    for (const auto& s : series) {
      mt += static_cast<double>(s.t) - t0;
      mx += s.position - x0;
    }
    mt /= n;
    mx /= n;
    double stt = 0.0, stx = 0.0;
    for (const auto& s : series) {
      const double dt = static_cast<double>(s.t) - t0 - mt;
      const double dx = s.position - x0 - mx;
      stt += dt * dt;
      stx += dt * dx;
    }
    if (stt == 0.0) {
      throw InsufficientSignal{};
    }
    const double slope = stx / stt;
    double sse = 0.0;
    for (const auto& s : series) {
      const double fit = mx + slope * (static_cast<double>(s.t) - t0 - mt);
      const double r = (s.position - x0) - fit;
      sse += r * r;
    }
    WaveSpeedEstimate est;
    est.cells_per_step = slope;
    est.speed_kmh = slope * kmh_per_cell_step(l_cell);
    est.residual_rms = std::sqrt(sse / n);
    est.points = series.size();
    return est;
  }

  enum class Phase { free_flow, synchronized, wide_jam };

  inline constexpr std::string_view to_string(Phase p) noexcept {
    switch (p) {
      case Phase::free_flow:
        return "free_flow";
      case Phase::synchronized:
        return "synchronized";
      case Phase::wide_jam:
        return "wide_jam";
    }
    return "?";
  }

  /// Heuristic cut-offs; none of these come from measured traffic data.
  struct PhaseThresholds {
    double free_speed_fraction{0.9};
    std::size_t free_cluster_size{3};
    long free_persistence{10};
    std::size_t jam_cluster_size{5};
    long jam_persistence{100};
  };

  namespace detail {
    /// Longest streak of consecutive steps whose largest jammed cluster has >= min_size
    /// vehicles. A fully jammed ring counts as one cluster of N.
    inline long longest_cluster_streak(const SpaceTimeLog& log, int v_threshold,
                                       std::size_t min_size) {
      long best = 0, streak = 0;
      for (long k = 0; k < log.steps(); ++k) {
        const auto frame = log.frame(k);
        std::size_t size = 0;
        if (const auto c = largest_jam_cluster(frame, v_threshold, log.length_cells)) {
          size = c->size;
        } else if (!frame.empty() && std::all_of(frame.begin(), frame.end(), [&](const auto& r) {
                     return r.v <= v_threshold;
                   })) {
          size = frame.size();
        }
        streak = size >= min_size && size > 0 ? streak + 1 : 0;
        best = std::max(best, streak);
      }
      return best;
    }
  }  // namespace detail

  /// FreeFlow > WideJam > Synchronized, checked in that order.
  inline Phase classify_phase(const SpaceTimeLog& log, const ModelParams& params,
                              const PhaseThresholds& thr = {}) {
    if (log.records.empty()) {
      throw std::invalid_argument("classify_phase: empty log");
    }
    double mean_v = 0.0;
    for (const auto& r : log.records) {
      mean_v += r.v;
    }
    mean_v /= static_cast<double>(log.records.size());

    const int jam_v = params.v_cri;
    if (mean_v >= thr.free_speed_fraction * params.v_max &&
        detail::longest_cluster_streak(log, jam_v, thr.free_cluster_size) < thr.free_persistence) {
      return Phase::free_flow;
    }
    if (detail::longest_cluster_streak(log, jam_v, thr.jam_cluster_size) >= thr.jam_persistence) {
      const auto series = jam_front_series(log, jam_v);
      try {
        if (estimate_wave_speed(series, params.l_cell).cells_per_step < 0.0) {
          return Phase::wide_jam;
        }
      } catch (const InsufficientSignal&) {
      }
    }
    return Phase::synchronized;
  }

}  // namespace ringca
