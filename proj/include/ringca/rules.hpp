/// @file  rules.hpp
/// @brief Synchronous update rules: NaSch, DTGBLM and the driver-behavior brake-light model.
///
/// One step maps RoadState(t) to RoadState(t+1) reading only time-t values. Every step takes
/// exactly one uniform draw per vehicle, in ascending id order, whether or not the vehicle
/// uses it. This keeps runs of different models on a shared seed comparable draw for draw.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "params.hpp"
#include "random.hpp"
#include "ring.hpp"

namespace ringca {

  enum class Model { nasch, dtgblm, dbblm };

  inline constexpr std::string_view to_string(Model m) noexcept {
    switch (m) {
      case Model::nasch:
        return "nasch";
      case Model::dtgblm:
        return "dtgblm";
      case Model::dbblm:
        return "dbblm";
    }
    return "?";
  }

  /// Which slowdown probability a vehicle drew against.
  enum class SlowdownCase { nasch, p_b, p_0, p_d, p_d1, p_d2 };

  /// Which acceleration parameter bounded the acceleration sub-step.
  enum class AccelBranch { nasch, a_1, a_2, a_3, blocked };

  struct SlowdownChoice {
    double probability{0.0};
    SlowdownCase tag{SlowdownCase::p_d};
  };

  struct VehicleDecision {
    SlowdownCase slowdown{SlowdownCase::nasch};
    bool randomized{false};
    AccelBranch accel{AccelBranch::nasch};

    friend bool operator==(const VehicleDecision&, const VehicleDecision&) = default;
  };

  struct StepOutcome {
    RoadState next;
    std::vector<VehicleDecision> decisions;  ///< indexed by vehicle id
  };

  /// The leader's guaranteed-feasible next speed, min(d_{n+1}, v_{n+1}).
  inline constexpr int anticipated_speed(int leader_gap, int leader_speed) noexcept {
    return std::min(leader_gap, leader_speed);
  }

  inline constexpr int effective_gap(int gap_cells, int v_anti, int b_anti) noexcept {
    return gap_cells + std::max(v_anti - b_anti, 0);
  }

  /// floor(d_eff / T).
  inline int headway_speed_bound(int d_eff, double T) noexcept {
    return static_cast<int>(std::floor(static_cast<double>(d_eff) / T));
  }

  /// p_b behind a braking leader inside the safe headway, else p_0 at rest, else p_d.
  /// A stopped vehicle never gets p_b: t_sa = 0 there, so t_h < t_sa cannot hold.
  inline SlowdownChoice slowdown_prob_dtgblm(int v, bool leader_brake, double t_h, double t_sa,
                                             const ModelParams& params) noexcept {
    if (leader_brake && t_h < t_sa) {
      return {params.p_b, SlowdownCase::p_b};
    }
    if (v == 0) {
      return {params.p_0, SlowdownCase::p_0};
    }
    return {params.p_d, SlowdownCase::p_d};
  }

  /// As slowdown_prob_dtgblm, with the moving case split by driver class (p_d1 impatient,
  /// p_d2 normal).
  inline SlowdownChoice slowdown_prob_dbblm(int v, bool leader_brake, double t_h, double t_sa,
                                            int driver_class, const ModelParams& params) noexcept {
    auto choice = slowdown_prob_dtgblm(v, leader_brake, t_h, t_sa, params);
    if (choice.tag == SlowdownCase::p_d) {
      choice = driver_class == 1 ? SlowdownChoice{params.p_d1, SlowdownCase::p_d1}
                                 : SlowdownChoice{params.p_d2, SlowdownCase::p_d2};
    }
    return choice;
  }

  namespace detail {

    struct VehicleUpdate {
      int v{0};
      bool brake{false};
      VehicleDecision decision;
    };

    inline VehicleUpdate update_nasch(const RoadState& road, std::size_t n,
                                      const ModelParams& params, double draw) {
      const auto& veh = road.vehicles[n];
      int v = std::min(veh.v + params.a, params.v_max);
      v = std::min(v, gap(road, n));
      VehicleUpdate out;
      out.decision = {SlowdownCase::nasch, false, AccelBranch::nasch};
      if (draw < params.p_nasch) {
        v = std::max(v - 1, 0);
        out.decision.randomized = true;
      }
      out.v = v;
      return out;
    }

    /// Shared body of both brake-light rules; they differ only in the slowdown case split and
    /// in which acceleration parameter applies.
    inline VehicleUpdate update_brake_light(Model model, const RoadState& road, std::size_t n,
                                            const ModelParams& params, double draw) {
      const auto& veh = road.vehicles[n];
      const std::size_t leader = road.leader_of(n);
      const auto& lead = road.vehicles[leader];

      const int d = gap(road, n);
      const double t_h = time_headway(d, veh.v);
      const double t_sa = safe_headway(veh.v, params.h);
      const bool leader_brake = lead.brake;

      const SlowdownChoice p =
          model == Model::dbblm
              ? slowdown_prob_dbblm(veh.v, leader_brake, t_h, t_sa, veh.driver_class, params)
              : slowdown_prob_dtgblm(veh.v, leader_brake, t_h, t_sa, params);

      const int v_anti = anticipated_speed(gap(road, leader), lead.v);
      const int d_eff = effective_gap(d, v_anti, params.b_anti);
      const bool unimpeded = !leader_brake || t_h >= t_sa;

      int accel = 0;
      AccelBranch branch{};
      if (model == Model::dbblm) {
        if (!unimpeded) {
          accel = params.a_3;
          branch = AccelBranch::a_3;
        } else if (veh.driver_class == 1) {
          accel = params.a_1;
          branch = AccelBranch::a_1;
        } else {
          accel = params.a_2;
          branch = AccelBranch::a_2;
        }
      } else {
        if (unimpeded && veh.v == 0) {
          accel = params.a_1;
          branch = AccelBranch::a_1;
        } else if (unimpeded) {
          accel = params.a_2;
          branch = AccelBranch::a_2;
        } else {
          accel = params.blocked_acceleration();
          branch = AccelBranch::blocked;
        }
      }

      VehicleUpdate out;
      int v = std::min({veh.v + accel, params.v_max, headway_speed_bound(d_eff, params.T)});
      out.brake = v < veh.v;
      out.decision = {p.tag, false, branch};
      if (draw < p.probability) {
        v = std::max(v - params.b_rand, 0);
        out.decision.randomized = true;
        if (p.tag == SlowdownCase::p_b) {
          out.brake = true;
        }
      }
      out.v = v;
      return out;
    }

    inline VehicleUpdate update_vehicle(Model model, const RoadState& road, std::size_t n,
                                        const ModelParams& params, double draw) {
      if (model == Model::nasch) {
        return update_nasch(road, n, params, draw);
      }
      return update_brake_light(model, road, n, params, draw);
    }

  }  // namespace detail

  /// @brief Advances `in` one step into `out` using pre-drawn uniforms keyed by vehicle id.
  /// @details `order` is the processing permutation (ascending ids when empty). Every vehicle
  ///          reads only `in`, so any order yields the same `out`. `out` must not alias `in`.
  inline void step_with_draws(Model model, const RoadState& in, const ModelParams& params,
                              std::span<const double> draws, RoadState& out,
                              std::vector<VehicleDecision>* decisions = nullptr,
                              std::span<const std::size_t> order = {}) {
    const std::size_t count = in.size();
    if (draws.size() != count) {
      throw std::invalid_argument("step_with_draws: need exactly one draw per vehicle");
    }
    if (!order.empty() && order.size() != count) {
      throw std::invalid_argument("step_with_draws: order must be a permutation of vehicle ids");
    }
    out.length_cells = in.length_cells;
    out.vehicle_length = in.vehicle_length;
    out.t = in.t + 1;
    out.vehicles.resize(count);
    if (decisions) {
      decisions->resize(count);
    }
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t n = order.empty() ? k : order[k];
      const auto upd = detail::update_vehicle(model, in, n, params, draws[n]);
      auto& next = out.vehicles[n];
      next = in.vehicles[n];
      next.v = upd.v;
      next.brake = upd.brake;
      next.x = (in.vehicles[n].x + upd.v) % in.length_cells;
      if (decisions) {
        (*decisions)[n] = upd.decision;
      }
    }
  }

  inline StepOutcome step_with_draws(Model model, const RoadState& in, const ModelParams& params,
                                     std::span<const double> draws,
                                     std::span<const std::size_t> order = {}) {
    StepOutcome outcome;
    step_with_draws(model, in, params, draws, outcome.next, &outcome.decisions, order);
    return outcome;
  }

  /// Draws one uniform per vehicle (ascending id) and advances one step.
  template <UniformSource Rng>
  StepOutcome step(Model model, const RoadState& road, const ModelParams& params, Rng& rng) {
    std::vector<double> draws(road.size());
    for (auto& r : draws) {
      r = rng.uniform();
    }
    return step_with_draws(model, road, params, draws);
  }

  template <UniformSource Rng>
  StepOutcome nasch_step(const RoadState& road, const ModelParams& params, Rng& rng) {
    return step(Model::nasch, road, params, rng);
  }

  template <UniformSource Rng>
  StepOutcome dtgblm_step(const RoadState& road, const ModelParams& params, Rng& rng) {
    return step(Model::dtgblm, road, params, rng);
  }

  template <UniformSource Rng>
  StepOutcome dbblm_step(const RoadState& road, const ModelParams& params, Rng& rng) {
    return step(Model::dbblm, road, params, rng);
  }

  /// @brief One run: a road, its rule, and the random stream that built it.
  /// @details Double-buffered so long runs do not allocate per step.
  class Simulation {
    Model m_model;
    ModelParams m_params;
    RandomSource m_rng;
    RoadState m_road;
    RoadState m_scratch;
    std::vector<double> m_draws;

  public:
    /// Initializes the ring from `seed`; the same stream then feeds every step.
    Simulation(Model model, const ModelParams& params, int length_cells, std::size_t count,
               Placement placement, InitialSpeed v_init, std::uint64_t seed)
        : m_model{model}, m_params{params}, m_rng{seed} {
      m_params.validate();
      m_road = init_road(length_cells, count, placement, v_init, m_params, m_rng);
      m_draws.resize(count);
    }

    void advance() {
      for (auto& r : m_draws) {
        r = m_rng.uniform();
      }
      step_with_draws(m_model, m_road, m_params, m_draws, m_scratch);
      std::swap(m_road, m_scratch);
    }

    void advance(long steps) {
      for (long i = 0; i < steps; ++i) {
        advance();
      }
    }

    const RoadState& road() const noexcept { return m_road; }
    const ModelParams& params() const noexcept { return m_params; }
    Model model() const noexcept { return m_model; }
  };

}  // namespace ringca
