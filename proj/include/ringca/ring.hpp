/// @file  ring.hpp
/// @brief Periodic single-lane road: vehicle state, ring geometry and initialization.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "params.hpp"
#include "random.hpp"

namespace ringca {

  struct VehicleState {
    std::size_t id{0};
    int x{0};  ///< cell index in [0, L)
    int v{0};  ///< cells/step
    bool brake{false};
    int driver_class{0};  ///< 1 = impatient, 0 = normal; fixed for the run

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
  };

  /// @brief The synchronous-update unit.
  /// @details `vehicles` is indexed by id. Vehicle ids follow the driving direction, so the
  ///          leader of vehicle n is vehicle (n + 1) mod N and positions increase cyclically
  ///          along the sequence. No overtaking keeps that order for the whole run.
  struct RoadState {
    int length_cells{0};
    int vehicle_length{1};
    long t{0};
    std::vector<VehicleState> vehicles;

    std::size_t size() const noexcept { return vehicles.size(); }
    std::size_t leader_of(std::size_t n) const noexcept { return (n + 1) % vehicles.size(); }

    friend bool operator==(const RoadState&, const RoadState&) = default;
  };

  enum class Placement { uniform, megajam };
  enum class InitialSpeed { zero, vmax };

  namespace detail {
    inline void check_index(const RoadState& road, std::size_t n) {
      if (road.vehicles.empty()) {
        throw std::invalid_argument("gap: road has no vehicles");
      }
      if (n >= road.vehicles.size()) {
        throw std::out_of_range("vehicle index " + std::to_string(n) + " out of range (N=" +
                                std::to_string(road.vehicles.size()) + ")");
      }
    }
  }  // namespace detail

  /// Empty cells between vehicle n's front and its leader's rear. N = 1 gives L - l_veh.
  inline int gap(const RoadState& road, std::size_t n) {
    detail::check_index(road, n);
    const int L = road.length_cells;
    if (road.vehicles.size() == 1) {
      return L - road.vehicle_length;
    }
    const int xn = road.vehicles[n].x;
    const int xl = road.vehicles[road.leader_of(n)].x;
    const int ahead = ((xl - xn) % L + L) % L;
    return ahead - road.vehicle_length;
  }

  /// d / v in seconds; stopped vehicles get +infinity.
  inline double time_headway(int gap_cells, int speed) noexcept {
    if (speed == 0) {
      return std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(gap_cells) / static_cast<double>(speed);
  }

  inline double time_headway(const RoadState& road, std::size_t n) {
    return time_headway(gap(road, n), road.vehicles.at(n).v);
  }

  /// min(v, h): the speed value itself is read as seconds.
  inline double safe_headway(int speed, double h) noexcept {
    return std::min(static_cast<double>(speed), h);
  }

  /// Number of vehicles on L cells for a density in veh/km, clamped to what fits.
  inline int density_to_count(double density_vehkm, int length_cells, double l_cell, int l_veh) {
    if (density_vehkm <= 0.0) {
      return 0;
    }
    const double exact = density_vehkm * static_cast<double>(length_cells) * l_cell / 1000.0;
    const auto count = static_cast<long>(std::llround(exact));
    const long capacity = length_cells / l_veh;
    return static_cast<int>(std::min(count, capacity));
  }

  inline double count_to_density(std::size_t count, int length_cells, double l_cell) {
    if (length_cells <= 0) {
      return 0.0;
    }
    return static_cast<double>(count) * 1000.0 / (static_cast<double>(length_cells) * l_cell);
  }

  /// @brief Fixed per-run driver personalities; I_n = 1 with probability phi_imp.
  /// @details Consumes exactly one draw per vehicle, ascending id, for every phi_imp, so the
  ///          remaining stream is the same whatever the fraction.
  template <UniformSource Rng>
  std::vector<int> assign_driver_classes(std::size_t count, double phi_imp, Rng& rng) {
    if (!(phi_imp >= 0.0 && phi_imp <= 1.0)) {
      throw ParamError("phi_imp", "fraction out of range [0, 1]");
    }
    std::vector<int> classes(count);
    for (auto& c : classes) {
      c = rng.uniform() < phi_imp ? 1 : 0;
    }
    return classes;
  }

  /// @brief Builds the t = 0 ring.
  /// @details uniform spaces vehicle i at floor(i L / N); megajam packs them bumper to bumper
  ///          from cell 0 at rest. Driver classes come from assign_driver_classes on `rng`.
  template <UniformSource Rng>
  RoadState init_road(int length_cells, std::size_t count, Placement placement, InitialSpeed v_init,
                      const ModelParams& params, Rng& rng) {
    if (length_cells < 1) {
      throw std::invalid_argument("init_road: ring length must be >= 1 cell");
    }
    const auto required = static_cast<long long>(count) * params.l_veh;
    if (required > length_cells) {
      throw std::invalid_argument("init_road: " + std::to_string(count) + " vehicles of length " +
                                  std::to_string(params.l_veh) + " need L >= " +
                                  std::to_string(required) + " cells, got " +
                                  std::to_string(length_cells));
    }
    RoadState road;
    road.length_cells = length_cells;
    road.vehicle_length = params.l_veh;
    road.t = 0;
    road.vehicles.resize(count);
    const auto classes = assign_driver_classes(count, params.phi_imp, rng);
    for (std::size_t i = 0; i < count; ++i) {
      auto& veh = road.vehicles[i];
      veh.id = i;
      veh.driver_class = classes[i];
      if (placement == Placement::uniform) {
        veh.x = static_cast<int>(static_cast<long long>(i) * length_cells /
                                 static_cast<long long>(count));
        veh.v = v_init == InitialSpeed::vmax ? params.v_max : 0;
      } else {
        veh.x = static_cast<int>(i) * params.l_veh;
        veh.v = 0;
      }
    }
    return road;
  }

}  // namespace ringca
