/// @file  params.hpp
/// @brief Model parameters for the NaSch, DTGBLM and driver-behavior brake-light rules.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace ringca {

  /// Validation failure naming the offending field and the violated constraint.
  class ParamError : public std::invalid_argument {
    std::string m_field;

  public:
    ParamError(std::string field, const std::string& constraint)
        : std::invalid_argument(field + ": " + constraint), m_field{std::move(field)} {}
    const std::string& field() const noexcept { return m_field; }
  };

  /// @brief All rule parameters. Lengths are in cells, speeds in cells/step, one step is 1 s.
  /// @details Defaults reproduce the ring-road parameter table (l_cell 1.5 m, l_veh 5,
  ///          v_max 20, h 6, T 2.8, p_b 0.8, p_0 0.45, p_d 0.01, a 1, b_rand 1, b_m 5,
  ///          v_cri 5). The driver-behavior extensions (a_1..a_3, p_d1, p_d2, phi_imp),
  ///          the NaSch slowdown probability and b_anti have no published values; their
  ///          defaults are implementer choices.
  struct ModelParams {
    double l_cell{1.5};  ///< meters per cell
    int l_veh{5};
    int v_max{20};
    double h{6.0};  ///< s, interaction horizon
    double T{2.8};  ///< s, expected time headway, must exceed 1

    double p_b{0.8};
    double p_0{0.45};
    double p_d{0.01};
    double p_d1{0.10};
    double p_d2{0.01};

    double p_nasch{0.25};
    int a{1};  ///< NaSch acceleration

    int a_1{2};
    int a_2{1};
    int a_3{1};
    /// DTGBLM acceleration when the leader's brake light is inside the safe headway.
    /// Unset means a_2; set to 0 for the zero-acceleration variant.
    std::optional<int> a_blocked{};

    int b_rand{1};
    int b_anti{5};
    int b_m{5};
    int v_cri{5};  ///< jam-speed threshold for measurement
    double phi_imp{0.5};  ///< fraction of impatient (class 1) drivers

    int blocked_acceleration() const noexcept { return a_blocked.value_or(a_2); }

    /// Throws ParamError on the first violated constraint.
    void validate() const;
  };

  namespace detail {
    inline void check_probability(const char* field, double p) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ParamError(field, "probability out of range [0, 1]");
      }
    }
    inline void check_nonnegative(const char* field, int value) {
      if (value < 0) {
        throw ParamError(field, "must be >= 0");
      }
    }
  }  // namespace detail

  inline void ModelParams::validate() const {
    detail::check_probability("p_b", p_b);
    detail::check_probability("p_0", p_0);
    detail::check_probability("p_d", p_d);
    detail::check_probability("p_d1", p_d1);
    detail::check_probability("p_d2", p_d2);
    detail::check_probability("p_nasch", p_nasch);
    if (!(phi_imp >= 0.0 && phi_imp <= 1.0)) {
      throw ParamError("phi_imp", "fraction out of range [0, 1]");
    }
    if (!(l_cell > 0.0)) {
      throw ParamError("l_cell", "must be > 0");
    }
    if (l_veh < 1) {
      throw ParamError("l_veh", "must be >= 1");
    }
    if (v_max < 1) {
      throw ParamError("v_max", "must be >= 1");
    }
    if (!(h > 0.0)) {
      throw ParamError("h", "must be > 0");
    }
    if (!(T > 1.0)) {
      throw ParamError("T", "must be > 1");
    }
    detail::check_nonnegative("a", a);
    detail::check_nonnegative("a_1", a_1);
    detail::check_nonnegative("a_2", a_2);
    detail::check_nonnegative("a_3", a_3);
    if (a_blocked) {
      detail::check_nonnegative("a_blocked", *a_blocked);
    }
    detail::check_nonnegative("b_rand", b_rand);
    detail::check_nonnegative("b_anti", b_anti);
    detail::check_nonnegative("b_m", b_m);
    detail::check_nonnegative("v_cri", v_cri);
    if (b_anti < b_rand) {
      throw ParamError("b_anti", "constraint b_anti >= b_rand violated (collisions possible)");
    }
    // b_anti >= b_rand alone still admits overlaps when T is close to 1; b_anti >= T * b_rand
    // bounds every follower's advance by its gap plus the leader's minimum advance.
    if (static_cast<double>(b_anti) < T * static_cast<double>(b_rand)) {
      throw ParamError("b_anti", "constraint b_anti >= T * b_rand violated (collisions possible)");
    }
  }

}  // namespace ringca
