/// @file  random.hpp
/// @brief Deterministic uniform sources used by the update rules.
#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ringca {

  /// Anything that yields uniform draws on [0, 1).
  template <typename G>
  concept UniformSource = requires(G& g) {
    { g.uniform() } -> std::convertible_to<double>;
  };

  /// @brief Seeded uniform stream.
  /// @details The engine is std::mt19937_64, whose output sequence is fixed by the C++
  ///          standard. The conversion to [0, 1) takes the top 53 bits of each 64-bit word
  ///          (no std::uniform_real_distribution, whose algorithm is implementation-defined),
  ///          so a seed reproduces the same stream on every conforming toolchain.
  class RandomSource {
    std::mt19937_64 m_engine;
    std::uint64_t m_seed;

  public:
    static constexpr const char* algorithm = "mt19937_64/top53";

    explicit RandomSource(std::uint64_t seed) : m_engine{seed}, m_seed{seed} {}

    std::uint64_t seed() const noexcept { return m_seed; }
    double uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }
  };

  /// Returns the same value forever. Test stub.
  class ConstantSource {
    double m_value;

  public:
    explicit constexpr ConstantSource(double value) : m_value{value} {}
    constexpr double uniform() const noexcept { return m_value; }
  };

  /// Replays a fixed draw list; throws once exhausted.
  class ScriptedSource {
    std::vector<double> m_draws;
    std::size_t m_next{0};

  public:
    explicit ScriptedSource(std::vector<double> draws) : m_draws{std::move(draws)} {}

    double uniform() {
      if (m_next >= m_draws.size()) {
        throw std::out_of_range("ScriptedSource: draw script exhausted");
      }
      return m_draws[m_next++];
    }
    std::size_t consumed() const noexcept { return m_next; }
  };

}  // namespace ringca
