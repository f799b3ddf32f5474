// Test-only helpers shared by the unit and acceptance suites.
#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ringca/rules.hpp"

namespace ringca::support {

  struct HandTrace {
    RoadState initial;
    std::vector<std::vector<double>> draws;  ///< per step
    std::map<long, std::vector<VehicleState>> states;
    std::map<long, std::vector<VehicleDecision>> decisions;
  };

  inline SlowdownCase parse_case(const std::string& s) {
    static const std::map<std::string, SlowdownCase> m{
        {"nasch", SlowdownCase::nasch}, {"p_b", SlowdownCase::p_b},   {"p_0", SlowdownCase::p_0},
        {"p_d", SlowdownCase::p_d},     {"p_d1", SlowdownCase::p_d1}, {"p_d2", SlowdownCase::p_d2}};
    return m.at(s);
  }

  inline AccelBranch parse_branch(const std::string& s) {
    static const std::map<std::string, AccelBranch> m{{"nasch", AccelBranch::nasch},
                                                      {"a_1", AccelBranch::a_1},
                                                      {"a_2", AccelBranch::a_2},
                                                      {"a_3", AccelBranch::a_3},
                                                      {"blocked", AccelBranch::blocked}};
    return m.at(s);
  }

  inline HandTrace load_hand_trace(const std::string& path) {
    std::ifstream in{path};
    if (!in) {
      throw std::runtime_error("missing fixture " + path);
    }
    HandTrace trace;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') {
        continue;
      }
      std::istringstream ss{line};
      std::string kind;
      ss >> kind;
      if (kind == "length") {
        ss >> trace.initial.length_cells;
      } else if (kind == "vehicle_length") {
        ss >> trace.initial.vehicle_length;
      } else if (kind == "init") {
        VehicleState v;
        int s = 0;
        ss >> v.id >> v.x >> v.v >> s;
        v.brake = s != 0;
        trace.initial.vehicles.push_back(v);
      } else if (kind == "draws") {
        long t = 0;
        ss >> t;
        std::vector<double> d;
        double r = 0;
        while (ss >> r) {
          d.push_back(r);
        }
        trace.draws.resize(static_cast<std::size_t>(t) + 1);
        trace.draws[static_cast<std::size_t>(t)] = d;
      } else if (kind == "state") {
        long t = 0;
        VehicleState v;
        int s = 0;
        ss >> t >> v.id >> v.x >> v.v >> s;
        v.brake = s != 0;
        trace.states[t].push_back(v);
      } else if (kind == "decision") {
        long t = 0;
        std::size_t id = 0;
        std::string c, b;
        int randomized = 0;
        ss >> t >> id >> c >> randomized >> b;
        auto& row = trace.decisions[t];
        row.resize(std::max(row.size(), id + 1));
        row[id] = {parse_case(c), randomized != 0, parse_branch(b)};
      } else {
        throw std::runtime_error("bad fixture line: " + line);
      }
    }
    return trace;
  }

  inline ModelParams hand_trace_params() {
    ModelParams p;
    p.a_1 = 2;
    p.a_2 = 1;
    p.b_anti = 5;
    return p;
  }

  /// Signed gaps after a step, computed without the modulo so overlaps show as negatives.
  inline std::vector<long> gaps_after(const RoadState& before, const RoadState& after) {
    std::vector<long> out(before.size());
    for (std::size_t n = 0; n < before.size(); ++n) {
      if (before.size() == 1) {
        out[n] = gap(after, n);
        continue;
      }
      const auto lead = before.leader_of(n);
      out[n] = static_cast<long>(gap(before, n)) + after.vehicles[lead].v - after.vehicles[n].v;
    }
    return out;
  }

  struct RandomCase {
    ModelParams params;
    int length_cells{0};
    std::size_t count{0};
    Placement placement{Placement::uniform};
    InitialSpeed v_init{InitialSpeed::zero};
    std::uint64_t seed{0};
  };

  /// Draws a valid configuration: L in [100, 2500], N up to jam density, parameters
  /// satisfying ModelParams::validate().
  inline RandomCase random_case(RandomSource& meta) {
    auto pick = [&](int lo, int hi) {
      return lo + static_cast<int>(meta.uniform() * (hi - lo + 1));
    };
    RandomCase c;
    auto& p = c.params;
    p.l_veh = pick(1, 7);
    p.v_max = pick(1, 30);
    p.h = 0.5 + meta.uniform() * 10.0;
    p.T = 1.001 + meta.uniform() * 3.0;
    p.p_b = meta.uniform();
    p.p_0 = meta.uniform();
    p.p_d = meta.uniform();
    p.p_d1 = meta.uniform();
    p.p_d2 = meta.uniform();
    p.p_nasch = meta.uniform();
    p.a = pick(0, 4);
    p.a_1 = pick(0, 4);
    p.a_2 = pick(0, 4);
    p.a_3 = pick(0, 4);
    if (meta.uniform() < 0.3) {
      p.a_blocked = pick(0, 3);
    }
    p.b_rand = pick(0, 4);
    const int min_anti = static_cast<int>(std::ceil(p.T * p.b_rand));
    p.b_anti = min_anti + pick(0, 4);
    p.phi_imp = meta.uniform();
    c.length_cells = pick(100, 2500);
    c.count = static_cast<std::size_t>(pick(1, c.length_cells / p.l_veh));
    c.placement = meta.uniform() < 0.5 ? Placement::uniform : Placement::megajam;
    c.v_init = meta.uniform() < 0.5 ? InitialSpeed::zero : InitialSpeed::vmax;
    c.seed = static_cast<std::uint64_t>(meta.uniform() * 1e12);
    return c;
  }

}  // namespace ringca::support
