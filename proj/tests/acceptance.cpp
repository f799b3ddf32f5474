// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ringca/experiments.hpp"
#include "support.hpp"

using namespace ringca;
namespace fs = std::filesystem;

namespace {

  struct Verdict {
    bool pass{false};
    std::string detail;
  };

  double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
  }

  // 1. Collision-freedom and speed bounds, 200 random valid configurations x 500 steps per
  //    model, under 60 s. Valid means ModelParams::validate() accepts, so b_anti >= T * b_rand.
  Verdict collision_freedom() {
    const auto start = std::chrono::steady_clock::now();
    long negative_gaps = 0, speed_violations = 0, updates = 0;
    for (Model m : {Model::nasch, Model::dtgblm, Model::dbblm}) {
      RandomSource meta{static_cast<std::uint64_t>(1000 + static_cast<int>(m))};
      for (int trial = 0; trial < 200; ++trial) {
        const auto c = support::random_case(meta);
        Simulation sim{m, c.params, c.length_cells, c.count, c.placement, c.v_init, c.seed};
        RoadState before;
        for (int t = 0; t < 500; ++t) {
          before = sim.road();
          sim.advance();
          for (long g : support::gaps_after(before, sim.road())) {
            negative_gaps += g < 0;
          }
          for (const auto& v : sim.road().vehicles) {
            speed_violations += v.v < 0 || v.v > c.params.v_max;
          }
          updates += static_cast<long>(c.count);
        }
      }
    }
    const double secs = seconds_since(start);

    // Diagnostic only: same sampler with b_anti drawn from [b_rand, b_rand + 4], which
    // validate() rejects when b_anti < T * b_rand. Stepped directly without validation.
    long weak_runs = 0, weak_overlapping_runs = 0;
    for (Model m : {Model::dtgblm, Model::dbblm}) {
      RandomSource meta{static_cast<std::uint64_t>(2000 + static_cast<int>(m))};
      for (int trial = 0; trial < 200; ++trial) {
        auto c = support::random_case(meta);
        c.params.b_anti = c.params.b_rand + static_cast<int>(meta.uniform() * 5);
        RandomSource rng{c.seed};
        auto road = init_road(c.length_cells, c.count, c.placement, c.v_init, c.params, rng);
        bool overlap = false;
        for (int t = 0; t < 500 && !overlap; ++t) {
          auto next = step(m, road, c.params, rng).next;
          for (long g : support::gaps_after(road, next)) {
            overlap = overlap || g < 0;
          }
          road = std::move(next);
        }
        weak_overlapping_runs += overlap;
        ++weak_runs;
      }
    }

    std::ostringstream d;
    d << updates << " vehicle-updates, negative gaps " << negative_gaps << ", speed violations "
      << speed_violations << ", " << fmt("%.1f", secs) << " s (target < 60 s)"
      << " | diagnostic b_anti >= b_rand only: " << weak_overlapping_runs << "/" << weak_runs
      << " runs overlapped";
    return {negative_gaps == 0 && speed_violations == 0 && secs < 60.0, d.str()};
  }

  // 2. dbblm with phi_imp = 0, p_d2 = p_d, a_2 = a_3 against dtgblm with a_1 = a_2.
  Verdict reduction_equivalence() {
    ModelParams reduced;
    reduced.phi_imp = 0.0;
    reduced.p_d2 = reduced.p_d;
    reduced.a_3 = reduced.a_2;
    ModelParams base = reduced;
    base.a_1 = base.a_2;
    int mismatched_runs = 0, runs = 0;
    for (double k : {20.0, 36.0, 50.0}) {
      const auto count = static_cast<std::size_t>(density_to_count(k, 1000, 1.5, 5));
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Simulation a{Model::dtgblm, base, 1000, count, Placement::uniform, InitialSpeed::zero,
                     seed};
        Simulation b{Model::dbblm, reduced, 1000, count, Placement::uniform, InitialSpeed::zero,
                     seed};
        bool same = a.road() == b.road();
        for (int t = 0; t < 1000 && same; ++t) {
          a.advance();
          b.advance();
          same = a.road() == b.road();
        }
        mismatched_runs += !same;
        ++runs;
      }
    }
    return {mismatched_runs == 0, std::to_string(runs) + " runs (k = 20/36/50, seeds 1-5), " +
                                      std::to_string(mismatched_runs) + " diverged"};
  }

  // 3. Committed hand-trace fixture.
  Verdict hand_trace() {
    const auto trace =
        support::load_hand_trace(std::string(RINGCA_FIXTURES) + "/dtgblm_hand_trace.txt");
    const auto params = support::hand_trace_params();
    auto road = trace.initial;
    int mismatches = 0;
    for (std::size_t t = 0; t < trace.draws.size(); ++t) {
      ScriptedSource rng{trace.draws[t]};
      const auto out = dtgblm_step(road, params, rng);
      mismatches += out.decisions != trace.decisions.at(static_cast<long>(t));
      road = out.next;
      const auto& expect = trace.states.at(static_cast<long>(t) + 1);
      for (std::size_t n = 0; n < expect.size(); ++n) {
        const auto& got = road.vehicles.at(n);
        mismatches += got.x != expect[n].x || got.v != expect[n].v || got.brake != expect[n].brake;
      }
    }
    return {mismatches == 0 && trace.draws.size() == 3,
            std::to_string(trace.draws.size()) + " steps, " + std::to_string(mismatches) +
                " mismatches"};
  }

  // 4. NaSch, p = 0, uniform spacing with every gap >= v_max.
  Verdict nasch_free_flow() {
    ModelParams p;
    p.p_nasch = 0.0;
    bool ok = true;
    std::ostringstream d;
    for (double k : {5.0, 12.0, 20.0}) {
      const auto count = static_cast<std::size_t>(density_to_count(k, 2500, p.l_cell, p.l_veh));
      Simulation sim{Model::nasch, p, 2500, count, Placement::uniform, InitialSpeed::zero, 1};
      for (std::size_t n = 0; n < count; ++n) {
        ok = ok && gap(sim.road(), n) >= p.v_max;
      }
      sim.advance(p.v_max);
      for (int extra = 0; extra < 50; ++extra) {
        for (const auto& v : sim.road().vehicles) {
          ok = ok && v.v == p.v_max;
        }
        const auto s = summarize(sim.road(), p);
        ok = ok && s.flow == s.density * (p.v_max * kmh_per_cell_step(p.l_cell));
        sim.advance();
      }
      d << "k=" << k << " flow " << fmt("%.4f", summarize(sim.road(), p).flow) << " veh/h; ";
    }
    d << "all at v_max after v_max steps";
    return {ok, d.str()};
  }

  // 5. Fundamental-diagram shape at L = 2500, 10000 steps, warmup 5000, 5 seeds.
  Verdict fd_shape() {
    const auto start = std::chrono::steady_clock::now();
    const ModelParams p;
    const std::vector<double> k{15.0, 30.0, 45.0};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    const auto pts = fd_sweep(Model::dtgblm, k, RunSpec{}, seeds, p);
    double mean[3] = {0, 0, 0};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      mean[i / seeds.size()] += pts[i].flow / static_cast<double>(seeds.size());
    }
    const double target = 15.0 * 108.0;
    const bool free_branch = std::abs(mean[0] - target) <= 0.05 * target;
    const bool breakdown = mean[2] < mean[1];
    const double secs = seconds_since(start);
    std::ostringstream d;
    d << "(a) flow(15) " << fmt("%.1f", mean[0]) << " vs " << fmt("%.1f", target) << " +/- 5% "
      << (free_branch ? "ok" : "MISS") << " [rel. dev " << fmt("%.2f", 100.0 * (mean[0] - target) / target)
      << "%]; (b) flow(45) " << fmt("%.1f", mean[2]) << " < flow(30) " << fmt("%.1f", mean[1])
      << " " << (breakdown ? "ok" : "MISS") << "; " << fmt("%.1f", secs) << " s (target < 300 s)";
    return {free_branch && breakdown && secs < 300.0, d.str()};
  }

  // 6. Wave-speed spread across slowdown variants at k = 50, dbblm below dtgblm. Uses the
  //    configured defaults: uniform start at rest, jam threshold v_cri, window [9500, 10000).
  Verdict wave_stabilization() {
    auto describe = [](const WaveReport& report) {
      std::ostringstream d;
      for (const auto& s : report.summaries) {
        d << to_string(s.model) << " spread ";
        d << (s.spread ? fmt("%.4f", *s.spread) + " km/h" : std::string("undefined"));
        d << " (variant means:";
        for (const auto& m : s.variant_means) {
          d << " " << (m ? fmt("%.2f", *m) : std::string("n/a"));
        }
        d << "); ";
      }
      std::size_t with_signal = 0;
      for (const auto& r : report.rows) {
        with_signal += r.estimate.has_value();
      }
      d << with_signal << "/" << report.rows.size() << " runs with a trackable front";
      return d.str();
    };

    auto cfg = parse_config_string("density = 50\nwave_models = dtgblm, dbblm\n"
                                   "p_d_sweep = 0.01, 0.1, 0.3\nseeds = 1, 2, 3, 4, 5\n");
    const auto report = run_wave(cfg);
    const auto& dt = report.summaries.at(0);
    const auto& db = report.summaries.at(1);
    const bool pass = dt.spread && db.spread && *db.spread < *dt.spread;
    std::string detail = describe(report);

    // Diagnostic only: same runs tracked with a stricter jam threshold. Not part of the verdict.
    cfg.jam_threshold = 1;
    detail += " | diagnostic jam_threshold=1: " + describe(run_wave(cfg));
    return {pass, detail};
  }

  // 7. One dtgblm step under shuffled processing order, 100 random states.
  Verdict order_independence() {
    RandomSource meta{707};
    const ModelParams p;
    int differing = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto c = support::random_case(meta);
      Simulation sim{Model::dtgblm, c.params, c.length_cells, c.count, c.placement, c.v_init,
                     c.seed};
      sim.advance(static_cast<long>(meta.uniform() * 200));
      const auto& road = sim.road();
      std::vector<double> draws(road.size());
      for (auto& r : draws) r = meta.uniform();
      std::vector<std::size_t> order(road.size());
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(meta.uniform() * i)]);
      }
      const auto ascending = step_with_draws(Model::dtgblm, road, c.params, draws);
      const auto shuffled = step_with_draws(Model::dtgblm, road, c.params, draws, order);
      differing += ascending.next != shuffled.next || ascending.decisions != shuffled.decisions;
    }
    return {differing == 0, "100 states, " + std::to_string(differing) + " differ"};
  }

  std::string slurp(const fs::path& path) {
    std::ifstream in{path, std::ios::binary};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // 8. cmd_fd byte-identical on rerun; a different seed changes the file.
  Verdict fd_determinism() {
    const auto root = fs::temp_directory_path() / "ringca_acceptance_fd";
    fs::remove_all(root);
    const std::string base =
        "model = dbblm\nL = 2500\nsteps = 3000\nwarmup = 1000\nwindow_start = 2500\n"
        "window_end = 3000\ndensities = 10:60:10\n";
    auto cfg = parse_config_string(base + "seeds = 1, 2\n");
    cfg.output_dir = (root / "a").string();
    const auto a = slurp(cmd_fd(cfg));
    cfg.output_dir = (root / "b").string();
    const auto b = slurp(cmd_fd(cfg));
    auto other = parse_config_string(base + "seeds = 3, 4\n");
    other.output_dir = (root / "c").string();
    const auto c = slurp(cmd_fd(other));
    const bool same = a == b && !a.empty();
    const bool differs = a != c;
    return {same && differs, std::string("rerun ") + (same ? "identical" : "DIFFERENT") +
                                 " (" + std::to_string(a.size()) + " bytes), other seeds " +
                                 (differs ? "differ" : "IDENTICAL")};
  }

  // 9. Line fit on slope -2 with +/-1 cell uniform noise, 500 points, 100 trials.
  Verdict wave_fit_accuracy() {
    RandomSource rng{9};
    double worst = 0.0;
    int misses = 0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<FrontSample> series;
      const double offset = rng.uniform() * 2500.0;
      for (long t = 0; t < 500; ++t) {
        series.push_back(
            {9500 + t, offset - 2.0 * static_cast<double>(t) + (2.0 * rng.uniform() - 1.0)});
      }
      const double err = std::abs(estimate_wave_speed(series, 1.5).cells_per_step + 2.0);
      worst = std::max(worst, err);
      misses += err > 0.05;
    }
    return {misses == 0, "worst |slope + 2| = " + fmt("%.5f", worst) + " cells/step over 100 trials"};
  }

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"C1", "collision-freedom property suite", collision_freedom},
      {"C2", "dbblm -> dtgblm reduction equivalence", reduction_equivalence},
      {"C3", "dtgblm hand-trace fixture", hand_trace},
      {"C4", "NaSch deterministic free flow", nasch_free_flow},
      {"C5", "fundamental-diagram shape at ring scale", fd_shape},
      {"C6", "wave-speed spread dbblm < dtgblm", wave_stabilization},
      {"C7", "synchronous order independence", order_independence},
      {"C8", "fd determinism", fd_determinism},
      {"C9", "wave-speed fit accuracy", wave_fit_accuracy},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %s %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
