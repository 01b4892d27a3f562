#ifndef MRF_FLOCK_EXPERIMENT_HPP
#define MRF_FLOCK_EXPERIMENT_HPP

// Experiment drivers behind the command-line tool, and the CSV formats they
// write. Numbers are printed with 9 significant digits, rows end in '\n', and
// missing values are written as NA.
//
//   timeseries.csv  tick,time,mean_pairwise_distance,mean_nn_distance,
//                   min_pairwise_distance,velocity_disagreement,order_parameter,
//                   n_components,mean_plan_sweeps,max_plan_sweeps,mean_plan_wall_time
//   states.csv      tick,robot,px,py,pz,vx,vy,vz,ax,ay,az
//   plans.csv       tick,robot,sweeps,kl_final,wall_time,converged
//   sweep.csv       k,d_u,candidates,status,plans,mean_sweeps,max_sweeps,
//                   converged_fraction,mean_wall_time,max_wall_time,pair_terms_per_sweep
//   compare.csv     tick,time,<method>_{mean_pairwise_distance,mean_nn_distance,
//                   min_pairwise_distance,velocity_disagreement,order_parameter}
//                   for method in mfa, vicsek
//   compare_summary.csv  method,consensus_tick,consensus_time,final_mean_nn_distance,nn_band_held
//
// Every row of timeseries/states/plans describes one planning tick: the
// snapshot at that tick and the action chosen from it. Wall times are only
// measured output when timing is requested; otherwise the column holds NA so
// that files stay byte-identical between runs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrf_flock/scenario.hpp"
#include "mrf_flock/swarm.hpp"
#include "mrf_flock/vicsek.hpp"

namespace mrf_flock {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

/// Minimal CSV line writer over an ofstream opened in binary mode.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  }

  CsvWriter& field(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  CsvWriter& field(double v) { return field(format_number(v)); }
  CsvWriter& field(const std::optional<double>& v) { return field(format_number(v)); }
  CsvWriter& field(std::size_t v) { return field(std::to_string(v)); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

  void row(std::initializer_list<std::string> cells) {
    for (const auto& c : cells) field(c);
    end_row();
  }

  void close() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed");
    out_.close();
  }

 private:
  std::ofstream out_;
  bool first_ = true;
};

struct RunOptions {
  std::optional<std::size_t> ticks;  // overrides the scenario's tick count
  bool timing = false;
  std::size_t threads = planning_threads();
};

struct RunOutput {
  std::vector<MetricsRecord> records;  // ticks + 1 entries, see swarm::run
  std::vector<std::vector<RobotPlan>> plans;  // one entry per planning tick
};

/// Removes the listed files unless dismissed; used to clean up partial output.
class OutputGuard {
 public:
  void track(std::filesystem::path p) { paths_.push_back(std::move(p)); }
  void dismiss() { paths_.clear(); }
  ~OutputGuard() {
    std::error_code ec;
    for (const auto& p : paths_) std::filesystem::remove(p, ec);
  }

 private:
  std::vector<std::filesystem::path> paths_;
};

namespace detail {

inline void timeseries_header(CsvWriter& w) {
  w.row({"tick", "time", "mean_pairwise_distance", "mean_nn_distance", "min_pairwise_distance",
         "velocity_disagreement", "order_parameter", "n_components", "mean_plan_sweeps", "max_plan_sweeps",
         "mean_plan_wall_time"});
}

inline void timeseries_row(CsvWriter& w, const MetricsRecord& r, bool timing) {
  w.field(r.tick).field(r.time).field(r.mean_pairwise_distance).field(r.mean_nn_distance);
  w.field(r.min_pairwise_distance).field(r.velocity_disagreement).field(r.order_parameter);
  w.field(r.n_components).field(r.mean_plan_sweeps());
  if (r.plan_sweeps.empty())
    w.field(std::string("NA"));
  else
    w.field(*std::max_element(r.plan_sweeps.begin(), r.plan_sweeps.end()));
  w.field(timing ? r.mean_plan_wall_time() : std::nullopt);
  w.end_row();
}

}  // namespace detail

/// Runs the scenario and writes timeseries.csv, states.csv, plans.csv and the
/// resolved scenario.json into out_dir. Files are removed again if the run fails.
inline RunOutput cmd_run(const Scenario& scenario, const std::filesystem::path& out_dir,
                         const RunOptions& options = {}) {
  scenario.validate();
  const std::size_t ticks = options.ticks.value_or(scenario.ticks);
  std::filesystem::create_directories(out_dir);

  OutputGuard guard;
  const auto ts_path = out_dir / "timeseries.csv";
  const auto st_path = out_dir / "states.csv";
  const auto pl_path = out_dir / "plans.csv";
  const auto sc_path = out_dir / "scenario.json";
  for (const auto& p : {ts_path, st_path, pl_path, sc_path}) guard.track(p);

  {
    Scenario resolved = scenario;
    resolved.ticks = ticks;
    resolved.output_dir = out_dir.string();
    std::ofstream sc(sc_path, std::ios::binary | std::ios::trunc);
    sc << scenario_to_json(resolved).dump(2) << '\n';
  }

  CsvWriter ts(ts_path), st(st_path), pl(pl_path);
  detail::timeseries_header(ts);
  st.row({"tick", "robot", "px", "py", "pz", "vx", "vy", "vz", "ax", "ay", "az"});
  pl.row({"tick", "robot", "sweeps", "kl_final", "wall_time", "converged"});

  RunOutput output;
  const Observer writer = [&](const SwarmWorld& world, std::span<const RobotPlan> plans) {
    if (plans.empty()) return;  // final world: nothing was planned from it
    for (std::size_t r = 0; r < world.robots.size(); ++r) {
      const auto& s = world.robots[r];
      const auto& a = plans[r].action.acceleration;
      st.field(world.tick).field(r);
      for (int d = 0; d < 3; ++d) st.field(s.position[d]);
      for (int d = 0; d < 3; ++d) st.field(s.velocity[d]);
      for (int d = 0; d < 3; ++d) st.field(a[d]);
      st.end_row();
      const auto& p = plans[r];
      pl.field(world.tick).field(r).field(p.sweeps).field(p.kl_final);
      pl.field(options.timing ? format_number(p.wall_time) : std::string("NA"));
      pl.field(std::string(p.converged ? "1" : "0"));
      pl.end_row();
    }
    output.plans.emplace_back(plans.begin(), plans.end());
  };
  output.records = run(scenario.swarm, ticks, std::span<const Observer>(&writer, 1), options.threads,
                       scenario.threshold());
  for (std::size_t t = 0; t < ticks; ++t) detail::timeseries_row(ts, output.records[t], options.timing);
  ts.close();
  st.close();
  pl.close();
  guard.dismiss();
  return output;
}

struct SweepCell {
  std::size_t k = 0;
  double d_u = 0.0;
  std::size_t candidates = 0;
  std::string status = "ok";
  std::size_t plans = 0;
  double mean_sweeps = 0.0;
  std::size_t max_sweeps = 0;
  double converged_fraction = 0.0;
  double mean_wall_time = 0.0;
  double max_wall_time = 0.0;
  double pair_terms_per_sweep = 0.0;
};

inline std::string sweep_cell_dir_name(std::size_t k, double d_u) {
  return "k" + std::to_string(k) + "_du" + format_number(d_u);
}

/// One timed run per (k, d_u) cell. A failing cell is recorded in its status
/// column and the sweep moves on.
inline std::vector<SweepCell> cmd_sweep(const Scenario& scenario, const std::vector<std::size_t>& k_list,
                                        const std::vector<double>& du_list, const std::filesystem::path& out_dir,
                                        RunOptions options = {}) {
  if (k_list.empty() || du_list.empty()) throw InvalidArgument("sweep", "k and d_u grids must be nonempty");
  std::filesystem::create_directories(out_dir);
  options.timing = true;
  std::vector<SweepCell> cells;
  for (std::size_t k : k_list)
    for (double du : du_list) {
      SweepCell cell;
      cell.k = k;
      cell.d_u = du;
      try {
        Scenario sc = scenario;
        sc.swarm.k = k;
        sc.vicsek_k.reset();
        sc.swarm.d_u = Vec3(du, du, du);
        sc.validate();
        cell.candidates = sc.swarm.action_space().size();
        const RunOutput out = cmd_run(sc, out_dir / sweep_cell_dir_name(k, du), options);
        std::size_t total_sweeps = 0, converged = 0;
        double total_terms_per_sweep = 0.0;
        for (const auto& tick : out.plans)
          for (const auto& p : tick) {
            ++cell.plans;
            total_sweeps += p.sweeps;
            cell.max_sweeps = std::max(cell.max_sweeps, p.sweeps);
            converged += p.converged ? 1 : 0;
            cell.mean_wall_time += p.wall_time;
            cell.max_wall_time = std::max(cell.max_wall_time, p.wall_time);
            total_terms_per_sweep += static_cast<double>(p.pair_terms) / static_cast<double>(p.sweeps);
          }
        if (cell.plans > 0) {
          const auto n = static_cast<double>(cell.plans);
          cell.mean_sweeps = static_cast<double>(total_sweeps) / n;
          cell.converged_fraction = static_cast<double>(converged) / n;
          cell.mean_wall_time /= n;
          cell.pair_terms_per_sweep = total_terms_per_sweep / n;
        }
      } catch (const std::exception& e) {
        cell.status = std::string("error: ") + e.what();
        std::replace(cell.status.begin(), cell.status.end(), ',', ';');
      }
      cells.push_back(cell);
    }

  CsvWriter w(out_dir / "sweep.csv");
  w.row({"k", "d_u", "candidates", "status", "plans", "mean_sweeps", "max_sweeps", "converged_fraction",
         "mean_wall_time", "max_wall_time", "pair_terms_per_sweep"});
  for (const auto& c : cells) {
    w.field(c.k).field(c.d_u).field(c.candidates).field(c.status).field(c.plans).field(c.mean_sweeps);
    w.field(c.max_sweeps).field(c.converged_fraction).field(c.mean_wall_time).field(c.max_wall_time);
    w.field(c.pair_terms_per_sweep);
    w.end_row();
  }
  w.close();
  return cells;
}

/// First record whose order parameter exceeds `threshold`.
inline std::optional<std::size_t> first_consensus_tick(const std::vector<MetricsRecord>& records,
                                                       double threshold = 0.99) {
  for (const auto& r : records)
    if (r.order_parameter > threshold) return r.tick;
  return std::nullopt;
}

/// True when every record at or after `from_time` has a mean nearest-neighbor
/// distance within [lo, hi].
inline bool nn_band_held(const std::vector<MetricsRecord>& records, double from_time, double lo, double hi) {
  bool any = false;
  for (const auto& r : records) {
    if (r.time + 1e-9 < from_time) continue;
    any = true;
    if (!r.mean_nn_distance || *r.mean_nn_distance < lo || *r.mean_nn_distance > hi) return false;
  }
  return any;
}

struct Comparison {
  std::vector<MetricsRecord> mfa;
  std::vector<MetricsRecord> vicsek;
  double d_star = 0.0;
  double band_from_time = 0.0;  // start of the final 10 s window
  std::optional<std::size_t> mfa_consensus_tick;
  std::optional<std::size_t> vicsek_consensus_tick;
  bool mfa_nn_band = false;
  bool vicsek_nn_band = false;
};

inline constexpr double kBandFraction = 0.2;
inline constexpr double kSettleWindow = 10.0;  // seconds

/// Runs the mean-field swarm and the Vicsek baseline from the same initial
/// positions. Vicsek headings are drawn from a stream derived from the seed.
inline Comparison compare_vicsek(const Scenario& scenario, std::size_t ticks,
                                 std::size_t threads = planning_threads()) {
  scenario.validate();
  Comparison cmp;
  cmp.d_star = morse_equilibrium(scenario.swarm.morse);
  const double threshold = scenario.threshold();
  cmp.mfa = run(scenario.swarm, ticks, {}, threads, threshold);

  const VicsekParams vp = scenario.vicsek();
  Rng rng(scenario.swarm.seed ^ 0x9c1b5e3a7d2f4061ULL);
  std::vector<FlatState> particles = vicsek_init(make_world(scenario.swarm).robots, vp, rng);
  cmp.vicsek.push_back(compute_metrics(0, 0.0, particles, {}, threshold));
  for (std::size_t t = 1; t <= ticks; ++t) {
    particles = vicsek_step(particles, vp, rng);
    cmp.vicsek.push_back(compute_metrics(t, static_cast<double>(t) * vp.dt, particles, {}, threshold));
  }

  const double end_time = static_cast<double>(ticks) * scenario.swarm.dt;
  cmp.band_from_time = std::max(0.0, end_time - kSettleWindow);
  const double lo = (1.0 - kBandFraction) * cmp.d_star, hi = (1.0 + kBandFraction) * cmp.d_star;
  cmp.mfa_nn_band = nn_band_held(cmp.mfa, cmp.band_from_time, lo, hi);
  cmp.vicsek_nn_band = nn_band_held(cmp.vicsek, cmp.band_from_time, lo, hi);
  cmp.mfa_consensus_tick = first_consensus_tick(cmp.mfa);
  cmp.vicsek_consensus_tick = first_consensus_tick(cmp.vicsek);
  return cmp;
}

/// Writes compare.csv and compare_summary.csv.
inline Comparison cmd_compare_vicsek(const Scenario& scenario, const std::filesystem::path& out_dir,
                                     const RunOptions& options = {}) {
  const std::size_t ticks = options.ticks.value_or(scenario.ticks);
  Comparison cmp = compare_vicsek(scenario, ticks, options.threads);
  std::filesystem::create_directories(out_dir);
  OutputGuard guard;
  guard.track(out_dir / "compare.csv");
  guard.track(out_dir / "compare_summary.csv");

  CsvWriter w(out_dir / "compare.csv");
  w.field(std::string("tick")).field(std::string("time"));
  for (const char* method : {"mfa", "vicsek"})
    for (const char* col : {"mean_pairwise_distance", "mean_nn_distance", "min_pairwise_distance",
                            "velocity_disagreement", "order_parameter"})
      w.field(std::string(method) + "_" + col);
  w.end_row();
  for (std::size_t t = 0; t <= ticks; ++t) {
    w.field(cmp.mfa[t].tick).field(cmp.mfa[t].time);
    for (const auto* r : {&cmp.mfa[t], &cmp.vicsek[t]}) {
      w.field(r->mean_pairwise_distance).field(r->mean_nn_distance).field(r->min_pairwise_distance);
      w.field(r->velocity_disagreement).field(r->order_parameter);
    }
    w.end_row();
  }
  w.close();

  CsvWriter s(out_dir / "compare_summary.csv");
  s.row({"method", "consensus_tick", "consensus_time", "final_mean_nn_distance", "nn_band_held"});
  auto summary = [&](const char* name, const std::vector<MetricsRecord>& recs, std::optional<std::size_t> tick,
                     bool band) {
    s.field(std::string(name));
    s.field(tick ? std::to_string(*tick) : std::string("NA"));
    s.field(tick ? std::optional<double>(static_cast<double>(*tick) * scenario.swarm.dt) : std::nullopt);
    s.field(recs.back().mean_nn_distance);
    s.field(std::string(band ? "1" : "0"));
    s.end_row();
  };
  summary("mfa", cmp.mfa, cmp.mfa_consensus_tick, cmp.mfa_nn_band);
  summary("vicsek", cmp.vicsek, cmp.vicsek_consensus_tick, cmp.vicsek_nn_band);
  s.close();
  guard.dismiss();
  return cmp;
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_EXPERIMENT_HPP
