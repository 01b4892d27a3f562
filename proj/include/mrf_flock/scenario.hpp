#ifndef MRF_FLOCK_SCENARIO_HPP
#define MRF_FLOCK_SCENARIO_HPP

// Scenario files: a JSON document holding the swarm configuration, the
// Vicsek baseline parameters, the run length and the output location.
//
//   {
//     "name": "paper_2d_10",
//     "ticks": 200,
//     "swarm": {
//       "n_robots": 10, "dims": 2, "k": 3, "dt": 0.2,
//       "u_max": [1, 1, 1], "d_u": [0.5, 0.5, 0.5], "v_max": 1.0,
//       "tol": 1e-4, "max_sweeps": 50, "order": "sequential", "seed": 1,
//       "placement": {"kind": "uniform_box", "box_min": [-10, -10, 0],
//                     "box_max": [10, 10, 0], "min_separation": 1.0}
//     },
//     "energy": {
//       "morse": {"a": 5, "b": 15, "k_a": 1.5, "k_r": 0.5},
//       "roost": {"enabled": true, "center": [0, 0, 0], "k_R": 10, "mode": "attractive"},
//       "coupling": {"mode": "penalized", "weight": 0.05}
//     },
//     "vicsek": {"v0": 1.0, "eta": 0.0, "k": 3},
//     "metrics": {"fragmentation_threshold": 3.3},
//     "output": {"dir": "out"}
//   }
//
// Every key is optional and falls back to the defaults of the C++ types;
// unknown keys are errors. An explicit placement uses
// {"kind": "explicit", "positions": [[x, y, z], ...], "velocities": [...]}.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrf_flock/swarm.hpp"
#include "mrf_flock/vicsek.hpp"

namespace mrf_flock {

struct Scenario {
  std::string name = "custom";
  std::size_t ticks = 200;
  SwarmConfig swarm;
  double vicsek_v0 = 1.0;
  double vicsek_eta = 0.0;
  std::optional<std::size_t> vicsek_k;  // defaults to swarm.k
  std::optional<double> fragmentation_threshold;  // defaults to 2 d*
  std::string output_dir = "out";

  VicsekParams vicsek() const {
    VicsekParams p;
    p.v0 = vicsek_v0;
    p.eta = vicsek_eta;
    p.k = vicsek_k.value_or(swarm.k);
    p.dt = swarm.dt;
    p.dims = swarm.dims;
    return p;
  }

  double threshold() const { return fragmentation_threshold.value_or(default_fragmentation_threshold(swarm)); }

  void validate() const {
    swarm.validate();
    const VicsekParams v = vicsek();
    v.validate();
    if (v.k >= swarm.n_robots) throw InvalidArgument("vicsek.k", "must be smaller than n_robots");
    if (fragmentation_threshold && !(*fragmentation_threshold > 0.0))
      throw InvalidArgument("metrics.fragmentation_threshold", "must be positive");
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

using nlohmann::json;

/// Walks one JSON object, remembering which keys were read so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidArgument(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw InvalidArgument(child_path(key), "expected a number");
      out = v->get<double>();
    }
  }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0)
        throw InvalidArgument(child_path(key), "expected a non-negative integer");
      out = v->get<std::size_t>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw InvalidArgument(child_path(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        throw InvalidArgument(child_path(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw InvalidArgument(child_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw InvalidArgument(child_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  static Vec3 to_vec3(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) throw InvalidArgument(path, "expected an array of 3 numbers");
    Vec3 out;
    for (int d = 0; d < 3; ++d) {
      if (!v[static_cast<std::size_t>(d)].is_number()) throw InvalidArgument(path, "expected an array of 3 numbers");
      out[d] = v[static_cast<std::size_t>(d)].get<double>();
    }
    return out;
  }

  void vec3(const std::string& key, Vec3& out) {
    if (const json* v = find(key)) out = to_vec3(*v, child_path(key));
  }

  void vec3_list(const std::string& key, std::vector<Vec3>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw InvalidArgument(child_path(key), "expected an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(to_vec3((*v)[i], child_path(key) + "[" + std::to_string(i) + "]"));
    }
  }

  template <typename Fn>
  void object(const std::string& key, Fn&& fn) {
    if (const json* v = find(key)) {
      ObjectReader sub(*v, child_path(key));
      fn(sub);
      sub.finish();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InvalidArgument(child_path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline RoostMode parse_roost_mode(const std::string& s, const std::string& path) {
  if (s == "attractive") return RoostMode::attractive;
  if (s == "verbatim") return RoostMode::verbatim;
  throw InvalidArgument(path, "expected \"attractive\" or \"verbatim\"");
}

inline PairCoupling parse_coupling(const std::string& s, const std::string& path) {
  if (s == "penalized") return PairCoupling::penalized;
  if (s == "multiplicative") return PairCoupling::multiplicative;
  throw InvalidArgument(path, "expected \"penalized\" or \"multiplicative\"");
}

inline UpdateOrder parse_order(const std::string& s, const std::string& path) {
  if (s == "sequential") return UpdateOrder::sequential;
  if (s == "parallel") return UpdateOrder::parallel;
  throw InvalidArgument(path, "expected \"sequential\" or \"parallel\"");
}

}  // namespace detail

inline RoostMode parse_roost_mode(const std::string& s) { return detail::parse_roost_mode(s, "roost-mode"); }
inline UpdateOrder parse_order(const std::string& s) { return detail::parse_order(s, "order"); }

/// Parses and validates a scenario document.
inline Scenario scenario_from_json(const nlohmann::json& doc) {
  Scenario sc;
  detail::ObjectReader root(doc, "");
  root.string("name", sc.name);
  root.count("ticks", sc.ticks);
  root.object("swarm", [&](detail::ObjectReader& r) {
    auto& c = sc.swarm;
    r.count("n_robots", c.n_robots);
    r.integer("dims", c.dims);
    r.count("k", c.k);
    r.number("dt", c.dt);
    r.vec3("u_max", c.u_max);
    r.vec3("d_u", c.d_u);
    r.number("v_max", c.v_max);
    r.number("tol", c.tol);
    r.count("max_sweeps", c.max_sweeps);
    std::string order = to_string(c.order);
    r.string("order", order);
    c.order = detail::parse_order(order, r.child_path("order"));
    r.seed("seed", c.seed);
    r.object("placement", [&](detail::ObjectReader& p) {
      auto& pl = c.placement;
      std::string kind = pl.kind == Placement::Kind::uniform_box ? "uniform_box" : "explicit";
      p.string("kind", kind);
      if (kind == "uniform_box") {
        pl.kind = Placement::Kind::uniform_box;
        p.vec3("box_min", pl.box_min);
        p.vec3("box_max", pl.box_max);
        p.number("min_separation", pl.min_separation);
      } else if (kind == "explicit") {
        pl.kind = Placement::Kind::explicit_states;
        p.vec3_list("positions", pl.positions);
        p.vec3_list("velocities", pl.velocities);
      } else {
        throw InvalidArgument(p.child_path("kind"), "expected \"uniform_box\" or \"explicit\"");
      }
    });
  });
  root.object("energy", [&](detail::ObjectReader& r) {
    auto& c = sc.swarm;
    r.object("morse", [&](detail::ObjectReader& m) {
      m.number("a", c.morse.a);
      m.number("b", c.morse.b);
      m.number("k_a", c.morse.k_a);
      m.number("k_r", c.morse.k_r);
    });
    r.object("roost", [&](detail::ObjectReader& m) {
      m.boolean("enabled", c.roost_enabled);
      m.vec3("center", c.roost.center);
      m.number("k_R", c.roost.k_R);
      std::string mode = to_string(c.roost.mode);
      m.string("mode", mode);
      c.roost.mode = detail::parse_roost_mode(mode, m.child_path("mode"));
    });
    r.object("coupling", [&](detail::ObjectReader& m) {
      std::string mode = to_string(c.coupling.mode);
      m.string("mode", mode);
      c.coupling.mode = detail::parse_coupling(mode, m.child_path("mode"));
      m.number("weight", c.coupling.weight);
    });
  });
  root.object("vicsek", [&](detail::ObjectReader& r) {
    r.number("v0", sc.vicsek_v0);
    r.number("eta", sc.vicsek_eta);
    std::size_t k = sc.vicsek_k.value_or(0);
    if (r.find("k")) {
      r.count("k", k);
      sc.vicsek_k = k;
    }
  });
  root.object("metrics", [&](detail::ObjectReader& r) {
    if (r.find("fragmentation_threshold")) {
      double t = 0.0;
      r.number("fragmentation_threshold", t);
      sc.fragmentation_threshold = t;
    }
  });
  root.object("output", [&](detail::ObjectReader& r) { r.string("dir", sc.output_dir); });
  root.finish();
  sc.validate();
  return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  using nlohmann::json;
  using detail::vec3_json;
  const auto& c = sc.swarm;
  json placement;
  if (c.placement.kind == Placement::Kind::uniform_box) {
    placement = {{"kind", "uniform_box"},
                 {"box_min", vec3_json(c.placement.box_min)},
                 {"box_max", vec3_json(c.placement.box_max)},
                 {"min_separation", c.placement.min_separation}};
  } else {
    json pos = json::array(), vel = json::array();
    for (const auto& p : c.placement.positions) pos.push_back(vec3_json(p));
    for (const auto& v : c.placement.velocities) vel.push_back(vec3_json(v));
    placement = {{"kind", "explicit"}, {"positions", pos}, {"velocities", vel}};
  }
  json doc = {
      {"name", sc.name},
      {"ticks", sc.ticks},
      {"swarm",
       {{"n_robots", c.n_robots},
        {"dims", c.dims},
        {"k", c.k},
        {"dt", c.dt},
        {"u_max", vec3_json(c.u_max)},
        {"d_u", vec3_json(c.d_u)},
        {"v_max", c.v_max},
        {"tol", c.tol},
        {"max_sweeps", c.max_sweeps},
        {"order", to_string(c.order)},
        {"seed", c.seed},
        {"placement", placement}}},
      {"energy",
       {{"morse", {{"a", c.morse.a}, {"b", c.morse.b}, {"k_a", c.morse.k_a}, {"k_r", c.morse.k_r}}},
        {"roost",
         {{"enabled", c.roost_enabled},
          {"center", vec3_json(c.roost.center)},
          {"k_R", c.roost.k_R},
          {"mode", to_string(c.roost.mode)}}},
        {"coupling", {{"mode", to_string(c.coupling.mode)}, {"weight", c.coupling.weight}}}}},
      {"vicsek", {{"v0", sc.vicsek_v0}, {"eta", sc.vicsek_eta}}},
      {"output", {{"dir", sc.output_dir}}},
  };
  if (sc.vicsek_k) doc["vicsek"]["k"] = *sc.vicsek_k;
  if (sc.fragmentation_threshold) doc["metrics"] = {{"fragmentation_threshold", *sc.fragmentation_threshold}};
  return doc;
}

/// Shipped presets: paper_2d_10, paper_2d_3, paper_3d_3, vicsek_compare.
inline std::vector<std::string> preset_names() {
  return {"paper_2d_10", "paper_2d_3", "paper_3d_3", "vicsek_compare"};
}

inline std::optional<Scenario> preset(const std::string& name) {
  Scenario sc;
  sc.name = name;
  sc.ticks = 200;
  auto& c = sc.swarm;
  c.dt = 0.2;
  c.u_max = Vec3(1.0, 1.0, 1.0);
  c.v_max = 1.0;
  c.morse = MorseParams{5.0, 15.0, 1.5, 0.5};
  c.roost = RoostParams{Vec3::Zero(), 10.0, RoostMode::attractive};
  c.placement.min_separation = 1.0;
  if (name == "paper_2d_10" || name == "vicsek_compare") {
    c.n_robots = 10;
    c.dims = 2;
    c.k = 3;
    c.d_u = Vec3(0.5, 0.5, 0.5);  // 5 x 5 = 25 candidates
    c.placement.box_min = Vec3(-10.0, -10.0, 0.0);
    c.placement.box_max = Vec3(10.0, 10.0, 0.0);
  } else if (name == "paper_2d_3") {
    c.n_robots = 3;
    c.dims = 2;
    c.k = 2;
    c.d_u = Vec3(0.5, 0.5, 0.5);
    c.placement.box_min = Vec3(-5.0, -5.0, 0.0);
    c.placement.box_max = Vec3(5.0, 5.0, 0.0);
  } else if (name == "paper_3d_3") {
    c.n_robots = 3;
    c.dims = 3;
    c.k = 2;
    c.d_u = Vec3(1.0, 1.0, 1.0);  // 27 candidates
    c.placement.box_min = Vec3(-5.0, -5.0, -5.0);
    c.placement.box_max = Vec3(5.0, 5.0, 5.0);
  } else {
    return std::nullopt;
  }
  sc.output_dir = "out/" + name;
  sc.validate();
  return sc;
}

/// Resolves a preset name, or else reads the argument as a scenario file path.
inline Scenario load_scenario(const std::string& preset_or_path) {
  if (auto p = preset(preset_or_path)) return *p;
  std::ifstream in(preset_or_path);
  if (!in) throw InvalidArgument("scenario", "no preset or readable file named '" + preset_or_path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("scenario", std::string("malformed JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_SCENARIO_HPP
