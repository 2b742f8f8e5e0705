#pragma once
/**
 * @file config.hpp
 * @brief Experiment configuration: one JSON document with a global seed, an
 *        output directory and command blocks. Unknown keys are rejected.
 */

#include "pseudohyp/io.hpp"
#include "pseudohyp/tube_volume.hpp"

#include <set>

namespace pseudohyp {

struct ConfigError : Error { using Error::Error; };

namespace detail {

inline void check_keys(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(path + (path.empty() ? "" : ".") + k + ": unknown key");
}

template <class T>
T get_or(const Json& j, const std::string& path, const std::string& key, T def) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

inline double positive(double v, const std::string& where) {
  if (!(v > 0.0)) throw ConfigError(where + ": must be positive");
  return v;
}

}  // namespace detail

struct BoundarySpec {
  std::string kind = "rotation";  ///< constant | rotation | geodesic | file
  double amplitude = 0.4;
  int frequency = 2;
  double rapidity = 0.5;
  int samples = 256;
  std::vector<double> value;
  std::string path;
  double lightlike_margin = 0.05;
};

struct SolveSpec {
  double mesh_scale = 0.08;
  double radius = 0.8;
  std::vector<double> warm_start;  ///< coarser mesh scales solved first, coarse to fine
  SolverConfig solver;
  int stencil_rings = 2;
};

struct RepresentationSpec {
  std::string file;
  std::string builtin;  ///< schottky | cyclic
  int embed_q = -1;     ///< block-embed into this q when >= 0
  double length = 0.8;  ///< cyclic boost length
  std::string bend_curve;
  double bend_t = 0.0;
  std::vector<bool> bend_side;
};

struct EnumerationSpec {
  int max_len = 12;
  long cap = 5000000;
  double prune_radius = -1.0;  ///< <= 0 selects R_max + log 2 + 0.8
};

struct EntropySpec {
  double R_max = 12.0;
  int grid_points = 48;
};

struct TubeSpec {
  TubeConfig cfg;
  int trials = 1000;
  double region_radius = 0.0;  ///< <= 0 selects the mesh disk
  int profile_points = 32;
};

struct VolumeSpec {
  double box_radius = 2.6;
  long mc_samples = 100000;
  double table_radius = 6.0;
  double limit_min_dist = 6.0;
};

struct DomainSpec {
  int samples = 1000;
  double radius = 2.4;
  double tilt = 0.3;
  double candidate_radius = 5.5;
  int diameter_samples = 40;
};

struct VerifySpec {
  int pairs = 1000;
  int ideal_targets = 64;
  int interior_targets = 32;
  double distance_budget = 0.05;
  double lemma_tol = 1e-3;
  double window_tol = 0.02;
  double ishihara_tol = 1e-2;
  double projection_tol = 1e-3;
  double residual_tol = 1e-4;
};

struct ExperimentConfig {
  Json raw;
  std::uint64_t seed = 0;
  std::string output = "out";
  int p = 2, q = 1;
  BoundarySpec boundary;
  SolveSpec solve;
  RepresentationSpec representation;
  EnumerationSpec enumeration;
  EntropySpec entropy;
  TubeSpec tube;
  VolumeSpec volume;
  DomainSpec domain;
  VerifySpec verify;

  std::string hash() const { return config_hash(raw); }
};

inline ExperimentConfig parse_config(const Json& j) {
  using detail::check_keys;
  using detail::get_or;
  ExperimentConfig c;
  c.raw = j;
  check_keys(j, "", {"seed", "output", "p", "q", "boundary", "solver", "representation", "enumeration", "entropy",
                     "tube", "volume", "domain", "verify"});
  c.seed = get_or<std::uint64_t>(j, "", "seed", 0);
  c.output = get_or<std::string>(j, "", "output", "out");
  c.p = get_or<int>(j, "", "p", 2);
  c.q = get_or<int>(j, "", "q", 1);
  if (c.p < 2 || c.p > 3) throw ConfigError("p: must be 2 or 3");
  if (c.q < 0 || c.q > 2) throw ConfigError("q: must lie in [0, 2]");
  if (j.contains("boundary")) {
    const Json& b = j["boundary"];
    check_keys(b, "boundary", {"kind", "amplitude", "frequency", "rapidity", "samples", "value", "path", "lightlike_margin"});
    auto& B = c.boundary;
    B.kind = get_or<std::string>(b, "boundary", "kind", B.kind);
    if (B.kind != "constant" && B.kind != "rotation" && B.kind != "geodesic" && B.kind != "file")
      throw ConfigError("boundary.kind: expected constant, rotation, geodesic or file");
    B.amplitude = get_or<double>(b, "boundary", "amplitude", B.amplitude);
    B.frequency = get_or<int>(b, "boundary", "frequency", B.frequency);
    B.rapidity = get_or<double>(b, "boundary", "rapidity", B.rapidity);
    B.samples = get_or<int>(b, "boundary", "samples", B.samples);
    B.value = get_or<std::vector<double>>(b, "boundary", "value", B.value);
    B.path = get_or<std::string>(b, "boundary", "path", B.path);
    B.lightlike_margin = get_or<double>(b, "boundary", "lightlike_margin", B.lightlike_margin);
    if (B.samples < 3) throw ConfigError("boundary.samples: need at least 3");
    if (B.kind == "file" && B.path.empty()) throw ConfigError("boundary.path: required for kind file");
  }
  if (j.contains("solver")) {
    const Json& s = j["solver"];
    check_keys(s, "solver", {"mesh_scale", "radius", "warm_start", "step", "tol_residual", "max_iter", "damping",
                             "log_every", "stall_window", "stencil_rings"});
    auto& S = c.solve;
    S.mesh_scale = detail::positive(get_or<double>(s, "solver", "mesh_scale", S.mesh_scale), "solver.mesh_scale");
    S.radius = get_or<double>(s, "solver", "radius", S.radius);
    if (!(S.radius > 0.0 && S.radius < 1.0)) throw ConfigError("solver.radius: must lie in (0,1)");
    S.warm_start = get_or<std::vector<double>>(s, "solver", "warm_start", S.warm_start);
    S.solver.step = get_or<double>(s, "solver", "step", S.solver.step);
    S.solver.tol_residual = detail::positive(get_or<double>(s, "solver", "tol_residual", S.solver.tol_residual), "solver.tol_residual");
    S.solver.max_iter = get_or<long>(s, "solver", "max_iter", S.solver.max_iter);
    S.solver.damping = get_or<double>(s, "solver", "damping", S.solver.damping);
    if (!(S.solver.damping > 0.0 && S.solver.damping <= 1.0)) throw ConfigError("solver.damping: must lie in (0,1]");
    S.solver.log_every = get_or<int>(s, "solver", "log_every", S.solver.log_every);
    S.solver.stall_window = get_or<long>(s, "solver", "stall_window", S.solver.stall_window);
    S.stencil_rings = get_or<int>(s, "solver", "stencil_rings", S.stencil_rings);
    if (S.solver.step < 0.0) throw ConfigError("solver.step: must be positive (0 selects the default)");
  }
  if (j.contains("representation")) {
    const Json& r = j["representation"];
    check_keys(r, "representation", {"file", "builtin", "embed_q", "length", "bend"});
    auto& R = c.representation;
    R.file = get_or<std::string>(r, "representation", "file", R.file);
    R.builtin = get_or<std::string>(r, "representation", "builtin", R.builtin);
    R.embed_q = get_or<int>(r, "representation", "embed_q", R.embed_q);
    R.length = get_or<double>(r, "representation", "length", R.length);
    if (R.file.empty() == R.builtin.empty()) throw ConfigError("representation: give exactly one of file or builtin");
    if (!R.builtin.empty() && R.builtin != "schottky" && R.builtin != "cyclic")
      throw ConfigError("representation.builtin: expected schottky or cyclic");
    if (r.contains("bend")) {
      const Json& b = r["bend"];
      check_keys(b, "representation.bend", {"curve", "t", "side"});
      R.bend_curve = get_or<std::string>(b, "representation.bend", "curve", "");
      R.bend_t = get_or<double>(b, "representation.bend", "t", 0.0);
      R.bend_side = get_or<std::vector<bool>>(b, "representation.bend", "side", {});
      if (R.bend_curve.empty()) throw ConfigError("representation.bend.curve: required");
    }
  }
  if (j.contains("enumeration")) {
    const Json& e = j["enumeration"];
    check_keys(e, "enumeration", {"max_len", "cap", "prune_radius"});
    auto& E = c.enumeration;
    E.max_len = get_or<int>(e, "enumeration", "max_len", E.max_len);
    E.cap = get_or<long>(e, "enumeration", "cap", E.cap);
    E.prune_radius = get_or<double>(e, "enumeration", "prune_radius", E.prune_radius);
    if (E.max_len < 1) throw ConfigError("enumeration.max_len: must be >= 1");
  }
  if (j.contains("entropy")) {
    const Json& e = j["entropy"];
    check_keys(e, "entropy", {"R_max", "grid_points"});
    c.entropy.R_max = detail::positive(get_or<double>(e, "entropy", "R_max", c.entropy.R_max), "entropy.R_max");
    c.entropy.grid_points = get_or<int>(e, "entropy", "grid_points", c.entropy.grid_points);
    if (c.entropy.grid_points < 6) throw ConfigError("entropy.grid_points: need at least 6");
  }
  if (j.contains("tube")) {
    const Json& t = j["tube"];
    check_keys(t, "tube", {"t_samples", "n_samples", "mc_samples", "trials", "region_radius", "profile_points"});
    auto& T = c.tube;
    T.cfg.t_samples = get_or<int>(t, "tube", "t_samples", T.cfg.t_samples);
    T.cfg.n_samples = get_or<int>(t, "tube", "n_samples", T.cfg.n_samples);
    T.cfg.mc_samples = get_or<long>(t, "tube", "mc_samples", T.cfg.mc_samples);
    T.trials = get_or<int>(t, "tube", "trials", T.trials);
    T.region_radius = get_or<double>(t, "tube", "region_radius", T.region_radius);
    T.profile_points = get_or<int>(t, "tube", "profile_points", T.profile_points);
    if (T.cfg.t_samples < 1 || T.cfg.n_samples < 1 || T.cfg.mc_samples < 1) throw ConfigError("tube: sample counts must be positive");
  }
  if (j.contains("volume")) {
    const Json& v = j["volume"];
    check_keys(v, "volume", {"box_radius", "mc_samples", "table_radius", "limit_min_dist"});
    auto& V = c.volume;
    V.box_radius = detail::positive(get_or<double>(v, "volume", "box_radius", V.box_radius), "volume.box_radius");
    V.mc_samples = get_or<long>(v, "volume", "mc_samples", V.mc_samples);
    V.table_radius = get_or<double>(v, "volume", "table_radius", V.table_radius);
    V.limit_min_dist = get_or<double>(v, "volume", "limit_min_dist", V.limit_min_dist);
  }
  if (j.contains("domain")) {
    const Json& d = j["domain"];
    check_keys(d, "domain", {"samples", "radius", "tilt", "candidate_radius", "diameter_samples"});
    auto& D = c.domain;
    D.samples = get_or<int>(d, "domain", "samples", D.samples);
    D.radius = get_or<double>(d, "domain", "radius", D.radius);
    D.tilt = get_or<double>(d, "domain", "tilt", D.tilt);
    D.candidate_radius = get_or<double>(d, "domain", "candidate_radius", D.candidate_radius);
    D.diameter_samples = get_or<int>(d, "domain", "diameter_samples", D.diameter_samples);
  }
  if (j.contains("verify")) {
    const Json& v = j["verify"];
    check_keys(v, "verify", {"pairs", "ideal_targets", "interior_targets", "distance_budget", "lemma_tol",
                             "window_tol", "ishihara_tol", "projection_tol", "residual_tol"});
    auto& V = c.verify;
    V.pairs = get_or<int>(v, "verify", "pairs", V.pairs);
    V.ideal_targets = get_or<int>(v, "verify", "ideal_targets", V.ideal_targets);
    V.interior_targets = get_or<int>(v, "verify", "interior_targets", V.interior_targets);
    V.distance_budget = get_or<double>(v, "verify", "distance_budget", V.distance_budget);
    V.lemma_tol = get_or<double>(v, "verify", "lemma_tol", V.lemma_tol);
    V.window_tol = get_or<double>(v, "verify", "window_tol", V.window_tol);
    V.ishihara_tol = get_or<double>(v, "verify", "ishihara_tol", V.ishihara_tol);
    V.projection_tol = get_or<double>(v, "verify", "projection_tol", V.projection_tol);
    V.residual_tol = get_or<double>(v, "verify", "residual_tol", V.residual_tol);
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig c = parse_config(j);
  // relative paths are taken from the config file's directory
  const auto base = path.parent_path();
  auto resolve = [&](std::string& f) {
    if (!f.empty() && std::filesystem::path(f).is_relative()) f = (base / f).lexically_normal().string();
  };
  resolve(c.representation.file);
  resolve(c.boundary.path);
  return c;
}

// ---------------------------------------------------------- construction

/// Rotation of the basepoint value in the (y_1, y_{q+1}) plane.
inline Vec rotate_value(int q, double angle) {
  Vec v = Vec::Zero(q + 1);
  v(q) = std::cos(angle);
  if (q >= 1) v(0) = std::sin(angle);
  return v;
}

/// Graph value of the boosted totally geodesic copy in the (x_1, y_1) plane.
inline Vec tilted_geodesic_value(const Vec& x, int q, double rapidity) {
  const double t = std::tanh(rapidity) * 2.0 * x(0) / (1.0 + x.squaredNorm());
  Vec v = Vec::Zero(q + 1);
  v(0) = t;
  v(q) = std::sqrt(1.0 - t * t);
  return v;
}

inline BoundaryData make_boundary_data(const ExperimentConfig& c) {
  const auto& B = c.boundary;
  const int p = c.p, q = c.q;
  if (B.kind == "file") return boundary_from_json(read_json(B.path));
  std::function<Vec(const Vec&)> f;
  if (B.kind == "constant") {
    Vec v = B.value.empty() ? rotate_value(q, 0.0) : Eigen::Map<const Vec>(B.value.data(), B.value.size()).eval();
    if (v.size() != q + 1) throw ConfigError("boundary.value: must have q+1 entries");
    v /= v.norm();
    f = [v](const Vec&) { return v; };
  } else if (B.kind == "rotation") {
    if (q < 1) throw ConfigError("boundary.kind rotation needs q >= 1");
    f = [&B, q](const Vec& d) { return rotate_value(q, B.amplitude * std::sin(B.frequency * std::atan2(d(1), d(0)))); };
  } else {
    if (q < 1) throw ConfigError("boundary.kind geodesic needs q >= 1");
    const double R = c.solve.radius;
    f = [&B, q, R](const Vec& d) { return tilted_geodesic_value(R * d, q, B.rapidity); };
  }
  return sample_boundary(p, B.samples, f, B.lightlike_margin);
}

/// Ideal boundary trace; differs from the pinned data only for the tilted geodesic.
inline BoundaryData make_ideal_trace(const ExperimentConfig& c) {
  if (c.boundary.kind != "geodesic") return make_boundary_data(c);
  const int q = c.q;
  const double s = c.boundary.rapidity;
  return sample_boundary(c.p, c.boundary.samples, [q, s](const Vec& d) { return tilted_geodesic_value(d, q, s); },
                         c.boundary.lightlike_margin);
}

inline Representation schottky_representation(int q) {
  const FormContext c0(2, 0);
  const Isometry a = boost(c0, 0, 2, 2.0 * std::acosh(2.0));
  const Isometry r = rotation(c0, 0, 1, M_PI / 2);
  Representation rep;
  rep.ctx = c0;
  rep.generators = {a, r * a * r.inverse()};
  rep.kind = RepKind::Free;
  rep.label = "schottky";
  return block_embed(rep, q);
}

inline Representation cyclic_representation(int q, double length) {
  const FormContext c0(2, 0);
  Representation rep;
  rep.ctx = c0;
  rep.generators = {boost(c0, 0, 2, length)};
  rep.kind = RepKind::Free;
  rep.label = "cyclic";
  return block_embed(rep, q);
}

inline Representation make_representation(const ExperimentConfig& c) {
  const auto& R = c.representation;
  Representation rep;
  if (R.builtin == "schottky")
    rep = schottky_representation(R.embed_q >= 0 ? R.embed_q : c.q);
  else if (R.builtin == "cyclic")
    rep = cyclic_representation(R.embed_q >= 0 ? R.embed_q : c.q, R.length);
  else {
    try {
      rep = load_representation(R.file);
    } catch (const FormatError& e) {
      throw ConfigError(std::string("representation.file: ") + e.what());
    }
    if (R.embed_q >= 0) rep = block_embed(rep, R.embed_q);
  }
  if (rep.ctx.p != c.p || rep.ctx.q != c.q)
    throw ConfigError("representation signature (" + std::to_string(rep.ctx.p) + "," + std::to_string(rep.ctx.q) +
                      ") differs from configured (p,q)");
  if (!R.bend_curve.empty()) {
    std::vector<bool> side = R.bend_side;
    rep = bend(rep, R.bend_curve, commuting_boost(rep, R.bend_curve), R.bend_t, side);
  }
  return rep;
}

inline EnumerateOptions enumeration_options(const ExperimentConfig& c) {
  EnumerateOptions o;
  o.max_len = c.enumeration.max_len;
  o.cap = c.enumeration.cap;
  o.prune_radius = c.enumeration.prune_radius > 0.0 ? c.enumeration.prune_radius
                                                    : c.entropy.R_max + std::log(2.0) + 0.8;
  return o;
}

}  // namespace pseudohyp
