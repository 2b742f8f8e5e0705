#pragma once
/**
 * @file io.hpp
 * @brief JSON readers and writers for matrices, representations, meshes and
 *        boundary data, plus atomic file output and config hashing.
 */

#include "pseudohyp/group_dynamics.hpp"
#include "pseudohyp/maximal_solver.hpp"
#include "pseudohyp/spacelike_graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pseudohyp {

using Json = nlohmann::json;

struct FormatError : Error { using Error::Error; };

inline double json_real(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw FormatError("not a decimal number: '" + s + "'");
    }
    if (used != s.size()) throw FormatError("trailing characters in number '" + s + "'");
    return v;
  }
  throw FormatError("expected a number or decimal string");
}

/// Accepts a flat row-major list or a list of rows.
inline Mat json_matrix(const Json& j, int n) {
  Mat m(n, n);
  if (!j.is_array()) throw FormatError("matrix must be an array");
  if (static_cast<int>(j.size()) == n * n && !j[0].is_array()) {
    for (int k = 0; k < n * n; ++k) m(k / n, k % n) = json_real(j[k]);
    return m;
  }
  if (static_cast<int>(j.size()) != n) throw FormatError("matrix has wrong row count");
  for (int r = 0; r < n; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != n) throw FormatError("matrix row has wrong length");
    for (int c = 0; c < n; ++c) m(r, c) = json_real(j[r][c]);
  }
  return m;
}

inline Json matrix_json(const Mat& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

inline Vec json_vec(const Json& j) {
  if (!j.is_array()) throw FormatError("vector must be an array");
  Vec v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) v(k) = json_real(j[k]);
  return v;
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// --------------------------------------------------------- representation

/// Reads {"p","q","kind","genus"?,"relator"?,"label"?,"generators"|"matrices"}.
inline Representation representation_from_json(const Json& j) {
  if (!j.contains("p") || !j.contains("q")) throw FormatError("representation needs p and q");
  Representation rep;
  rep.ctx = FormContext(j.at("p").get<int>(), j.at("q").get<int>());
  const std::string kind = j.value("kind", std::string("generic"));
  if (kind == "free" || kind == "schottky")
    rep.kind = RepKind::Free;
  else if (kind == "surface")
    rep.kind = RepKind::SurfaceGroup;
  else if (kind == "generic")
    rep.kind = RepKind::Generic;
  else
    throw FormatError("unknown representation kind '" + kind + "'");
  rep.genus = j.value("genus", 0);
  rep.relator = j.value("relator", std::string());
  rep.label = j.value("label", std::string());
  const Json& gens = j.contains("generators") ? j.at("generators") : j.at("matrices");
  for (const auto& g : gens) {
    const Mat m = json_matrix(g, rep.ctx.dim());
    rep.generators.push_back(Isometry{rep.ctx, m});
  }
  if (rep.generators.empty()) throw FormatError("representation has no generators");
  validate_representation(rep);
  return rep;
}

inline Json representation_json(const Representation& rep) {
  Json j;
  j["p"] = rep.ctx.p;
  j["q"] = rep.ctx.q;
  j["kind"] = rep.kind == RepKind::Free ? "free" : rep.kind == RepKind::SurfaceGroup ? "surface" : "generic";
  if (rep.genus > 0) j["genus"] = rep.genus;
  if (!rep.relator.empty()) j["relator"] = rep.relator;
  j["label"] = rep.label;
  j["generators"] = Json::array();
  for (const auto& g : rep.generators) j["generators"].push_back(matrix_json(g.m));
  return j;
}

inline Representation load_representation(const std::filesystem::path& path) {
  return representation_from_json(read_json(path));
}

// ------------------------------------------------------------------ mesh

inline Json mesh_json(const SpacelikeGraph& G) {
  Json j;
  j["p"] = G.ctx.p;
  j["q"] = G.ctx.q;
  j["vertices"] = Json::array();
  for (int i = 0; i < G.size(); ++i) {
    Json v;
    v["x"] = vec_json(G.x[i]);
    v["u"] = vec_json(G.u[i]);
    if (G.boundary[i]) v["boundary"] = true;
    j["vertices"].push_back(v);
  }
  j["simplices"] = G.simplices;
  return j;
}

/// Builds the graph without normalizing values so that corrupt input is detectable.
inline SpacelikeGraph graph_from_json(const Json& j) {
  const FormContext ctx(j.at("p").get<int>(), j.at("q").get<int>());
  DiskMesh mesh;
  mesh.p = ctx.p;
  std::vector<Vec> us;
  for (const auto& v : j.at("vertices")) {
    Vec x = json_vec(v.at("x"));
    Vec u = json_vec(v.at("u"));
    if (x.size() != ctx.p || u.size() != ctx.q + 1) throw FormatError("vertex has wrong dimensions");
    mesh.x.push_back(x);
    us.push_back(u);
  }
  for (const auto& s : j.at("simplices")) {
    std::vector<int> S = s.get<std::vector<int>>();
    if (static_cast<int>(S.size()) != ctx.p + 1) throw FormatError("simplex has wrong arity");
    for (int a : S)
      if (a < 0 || a >= static_cast<int>(mesh.x.size())) throw FormatError("simplex index out of range");
    mesh.simplices.push_back(S);
  }
  detail::mark_boundary(mesh);
  double h = 0.0;
  for (const auto& S : mesh.simplices) h = std::max(h, (mesh.x[S[1]] - mesh.x[S[0]]).norm());
  mesh.h = h;
  SpacelikeGraph G;
  G.ctx = ctx;
  G.x = mesh.x;
  G.u = us;
  G.simplices = mesh.simplices;
  G.boundary = mesh.boundary;
  G.build_topology();
  return G;
}

// -------------------------------------------------------------- boundary

/// {"samples":[{"dir":[..],"value":[..]}], "lightlike_margin"?}
inline BoundaryData boundary_from_json(const Json& j) {
  BoundaryData B;
  for (const auto& s : j.at("samples")) {
    B.dirs.push_back(json_vec(s.at("dir")));
    B.values.push_back(json_vec(s.at("value")));
  }
  B.lightlike_margin = j.value("lightlike_margin", 0.05);
  return B;
}

inline Json boundary_json(const BoundaryData& B) {
  Json j;
  j["lightlike_margin"] = B.lightlike_margin;
  j["samples"] = Json::array();
  for (std::size_t k = 0; k < B.dirs.size(); ++k) j["samples"].push_back({{"dir", vec_json(B.dirs[k])}, {"value", vec_json(B.values[k])}});
  return j;
}

// ---------------------------------------------------------------- output

/// FNV-1a over the canonical (sorted-key, compact) dump.
inline std::string config_hash(const Json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Write to a temporary sibling and rename over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << content;
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Shortest round-trip decimal form.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string curvature_csv(const CurvatureReport& R) {
  std::ostringstream os;
  os << "vertex,II_norm,ric_slack,H_norm\n";
  for (const auto& r : R.rows) os << r.vertex << ',' << fmt(r.II_norm) << ',' << fmt(r.ric_slack) << ',' << fmt(r.H_norm) << '\n';
  return os.str();
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << "iter,residual,min_eig_g\n";
  for (const auto& r : rows) os << r.iter << ',' << fmt(r.residual) << ',' << fmt(r.min_eig_g) << '\n';
  return os.str();
}

inline std::string counts_csv(const EntropyEstimate& E) {
  std::ostringstream os;
  os << "R,N\n";
  for (std::size_t k = 0; k < E.R_grid.size(); ++k) os << fmt(E.R_grid[k]) << ',' << E.counts[k] << '\n';
  return os.str();
}

inline std::string orbit_csv(const OrbitTable& T) {
  std::ostringstream os;
  os << "word,dist\n";
  for (const auto& e : T.entries) os << (e.word.empty() ? "1" : e.word) << ',' << fmt(e.dist) << '\n';
  return os.str();
}

}  // namespace pseudohyp
