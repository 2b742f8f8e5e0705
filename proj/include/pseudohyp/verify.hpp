#pragma once
/**
 * @file verify.hpp
 * @brief Invariant suite for a solved graph: unit values, spacelike metric,
 *        curvature bounds, gradient window, distance sandwich and diagnostics.
 */

#include "pseudohyp/config.hpp"

#include <random>

namespace pseudohyp {

struct Check {
  std::string name;
  bool pass = true;
  bool hard = true;
  double value = 0.0;
  double bound = 0.0;
  int vertex = -1;
  std::string detail;
};

struct VerifyReport {
  std::vector<Check> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (c.hard && !c.pass) return false;
    return true;
  }
  const Check& at(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw Error("no check named " + name);
  }
};

inline Json verify_json(const VerifyReport& R) {
  Json j = Json::array();
  for (const auto& c : R.checks) {
    Json e{{"name", c.name}, {"pass", c.pass}, {"hard", c.hard}, {"value", c.value}, {"bound", c.bound}};
    if (c.vertex >= 0) e["vertex"] = c.vertex;
    if (!c.detail.empty()) e["detail"] = c.detail;
    j.push_back(e);
  }
  return j;
}

/// Boundary data read back from the boundary vertices of a graph.
inline BoundaryData boundary_of(const SpacelikeGraph& G) {
  BoundaryData B;
  for (int i = 0; i < G.size(); ++i)
    if (G.boundary[i]) {
      B.dirs.push_back(G.x[i] / G.x[i].norm());
      B.values.push_back(G.u[i]);
    }
  return B;
}

inline double disk_radius(const SpacelikeGraph& G) {
  double r = 0.0;
  for (const auto& x : G.x) r = std::max(r, x.norm());
  return r;
}

struct SandwichStats {
  int pairs = 0;
  int violations = 0;
  double min_ratio = std::numeric_limits<double>::infinity();  ///< d_H / d_M
  double max_ratio = 0.0;
  double max_rel_gap = 0.0;  ///< max |d_H/d_M - 1|
};

/// Random vertex pairs drawn as `sources` sources with pairs/sources targets each.
inline SandwichStats distance_sandwich(const SpacelikeGraph& G, int pairs, double budget, std::uint64_t seed) {
  SandwichStats S;
  const EdgeLengths E(G);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, G.size() - 1);
  const int sources = std::max(1, pairs / 25);
  const double sp = std::sqrt(static_cast<double>(G.ctx.p));
  for (int s = 0; s < sources; ++s) {
    const int a = pick(rng);
    const auto d = distances_from(G, E, a);
    const int per = pairs / sources + (s < pairs % sources ? 1 : 0);
    for (int k = 0; k < per; ++k) {
      int b = pick(rng);
      while (b == a) b = pick(rng);
      const double dH = pseudo_distance(G.ctx, G.P[a], G.P[b]);
      const double dM = d[b];
      const double ratio = dH / dM;
      ++S.pairs;
      S.min_ratio = std::min(S.min_ratio, ratio);
      S.max_ratio = std::max(S.max_ratio, ratio);
      S.max_rel_gap = std::max(S.max_rel_gap, std::abs(ratio - 1.0));
      if (dM > (1.0 + budget) * dH || dH > (1.0 + budget) * sp * dM) ++S.violations;
    }
  }
  return S;
}

/// Max Laplacian-identity residual over ideal targets at vertices with |x| <= region.
inline double laplacian_identity_residual(const SpacelikeGraph& G, const std::vector<ScoreTarget>& targets,
                                          double region) {
  double m = 0.0;
  const Vec o = G.ctx.origin();
  for (int i = 0; i < G.size(); ++i) {
    if (G.boundary[i] || !G.forms[i] || G.x[i].norm() > region) continue;
    for (const auto& t : targets) {
      if (t.kind != ScoreTarget::Kind::Ideal) continue;
      try {
        m = std::max(m, busemann_hessian_check(G, i, t.z, o).laplacian_residual);
      } catch (const DomainError&) {
      }
    }
  }
  return m;
}

inline double interior_fit_curvature(const SpacelikeGraph& G, double region) {
  double m = 0.0;
  for (int i = 0; i < G.size(); ++i)
    if (!G.boundary[i] && G.forms[i] && G.x[i].norm() <= region) m = std::max(m, G.forms[i]->mean_curvature().norm());
  return m;
}

/// Runs every check; G gets its embedding and fundamental-form cache rebuilt.
/// `ideal` supplies the ideal boundary trace for the scan targets; by default the boundary vertices are used.
inline VerifyReport verify_graph(SpacelikeGraph& G, const VerifySpec& V, std::uint64_t seed, int rings = 2,
                                 const BoundaryData* ideal = nullptr) {
  VerifyReport R;
  const int p = G.ctx.p, q = G.ctx.q;

  Check unit{"unit_values"};
  unit.bound = 1e-9;
  for (int i = 0; i < G.size(); ++i) {
    const double e = std::abs(G.u[i].norm() - 1.0);
    if (e > unit.value) {
      unit.value = e;
      unit.vertex = i;
    }
  }
  unit.pass = unit.value <= unit.bound;
  if (!unit.pass) unit.detail = "vertex " + std::to_string(unit.vertex) + " has a non-unit value";
  R.checks.push_back(unit);
  if (!unit.pass) return R;

  G.build_cache(rings);

  Check space{"spacelike"};
  space.value = detail::min_metric_eigenvalue(G);
  space.pass = space.value > 0.0;
  R.checks.push_back(space);

  Check lip{"lipschitz"};
  lip.value = lipschitz_ratio(G);
  lip.bound = 1.0;
  lip.pass = lip.value < 1.0;
  R.checks.push_back(lip);

  Check res{"residual"};
  res.value = residual(G);
  res.bound = V.residual_tol;
  res.pass = res.value <= res.bound;
  R.checks.push_back(res);

  const CurvatureReport C = curvature_report(G);
  Check ric{"ishihara_ricci"};
  ric.value = C.min_ric_slack();
  ric.bound = -V.ishihara_tol;
  ric.pass = ric.value >= ric.bound;
  for (const auto& r : C.rows)
    if (r.ric_slack == ric.value) ric.vertex = r.vertex;
  R.checks.push_back(ric);

  Check sec{"ishihara_second_form"};
  sec.value = C.sup_II();
  sec.bound = p * q + V.ishihara_tol;
  sec.pass = sec.value <= sec.bound;
  for (const auto& r : C.rows)
    if (r.II_norm == sec.value) sec.vertex = r.vertex;
  R.checks.push_back(sec);

  const BoundaryData B = ideal ? *ideal : boundary_of(G);
  const auto targets = scan_targets(G, B, static_cast<unsigned>(seed), V.ideal_targets, V.interior_targets);
  const MaxPrincipleReport M = max_principle_scan(G, targets);
  Check win{"gradient_window"};
  win.value = M.L;
  win.bound = std::sqrt(static_cast<double>(p)) + V.window_tol;
  win.vertex = M.vertex;
  win.pass = M.vertex >= 0 && M.L >= 1.0 - V.lemma_tol && M.L <= win.bound;
  win.detail = "min_gradient=" + fmt(M.min_gradient);
  R.checks.push_back(win);

  Check lem{"lemma_slack"};
  lem.value = M.lemma_slack;
  lem.bound = V.lemma_tol;
  lem.vertex = M.vertex;
  lem.pass = M.lemma_slack <= V.lemma_tol;
  R.checks.push_back(lem);

  Check proj{"normal_projection"};
  proj.value = std::numeric_limits<double>::infinity();
  proj.bound = -V.projection_tol;
  for (int i = 0; i < G.size(); ++i) {
    if (G.boundary[i] || !G.forms[i]) continue;
    for (const auto& t : targets) {
      const double s = normal_projection_bound_check(G, i, t);
      if (s < proj.value) {
        proj.value = s;
        proj.vertex = i;
      }
    }
  }
  proj.pass = proj.value >= proj.bound;
  R.checks.push_back(proj);

  const SandwichStats S = distance_sandwich(G, V.pairs, V.distance_budget, seed + 1);
  Check sw{"distance_sandwich"};
  sw.value = S.violations;
  sw.bound = 0.0;
  sw.pass = S.violations == 0;
  sw.detail = "pairs=" + std::to_string(S.pairs) + " ratio_min=" + fmt(S.min_ratio) + " ratio_max=" + fmt(S.max_ratio);
  R.checks.push_back(sw);

  const double region = 0.7 * disk_radius(G);
  Check lap{"laplacian_identity"};
  lap.hard = false;
  lap.value = laplacian_identity_residual(G, targets, region);
  lap.detail = "interior |x| <= " + fmt(region);
  R.checks.push_back(lap);

  Check fit{"fit_mean_curvature"};
  fit.hard = false;
  fit.value = interior_fit_curvature(G, region);
  fit.detail = "interior |x| <= " + fmt(region);
  R.checks.push_back(fit);
  return R;
}

}  // namespace pseudohyp
