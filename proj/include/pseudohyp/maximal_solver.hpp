#pragma once
/**
 * @file maximal_solver.hpp
 * @brief Damped explicit area flow of S^q-valued graphs with pinned boundary,
 *        discrete mean curvature residual and maximum-principle diagnostics.
 */

#include "pseudohyp/spacelike_graph.hpp"

#include <random>

namespace pseudohyp {

struct NonConvergence : Error { using Error::Error; };
struct SpacelikeViolation : Error { using Error::Error; };
struct InvalidBoundary : Error { using Error::Error; };

// ------------------------------------------------------------ boundary

struct BoundaryData {
  std::vector<Vec> dirs;    ///< unit vectors in R^p
  std::vector<Vec> values;  ///< unit vectors in R^{q+1}
  double lightlike_margin = 0.05;

  int p() const { return dirs.empty() ? 0 : static_cast<int>(dirs[0].size()); }

  /// Geodesic interpolation between angularly consecutive samples (p = 2), or a
  /// normalized inverse-distance blend of the p nearest samples otherwise.
  Vec operator()(const Vec& x) const {
    const Vec d = x / x.norm();
    if (p() == 2) {
      const double a = std::atan2(d(1), d(0));
      int lo = -1, hi = -1;
      double alo = -1e9, ahi = 1e9;
      for (std::size_t k = 0; k < dirs.size(); ++k) {
        double b = std::atan2(dirs[k](1), dirs[k](0)) - a;
        b = std::remainder(b, 2.0 * M_PI);
        if (b <= 0.0 && b > alo) { alo = b; lo = static_cast<int>(k); }
        if (b >= 0.0 && b < ahi) { ahi = b; hi = static_cast<int>(k); }
      }
      if (lo < 0) lo = hi;
      if (hi < 0) hi = lo;
      if (lo == hi || ahi - alo < 1e-15) return values[lo];
      const double t = -alo / (ahi - alo);
      return sphere_exp(values[lo], t * sphere_log(values[lo], values[hi]));
    }
    std::vector<std::pair<double, int>> near;
    for (std::size_t k = 0; k < dirs.size(); ++k) near.push_back({sphere_distance(d, dirs[k]), static_cast<int>(k)});
    std::sort(near.begin(), near.end());
    if (near[0].first < 1e-14) return values[near[0].second];
    Vec acc = Vec::Zero(values[0].size());
    for (int k = 0; k < std::min<int>(p(), static_cast<int>(near.size())); ++k)
      acc += values[near[k].second] / near[k].first;
    return acc / acc.norm();
  }
};

/// Samples the boundary function at n directions spread over S^{p-1}.
inline BoundaryData sample_boundary(int p, int n, const std::function<Vec(const Vec&)>& f, double margin = 0.05) {
  BoundaryData B;
  B.lightlike_margin = margin;
  if (p == 2) {
    for (int k = 0; k < n; ++k) {
      Vec d(2);
      d << std::cos(2.0 * M_PI * k / n), std::sin(2.0 * M_PI * k / n);
      B.dirs.push_back(d);
    }
  } else {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      Vec d = Vec::Zero(p);
      const double z = 1.0 - 2.0 * (k + 0.5) / n;
      d(0) = std::sqrt(1.0 - z * z) * std::cos(golden * k);
      d(1) = std::sqrt(1.0 - z * z) * std::sin(golden * k);
      d(2) = z;
      B.dirs.push_back(d);
    }
  }
  for (const auto& d : B.dirs) {
    Vec v = f(d);
    B.values.push_back(v / v.norm());
  }
  return B;
}

/// Largest ratio of value distance to direction distance over neighboring samples.
inline double boundary_lipschitz(const BoundaryData& B) {
  double m = 0.0;
  const int n = static_cast<int>(B.dirs.size());
  for (int i = 0; i < n; ++i) {
    double bd = 1e9;
    for (int j = 0; j < n; ++j)
      if (j != i) bd = std::min(bd, sphere_distance(B.dirs[i], B.dirs[j]));
    // neighbors: samples within twice the nearest spacing
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = sphere_distance(B.dirs[i], B.dirs[j]);
      if (d <= 2.0 * bd + 1e-12) m = std::max(m, sphere_distance(B.values[i], B.values[j]) / d);
    }
  }
  return m;
}

inline void validate_boundary(const BoundaryData& B, const FormContext& ctx) {
  if (B.dirs.size() < 3 || B.dirs.size() != B.values.size()) throw InvalidBoundary("boundary needs >= 3 paired samples");
  for (std::size_t k = 0; k < B.dirs.size(); ++k) {
    if (B.dirs[k].size() != ctx.p || B.values[k].size() != ctx.q + 1)
      throw InvalidBoundary("boundary sample " + std::to_string(k) + " has wrong size");
    if (std::abs(B.dirs[k].norm() - 1.0) > 1e-9 || std::abs(B.values[k].norm() - 1.0) > 1e-9)
      throw InvalidBoundary("boundary sample " + std::to_string(k) + " is not unit");
  }
  const double L = boundary_lipschitz(B);
  if (!(L < 1.0 - B.lightlike_margin))
    throw InvalidBoundary("boundary Lipschitz ratio " + std::to_string(L) + " violates the lightlike margin");
}

// --------------------------------------------------------------- solver

struct SolverConfig {
  double step = 0.0;  ///< <= 0 selects 0.2 h^2
  double tol_residual = 1e-4;
  long max_iter = 200000;
  double damping = 1.0;
  int log_every = 100;
  long stall_window = 20000;
};

struct ConvergenceRow {
  long iter;
  double residual;
  double min_eig_g;
};

struct SolveResult {
  SpacelikeGraph graph;
  std::vector<ConvergenceRow> history;
  long iterations = 0;
  long rejected = 0;
  double residual = 0.0;
};

namespace detail {

struct AreaGradient {
  std::vector<Vec> gu;  ///< tangent area gradient w.r.t. u_i, zero on boundary
  std::vector<double> mass;
  std::vector<Vec> gP;
  double residual = 0.0;
  bool spacelike = true;
};

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

/// Fills R in place; buffers are reused across calls.
inline void area_gradient(const SpacelikeGraph& G, AreaGradient& R) {
  const FormContext& ctx = G.ctx;
  const int p = ctx.p, m = ctx.q + 1, n = G.size(), dim = ctx.dim();
  double fact = 1.0;
  for (int k = 2; k <= p; ++k) fact *= k;
  R.gP.resize(n);
  R.gu.resize(n);
  for (int i = 0; i < n; ++i) {
    R.gP[i].setZero(dim);
    R.gu[i].setZero(m);
  }
  R.mass.assign(n, 0.0);
  R.residual = 0.0;
  R.spacelike = true;
  SmallMat E(dim, p), JE(dim, p), Gm(p, p), D(dim, p);
  for (const auto& S : G.simplices) {
    for (int k = 0; k < p; ++k) E.col(k) = G.P[S[k + 1]] - G.P[S[0]];
    JE = E;
    for (int r = 0; r < dim; ++r) JE.row(r) *= ctx.sign(r);
    Gm.noalias() = E.transpose() * JE;
    Eigen::LLT<SmallMat> llt(Gm);
    if (llt.info() != Eigen::Success) {
      R.spacelike = false;
      return;
    }
    const double sd = llt.matrixLLT().diagonal().prod();
    const double vol = sd / fact;
    SmallMat Gi = llt.solve(SmallMat::Identity(p, p));
    D.noalias() = vol * JE * Gi;
    for (int k = 0; k < p; ++k) {
      R.gP[S[k + 1]] += D.col(k);
      R.gP[S[0]] -= D.col(k);
    }
    for (int a : S) R.mass[a] += vol / S.size();
  }
  for (int i = 0; i < n; ++i) {
    if (G.boundary[i]) continue;
    const double c = G.P[i].tail(m).norm();
    Vec& g = R.gu[i];
    g = c * R.gP[i].tail(m);
    g -= g.dot(G.u[i]) * G.u[i];
    R.residual = std::max(R.residual, g.norm() / (p * R.mass[i] * c));
  }
}

inline AreaGradient area_gradient(const SpacelikeGraph& G) {
  AreaGradient R;
  area_gradient(G, R);
  return R;
}

inline double min_metric_eigenvalue(const SpacelikeGraph& G) {
  const FormContext& ctx = G.ctx;
  const int p = ctx.p;
  const Mat J = ctx.J();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& S : G.simplices) {
    Mat E(ctx.dim(), p), X(p, p);
    for (int k = 0; k < p; ++k) {
      E.col(k) = G.P[S[k + 1]] - G.P[S[0]];
      X.col(k) = G.x[S[k + 1]] - G.x[S[0]];
    }
    const Mat Xi = X.inverse();
    const Mat g = Xi.transpose() * (E.transpose() * J * E) * Xi;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()));
    best = std::min(best, es.eigenvalues().minCoeff());
  }
  return best;
}

}  // namespace detail

/// Sup over interior vertices of the discrete mean curvature from the vertical area gradient.
inline double residual(const SpacelikeGraph& G) {
  SpacelikeGraph H = G;
  H.embed_all();
  const auto R = detail::area_gradient(H);
  if (!R.spacelike) return std::numeric_limits<double>::infinity();
  return R.residual;
}

/// Sup over interior vertices of |H| from the quadratic-fit fundamental forms.
inline double fit_residual(const SpacelikeGraph& G) {
  double m = 0.0;
  for (int i = 0; i < G.size(); ++i)
    if (!G.boundary[i] && G.forms[i]) m = std::max(m, G.forms[i]->mean_curvature().norm());
  return m;
}

/// Initial guess: radial geodesic shrink of the boundary data toward their mean value.
inline std::function<Vec(const Vec&)> radial_extension(const BoundaryData& B, double radius) {
  Vec c = Vec::Zero(B.values[0].size());
  for (const auto& v : B.values) c += v;
  c /= c.norm();
  return [B, c, radius](const Vec& x) -> Vec {
    const double r = x.norm();
    if (r < 1e-14) return c;
    const double s = std::min(1.0, r / radius);
    return sphere_exp(c, s * s * sphere_log(c, B(x)));
  };
}

/// Barycentric transfer of values from a coarser graph of the same disk.
inline std::function<Vec(const Vec&)> interpolate_from(const SpacelikeGraph& coarse) {
  std::vector<std::vector<int>> incident(coarse.size());
  for (std::size_t s = 0; s < coarse.simplices.size(); ++s)
    for (int a : coarse.simplices[s]) incident[a].push_back(static_cast<int>(s));
  return [&coarse, incident](const Vec& x) -> Vec {
    const int p = coarse.ctx.p;
    int near = 0;
    double bd = 1e300;
    for (int i = 0; i < coarse.size(); ++i) {
      const double d = (coarse.x[i] - x).squaredNorm();
      if (d < bd) { bd = d; near = i; }
    }
    std::set<int> cand;
    for (int s : incident[near]) cand.insert(s);
    for (int w : coarse.nbrs[near])
      for (int s : incident[w]) cand.insert(s);
    double best_min = -1e300;
    Vec best_u = coarse.u[near];
    for (int s : cand) {
      const auto& S = coarse.simplices[s];
      Mat X(p, p);
      for (int k = 0; k < p; ++k) X.col(k) = coarse.x[S[k + 1]] - coarse.x[S[0]];
      const Vec l = X.fullPivLu().solve(x - coarse.x[S[0]]);
      Vec lam(p + 1);
      lam(0) = 1.0 - l.sum();
      lam.tail(p) = l;
      if (lam.minCoeff() > best_min) {
        best_min = lam.minCoeff();
        Vec acc = Vec::Zero(coarse.u[0].size());
        for (int k = 0; k <= p; ++k) acc += std::max(0.0, lam(k)) * coarse.u[S[k]];
        best_u = acc / acc.norm();
      }
    }
    return best_u;
  };
}

/**
 * @brief Drive a pinned graph toward vanishing mean curvature.
 *
 * Interior values move by exponential-map steps along the area gradient scaled
 * by vertex mass and the chart factor; steps that lose spacelikeness or raise the
 * residual are rejected and the step halved.
 */
inline SolveResult solve_graph(SpacelikeGraph G, double mesh_scale, const SolverConfig& cfg) {
  const int m = G.ctx.q + 1;
  const double tau0 = (cfg.step > 0.0 ? cfg.step : 0.2 * mesh_scale * mesh_scale) * cfg.damping;
  double tau = tau0;
  G.invalidate();
  G.embed_all();
  detail::AreaGradient R, RT;
  detail::area_gradient(G, R);
  if (!R.spacelike) throw SpacelikeViolation("initial graph is not spacelike");
  SolveResult out;
  out.history.push_back({0, R.residual, detail::min_metric_eigenvalue(G)});
  double best = R.residual;
  long best_iter = 0;
  long it = 0;
  SpacelikeGraph T = G;
  while (R.residual > cfg.tol_residual) {
    if (it >= cfg.max_iter)
      throw NonConvergence("max_iter reached with residual " + std::to_string(R.residual));
    if (it - best_iter > cfg.stall_window)
      throw NonConvergence("residual stagnated at " + std::to_string(R.residual));
    for (int i = 0; i < G.size(); ++i) {
      if (G.boundary[i]) continue;
      const double c = G.P[i].tail(m).norm();
      const Vec& v = R.gu[i];
      const double t = (tau / (R.mass[i] * c * c)) * v.norm();
      if (t < 1e-300) {
        T.u[i] = G.u[i];
        continue;
      }
      T.u[i] = std::cos(t) * G.u[i] + (std::sin(t) / v.norm()) * v;
      T.u[i] /= T.u[i].norm();
    }
    T.embed_all();
    detail::area_gradient(T, RT);
    if (!RT.spacelike || RT.residual > R.residual) {
      ++out.rejected;
      tau *= 0.5;
      if (tau < tau0 * 1e-6) {
        if (!RT.spacelike) throw SpacelikeViolation("backtracking floor reached on spacelike violation");
        throw NonConvergence("backtracking floor reached with residual " + std::to_string(R.residual));
      }
      continue;
    }
    ++it;
    std::swap(G.u, T.u);
    std::swap(G.P, T.P);
    std::swap(R, RT);
    tau = std::min(tau0, tau * 1.25);
    if (R.residual < best * (1.0 - 1e-6)) {
      best = R.residual;
      best_iter = it;
    }
    if (it % cfg.log_every == 0) out.history.push_back({it, R.residual, detail::min_metric_eigenvalue(G)});
  }
  if (out.history.back().iter != it) out.history.push_back({it, R.residual, detail::min_metric_eigenvalue(G)});
  out.iterations = it;
  out.residual = R.residual;
  out.graph = std::move(G);
  return out;
}

struct SolveSetup {
  FormContext ctx;
  double radius = 0.8;
};

/// Mesh the disk, pin boundary vertices to the data and run the flow.
inline SolveResult solve_maximal(const SolveSetup& setup, const BoundaryData& boundary, double mesh_scale,
                                 const SolverConfig& cfg,
                                 const std::function<Vec(const Vec&)>& initial = nullptr) {
  validate_boundary(boundary, setup.ctx);
  const DiskMesh mesh = disk_mesh(setup.ctx.p, setup.radius, mesh_scale);
  const auto init = initial ? initial : radial_extension(boundary, setup.radius);
  SpacelikeGraph G = make_graph(setup.ctx, mesh, [&](const Vec& x) {
    return x.norm() >= setup.radius * (1.0 - 1e-9) ? boundary(x) : init(x);
  });
  for (int i = 0; i < G.size(); ++i)
    if (G.boundary[i]) G.u[i] = boundary(G.x[i]);
  G.embed_all();
  return solve_graph(std::move(G), mesh.h, cfg);
}

// ----------------------------------------------------- maximum principle

struct MaxPrincipleReport {
  double L = 0.0;
  int vertex = -1;
  Vec direction;  ///< unit tangent in disk coordinates
  int target = -1;
  double lemma_slack = 0.0;
  double parallel_residual = 0.0;
  double eigen_residual = 0.0;
  double min_gradient = std::numeric_limits<double>::infinity();
};

/// 64 ideal targets along the boundary data and 32 interior targets at random interior vertices.
inline std::vector<ScoreTarget> scan_targets(const SpacelikeGraph& G, const BoundaryData& B, unsigned seed,
                                             int n_ideal = 64, int n_interior = 32) {
  const FormContext& ctx = G.ctx;
  const Vec o = ctx.origin();
  std::vector<ScoreTarget> T;
  if (ctx.p == 2) {
    for (int k = 0; k < n_ideal; ++k) {
      Vec d(2);
      d << std::cos(2.0 * M_PI * (k + 0.5) / n_ideal), std::sin(2.0 * M_PI * (k + 0.5) / n_ideal);
      T.push_back(ScoreTarget::ideal(ctx, fermi_boundary(ctx, d, B(d)), o));
    }
  } else {
    for (int k = 0; k < std::min<int>(n_ideal, static_cast<int>(B.dirs.size())); ++k)
      T.push_back(ScoreTarget::ideal(ctx, fermi_boundary(ctx, B.dirs[k], B.values[k]), o));
  }
  std::vector<int> interior;
  for (int i = 0; i < G.size(); ++i)
    if (!G.boundary[i]) interior.push_back(i);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < n_interior && !interior.empty(); ++k) {
    const int v = interior[std::uniform_int_distribution<int>(0, static_cast<int>(interior.size()) - 1)(rng)];
    T.push_back(ScoreTarget::interior(ctx, normalize_point(ctx, embed_vertex(G, v))));
  }
  return T;
}

/**
 * @brief Max of the restricted gradient norm over interior vertices and targets,
 *        with the lemma inequality and the critical-point identities at the argmax.
 */
inline MaxPrincipleReport max_principle_scan(const SpacelikeGraph& G, const std::vector<ScoreTarget>& targets) {
  const FormContext& ctx = G.ctx;
  const int p = ctx.p;
  MaxPrincipleReport rep;
  for (int i = 0; i < G.size(); ++i) {
    if (G.boundary[i] || !G.forms[i]) continue;
    const auto& F = *G.forms[i];
    for (std::size_t t = 0; t < targets.size(); ++t) {
      double L;
      try {
        L = restricted_gradient_norm(G, i, targets[t]);
      } catch (const DomainError&) {
        continue;
      }
      rep.min_gradient = std::min(rep.min_gradient, L);
      if (L > rep.L) {
        rep.L = L;
        rep.vertex = i;
        rep.target = static_cast<int>(t);
        const Vec grad = score_ambient_gradient(ctx, targets[t], F.P);
        const Vec c = F.tangent_coeffs(ctx, grad);
        rep.direction = c / L;
      }
    }
  }
  if (rep.vertex < 0) return rep;
  const auto& F = *G.forms[rep.vertex];
  const ScoreTarget& t = targets[rep.target];
  const Vec u = F.dP * rep.direction;
  const double L2 = rep.L * rep.L;
  const double zz = sq(ctx, t.z), uz = form(ctx, u, t.z);
  rep.lemma_slack = L2 - p - (zz / (uz * uz)) * L2 * (2.0 * L2 - p - 1.0);
  const double xz = form(ctx, F.P, t.z);
  const Vec zhat = t.z / std::abs(xz);
  const Vec zT = F.tangent_coeffs(ctx, zhat);
  const Vec par = zT - form(ctx, u, zhat) * rep.direction;
  const double nzT = std::sqrt(std::max(1e-300, zT.dot(F.g * zT)));
  rep.parallel_residual = std::sqrt(std::max(0.0, par.dot(F.g * par))) / nzT;
  const Vec Bu = F.shape_operator(ctx, zhat) * rep.direction;
  const Vec diff = Bu - (-1.0) * (L2 - 1.0) * rep.direction;
  rep.eigen_residual = std::sqrt(std::max(0.0, diff.dot(F.g * diff)));
  return rep;
}

}  // namespace pseudohyp
