#include "pseudohyp/config.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pseudohyp;

namespace {

const double kR = 0.8;

std::function<Vec(const Vec&)> tilted(int q, double s) {
  return [q, s](const Vec& x) { return tilted_geodesic_value(x, q, s); };
}

BoundaryData truncated_trace(int p, int q, double s, int n = 256) {
  return sample_boundary(p, n, [q, s](const Vec& d) { return tilted_geodesic_value(Vec(kR * d), q, s); });
}

}  // namespace

TEST(AreaGradient, MatchesFiniteDifferenceOfArea) {
  const FormContext ctx(2, 1);
  SpacelikeGraph G = make_graph(ctx, disk_mesh(2, kR, 0.1), [](const Vec& x) {
    const double a = 0.3 * x(0) - 0.4 * x(0) * x(1);
    return (Vec(2) << std::sin(a), std::cos(a)).finished();
  });
  const auto R = detail::area_gradient(G);
  ASSERT_TRUE(R.spacelike);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, G.size() - 1);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const int i = pick(rng);
    for (int c = 0; c < ctx.dim(); ++c) {
      SpacelikeGraph A = G, B = G;
      A.P[i](c) += h;
      B.P[i](c) -= h;
      const double fd = (graph_area(A) - graph_area(B)) / (2.0 * h);
      EXPECT_NEAR(R.gP[i](c), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "vertex " << i << " coord " << c;
    }
  }
  const auto m = vertex_masses(G);
  for (int i = 0; i < G.size(); ++i) EXPECT_NEAR(R.mass[i], m[i], 1e-12);
}

TEST(AreaGradient, TangentToTheSphereAndZeroOnBoundary) {
  const FormContext ctx(2, 2);
  SpacelikeGraph G = make_graph(ctx, disk_mesh(2, kR, 0.1), [](const Vec& x) {
    Vec v(3);
    v << 0.2 * x(0), 0.3 * x(1) * x(1), 1.0;
    return Vec(v / v.norm());
  });
  const auto R = detail::area_gradient(G);
  for (int i = 0; i < G.size(); ++i) {
    EXPECT_NEAR(R.gu[i].dot(G.u[i]), 0.0, 1e-12);
    if (G.boundary[i]) EXPECT_EQ(R.gu[i].norm(), 0.0);
  }
}

TEST(Residual, ConstantBoundaryIsAlreadyMaximal) {
  const FormContext ctx(2, 1);
  const BoundaryData B = sample_boundary(2, 64, [](const Vec&) { return (Vec(2) << 0.0, 1.0).finished(); });
  SolverConfig cfg;
  cfg.tol_residual = 1e-10;
  const SolveResult r = solve_maximal({ctx, kR}, B, 0.08, cfg);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(Residual, ExactGeodesicShrinksWithMesh) {
  const FormContext ctx(2, 1);
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {0.16, 0.08, 0.04}) {
    const SpacelikeGraph G = make_graph(ctx, disk_mesh(2, kR, h), tilted(1, 0.5));
    const double r = residual(G);
    EXPECT_LT(r, prev) << "h=" << h;
    prev = r;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(Solve, RecoversTiltedGeodesic) {
  const FormContext ctx(2, 1);
  const BoundaryData B = truncated_trace(2, 1, 0.5);
  SolverConfig cfg;
  cfg.tol_residual = 1e-6;
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {0.16, 0.08}) {
    const SolveResult r = solve_maximal({ctx, kR}, B, h, cfg);
    EXPECT_LE(r.residual, cfg.tol_residual);
    EXPECT_GT(detail::min_metric_eigenvalue(r.graph), 0.0);
    double err = 0.0;
    for (int i = 0; i < r.graph.size(); ++i)
      err = std::max(err, sphere_distance(r.graph.u[i], tilted_geodesic_value(r.graph.x[i], 1, 0.5)));
    EXPECT_LT(err, prev);
    prev = err;
    for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k].residual, r.history[k - 1].residual);
  }
  EXPECT_LT(prev, 5e-3);
}

TEST(Solve, WarmStartFromCoarseLevel) {
  const FormContext ctx(2, 1);
  const BoundaryData B = truncated_trace(2, 1, 0.5);
  SolverConfig cfg;
  cfg.tol_residual = 1e-6;
  const SolveResult coarse = solve_maximal({ctx, kR}, B, 0.16, cfg);
  const SolveResult cold = solve_maximal({ctx, kR}, B, 0.08, cfg);
  const SolveResult warm = solve_maximal({ctx, kR}, B, 0.08, cfg, interpolate_from(coarse.graph));
  EXPECT_LT(warm.iterations, cold.iterations);
  for (int i = 0; i < warm.graph.size(); ++i) EXPECT_LT(sphere_distance(warm.graph.u[i], cold.graph.u[i]), 1e-3);
}

TEST(Solve, BudgetAndSpacelikeFailures) {
  const FormContext ctx(2, 1);
  const BoundaryData B = truncated_trace(2, 1, 0.5);
  SolverConfig cfg;
  cfg.tol_residual = 1e-12;
  cfg.max_iter = 10;
  EXPECT_THROW(solve_maximal({ctx, kR}, B, 0.16, cfg), NonConvergence);
  // initial graph steeper than light
  SpacelikeGraph G = make_graph(ctx, disk_mesh(2, kR, 0.16), [](const Vec& x) {
    return (Vec(2) << std::sin(6.0 * x(0)), std::cos(6.0 * x(0))).finished();
  });
  EXPECT_THROW(solve_graph(G, 0.16, SolverConfig{}), SpacelikeViolation);
}

TEST(Boundary, InterpolationAndValidation) {
  const FormContext ctx(2, 1);
  const BoundaryData B = truncated_trace(2, 1, 0.5, 32);
  for (std::size_t k = 0; k < B.dirs.size(); ++k) EXPECT_LT((B(B.dirs[k]) - B.values[k]).norm(), 1e-12);
  EXPECT_NO_THROW(validate_boundary(B, ctx));
  EXPECT_LT(boundary_lipschitz(B), 1.0);

  BoundaryData few = B;
  few.dirs.resize(2);
  few.values.resize(2);
  EXPECT_THROW(validate_boundary(few, ctx), InvalidBoundary);

  BoundaryData wrong = B;
  wrong.values[3] = Vec::Ones(3) / std::sqrt(3.0);
  EXPECT_THROW(validate_boundary(wrong, ctx), InvalidBoundary);

  BoundaryData nonunit = B;
  nonunit.values[0] *= 1.1;
  EXPECT_THROW(validate_boundary(nonunit, ctx), InvalidBoundary);

  const BoundaryData fast = sample_boundary(2, 64, [](const Vec& d) {
    const double a = 1.2 * std::atan2(d(1), d(0));
    return (Vec(2) << std::sin(3.0 * a), std::cos(3.0 * a)).finished();
  });
  EXPECT_THROW(validate_boundary(fast, ctx), InvalidBoundary);
}

TEST(Boundary, ThreeDimensionalSamplesAreUnit) {
  const BoundaryData B = sample_boundary(3, 100, [](const Vec& d) { return tilted_geodesic_value(d, 1, 0.3); });
  for (const auto& d : B.dirs) EXPECT_NEAR(d.norm(), 1.0, 1e-12);
  EXPECT_NO_THROW(validate_boundary(B, FormContext(3, 1)));
  const Vec v = B(B.dirs[5]);
  EXPECT_LT((v - B.values[5]).norm(), 1e-12);
}

TEST(MaxPrinciple, TiltedGeodesicGradientIsOne) {
  const FormContext ctx(2, 1);
  const SolveResult r = solve_maximal({ctx, kR}, truncated_trace(2, 1, 0.5), 0.08, SolverConfig{});
  SpacelikeGraph G = r.graph;
  G.build_cache();
  const BoundaryData ideal = sample_boundary(2, 256, tilted(1, 0.5));
  const auto T = scan_targets(G, ideal, 3, 64, 32);
  EXPECT_EQ(T.size(), 96u);
  const auto M = max_principle_scan(G, T);
  ASSERT_GE(M.vertex, 0);
  EXPECT_NEAR(M.L, 1.0, 2e-3);
  EXPECT_LT(M.lemma_slack, 1e-2);
}
