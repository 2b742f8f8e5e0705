#include "pseudohyp/pq_core.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pseudohyp;

namespace {

Vec random_point(const FormContext& ctx, std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> N(0.0, spread);
  Vec v = Vec::Zero(ctx.dim());
  for (int i = 0; i < ctx.p; ++i) v(i) = N(rng);
  const Vec y = ctx.origin().tail(ctx.q + 1);
  v.tail(ctx.q + 1) = std::sqrt(1.0 + v.head(ctx.p).squaredNorm()) * y;
  return v;
}

Isometry random_isometry(const FormContext& ctx, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Isometry g = identity_isometry(ctx);
  for (int i = 0; i < ctx.p; ++i)
    for (int j = ctx.p; j < ctx.dim(); ++j) g = g * boost(ctx, i, j, 0.7 * U(rng));
  for (int i = 0; i + 1 < ctx.p; ++i) g = g * rotation(ctx, i, i + 1, 3.0 * U(rng));
  for (int j = ctx.p; j + 1 < ctx.dim(); ++j) g = g * rotation(ctx, j, j + 1, 3.0 * U(rng));
  return g;
}

Vec tangent_at(const FormContext& ctx, const Vec& x, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(ctx.dim());
  for (int i = 0; i < ctx.dim(); ++i) v(i) = N(rng);
  return v + form(ctx, v, x) * x;
}

}  // namespace

TEST(Form, SignatureAndBasepoint) {
  const FormContext ctx(2, 1);
  EXPECT_EQ(ctx.dim(), 4);
  EXPECT_DOUBLE_EQ(sq(ctx, ctx.e(0)), 1.0);
  EXPECT_DOUBLE_EQ(sq(ctx, ctx.e(1)), 1.0);
  EXPECT_DOUBLE_EQ(sq(ctx, ctx.e(2)), -1.0);
  EXPECT_DOUBLE_EQ(sq(ctx, ctx.origin()), -1.0);
  const Vec a = Vec::LinSpaced(4, 1.0, 4.0), b = Vec::LinSpaced(4, -2.0, 1.0);
  EXPECT_NEAR(form(ctx, a, b), a.dot(lower(ctx, b)), 1e-14);
  EXPECT_THROW(FormContext(1, 1), DomainError);
  EXPECT_THROW(form(ctx, Vec::Zero(3), a), DimensionMismatch);
}

TEST(Points, NormalizationAndValidation) {
  const FormContext ctx(3, 2);
  std::mt19937_64 rng(1);
  const Vec x = random_point(ctx, rng);
  EXPECT_TRUE(is_pseudo_point(ctx, x, 1e-12));
  EXPECT_NO_THROW(make_point(ctx, x));
  EXPECT_THROW(make_point(ctx, 2.0 * x), InvalidPoint);
  EXPECT_TRUE(is_pseudo_point(ctx, normalize_point(ctx, 3.0 * x), 1e-12));
  EXPECT_THROW(normalize_point(ctx, ctx.e(0)), DomainError);
}

TEST(Points, BoundaryScaling) {
  const FormContext ctx(2, 1);
  Vec z(4);
  z << 0.6, 0.8, 0.0, 1.0;
  const Vec o = ctx.origin();
  const Vec t = make_boundary(ctx, 5.0 * z, &o);
  EXPECT_NEAR(form(ctx, o, t), -1.0, 1e-14);
  EXPECT_NEAR(sq(ctx, t), 0.0, 1e-14);
  EXPECT_THROW(make_boundary(ctx, o), InvalidPoint);
}

TEST(Distance, ClassificationAndBlockCase) {
  const FormContext ctx(2, 1);
  const Vec o = ctx.origin();
  const Vec x = boost(ctx, 0, 3, 1.3).apply(o);
  EXPECT_EQ(classify_pair(ctx, o, x), PairKind::SpaceRelated);
  EXPECT_NEAR(pseudo_distance(ctx, o, x), 1.3, 1e-12);
  const Vec y = rotation(ctx, 2, 3, 0.4).apply(o);
  EXPECT_EQ(classify_pair(ctx, o, y), PairKind::NotSpaceRelated);
  EXPECT_EQ(pseudo_distance(ctx, o, y), 0.0);
  EXPECT_EQ(classify_pair(ctx, o, o), PairKind::Coincident);
}

TEST(Isometry, GeneratorsPreserveForm) {
  const FormContext ctx(3, 1);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Isometry g = random_isometry(ctx, rng);
    EXPECT_LT(isometry_defect(ctx, g.m), 1e-11);
    EXPECT_NO_THROW(make_isometry(ctx, g.m));
    EXPECT_LT((g * g.inverse()).m.isApprox(Mat::Identity(5, 5), 1e-12) ? 0.0 : 1.0, 0.5);
  }
  Mat bad = Mat::Identity(5, 5);
  bad(0, 0) = 2.0;
  EXPECT_THROW(make_isometry(ctx, bad), InvalidPoint);
  EXPECT_THROW(make_isometry(ctx, Mat::Identity(4, 4)), DimensionMismatch);
}

TEST(Isometry, DistanceInvariance) {
  const FormContext ctx(2, 2);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Vec a = random_point(ctx, rng), b = random_point(ctx, rng);
    const Isometry g = random_isometry(ctx, rng);
    EXPECT_NEAR(pseudo_distance(ctx, g.apply(a), g.apply(b)), pseudo_distance(ctx, a, b), 1e-9);
  }
}

TEST(Score, DifferentialMatchesFiniteDifference) {
  const FormContext ctx(2, 1);
  std::mt19937_64 rng(4);
  const Vec o = ctx.origin();
  Vec th(4);
  th << 0.0, 1.0, 0.6, 0.8;
  const std::vector<ScoreTarget> targets = {ScoreTarget::interior(ctx, boost(ctx, 0, 3, -2.0).apply(o)),
                                            ScoreTarget::ideal(ctx, th, o)};
  for (const auto& t : targets)
    for (int k = 0; k < 20; ++k) {
      const Vec x = random_point(ctx, rng, 0.5);
      const Vec u = tangent_at(ctx, x, rng);
      const double s = 1e-6;
      const double fd = (score(ctx, t, normalize_point(ctx, x + s * u)) - score(ctx, t, normalize_point(ctx, x - s * u))) / (2 * s);
      EXPECT_NEAR(score_differential(ctx, t, x, u), fd, 1e-6 * std::max(1.0, std::abs(fd)));
      const Vec g = score_ambient_gradient(ctx, t, x);
      EXPECT_NEAR(form(ctx, g, u), fd, 1e-6 * std::max(1.0, std::abs(fd)));
      EXPECT_NEAR(sq(ctx, g), 1.0, 1e-10);
      EXPECT_NEAR(form(ctx, g, x), 0.0, 1e-10);
    }
}

TEST(Score, IdealScoreVanishesAtBasepoint) {
  const FormContext ctx(3, 2);
  const Vec o = ctx.origin();
  Vec th = Vec::Zero(6);
  th(0) = 1.0;
  th(5) = 1.0;
  const auto t = ScoreTarget::ideal(ctx, th, o);
  EXPECT_NEAR(score(ctx, t, o), 0.0, 1e-15);
  EXPECT_THROW(score_differential(ctx, t, o, o), DomainError);
}

TEST(Fermi, RoundTripAndDisk) {
  const FormContext ctx(2, 2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    Vec x(2), y(3);
    x << U(rng), U(rng);
    y << N(rng), N(rng), N(rng);
    y /= y.norm();
    const Vec P = fermi_to_hyperboloid(ctx, x, y);
    EXPECT_TRUE(is_pseudo_point(ctx, P, 1e-12));
    const auto [x2, y2] = fermi_from_hyperboloid(ctx, P);
    EXPECT_LT((x2 - x).norm(), 1e-12);
    EXPECT_LT((y2 - y).norm(), 1e-12);
  }
  EXPECT_THROW(fermi_to_hyperboloid(ctx, Vec::Ones(2), Vec::Unit(3, 2)), DomainError);
}

TEST(Fermi, DiskFactorIsThePoincareBall) {
  // constant values give the totally geodesic copy, whose metric is the Poincare metric
  const FormContext ctx(2, 1);
  Vec y(2);
  y << 0.0, 1.0;
  Vec a(2), b(2);
  a << 0.1, -0.3;
  b << -0.5, 0.2;
  EXPECT_NEAR(pseudo_distance(ctx, fermi_to_hyperboloid(ctx, a, y), fermi_to_hyperboloid(ctx, b, y)), poincare_distance(a, b), 1e-12);
}

TEST(Fermi, JetMatchesFiniteDifference) {
  const FormContext ctx(2, 1);
  Vec c(2);
  c << 0.7, -0.4;
  Mat M(2, 2);
  M << 0.3, 0.1, 0.1, -0.5;
  auto phi = [&](const Vec& x) { return c.dot(x) + x.dot(M * x); };
  auto u = [&](const Vec& x) {
    Vec v(2);
    v << std::sin(phi(x)), std::cos(phi(x));
    return v;
  };
  auto P = [&](const Vec& x) { return fermi_to_hyperboloid(ctx, x, u(x)); };
  Vec x(2);
  x << 0.25, 0.4;
  const double f = phi(x);
  const Vec grad = c + 2.0 * M * x;
  const Mat H = 2.0 * M;
  Vec e1(2), e2(2);
  e1 << std::cos(f), -std::sin(f);
  e2 << -std::sin(f), -std::cos(f);
  Mat du = e1 * grad.transpose();
  std::vector<Vec> ddu(4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) ddu[a * 2 + b] = e2 * grad(a) * grad(b) + e1 * H(a, b);
  const ChartJet J = fermi_jet(ctx, x, u(x), du, ddu);
  const double s = 1e-5;
  for (int a = 0; a < 2; ++a) {
    const Vec ea = Vec::Unit(2, a) * s;
    const Vec fd = (P(x + ea) - P(x - ea)) / (2 * s);
    EXPECT_LT((J.dP.col(a) - fd).norm(), 1e-7);
    for (int b = 0; b < 2; ++b) {
      const Vec eb = Vec::Unit(2, b) * 1e-4;
      const Vec ea2 = Vec::Unit(2, a) * 1e-4;
      const Vec fd2 = (P(x + ea2 + eb) - P(x + ea2 - eb) - P(x - ea2 + eb) + P(x - ea2 - eb)) / (4e-8);
      EXPECT_LT((J.ddP[a * 2 + b] - fd2).norm(), 1e-4);
    }
  }
}

TEST(Sphere, ExpLogInverse) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Vec u(3), v(3);
    u << N(rng), N(rng), N(rng);
    v << N(rng), N(rng), N(rng);
    u /= u.norm();
    v /= v.norm();
    const Vec w = sphere_log(u, v);
    EXPECT_NEAR(w.dot(u), 0.0, 1e-12);
    EXPECT_NEAR(w.norm(), sphere_distance(u, v), 1e-12);
    EXPECT_LT((sphere_exp(u, w) - v).norm(), 1e-10);
    const Mat B = sphere_tangent_basis(u);
    EXPECT_LT((B.transpose() * B - Mat::Identity(2, 2)).norm(), 1e-12);
    EXPECT_LT((B.transpose() * u).norm(), 1e-12);
  }
}
