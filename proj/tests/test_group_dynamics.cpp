#include "pseudohyp/config.hpp"

#include <gtest/gtest.h>

using namespace pseudohyp;

namespace {

Representation genus2() { return load_representation(std::string(PSEUDOHYP_DATA_DIR) + "/genus2_octagon.json"); }

std::vector<std::string> all_words(int rank, int max_len) {
  std::vector<std::string> out{""}, level{""};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& w : level)
      for (int k = 0; k < 2 * rank; ++k) next.push_back(w + letter_of(k, rank));
    out.insert(out.end(), next.begin(), next.end());
    level.swap(next);
  }
  return out;
}

bool reduced(const std::string& w) {
  for (std::size_t k = 1; k < w.size(); ++k)
    if (w[k] == inverse_letter(w[k - 1])) return false;
  return true;
}

/// Hyperbolic translation length from the trace of an SO(2,1) element.
double trace_length(const Mat& m) { return std::acosh(0.5 * (m.trace() - 1.0)); }

/// Displacement at the fixed point of repeated midpoints of g^-1 x and g x on the hyperboloid.
double axis_displacement(const FormContext& ctx, const Mat& g) {
  const Mat gi = ctx.J() * g.transpose() * ctx.J();
  Vec x = ctx.origin();
  for (int k = 0; k < 400; ++k) {
    const Vec m = gi * x + g * x;
    x = m / std::sqrt(-sq(ctx, m));
  }
  return pseudo_distance(ctx, x, g * x);
}

}  // namespace

TEST(Words, LettersAndInverses) {
  EXPECT_EQ(letter_of(0, 4), 'a');
  EXPECT_EQ(letter_of(5, 4), 'B');
  EXPECT_EQ(index_of('C', 4), 6);
  EXPECT_THROW(index_of('e', 4), DomainError);
  EXPECT_EQ(inverse_word("abC"), "cBA");
  EXPECT_EQ(cyclic_reduce("abcA"), "bc");
  EXPECT_EQ(cyclic_reduce("abA"), "b");
  EXPECT_TRUE(is_proper_power("abab"));
  EXPECT_FALSE(is_proper_power("aba"));
  EXPECT_EQ(conjugacy_key("ba"), conjugacy_key("AB"));
  EXPECT_EQ(conjugacy_key("bca"), "ACB");
}

TEST(Representation, GenusTwoData) {
  const Representation rep = genus2();
  EXPECT_EQ(rep.rank(), 4);
  EXPECT_EQ(rep.kind, RepKind::SurfaceGroup);
  EXPECT_LT(relator_residual(rep), 1e-10);
  for (const auto& g : rep.generators) EXPECT_LT(isometry_defect(rep.ctx, g.m), 1e-9);
  const Representation e = block_embed(rep, 2);
  EXPECT_EQ(e.ctx.q, 2);
  EXPECT_LT(relator_residual(e), 1e-10);
  EXPECT_THROW(block_embed(e, 1), InvalidSignature);
}

TEST(Enumeration, FreeGroupCountsReducedWords) {
  const Representation rep = schottky_representation(1);
  for (int n = 1; n <= 5; ++n) {
    const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), n);
    long expected = 0;
    for (const auto& w : all_words(2, n)) expected += reduced(w);
    EXPECT_EQ(static_cast<long>(T.entries.size()), expected);
    EXPECT_EQ(static_cast<long>(T.entries.size()), 1 + 2 * (std::lround(std::pow(3, n)) - 1));
  }
}

TEST(Enumeration, SurfaceGroupMatchesBruteForce) {
  const Representation rep = genus2();
  const int n = 3;
  std::vector<Mat> distinct;
  for (const auto& w : all_words(4, n)) {
    const Mat m = word_matrix(rep, w);
    bool seen = false;
    for (const auto& d : distinct)
      if ((d - m).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        seen = true;
        break;
      }
    if (!seen) distinct.push_back(m);
  }
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), n);
  EXPECT_EQ(T.entries.size(), distinct.size());
  // no relation shorter than the relator: every reduced word is distinct
  long reduced_count = 0;
  for (const auto& w : all_words(4, n)) reduced_count += reduced(w);
  EXPECT_EQ(static_cast<long>(T.entries.size()), reduced_count);
  for (const auto& e : T.entries) EXPECT_NEAR(e.dist, pseudo_distance(rep.ctx, T.o, word_matrix(rep, e.word) * T.o), 1e-9);
}

TEST(Enumeration, BudgetAndPruning) {
  const Representation rep = schottky_representation(1);
  EnumerateOptions opt;
  opt.max_len = 8;
  opt.cap = 100;
  EXPECT_THROW(enumerate_orbit(rep, rep.ctx.origin(), opt), BudgetExceeded);
  opt.cap = 1000000;
  opt.prune_radius = 6.0;
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), opt);
  const OrbitTable F = enumerate_orbit(rep, rep.ctx.origin(), 8);
  std::vector<double> a = T.distances(), b;
  for (double d : F.distances())
    if (d <= 6.0) b.push_back(d);
  std::vector<double> a6;
  for (double d : a)
    if (d <= 6.0) a6.push_back(d);
  EXPECT_EQ(a6.size(), b.size());
  EXPECT_LE(T.coverage(), 6.0);
  EXPECT_THROW(enumerate_orbit(rep, Vec::Ones(4), 2), InvalidPoint);
}

TEST(TranslationLength, MatchesTraceAndAxis) {
  const Representation rep = genus2();
  for (const std::string w : {"a", "b", "ab", "aC", "abc", "acBd", "abABc"}) {
    const Mat m = word_matrix(rep, w);
    const auto tl = translation_length(m);
    ASSERT_TRUE(tl.proximal) << w;
    EXPECT_NEAR(tl.length, trace_length(m), 1e-9) << w;
    EXPECT_NEAR(tl.length, axis_displacement(rep.ctx, m), 1e-6) << w;
    // block embedding adds a trivial eigenvalue only
    const Representation e = block_embed(rep, 1);
    EXPECT_NEAR(translation_length(word_matrix(e, w)).length, tl.length, 1e-9) << w;
  }
  const FormContext c(2, 0);
  EXPECT_FALSE(translation_length(rotation(c, 0, 1, 0.7)).proximal);
  EXPECT_EQ(translation_length(Mat::Identity(3, 3)).length, 0.0);
}

TEST(TranslationLength, SystoleBruteForce) {
  const Representation rep = genus2();
  const int n = 4;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : all_words(4, n)) {
    if (w.empty() || !reduced(w) || cyclic_reduce(w) != w) continue;
    best = std::min(best, trace_length(word_matrix(rep, w)));
  }
  const Systole s = systole(rep, n);
  EXPECT_NEAR(s.length, best, 1e-9);
  EXPECT_NEAR(trace_length(word_matrix(rep, s.word)), s.length, 1e-9);
}

TEST(Spectrum, PrimitiveClassesOnce) {
  const Representation rep = cyclic_representation(1, 0.8);
  const auto S = primitive_spectrum(enumerate_orbit(rep, rep.ctx.origin(), 6));
  ASSERT_EQ(S.size(), 1u);
  EXPECT_EQ(S[0].word, "a");
  EXPECT_NEAR(S[0].tl.length, 0.8, 1e-12);

  const Representation g = genus2();
  const auto P = primitive_spectrum(enumerate_orbit(g, g.ctx.origin(), 3));
  std::set<std::string> keys;
  for (std::size_t k = 0; k < P.size(); ++k) {
    EXPECT_TRUE(keys.insert(conjugacy_key(P[k].word)).second);
    EXPECT_FALSE(is_proper_power(P[k].word));
    if (k) EXPECT_LE(P[k - 1].tl.length, P[k].tl.length);
  }
}

TEST(Bending, PreservesRelatorAndCurveLength) {
  const Representation rep = block_embed(genus2(), 1);
  const std::string curve = "abAB";
  const Mat K = commuting_boost(rep, curve);
  EXPECT_TRUE(in_lie_algebra(rep.ctx, K));
  const std::vector<bool> side{false, false, true, true};
  for (double t : {0.0, 0.2, 0.4}) {
    const Representation b = bend(rep, curve, K, t, side);
    EXPECT_LT(relator_residual(b), 1e-8);
    for (const auto& g : b.generators) EXPECT_LT(isometry_defect(b.ctx, g.m) / g.m.squaredNorm(), 1e-12);
    EXPECT_NEAR(translation_length(word_matrix(b, curve)).length, translation_length(word_matrix(rep, curve)).length,
                1e-8);
    EXPECT_NEAR(translation_length(word_matrix(b, "ab")).length, translation_length(word_matrix(rep, "ab")).length,
                1e-8);
    if (t == 0.0)
      for (int k = 0; k < 4; ++k) EXPECT_LT((b.generators[k].m - rep.generators[k].m).cwiseAbs().maxCoeff(), 1e-12);
  }
  const Representation b = bend(rep, curve, K, 0.4, side);
  EXPECT_GT(std::abs(translation_length(word_matrix(b, "ac")).length - translation_length(word_matrix(rep, "ac")).length),
            1e-3);
  EXPECT_THROW(bend(rep, curve, K, 0.2, {true, true, true, true}), BadPartition);
  EXPECT_THROW(bend(rep, curve, K, 0.2, {true, false}), BadPartition);
  EXPECT_THROW(bend(rep, "a", K, 0.2, side), NonCommuting);
  EXPECT_THROW(bend(rep, curve, Mat::Identity(4, 4), 0.2, side), NonCommuting);
  EXPECT_THROW(commuting_boost(genus2(), curve), InvalidSignature);
}

TEST(Entropy, CyclicCountsAreLinear) {
  const Representation rep = cyclic_representation(1, 0.8);
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), 24);
  const auto grid = uniform_grid(12.0, 48);
  const EntropyEstimate E = entropy_estimate(T, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double f = grid[k] / 0.8 - std::round(grid[k] / 0.8);
    if (std::abs(f) < 1e-9) continue;
    EXPECT_EQ(E.counts[k], 1 + 2 * static_cast<long>(std::floor(grid[k] / 0.8)));
  }
  EXPECT_LT(E.slope, 0.15);
  EXPECT_GT(E.slope, 0.0);
}

TEST(Entropy, RecoversExponentialGrowth) {
  const double delta = 0.7;
  std::vector<double> d;
  for (long k = 1; k <= 200000; ++k) d.push_back(std::log(static_cast<double>(k)) / delta);
  const EntropyEstimate E = entropy_estimate(d, uniform_grid(16.0, 40), 100.0);
  EXPECT_NEAR(E.slope, delta, 5e-3);
  EXPECT_LT(E.stderr_, 5e-3);
  EXPECT_THROW(entropy_estimate(d, uniform_grid(16.0, 40), 16.0), InsufficientData);
  EXPECT_THROW(entropy_estimate(d, {1.0}, 100.0), InsufficientData);
  EXPECT_THROW(entropy_estimate(d, {2.0, 1.0}, 100.0), InsufficientData);
}

TEST(Entropy, SchottkyGrowthMatchesTheFreeCount) {
  // word length tracks distance closely for this Schottky group; the slope sits near log 3 / length
  const Representation rep = schottky_representation(1);
  const double len = translation_length(rep.generators[0]).length;
  EnumerateOptions opt;
  opt.max_len = 30;
  opt.prune_radius = 12.0 + std::log(2.0) + 0.8;
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), opt);
  const EntropyEstimate E = entropy_estimate(T, uniform_grid(12.0, 48));
  EXPECT_GT(E.slope, 0.0);
  EXPECT_LT(E.slope, 1.0);
  EXPECT_NEAR(E.slope, std::log(3.0) / len, 0.15);
}

TEST(Domain, MembershipAndTiling) {
  const Representation rep = genus2();
  EnumerateOptions opt;
  opt.max_len = 8;
  opt.prune_radius = 6.0;
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), opt);
  const Vec o = rep.ctx.origin();
  EXPECT_TRUE(fundamental_domain_membership(T, o).member);
  EXPECT_FALSE(fundamental_domain_membership(T, rep.generators[0].apply(o)).member);
  EXPECT_EQ(fundamental_domain_membership(T, rep.generators[0].apply(o)).word, "a");
  std::mt19937_64 rng(5);
  const auto pts = sample_hull_points(rep.ctx, rng, 30, 1.8, 0.0);
  for (const auto& x : pts) {
    EXPECT_LE(pseudo_distance(rep.ctx, o, x), 1.8 + 1e-9);
    const TilingCount c = tiling_count(T, x, 3.5);
    EXPECT_FALSE(c.tie);
    EXPECT_EQ(c.members, 1);
  }
}

TEST(Domain, LimitPointsAreLightlike) {
  const Representation rep = block_embed(genus2(), 1);
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), 4);
  const auto xi = approximate_limit_points(T, 4.0);
  ASSERT_FALSE(xi.empty());
  for (const auto& v : xi) {
    EXPECT_NEAR(form(rep.ctx, T.o, v), -1.0, 1e-9);
    EXPECT_NEAR(sq(rep.ctx, v), 0.0, 1e-6);
  }
}
