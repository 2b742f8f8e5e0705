#pragma once
/**
 * @file group_dynamics.hpp
 * @brief Representations into SO(p,q+1): block embedding, bending, orbit
 *        enumeration, critical exponent fits, translation lengths, Dirichlet
 *        domains and diameter estimates.
 */

#include "pseudohyp/pq_core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace pseudohyp {

struct InvalidSignature : Error { using Error::Error; };
struct NonCommuting : Error { using Error::Error; };
struct BadPartition : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };

// --------------------------------------------------------- representation

enum class RepKind { Free, SurfaceGroup, Generic };

/// Generator k is the letter 'a'+k; its inverse is the upper-case letter.
struct Representation {
  FormContext ctx{2, 1};
  std::vector<Isometry> generators;
  RepKind kind = RepKind::Generic;
  int genus = 0;
  std::string relator;
  std::string label;

  int rank() const { return static_cast<int>(generators.size()); }
  /// Generators followed by their inverses, in letter order a..,A..
  std::vector<Isometry> letters() const {
    std::vector<Isometry> out = generators;
    for (const auto& g : generators) out.push_back(g.inverse());
    return out;
  }
};

inline char letter_of(int k, int rank) {
  return k < rank ? static_cast<char>('a' + k) : static_cast<char>('A' + (k - rank));
}

inline int index_of(char c, int rank) {
  int k = -1;
  if (c >= 'a' && c < 'a' + rank) k = c - 'a';
  if (c >= 'A' && c < 'A' + rank) k = rank + (c - 'A');
  if (k < 0) throw DomainError(std::string("unknown letter '") + c + "'");
  return k;
}

inline char inverse_letter(char c) {
  return std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c))
                                                    : static_cast<char>(std::tolower(c));
}

inline std::string inverse_word(const std::string& w) {
  std::string r(w.rbegin(), w.rend());
  for (char& c : r) c = inverse_letter(c);
  return r;
}

/// Product of the letters left to right.
inline Mat word_matrix(const Representation& rep, const std::string& word) {
  const auto L = rep.letters();
  Mat m = Mat::Identity(rep.ctx.dim(), rep.ctx.dim());
  for (char c : word) m = m * L[index_of(c, rep.rank())].m;
  return m;
}

inline double relator_residual(const Representation& rep) {
  if (rep.relator.empty()) return 0.0;
  const Mat m = word_matrix(rep, rep.relator);
  return (m - Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

inline void validate_representation(const Representation& rep, double relator_tol = 1e-8) {
  for (int k = 0; k < rep.rank(); ++k) {
    const Mat& g = rep.generators[k].m;
    if (isometry_defect(rep.ctx, g) > kEpsIso * std::max(1.0, g.cwiseAbs().maxCoeff() * g.cwiseAbs().maxCoeff()))
      throw InvalidSignature("generator " + std::string(1, letter_of(k, rep.rank())) + " does not preserve the form");
    if (rep.kind == RepKind::Free && (g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-12)
      throw DomainError("free generator is the identity");
  }
  if (relator_residual(rep) > relator_tol)
    throw DomainError("relator residual " + std::to_string(relator_residual(rep)) + " exceeds tolerance");
}

// ------------------------------------------------------------ embedding

/**
 * @brief SO(p,1) acting on (x_1..x_p, y_{q+1}); identity on y_1..y_q.
 *
 * An orientation-reversing input is corrected by flipping y_1.
 */
inline Isometry block_embed(const Isometry& G, int q) {
  const int p = G.ctx.p;
  if (G.ctx.q != 0) throw InvalidSignature("block_embed expects an element of signature (p,1)");
  if (q < 0) throw InvalidSignature("q must be non-negative");
  const FormContext ctx(p, q);
  Mat m = Mat::Identity(ctx.dim(), ctx.dim());
  auto idx = [&](int i) { return i < p ? i : ctx.dim() - 1; };
  for (int i = 0; i <= p; ++i)
    for (int j = 0; j <= p; ++j) m(idx(i), idx(j)) = G.m(i, j);
  if (G.m.determinant() < 0.0) {
    if (q == 0) throw InvalidSignature("orientation-reversing element with no fixed block to correct it");
    m(p, p) = -1.0;
  }
  return make_isometry(ctx, m, kEpsIso * std::max(1.0, m.squaredNorm()));
}

inline Representation block_embed(const Representation& rep, int q) {
  Representation out = rep;
  out.ctx = FormContext(rep.ctx.p, q);
  out.generators.clear();
  for (const auto& g : rep.generators) out.generators.push_back(block_embed(g, q));
  return out;
}

// -------------------------------------------------------------- bending

inline bool in_lie_algebra(const FormContext& ctx, const Mat& K, double tol = 1e-10) {
  const Mat J = ctx.J();
  return (K.transpose() * J + J * K).cwiseAbs().maxCoeff() <= tol * std::max(1.0, K.cwiseAbs().maxCoeff());
}

/**
 * @brief Conjugate the generators flagged in `side` by exp(tK).
 *
 * K must lie in so(p,q+1) and commute with the image of `curve_word`.
 */
inline Representation bend(const Representation& rep, const std::string& curve_word, const Mat& K, double t,
                           const std::vector<bool>& side) {
  if (static_cast<int>(side.size()) != rep.rank()) throw BadPartition("partition size differs from the generator count");
  if (std::all_of(side.begin(), side.end(), [](bool b) { return b; }) ||
      std::none_of(side.begin(), side.end(), [](bool b) { return b; }))
    throw BadPartition("partition must split the generators into two non-empty sides");
  if (!in_lie_algebra(rep.ctx, K)) throw NonCommuting("K is not in the Lie algebra of the form");
  const Mat c = word_matrix(rep, curve_word);
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff()) * std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((K * c - c * K).cwiseAbs().maxCoeff() > 1e-8 * scale) throw NonCommuting("K does not commute with the curve");
  const Mat E = (t * K).exp();
  const Mat Ei = (-t * K).exp();
  Representation out = rep;
  out.label = rep.label + " bent t=" + std::to_string(t);
  for (int k = 0; k < rep.rank(); ++k)
    if (side[k]) out.generators[k].m = E * rep.generators[k].m * Ei;
  return out;
}

/**
 * @brief Boost in the plane spanned by the spacelike fixed vector of the curve
 *        inside the acted-on block and the first fixed timelike axis.
 *
 * Meant for block-embedded surface groups with q >= 1.
 */
inline Mat commuting_boost(const Representation& rep, const std::string& curve_word) {
  const FormContext& ctx = rep.ctx;
  if (ctx.q < 1) throw InvalidSignature("commuting_boost needs q >= 1");
  const int p = ctx.p, n = ctx.dim();
  const Mat c = word_matrix(rep, curve_word);
  std::vector<int> blk;
  for (int i = 0; i < p; ++i) blk.push_back(i);
  blk.push_back(n - 1);
  Mat cb(p + 1, p + 1);
  for (int i = 0; i <= p; ++i)
    for (int j = 0; j <= p; ++j) cb(i, j) = c(blk[i], blk[j]);
  Eigen::JacobiSVD<Mat> svd(cb - Mat::Identity(p + 1, p + 1), Eigen::ComputeFullV);
  const Vec k = svd.matrixV().col(p);
  Vec w = Vec::Zero(n);
  for (int i = 0; i <= p; ++i) w(blk[i]) = k(i);
  const double ww = sq(ctx, w);
  if (!(ww > 0.0)) throw InvalidSignature("fixed vector of the curve is not spacelike");
  w /= std::sqrt(ww);
  const Vec e = ctx.e(p);
  return w * lower(ctx, e).transpose() - e * lower(ctx, w).transpose();
}

// ---------------------------------------------------------- enumeration

struct OrbitEntry {
  std::string word;
  Mat m;
  Vec point;
  double dist = 0.0;
};

struct OrbitTable {
  FormContext ctx{2, 1};
  Vec o;
  std::vector<OrbitEntry> entries;
  int max_len = 0;
  double prune_radius = std::numeric_limits<double>::infinity();

  /// Radius up to which the table is trusted: the largest distance, capped by the pruning radius.
  double coverage() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.dist);
    return std::min(m, prune_radius);
  }
  std::vector<double> distances() const {
    std::vector<double> d;
    d.reserve(entries.size());
    for (const auto& e : entries) d.push_back(e.dist);
    return d;
  }
};

struct EnumerateOptions {
  int max_len = 8;
  long cap = 5000000;
  double prune_radius = std::numeric_limits<double>::infinity();  ///< entries farther than this are kept but not extended
};

namespace detail {

struct MatrixIndex {
  std::unordered_map<long long, std::vector<int>> buckets;
  static long long key(double c) { return std::llround(std::asinh(c) * 1e6); }
  static bool same(const Mat& a, const Mat& b) {
    return (a - b).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff());
  }
  int find(const std::vector<OrbitEntry>& E, double c, const Mat& m) const {
    const long long k = key(c);
    for (long long kk = k - 1; kk <= k + 1; ++kk) {
      auto it = buckets.find(kk);
      if (it == buckets.end()) continue;
      for (int i : it->second)
        if (same(E[i].m, m)) return i;
    }
    return -1;
  }
  void insert(double c, int i) { buckets[key(c)].push_back(i); }
};

}  // namespace detail

/**
 * @brief Breadth-first orbit table in word length.
 *
 * Free groups list reduced words; other kinds keep one entry per distinct
 * matrix (tolerance 1e-8), first word in shortlex order wins.
 */
inline OrbitTable enumerate_orbit(const Representation& rep, const Vec& o, const EnumerateOptions& opt) {
  if (opt.max_len < 1) throw DomainError("max_len must be >= 1");
  const FormContext& ctx = rep.ctx;
  if (!is_pseudo_point(ctx, o, 1e-9)) throw InvalidPoint("basepoint is not on the hyperboloid");
  const auto L = rep.letters();
  const int r = rep.rank();
  // a second generic point separates elements with equal displacement of o
  Vec o2 = o;
  {
    const Isometry s = boost(ctx, 0, ctx.dim() - 1, 0.3137) * boost(ctx, ctx.p - 1, ctx.dim() - 1, 0.1719);
    o2 = s.apply_point(o);
  }
  OrbitTable T;
  T.ctx = ctx;
  T.o = o;
  T.max_len = opt.max_len;
  T.prune_radius = opt.prune_radius;
  detail::MatrixIndex index;
  const bool dedup = rep.kind != RepKind::Free;
  auto push = [&](const std::string& w, Mat m) -> bool {
    Vec pt = m * o;
    const double c = -form(ctx, o2, m * o2);
    if (dedup) {
      if (index.find(T.entries, c, m) >= 0) return false;
      index.insert(c, static_cast<int>(T.entries.size()));
    }
    if (static_cast<long>(T.entries.size()) >= opt.cap)
      throw BudgetExceeded("orbit enumeration passed the cap of " + std::to_string(opt.cap) + " entries");
    OrbitEntry e;
    e.word = w;
    e.dist = pseudo_distance(ctx, o, pt);
    e.point = std::move(pt);
    e.m = std::move(m);
    T.entries.push_back(std::move(e));
    return true;
  };
  push("", Mat::Identity(ctx.dim(), ctx.dim()));
  std::vector<int> frontier{0};
  for (int len = 1; len <= opt.max_len; ++len) {
    std::vector<int> next;
    for (int f : frontier) {
      if (T.entries[f].dist > opt.prune_radius) continue;
      const std::string w = T.entries[f].word;
      const Mat m = T.entries[f].m;
      for (int k = 0; k < 2 * r; ++k) {
        const char c = letter_of(k, r);
        if (!w.empty() && w.back() == inverse_letter(c)) continue;
        if (push(w + c, m * L[k].m)) next.push_back(static_cast<int>(T.entries.size()) - 1);
      }
    }
    frontier.swap(next);
  }
  return T;
}

inline OrbitTable enumerate_orbit(const Representation& rep, const Vec& o, int max_len) {
  EnumerateOptions opt;
  opt.max_len = max_len;
  return enumerate_orbit(rep, o, opt);
}

// -------------------------------------------------------------- entropy

struct EntropyEstimate {
  std::vector<double> R_grid;
  std::vector<long> counts;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;
  double window_min = 0.0, window_max = 0.0;
  int window_points = 0;
};

/// Uniform grid of n points on (0, R_max].
inline std::vector<double> uniform_grid(double R_max, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = R_max * (k + 1) / n;
  return g;
}

/**
 * @brief Least-squares slope of log N(R) over [R_max/2, R_max].
 * @param coverage largest distance the underlying table reaches
 */
inline EntropyEstimate entropy_estimate(std::vector<double> dists, const std::vector<double>& R_grid, double coverage) {
  if (R_grid.size() < 2) throw InsufficientData("R grid needs at least two points");
  for (std::size_t k = 1; k < R_grid.size(); ++k)
    if (!(R_grid[k] > R_grid[k - 1])) throw InsufficientData("R grid must be increasing");
  const double R_max = R_grid.back();
  if (coverage < R_max + std::log(2.0))
    throw InsufficientData("table reaches " + std::to_string(coverage) + ", needs R_max + log 2 = " +
                           std::to_string(R_max + std::log(2.0)));
  std::sort(dists.begin(), dists.end());
  EntropyEstimate E;
  E.R_grid = R_grid;
  for (double R : R_grid)
    E.counts.push_back(static_cast<long>(std::upper_bound(dists.begin(), dists.end(), R) - dists.begin()));
  E.window_min = 0.5 * R_max;
  E.window_max = R_max;
  std::vector<double> X, Y;
  for (std::size_t k = 0; k < R_grid.size(); ++k)
    if (R_grid[k] >= E.window_min - 1e-12 && E.counts[k] > 0) {
      X.push_back(R_grid[k]);
      Y.push_back(std::log(static_cast<double>(E.counts[k])));
    }
  const int n = static_cast<int>(X.size());
  E.window_points = n;
  if (n < 3) throw InsufficientData("fewer than three grid points in the fit window");
  const double mx = std::accumulate(X.begin(), X.end(), 0.0) / n;
  const double my = std::accumulate(Y.begin(), Y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < n; ++k) {
    sxx += (X[k] - mx) * (X[k] - mx);
    sxy += (X[k] - mx) * (Y[k] - my);
  }
  E.slope = sxy / sxx;
  E.intercept = my - E.slope * mx;
  double rss = 0.0;
  for (int k = 0; k < n; ++k) {
    const double e = Y[k] - E.intercept - E.slope * X[k];
    rss += e * e;
  }
  E.stderr_ = std::sqrt(rss / (n - 2) / sxx);
  return E;
}

inline EntropyEstimate entropy_estimate(const OrbitTable& T, const std::vector<double>& R_grid) {
  return entropy_estimate(T.distances(), R_grid, T.coverage());
}

// ------------------------------------------------------ length spectrum

struct TranslationLength {
  double length = 0.0;
  double lambda_max = 1.0;
  bool proximal = false;
};

/// log of the proximal eigenvalue; non-proximal elements report length 0.
inline TranslationLength translation_length(const Mat& g) {
  Eigen::EigenSolver<Mat> es(g, false);
  const auto ev = es.eigenvalues();
  std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  TranslationLength r;
  const double top = std::abs(v[0]);
  r.lambda_max = top;
  const bool real = std::abs(v[0].imag()) <= 1e-9 * top;
  const bool simple = v.size() < 2 || top - std::abs(v[1]) > 1e-7 * top;
  if (real && simple && top > 1.0 + 1e-9) {
    r.proximal = true;
    r.length = std::log(top);
  }
  return r;
}

inline TranslationLength translation_length(const Isometry& g) { return translation_length(g.m); }

struct SpectrumEntry {
  std::string word;
  TranslationLength tl;
};

inline std::vector<SpectrumEntry> length_spectrum(const OrbitTable& T) {
  std::vector<SpectrumEntry> out;
  for (const auto& e : T.entries)
    if (!e.word.empty()) out.push_back({e.word, translation_length(e.m)});
  return out;
}

/// Strips inverse pairs across the ends of a word.
inline std::string cyclic_reduce(std::string w) {
  while (w.size() >= 2 && w.front() == inverse_letter(w.back())) w = w.substr(1, w.size() - 2);
  return w;
}

/// True when w = v^k for some k >= 2.
inline bool is_proper_power(const std::string& w) {
  const std::size_t n = w.size();
  for (std::size_t d = 1; d < n; ++d)
    if (n % d == 0 && w == std::string(w.begin() + d, w.end()) + w.substr(0, d)) return true;
  return false;
}

/// Least rotation of w or of its inverse: one key per cyclic word up to inversion.
inline std::string conjugacy_key(const std::string& w) {
  std::string best;
  for (const std::string& v : {w, inverse_word(w)})
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string r = v.substr(k) + v.substr(0, k);
      if (best.empty() || r < best) best = r;
    }
  return best;
}

/// Proximal entries with cyclically reduced words that are not proper powers, one per cyclic
/// word up to inversion, sorted by length. Conjugated representatives are skipped since long
/// conjugators cost precision in the eigenvalues.
inline std::vector<SpectrumEntry> primitive_spectrum(const OrbitTable& T) {
  std::map<std::string, SpectrumEntry> seen;
  for (const auto& e : T.entries) {
    const std::string& w = e.word;
    if (w.empty() || cyclic_reduce(w) != w || is_proper_power(w)) continue;
    const auto tl = translation_length(e.m);
    if (!tl.proximal) continue;
    seen.emplace(conjugacy_key(w), SpectrumEntry{w, tl});
  }
  std::vector<SpectrumEntry> out;
  for (auto& [k, v] : seen) out.push_back(v);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.tl.length < b.tl.length; });
  return out;
}

struct Systole {
  std::string word;
  double length = std::numeric_limits<double>::infinity();
};

/// Shortest proximal translation length over cyclically reduced table words (an upper bound for the systole).
inline Systole systole(const OrbitTable& T) {
  Systole s;
  for (const auto& e : T.entries) {
    if (e.word.empty() || cyclic_reduce(e.word) != e.word) continue;
    const auto tl = translation_length(e.m);
    if (tl.proximal && tl.length < s.length - 1e-12) {
      s.length = tl.length;
      s.word = e.word;
    }
  }
  return s;
}

inline Systole systole(const Representation& rep, int max_len) {
  return systole(enumerate_orbit(rep, rep.ctx.origin(), max_len));
}

// ---------------------------------------------------- fundamental domain

struct DomainMembership {
  bool member = false;
  std::string word;  ///< minimizer of -<x, g o>
  double value = 0.0;
  bool tie = false;
};

/// Identity minimizes -<x, g o> over the table.
inline DomainMembership fundamental_domain_membership(const OrbitTable& T, const Vec& x) {
  DomainMembership r;
  double best = std::numeric_limits<double>::infinity(), second = best;
  int arg = -1;
  for (std::size_t k = 0; k < T.entries.size(); ++k) {
    const double v = -form(T.ctx, x, T.entries[k].point);
    if (v < best) {
      second = best;
      best = v;
      arg = static_cast<int>(k);
    } else if (v < second) {
      second = v;
    }
  }
  r.word = T.entries[arg].word;
  r.value = best;
  r.tie = second - best <= 1e-9 * std::max(1.0, std::abs(best));
  r.member = T.entries[arg].word.empty() || (r.tie && std::abs(-form(T.ctx, x, T.o) - best) <= 1e-9 * std::max(1.0, std::abs(best)));
  return r;
}

inline DomainMembership fundamental_domain_membership(const Representation& rep, const Vec& o, const Vec& x,
                                                      int max_len) {
  return fundamental_domain_membership(enumerate_orbit(rep, o, max_len), x);
}

struct TilingCount {
  int members = 0;
  bool tie = false;
};

/**
 * @brief Count table translates g^{-1} x that pass membership, over entries
 *        whose orbit point lies within `candidate_radius` of o.
 */
inline TilingCount tiling_count(const OrbitTable& T, const Vec& x, double candidate_radius) {
  TilingCount out;
  const FormContext& ctx = T.ctx;
  for (const auto& e : T.entries) {
    if (e.dist > candidate_radius) continue;
    const Mat inv = ctx.J() * e.m.transpose() * ctx.J();
    const Vec y = inv * x;
    const auto mem = fundamental_domain_membership(T, y);
    if (mem.tie) out.tie = true;
    if (mem.member) ++out.members;
  }
  return out;
}

/// Points of the block H^p copy within `radius` of o, tilted toward y_1 by an angle up to `tilt`.
inline std::vector<Vec> sample_hull_points(const FormContext& ctx, std::mt19937_64& rng, int n, double radius,
                                           double tilt) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  const int p = ctx.p;
  std::vector<Vec> out;
  while (static_cast<int>(out.size()) < n) {
    Vec d(p);
    for (int a = 0; a < p; ++a) d(a) = N(rng);
    d /= d.norm();
    // hyperbolic ball volume density sinh^{p-1}; sample by rejection
    double rho;
    while (true) {
      rho = radius * U(rng);
      if (U(rng) * std::pow(std::sinh(radius), p - 1) <= std::pow(std::sinh(rho), p - 1)) break;
    }
    Vec h = Vec::Zero(ctx.dim());
    h.head(p) = std::sinh(rho) * d;
    h(ctx.dim() - 1) = std::cosh(rho);
    if (ctx.q >= 1 && tilt > 0.0) {
      const double t = tilt * (2.0 * U(rng) - 1.0);
      h = std::cos(t) * h + std::sin(t) * ctx.e(p);
    }
    out.push_back(normalize_point(ctx, h));
  }
  return out;
}

// ------------------------------------------------------------- diameter

struct DiameterEstimate {
  double value = 0.0;
  long pairs = 0;
  int samples = 0;
};

/// max over sampled space-related pairs of min over the table of dist(x, g y).
inline DiameterEstimate diameter_estimate(const OrbitTable& T, const std::vector<Vec>& samples,
                                          const std::function<double(const Vec&, const Vec&)>& dist = nullptr) {
  const FormContext& ctx = T.ctx;
  auto d = dist ? dist : [&ctx](const Vec& a, const Vec& b) { return pseudo_distance(ctx, a, b); };
  DiameterEstimate D;
  D.samples = static_cast<int>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      if (classify_pair(ctx, samples[i], samples[j]) != PairKind::SpaceRelated) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& e : T.entries) best = std::min(best, d(samples[i], normalize_point(ctx, e.m * samples[j])));
      ++D.pairs;
      D.value = std::max(D.value, best);
    }
  return D;
}

/// Attracting eigenvectors of proximal table elements, scaled so <o, xi> = -1.
inline std::vector<Vec> approximate_limit_points(const OrbitTable& T, double min_dist) {
  const FormContext& ctx = T.ctx;
  std::vector<Vec> out;
  for (const auto& e : T.entries) {
    if (e.dist < min_dist) continue;
    Eigen::EigenSolver<Mat> es(e.m);
    int best = 0;
    for (int k = 1; k < es.eigenvalues().size(); ++k)
      if (std::abs(es.eigenvalues()(k)) > std::abs(es.eigenvalues()(best))) best = k;
    if (std::abs(es.eigenvalues()(best).imag()) > 1e-9 * std::abs(es.eigenvalues()(best))) continue;
    Vec v = es.eigenvectors().col(best).real();
    const double ov = form(ctx, T.o, v);
    if (std::abs(ov) < 1e-14 * v.norm()) continue;
    out.push_back(-v / ov);
  }
  return out;
}

}  // namespace pseudohyp
