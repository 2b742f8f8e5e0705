#pragma once
/**
 * @file tube_volume.hpp
 * @brief Normal-exponential tubes around spacelike graphs: density, radii,
 *        injectivity probe, tube volume, Monte-Carlo pseudo-volume.
 */

#include "pseudohyp/group_dynamics.hpp"
#include "pseudohyp/spacelike_graph.hpp"

#include <random>

namespace pseudohyp {

struct TubeConfig {
  int t_samples = 16;
  int n_samples = 16;
  long mc_samples = 100000;
};

struct TubeDensity {
  double value = 0.0;
  bool negative_determinant = false;
};

/// det(cos t I + sin t B_n)^{1/2} for a unit timelike normal n at vertex i.
inline TubeDensity tube_density(const SpacelikeGraph& G, int i, const Vec& n, double t) {
  if (!(t > 0.0 && t < M_PI / 2)) throw DomainError("tube_density: t must lie in (0, pi/2)");
  const auto& F = fundamental_forms(G, i);
  if (std::abs(sq(G.ctx, n) + 1.0) > 1e-8) throw DomainError("tube_density: n must satisfy <n,n> = -1");
  const Mat B = F.shape_operator(G.ctx, n);
  const Mat A = std::cos(t) * Mat::Identity(B.rows(), B.cols()) + std::sin(t) * B;
  const double d = A.determinant();
  TubeDensity r;
  r.negative_determinant = !(d > 0.0);
  r.value = std::sqrt(std::max(0.0, d));
  return r;
}

struct TubeRadii {
  double r = 0.0;
  double t0 = 0.0;
  double sup_II = 0.0;
};

inline TubeRadii tube_radii(double sup_II, int p) {
  const double m = std::max(std::sqrt(p - 1.0), sup_II);
  return {std::atan(1.0 / m), std::atan(1.0 / (2.0 * m)), sup_II};
}

inline TubeRadii tube_radii(const SpacelikeGraph& G) {
  return tube_radii(curvature_report(G).sup_II(), G.ctx.p);
}

namespace detail {

/// Gauss-Legendre nodes and weights on [a, b] (Golub-Welsch).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n, double a, double b) {
  Mat T = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) T(k, k - 1) = T(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(T);
  std::vector<double> x(n), w(n);
  for (int k = 0; k < n; ++k) {
    x[k] = 0.5 * (a + b) + 0.5 * (b - a) * es.eigenvalues()(k);
    w[k] = (b - a) * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
  return {x, w};
}

/// Unit vectors of S^{k-1} with equal weights summing to its volume.
inline std::vector<std::pair<Vec, double>> sphere_nodes(int k, int n) {
  std::vector<std::pair<Vec, double>> out;
  if (k == 1) {
    out.push_back({Vec::Constant(1, 1.0), 1.0});
    out.push_back({Vec::Constant(1, -1.0), 1.0});
    return out;
  }
  if (k == 2) {
    for (int j = 0; j < n; ++j) {
      Vec v(2);
      v << std::cos(2.0 * M_PI * j / n), std::sin(2.0 * M_PI * j / n);
      out.push_back({v, 2.0 * M_PI / n});
    }
    return out;
  }
  // k == 3: Fibonacci lattice
  const double ga = M_PI * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < n; ++j) {
    const double z = 1.0 - 2.0 * (j + 0.5) / n;
    const double r = std::sqrt(1.0 - z * z);
    Vec v(3);
    v << r * std::cos(ga * j), r * std::sin(ga * j), z;
    out.push_back({v, 4.0 * M_PI / n});
  }
  return out;
}

}  // namespace detail

/// Volume of S^k.
inline double sphere_volume(int k) { return 2.0 * std::pow(M_PI, (k + 1) / 2.0) / std::tgamma((k + 1) / 2.0); }

/// Volume of a metric ball of radius t in S^q.
inline double ball_volume_sphere(int q, double t) {
  if (q < 1) throw DomainError("ball_volume_sphere needs q >= 1");
  const auto [x, w] = detail::gauss_legendre(48, 0.0, t);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * std::pow(std::sin(x[k]), q - 1);
  return (q == 1 ? 2.0 : sphere_volume(q - 1)) * s;
}

/// The constant 2^{-p/2} vol(B_{S^q}(t0)).
inline double mu_hat(int p, int q, double t0) { return std::pow(2.0, -p / 2.0) * ball_volume_sphere(q, t0); }

/// Tube volume over a totally geodesic piece of area `area`: the density reduces to cos^{p/2} t.
inline double geodesic_tube_volume(double area, int p, int q, double t0) {
  if (q < 1) throw DomainError("geodesic_tube_volume needs q >= 1");
  const auto [x, w] = detail::gauss_legendre(48, 0.0, t0);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * std::pow(std::cos(x[k]), p / 2.0) * std::pow(std::sin(x[k]), q - 1);
  return area * (q == 1 ? 2.0 : sphere_volume(q - 1)) * s;
}

struct TubeVolume {
  double volume = 0.0;
  double area_M = 0.0;  ///< mass of the vertices carried by the quadrature
  int vertices = 0;
  bool negative_determinant = false;
};

/**
 * @brief Quadrature of the tube density over vertex masses, unit normals and
 *        t in (0, t0), with polar weight sin^{q-1} t.
 *
 * Boundary and degenerate vertices are skipped; area_M counts the rest.
 */
inline TubeVolume tube_volume(const SpacelikeGraph& G, double t0, const TubeConfig& cfg) {
  const FormContext& ctx = G.ctx;
  const int q = ctx.q;
  if (q < 1) throw NotSupported("tube_volume needs q >= 1");
  if (q > 3) throw NotSupported("tube_volume supports q <= 3");
  const auto [ts, tw] = detail::gauss_legendre(cfg.t_samples, 0.0, t0);
  const auto nodes = detail::sphere_nodes(q, cfg.n_samples);
  const auto mass = vertex_masses(G);
  std::vector<double> contrib(G.size(), 0.0);
  std::vector<char> used(G.size(), 0), neg(G.size(), 0);
  parallel_for(G.size(), [&](int i) {
    if (G.boundary[i] || !G.forms[i]) return;
    const auto& F = *G.forms[i];
    double s = 0.0;
    for (const auto& [c, wn] : nodes) {
      const Vec n = F.frame * c;
      const Mat B = F.shape_operator(ctx, n);
      for (std::size_t k = 0; k < ts.size(); ++k) {
        const Mat A = std::cos(ts[k]) * Mat::Identity(B.rows(), B.cols()) + std::sin(ts[k]) * B;
        const double d = A.determinant();
        if (!(d > 0.0)) neg[i] = 1;
        s += wn * tw[k] * std::sqrt(std::max(0.0, d)) * std::pow(std::sin(ts[k]), q - 1);
      }
    }
    contrib[i] = mass[i] * s;
    used[i] = 1;
  });
  TubeVolume out;
  for (int i = 0; i < G.size(); ++i)
    if (used[i]) {
      out.volume += contrib[i];
      out.area_M += mass[i];
      ++out.vertices;
      if (neg[i]) out.negative_determinant = true;
    }
  return out;
}

/// Random unit timelike normal at vertex i.
inline Vec random_normal(const FundamentalForms& F, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec c(F.q());
  do {
    for (int j = 0; j < F.q(); ++j) c(j) = N(rng);
  } while (c.norm() < 1e-12);
  return F.frame * (c / c.norm());
}

struct InjectivityProbe {
  int trials = 0;
  int failures = 0;
};

/**
 * @brief For random (x, n, t) with t < t_max, the vertex minimizing
 *        f_u(y) = -<u, y> must be x or one of its mesh neighbors.
 */
inline InjectivityProbe tube_injectivity_probe(const SpacelikeGraph& G, int trials, double t_max,
                                               std::uint64_t seed) {
  std::vector<int> interior;
  for (int i = 0; i < G.size(); ++i)
    if (!G.boundary[i] && G.forms[i]) interior.push_back(i);
  if (interior.empty()) throw DegenerateStar("no interior vertex with fundamental forms");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(interior.size()) - 1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  InjectivityProbe out;
  out.trials = trials;
  for (int k = 0; k < trials; ++k) {
    const int i = interior[pick(rng)];
    const auto& F = *G.forms[i];
    const Vec n = random_normal(F, rng);
    const double t = t_max * U(rng);
    const Vec u = std::cos(t) * G.P[i] + std::sin(t) * n;
    int arg = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < G.size(); ++j) {
      const double f = -form(G.ctx, u, G.P[j]);
      if (f < best) {
        best = f;
        arg = j;
      }
    }
    const bool near = arg == i || std::find(G.nbrs[i].begin(), G.nbrs[i].end(), arg) != G.nbrs[i].end();
    if (!near) ++out.failures;
  }
  return out;
}

// ---------------------------------------------------------- Monte Carlo

struct McEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  long samples = 0;
  long accepted = 0;
};

namespace detail {

/// Fermi polar sample in H^{2,1}: density sinh(rho)cosh(rho) on [0, R], angles uniform.
inline Vec fermi_polar_sample(const FormContext& ctx, double R, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double rho = std::asinh(std::sinh(R) * std::sqrt(U(rng)));
  const double th = 2.0 * M_PI * U(rng), ph = 2.0 * M_PI * U(rng);
  Vec x(2), y(2);
  x << std::tanh(rho / 2) * std::cos(th), std::tanh(rho / 2) * std::sin(th);
  y << std::sin(ph), std::cos(ph);
  return fermi_to_hyperboloid(ctx, x, y);
}

inline double fermi_polar_box(double R) { return 4.0 * M_PI * M_PI * std::sinh(R) * std::sinh(R) / 2.0; }

template <class Accept>
McEstimate mc_volume(const FormContext& ctx, double R, long n, std::uint64_t seed, Accept&& accept) {
  const int batches = 32;
  const long per = std::max<long>(1, n / batches);
  std::vector<long> hits(batches, 0);
  parallel_for(batches, [&](int b) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (b + 1));
    for (long k = 0; k < per; ++k)
      if (accept(fermi_polar_sample(ctx, R, rng))) ++hits[b];
  });
  const double V = fermi_polar_box(R);
  McEstimate E;
  E.samples = per * batches;
  double mean = 0.0, m2 = 0.0;
  for (long h : hits) {
    const double v = V * static_cast<double>(h) / per;
    mean += v;
    m2 += v * v;
    E.accepted += h;
  }
  mean /= batches;
  const double var = std::max(0.0, m2 / batches - mean * mean) * batches / (batches - 1.0);
  E.value = mean;
  E.stderr_ = std::sqrt(var / batches);
  return E;
}

}  // namespace detail

/**
 * @brief Pseudo-volume of the Dirichlet domain of the table intersected with
 *        the domain of discontinuity, for (p,q) = (2,1).
 * @param limit_points representatives with <o, xi> = -1
 * @param R Fermi radius of the sampling box around o
 */
inline McEstimate pseudo_volume_mc(const OrbitTable& T, const std::vector<Vec>& limit_points, double R,
                                   long mc_samples, std::uint64_t seed) {
  const FormContext& ctx = T.ctx;
  if (ctx.p != 2 || ctx.q != 1) throw NotSupported("pseudo_volume_mc supports (p,q) = (2,1) only");
  if (limit_points.empty()) throw DomainError("pseudo_volume_mc needs limit points");
  return detail::mc_volume(ctx, R, mc_samples, seed, [&](const Vec& x) {
    for (const auto& xi : limit_points)
      if (!(form(ctx, x, xi) < 0.0)) return false;
    return fundamental_domain_membership(T, x).member;
  });
}

/**
 * @brief Pseudo-volume of {u : min over vertices of -<u, y> is positive and attained at an interior vertex}.
 */
inline McEstimate region_volume_mc(const SpacelikeGraph& G, double R, long mc_samples, std::uint64_t seed) {
  const FormContext& ctx = G.ctx;
  if (ctx.p != 2 || ctx.q != 1) throw NotSupported("region_volume_mc supports (p,q) = (2,1) only");
  return detail::mc_volume(ctx, R, mc_samples, seed, [&](const Vec& u) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int j = 0; j < G.size(); ++j) {
      const double f = -form(ctx, u, G.P[j]);
      if (f < best) {
        best = f;
        arg = j;
      }
    }
    return best > 0.0 && !G.boundary[arg];
  });
}

/// delta^2 vol / (4g - 4) for closed surfaces of genus g >= 2.
inline double entropy_volume_product(double delta, double vol, int genus) {
  if (genus < 2) throw DomainError("entropy_volume_product needs genus >= 2");
  return delta * delta * vol / (4.0 * genus - 4.0);
}

struct VolumeReport {
  double area_M = 0.0;
  double tube_volume = 0.0;
  double r = 0.0;
  double t0 = 0.0;
  double pseudo_volume = 0.0;
  double pseudo_volume_stderr = 0.0;
  double mu = 0.0;
  double mu_check_slack = 0.0;  ///< tube_volume - mu * area_M
};

}  // namespace pseudohyp
