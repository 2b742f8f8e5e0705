#pragma once
/**
 * @file pq_core.hpp
 * @brief Signature (p, q+1) linear algebra, points of the hyperboloid
 *        double cover, isometries, score functions and Fermi charts.
 */

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pseudohyp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InvalidPoint : Error { using Error::Error; };
struct NotSupported : Error { using Error::Error; };

inline constexpr double kEpsNorm = 1e-12;
inline constexpr double kEpsIso = 1e-10;

struct FormContext {
  int p = 2;
  int q = 1;

  FormContext() = default;
  FormContext(int p_, int q_) : p(p_), q(q_) {
    if (p < 2 || q < 0) throw DomainError("FormContext requires p >= 2 and q >= 0");
  }
  int dim() const { return p + q + 1; }
  double sign(int i) const { return i < p ? 1.0 : -1.0; }
  Mat J() const {
    Mat j = Mat::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) j(i, i) = sign(i);
    return j;
  }
  Vec e(int i) const {
    Vec v = Vec::Zero(dim());
    v(i) = 1.0;
    return v;
  }
  /// Standard basepoint: the last timelike axis.
  Vec origin() const { return e(dim() - 1); }
  bool operator==(const FormContext& o) const { return p == o.p && q == o.q; }
  bool operator!=(const FormContext& o) const { return !(*this == o); }
};

inline void check_dim(const FormContext& ctx, const Vec& a) {
  if (a.size() != ctx.dim())
    throw DimensionMismatch("vector has size " + std::to_string(a.size()) +
                            ", expected " + std::to_string(ctx.dim()));
}

inline double form(const FormContext& ctx, const Vec& a, const Vec& b) {
  check_dim(ctx, a);
  check_dim(ctx, b);
  const int p = ctx.p;
  return a.head(p).dot(b.head(p)) - a.tail(ctx.q + 1).dot(b.tail(ctx.q + 1));
}

/// J a, so that form(a, b) = a.dot(lower(b)).
inline Vec lower(const FormContext& ctx, const Vec& a) {
  Vec r = a;
  r.tail(ctx.q + 1) *= -1.0;
  return r;
}

inline double sq(const FormContext& ctx, const Vec& a) { return form(ctx, a, a); }

// ---------------------------------------------------------------- points

inline bool is_pseudo_point(const FormContext& ctx, const Vec& v, double tol = kEpsNorm) {
  if (v.size() != ctx.dim() || !v.allFinite()) return false;
  return std::abs(sq(ctx, v) + 1.0) <= tol * std::max(1.0, v.squaredNorm());
}

/// Rescale a timelike vector to the hyperboloid <v,v> = -1.
inline Vec normalize_point(const FormContext& ctx, const Vec& v) {
  const double n = sq(ctx, v);
  if (!(n < 0.0)) throw DomainError("cannot normalize a non-timelike vector");
  return v / std::sqrt(-n);
}

inline Vec make_point(const FormContext& ctx, const Vec& v) {
  check_dim(ctx, v);
  if (!is_pseudo_point(ctx, v)) throw InvalidPoint("vector is not on the hyperboloid <v,v> = -1");
  return v;
}

inline bool is_boundary_point(const FormContext& ctx, const Vec& z, double tol = kEpsNorm) {
  if (z.size() != ctx.dim() || !z.allFinite()) return false;
  const double n2 = z.squaredNorm();
  return n2 > 0.0 && std::abs(sq(ctx, z)) <= tol * n2;
}

/// Boundary representative; if a basepoint is given the ray is scaled so <o,z> = -1.
inline Vec make_boundary(const FormContext& ctx, const Vec& z, const Vec* basepoint = nullptr) {
  check_dim(ctx, z);
  if (!is_boundary_point(ctx, z)) throw InvalidPoint("vector is not a non-zero null vector");
  if (!basepoint) return z;
  const double s = form(ctx, *basepoint, z);
  if (s == 0.0) throw DomainError("boundary point is orthogonal to the basepoint");
  return z / (-s);
}

enum class PairKind { SpaceRelated, NotSpaceRelated, Coincident };

inline PairKind classify_pair(const FormContext& ctx, const Vec& x, const Vec& y) {
  const double s = form(ctx, x, y);
  if (std::abs(s + 1.0) <= kEpsNorm * std::max(1.0, std::abs(s))) return PairKind::Coincident;
  return s < -1.0 ? PairKind::SpaceRelated : PairKind::NotSpaceRelated;
}

inline double pseudo_distance(const FormContext& ctx, const Vec& x, const Vec& y) {
  const double s = -form(ctx, x, y);
  return s > 1.0 ? std::acosh(s) : 0.0;
}

// ------------------------------------------------------------ isometries

struct Isometry {
  FormContext ctx;
  Mat m;

  Vec apply(const Vec& v) const { return m * v; }
  /// Image of a hyperboloid point, renormalized to damp drift.
  Vec apply_point(const Vec& x) const { return normalize_point(ctx, m * x); }
  Isometry operator*(const Isometry& o) const { return Isometry{ctx, m * o.m}; }
  Isometry inverse() const { return Isometry{ctx, ctx.J() * m.transpose() * ctx.J()}; }
};

inline double isometry_defect(const FormContext& ctx, const Mat& g) {
  const Mat J = ctx.J();
  return (g.transpose() * J * g - J).cwiseAbs().maxCoeff();
}

inline Isometry make_isometry(const FormContext& ctx, const Mat& g, double tol = kEpsIso) {
  if (g.rows() != ctx.dim() || g.cols() != ctx.dim())
    throw DimensionMismatch("isometry matrix has wrong shape");
  if (!g.allFinite()) throw InvalidPoint("isometry matrix has non-finite entries");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (isometry_defect(ctx, g) > tol * scale * scale)
    throw InvalidPoint("matrix does not preserve the form");
  if (std::abs(g.determinant() - 1.0) > tol * std::pow(scale, ctx.dim()))
    throw InvalidPoint("isometry determinant differs from 1");
  return Isometry{ctx, g};
}

inline Isometry identity_isometry(const FormContext& ctx) {
  return Isometry{ctx, Mat::Identity(ctx.dim(), ctx.dim())};
}

/// Boost of rapidity t in the plane (e_i spacelike, e_j timelike).
inline Isometry boost(const FormContext& ctx, int i, int j, double t) {
  Mat g = Mat::Identity(ctx.dim(), ctx.dim());
  g(i, i) = std::cosh(t);
  g(j, j) = std::cosh(t);
  g(i, j) = std::sinh(t);
  g(j, i) = std::sinh(t);
  return Isometry{ctx, g};
}

/// Rotation by angle t in a plane of two coordinates with equal sign.
inline Isometry rotation(const FormContext& ctx, int i, int j, double t) {
  Mat g = Mat::Identity(ctx.dim(), ctx.dim());
  g(i, i) = std::cos(t);
  g(j, j) = std::cos(t);
  g(i, j) = -std::sin(t);
  g(j, i) = std::sin(t);
  return Isometry{ctx, g};
}

// ---------------------------------------------------------------- scores

struct ScoreTarget {
  enum class Kind { Interior, Ideal };
  Kind kind = Kind::Interior;
  Vec z;  ///< o for Interior, theta (scaled so <o,theta> = -1) for Ideal
  Vec o;

  static ScoreTarget interior(const FormContext& ctx, const Vec& o) {
    return ScoreTarget{Kind::Interior, make_point(ctx, o), o};
  }
  static ScoreTarget ideal(const FormContext& ctx, const Vec& theta, const Vec& o) {
    make_point(ctx, o);
    return ScoreTarget{Kind::Ideal, make_boundary(ctx, theta, &o), o};
  }
  ScoreTarget transformed(const Isometry& g) const {
    return ScoreTarget{kind, g.apply(z), g.apply(o)};
  }
};

inline double score(const FormContext& ctx, const ScoreTarget& t, const Vec& x) {
  if (t.kind == ScoreTarget::Kind::Ideal) {
    const double a = form(ctx, x, t.z);
    const double b = form(ctx, t.o, t.z);
    if (!(a < 0.0)) throw DomainError("score: <x,theta> must be negative");
    return std::log(a / b);
  }
  const double s = form(ctx, t.z, x);
  if (!(s < -1.0)) throw DomainError("score: <o,x> must be below -1");
  return std::acosh(-s);
}

namespace detail {
inline double score_denominator(const FormContext& ctx, const ScoreTarget& t, const Vec& x) {
  const double xz = form(ctx, x, t.z);
  const double d = sq(ctx, t.z) + xz * xz;
  if (!(d > 0.0)) throw DomainError("score gradient undefined: <z,z> + <x,z>^2 <= 0");
  if (t.kind == ScoreTarget::Kind::Ideal && !(xz < 0.0))
    throw DomainError("score: <x,theta> must be negative");
  if (t.kind == ScoreTarget::Kind::Interior && !(xz < -1.0))
    throw DomainError("score: <o,x> must be below -1");
  return std::sqrt(d);
}
}  // namespace detail

inline double score_differential(const FormContext& ctx, const ScoreTarget& t, const Vec& x, const Vec& u) {
  const double tangency = form(ctx, u, x);
  if (std::abs(tangency) > 1e-9 * std::max(1.0, u.norm() * x.norm()))
    throw DomainError("score_differential: u is not tangent at x");
  return -form(ctx, u, t.z) / detail::score_denominator(ctx, t, x);
}

/// Gradient of the score; a unit spacelike vector tangent to the hyperboloid at x.
inline Vec score_ambient_gradient(const FormContext& ctx, const ScoreTarget& t, const Vec& x) {
  const double den = detail::score_denominator(ctx, t, x);
  return -(t.z + form(ctx, x, t.z) * x) / den;
}

// ------------------------------------------------------------ Fermi chart

inline Vec fermi_to_hyperboloid(const FormContext& ctx, const Vec& x, const Vec& y) {
  if (x.size() != ctx.p || y.size() != ctx.q + 1) throw DimensionMismatch("fermi chart argument sizes");
  const double r2 = x.squaredNorm();
  if (!(r2 < 1.0)) throw DomainError("fermi_to_hyperboloid: |x| must be < 1");
  if (std::abs(y.norm() - 1.0) > 1e-9) throw DomainError("fermi_to_hyperboloid: |y| must be 1");
  Vec v(ctx.dim());
  v.head(ctx.p) = 2.0 * x / (1.0 - r2);
  v.tail(ctx.q + 1) = (1.0 + r2) / (1.0 - r2) * y;
  return v;
}

/// Null representative [x + y] of the ideal point with |x| = 1.
inline Vec fermi_boundary(const FormContext& ctx, const Vec& x, const Vec& y) {
  if (x.size() != ctx.p || y.size() != ctx.q + 1) throw DimensionMismatch("fermi chart argument sizes");
  Vec v(ctx.dim());
  v.head(ctx.p) = x / x.norm();
  v.tail(ctx.q + 1) = y / y.norm();
  return v;
}

inline std::pair<Vec, Vec> fermi_from_hyperboloid(const FormContext& ctx, const Vec& pt) {
  check_dim(ctx, pt);
  const Vec a = pt.head(ctx.p);
  const Vec b = pt.tail(ctx.q + 1);
  const double c = b.norm();
  return {a / (1.0 + c), b / c};
}

/// Differential of the projection to the disk factor at pt applied to v.
inline Vec fermi_projection_differential(const FormContext& ctx, const Vec& pt, const Vec& v) {
  const Vec a = pt.head(ctx.p);
  const Vec b = pt.tail(ctx.q + 1);
  const double c = b.norm();
  const double dc = b.dot(v.tail(ctx.q + 1)) / c;
  return v.head(ctx.p) / (1.0 + c) - a * dc / ((1.0 + c) * (1.0 + c));
}

/// Hyperbolic metric of the Poincare ball.
inline double poincare_metric(const Vec& x, const Vec& v, const Vec& w) {
  const double s = 2.0 / (1.0 - x.squaredNorm());
  return s * s * v.dot(w);
}

inline double poincare_distance(const Vec& a, const Vec& b) {
  const double num = 2.0 * (a - b).squaredNorm();
  const double den = (1.0 - a.squaredNorm()) * (1.0 - b.squaredNorm());
  return std::acosh(1.0 + num / den);
}

/// Embedding P = F(x, u(x)) with first and second derivatives in the disk coordinates.
struct ChartJet {
  Vec P;
  Mat dP;               ///< dim x p
  std::vector<Vec> ddP; ///< p*p entries, index a*p+b
};

/**
 * @brief Chain rule through the Fermi chart.
 * @param du (q+1) x p first derivatives of u at x.
 * @param ddu p*p second derivatives (each of size q+1), index a*p+b.
 */
inline ChartJet fermi_jet(const FormContext& ctx, const Vec& x, const Vec& u, const Mat& du,
                          const std::vector<Vec>& ddu) {
  const int p = ctx.p, m = ctx.q + 1;
  const double r2 = x.squaredNorm();
  if (!(r2 < 1.0)) throw DomainError("fermi_jet: |x| must be < 1");
  const double s = 1.0 / (1.0 - r2);
  const double c = 2.0 * s - 1.0;
  ChartJet J;
  J.P = fermi_to_hyperboloid(ctx, x, u);
  J.dP = Mat::Zero(ctx.dim(), p);
  J.ddP.assign(p * p, Vec::Zero(ctx.dim()));
  Vec dc(p);
  for (int a = 0; a < p; ++a) dc(a) = 4.0 * x(a) * s * s;
  for (int a = 0; a < p; ++a) {
    for (int k = 0; k < p; ++k)
      J.dP(k, a) = (k == a ? 2.0 * s : 0.0) + 4.0 * x(k) * x(a) * s * s;
    J.dP.col(a).tail(m) = dc(a) * u + c * du.col(a);
  }
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      Vec& v = J.ddP[a * p + b];
      for (int k = 0; k < p; ++k) {
        v(k) = 4.0 * s * s * ((k == a ? x(b) : 0.0) + (k == b ? x(a) : 0.0) + (a == b ? x(k) : 0.0)) +
               16.0 * x(k) * x(a) * x(b) * s * s * s;
      }
      const double ddc = 4.0 * (a == b ? 1.0 : 0.0) * s * s + 16.0 * x(a) * x(b) * s * s * s;
      v.tail(m) = ddc * u + dc(a) * du.col(b) + dc(b) * du.col(a) + c * ddu[a * p + b];
    }
  }
  return J;
}

// ------------------------------------------------------------- spheres

/// Exponential map of the unit sphere at u applied to a tangent vector w.
inline Vec sphere_exp(const Vec& u, const Vec& w) {
  const double n = w.norm();
  if (n < 1e-300) return u;
  Vec r = std::cos(n) * u + (std::sin(n) / n) * w;
  return r / r.norm();
}

/// Inverse of sphere_exp for non-antipodal points.
inline Vec sphere_log(const Vec& u, const Vec& v) {
  Vec w = v - u.dot(v) * u;
  const double n = w.norm();
  if (n < 1e-300) return Vec::Zero(u.size());
  const double ang = std::atan2(n, u.dot(v));
  return w * (ang / n);
}

inline double sphere_distance(const Vec& u, const Vec& v) {
  return std::atan2((u - u.dot(v) * v).norm(), u.dot(v));
}

/// Orthonormal basis of the complement of a unit vector, seeded by coordinate axes.
inline Mat sphere_tangent_basis(const Vec& u) {
  const int n = static_cast<int>(u.size());
  Mat B(n, n - 1);
  int k = 0;
  for (int i = 0; i < n && k < n - 1; ++i) {
    Vec v = Vec::Zero(n);
    v(i) = 1.0;
    v -= u.dot(v) * u;
    for (int j = 0; j < k; ++j) v -= B.col(j).dot(v) * B.col(j);
    const double nv = v.norm();
    if (nv > 1e-6) B.col(k++) = v / nv;
  }
  return B;
}

}  // namespace pseudohyp
