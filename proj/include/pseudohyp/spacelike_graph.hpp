#pragma once
/**
 * @file spacelike_graph.hpp
 * @brief Meshed graphs u : D^p -> S^q in Fermi coordinates, their fundamental
 *        forms, curvature, intrinsic distances and restricted score functions.
 */

#include "pseudohyp/parallel.hpp"
#include "pseudohyp/pq_core.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>

namespace pseudohyp {

struct DegenerateStar : Error { using Error::Error; };
struct DisconnectedMesh : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };

// ------------------------------------------------------------------ mesh

struct DiskMesh {
  int p = 2;
  std::vector<Vec> x;
  std::vector<std::vector<int>> simplices;
  std::vector<char> boundary;
  double h = 0.0;
};

namespace detail {

inline void mark_boundary(DiskMesh& m) {
  std::map<std::vector<int>, int> facets;
  for (const auto& s : m.simplices) {
    for (std::size_t skip = 0; skip < s.size(); ++skip) {
      std::vector<int> f;
      for (std::size_t k = 0; k < s.size(); ++k)
        if (k != skip) f.push_back(s[k]);
      std::sort(f.begin(), f.end());
      ++facets[f];
    }
  }
  m.boundary.assign(m.x.size(), 0);
  for (const auto& [f, n] : facets)
    if (n == 1)
      for (int v : f) m.boundary[v] = 1;
}

/// Drop vertices not used by any simplex and renumber.
inline void compact(DiskMesh& m) {
  std::vector<int> id(m.x.size(), -1);
  std::vector<Vec> xs;
  for (auto& s : m.simplices)
    for (int& v : s) {
      if (id[v] < 0) {
        id[v] = static_cast<int>(xs.size());
        xs.push_back(m.x[v]);
      }
      v = id[v];
    }
  m.x = std::move(xs);
}

/// Remove triangles with two or more free edges until none remain.
inline void trim_ears(DiskMesh& m) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::pair<int, int>, int> edges;
    for (const auto& s : m.simplices)
      for (int a = 0; a < 3; ++a) {
        const int u = s[a], v = s[(a + 1) % 3];
        ++edges[{std::min(u, v), std::max(u, v)}];
      }
    std::vector<std::vector<int>> keep;
    for (const auto& s : m.simplices) {
      int free_edges = 0;
      for (int a = 0; a < 3; ++a) {
        const int u = s[a], v = s[(a + 1) % 3];
        if (edges[{std::min(u, v), std::max(u, v)}] == 1) ++free_edges;
      }
      if (free_edges >= 2)
        changed = true;
      else
        keep.push_back(s);
    }
    m.simplices.swap(keep);
  }
}

/// Equilateral lattice through the origin, clipped to the disk; boundary vertices pushed onto the circle.
inline DiskMesh lattice_disk(double radius, double h) {
  DiskMesh m;
  m.p = 2;
  m.h = h;
  const int K = static_cast<int>(std::ceil(radius / h)) + 2;
  const double s3 = std::sqrt(3.0) / 2.0;
  auto index = [K](int i, int j) { return (j + K) * (2 * K + 1) + (i + K); };
  m.x.resize((2 * K + 1) * (2 * K + 1), Vec::Zero(2));
  std::vector<char> in(m.x.size(), 0);
  for (int j = -K; j <= K; ++j)
    for (int i = -K; i <= K; ++i) {
      Vec v(2);
      v << h * (i + 0.5 * j), h * s3 * j;
      m.x[index(i, j)] = v;
      in[index(i, j)] = v.norm() <= radius + 1e-12;
    }
  for (int j = -K; j < K; ++j)
    for (int i = -K; i < K; ++i) {
      const int a = index(i, j), b = index(i + 1, j), c = index(i, j + 1), d = index(i + 1, j + 1);
      if (in[a] && in[b] && in[c]) m.simplices.push_back({a, b, c});
      if (in[b] && in[d] && in[c]) m.simplices.push_back({b, d, c});
    }
  trim_ears(m);
  compact(m);
  mark_boundary(m);
  for (std::size_t i = 0; i < m.x.size(); ++i)
    if (m.boundary[i]) m.x[i] *= radius / m.x[i].norm();
  return m;
}

inline DiskMesh kuhn_ball(int p, double radius, double h) {
  DiskMesh m;
  m.p = p;
  const int K = std::max(1, static_cast<int>(std::ceil(radius / h - 1e-9)));
  m.h = radius / K;
  const int side = 2 * K + 1;
  auto coord = [&](const std::vector<int>& idx) {
    Vec v(p);
    for (int a = 0; a < p; ++a) v(a) = (idx[a] - K) * m.h;
    return v;
  };
  std::map<std::vector<int>, int> id;
  std::vector<int> idx(p, 0);
  auto inside = [&](const std::vector<int>& c) { return coord(c).norm() <= radius + 1e-12; };
  std::vector<int> perm(p);
  while (true) {
    bool all_in = true;
    for (int mask = 0; mask < (1 << p) && all_in; ++mask) {
      std::vector<int> c = idx;
      for (int a = 0; a < p; ++a)
        if (mask >> a & 1) c[a] += 1;
      for (int a = 0; a < p; ++a)
        if (c[a] >= side) all_in = false;
      if (all_in && !inside(c)) all_in = false;
    }
    if (all_in) {
      std::iota(perm.begin(), perm.end(), 0);
      do {
        std::vector<int> c = idx;
        std::vector<int> s;
        for (int k = 0; k <= p; ++k) {
          if (k > 0) c[perm[k - 1]] += 1;
          auto it = id.find(c);
          if (it == id.end()) {
            it = id.emplace(c, static_cast<int>(m.x.size())).first;
            m.x.push_back(coord(c));
          }
          s.push_back(it->second);
        }
        m.simplices.push_back(s);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    int a = 0;
    while (a < p && ++idx[a] >= side) idx[a++] = 0;
    if (a == p) break;
  }
  mark_boundary(m);
  return m;
}

}  // namespace detail

/// Triangulated disk of the given radius: equilateral lattice for p = 2, Kuhn cubes otherwise.
inline DiskMesh disk_mesh(int p, double radius, double h) {
  if (!(radius > 0.0 && radius < 1.0)) throw DomainError("disk_mesh: radius must lie in (0,1)");
  if (!(h > 0.0)) throw DomainError("disk_mesh: h must be positive");
  return p == 2 ? detail::lattice_disk(radius, h) : detail::kuhn_ball(p, radius, h);
}

// ----------------------------------------------------------------- graph

struct FundamentalForms {
  Vec P;                  ///< embedded point
  Mat dP;                 ///< tangent basis (dim x p), columns d/dx_a
  Mat g;                  ///< first fundamental form in disk coordinates
  Mat ginv;
  Mat frame;              ///< normal frame f_1..f_q (dim x q), <f_j,f_k> = -delta
  std::vector<Mat> II;    ///< II[j](a,b): component along f_j
  std::vector<Vec> ddP;   ///< flat second derivatives, index a*p+b

  int p() const { return static_cast<int>(g.rows()); }
  int q() const { return static_cast<int>(II.size()); }

  /// Ambient vector II(d_a, d_b).
  Vec second_form(int a, int b) const {
    Vec v = Vec::Zero(P.size());
    for (int j = 0; j < q(); ++j) v += II[j](a, b) * frame.col(j);
    return v;
  }
  /// <II(U,V), n> as a bilinear form in disk coordinates.
  Mat pair_with(const FormContext& ctx, const Vec& n) const {
    Mat S = Mat::Zero(p(), p());
    for (int j = 0; j < q(); ++j) S -= II[j] * form(ctx, frame.col(j), n);
    return S;
  }
  /// Shape operator B_n as an endomorphism in disk coordinates.
  Mat shape_operator(const FormContext& ctx, const Vec& n) const { return ginv * pair_with(ctx, n); }
  /// Components of the mean curvature vector along the normal frame.
  Vec mean_curvature() const {
    Vec H(q());
    for (int j = 0; j < q(); ++j) H(j) = (ginv * II[j]).trace() / p();
    return H;
  }
  /// Normal projection of an ambient vector.
  Vec normal_part(const FormContext& ctx, const Vec& w) const {
    Vec r = Vec::Zero(w.size());
    for (int j = 0; j < q(); ++j) r -= form(ctx, w, frame.col(j)) * frame.col(j);
    return r;
  }
  /// Coefficients c with tangential part of w equal to dP * c.
  Vec tangent_coeffs(const FormContext& ctx, const Vec& w) const {
    return ginv * (dP.transpose() * lower(ctx, w));
  }
};

struct SpacelikeGraph {
  FormContext ctx;
  std::vector<Vec> x;  ///< disk coordinates
  std::vector<Vec> u;  ///< unit values in S^q
  std::vector<std::vector<int>> simplices;
  std::vector<char> boundary;
  std::vector<std::vector<int>> nbrs;
  std::vector<Vec> P;
  std::vector<std::optional<FundamentalForms>> forms;
  std::vector<std::string> form_errors;
  int stencil_rings = 2;
  bool cache_built = false;

  int size() const { return static_cast<int>(x.size()); }

  void build_topology() {
    std::vector<std::set<int>> adj(x.size());
    for (const auto& s : simplices)
      for (int a : s)
        for (int b : s)
          if (a != b) adj[a].insert(b);
    nbrs.assign(x.size(), {});
    for (std::size_t i = 0; i < x.size(); ++i) nbrs[i].assign(adj[i].begin(), adj[i].end());
    if (boundary.size() != x.size()) {
      DiskMesh m;
      m.p = ctx.p;
      m.x = x;
      m.simplices = simplices;
      detail::mark_boundary(m);
      boundary = m.boundary;
    }
  }

  void embed_all() {
    P.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (P[i].size() != ctx.dim()) P[i].resize(ctx.dim());
      const double r2 = x[i].squaredNorm();
      P[i].head(ctx.p) = (2.0 / (1.0 - r2)) * x[i];
      P[i].tail(ctx.q + 1) = ((1.0 + r2) / (1.0 - r2)) * u[i];
    }
  }

  void invalidate() {
    cache_built = false;
    forms.clear();
    form_errors.clear();
  }

  void build_cache(int rings = 2);
};

inline SpacelikeGraph make_graph(const FormContext& ctx, const DiskMesh& mesh,
                                 const std::function<Vec(const Vec&)>& ufun) {
  if (mesh.p != ctx.p) throw DimensionMismatch("mesh dimension differs from p");
  SpacelikeGraph G;
  G.ctx = ctx;
  G.x = mesh.x;
  G.simplices = mesh.simplices;
  G.boundary = mesh.boundary;
  G.u.reserve(mesh.x.size());
  for (const auto& xi : mesh.x) {
    Vec v = ufun(xi);
    if (v.size() != ctx.q + 1) throw DimensionMismatch("graph value has wrong size");
    G.u.push_back(v / v.norm());
  }
  G.build_topology();
  G.embed_all();
  return G;
}

inline SpacelikeGraph constant_graph(const FormContext& ctx, const DiskMesh& mesh, const Vec& y0) {
  return make_graph(ctx, mesh, [&](const Vec&) { return y0; });
}

inline Vec embed_vertex(const SpacelikeGraph& G, int i) {
  if (i < 0 || i >= G.size()) throw IndexOutOfRange("vertex index out of range");
  return fermi_to_hyperboloid(G.ctx, G.x[i], G.u[i]);
}

/// Vertices within the given number of edge hops, excluding i itself.
inline std::vector<int> k_ring(const SpacelikeGraph& G, int i, int rings) {
  std::vector<int> out;
  std::vector<int> frontier{i};
  std::set<int> seen{i};
  for (int r = 0; r < rings; ++r) {
    std::vector<int> next;
    for (int v : frontier)
      for (int w : G.nbrs[v])
        if (seen.insert(w).second) {
          next.push_back(w);
          out.push_back(w);
        }
    frontier.swap(next);
  }
  return out;
}

/// Quadratic weighted least-squares fit of log_{u_i} u over the vertex stencil.
inline FundamentalForms compute_fundamental_forms(const SpacelikeGraph& G, int i, int rings = 2) {
  const FormContext& ctx = G.ctx;
  const int p = ctx.p, q = ctx.q, m = q + 1;
  const std::vector<int> st = k_ring(G, i, rings);
  const int nq = p * (p + 1) / 2;
  const int ncol = p + nq;
  if (static_cast<int>(st.size()) < ncol) throw DegenerateStar("stencil too small for a quadratic fit");
  double ell = 0.0;
  for (int w : G.nbrs[i]) ell += (G.x[w] - G.x[i]).norm();
  ell /= std::max<std::size_t>(1, G.nbrs[i].size());
  const Vec& ui = G.u[i];
  const Mat B = sphere_tangent_basis(ui);  // m x q
  Mat A(st.size(), ncol);
  Mat Y(st.size(), q);
  for (std::size_t r = 0; r < st.size(); ++r) {
    const Vec d = (G.x[st[r]] - G.x[i]) / ell;
    const double w = 1.0 / (1.0 + d.squaredNorm());
    int c = 0;
    for (int a = 0; a < p; ++a) A(r, c++) = w * d(a);
    for (int a = 0; a < p; ++a)
      for (int b = a; b < p; ++b) A(r, c++) = w * (a == b ? 0.5 * d(a) * d(a) : d(a) * d(b));
    Y.row(r) = w * (B.transpose() * sphere_log(ui, G.u[st[r]])).transpose();
  }
  Eigen::ColPivHouseholderQR<Mat> qr(A);
  qr.setThreshold(1e-9);
  if (qr.rank() < ncol) throw DegenerateStar("rank-deficient quadratic fit");
  const Mat C = qr.solve(Y);  // ncol x q, in units of ell
  Mat dw(q, p);
  std::vector<Mat> ddw(q, Mat::Zero(p, p));
  for (int a = 0; a < p; ++a) dw.col(a) = C.row(a).transpose() / ell;
  {
    int c = p;
    for (int a = 0; a < p; ++a)
      for (int b = a; b < p; ++b, ++c)
        for (int j = 0; j < q; ++j) {
          ddw[j](a, b) = C(c, j) / (ell * ell);
          ddw[j](b, a) = ddw[j](a, b);
        }
  }
  Mat du = B * dw;
  std::vector<Vec> ddu(p * p, Vec::Zero(m));
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      Vec v = Vec::Zero(m);
      for (int j = 0; j < q; ++j) v += ddw[j](a, b) * B.col(j);
      ddu[a * p + b] = v - dw.col(a).dot(dw.col(b)) * ui;
    }
  const ChartJet J = fermi_jet(ctx, G.x[i], ui, du, ddu);

  FundamentalForms F;
  F.P = J.P;
  F.dP = J.dP;
  F.ddP = J.ddP;
  F.g = J.dP.transpose() * ctx.J() * J.dP;
  F.g = 0.5 * (F.g + F.g.transpose());
  Eigen::LLT<Mat> llt(F.g);
  if (llt.info() != Eigen::Success) throw DegenerateStar("induced metric is not positive definite");
  F.ginv = llt.solve(Mat::Identity(p, p));

  F.frame = Mat::Zero(ctx.dim(), q);
  int found = 0;
  for (int s = ctx.p; s < ctx.dim() && found < q; ++s) {
    Vec w = ctx.e(s);
    w -= F.dP * F.tangent_coeffs(ctx, w);
    w += form(ctx, w, F.P) * F.P;
    for (int j = 0; j < found; ++j) w += form(ctx, w, F.frame.col(j)) * F.frame.col(j);
    const double n = form(ctx, w, w);
    if (n < -1e-8) F.frame.col(found++) = w / std::sqrt(-n);
  }
  if (found < q) throw DegenerateStar("normal frame construction failed");
  F.II.assign(q, Mat::Zero(p, p));
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int j = 0; j < q; ++j) F.II[j](a, b) = -form(ctx, J.ddP[a * p + b], F.frame.col(j));
  for (int j = 0; j < q; ++j) F.II[j] = 0.5 * (F.II[j] + F.II[j].transpose());
  return F;
}

inline void SpacelikeGraph::build_cache(int rings) {
  if (nbrs.size() != x.size()) build_topology();
  embed_all();
  stencil_rings = rings;
  forms.assign(x.size(), std::nullopt);
  form_errors.assign(x.size(), "");
  parallel_for(size(), [&](int i) {
    try {
      forms[i] = compute_fundamental_forms(*this, i, rings);
    } catch (const Error& e) {
      form_errors[i] = e.what();
    }
  });
  cache_built = true;
}

inline const FundamentalForms& fundamental_forms(const SpacelikeGraph& G, int i) {
  if (i < 0 || i >= G.size()) throw IndexOutOfRange("vertex index out of range");
  if (!G.cache_built) throw Error("fundamental_forms: call build_cache first");
  if (!G.forms[i]) throw DegenerateStar("vertex " + std::to_string(i) + ": " + G.form_errors[i]);
  return *G.forms[i];
}

// ------------------------------------------------------------- curvature

/// Ricci tensor of the induced metric in disk coordinates, from the traced Gauss equation.
inline Mat ricci_tensor(const FundamentalForms& F) {
  const int p = F.p();
  Mat R = -(p - 1.0) * F.g;
  for (int j = 0; j < F.q(); ++j) {
    R -= (F.ginv * F.II[j]).trace() * F.II[j];
    R += F.II[j] * F.ginv * F.II[j];
  }
  return R;
}

inline double ricci(const SpacelikeGraph& G, int i, const Vec& U, const Vec& V) {
  return U.dot(ricci_tensor(fundamental_forms(G, i)) * V);
}

/// Eigenvalues of a symmetric form S relative to the metric g.
inline Vec relative_eigenvalues(const Mat& S, const Mat& g) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), g);
  return es.eigenvalues();
}

inline double ricci_slack(const FundamentalForms& F) {
  const Mat S = ricci_tensor(F) + (F.p() - 1.0) * F.g;
  return relative_eigenvalues(S, F.g).minCoeff();
}

/// sup over g-unit U of the timelike norm of II(U,U), by dense direction sampling.
inline double second_form_norm(const FundamentalForms& F) {
  const int p = F.p();
  const Mat L = Eigen::LLT<Mat>(F.g).matrixL();
  const Mat Linv = L.inverse();
  std::vector<Mat> A;
  for (const auto& M : F.II) A.push_back(Linv * M * Linv.transpose());
  auto val = [&](const Vec& e) {
    double s = 0.0;
    for (const auto& M : A) {
      const double t = e.dot(M * e);
      s += t * t;
    }
    return std::sqrt(s);
  };
  double best = 0.0;
  if (p == 2) {
    const int n = 720;
    for (int k = 0; k < n; ++k) {
      const double t = M_PI * k / n;
      Vec e(2);
      e << std::cos(t), std::sin(t);
      best = std::max(best, val(e));
    }
  } else {
    const int n = 4000;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(p);
      const double z = 1.0 - (k + 0.5) / n;
      const double r = std::sqrt(1.0 - z * z);
      e(0) = r * std::cos(golden * k);
      e(1) = r * std::sin(golden * k);
      e(2) = z;
      best = std::max(best, val(e.normalized()));
    }
    for (int a = 0; a < p; ++a) best = std::max(best, val(Vec::Unit(p, a)));
  }
  return best;
}

struct CurvatureRow {
  int vertex;
  double II_norm;
  double ric_slack;
  double H_norm;
};

struct CurvatureReport {
  std::vector<CurvatureRow> rows;
  std::vector<int> flagged;  ///< boundary or degenerate vertices, excluded from rows

  double sup_II() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.II_norm);
    return m;
  }
  double min_ric_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::min(m, r.ric_slack);
    return m;
  }
  double sup_H() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.H_norm);
    return m;
  }
};

inline CurvatureReport curvature_report(const SpacelikeGraph& G) {
  CurvatureReport rep;
  std::vector<std::optional<CurvatureRow>> rows(G.size());
  parallel_for(G.size(), [&](int i) {
    if (G.boundary[i] || !G.forms[i]) return;
    const auto& F = *G.forms[i];
    rows[i] = CurvatureRow{i, second_form_norm(F), ricci_slack(F), F.mean_curvature().norm()};
  });
  for (int i = 0; i < G.size(); ++i) {
    if (rows[i])
      rep.rows.push_back(*rows[i]);
    else
      rep.flagged.push_back(i);
  }
  return rep;
}

// ------------------------------------------------------------- distances

/// Induced length of the straight disk segment between two vertices, u interpolated along S^q.
inline double edge_length(const SpacelikeGraph& G, int i, int j, int sub = 4) {
  const Vec w = sphere_log(G.u[i], G.u[j]);
  double L = 0.0;
  Vec prev = G.P.empty() ? embed_vertex(G, i) : G.P[i];
  for (int k = 1; k <= sub; ++k) {
    const double t = static_cast<double>(k) / sub;
    const Vec cur = k == sub ? (G.P.empty() ? embed_vertex(G, j) : G.P[j])
                             : fermi_to_hyperboloid(G.ctx, G.x[i] + t * (G.x[j] - G.x[i]), sphere_exp(G.u[i], t * w));
    const Vec d = cur - prev;
    L += std::sqrt(std::max(0.0, form(G.ctx, d, d)));
    prev = cur;
  }
  return L;
}

enum class DistanceMode { EdgeDijkstra, FaceMarching };

namespace detail {

/// Distance at c through the flat triangle (a,b,c) given distances at a and b.
inline double face_update(double da, double db, double lab, double lac, double lbc) {
  double best = std::min(da + lac, db + lbc);
  const double cx = (lac * lac + lab * lab - lbc * lbc) / (2.0 * lab);
  const double cy2 = lac * lac - cx * cx;
  if (cy2 <= 0.0) return best;
  const double cy = std::sqrt(cy2);
  const double sx = (da * da + lab * lab - db * db) / (2.0 * lab);
  const double sy2 = da * da - sx * sx;
  if (sy2 < 0.0) return best;
  const double sy = -std::sqrt(sy2);
  const double t = -sy / (cy - sy);
  const double ix = sx + t * (cx - sx);
  if (ix >= 0.0 && ix <= lab) best = std::min(best, std::hypot(cx - sx, cy - sy));
  return best;
}

}  // namespace detail

/// Edge lengths keyed by (min,max) vertex pair, computed once per graph.
struct EdgeLengths {
  std::vector<std::vector<std::pair<int, double>>> adj;

  explicit EdgeLengths(const SpacelikeGraph& G) : adj(G.size()) {
    parallel_for(G.size(), [&](int i) {
      for (int j : G.nbrs[i]) adj[i].push_back({j, edge_length(G, i, j)});
    });
  }
  double get(int i, int j) const {
    for (const auto& [k, L] : adj[i])
      if (k == j) return L;
    return std::numeric_limits<double>::infinity();
  }
};

/**
 * @brief Single-source intrinsic distances on the mesh.
 *
 * FaceMarching runs a Dijkstra-ordered march with triangle updates followed by
 * the optional Gauss-Seidel relaxation sweep; EdgeDijkstra uses edges only.
 */
inline std::vector<double> distances_from(const SpacelikeGraph& G, const EdgeLengths& E, int src,
                                          DistanceMode mode = DistanceMode::FaceMarching,
                                          bool relax = true) {
  const int n = G.size();
  if (src < 0 || src >= n) throw IndexOutOfRange("vertex index out of range");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n, inf);
  std::vector<char> done(n, 0);
  std::vector<std::vector<std::array<int, 2>>> opp;  // for each vertex, opposite edges of incident triangles
  if (mode == DistanceMode::FaceMarching) {
    opp.assign(n, {});
    for (const auto& s : G.simplices)
      for (std::size_t a = 0; a < s.size(); ++a)
        for (std::size_t b = 0; b < s.size(); ++b)
          for (std::size_t c = b + 1; c < s.size(); ++c)
            if (a != b && a != c) opp[s[a]].push_back({s[b], s[c]});
  }
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[src] = 0.0;
  pq.push({0.0, src});
  auto try_face = [&](int c) {
    for (const auto& [a, b] : opp[c]) {
      if (!done[a] || !done[b]) continue;
      const double v = detail::face_update(d[a], d[b], E.get(a, b), E.get(a, c), E.get(b, c));
      if (v < d[c]) {
        d[c] = v;
        pq.push({v, c});
      }
    }
  };
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (done[v] || dv > d[v]) continue;
    done[v] = 1;
    for (const auto& [w, L] : E.adj[v]) {
      if (done[w]) continue;
      if (dv + L < d[w]) {
        d[w] = dv + L;
        pq.push({d[w], w});
      }
      if (mode == DistanceMode::FaceMarching) try_face(w);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(d[i])) throw DisconnectedMesh("mesh is disconnected");
  if (mode == DistanceMode::FaceMarching && relax) {
    for (int c = 0; c < n; ++c) {
      if (c == src) continue;
      for (const auto& [a, b] : opp[c])
        d[c] = std::min(d[c], detail::face_update(d[a], d[b], E.get(a, b), E.get(a, c), E.get(b, c)));
    }
  }
  return d;
}

inline double intrinsic_distance(const SpacelikeGraph& G, int i, int j,
                                 DistanceMode mode = DistanceMode::FaceMarching) {
  const EdgeLengths E(G);
  if (j < 0 || j >= G.size()) throw IndexOutOfRange("vertex index out of range");
  return distances_from(G, E, i, mode)[j];
}

// ---------------------------------------------------- restricted scores

inline double restricted_gradient_norm(const SpacelikeGraph& G, int i, const ScoreTarget& t) {
  const auto& F = fundamental_forms(G, i);
  const Vec grad = score_ambient_gradient(G.ctx, t, F.P);
  const Vec c = F.tangent_coeffs(G.ctx, grad);
  return std::sqrt(std::max(0.0, c.dot(F.g * c)));
}

/// Same quantity from the unit ambient norm minus the normal contribution.
inline double restricted_gradient_norm_via_normal(const SpacelikeGraph& G, int i, const ScoreTarget& t) {
  const auto& F = fundamental_forms(G, i);
  const Vec grad = score_ambient_gradient(G.ctx, t, F.P);
  const Vec N = grad - F.dP * F.tangent_coeffs(G.ctx, grad);
  return std::sqrt(std::max(0.0, form(G.ctx, grad, grad) - form(G.ctx, N, N)));
}

struct HessianCheck {
  Mat hessian;
  double laplacian_residual;
};

/// Busemann Hessian g - db (x) db + db(II) in disk coordinates and the Laplacian residual.
inline HessianCheck busemann_hessian_check(const SpacelikeGraph& G, int i, const Vec& theta, const Vec& o) {
  const auto& F = fundamental_forms(G, i);
  const FormContext& ctx = G.ctx;
  const double xt = form(ctx, F.P, theta);
  if (!(xt < 0.0)) throw DomainError("busemann_hessian_check: <x,theta> must be negative");
  (void)o;
  const Vec db = F.dP.transpose() * lower(ctx, theta) / xt;
  HessianCheck r;
  r.hessian = F.g - db * db.transpose() + F.pair_with(ctx, theta) / xt;
  const double p = ctx.p;
  const double grad2 = db.dot(F.ginv * db);
  r.laplacian_residual = std::abs((F.ginv * r.hessian).trace() - (p - grad2));
  return r;
}

/// Upper bound (p-1)(<z,z> + <x,z>^2) minus -<z^N, z^N>.
inline double normal_projection_bound_check(const SpacelikeGraph& G, int i, const ScoreTarget& t) {
  const auto& F = fundamental_forms(G, i);
  const FormContext& ctx = G.ctx;
  const Vec zN = F.normal_part(ctx, t.z);
  const double xz = form(ctx, F.P, t.z);
  const double bound = (ctx.p - 1.0) * (sq(ctx, t.z) + xz * xz);
  return bound - (-form(ctx, zN, zN));
}

inline double normal_projection_value(const SpacelikeGraph& G, int i, const ScoreTarget& t) {
  const auto& F = fundamental_forms(G, i);
  const Vec zN = F.normal_part(G.ctx, t.z);
  return -form(G.ctx, zN, zN);
}

// ----------------------------------------------------------- diagnostics

/// Angle between the stereographic lifts of two disk points on the upper hemisphere.
inline double hemisphere_distance(const Vec& a, const Vec& b) {
  auto lift = [](const Vec& x) {
    const double r2 = x.squaredNorm();
    Vec v(x.size() + 1);
    v.head(x.size()) = 2.0 * x / (1.0 + r2);
    v(x.size()) = (1.0 - r2) / (1.0 + r2);
    return v;
  };
  return sphere_distance(lift(a), lift(b));
}

/// max over mesh edges of spherical distance of values over hemispherical distance of feet.
inline double lipschitz_ratio(const SpacelikeGraph& G) {
  double m = 0.0;
  for (int i = 0; i < G.size(); ++i)
    for (int j : G.nbrs[i])
      if (j > i) m = std::max(m, sphere_distance(G.u[i], G.u[j]) / hemisphere_distance(G.x[i], G.x[j]));
  return m;
}

/// Volume of each simplex from the chord Gram determinant.
inline std::vector<double> simplex_volumes(const SpacelikeGraph& G) {
  const int p = G.ctx.p;
  double fact = 1.0;
  for (int k = 2; k <= p; ++k) fact *= k;
  std::vector<double> vol(G.simplices.size());
  const Mat J = G.ctx.J();
  for (std::size_t s = 0; s < G.simplices.size(); ++s) {
    const auto& S = G.simplices[s];
    Mat E(G.ctx.dim(), p);
    for (int k = 0; k < p; ++k) E.col(k) = G.P[S[k + 1]] - G.P[S[0]];
    const double det = (E.transpose() * J * E).determinant();
    vol[s] = std::sqrt(std::max(0.0, det)) / fact;
  }
  return vol;
}

inline double graph_area(const SpacelikeGraph& G) {
  const auto v = simplex_volumes(G);
  return std::accumulate(v.begin(), v.end(), 0.0);
}

/// Lumped vertex masses: each simplex shares its volume equally among its vertices.
inline std::vector<double> vertex_masses(const SpacelikeGraph& G) {
  const auto v = simplex_volumes(G);
  std::vector<double> m(G.size(), 0.0);
  for (std::size_t s = 0; s < G.simplices.size(); ++s)
    for (int a : G.simplices[s]) m[a] += v[s] / G.simplices[s].size();
  return m;
}

}  // namespace pseudohyp
