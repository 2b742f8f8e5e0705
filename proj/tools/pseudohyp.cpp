// Experiment driver: solve, verify, entropy, tube, volume, spectrum, domain.

#include "pseudohyp/verify.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <list>

using namespace pseudohyp;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kNonConvergence = 3, kBudget = 4, kVerify = 5 };

struct Run {
  ExperimentConfig cfg;
  fs::path out;
  bool verbose = false;

  std::string header() const { return "# config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed) + "\n"; }
  Json stamp() const { return Json{{"config_hash", cfg.hash()}, {"seed", cfg.seed}, {"p", cfg.p}, {"q", cfg.q}}; }
  void write_json(const std::string& name, const Json& j) const { write_atomic(out / name, j.dump(2) + "\n"); }
  void write_csv(const std::string& name, const std::string& body) const { write_atomic(out / name, header() + body); }
  void log(const std::string& s) const {
    if (verbose) std::cerr << s << "\n";
  }
};

SolveResult solve_chain(const Run& run, const BoundaryData& B) {
  const auto& c = run.cfg;
  const SolveSetup S{FormContext(c.p, c.q), c.solve.radius};
  std::list<SolveResult> levels;
  std::function<Vec(const Vec&)> init;
  for (double h : c.solve.warm_start) {
    levels.push_back(solve_maximal(S, B, h, c.solve.solver, init));
    run.log("warm start h=" + fmt(h) + " iterations=" + std::to_string(levels.back().iterations));
    init = interpolate_from(levels.back().graph);
  }
  SolveResult R = solve_maximal(S, B, c.solve.mesh_scale, c.solve.solver, init);
  run.log("h=" + fmt(c.solve.mesh_scale) + " iterations=" + std::to_string(R.iterations) + " residual=" + fmt(R.residual));
  return R;
}

SpacelikeGraph load_mesh(const Run& run, const fs::path& path, Json* doc = nullptr) {
  Json j;
  try {
    j = read_json(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  if (!j.contains("p") || !j.contains("q")) throw ConfigError(path.string() + ": mesh has no signature");
  const int p = j["p"].get<int>(), q = j["q"].get<int>();
  if (p != run.cfg.p || q != run.cfg.q)
    throw ConfigError("mesh signature (" + std::to_string(p) + "," + std::to_string(q) + ") differs from configured (" +
                      std::to_string(run.cfg.p) + "," + std::to_string(run.cfg.q) + ")");
  SpacelikeGraph G;
  try {
    G = graph_from_json(j);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (doc) *doc = std::move(j);
  return G;
}

int cmd_solve(const Run& run) {
  const BoundaryData B = make_boundary_data(run.cfg);
  SolveResult R = solve_chain(run, B);
  R.graph.build_cache(run.cfg.solve.stencil_rings);
  Json j = run.stamp();
  j.update(mesh_json(R.graph));
  j["mesh_scale"] = run.cfg.solve.mesh_scale;
  j["radius"] = run.cfg.solve.radius;
  j["residual"] = R.residual;
  j["iterations"] = R.iterations;
  j["boundary_data"] = boundary_json(B);
  if (run.cfg.boundary.kind == "geodesic") j["ideal_trace"] = boundary_json(make_ideal_trace(run.cfg));
  run.write_json("mesh.json", j);
  run.write_csv("convergence.csv", convergence_csv(R.history));
  run.write_csv("curvature.csv", curvature_csv(curvature_report(R.graph)));
  std::cout << "solve: " << R.iterations << " iterations, residual " << fmt(R.residual) << "\n";
  return kOk;
}

int cmd_verify(const Run& run, const fs::path& mesh_path) {
  Json doc;
  SpacelikeGraph G = load_mesh(run, mesh_path, &doc);
  std::optional<BoundaryData> ideal;
  if (doc.contains("ideal_trace")) ideal = boundary_from_json(doc["ideal_trace"]);
  const VerifyReport R = verify_graph(G, run.cfg.verify, run.cfg.seed, run.cfg.solve.stencil_rings, ideal ? &*ideal : nullptr);
  Json j = run.stamp();
  j["mesh"] = mesh_path.filename().string();
  j["pass"] = R.ok();
  j["checks"] = verify_json(R);
  run.write_json("verify.json", j);
  for (const auto& c : R.checks)
    std::cout << (c.pass ? "pass " : (c.hard ? "FAIL " : "note ")) << c.name << " value=" << fmt(c.value)
              << (c.vertex >= 0 ? " vertex=" + std::to_string(c.vertex) : "") << (c.detail.empty() ? "" : " " + c.detail)
              << "\n";
  return R.ok() ? kOk : kVerify;
}

int cmd_entropy(const Run& run) {
  const Representation rep = make_representation(run.cfg);
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), enumeration_options(run.cfg));
  const EntropyEstimate E = entropy_estimate(T, uniform_grid(run.cfg.entropy.R_max, run.cfg.entropy.grid_points));
  Json j = run.stamp();
  j["label"] = rep.label;
  j["entries"] = T.entries.size();
  j["coverage"] = T.coverage();
  j["slope"] = E.slope;
  j["stderr"] = E.stderr_;
  j["intercept"] = E.intercept;
  j["window"] = {E.window_min, E.window_max};
  j["window_points"] = E.window_points;
  j["upper_bound"] = rep.ctx.p - 1;
  j["below_upper_bound"] = E.slope <= rep.ctx.p - 1 + 2.0 * E.stderr_;
  run.write_json("entropy.json", j);
  run.write_csv("counts.csv", counts_csv(E));
  std::cout << "entropy: slope " << fmt(E.slope) << " stderr " << fmt(E.stderr_) << " entries " << T.entries.size() << "\n";
  return kOk;
}

int cmd_tube(const Run& run, const std::optional<fs::path>& mesh_path) {
  const auto& c = run.cfg;
  SpacelikeGraph G;
  if (mesh_path)
    G = load_mesh(run, *mesh_path);
  else
    G = solve_chain(run, make_boundary_data(c)).graph;
  G.build_cache(c.solve.stencil_rings);
  const TubeRadii rad = tube_radii(G);
  const TubeVolume tv = tube_volume(G, rad.t0, c.tube.cfg);
  const double mu = mu_hat(c.p, c.q, rad.t0);
  const InjectivityProbe probe = tube_injectivity_probe(G, c.tube.trials, rad.r, c.seed);
  Json j = run.stamp();
  j["r"] = rad.r;
  j["t0"] = rad.t0;
  j["sup_II"] = rad.sup_II;
  j["area_M"] = tv.area_M;
  j["tube_volume"] = tv.volume;
  j["mu"] = mu;
  j["mu_check_slack"] = tv.volume - mu * tv.area_M;
  j["geodesic_closed_form"] = geodesic_tube_volume(tv.area_M, c.p, c.q, rad.t0);
  j["negative_determinant"] = tv.negative_determinant;
  j["injectivity_trials"] = probe.trials;
  j["injectivity_failures"] = probe.failures;
  if (c.p == 2 && c.q == 1) {
    const double R = c.tube.region_radius > 0.0 ? c.tube.region_radius : 2.0 * std::atanh(disk_radius(G));
    const McEstimate reg = region_volume_mc(G, R, c.tube.cfg.mc_samples, c.seed);
    j["region_volume"] = reg.value;
    j["region_volume_stderr"] = reg.stderr_;
    j["tube_below_region"] = tv.volume <= reg.value + 3.0 * reg.stderr_;
  }
  run.write_json("tube.json", j);

  // density profile over t in (0, t0]
  std::ostringstream prof;
  prof << "t,density_min,density_max\n";
  std::mt19937_64 rng(c.seed);
  for (int k = 1; k <= c.tube.profile_points; ++k) {
    const double t = rad.t0 * k / c.tube.profile_points;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < G.size(); ++i) {
      if (G.boundary[i] || !G.forms[i]) continue;
      const Vec n = random_normal(*G.forms[i], rng);
      const double d = tube_density(G, i, n, t).value;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    prof << fmt(t) << ',' << fmt(lo) << ',' << fmt(hi) << '\n';
  }
  run.write_csv("tube_profile.csv", prof.str());
  std::cout << "tube: volume " << fmt(tv.volume) << " area " << fmt(tv.area_M) << " injectivity failures "
            << probe.failures << "\n";
  return kOk;
}

int cmd_volume(const Run& run) {
  const auto& c = run.cfg;
  if (c.p != 2 || c.q != 1) throw ConfigError("volume: only (p,q) = (2,1) is supported");
  const Representation rep = make_representation(c);
  EnumerateOptions opt = enumeration_options(c);
  opt.prune_radius = std::max(c.volume.table_radius, c.volume.limit_min_dist) + 1.5;
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), opt);
  OrbitTable M = T;
  std::erase_if(M.entries, [&](const OrbitEntry& e) { return e.dist > c.volume.table_radius; });
  const auto lp = approximate_limit_points(T, c.volume.limit_min_dist);
  const McEstimate V = pseudo_volume_mc(M, lp, c.volume.box_radius, c.volume.mc_samples, c.seed);
  Json j = run.stamp();
  j["label"] = rep.label;
  j["membership_entries"] = M.entries.size();
  j["limit_points"] = lp.size();
  j["pseudo_volume"] = V.value;
  j["pseudo_volume_stderr"] = V.stderr_;
  j["samples"] = V.samples;
  j["accepted"] = V.accepted;
  if (rep.kind == RepKind::SurfaceGroup && rep.genus >= 2) {
    const double area = 2.0 * M_PI * (2 * rep.genus - 2);
    const double t0 = tube_radii(0.0, c.p).t0;
    j["fuchsian_area"] = area;
    j["mu_area_fuchsian"] = mu_hat(c.p, c.q, t0) * area;
    if (c.raw.contains("entropy")) {
      const OrbitTable Te = enumerate_orbit(rep, rep.ctx.origin(), enumeration_options(c));
      const EntropyEstimate E = entropy_estimate(Te, uniform_grid(c.entropy.R_max, c.entropy.grid_points));
      j["entropy"] = E.slope;
      j["entropy_volume_product"] = entropy_volume_product(E.slope, V.value, rep.genus);
    }
  }
  run.write_json("volume.json", j);
  std::cout << "volume: " << fmt(V.value) << " +- " << fmt(V.stderr_) << "\n";
  return kOk;
}

int cmd_spectrum(const Run& run) {
  const Representation rep = make_representation(run.cfg);
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), enumeration_options(run.cfg));
  const auto S = primitive_spectrum(T);
  std::ostringstream os;
  os << "word,length,lambda_max\n";
  for (const auto& e : S) os << e.word << ',' << fmt(e.tl.length) << ',' << fmt(e.tl.lambda_max) << '\n';
  run.write_csv("spectrum.csv", os.str());
  const Systole sys = systole(T);
  Json j = run.stamp();
  j["label"] = rep.label;
  j["entries"] = S.size();
  j["systole_word"] = sys.word;
  j["systole"] = sys.length;
  run.write_json("spectrum.json", j);
  std::cout << "spectrum: " << S.size() << " primitive classes, systole " << fmt(sys.length) << " (" << sys.word << ")\n";
  return kOk;
}

int cmd_domain(const Run& run) {
  const auto& c = run.cfg;
  const Representation rep = make_representation(c);
  EnumerateOptions opt = enumeration_options(c);
  opt.prune_radius = c.domain.candidate_radius + c.domain.radius + 1.0;
  const OrbitTable T = enumerate_orbit(rep, rep.ctx.origin(), opt);
  const DomainMembership at_o = fundamental_domain_membership(T, rep.ctx.origin());
  std::mt19937_64 rng(c.seed);
  const auto pts = sample_hull_points(rep.ctx, rng, c.domain.samples, c.domain.radius, c.domain.tilt);
  int unique = 0, ties = 0, bad = 0;
  for (const auto& x : pts) {
    const TilingCount tc = tiling_count(T, x, c.domain.candidate_radius);
    if (tc.tie)
      ++ties;
    else if (tc.members == 1)
      ++unique;
    else
      ++bad;
  }
  const std::vector<Vec> dpts(pts.begin(), pts.begin() + std::min<int>(c.domain.diameter_samples, pts.size()));
  OrbitTable near = T;
  std::erase_if(near.entries, [&](const OrbitEntry& e) { return e.dist > c.domain.candidate_radius; });
  const DiameterEstimate D = diameter_estimate(near, dpts);
  Json j = run.stamp();
  j["label"] = rep.label;
  j["entries"] = T.entries.size();
  j["o_member"] = at_o.member;
  j["o_minimizer"] = at_o.word;
  j["samples"] = pts.size();
  j["unique_translate"] = unique;
  j["ties"] = ties;
  j["violations"] = bad;
  j["tiling_holds"] = bad == 0;
  j["diameter"] = D.value;
  j["diameter_pairs"] = D.pairs;
  run.write_json("domain.json", j);
  std::cout << "domain: " << unique << " unique, " << ties << " ties, " << bad << " violations; o member "
            << (at_o.member ? "yes" : "no") << "\n";
  return bad == 0 && at_o.member ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on spacelike graphs and group actions in pseudo-hyperbolic space"};
  app.require_subcommand(1);
  std::string config_path, out_dir, mesh_path;
  bool verbose = false;
  auto add = [&](const std::string& name, const std::string& help, bool mesh) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    sc->add_option("-o,--out", out_dir, "output directory (overrides the config)");
    sc->add_flag("-v,--verbose", verbose, "progress on stderr");
    if (mesh) sc->add_option("-m,--mesh", mesh_path, "mesh file written by solve");
    return sc;
  };
  auto* solve = add("solve", "solve the maximal graph problem", false);
  auto* verify = add("verify", "check invariants of a solved mesh", true);
  auto* entropy = add("entropy", "orbit counts and entropy fit", false);
  auto* tube = add("tube", "tube radii, volume and injectivity probe", true);
  auto* volume = add("volume", "Monte-Carlo pseudo-volume of the quotient", false);
  auto* spectrum = add("spectrum", "primitive length spectrum and systole", false);
  auto* domain = add("domain", "fundamental domain tiling and diameter", false);
  verify->get_option("--mesh")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    Run run;
    run.cfg = load_config(config_path);
    run.out = out_dir.empty() ? fs::path(run.cfg.output) : fs::path(out_dir);
    run.verbose = verbose;
    if (*solve) return cmd_solve(run);
    if (*verify) return cmd_verify(run, mesh_path);
    if (*entropy) return cmd_entropy(run);
    if (*tube) return cmd_tube(run, mesh_path.empty() ? std::nullopt : std::optional<fs::path>(mesh_path));
    if (*volume) return cmd_volume(run);
    if (*spectrum) return cmd_spectrum(run);
    if (*domain) return cmd_domain(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const FormatError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const InvalidBoundary& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const SpacelikeViolation& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
