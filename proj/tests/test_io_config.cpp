#include "pseudohyp/config.hpp"
#include "pseudohyp/verify.hpp"

#include <gtest/gtest.h>

using namespace pseudohyp;
namespace fs = std::filesystem;

namespace {

std::string error_of(const Json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "pseudohyp_io_test";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const ExperimentConfig c = parse_config(Json::parse(R"({"seed": 9, "p": 2, "q": 2,
    "solver": {"mesh_scale": 0.05, "warm_start": [0.1]}, "verify": {"pairs": 200}})"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.q, 2);
  EXPECT_DOUBLE_EQ(c.solve.mesh_scale, 0.05);
  ASSERT_EQ(c.solve.warm_start.size(), 1u);
  EXPECT_EQ(c.verify.pairs, 200);
  EXPECT_EQ(c.verify.ideal_targets, 64);
  EXPECT_DOUBLE_EQ(c.solve.radius, 0.8);
  EXPECT_EQ(c.boundary.kind, "rotation");
}

TEST(Config, ErrorsNameTheSchemaPath) {
  EXPECT_EQ(error_of(Json::parse(R"({"sed": 1})")), "sed: unknown key");
  EXPECT_EQ(error_of(Json::parse(R"({"solver": {"mesh": 0.1}})")), "solver.mesh: unknown key");
  EXPECT_EQ(error_of(Json::parse(R"({"representation": {"builtin": "cyclic", "bend": {"curve": "a", "x": 1}}})")),
            "representation.bend.x: unknown key");
  EXPECT_EQ(error_of(Json::parse(R"({"solver": {"mesh_scale": "fine"}})")), "solver.mesh_scale: wrong type");
  EXPECT_EQ(error_of(Json::parse(R"({"solver": {"mesh_scale": -1}})")), "solver.mesh_scale: must be positive");
  EXPECT_EQ(error_of(Json::parse(R"({"boundary": {"kind": "spiral"}})")),
            "boundary.kind: expected constant, rotation, geodesic or file");
  EXPECT_EQ(error_of(Json::parse(R"({"p": 4})")), "p: must be 2 or 3");
  EXPECT_EQ(error_of(Json::parse(R"({"representation": {}})")), "representation: give exactly one of file or builtin");
  EXPECT_EQ(error_of(Json::parse(R"({"entropy": 3})")), "entropy: expected an object");
  EXPECT_THROW(load_config(scratch("missing.json")), ConfigError);
}

TEST(Config, RelativePathsAndSignatureCheck) {
  const fs::path f = scratch("rel.json");
  write_atomic(f, R"({"p": 2, "q": 1, "representation": {"file": "rep.json", "embed_q": 2}})");
  const ExperimentConfig c = load_config(f);
  EXPECT_EQ(fs::path(c.representation.file), (f.parent_path() / "rep.json").lexically_normal());
  write_atomic(f.parent_path() / "rep.json", representation_json(schottky_representation(0)).dump());
  try {
    make_representation(c);
    FAIL() << "signature mismatch accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("differs from configured"), std::string::npos);
  }
}

TEST(Config, HashIsDeterministicAndKeyOrderFree) {
  const Json a = Json::parse(R"({"seed": 1, "p": 2, "solver": {"mesh_scale": 0.04, "radius": 0.8}})");
  const Json b = Json::parse(R"({"solver": {"radius": 0.8, "mesh_scale": 0.04}, "p": 2, "seed": 1})");
  const Json c = Json::parse(R"({"seed": 2, "p": 2, "solver": {"mesh_scale": 0.04, "radius": 0.8}})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
  // FNV-1a of the empty object "{}"
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : std::string("{}")) h = (h ^ ch) * 1099511628211ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  EXPECT_EQ(config_hash(Json::object()), buf);
}

TEST(Json, NumbersMatricesAndRepresentations) {
  EXPECT_DOUBLE_EQ(json_real(Json("1.25")), 1.25);
  EXPECT_THROW(json_real(Json("1.25x")), FormatError);
  EXPECT_THROW(json_real(Json(true)), FormatError);
  const Mat m = (Mat(2, 2) << 1, 2, 3, 4).finished();
  EXPECT_EQ(json_matrix(matrix_json(m), 2), m);
  EXPECT_EQ(json_matrix(Json::parse("[1,2,3,4]"), 2), m);
  EXPECT_THROW(json_matrix(Json::parse("[1,2,3]"), 2), FormatError);

  const Representation r = schottky_representation(1);
  const Representation s = representation_from_json(Json::parse(representation_json(r).dump()));
  ASSERT_EQ(s.rank(), r.rank());
  EXPECT_EQ(s.kind, r.kind);
  for (int k = 0; k < r.rank(); ++k) EXPECT_EQ(s.generators[k].m, r.generators[k].m);
  EXPECT_THROW(representation_from_json(Json::parse(R"({"p": 2})")), FormatError);
  EXPECT_THROW(representation_from_json(Json::parse(R"({"p": 2, "q": 0, "kind": "odd", "generators": []})")),
               FormatError);
}

TEST(Json, MeshAndBoundaryRoundTrip) {
  const FormContext ctx(2, 1);
  const SpacelikeGraph G = make_graph(ctx, disk_mesh(2, 0.8, 0.2), [](const Vec& x) {
    return tilted_geodesic_value(x, 1, 0.4);
  });
  const SpacelikeGraph H = graph_from_json(Json::parse(mesh_json(G).dump()));
  ASSERT_EQ(H.size(), G.size());
  EXPECT_EQ(H.simplices, G.simplices);
  EXPECT_EQ(H.boundary, G.boundary);
  for (int i = 0; i < G.size(); ++i) {
    EXPECT_EQ(H.x[i], G.x[i]);
    EXPECT_EQ(H.u[i], G.u[i]);
  }
  Json bad = mesh_json(G);
  bad["simplices"][0][1] = 100000;
  EXPECT_THROW(graph_from_json(bad), FormatError);

  const BoundaryData B = sample_boundary(2, 16, [](const Vec& d) { return tilted_geodesic_value(d, 1, 0.3); });
  const BoundaryData C = boundary_from_json(Json::parse(boundary_json(B).dump()));
  ASSERT_EQ(C.dirs.size(), B.dirs.size());
  for (std::size_t k = 0; k < B.dirs.size(); ++k) EXPECT_EQ(C.values[k], B.values[k]);
}

TEST(Output, AtomicWriteReplacesWholeFile) {
  const fs::path f = scratch("sub/out.txt");
  fs::remove_all(f.parent_path());
  write_atomic(f, "first version, long\n");
  write_atomic(f, "second\n");
  std::ifstream in(f);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(s, "second\n");
  fs::path tmp = f;
  tmp += ".tmp";
  EXPECT_FALSE(fs::exists(tmp));
  EXPECT_EQ(fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(fmt(M_PI)), M_PI);
}

TEST(Verify, CorruptValueIsReportedByVertex) {
  const FormContext ctx(2, 1);
  SpacelikeGraph G = constant_graph(ctx, disk_mesh(2, 0.8, 0.1), rotate_value(1, 0.0));
  G.u[17] *= 1.5;
  const VerifyReport R = verify_graph(G, VerifySpec{}, 1);
  EXPECT_FALSE(R.ok());
  EXPECT_EQ(R.at("unit_values").vertex, 17);
  EXPECT_EQ(R.checks.size(), 1u);
  EXPECT_THROW(R.at("spacelike"), Error);
}

TEST(Verify, TotallyGeodesicDiskPasses) {
  const FormContext ctx(2, 1);
  SpacelikeGraph G = constant_graph(ctx, disk_mesh(2, 0.8, 0.04), rotate_value(1, 0.0));
  const VerifyReport R = verify_graph(G, VerifySpec{}, 1);
  for (const auto& c : R.checks) EXPECT_TRUE(c.pass || !c.hard) << c.name << " " << c.value << " " << c.detail;
  EXPECT_NEAR(R.at("gradient_window").value, 1.0, 1e-6);
  EXPECT_EQ(verify_json(R).size(), R.checks.size());
}
