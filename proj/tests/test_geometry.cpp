#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "metafold/error.hpp"
#include "metafold/geometry.hpp"
#include "support/oracles.hpp"

using namespace metafold;

namespace {

Mat3 rot_z(double deg) {
  return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3::UnitZ()).toRotationMatrix();
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a metafold::Error");
  return ErrorKind::InvalidArgument;
}

Ensemble ensemble_of(std::vector<Coords> members) {
  std::vector<Structure> s;
  for (auto& m : members)
    s.push_back(oracle::make_structure("m", std::move(m)));
  return Ensemble("e", std::move(s));
}

} // namespace

TEST_CASE("rotation about z plus translation is recovered exactly") {
  Rng rng(1);
  Coords a = oracle::random_cloud(rng, 30, 8.0);
  const Mat3 r = rot_z(37.0);
  const Vec3 t(1, 2, 3);
  Coords b = oracle::transformed(a, r, t);
  Superposition s = kabsch_superpose(a, b);
  CHECK(s.rmsd < 1e-8);
  CHECK((s.rotation - r).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((s.translation - t).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("identical inputs give the identity") {
  Rng rng(2);
  Coords a = oracle::random_cloud(rng, 12, 5.0);
  Superposition s = kabsch_superpose(a, a);
  CHECK((s.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.translation.norm() < 1e-12);
  CHECK(s.rmsd < 1e-12);
}

TEST_CASE("tetrahedron with one displaced vertex matches a rotation grid search") {
  Rng rng(3);
  for (int trial = 0; trial < 4; ++trial) {
    Coords a{{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    Coords b = oracle::transformed(a, oracle::random_rotation(rng), Vec3(3, -2, 5));
    Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    b[rng.below(4)] += dir.normalized();
    CHECK(std::abs(rmsd(a, b) - oracle::grid_search_rmsd(a, b)) < 1e-3);
  }
}

TEST_CASE("five-point chains match hand arithmetic after oracle superposition") {
  Coords a{{0, 0, 0}, {3.8, 0, 0}, {7.6, 0.4, 0}, {11.4, 0, 0.3}, {15.2, 0.2, 0}};
  Coords b{{0.1, 0, 0}, {3.7, 0.2, 0}, {7.6, 0, 0.2}, {11.5, 0.1, 0}, {15.0, 0, 0.1}};
  const Mat3 r = oracle::horn_rotation(a, b);
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (int i = 0; i < 5; ++i) {
    ca += a[i] / 5;
    cb += b[i] / 5;
  }
  double ss = 0;
  for (int i = 0; i < 5; ++i)
    ss += (r * (a[i] - ca) + cb - b[i]).squaredNorm();
  CHECK(rmsd(a, b) == doctest::Approx(std::sqrt(ss / 5)).epsilon(1e-10));
}

TEST_CASE("superposition is a proper rotation and never a reflection") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Coords a = oracle::random_cloud(rng, 3 + rng.below(30), 6.0);
    Coords b = oracle::random_cloud(rng, a.size(), 6.0);
    if (trial % 3 == 0)  // mirror image: the best proper rotation is not the reflection
      for (auto& p : b = a)
        p.z() = -p.z();
    Superposition s = kabsch_superpose(a, b);
    CHECK((s.rotation.transpose() * s.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(s.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.rmsd == doctest::Approx(oracle::horn_rmsd(a, b)).epsilon(1e-9));
    CHECK(s.rmsd >= 0.0);
  }
}

TEST_CASE("rmsd is symmetric and invariant under rigid motion") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Coords a = oracle::random_chain(rng, 10 + rng.below(60));
    Coords b = oracle::jittered(rng, a, 1.5);
    const double ab = rmsd(a, b);
    CHECK(std::abs(ab - rmsd(b, a)) <= 1e-9);
    Coords moved = oracle::transformed(a, oracle::random_rotation(rng), Vec3(50, -20, 10));
    CHECK(std::abs(rmsd(moved, b) - ab) <= 1e-6);
  }
}

TEST_CASE("degenerate superposition inputs") {
  Coords two{{0, 0, 0}, {1, 0, 0}};
  Coords line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  CHECK(kind_of([&] { kabsch_superpose(two, two); }) == ErrorKind::SingularConfiguration);
  CHECK(kind_of([&] { kabsch_superpose(line, line); }) == ErrorKind::SingularConfiguration);
  Coords three{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK(kind_of([&] { rmsd(three, two); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("RMSF of identical copies is zero") {
  Rng rng(6);
  Coords a = oracle::random_chain(rng, 25);
  std::vector<Coords> copies;
  for (int i = 0; i < 6; ++i)
    copies.push_back(oracle::transformed(a, oracle::random_rotation(rng), Vec3(i, 2 * i, 0)));
  RmsfResult r = rmsf(ensemble_of(copies));
  for (double v : r.per_residue)
    CHECK(v < 1e-6);
  CHECK(r.mean < 1e-6);
}

TEST_CASE("one jittered residue: RMSF follows the sample moment") {
  Rng rng(7);
  Coords base = oracle::random_chain(rng, 40);
  const double sigma = 0.6;
  std::vector<Coords> frames;
  std::vector<double> shifts;
  for (int f = 0; f < 10; ++f) {
    Coords c = base;
    double s = (f % 2 == 0 ? 1.0 : -1.0) * sigma;  // +-sigma along x
    c[17].x() += s;
    shifts.push_back(s);
    frames.push_back(oracle::transformed(c, oracle::random_rotation(rng), Vec3(f, 0, -f)));
  }
  double mean = 0, ss = 0;
  for (double s : shifts)
    mean += s / 10;
  for (double s : shifts)
    ss += (s - mean) * (s - mean);
  const double expected = std::sqrt(ss / 10);
  RmsfResult r = rmsf(ensemble_of(frames));
  CHECK(r.per_residue[17] == doctest::Approx(expected).epsilon(0.02));
  CHECK(r.per_residue[3] < 0.05);
}

TEST_CASE("RMSF of a jittered trajectory is close to sigma sqrt(3)") {
  Rng rng(8);
  Coords base = oracle::random_chain(rng, 60);
  const double sigma = 0.3;
  std::vector<Coords> frames;
  for (int f = 0; f < 200; ++f)
    frames.push_back(oracle::jittered(rng, base, sigma));
  RmsfResult r = rmsf(ensemble_of(frames));
  // fitting absorbs 6 degrees of freedom out of 3L per frame
  const double expected = sigma * std::sqrt(3.0 * (1.0 - 2.0 / 60.0));
  CHECK(r.mean == doctest::Approx(expected).epsilon(0.05));
  CHECK(r.iterations >= 1);
}

TEST_CASE("RMSF needs two members") {
  Rng rng(9);
  CHECK(kind_of([&] { rmsf(ensemble_of({oracle::random_chain(rng, 10)})); }) ==
        ErrorKind::UndefinedFluctuation);
}

TEST_CASE("contact map statistics") {
  Rng rng(10);
  SUBCASE("identical copies have zero variance") {
    Coords a = oracle::random_chain(rng, 15);
    auto st = contact_map_stats(ensemble_of({a, oracle::transformed(a, oracle::random_rotation(rng),
                                                                     Vec3(4, 4, 4))}));
    CHECK(st.var_dist.cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("one displaced residue only touches its row and column") {
    Coords a = oracle::random_chain(rng, 15), b = a;
    b[6] += Vec3(1.0, -2.0, 0.5);
    auto st = contact_map_stats(ensemble_of({a, b}));
    for (int i = 0; i < 15; ++i)
      for (int j = 0; j < 15; ++j) {
        if (i == j)
          CHECK(st.var_dist(i, j) == 0.0);
        else if (i == 6 || j == 6)
          CHECK(st.var_dist(i, j) > 0.0);
        else
          CHECK(st.var_dist(i, j) == doctest::Approx(0.0).scale(1e-12));
      }
  }
  SUBCASE("matches direct recomputation") {
    std::vector<Coords> m{oracle::random_chain(rng, 9), oracle::random_chain(rng, 9),
                          oracle::random_chain(rng, 9)};
    auto st = contact_map_stats(ensemble_of(m));
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) {
        double d[3], mu = 0, var = 0;
        for (int k = 0; k < 3; ++k)
          mu += (d[k] = (m[k][i] - m[k][j]).norm()) / 3;
        for (double x : d)
          var += (x - mu) * (x - mu) / 3;
        CHECK(st.mean_dist(i, j) == doctest::Approx(mu).epsilon(1e-12));
        CHECK(st.var_dist(i, j) == doctest::Approx(var).scale(1e-9));
        CHECK(st.var_dist(i, j) == st.var_dist(j, i));
      }
  }
  SUBCASE("subset selects members") {
    Coords a = oracle::random_chain(rng, 10), b = oracle::random_chain(rng, 10);
    std::vector<std::size_t> pick{0, 2};
    auto st = contact_map_stats(ensemble_of({a, b, a}), pick);
    CHECK(st.var_dist.cwiseAbs().maxCoeff() < 1e-12);
    std::vector<std::size_t> one{1};
    CHECK(kind_of([&] { contact_map_stats(ensemble_of({a, b}), one); }) ==
          ErrorKind::InvalidArgument);
  }
}
