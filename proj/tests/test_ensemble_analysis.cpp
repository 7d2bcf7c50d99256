#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "metafold/ensemble_analysis.hpp"
#include "metafold/error.hpp"
#include "metafold/synthetic.hpp"
#include "support/oracles.hpp"

using namespace metafold;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a metafold::Error");
  return ErrorKind::InvalidArgument;
}

ContactMapStats planted_map(std::size_t len, const std::vector<std::pair<std::size_t, std::size_t>>& runs,
                            double height = 4.0) {
  ContactMapStats st;
  st.length = len;
  st.mean_dist = Eigen::MatrixXd::Constant(len, len, 10.0);
  st.var_dist = Eigen::MatrixXd::Zero(len, len);
  auto in_run = [&](std::size_t i) {
    for (auto [s, e] : runs)
      if (i + 1 >= s && i + 1 <= e)
        return true;
    return false;
  };
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < len; ++j)
      if (i != j && (in_run(i) || in_run(j)))
        st.var_dist(i, j) = height;
  for (std::size_t i = 0; i < len; ++i)
    st.mean_dist(i, i) = 0.0;
  return st;
}

void check_invariants(const Ensemble& e, const ClusterResult& r) {
  std::set<std::size_t> seen;
  for (std::size_t c = 0; c < r.K(); ++c) {
    if (c > 0)
      CHECK(r.clusters[c].size() <= r.clusters[c - 1].size());
    for (std::size_t k : r.clusters[c])
      CHECK(seen.insert(k).second);
    const std::size_t rep = r.representatives[c];
    CHECK(std::count(r.clusters[c].begin(), r.clusters[c].end(), rep) == 1);
    for (std::size_t k : r.clusters[c]) {
      CHECK(e[k].mean_plddt() <= e[rep].mean_plddt());
      if (e[k].mean_plddt() == e[rep].mean_plddt())
        CHECK(rep <= k);
    }
  }
  for (std::size_t k : r.outliers)
    CHECK(seen.insert(k).second);
  CHECK(seen == std::set<std::size_t>(r.kept.begin(), r.kept.end()));
}

Ensemble plddt_ensemble(std::vector<double> means) {
  Rng rng(1);
  Coords base = oracle::random_chain(rng, 12);
  std::vector<Structure> s;
  for (double m : means)
    s.push_back(oracle::make_structure("m", base, m));
  return Ensemble("p", std::move(s));
}

} // namespace

TEST_CASE("pLDDT filter") {
  Ensemble e = plddt_ensemble({85, 60, 75});
  CHECK(filter_by_plddt(e, 70) == std::vector<std::size_t>{0, 2});
  CHECK(filter_by_plddt(e, 0) == std::vector<std::size_t>{0, 1, 2});
  CHECK(filter_by_plddt(e, 75) == std::vector<std::size_t>{0, 2});
  CHECK(kind_of([&] { filter_by_plddt(e, 90); }) == ErrorKind::AllFiltered);
  CHECK(kind_of([&] { filter_by_plddt(e, 101); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("planted decoys are exactly the filtered members") {
  SynthesisSpec spec;
  spec.mode_sizes = {20, 10};
  spec.decoys = 8;
  spec.seed = 11;
  SyntheticEnsemble s = synthesize_ensemble(spec);
  std::vector<std::size_t> planted;
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    if (s.labels[i] >= 0)
      planted.push_back(i);
  CHECK(filter_by_plddt(s.ensemble, 70) == planted);
}

TEST_CASE("variable region detection") {
  SUBCASE("zero variance falls back to the full chain") {
    auto r = detect_variable_region(planted_map(50, {}));
    CHECK(r.start == 1);
    CHECK(r.end == 50);
    CHECK(r.score == 0.0);
  }
  SUBCASE("planted region 40-60 of 106") {
    auto r = detect_variable_region(planted_map(106, {{40, 60}}));
    CHECK(r.start == 40);
    CHECK(r.end == 60);
    CHECK(r.score > 0.0);
  }
  SUBCASE("the longer of two planted runs wins") {
    auto r = detect_variable_region(planted_map(120, {{20, 31}, {80, 86}}));
    CHECK(r.start == 20);
    CHECK(r.end == 31);
  }
  SUBCASE("global variability keeps the full chain") {
    ContactMapStats st = planted_map(60, {{25, 35}});
    st.var_dist.array() += 2.0;
    st.var_dist.diagonal().setZero();
    auto r = detect_variable_region(st);
    CHECK(r.start == 1);
    CHECK(r.end == 60);
  }
  SUBCASE("regions are always at least five residues") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
      const std::size_t len = 10 + rng.below(100);
      ContactMapStats st = planted_map(len, {});
      for (std::size_t i = 0; i < len; ++i)
        for (std::size_t j = i + 1; j < len; ++j)
          st.var_dist(i, j) = st.var_dist(j, i) = rng.uniform() * rng.uniform();
      auto r = detect_variable_region(st);
      CHECK(r.start >= 1);
      CHECK(r.end <= len);
      CHECK(r.length() >= 5);
    }
  }
  CHECK(kind_of([] { detect_variable_region(planted_map(9, {})); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("average linkage agrees with the naive recomputation") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.below(25);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        d(i, j) = d(j, i) = rng.uniform();
    const double cut = rng.uniform();
    CHECK(average_linkage(d, cut) == oracle::naive_average_linkage(d, cut));
  }
}

TEST_CASE("a higher TM-score cut never lowers the cluster count") {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.below(30);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        d(i, j) = d(j, i) = rng.uniform();
    std::size_t prev = 0;
    for (double tm_cut = 0.05; tm_cut < 1.0; tm_cut += 0.05) {
      std::size_t k = average_linkage(d, 1.0 - tm_cut).size();
      CHECK(k >= prev);
      prev = k;
    }
  }
}

TEST_CASE("minimum cluster size") {
  CHECK(min_cluster_size(10, 0.01) == 2);
  CHECK(min_cluster_size(402, 0.01) == 5);
  CHECK(min_cluster_size(500, 0.01) == 5);
  CHECK(min_cluster_size(100, 0.05) == 5);
  CHECK(min_cluster_size(100, 0.0) == 2);
}

TEST_CASE("identical members form one cluster") {
  Rng rng(9);
  Coords base = oracle::random_chain(rng, 30);
  std::vector<Structure> s;
  for (int i = 0; i < 7; ++i)
    s.push_back(oracle::make_structure("m", oracle::transformed(base, oracle::random_rotation(rng),
                                                                Vec3(i, 0, 0)),
                                       80 + i % 3));
  Ensemble e("same", s);
  std::vector<std::size_t> kept{0, 1, 2, 3, 4, 5, 6};
  auto r = cluster_ensemble(e, kept, VariableRegion{1, 30, 0.0});
  REQUIRE(r.K() == 1);
  CHECK(r.clusters[0] == kept);
  CHECK(r.outliers.empty());
  CHECK(r.representatives[0] == 2);
  check_invariants(e, r);
}

TEST_CASE("three planted modes of 50/30/20 are recovered") {
  SynthesisSpec spec;
  spec.mode_sizes = {50, 30, 20};
  spec.noise_sigma = 0.3;
  spec.seed = 2024;
  SyntheticEnsemble s = synthesize_ensemble(spec);
  std::vector<std::size_t> kept(100);
  for (std::size_t i = 0; i < 100; ++i)
    kept[i] = i;
  auto tm = pairwise_tmscore_matrix(s.ensemble, kept);
  double within = 1, across = 0;
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t j = i + 1; j < 100; ++j)
      (s.labels[i] == s.labels[j] ? within : across) =
          s.labels[i] == s.labels[j] ? std::min(within, tm(i, j)) : std::max(across, tm(i, j));
  CHECK(within > 0.9);
  CHECK(across < 0.5);

  auto r = cluster_ensemble(s.ensemble, kept, VariableRegion{1, spec.length, 0.0});
  REQUIRE(r.K() == 3);
  CHECK(r.clusters[0].size() == 50);
  CHECK(r.clusters[1].size() == 30);
  CHECK(r.clusters[2].size() == 20);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t k : r.clusters[c])
      CHECK(s.labels[k] == static_cast<int>(c));
  check_invariants(s.ensemble, r);
}

TEST_CASE("member order does not change the partition") {
  SynthesisSpec spec;
  spec.mode_sizes = {12, 8, 5};
  spec.length = 40;
  spec.seed = 77;
  SyntheticEnsemble s = synthesize_ensemble(spec);
  const std::size_t n = s.ensemble.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i)
    perm[i] = i;
  Rng rng(3);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.below(i + 1)]);
  std::vector<Structure> shuffled;
  for (std::size_t i : perm)
    shuffled.push_back(s.ensemble[i]);
  Ensemble e2("p", shuffled);
  std::vector<std::size_t> kept(n);
  for (std::size_t i = 0; i < n; ++i)
    kept[i] = i;
  auto a = cluster_ensemble(s.ensemble, kept, VariableRegion{1, 40, 0});
  auto b = cluster_ensemble(e2, kept, VariableRegion{1, 40, 0});
  std::set<std::set<std::size_t>> pa, pb;
  for (const auto& c : a.clusters)
    pa.insert(std::set<std::size_t>(c.begin(), c.end()));
  for (const auto& c : b.clusters) {
    std::set<std::size_t> mapped;
    for (std::size_t k : c)
      mapped.insert(perm[k]);
    pb.insert(mapped);
  }
  CHECK(pa == pb);
}

TEST_CASE("small groups become outliers and ties order by first member") {
  Rng rng(12);
  Coords base = oracle::random_chain(rng, 20);
  std::vector<Structure> s;
  for (int i = 0; i < 9; ++i)
    s.push_back(oracle::make_structure("m", base, 90 - i));
  Ensemble e("p", s);
  std::vector<std::size_t> kept{0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<std::vector<std::size_t>> groups{{0, 4}, {1, 2, 3}, {5}, {6, 7, 8}};
  auto r = assemble_clusters(e, kept, groups, VariableRegion{1, 20, 0}, 0.01);
  REQUIRE(r.K() == 3);
  CHECK(r.clusters[0] == std::vector<std::size_t>{1, 2, 3});
  CHECK(r.clusters[1] == std::vector<std::size_t>{6, 7, 8});
  CHECK(r.clusters[2] == std::vector<std::size_t>{0, 4});
  CHECK(r.outliers == std::vector<std::size_t>{5});
  CHECK(r.representatives == std::vector<std::size_t>{1, 6, 0});
  check_invariants(e, r);

  std::vector<std::vector<std::size_t>> singles{{0}, {1}, {2}};
  CHECK(kind_of([&] { assemble_clusters(e, kept, singles, VariableRegion{1, 20, 0}, 0.01); }) ==
        ErrorKind::NoClusters);
}

TEST_CASE("cluster table round trip") {
  SynthesisSpec spec;
  spec.mode_sizes = {10, 6};
  spec.length = 30;
  spec.decoys = 3;
  spec.seed = 5;
  SyntheticEnsemble s = synthesize_ensemble(spec);
  auto kept = filter_by_plddt(s.ensemble, 70);
  auto r = cluster_ensemble(s.ensemble, kept, VariableRegion{3, 28, 0.5});
  std::stringstream io;
  write_cluster_table(io, "syn", r);
  const std::string text = io.str();
  CHECK(text.rfind("# metafold-clusters 1\n", 0) == 0);
  auto back = read_cluster_table(io);
  CHECK(back.clusters == r.clusters);
  CHECK(back.representatives == r.representatives);
  CHECK(back.outliers == r.outliers);
  CHECK(back.kept == r.kept);
  CHECK(back.region.start == 3);
  CHECK(back.region.end == 28);

  std::istringstream bad("# something else\n");
  CHECK(kind_of([&] { read_cluster_table(bad); }) == ErrorKind::Parse);
}
