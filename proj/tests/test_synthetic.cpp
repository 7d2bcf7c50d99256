#include <doctest.h>

#include "metafold/ensemble_analysis.hpp"
#include "metafold/error.hpp"
#include "metafold/geometry.hpp"
#include "metafold/pipeline.hpp"
#include "metafold/synthetic.hpp"

using namespace metafold;

TEST_CASE("archetype geometry") {
  Coords helix = archetype_trace(Archetype::Helix, 30);
  for (std::size_t i = 1; i < helix.size(); ++i) {
    CHECK(helix[i].z() - helix[i - 1].z() == doctest::Approx(1.5));
    CHECK(std::hypot(helix[i].x(), helix[i].y()) == doctest::Approx(2.3));
  }
  Coords strand = archetype_trace(Archetype::Strand, 30);
  for (std::size_t i = 1; i < strand.size(); ++i)
    CHECK((strand[i] - strand[i - 1]).norm() == doctest::Approx(3.8).epsilon(0.01));
  for (auto kind : {Archetype::Hairpin, Archetype::Meander}) {
    Coords c = archetype_trace(kind, 60);
    CHECK(c.size() == 60);
    for (std::size_t i = 1; i < c.size(); ++i) {
      CHECK((c[i] - c[i - 1]).norm() > 1.0);
      CHECK((c[i] - c[i - 1]).norm() < 5.0);
    }
  }
}

TEST_CASE("same seed gives bit-identical ensembles") {
  SynthesisSpec spec;
  spec.mode_sizes = {7, 5};
  spec.decoys = 2;
  spec.seed = 99;
  auto a = synthesize_ensemble(spec);
  auto b = synthesize_ensemble(spec);
  REQUIRE(a.ensemble.size() == b.ensemble.size());
  for (std::size_t i = 0; i < a.ensemble.size(); ++i)
    CHECK(a.ensemble[i] == b.ensemble[i]);
  CHECK(a.labels == b.labels);
  spec.seed = 100;
  auto c = synthesize_ensemble(spec);
  CHECK(!(c.ensemble[0] == a.ensemble[0]));
}

TEST_CASE("helix and strand modes separate at sigma 0.3") {
  SynthesisSpec spec;
  spec.mode_sizes = {10, 10};
  spec.noise_sigma = 0.3;
  spec.seed = 3;
  auto s = synthesize_ensemble(spec);
  double within = 1.0, across = 0.0;
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = i + 1; j < 20; ++j) {
      double t = tmscore(s.ensemble[i], s.ensemble[j]);
      if (s.labels[i] == s.labels[j])
        within = std::min(within, t);
      else
        across = std::max(across, t);
    }
  CHECK(across < within);
}

TEST_CASE("one mode at sigma 0.2 yields K=1") {
  SynthesisSpec spec;
  spec.mode_sizes = {40};
  spec.noise_sigma = 0.2;
  spec.seed = 8;
  auto s = synthesize_ensemble(spec);
  CHECK(analyze_protein(s.ensemble).clusters.K() == 1);
}

TEST_CASE("labels and pLDDT profiles") {
  SynthesisSpec spec;
  spec.mode_sizes = {4, 3, 2};
  spec.decoys = 5;
  spec.seed = 1;
  auto s = synthesize_ensemble(spec);
  CHECK(s.ensemble.size() == 14);
  CHECK(std::count(s.labels.begin(), s.labels.end(), -1) == 5);
  CHECK(std::count(s.labels.begin(), s.labels.end(), 2) == 2);
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    CHECK((s.labels[i] < 0) == (s.ensemble[i].mean_plddt() < 70.0));
}

TEST_CASE("generator preconditions") {
  SynthesisSpec spec;
  spec.length = 19;
  CHECK_THROWS_AS(synthesize_ensemble(spec), Error);
  spec.length = 40;
  spec.mode_sizes = {};
  CHECK_THROWS_AS(synthesize_ensemble(spec), Error);
  spec.mode_sizes = {1, 1, 1, 1, 1};
  CHECK_THROWS_AS(synthesize_ensemble(spec), Error);
}
