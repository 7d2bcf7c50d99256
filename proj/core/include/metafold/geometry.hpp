#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "metafold/structure_io.hpp"

namespace metafold {

using Mat3 = Eigen::Matrix3d;

/// Rigid transform mapping the mobile set onto the target: x -> rotation*x + translation.
struct Superposition {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double rmsd = 0.0;

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
};

/// Least-squares superposition of `mobile` onto `target` (Kabsch, with the
/// determinant correction that excludes reflections). Throws
/// SingularConfiguration for fewer than 3 points or a collinear input.
Superposition kabsch_superpose(std::span<const Vec3> mobile, std::span<const Vec3> target);

double rmsd(std::span<const Vec3> a, std::span<const Vec3> b);
double rmsd(const Structure& a, const Structure& b);

/// TM-score distance scale: 1.24 (L - 15)^(1/3) - 1.8, floored at 0.5.
double tm_d0(std::size_t length);

/// Refinement cutoffs (Angstrom), descending, ending at or passing d0.
std::vector<double> tm_cutoff_ladder(double d0);

/// Seed fragment lengths: every length from L down to 4. Seeding from
/// every fragment makes the search agree with an exhaustive-seed search.
std::vector<std::size_t> tm_seed_lengths(std::size_t length);

struct TmResult {
  double score = 0.0;
  Superposition transform;  // best transform of the first argument onto the second
};

/// TM-score of two equal-length, positionally corresponding chains. With a
/// non-empty `region` (0-based residue indices, >= 5 of them) both the
/// superposition search and the normalisation are restricted to it.
TmResult tmscore_search(std::span<const Vec3> a, std::span<const Vec3> b,
                        std::span<const std::size_t> region = {});
double tmscore(std::span<const Vec3> a, std::span<const Vec3> b,
               std::span<const std::size_t> region = {});
double tmscore(const Structure& a, const Structure& b,
               std::span<const std::size_t> region = {});

/// Score of one fixed transform, (1/n) sum 1 / (1 + (d_i/d0)^2).
double tm_score_of(const Superposition& t, std::span<const Vec3> a, std::span<const Vec3> b,
                   double d0);

/// Symmetric matrix of tmscore over all pairs; diagonal is exactly 1.
Eigen::MatrixXd pairwise_tmscore_matrix(std::span<const Structure> structs,
                                        std::span<const std::size_t> region = {},
                                        unsigned threads = 1);
Eigen::MatrixXd pairwise_tmscore_matrix(const Ensemble& ensemble,
                                        std::span<const std::size_t> members,
                                        std::span<const std::size_t> region = {},
                                        unsigned threads = 1);

struct RmsfResult {
  std::vector<double> per_residue;
  double mean = 0.0;        // average over residues
  Coords mean_structure;
  int iterations = 0;
};

/// Per-residue fluctuation about the mean structure. Members are superposed
/// onto their running mean until the mean moves less than 1e-6 A (at most 50
/// rounds). Needs at least two members.
RmsfResult rmsf(const Ensemble& ensemble);

struct ContactMapStats {
  std::size_t length = 0;
  Eigen::MatrixXd mean_dist;
  Eigen::MatrixXd var_dist;  // population variance, A^2
};

/// C-alpha distance mean and variance over the selected members (all when
/// `subset` is empty). Distances are rotation invariant, so no superposition.
ContactMapStats contact_map_stats(const Ensemble& ensemble,
                                  std::span<const std::size_t> subset = {});

} // namespace metafold
