#pragma once

#include <span>

#include "metafold/geometry.hpp"

namespace metafold::detail {

/// First and second moments of a paired point set; enough to recover the
/// optimal rotation without touching the points again.
struct PairMoments {
  Vec3 sum_a = Vec3::Zero();
  Vec3 sum_b = Vec3::Zero();
  Mat3 sum_ab = Mat3::Zero();  // sum of a_i b_i^T
  double sum_sq = 0.0;         // sum of |a_i|^2 + |b_i|^2
  double n = 0.0;

  void add(const Vec3& a, const Vec3& b) {
    sum_a += a;
    sum_b += b;
    sum_ab.noalias() += a * b.transpose();
    sum_sq += a.squaredNorm() + b.squaredNorm();
    n += 1.0;
  }
  PairMoments& operator-=(const PairMoments& o) {
    sum_a -= o.sum_a;
    sum_b -= o.sum_b;
    sum_ab -= o.sum_ab;
    sum_sq -= o.sum_sq;
    n -= o.n;
    return *this;
  }
};

/// Optimal rotation/translation of a onto b from moments. Never throws; for
/// rank-deficient inputs it returns one of the optimal transforms. rmsd is
/// left at zero.
Superposition superpose_moments(const PairMoments& m);

Superposition superpose_unchecked(std::span<const Vec3> mobile, std::span<const Vec3> target);

} // namespace metafold::detail
