#include "metafold/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "geometry_internal.hpp"
#include "metafold/error.hpp"

namespace metafold {

namespace detail {

namespace {

Mat3 rotation_svd(const Mat3& h) {
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0)
    d(2, 2) = -1.0;
  return v * d * u.transpose();
}

// Horn's quaternion form: the optimal rotation is the top eigenvector of a
// traceless symmetric 4x4 matrix built from h. The top eigenvalue comes from
// Newton's method on the characteristic quartic, started above every root;
// the eigenvector is the largest column of adj(K - lambda I). Returns false
// when the top eigenvalue is (nearly) repeated.
bool rotation_quaternion(const Mat3& h, double inner, Mat3& r) {
  const double sxx = h(0, 0), sxy = h(0, 1), sxz = h(0, 2);
  const double syx = h(1, 0), syy = h(1, 1), syz = h(1, 2);
  const double szx = h(2, 0), szy = h(2, 1), szz = h(2, 2);
  Eigen::Matrix4d k;
  k << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
  const double f2 = h.squaredNorm();
  if (!(f2 > 0.0))
    return false;
  const double c2 = -2.0 * f2;
  const double c1 = -8.0 * h.determinant();
  // both bound the top eigenvalue from above; inner = (|A|^2 + |B|^2) / 2
  double lambda = std::min(std::sqrt(3.0 * f2), inner);
  const double c0 = k.determinant();
  for (int it = 0; it < 100; ++it) {
    const double l2 = lambda * lambda;
    const double p = (l2 + c2) * l2 + c1 * lambda + c0;
    const double dp = 4.0 * l2 * lambda + 2.0 * c2 * lambda + c1;
    if (!(dp > 0.0))
      break;
    const double step = p / dp;
    lambda -= step;
    if (std::abs(step) <= 1e-15 * std::abs(lambda))
      break;
  }
  // adjugate of K - lambda I from its 2x2 minors; every column is
  // proportional to the eigenvector
  Eigen::Matrix4d a = k - lambda * Eigen::Matrix4d::Identity();
  const double s0 = a(0, 0) * a(1, 1) - a(1, 0) * a(0, 1);
  const double s1 = a(0, 0) * a(1, 2) - a(1, 0) * a(0, 2);
  const double s2 = a(0, 0) * a(1, 3) - a(1, 0) * a(0, 3);
  const double s3 = a(0, 1) * a(1, 2) - a(1, 1) * a(0, 2);
  const double s4 = a(0, 1) * a(1, 3) - a(1, 1) * a(0, 3);
  const double s5 = a(0, 2) * a(1, 3) - a(1, 2) * a(0, 3);
  const double k5 = a(2, 2) * a(3, 3) - a(3, 2) * a(2, 3);
  const double k4 = a(2, 1) * a(3, 3) - a(3, 1) * a(2, 3);
  const double k3 = a(2, 1) * a(3, 2) - a(3, 1) * a(2, 2);
  const double k2 = a(2, 0) * a(3, 3) - a(3, 0) * a(2, 3);
  const double k1 = a(2, 0) * a(3, 2) - a(3, 0) * a(2, 2);
  const double k0 = a(2, 0) * a(3, 1) - a(3, 0) * a(2, 1);
  Eigen::Matrix4d adj;
  adj << a(1, 1) * k5 - a(1, 2) * k4 + a(1, 3) * k3,
         -a(0, 1) * k5 + a(0, 2) * k4 - a(0, 3) * k3,
         a(3, 1) * s5 - a(3, 2) * s4 + a(3, 3) * s3,
         -a(2, 1) * s5 + a(2, 2) * s4 - a(2, 3) * s3,
         -a(1, 0) * k5 + a(1, 2) * k2 - a(1, 3) * k1,
         a(0, 0) * k5 - a(0, 2) * k2 + a(0, 3) * k1,
         -a(3, 0) * s5 + a(3, 2) * s2 - a(3, 3) * s1,
         a(2, 0) * s5 - a(2, 2) * s2 + a(2, 3) * s1,
         a(1, 0) * k4 - a(1, 1) * k2 + a(1, 3) * k0,
         -a(0, 0) * k4 + a(0, 1) * k2 - a(0, 3) * k0,
         a(3, 0) * s4 - a(3, 1) * s2 + a(3, 3) * s0,
         -a(2, 0) * s4 + a(2, 1) * s2 - a(2, 3) * s0,
         -a(1, 0) * k3 + a(1, 1) * k1 - a(1, 2) * k0,
         a(0, 0) * k3 - a(0, 1) * k1 + a(0, 2) * k0,
         -a(3, 0) * s3 + a(3, 1) * s1 - a(3, 2) * s0,
         a(2, 0) * s3 - a(2, 1) * s1 + a(2, 2) * s0;
  Eigen::Index col = 0;
  const double best_norm = adj.colwise().squaredNorm().maxCoeff(&col);
  if (!(best_norm > 1e-12 * f2 * f2 * f2))
    return false;
  Eigen::Vector4d best = adj.col(col);
  best /= std::sqrt(best_norm);
  const double q0 = best(0), q1 = best(1), q2 = best(2), q3 = best(3);
  r << q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2),
       2 * (q1 * q2 + q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3, 2 * (q2 * q3 - q0 * q1),
       2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3;
  return true;
}

} // namespace

Superposition superpose_moments(const PairMoments& m) {
  const Vec3 ca = m.sum_a / m.n;
  const Vec3 cb = m.sum_b / m.n;
  const Mat3 h = m.sum_ab - m.n * ca * cb.transpose();
  const double inner = 0.5 * (m.sum_sq - m.n * (ca.squaredNorm() + cb.squaredNorm()));
  Superposition t;
  if (!rotation_quaternion(h, inner, t.rotation))
    t.rotation = rotation_svd(h);
  t.translation = cb - t.rotation * ca;
  return t;
}

Superposition superpose_unchecked(std::span<const Vec3> mobile, std::span<const Vec3> target) {
  // centre first; the moment form alone loses digits far from the origin
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (std::size_t i = 0; i < mobile.size(); ++i) {
    ca += mobile[i];
    cb += target[i];
  }
  ca /= static_cast<double>(mobile.size());
  cb /= static_cast<double>(mobile.size());
  PairMoments m;
  for (std::size_t i = 0; i < mobile.size(); ++i)
    m.add(mobile[i] - ca, target[i] - cb);
  Superposition t = superpose_moments(m);
  t.translation = cb - t.rotation * ca;
  return t;
}

} // namespace detail

namespace {

bool is_collinear(std::span<const Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pts)
    c += p;
  c /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : pts)
    cov.noalias() += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov, Eigen::EigenvaluesOnly);
  const Vec3& ev = eig.eigenvalues();  // ascending
  return ev(2) <= 1e-20 || ev(1) <= 1e-10 * ev(2);
}

double residual_rmsd(const Superposition& t, std::span<const Vec3> a, std::span<const Vec3> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += (t.apply(a[i]) - b[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(a.size()));
}

} // namespace

Superposition kabsch_superpose(std::span<const Vec3> mobile, std::span<const Vec3> target) {
  if (mobile.size() != target.size())
    fail(ErrorKind::InvalidArgument, "superposition needs equal-length point sets");
  if (mobile.size() < 3)
    fail(ErrorKind::SingularConfiguration, "superposition needs at least 3 points");
  if (is_collinear(mobile) || is_collinear(target))
    fail(ErrorKind::SingularConfiguration, "superposition of collinear points is not unique");
  Superposition t = detail::superpose_unchecked(mobile, target);
  t.rmsd = residual_rmsd(t, mobile, target);
  return t;
}

double rmsd(std::span<const Vec3> a, std::span<const Vec3> b) {
  return kabsch_superpose(a, b).rmsd;
}

double rmsd(const Structure& a, const Structure& b) {
  if (a.size() != b.size())
    fail(ErrorKind::InvalidArgument, "rmsd: " + a.id() + " and " + b.id() + " differ in length");
  return rmsd(a.ca(), b.ca());
}

double tm_d0(std::size_t length) {
  double d0 = 1.24 * std::cbrt(static_cast<double>(length) - 15.0) - 1.8;
  return std::max(d0, 0.5);
}

std::vector<double> tm_cutoff_ladder(double d0) {
  std::vector<double> ladder{8.0, 7.0, 6.0, 5.0, 4.5, 4.0, 3.5, 3.0, d0};
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
  return ladder;
}

std::vector<std::size_t> tm_seed_lengths(std::size_t length) {
  constexpr std::size_t min_len = 4;
  if (length <= min_len)
    return {length};
  std::vector<std::size_t> out;
  for (std::size_t len = length; len >= min_len; --len)
    out.push_back(len);
  return out;
}

double tm_score_of(const Superposition& t, std::span<const Vec3> a, std::span<const Vec3> b,
                   double d0) {
  const double inv_d02 = 1.0 / (d0 * d0);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += 1.0 / (1.0 + (t.apply(a[i]) - b[i]).squaredNorm() * inv_d02);
  return sum / static_cast<double>(a.size());
}

RmsfResult rmsf(const Ensemble& ensemble) {
  const std::size_t m = ensemble.size();
  if (m < 2)
    fail(ErrorKind::UndefinedFluctuation,
         ensemble.protein_id() + ": fluctuation needs at least 2 members");
  const std::size_t len = ensemble.residue_count();

  auto first = ensemble[0].ca();
  Coords reference(first.begin(), first.end());
  std::vector<Coords> aligned(m, Coords(len));
  Coords mean(len);
  RmsfResult out;
  for (int iter = 1; iter <= 50; ++iter) {
    std::fill(mean.begin(), mean.end(), Vec3::Zero());
    for (std::size_t k = 0; k < m; ++k) {
      auto ca = ensemble[k].ca();
      Superposition t = detail::superpose_unchecked(ca, reference);
      for (std::size_t i = 0; i < len; ++i) {
        aligned[k][i] = t.apply(ca[i]);
        mean[i] += aligned[k][i];
      }
    }
    double moved = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      mean[i] /= static_cast<double>(m);
      moved = std::max(moved, (mean[i] - reference[i]).norm());
    }
    reference = mean;
    out.iterations = iter;
    if (moved < 1e-6)
      break;
  }

  out.per_residue.assign(len, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      sum += (aligned[k][i] - mean[i]).squaredNorm();
    out.per_residue[i] = std::sqrt(sum / static_cast<double>(m));
    out.mean += out.per_residue[i];
  }
  out.mean /= static_cast<double>(len);
  out.mean_structure = std::move(mean);
  return out;
}

ContactMapStats contact_map_stats(const Ensemble& ensemble, std::span<const std::size_t> subset) {
  std::vector<std::size_t> members(subset.begin(), subset.end());
  if (members.empty())
    for (std::size_t k = 0; k < ensemble.size(); ++k)
      members.push_back(k);
  if (members.size() < 2)
    fail(ErrorKind::InvalidArgument,
         ensemble.protein_id() + ": contact-map variance needs at least 2 members");
  for (std::size_t k : members)
    if (k >= ensemble.size())
      fail(ErrorKind::InvalidArgument, "member index out of range");

  const std::size_t len = ensemble.residue_count();
  const double count = static_cast<double>(members.size());
  ContactMapStats out;
  out.length = len;
  out.mean_dist = Eigen::MatrixXd::Zero(len, len);
  out.var_dist = Eigen::MatrixXd::Zero(len, len);
  for (std::size_t k : members) {
    auto ca = ensemble[k].ca();
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = i + 1; j < len; ++j)
        out.mean_dist(i, j) += (ca[i] - ca[j]).norm();
  }
  out.mean_dist /= count;
  for (std::size_t k : members) {
    auto ca = ensemble[k].ca();
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = i + 1; j < len; ++j) {
        double dev = (ca[i] - ca[j]).norm() - out.mean_dist(i, j);
        out.var_dist(i, j) += dev * dev;
      }
  }
  out.var_dist /= count;
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = i + 1; j < len; ++j) {
      out.mean_dist(j, i) = out.mean_dist(i, j);
      out.var_dist(j, i) = out.var_dist(i, j);
    }
  return out;
}

} // namespace metafold
