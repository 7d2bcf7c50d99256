#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>

#include "geometry_internal.hpp"
#include "metafold/error.hpp"
#include "metafold/geometry.hpp"
#include "metafold/parallel.hpp"

namespace metafold {

namespace {

constexpr std::size_t kMinSelection = 4;

using Bits = std::vector<std::uint64_t>;

// Open-addressing set of (step, selection) states stored inline.
class StateSet {
public:
  explicit StateSet(std::size_t words) : stride_(words + 1) { rehash(64); }

  bool insert(std::size_t step, const Bits& sel) {
    if ((size_ + 1) * 2 > capacity_)
      rehash(capacity_ * 2);
    if (place(step, sel.data())) {
      ++size_;
      return true;
    }
    return false;
  }

private:
  std::uint64_t hash(std::uint64_t step, const std::uint64_t* sel) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ step;
    for (std::size_t w = 0; w + 1 < stride_; ++w) {
      h ^= sel[w] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdULL;
    }
    return h ^ (h >> 33);
  }

  // Slot layout: step + 1 (0 marks empty), then the selection words.
  bool place(std::uint64_t step, const std::uint64_t* sel) {
    std::size_t slot = hash(step, sel) & (capacity_ - 1);
    for (;;) {
      std::uint64_t* cell = table_.data() + slot * stride_;
      if (cell[0] == 0) {
        cell[0] = step + 1;
        std::copy(sel, sel + stride_ - 1, cell + 1);
        return true;
      }
      if (cell[0] == step + 1 && std::equal(sel, sel + stride_ - 1, cell + 1))
        return false;
      slot = (slot + 1) & (capacity_ - 1);
    }
  }

  void rehash(std::size_t capacity) {
    std::vector<std::uint64_t> old = std::move(table_);
    std::size_t old_capacity = capacity_;
    capacity_ = capacity;
    table_.assign(capacity_ * stride_, 0);
    for (std::size_t s = 0; s < old_capacity; ++s) {
      const std::uint64_t* cell = old.data() + s * stride_;
      if (cell[0] != 0)
        place(cell[0] - 1, cell + 1);
    }
  }

  std::size_t stride_;
  std::size_t capacity_ = 0;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> table_;
};

// Iterative TM-score maximisation. Each seed superposition starts a walk
// over (ladder step, residue selection) states; a state fully determines
// its continuation, so states already expanded by an earlier seed are cut.
class TmSearch {
public:
  TmSearch(std::span<const Vec3> a, std::span<const Vec3> b)
      : n_(a.size()), d0_(tm_d0(n_)), ladder_(tm_cutoff_ladder(d0_)),
        ax_(3 * n_), bx_(3 * n_), dist2_(n_), words_((n_ + 63) / 64), seen_(words_) {
    // work in centred frames
    for (std::size_t i = 0; i < n_; ++i) {
      ca_ += a[i];
      cb_ += b[i];
    }
    ca_ /= static_cast<double>(n_);
    cb_ /= static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (int c = 0; c < 3; ++c) {
        ax_[c * n_ + i] = a[i](c) - ca_(c);
        bx_[c * n_ + i] = b[i](c) - cb_(c);
      }
  }

  TmResult run() {
    std::vector<detail::PairMoments> prefix(n_ + 1);
    for (std::size_t i = 0; i < n_; ++i) {
      prefix[i + 1] = prefix[i];
      prefix[i + 1].add(point(ax_, i), point(bx_, i));
    }
    for (std::size_t len : tm_seed_lengths(n_)) {
      for (std::size_t start = 0; start + len <= n_; ++start) {
        detail::PairMoments m = prefix[start + len];
        m -= prefix[start];
        refine(detail::superpose_moments(m));
      }
    }
    // back to the caller's frame
    best_.transform.translation =
        cb_ + best_.transform.translation - best_.transform.rotation * ca_;
    return best_;
  }

private:
  Vec3 point(const std::vector<double>& x, std::size_t i) const {
    return {x[i], x[n_ + i], x[2 * n_ + i]};
  }

  void evaluate(const Superposition& t) {
    const double inv_d02 = 1.0 / (d0_ * d0_);
    const Mat3& r = t.rotation;
    const double r00 = r(0, 0), r01 = r(0, 1), r02 = r(0, 2);
    const double r10 = r(1, 0), r11 = r(1, 1), r12 = r(1, 2);
    const double r20 = r(2, 0), r21 = r(2, 1), r22 = r(2, 2);
    const double t0 = t.translation(0), t1 = t.translation(1), t2 = t.translation(2);
    const double* __restrict x = ax_.data();
    const double* __restrict y = x + n_;
    const double* __restrict z = y + n_;
    const double* __restrict u = bx_.data();
    const double* __restrict v = u + n_;
    const double* __restrict w = v + n_;
    double* __restrict d2 = dist2_.data();
    for (std::size_t i = 0; i < n_; ++i) {
      const double dx = r00 * x[i] + r01 * y[i] + r02 * z[i] + t0 - u[i];
      const double dy = r10 * x[i] + r11 * y[i] + r12 * z[i] + t1 - v[i];
      const double dz = r20 * x[i] + r21 * y[i] + r22 * z[i] + t2 - w[i];
      d2[i] = dx * dx + dy * dy + dz * dz;
    }
    // four running sums so the divisions can be issued in parallel
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n_; i += 4)
      for (std::size_t k = 0; k < 4; ++k)
        acc[k] += 1.0 / (1.0 + d2[i + k] * inv_d02);
    for (; i < n_; ++i)
      acc[i % 4] += 1.0 / (1.0 + d2[i] * inv_d02);
    const double sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    double score = sum / static_cast<double>(n_);
    if (score > best_.score) {
      best_.score = score;
      best_.transform = t;
    }
  }

  void select(double cutoff, Bits& out) const {
    const double c2 = cutoff * cutoff;
    const double* d2 = dist2_.data();
    std::size_t count = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      const std::size_t lo = w * 64, hi = std::min(n_, lo + 64);
      std::uint64_t word = 0;
      std::size_t i = lo;
#ifdef __SSE2__
      const __m128d limit = _mm_set1_pd(c2);
      for (; i + 2 <= hi; i += 2) {
        const int mask = _mm_movemask_pd(_mm_cmplt_pd(_mm_loadu_pd(d2 + i), limit));
        word |= static_cast<std::uint64_t>(mask) << (i - lo);
      }
#endif
      for (; i < hi; ++i)
        word |= std::uint64_t{d2[i] < c2} << (i - lo);
      out[w] = word;
      count += static_cast<std::size_t>(__builtin_popcountll(word));
    }
    if (count >= kMinSelection)
      return;
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + kMinSelection, order.end(),
                      [&](std::size_t x, std::size_t y) {
                        return dist2_[x] < dist2_[y] || (dist2_[x] == dist2_[y] && x < y);
                      });
    std::fill(out.begin(), out.end(), 0);
    for (std::size_t k = 0; k < kMinSelection; ++k)
      out[order[k] / 64] |= std::uint64_t{1} << (order[k] % 64);
  }

  Superposition fit(const Bits& sel) const {
    detail::PairMoments m;
    for (std::size_t w = 0; w < sel.size(); ++w) {
      std::uint64_t bits = sel[w];
      while (bits) {
        std::size_t i = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
        m.add(point(ax_, i), point(bx_, i));
        bits &= bits - 1;
      }
    }
    return detail::superpose_moments(m);
  }

  void refine(const Superposition& seed) {
    evaluate(seed);
    std::size_t step = 0;
    select(ladder_[step], sel_);
    for (;;) {
      if (!seen_.insert(step, sel_))
        return;
      evaluate(fit(sel_));
      for (;;) {
        select(ladder_[step], next_);
        if (next_ != sel_)
          break;
        if (++step == ladder_.size())
          return;
      }
      std::swap(sel_, next_);
    }
  }

  std::size_t n_;
  double d0_;
  std::vector<double> ladder_;
  std::vector<double> ax_, bx_;  // x block, y block, z block
  std::vector<double> dist2_;
  std::size_t words_;
  Bits sel_{Bits(words_)}, next_{Bits(words_)};
  Vec3 ca_ = Vec3::Zero(), cb_ = Vec3::Zero();
  StateSet seen_;
  TmResult best_;
};

Superposition inverse(const Superposition& t) {
  Superposition inv;
  inv.rotation = t.rotation.transpose();
  inv.translation = -(inv.rotation * t.translation);
  inv.rmsd = t.rmsd;
  return inv;
}

bool lexicographically_less(std::span<const Vec3> x, std::span<const Vec3> y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int c = 0; c < 3; ++c)
      if (x[i](c) != y[i](c))
        return x[i](c) < y[i](c);
  return false;
}

} // namespace

TmResult tmscore_search(std::span<const Vec3> a, std::span<const Vec3> b,
                        std::span<const std::size_t> region) {
  if (a.size() != b.size())
    fail(ErrorKind::InvalidArgument, "tmscore: chains differ in length");
  Coords ra, rb;
  if (!region.empty()) {
    std::vector<std::size_t> idx(region.begin(), region.end());
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
      fail(ErrorKind::InvalidArgument, "tmscore: region has repeated residues");
    if (idx.back() >= a.size())
      fail(ErrorKind::InvalidArgument, "tmscore: region index out of range");
    for (std::size_t i : idx) {
      ra.push_back(a[i]);
      rb.push_back(b[i]);
    }
    a = ra;
    b = rb;
  }
  if (a.size() < 5)
    fail(ErrorKind::InsufficientRegion,
         "tmscore needs at least 5 residues, got " + std::to_string(a.size()));

  if (std::equal(a.begin(), a.end(), b.begin()))
    return TmResult{1.0, Superposition{}};

  // search from a fixed orientation of the pair so that swapping the
  // arguments gives the identical score
  if (lexicographically_less(b, a)) {
    TmResult r = TmSearch(b, a).run();
    r.transform = inverse(r.transform);
    return r;
  }
  return TmSearch(a, b).run();
}

double tmscore(std::span<const Vec3> a, std::span<const Vec3> b,
               std::span<const std::size_t> region) {
  return tmscore_search(a, b, region).score;
}

double tmscore(const Structure& a, const Structure& b, std::span<const std::size_t> region) {
  if (a.size() != b.size())
    fail(ErrorKind::InvalidArgument,
         "tmscore: " + a.id() + " and " + b.id() + " differ in length");
  return tmscore(a.ca(), b.ca(), region);
}

namespace {

template <class Get>
Eigen::MatrixXd pairwise(std::size_t count, Get&& get, std::span<const std::size_t> region,
                         unsigned threads) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(count * (count - 1) / 2);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j)
      pairs.emplace_back(i, j);
  std::vector<double> scores(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    scores[p] = tmscore(get(pairs[p].first), get(pairs[p].second), region);
  });
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(count, count);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    m(pairs[p].first, pairs[p].second) = scores[p];
    m(pairs[p].second, pairs[p].first) = scores[p];
  }
  return m;
}

} // namespace

Eigen::MatrixXd pairwise_tmscore_matrix(std::span<const Structure> structs,
                                        std::span<const std::size_t> region, unsigned threads) {
  if (structs.empty())
    fail(ErrorKind::InvalidArgument, "pairwise tmscore needs at least one structure");
  return pairwise(structs.size(), [&](std::size_t i) -> const Structure& { return structs[i]; },
                  region, threads);
}

Eigen::MatrixXd pairwise_tmscore_matrix(const Ensemble& ensemble,
                                        std::span<const std::size_t> members,
                                        std::span<const std::size_t> region, unsigned threads) {
  if (members.empty())
    fail(ErrorKind::InvalidArgument, "pairwise tmscore needs at least one structure");
  return pairwise(members.size(),
                  [&](std::size_t i) -> const Structure& { return ensemble[members[i]]; },
                  region, threads);
}

} // namespace metafold
