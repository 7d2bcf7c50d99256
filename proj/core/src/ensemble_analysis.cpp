#include "metafold/ensemble_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "metafold/error.hpp"

namespace metafold {

std::vector<std::size_t> filter_by_plddt(const Ensemble& ensemble, double min_mean_plddt) {
  if (!(min_mean_plddt >= 0.0 && min_mean_plddt <= 100.0))
    fail(ErrorKind::InvalidArgument, "pLDDT threshold must lie in [0, 100]");
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < ensemble.size(); ++k)
    if (ensemble[k].mean_plddt() >= min_mean_plddt)
      kept.push_back(k);
  if (kept.empty())
    fail(ErrorKind::AllFiltered, ensemble.protein_id() + ": no member has mean pLDDT >= " +
                                     std::to_string(min_mean_plddt));
  return kept;
}

std::vector<std::size_t> VariableRegion::indices() const {
  std::vector<std::size_t> out(length());
  std::iota(out.begin(), out.end(), start - 1);
  return out;
}

std::vector<double> residue_variability(const ContactMapStats& stats) {
  const std::size_t len = stats.length;
  std::vector<double> v(len, 0.0);
  if (len < 2)
    return v;
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < len; ++j)
      if (j != i)
        sum += stats.var_dist(i, j);
    v[i] = sum / static_cast<double>(len - 1);
  }
  return v;
}

VariableRegion detect_variable_region(const ContactMapStats& stats, const RegionOptions& opt) {
  const std::size_t len = stats.length;
  if (len < 10)
    fail(ErrorKind::InvalidArgument, "variable-region detection needs at least 10 residues");

  const std::vector<double> v = residue_variability(stats);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(len);
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(len));
  const double cutoff = mean + opt.z * sd;

  const std::size_t half = opt.smoothing_window / 2;
  std::vector<bool> candidate(len);
  for (std::size_t i = 0; i < len; ++i) {
    std::size_t lo = i >= half ? i - half : 0;
    std::size_t hi = std::min(len - 1, i + half);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j)
      s += v[j];
    candidate[i] = s / static_cast<double>(hi - lo + 1) > cutoff;
  }

  std::size_t best_start = 0, best_len = 0;
  for (std::size_t i = 0; i < len;) {
    if (!candidate[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < len && candidate[j])
      ++j;
    if (j - i > best_len) {
      best_len = j - i;
      best_start = i;
    }
    i = j;
  }

  VariableRegion full{1, len, mean};
  if (best_len < opt.min_length)
    return full;

  const std::size_t best_end = best_start + best_len;  // exclusive
  double score = 0.0;
  for (std::size_t i = best_start; i < best_end; ++i)
    score += v[i];
  score /= static_cast<double>(best_len);

  double rest = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < len; ++i) {
    if (i >= best_start && i < best_end)
      continue;
    for (std::size_t j = i + 1; j < len; ++j) {
      if (j >= best_start && j < best_end)
        continue;
      rest += stats.var_dist(i, j);
      ++pairs;
    }
  }
  if (pairs > 0 && rest / static_cast<double>(pairs) > opt.stability_ratio * score)
    return full;
  return VariableRegion{best_start + 1, best_end, score};
}

std::vector<std::vector<std::size_t>> average_linkage(const Eigen::MatrixXd& distance,
                                                      double max_merge_distance) {
  const std::size_t n = static_cast<std::size_t>(distance.rows());
  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < n; ++i)
    groups[i] = {i};
  if (n < 2)
    return groups;

  Eigen::MatrixXd d = distance;
  std::vector<bool> active(n, true);
  for (std::size_t step = 1; step < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i])
        continue;
      for (std::size_t j = i + 1; j < n; ++j)
        if (active[j] && d(i, j) < best) {
          best = d(i, j);
          bi = i;
          bj = j;
        }
    }
    if (best > max_merge_distance)
      break;
    const double ni = static_cast<double>(groups[bi].size());
    const double nj = static_cast<double>(groups[bj].size());
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj)
        continue;
      double merged = (ni * d(bi, k) + nj * d(bj, k)) / (ni + nj);
      d(bi, k) = merged;
      d(k, bi) = merged;
    }
    groups[bi].insert(groups[bi].end(), groups[bj].begin(), groups[bj].end());
    std::sort(groups[bi].begin(), groups[bi].end());
    groups[bj].clear();
    active[bj] = false;
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i)
    if (active[i])
      out.push_back(std::move(groups[i]));
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

std::size_t min_cluster_size(std::size_t kept_count, double min_cluster_frac) {
  double frac_size = std::ceil(min_cluster_frac * static_cast<double>(kept_count) - 1e-12);
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::max(0.0, frac_size)));
}

ClusterResult assemble_clusters(const Ensemble& ensemble, std::span<const std::size_t> kept,
                                const std::vector<std::vector<std::size_t>>& groups,
                                const VariableRegion& region, double min_cluster_frac) {
  ClusterResult out;
  out.kept.assign(kept.begin(), kept.end());
  out.region = region;
  const std::size_t min_size = min_cluster_size(kept.size(), min_cluster_frac);
  for (const auto& g : groups) {
    std::vector<std::size_t> members;
    for (std::size_t pos : g)
      members.push_back(kept[pos]);
    std::sort(members.begin(), members.end());
    if (members.size() < min_size)
      out.outliers.insert(out.outliers.end(), members.begin(), members.end());
    else
      out.clusters.push_back(std::move(members));
  }
  std::sort(out.outliers.begin(), out.outliers.end());
  std::stable_sort(out.clusters.begin(), out.clusters.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size())
      return x.size() > y.size();
    return x.front() < y.front();
  });
  if (out.clusters.empty())
    fail(ErrorKind::NoClusters, ensemble.protein_id() + ": every cluster is smaller than " +
                                    std::to_string(min_size) + " members");
  for (const auto& c : out.clusters) {
    std::size_t rep = c.front();
    for (std::size_t k : c)
      if (ensemble[k].mean_plddt() > ensemble[rep].mean_plddt())
        rep = k;
    out.representatives.push_back(rep);
  }
  return out;
}

ClusterResult cluster_ensemble(const Ensemble& ensemble, std::span<const std::size_t> kept,
                               const VariableRegion& region, const ClusterOptions& opt) {
  if (kept.empty())
    fail(ErrorKind::InvalidArgument, ensemble.protein_id() + ": nothing to cluster");
  if (!(opt.tm_threshold > 0.0 && opt.tm_threshold < 1.0))
    fail(ErrorKind::InvalidArgument, "TM-score cut must lie in (0, 1)");
  if (region.start < 1 || region.end > ensemble.residue_count() || region.start > region.end)
    fail(ErrorKind::InvalidArgument, ensemble.protein_id() + ": region outside the chain");
  const std::vector<std::size_t> idx = region.indices();
  Eigen::MatrixXd tm = pairwise_tmscore_matrix(ensemble, kept, idx, opt.threads);
  Eigen::MatrixXd dist = Eigen::MatrixXd::Ones(tm.rows(), tm.cols()) - tm;
  auto groups = average_linkage(dist, 1.0 - opt.tm_threshold);
  return assemble_clusters(ensemble, kept, groups, region, opt.min_cluster_frac);
}

void write_cluster_table(std::ostream& out, const std::string& protein_id,
                         const ClusterResult& r) {
  out << "# metafold-clusters 1\n";
  out << "# protein " << protein_id << '\n';
  out << "# region " << r.region.start << ' ' << r.region.end << '\n';
  out << "# K " << r.K() << '\n';
  out << "member\tcluster\trepresentative\toutlier\n";
  const std::size_t span_end =
      r.kept.empty() ? 0 : *std::max_element(r.kept.begin(), r.kept.end()) + 1;
  std::vector<std::size_t> cluster_of(span_end, 0);
  std::vector<bool> is_rep(cluster_of.size(), false);
  for (std::size_t c = 0; c < r.clusters.size(); ++c) {
    for (std::size_t k : r.clusters[c])
      cluster_of[k] = c + 1;
    is_rep[r.representatives[c]] = true;
  }
  for (std::size_t k : r.kept)
    out << k + 1 << '\t' << cluster_of[k] << '\t' << (is_rep[k] ? 1 : 0) << '\t'
        << (cluster_of[k] == 0 ? 1 : 0) << '\n';
}

ClusterResult read_cluster_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# metafold-clusters 1")
    fail(ErrorKind::Parse, "not a metafold cluster table (version 1)");
  ClusterResult r;
  std::size_t declared_k = 0;
  bool header_seen = false;
  std::vector<std::pair<std::size_t, std::size_t>> rows;  // member, cluster
  std::vector<std::size_t> reps;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::istringstream ss(line);
    if (line.front() == '#') {
      std::string hash, key;
      ss >> hash >> key;
      if (key == "region")
        ss >> r.region.start >> r.region.end;
      else if (key == "K")
        ss >> declared_k;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::size_t member = 0, cluster = 0;
    int rep = 0, outlier = 0;
    if (!(ss >> member >> cluster >> rep >> outlier) || member == 0)
      fail(ErrorKind::Parse, "cluster table line " + std::to_string(line_no) + ": malformed row");
    rows.emplace_back(member - 1, cluster);
    if (rep)
      reps.push_back(member - 1);
  }
  r.clusters.assign(declared_k, {});
  r.representatives.assign(declared_k, 0);
  for (auto [member, cluster] : rows) {
    r.kept.push_back(member);
    if (cluster == 0) {
      r.outliers.push_back(member);
      continue;
    }
    if (cluster > declared_k)
      fail(ErrorKind::Parse, "cluster table: cluster id exceeds declared K");
    r.clusters[cluster - 1].push_back(member);
  }
  for (std::size_t rep : reps)
    for (std::size_t c = 0; c < declared_k; ++c)
      if (std::find(r.clusters[c].begin(), r.clusters[c].end(), rep) != r.clusters[c].end())
        r.representatives[c] = rep;
  return r;
}

} // namespace metafold
