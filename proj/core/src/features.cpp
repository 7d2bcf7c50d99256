#include "metafold/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "metafold/error.hpp"

namespace metafold {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos)
      break;
    line.remove_prefix(comma + 1);
  }
  for (auto& f : out) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' '))
      f.remove_suffix(1);
    while (!f.empty() && f.front() == ' ')
      f.remove_prefix(1);
  }
  return out;
}

double parse_real(std::string_view s, std::string_view what) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorKind::Parse, "malformed " + std::string(what) + " value '" + std::string(s) + "'");
  return x;
}

int parse_int(std::string_view s, std::string_view what) {
  int x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorKind::Parse, "malformed " + std::string(what) + " value '" + std::string(s) + "'");
  return x;
}

} // namespace

std::array<double, kFeatureCount> FeatureVector::values() const {
  constexpr double na = std::numeric_limits<double>::quiet_NaN();
  return {static_cast<double>(K), R1, R2, R3, min_tm, avg_tm,
          plddt[0].value_or(na), plddt[1].value_or(na), plddt[2].value_or(na)};
}

FeatureVector FeatureVector::from_values(std::string id,
                                         const std::array<double, kFeatureCount>& v) {
  FeatureVector f;
  f.protein_id = std::move(id);
  f.K = static_cast<int>(v[0]);
  f.R1 = v[1];
  f.R2 = v[2];
  f.R3 = v[3];
  f.min_tm = v[4];
  f.avg_tm = v[5];
  for (int s = 0; s < 3; ++s)
    if (!std::isnan(v[6 + s]))
      f.plddt[s] = v[6 + s];
  return f;
}

FeatureVector extract_features(const ClusterResult& result, const Ensemble& ensemble,
                               unsigned threads) {
  if (result.clusters.empty() || result.representatives.size() != result.clusters.size())
    fail(ErrorKind::InvalidArgument, ensemble.protein_id() + ": cluster result has no clusters");
  FeatureVector f;
  f.protein_id = ensemble.protein_id();
  f.K = static_cast<int>(result.K());

  double* ratios[3] = {&f.R1, &f.R2, &f.R3};
  for (std::size_t k = 0; k < 3; ++k)
    *ratios[k] = k + 1 < result.K() ? static_cast<double>(result.clusters[k + 1].size()) /
                                          static_cast<double>(result.clusters[k].size())
                                    : 0.0;

  if (result.K() > 1) {
    Eigen::MatrixXd tm =
        pairwise_tmscore_matrix(ensemble, result.representatives, {}, threads);
    double lo = 1.0, sum = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index i = 0; i < tm.rows(); ++i)
      for (Eigen::Index j = i + 1; j < tm.cols(); ++j) {
        lo = std::min(lo, tm(i, j));
        sum += tm(i, j);
        ++pairs;
      }
    f.min_tm = lo;
    f.avg_tm = sum / static_cast<double>(pairs);
  }

  std::vector<double> rep_plddt;
  for (std::size_t rep : result.representatives)
    rep_plddt.push_back(ensemble[rep].mean_plddt());
  std::sort(rep_plddt.begin(), rep_plddt.end(), std::greater<>());
  for (std::size_t s = 0; s < 3 && s < rep_plddt.size(); ++s)
    f.plddt[s] = rep_plddt[s];
  return f;
}

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string features_to_row(const FeatureVector& v) {
  std::string row = v.protein_id;
  row += ',' + std::to_string(v.K);
  for (double x : {v.R1, v.R2, v.R3, v.min_tm, v.avg_tm})
    row += ',' + format_real(x);
  for (const auto& p : v.plddt)
    row += ',' + (p ? format_real(*p) : std::string("NA"));
  return row;
}

FeatureVector row_to_features(std::string_view row) {
  auto f = split_csv(row);
  if (f.size() < 1 + kFeatureCount)
    fail(ErrorKind::Parse, "feature row has " + std::to_string(f.size()) + " fields, expected " +
                               std::to_string(1 + kFeatureCount));
  FeatureVector v;
  v.protein_id = std::string(f[0]);
  v.K = parse_int(f[1], "K");
  v.R1 = parse_real(f[2], "R1");
  v.R2 = parse_real(f[3], "R2");
  v.R3 = parse_real(f[4], "R3");
  v.min_tm = parse_real(f[5], "min_tm");
  v.avg_tm = parse_real(f[6], "avg_tm");
  for (int s = 0; s < 3; ++s)
    if (f[7 + s] != "NA")
      v.plddt[s] = parse_real(f[7 + s], "plddt");
  return v;
}

std::string feature_csv_header(bool with_label) {
  std::string h = "id";
  for (auto name : kFeatureNames)
    h += "," + std::string(name);
  if (with_label)
    h += ",label";
  return h;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& rows) {
  out << feature_csv_header(false) << '\n';
  for (const auto& r : rows)
    out << features_to_row(r) << '\n';
}

void write_labeled_csv(std::ostream& out, const std::vector<LabeledExample>& rows) {
  out << feature_csv_header(true) << '\n';
  for (const auto& r : rows)
    out << features_to_row(r.features) << ',' << r.label << '\n';
}

FeatureTable read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::Parse, "feature table is empty");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  bool with_label;
  if (line == feature_csv_header(false))
    with_label = false;
  else if (line == feature_csv_header(true))
    with_label = true;
  else
    fail(ErrorKind::Parse, "unexpected feature table header: " + line);

  FeatureTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r")
      continue;
    try {
      table.rows.push_back(row_to_features(line));
      if (with_label) {
        auto fields = split_csv(line);
        if (fields.size() != 1 + kFeatureCount + 1)
          fail(ErrorKind::Parse, "missing label column");
        int y = parse_int(fields.back(), "label");
        if (y != 0 && y != 1)
          fail(ErrorKind::Parse, "label must be 0 or 1");
        table.labels.push_back(y);
      } else {
        table.labels.push_back(std::nullopt);
      }
    } catch (const Error& e) {
      fail(ErrorKind::Parse, "feature table line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

std::map<std::string, int> read_label_csv(std::istream& in) {
  std::map<std::string, int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = split_csv(line);
    if (line.empty() || line == "\r")
      continue;
    if (line_no == 1 && f.size() == 2 && f[1] == "label")
      continue;
    if (f.size() != 2)
      fail(ErrorKind::Parse, "label table line " + std::to_string(line_no) + ": expected id,label");
    int y = parse_int(f[1], "label");
    if (y != 0 && y != 1)
      fail(ErrorKind::Parse, "label table line " + std::to_string(line_no) + ": label must be 0 or 1");
    labels[std::string(f[0])] = y;
  }
  return labels;
}

std::vector<LabeledExample> attach_labels(const FeatureTable& table,
                                          const std::map<std::string, int>* labels) {
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::optional<int> y = table.labels[i];
    if (labels) {
      auto it = labels->find(row.protein_id);
      if (it != labels->end())
        y = it->second;
    }
    if (!y)
      fail(ErrorKind::Parse, "no label for " + row.protein_id);
    out.push_back({row, *y});
  }
  return out;
}

} // namespace metafold
