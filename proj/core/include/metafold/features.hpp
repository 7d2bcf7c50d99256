#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metafold/ensemble_analysis.hpp"

namespace metafold {

inline constexpr std::size_t kFeatureCount = 9;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "K", "R1", "R2", "R3", "min_tm", "avg_tm", "plddt1", "plddt2", "plddt3"};

/// The nine ensemble descriptors. pLDDT slots are empty when the ensemble
/// has fewer representatives than the slot number.
struct FeatureVector {
  std::string protein_id;
  int K = 1;
  double R1 = 0.0, R2 = 0.0, R3 = 0.0;
  double min_tm = 1.0, avg_tm = 1.0;
  std::array<std::optional<double>, 3> plddt;

  /// Predictor order of kFeatureNames; missing values become NaN.
  std::array<double, kFeatureCount> values() const;
  static FeatureVector from_values(std::string id, const std::array<double, kFeatureCount>& v);

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct LabeledExample {
  FeatureVector features;
  int label = 0;  // 1 metamorphic, 0 single-fold
};

/// Cluster count, size decay ratios, representative TM-scores (full chain)
/// and the top representative pLDDTs.
FeatureVector extract_features(const ClusterResult& result, const Ensemble& ensemble,
                               unsigned threads = 1);

/// Shortest decimal that reads back to the same double.
std::string format_real(double x);

/// "id,K,R1,R2,R3,min_tm,avg_tm,plddt1,plddt2,plddt3" with NA for missing.
std::string features_to_row(const FeatureVector& v);
FeatureVector row_to_features(std::string_view row);

std::string feature_csv_header(bool with_label);
void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& rows);
void write_labeled_csv(std::ostream& out, const std::vector<LabeledExample>& rows);

struct FeatureTable {
  std::vector<FeatureVector> rows;
  std::vector<std::optional<int>> labels;  // filled when a label column exists
};
FeatureTable read_feature_csv(std::istream& in);

/// Two columns, id and label (0/1), with a header row.
std::map<std::string, int> read_label_csv(std::istream& in);

/// Joins features and labels by id; missing labels are an error.
std::vector<LabeledExample> attach_labels(const FeatureTable& table,
                                          const std::map<std::string, int>* labels);

} // namespace metafold
