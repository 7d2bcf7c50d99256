#pragma once

#include <iosfwd>

#include "metafold/evaluation.hpp"
#include "metafold/forest.hpp"

namespace metafold {

inline constexpr int kModelFormatVersion = 1;

/// JSON document: format tag and version, hyperparameters, class weights,
/// tau, importance, and each tree as nested node objects.
void save_model(std::ostream& out, const ForestModel& model);
ForestModel load_model(std::istream& in);

/// {"n_trees": [...], "max_depth": [...], ...}; absent keys keep defaults.
HyperGrid load_grid(std::istream& in);

} // namespace metafold
