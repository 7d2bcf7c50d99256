#pragma once

#include <cstdint>
#include <vector>

#include "metafold/structure_io.hpp"

namespace metafold {

enum class Archetype { Helix, Strand, Hairpin, Meander };

/// Ideal C-alpha trace of `length` residues.
Coords archetype_trace(Archetype kind, std::size_t length);
Archetype archetype_for_mode(std::size_t mode);

struct PlddtProfile {
  double mean = 85.0;         // mean over members
  double member_sd = 3.0;     // spread of member means
  double residue_sd = 5.0;    // per-residue spread around the member mean
};

struct SynthesisSpec {
  std::vector<std::size_t> mode_sizes{50, 50};  // members per planted mode
  std::size_t length = 60;
  double noise_sigma = 0.3;     // per-coordinate Gaussian jitter, Angstrom
  PlddtProfile plddt;
  std::size_t decoys = 0;       // extra low-confidence members, label -1
  PlddtProfile decoy_plddt{40.0, 3.0, 5.0};
  bool random_pose = true;      // random rigid motion per member
  std::uint64_t seed = 0;
  std::string protein_id = "synthetic";
};

struct SyntheticEnsemble {
  Ensemble ensemble;
  std::vector<int> labels;  // planted mode per member, -1 for decoys
};

/// Stand-in for a sampled ensemble: each member is a mode archetype plus
/// isotropic Gaussian jitter. Deterministic for a given spec.
SyntheticEnsemble synthesize_ensemble(const SynthesisSpec& spec);

} // namespace metafold
