#include "metafold/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "metafold/error.hpp"
#include "metafold/geometry.hpp"
#include "metafold/random.hpp"

namespace metafold {

namespace {

constexpr double kHelixRise = 1.5;
constexpr double kHelixRadius = 2.3;
constexpr double kHelixTurnDeg = 100.0;
constexpr double kStrandRise = 3.3;    // with the pleat, C-alpha spacing is 3.8 A
constexpr double kStrandPleat = 0.95;
constexpr double kStrandSpacing = 4.8;  // between paired strands

constexpr std::size_t kTurnLength = 4;  // residues in each connecting loop
constexpr double kTurnReach = 6.0;      // out-of-plane height of a loop

// Antiparallel strands joined by elliptical loops.
Coords strands(std::size_t length, std::size_t n_strands) {
  Coords out;
  out.reserve(length);
  const std::size_t loops = kTurnLength * (n_strands - 1);
  const std::size_t arm = (length - loops) / n_strands;
  const double end_x = kStrandRise * static_cast<double>(arm - 1);
  for (std::size_t s = 0; s < n_strands; ++s) {
    const bool forward = s % 2 == 0;
    const std::size_t count = s + 1 == n_strands ? length - out.size() : arm;
    const double y = kStrandSpacing * static_cast<double>(s);
    for (std::size_t k = 0; k < count; ++k) {
      double along = kStrandRise * static_cast<double>(k);
      double pleat = (out.size() % 2 == 0) ? kStrandPleat : -kStrandPleat;
      out.emplace_back(forward ? along : end_x - along, y, pleat);
    }
    if (s + 1 == n_strands)
      break;
    for (std::size_t k = 1; k <= kTurnLength; ++k) {
      double theta = std::numbers::pi * static_cast<double>(k) / (kTurnLength + 1);
      double bulge = kTurnReach * std::sin(theta);
      out.emplace_back(forward ? end_x : 0.0,
                       y + 0.5 * kStrandSpacing * (1.0 - std::cos(theta)), bulge);
    }
  }
  return out;
}

Mat3 random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

} // namespace

Coords archetype_trace(Archetype kind, std::size_t length) {
  Coords out;
  out.reserve(length);
  switch (kind) {
    case Archetype::Helix: {
      const double step = kHelixTurnDeg * std::numbers::pi / 180.0;
      for (std::size_t i = 0; i < length; ++i) {
        double t = step * static_cast<double>(i);
        out.emplace_back(kHelixRadius * std::cos(t), kHelixRadius * std::sin(t),
                         kHelixRise * static_cast<double>(i));
      }
      return out;
    }
    case Archetype::Strand:
      for (std::size_t i = 0; i < length; ++i)
        out.emplace_back(kStrandRise * static_cast<double>(i),
                         (i % 2 == 0) ? kStrandPleat : -kStrandPleat, 0.0);
      return out;
    case Archetype::Hairpin:
      return strands(length, 2);
    case Archetype::Meander:
      return strands(length, 3);
  }
  return out;
}

Archetype archetype_for_mode(std::size_t mode) {
  static constexpr Archetype order[] = {Archetype::Helix, Archetype::Strand, Archetype::Hairpin,
                                        Archetype::Meander};
  return order[mode % 4];
}

SyntheticEnsemble synthesize_ensemble(const SynthesisSpec& spec) {
  if (spec.mode_sizes.empty())
    fail(ErrorKind::InvalidArgument, "synthetic ensemble needs at least one mode");
  if (spec.mode_sizes.size() > 4)
    fail(ErrorKind::InvalidArgument, "synthetic ensembles support at most 4 distinct modes");
  if (spec.length < 20)
    fail(ErrorKind::InvalidArgument, "synthetic chains need at least 20 residues");

  Rng rng(spec.seed);
  std::vector<Structure> members;
  std::vector<int> labels;

  auto emit = [&](const Coords& base, double sigma, const PlddtProfile& prof, int label) {
    Mat3 rot = Mat3::Identity();
    Vec3 shift = Vec3::Zero();
    if (spec.random_pose) {
      rot = random_rotation(rng);
      shift = Vec3(rng.normal(0.0, 10.0), rng.normal(0.0, 10.0), rng.normal(0.0, 10.0));
    }
    Coords ca(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      Vec3 jitter(rng.normal(0.0, sigma), rng.normal(0.0, sigma), rng.normal(0.0, sigma));
      ca[i] = rot * (base[i] + jitter) + shift;
    }
    const double member_mean = rng.normal(prof.mean, prof.member_sd);
    std::vector<double> plddt(base.size());
    for (double& p : plddt)
      p = std::clamp(rng.normal(member_mean, prof.residue_sd), 0.0, 100.0);
    std::string id = spec.protein_id + "/m" + std::to_string(members.size() + 1);
    members.emplace_back(std::move(id), std::move(ca), std::move(plddt));
    labels.push_back(label);
  };

  for (std::size_t mode = 0; mode < spec.mode_sizes.size(); ++mode) {
    const Coords base = archetype_trace(archetype_for_mode(mode), spec.length);
    for (std::size_t k = 0; k < spec.mode_sizes[mode]; ++k)
      emit(base, spec.noise_sigma, spec.plddt, static_cast<int>(mode));
  }
  for (std::size_t k = 0; k < spec.decoys; ++k) {
    const Coords base = archetype_trace(archetype_for_mode(k), spec.length);
    emit(base, 2.0, spec.decoy_plddt, -1);
  }
  if (members.empty())
    fail(ErrorKind::InvalidArgument, "synthetic ensemble would be empty");
  return {Ensemble(spec.protein_id, std::move(members)), std::move(labels)};
}

} // namespace metafold
