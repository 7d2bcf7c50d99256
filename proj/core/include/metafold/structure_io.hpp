#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace metafold {

using Vec3 = Eigen::Vector3d;
using Coords = std::vector<Vec3>;

/// One conformation: ordered C-alpha positions (Angstrom) and per-residue
/// pLDDT in [0, 100]. Immutable once constructed; the constructor enforces
/// L >= 2, matching lengths, finite coordinates and the pLDDT range.
class Structure {
public:
  Structure(std::string id, Coords ca, std::vector<double> plddt,
            std::optional<std::string> sequence = std::nullopt);

  const std::string& id() const { return id_; }
  std::size_t size() const { return ca_.size(); }
  std::span<const Vec3> ca() const { return ca_; }
  std::span<const double> plddt() const { return plddt_; }
  const std::optional<std::string>& sequence() const { return sequence_; }
  double mean_plddt() const { return mean_plddt_; }

  friend bool operator==(const Structure& a, const Structure& b);

private:
  std::string id_;
  Coords ca_;
  std::vector<double> plddt_;
  std::optional<std::string> sequence_;
  double mean_plddt_ = 0.0;
};

/// Conformations of one protein. Residue correspondence is positional, so all
/// members share one length.
class Ensemble {
public:
  Ensemble(std::string protein_id, std::vector<Structure> members);

  const std::string& protein_id() const { return protein_id_; }
  const std::vector<Structure>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  std::size_t residue_count() const { return members_.front().size(); }
  const Structure& operator[](std::size_t i) const { return members_[i]; }

private:
  std::string protein_id_;
  std::vector<Structure> members_;
};

struct AlignmentDepthRecord {
  std::string protein_id;
  std::size_t depth = 0;         // homologs, i.e. records after the query
  std::size_t query_length = 0;
};

enum class AlignmentFormat { Fasta, A3m };

/// Reads fixed-column PDB text. One Structure per MODEL block (one in total
/// if the file has no MODEL records); only C-alpha atoms with altloc blank or
/// 'A' are kept and the B-factor column becomes pLDDT. Duplicate C-alpha
/// records for one residue keep the first and append a message to
/// `warnings` when it is non-null.
std::vector<Structure> parse_pdb(std::istream& in, std::string_view id,
                                 std::vector<std::string>* warnings = nullptr);
std::vector<Structure> read_pdb_file(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings = nullptr);

/// Writes C-alpha ATOM records. `model` > 0 wraps them in MODEL/ENDMDL.
void write_pdb(std::ostream& out, const Structure& s, int model = 0);
void write_pdb_models(std::ostream& out, std::span<const Structure> models);

/// Members of all files in input order; a length mismatch names the file.
Ensemble load_ensemble(std::span<const std::filesystem::path> paths,
                       std::string protein_id);
/// A directory (every *.pdb / *.ent inside, sorted by file name) or a single
/// multi-model file. The protein id is the directory name or file stem.
Ensemble load_ensemble(const std::filesystem::path& dir_or_file);

AlignmentDepthRecord count_alignment_depth(std::istream& in, AlignmentFormat format,
                                           std::string protein_id);
/// Format chosen by extension: .a3m is A3M, anything else FASTA.
AlignmentDepthRecord read_alignment_depth(const std::filesystem::path& path);

char residue_one_letter(std::string_view three_letter);

} // namespace metafold
