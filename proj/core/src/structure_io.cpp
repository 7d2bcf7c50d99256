#include "metafold/structure_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <utility>

#include "metafold/error.hpp"

namespace metafold {

namespace {

constexpr std::array<std::pair<std::string_view, char>, 25> kResidueCodes{{
    {"ALA", 'A'}, {"ARG", 'R'}, {"ASN", 'N'}, {"ASP", 'D'}, {"CYS", 'C'},
    {"GLN", 'Q'}, {"GLU", 'E'}, {"GLY", 'G'}, {"HIS", 'H'}, {"ILE", 'I'},
    {"LEU", 'L'}, {"LYS", 'K'}, {"MET", 'M'}, {"PHE", 'F'}, {"PRO", 'P'},
    {"SER", 'S'}, {"THR", 'T'}, {"TRP", 'W'}, {"TYR", 'Y'}, {"VAL", 'V'},
    {"MSE", 'M'}, {"SEC", 'U'}, {"PYL", 'O'}, {"HSD", 'H'}, {"HSE", 'H'},
}};

std::string_view three_letter(char one) {
  for (const auto& [three, code] : kResidueCodes)
    if (code == one)
      return three;
  return "UNK";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string_view field(std::string_view line, std::size_t col1, std::size_t col2) {
  // 1-based inclusive PDB columns
  if (line.size() < col1)
    return {};
  return line.substr(col1 - 1, std::min(col2, line.size()) - (col1 - 1));
}

std::string where(std::string_view id, std::size_t line_no) {
  return std::string(id) + ":" + std::to_string(line_no);
}

double read_real(std::string_view text, std::string_view what, std::string_view id,
                 std::size_t line_no) {
  text = trim(text);
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value))
    fail(ErrorKind::Parse, where(id, line_no) + ": malformed " + std::string(what) +
                               " field '" + std::string(text) + "'");
  return value;
}

int read_integer(std::string_view text, std::string_view what, std::string_view id,
                 std::size_t line_no) {
  text = trim(text);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    fail(ErrorKind::Parse, where(id, line_no) + ": malformed " + std::string(what) +
                               " field '" + std::string(text) + "'");
  return value;
}

struct CaRecord {
  Vec3 xyz;
  double bfactor;
  char residue;
};

struct ModelBuffer {
  int serial = 0;
  std::map<std::pair<int, char>, CaRecord> residues;
};

} // namespace

char residue_one_letter(std::string_view name) {
  for (const auto& [three, code] : kResidueCodes)
    if (three == name)
      return code;
  return 'X';
}

Structure::Structure(std::string id, Coords ca, std::vector<double> plddt,
                     std::optional<std::string> sequence)
    : id_(std::move(id)), ca_(std::move(ca)), plddt_(std::move(plddt)),
      sequence_(std::move(sequence)) {
  if (ca_.size() < 2)
    fail(ErrorKind::InvalidStructure,
         id_ + ": a structure needs at least 2 residues, got " + std::to_string(ca_.size()));
  if (plddt_.size() != ca_.size())
    fail(ErrorKind::InvalidStructure, id_ + ": pLDDT length differs from coordinate count");
  if (sequence_ && sequence_->size() != ca_.size())
    fail(ErrorKind::InvalidStructure, id_ + ": sequence length differs from coordinate count");
  for (const Vec3& p : ca_)
    if (!p.allFinite())
      fail(ErrorKind::InvalidStructure, id_ + ": non-finite coordinate");
  for (double v : plddt_)
    if (!(v >= 0.0 && v <= 100.0))
      fail(ErrorKind::InvalidStructure, id_ + ": pLDDT outside [0, 100]");
  mean_plddt_ = std::accumulate(plddt_.begin(), plddt_.end(), 0.0) /
                static_cast<double>(plddt_.size());
}

bool operator==(const Structure& a, const Structure& b) {
  return a.id_ == b.id_ && a.ca_ == b.ca_ && a.plddt_ == b.plddt_ &&
         a.sequence_ == b.sequence_;
}

Ensemble::Ensemble(std::string protein_id, std::vector<Structure> members)
    : protein_id_(std::move(protein_id)), members_(std::move(members)) {
  if (members_.empty())
    fail(ErrorKind::EnsembleInconsistency, protein_id_ + ": ensemble has no members");
  const std::size_t n = members_.front().size();
  for (const Structure& s : members_)
    if (s.size() != n)
      fail(ErrorKind::EnsembleInconsistency,
           protein_id_ + ": member " + s.id() + " has " + std::to_string(s.size()) +
               " residues, expected " + std::to_string(n));
}

std::vector<Structure> parse_pdb(std::istream& in, std::string_view id,
                                 std::vector<std::string>* warnings) {
  std::vector<ModelBuffer> models;
  bool saw_model_record = false;
  std::string line;
  std::size_t line_no = 0;

  auto current = [&]() -> ModelBuffer& {
    if (models.empty()) {
      models.emplace_back();
      models.back().serial = 1;
    }
    return models.back();
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l(line);
    if (l.starts_with("MODEL")) {
      saw_model_record = true;
      models.emplace_back();
      std::string_view serial = trim(field(l, 11, 14));
      models.back().serial = serial.empty()
                                 ? static_cast<int>(models.size())
                                 : read_integer(serial, "model serial", id, line_no);
      continue;
    }
    if (!l.starts_with("ATOM  "))
      continue;
    if (trim(field(l, 13, 16)) != "CA")
      continue;
    char altloc = l.size() > 16 ? l[16] : ' ';
    if (altloc != ' ' && altloc != 'A')
      continue;
    if (l.size() < 54)
      fail(ErrorKind::Parse, where(id, line_no) + ": ATOM record shorter than 54 columns");

    ModelBuffer& model = current();
    int seq = read_integer(field(l, 23, 26), "residue number", id, line_no);
    char icode = l.size() > 26 ? l[26] : ' ';
    Vec3 xyz(read_real(field(l, 31, 38), "x", id, line_no),
             read_real(field(l, 39, 46), "y", id, line_no),
             read_real(field(l, 47, 54), "z", id, line_no));
    double b = 0.0;
    std::string_view bfield = trim(field(l, 61, 66));
    if (!bfield.empty())
      b = read_real(bfield, "B-factor", id, line_no);
    if (b < 0.0 || b > 100.0) {
      if (warnings)
        warnings->push_back(where(id, line_no) + ": B-factor " + std::string(bfield) +
                            " clamped to [0, 100]");
      b = std::clamp(b, 0.0, 100.0);
    }
    char code = residue_one_letter(trim(field(l, 18, 20)));
    auto [it, inserted] = model.residues.try_emplace({seq, icode}, CaRecord{xyz, b, code});
    if (!inserted && warnings)
      warnings->push_back(where(id, line_no) + ": duplicate C-alpha for residue " +
                          std::to_string(seq) + "; keeping the first");
  }

  if (models.empty())
    fail(ErrorKind::EmptyStructure, std::string(id) + ": no C-alpha atoms found");

  std::vector<Structure> out;
  out.reserve(models.size());
  for (const ModelBuffer& m : models) {
    std::string sid = models.size() == 1 && !saw_model_record
                          ? std::string(id)
                          : std::string(id) + "/model_" + std::to_string(m.serial);
    if (m.residues.empty())
      fail(ErrorKind::EmptyStructure, sid + ": no C-alpha atoms found");
    Coords ca;
    std::vector<double> plddt;
    std::string seq;
    for (const auto& [key, rec] : m.residues) {
      ca.push_back(rec.xyz);
      plddt.push_back(rec.bfactor);
      seq.push_back(rec.residue);
    }
    if (ca.size() < 2)
      fail(ErrorKind::EmptyStructure, sid + ": fewer than 2 C-alpha atoms");
    out.emplace_back(std::move(sid), std::move(ca), std::move(plddt), std::move(seq));
  }
  return out;
}

std::vector<Structure> read_pdb_file(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::Io, "cannot open " + path.string());
  return parse_pdb(in, path.stem().string(), warnings);
}

void write_pdb(std::ostream& out, const Structure& s, int model) {
  char buf[96];
  if (model > 0) {
    std::snprintf(buf, sizeof buf, "MODEL     %4d\n", model);
    out << buf;
  }
  auto ca = s.ca();
  auto plddt = s.plddt();
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::string_view res = s.sequence() ? three_letter((*s.sequence())[i]) : "GLY";
    std::snprintf(buf, sizeof buf,
                  "ATOM  %5zu  CA  %3.3s A%4zu    %8.3f%8.3f%8.3f%6.2f%6.2f           C\n",
                  (i + 1) % 100000, res.data(), (i + 1) % 10000, ca[i].x(), ca[i].y(),
                  ca[i].z(), 1.0, plddt[i]);
    out << buf;
  }
  out << (model > 0 ? "ENDMDL\n" : "END\n");
}

void write_pdb_models(std::ostream& out, std::span<const Structure> models) {
  for (std::size_t i = 0; i < models.size(); ++i)
    write_pdb(out, models[i], static_cast<int>(i + 1));
  out << "END\n";
}

Ensemble load_ensemble(std::span<const std::filesystem::path> paths,
                       std::string protein_id) {
  if (paths.empty())
    fail(ErrorKind::EnsembleInconsistency, protein_id + ": no input files");
  std::vector<Structure> members;
  std::size_t length = 0;
  for (const auto& path : paths) {
    for (Structure& s : read_pdb_file(path)) {
      if (members.empty())
        length = s.size();
      else if (s.size() != length)
        fail(ErrorKind::EnsembleInconsistency,
             path.string() + ": " + std::to_string(s.size()) + " residues, ensemble has " +
                 std::to_string(length));
      members.push_back(std::move(s));
    }
  }
  return Ensemble(std::move(protein_id), std::move(members));
}

Ensemble load_ensemble(const std::filesystem::path& dir_or_file) {
  namespace fs = std::filesystem;
  if (fs::is_directory(dir_or_file)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir_or_file)) {
      if (!entry.is_regular_file())
        continue;
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (ext == ".pdb" || ext == ".ent")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    auto name = dir_or_file.filename().empty() ? dir_or_file.parent_path().filename()
                                               : dir_or_file.filename();
    if (files.empty())
      fail(ErrorKind::Io, dir_or_file.string() + ": no .pdb files in directory");
    return load_ensemble(files, name.string());
  }
  if (!fs::exists(dir_or_file))
    fail(ErrorKind::Io, dir_or_file.string() + ": no such file or directory");
  std::array<fs::path, 1> one{dir_or_file};
  return load_ensemble(one, dir_or_file.stem().string());
}

AlignmentDepthRecord count_alignment_depth(std::istream& in, AlignmentFormat format,
                                           std::string protein_id) {
  std::size_t headers = 0;
  std::size_t query_length = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = trim(line);
    if (l.empty() || l.front() == '#')
      continue;
    if (l.front() == '>') {
      ++headers;
      continue;
    }
    if (headers == 0)
      fail(ErrorKind::Parse, where(protein_id, line_no) + ": sequence data before first header");
    if (headers != 1)
      continue;
    for (char c : l) {
      if (c == '-' || c == '.' || c == ' ')
        continue;
      if (format == AlignmentFormat::A3m && std::islower(static_cast<unsigned char>(c)))
        continue;
      ++query_length;
    }
  }
  if (headers == 0)
    fail(ErrorKind::Parse, protein_id + ": alignment has no '>' headers");
  return {std::move(protein_id), headers - 1, query_length};
}

AlignmentDepthRecord read_alignment_depth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::Io, "cannot open " + path.string());
  auto fmt = path.extension() == ".a3m" ? AlignmentFormat::A3m : AlignmentFormat::Fasta;
  return count_alignment_depth(in, fmt, path.stem().string());
}

} // namespace metafold
