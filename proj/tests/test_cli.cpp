#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "metafold_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  std::string cmd = std::string(METAFOLD_CLI) + " " + args + " >" +
                    (work() / "stdout.txt").string() + " 2>" + (work() / "stderr.txt").string();
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    out.push_back(l);
  return out;
}

std::string path(const std::string& name) { return (work() / name).string(); }

// Six proteins with several planted modes and six with one.
void make_corpus() {
  static bool done = false;
  if (done)
    return;
  fs::create_directories(work() / "ens");
  std::ofstream labels(work() / "labels.csv");
  labels << "id,label\n";
  for (int i = 0; i < 12; ++i) {
    const bool multi = i % 2 == 1;
    std::string id = (multi ? "multi" : "uni") + std::to_string(i);
    std::string args = "synth --length 40 --sigma 0.2 --decoys 2 --seed " + std::to_string(i) +
                       (multi ? " --modes 2 --per-mode 10" : " --modes 1 --per-mode 20") +
                       " --out " + path("ens/" + id);
    REQUIRE(run(args) == 0);
    labels << id << ',' << (multi ? 1 : 0) << '\n';
  }
  std::ofstream grid(work() / "grid.json");
  grid << R"({"n_trees": [30], "max_depth": [3], "min_samples_leaf": [1, 2], "alpha": [1]})";
  done = true;
}

std::string ensemble_args() {
  std::string s;
  for (int i = 0; i < 12; ++i)
    s += " " + path("ens/" + std::string(i % 2 ? "multi" : "uni") + std::to_string(i));
  return s;
}

} // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("features") == 1);
  CHECK(run("synth --modes 5 --out " + path("x")) == 1);
  CHECK(run("curate --mode sideways x --out " + path("x.csv")) == 1);
  CHECK(run("--help") == 0);
  CHECK(run("--version") == 0);
}

TEST_CASE("data errors exit with 2") {
  CHECK(run("features " + path("missing.pdb") + " --out " + path("f.csv")) == 2);
  {
    std::ofstream bad(work() / "bad_features.csv");
    bad << "not,a,feature,table\n";
  }
  CHECK(run("train --features " + path("bad_features.csv") + " --out " + path("m.json")) == 2);
  {
    std::ofstream bad(work() / "bad_model.json");
    bad << "{}";
  }
  make_corpus();
  CHECK(run("predict --model " + path("bad_model.json") + " --features " +
            path("bad_features.csv") + " --out -") == 2);
  CHECK(!slurp(work() / "stderr.txt").empty());
}

TEST_CASE("synth writes members and planted labels") {
  make_corpus();
  fs::path dir = work() / "ens" / "multi1";
  std::size_t pdbs = 0;
  for (const auto& e : fs::directory_iterator(dir))
    pdbs += e.path().extension() == ".pdb";
  CHECK(pdbs == 22);
  auto modes = lines(slurp(dir / "modes.csv"));
  REQUIRE(modes.size() == 23);
  CHECK(modes[0] == "member,mode");
}

TEST_CASE("cluster table for one ensemble") {
  make_corpus();
  REQUIRE(run("cluster " + path("ens/multi3") + " --out " + path("multi3.clusters")) == 0);
  std::string t = slurp(work() / "multi3.clusters");
  CHECK(t.rfind("# metafold-clusters", 0) == 0);
}

TEST_CASE("features, train, predict and rank") {
  make_corpus();
  REQUIRE(run("features" + ensemble_args() + " --out " + path("features.csv")) == 0);
  auto feat = lines(slurp(work() / "features.csv"));
  REQUIRE(feat.size() == 13);
  CHECK(feat[0] == "id,K,R1,R2,R3,min_tm,avg_tm,plddt1,plddt2,plddt3");
  for (std::size_t i = 1; i < feat.size(); ++i) {
    const bool multi = feat[i].rfind("multi", 0) == 0;
    CHECK(feat[i].find(multi ? ",2," : ",1,") != std::string::npos);
  }

  REQUIRE(run("train --features " + path("features.csv") + " --labels " + path("labels.csv") +
              " --grid " + path("grid.json") + " --k 3 --seed 4 --out " + path("model.json") +
              " --report " + path("train_report.csv") + " --grid-results " +
              path("grid_results.csv")) == 0);
  CHECK(fs::file_size(work() / "model.json") > 0);
  // Omitted keys keep their default lists: 2 leaf sizes x 2 impurity floors, 3 folds.
  CHECK(lines(slurp(work() / "grid_results.csv")).size() == 1 + 4 * 3);

  REQUIRE(run("predict --model " + path("model.json") + " --features " + path("features.csv") +
              " --out " + path("scores.csv")) == 0);
  auto scores = lines(slurp(work() / "scores.csv"));
  REQUIRE(scores.size() == 13);
  CHECK(scores[0] == "id,probability,metamorphic");
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const bool multi = scores[i].rfind("multi", 0) == 0;
    CHECK(scores[i].back() == (multi ? '1' : '0'));
  }

  REQUIRE(run("--threads 2 rank --model " + path("model.json") + " --ensembles " + path("ens") +
              " --out " + path("ranking.csv") + " --failures " + path("failures.csv")) == 0);
  auto ranking = lines(slurp(work() / "ranking.csv"));
  REQUIRE(ranking.size() == 13);
  CHECK(ranking[0] == "rank,id,probability,K,min_tm,top_plddt");
  for (std::size_t i = 1; i <= 6; ++i)
    CHECK(ranking[i].find(",multi") != std::string::npos);
  CHECK(lines(slurp(work() / "failures.csv")).size() == 1);

  REQUIRE(run("cv --features " + path("features.csv") + " --labels " + path("labels.csv") +
              " --grid " + path("grid.json") + " --k 3 --seed 4 --report " + path("cv.csv") +
              " --roc " + path("roc.csv")) == 0);
  const std::string first = slurp(work() / "cv.csv");
  REQUIRE(run("--threads 3 cv --features " + path("features.csv") + " --labels " +
              path("labels.csv") + " --grid " + path("grid.json") + " --k 3 --seed 4 --report " +
              path("cv.csv")) == 0);
  CHECK(slurp(work() / "cv.csv") == first);
}

TEST_CASE("curation modes") {
  REQUIRE(run("synth --modes 1 --per-mode 6 --length 40 --sigma 0.1 --seed 3 --out " +
              path("stable")) == 0);
  REQUIRE(run("curate --mode codnas " + path("stable") + " --out " + path("codnas.csv")) == 0);
  auto codnas = lines(slurp(work() / "codnas.csv"));
  REQUIRE(codnas.size() == 2);
  CHECK(codnas[1].find("stable,NA,") == 0);
  CHECK(codnas[1].find(",single_fold_codnas,") != std::string::npos);

  REQUIRE(run("curate --mode atlas " + path("stable") + " --out " + path("atlas.csv")) == 0);
  CHECK(slurp(work() / "atlas.csv").find(",single_fold_atlas,") != std::string::npos);

  REQUIRE(run("synth --modes 2 --per-mode 1 --length 40 --sigma 0.1 --seed 3 --out " +
              path("switch")) == 0);
  fs::create_directories(work() / "msa");
  {
    std::ofstream a3m(work() / "msa" / "switch.a3m");
    for (int i = 0; i < 12; ++i)
      a3m << ">s" << i << "\nACDEFGHIKL\n";
  }
  REQUIRE(run("curate --mode metamorphic " + path("switch") + " --out " + path("meta.csv")) == 0);
  CHECK(slurp(work() / "meta.csv").find(",metamorphic_candidate,") != std::string::npos);
  REQUIRE(run("curate --mode metamorphic " + path("switch") + " --msa-dir " + path("msa") +
              " --out " + path("meta_msa.csv")) == 0);
  auto shallow = lines(slurp(work() / "meta_msa.csv"));
  REQUIRE(shallow.size() == 2);
  CHECK(shallow[1].find(",11,excluded,") != std::string::npos);

  REQUIRE(run("curate --mode depth " + path("msa/switch.a3m") + " --min-depth 10 --out " +
              path("depth.csv")) == 0);
  CHECK(slurp(work() / "depth.csv").find("switch,NA,NA,11,metamorphic_candidate,") !=
        std::string::npos);

  CHECK(run("curate --mode metamorphic " + path("stable") + " --out " + path("x.csv")) == 1);
}
