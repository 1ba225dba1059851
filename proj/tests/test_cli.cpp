#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "cascade_infer_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path at(const std::string& name) { return work_dir() / name; }

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

/// Runs the binary with `args`, capturing stdout and stderr into files.
int run(const std::string& args, const std::string& tag) {
  const std::string cmd = std::string("'") + CASCADE_INFER_BIN + "' " + args + " > " + quoted(at(tag + ".out")) +
                          " 2> " + quoted(at(tag + ".err"));
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const std::string kTwoNode = "n=2\np_min=0.2\np_max=0.8\n0 1 0.5\n1 0 0.5\n";
const std::string kPath = "n=4\n0 1 0.6\n1 0 0.5\n1 2 0.7\n2 1 0.4\n2 3 0.5\n3 2 0.6\n";

}  // namespace

TEST_CASE("oracle subcommand") {
  write_file(at("two.edges"), kTwoNode);
  REQUIRE(run("oracle --graph " + quoted(at("two.edges")) + " --noise geometric:q=0.5", "oracle") == 0);
  std::map<std::string, double> rows;
  std::istringstream in(slurp(at("oracle.out")));
  std::string line;
  std::getline(in, line);
  CHECK(line == "quantity,i,j,value");
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    rows[line.substr(0, cut)] = std::stod(line.substr(cut + 1));
  }
  CHECK(rows.at("e1,0,") == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(rows.at("h_pair,0,1") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rows.at("f_lt,0,1") == doctest::Approx(5.0 / 24.0).epsilon(1e-12));
  CHECK(rows.at("g_excl,1,0") == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(rows.at("v,0,1") == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(rows.at("path_prob,0,1") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("simulate, learn-structure and learn-weights pipeline") {
  write_file(at("path.edges"), kPath);
  const std::string sim = "simulate --graph " + quoted(at("path.edges")) + " --cascades 20000 --seed 3";
  REQUIRE(run(sim + " --out " + quoted(at("c.tsv")), "sim") == 0);
  REQUIRE(run(sim + " --out " + quoted(at("c2.tsv")), "sim2") == 0);
  CHECK(slurp(at("c.tsv")) == slurp(at("c2.tsv")));
  CHECK(slurp(at("c.tsv")).rfind("#cascades", 0) == 0);

  REQUIRE(run("learn-structure --mode extreme --algo tree --cascades " + quoted(at("c.tsv")), "tree") == 0);
  CHECK(slurp(at("tree.out")) == "n=4\n0 1\n1 2\n2 3\n");
  REQUIRE(run("learn-structure --mode extreme --algo tree --cascades " + quoted(at("c.tsv")), "tree2") == 0);
  CHECK(slurp(at("tree2.out")) == slurp(at("tree.out")));

  REQUIRE(run("learn-structure --algo bounded --degree 2 --cascades " + quoted(at("c.tsv")) + " --ambiguities " +
                  quoted(at("amb.jsonl")),
              "bounded") == 0);
  CHECK(slurp(at("bounded.out")) == "n=4\n0 1\n1 2\n2 3\n");
  CHECK(fs::exists(at("amb.jsonl")));

  write_file(at("skel.edges"), slurp(at("tree.out")));
  REQUIRE(run("learn-weights --algo tree --mode limited --noise geometric:q=0.5 --edges " + quoted(at("skel.edges")) +
                  " --cascades " + quoted(at("c.tsv")) + " --flags " + quoted(at("flags.csv")),
              "weights") == 0);
  std::istringstream w(slurp(at("weights.out")));
  std::map<std::pair<int, int>, double> est;
  for (std::string line; std::getline(w, line);) {
    if (line.empty() || line[0] == '#' || line.find('=') != std::string::npos) continue;
    std::istringstream f(line);
    int a = 0, b = 0;
    double p = 0;
    f >> a >> b >> p;
    est[{a, b}] = p;
  }
  CHECK(est.size() == 6);
  CHECK(std::abs(est[{0, 1}] - 0.6) < 0.1);
  CHECK(std::abs(est[{2, 1}] - 0.4) < 0.1);
  CHECK(slurp(at("flags.csv")).rfind("i,j,p_hat,flags\n", 0) == 0);

  REQUIRE(run("learn-weights --algo pairwise --mode limited --cascades " + quoted(at("c.tsv")), "pairwise") == 0);
  CHECK(slurp(at("pairwise.out")).find("n=4") != std::string::npos);

  CHECK(run("learn-weights --mode extreme --cascades " + quoted(at("c.tsv")), "wext") == 1);
}

TEST_CASE("sample-size subcommand") {
  REQUIRE(run("sample-size --n 20", "ss") == 0);
  CHECK(slurp(at("ss.out")).find("m_tree_structure=4148\n") != std::string::npos);
  REQUIRE(run("sample-size --n 4 --d 2 --noise pmf:0=0.5,1=0.5", "ss2") == 0);
  CHECK(slurp(at("ss2.out")).find("m_bounded_weights=not_applicable\n") != std::string::npos);
}

TEST_CASE("experiment subcommand") {
  write_file(at("exp.cfg"), "graph=tree:n=8\ntrials=3\ncascades=2000\n");
  const std::string out = quoted(at("exp_out"));
  REQUIRE(run("experiment --config " + quoted(at("exp.cfg")) + " --set seed=5 --output " + out, "exp") == 0);
  const std::string first = slurp(at("exp_out") / "metrics.csv");
  CHECK(first.rfind("#schema=1\n", 0) == 0);
  CHECK(slurp(at("exp.out")) == first);
  REQUIRE(run("experiment --config " + quoted(at("exp.cfg")) + " --set seed=5 --output " + out, "exp2") == 0);
  CHECK(slurp(at("exp_out") / "metrics.csv") == first);
  CHECK(run("experiment --set trials=0 --output " + out, "exp3") == 1);
  CHECK(run("experiment --set algo=tree-weights --set mode=extreme --output " + out, "exp4") == 1);
}

TEST_CASE("exit codes") {
  CHECK(run("oracle --no-such-flag", "unknown") == 1);
  CHECK(slurp(at("unknown.err")).find("Usage") != std::string::npos);
  CHECK(run("", "none") == 1);
  CHECK(run("--help", "help") == 0);
  CHECK(run("oracle --graph " + quoted(at("does_not_exist.edges")), "missing") == 2);
  CHECK(run("learn-structure --cascades " + quoted(at("does_not_exist.tsv")), "missing2") == 2);
  write_file(at("bad.edges"), "n=2\n0 1 1.5\n");
  CHECK(run("oracle --graph " + quoted(at("bad.edges")), "invalid") == 1);
  write_file(at("garbage.edges"), "n=2\n0 one 0.5\n");
  CHECK(run("oracle --graph " + quoted(at("garbage.edges")), "garbage") == 1);
  write_file(at("big.edges"), "n=9\n0 1 0.5\n");
  CHECK(run("oracle --graph " + quoted(at("big.edges")), "big") == 1);
}
