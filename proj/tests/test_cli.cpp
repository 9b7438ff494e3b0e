#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "gdenet/csv.hpp"
#include "gdenet/graph.hpp"

namespace fs = std::filesystem;
using namespace gdenet;

namespace {

const fs::path kWork = fs::temp_directory_path() / "gdenet_cli_test";

int run(const std::string& args) {
  std::string cmd = std::string(GDENET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

fs::path fresh(const std::string& name) {
  auto d = kWork / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_graph(const fs::path& dir, const std::string& name, const Graph& g) {
  auto p = dir / name;
  std::ofstream out(p);
  write_edge_list_csv(out, g);
  return p;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("generate writes one file per graph plus a manifest") {
  auto d = fresh("gen");
  REQUIRE(run("generate --family er --n 100 --p 0.06 --count 30 --seed 7 --out " + q(d / "er")) == 0);
  int csvs = 0;
  for (auto& e : fs::directory_iterator(d / "er"))
    if (e.path().extension() == ".csv" && e.path().filename() != "manifest.csv") ++csvs;
  CHECK(csvs == 30);
  auto m = lines(d / "er" / "manifest.csv");
  REQUIRE(m.size() == 31);
  CHECK(m[0] == "file,family,n,p_or_blocks,seed");
  CHECK(m[1].rfind("graph_00000.csv,er,100,0.059999999999999998,", 0) == 0);
  CHECK(fs::exists(d / "er" / "generate.json"));

  REQUIRE(run("generate --family sbm --n 100 --blocks 5 --seed 1 --out " + q(d / "sbm")) == 0);
  auto s = lines(d / "sbm" / "manifest.csv");
  REQUIRE(s.size() == 2);
  CHECK(csv::split(s[1])[3] == "5");
}

TEST_CASE("generate rejects invalid parameters without writing files") {
  auto d = fresh("gen_bad");
  CHECK(run("generate --family er --n 10 --p 1.5 --out " + q(d / "out")) == 2);
  CHECK_FALSE(fs::exists(d / "out"));
  CHECK(run("generate --family er --n 0 --out " + q(d / "out")) == 2);
  CHECK(run("generate --family tree --out " + q(d / "out")) == 2);
  CHECK_FALSE(fs::exists(d / "out"));
}

TEST_CASE("generate reports an unwritable output directory") {
  auto d = fresh("gen_unwritable");
  std::ofstream(d / "blocker") << "x";
  CHECK(run("generate --family er --n 10 --p 0.5 --out " + q(d / "blocker" / "sub")) == 2);
}

TEST_CASE("solve on K2 matches the closed form and chebyshev agrees with exact") {
  auto d = fresh("solve");
  auto k2 = write_graph(d, "k2.csv", generate_path(2));
  REQUIRE(run("solve --pde heat --solver exact --graph " + q(k2) + " --source 0 --times 0,1 --out " + q(d / "u.csv")) ==
          0);
  auto rows = lines(d / "u.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "source,node,time,value");
  auto value = [&](std::size_t i) { return csv::parse_double(csv::split(rows[i])[3]); };
  const double e = std::exp(-2.0);
  CHECK(value(1) == doctest::Approx(1.0).epsilon(1e-14));  // node 0, t = 0
  CHECK(std::abs(value(2) - (1 + e) / 2) <= 1e-14);
  CHECK(std::abs(value(3)) <= 1e-14);
  CHECK(std::abs(value(4) - (1 - e) / 2) <= 1e-14);
  CHECK(fs::exists(d / "u.csv.json"));

  auto c10 = write_graph(d, "c10.csv", generate_cycle(10));
  for (std::string pde : {"heat", "wave"}) {
    REQUIRE(run("solve --pde " + pde + " --solver exact --graph " + q(c10) + " --times 0:5:0.5 --out " +
                q(d / "a.csv")) == 0);
    REQUIRE(run("solve --pde " + pde + " --solver chebyshev --graph " + q(c10) + " --times 0:5:0.5 --out " +
                q(d / "b.csv")) == 0);
    auto a = lines(d / "a.csv"), b = lines(d / "b.csv");
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i)
      worst = std::max(worst, std::abs(csv::parse_double(csv::split(a[i])[3]) - csv::parse_double(csv::split(b[i])[3])));
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("solve at time zero returns the Dirac") {
  auto d = fresh("solve_t0");
  auto g = write_graph(d, "c5.csv", generate_cycle(5));
  REQUIRE(run("solve --graph " + q(g) + " --source 2 --times 0 --out " + q(d / "u.csv")) == 0);
  auto rows = lines(d / "u.csv");
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(csv::parse_double(csv::split(rows[i])[3]) == (i - 1 == 2 ? 1.0 : 0.0));
}

TEST_CASE("solve reports malformed graph files with a line number") {
  auto d = fresh("solve_bad");
  std::ofstream(d / "bad.csv") << "src,dst,weight\n0,1,1\n1,x,1\n";
  std::string cmd = std::string(GDENET_CLI_PATH) + " solve --graph " + q(d / "bad.csv") + " --out " + q(d / "u.csv") +
                    " 2>" + q(d / "err.txt");
  int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  CHECK(slurp(d / "err.txt").find("line 3") != std::string::npos);
  CHECK_FALSE(fs::exists(d / "u.csv"));
  CHECK(run("solve --graph " + q(d / "missing.csv") + " --out " + q(d / "u.csv")) == 2);
  CHECK(run("solve --graph " + q(d / "bad.csv") + " --pde heat_wave --out " + q(d / "u.csv")) == 2);
}

TEST_CASE("features have the documented long-format shapes and are reproducible") {
  auto d = fresh("features");
  auto c4 = write_graph(d, "c4.csv", generate_cycle(4));
  REQUIRE(run("features --graph " + q(c4) + " --level node --out " + q(d / "node.csv")) == 0);
  CHECK(lines(d / "node.csv").size() == 1 + 4 * 20 * 3 * 4);
  REQUIRE(run("features --graph " + q(c4) + " --level graph --out " + q(d / "graph.csv")) == 0);
  CHECK(lines(d / "graph.csv").size() == 1 + 20 * 4 * 3 * 4);
  REQUIRE(run("features --graph " + q(c4) + " --level graph --out " + q(d / "graph2.csv")) == 0);
  CHECK(slurp(d / "graph.csv") == slurp(d / "graph2.csv"));
  auto side = nlohmann::json::parse(slurp(d / "graph.csv.json"));
  CHECK(side["command"] == "features");
  CHECK(side["config"]["M"] == 4);

  REQUIRE(run("features --graph " + q(c4) + " --level node --format wide --out " + q(d / "wide.csv")) == 0);
  auto wide = lines(d / "wide.csv");
  CHECK(wide.size() == 5);
  CHECK(csv::split(wide[0]).size() == 1 + 20 * 3 * 4);
}

TEST_CASE("features reject a signal whose length does not match the graph") {
  auto d = fresh("features_bad");
  auto c4 = write_graph(d, "c4.csv", generate_cycle(4));
  std::ofstream(d / "sig.csv") << "node,x\n0,1\n1,0\n2,0\n";
  CHECK(run("features --graph " + q(c4) + " --signal " + q(d / "sig.csv") + " --out " + q(d / "f.csv")) == 2);
  std::ofstream(d / "sig_ok.csv") << "node,x\n0,1\n1,0\n2,0\n3,2\n";
  CHECK(run("features --graph " + q(c4) + " --signal " + q(d / "sig_ok.csv") + " --out " + q(d / "f.csv")) == 0);
  CHECK(run("features --graph " + q(c4) + " --M 0 --out " + q(d / "f.csv")) == 2);
}

TEST_CASE("labels give the oracle curvatures") {
  auto d = fresh("labels");
  auto tri = write_graph(d, "tri.csv", generate_cycle(3));
  REQUIRE(run("labels --graph " + q(tri) + " --out " + q(d / "tri_labels.csv")) == 0);
  auto t = lines(d / "tri_labels.csv");
  REQUIRE(t.size() == 4);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(std::abs(csv::parse_double(csv::split(t[i])[1]) - 0.5) <= 1e-12);

  auto k2 = write_graph(d, "k2.csv", generate_path(2));
  REQUIRE(run("labels --graph " + q(k2) + " --out " + q(d / "k2_labels.csv")) == 0);
  auto k = lines(d / "k2_labels.csv");
  REQUIRE(k.size() == 3);
  for (std::size_t i = 1; i < k.size(); ++i) CHECK(std::abs(csv::parse_double(csv::split(k[i])[1])) <= 1e-12);

  auto c4 = write_graph(d, "c4.csv", generate_cycle(4));
  REQUIRE(run("labels --graph " + q(c4) + " --level edge --out " + q(d / "c4_edges.csv")) == 0);
  auto e = lines(d / "c4_edges.csv");
  REQUIRE(e.size() == 5);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(std::abs(csv::parse_double(csv::split(e[i])[2])) <= 1e-12);
}

TEST_CASE("labels skip isolated nodes") {
  auto d = fresh("labels_isolated");
  auto g = write_graph(d, "g.csv", disjoint_union(generate_cycle(3), generate_path(1)));
  REQUIRE(run("labels --graph " + q(g) + " --out " + q(d / "l.csv")) == 0);
  auto rows = lines(d / "l.csv");
  CHECK(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(csv::split(rows[i])[0] != "3");
}

TEST_CASE("train and eval run end to end and report orphans") {
  auto d = fresh("train");
  REQUIRE(run("generate --family er --n 30 --count 40 --seed 3 --out " + q(d / "data")) == 0);
  REQUIRE(run("features --manifest " + q(d / "data" / "manifest.csv") + " --T 5 --out " + q(d / "X.csv")) == 0);
  REQUIRE(run("labels --manifest " + q(d / "data" / "manifest.csv") + " --out " + q(d / "y.csv")) == 0);
  REQUIRE(run("train --features " + q(d / "X.csv") + " --labels " + q(d / "y.csv") +
              " --hidden 16,16 --epochs 20 --folds 4 --out " + q(d / "model.json") + " --metrics " +
              q(d / "metrics.json")) == 0);
  auto m = nlohmann::json::parse(slurp(d / "metrics.json"));
  CHECK(m.contains("mse"));
  CHECK(m["fold_mse"].size() == 4);
  REQUIRE(run("eval --model " + q(d / "model.json") + " --features " + q(d / "X.csv") + " --labels " + q(d / "y.csv") +
              " --metric mse,r2 --out " + q(d / "eval.json")) == 0);
  auto ev = nlohmann::json::parse(slurp(d / "eval.json"));
  CHECK(ev.contains("mse"));
  CHECK(ev.contains("r2"));

  REQUIRE(run("eval --predictions " + q(d / "y.csv") + " --labels " + q(d / "y.csv") + " --out " +
              q(d / "perfect.json")) == 0);
  CHECK(nlohmann::json::parse(slurp(d / "perfect.json"))["mse"] == 0.0);

  auto y = lines(d / "y.csv");
  {
    std::ofstream out(d / "y_short.csv");
    for (std::size_t i = 0; i + 1 < y.size(); ++i) out << y[i] << '\n';
    out << "graph_99999,0.05\n";
  }
  std::string cmd = std::string(GDENET_CLI_PATH) + " train --features " + q(d / "X.csv") + " --labels " +
                    q(d / "y_short.csv") + " --epochs 1 --out " + q(d / "m2.json") + " 2>" + q(d / "err.txt");
  int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  auto err = slurp(d / "err.txt");
  CHECK(err.find("features:graph_00039") != std::string::npos);
  CHECK(err.find("labels:graph_99999") != std::string::npos);
  CHECK_FALSE(fs::exists(d / "m2.json"));
}

TEST_CASE("verify passes on a random graph and fails on a corrupted solution") {
  auto d = fresh("verify");
  REQUIRE(run("generate --family er --n 25 --p 0.3 --seed 4 --out " + q(d / "g")) == 0);
  auto er25 = d / "g" / "graph_00000.csv";
  CHECK(run("verify --suite all --graph " + q(er25) + " --out " + q(d / "report.jsonl")) == 0);
  auto reports = lines(d / "report.jsonl");
  CHECK(reports.size() >= 6);
  for (const auto& r : reports) CHECK(nlohmann::json::parse(r)["pass"] == true);

  auto g = write_graph(d, "two.csv", disjoint_union(generate_cycle(4), generate_cycle(3)));
  REQUIRE(run("solve --graph " + q(g) + " --source 0 --times 0,1,2 --out " + q(d / "u.csv")) == 0);
  CHECK(run("verify --suite confinement --graph " + q(g) + " --solution " + q(d / "u.csv")) == 0);
  auto rows = lines(d / "u.csv");
  {
    std::ofstream out(d / "corrupt.csv");
    for (const auto& r : rows) {
      auto c = csv::split(r);
      if (c[1] == "5" && c[2] == "2") {
        out << "0,5,2,0.25\n";
      } else {
        out << r << '\n';
      }
    }
  }
  CHECK(run("verify --suite confinement --graph " + q(g) + " --solution " + q(d / "corrupt.csv") + " --out " +
            q(d / "bad.jsonl")) == 1);
  auto bad = nlohmann::json::parse(lines(d / "bad.jsonl").at(0));
  CHECK(bad["pass"] == false);
  CHECK(bad["witness"]["node"] == 5);

  CHECK(run("verify --suite trend --trend-graphs 30") == 0);
  CHECK(run("verify --suite heat") == 2);
  CHECK(run("verify --suite nonsense --graph " + q(er25)) == 2);
}

TEST_CASE("help and usage errors map to the documented exit codes") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("solve") == 2);
  CHECK(run("frobnicate") == 2);
}
