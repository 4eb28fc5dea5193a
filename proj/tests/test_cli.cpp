#include <doctest.h>

#include <set>

#include "cli_support.hpp"
#include "domino/dom1.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using cli::run;

namespace {

constexpr const char* kSmallConfig =
    R"({"phantom": {"size": 24}, "train": {"iterations": 10, "eval_interval": 5}})";

struct Workspace {
  testing::TempDir dir{"cli"};
  std::string config;

  Workspace() {
    config = (dir / "small.json").string();
    std::ofstream(config) << kSmallConfig;
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
  cli::Result operator()(const std::string& args) const { return run(args, dir.path()); }

  void make_data() const {
    REQUIRE((*this)("phantom --config " + config + " --count 3 --out " + p("train")).exit_code == 0);
    REQUIRE((*this)("phantom --config " + config + " --count 2 --first-index 3 --out " + p("held"))
                .exit_code == 0);
  }
};

domino::DenseMatrix read_csv(const std::string& path) { return domino::csv::load_matrix(path); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("phantom writes paired files and a manifest") {
    Workspace ws;
    const auto r = ws("phantom --count 30 --out " + ws.p("data"));
    CHECK(r.exit_code == 0);
    int images = 0, truths = 0;
    for (const auto& e : fs::directory_iterator(ws.dir / "data")) {
      const auto n = e.path().filename().string();
      images += n.find("_image.dom") != std::string::npos;
      truths += n.find("_truth.dom") != std::string::npos;
    }
    CHECK(images == 30);
    CHECK(truths == 30);
    std::ifstream manifest(ws.dir / "data" / "manifest.txt");
    std::string line;
    int lines = 0;
    while (std::getline(manifest, line)) ++lines;
    CHECK(lines == 30);
  }

  TEST_CASE("count zero gives an empty valid dataset") {
    Workspace ws;
    CHECK(ws("phantom --count 0 --out " + ws.p("empty")).exit_code == 0);
    CHECK(fs::exists(ws.dir / "empty" / "manifest.txt"));
    CHECK(cli::slurp(ws.dir / "empty" / "manifest.txt").empty());
  }

  TEST_CASE("bad config keys exit 2 and name the key") {
    Workspace ws;
    std::ofstream(ws.p("bad.json")) << R"({"train": {"learnig_rate": 0.1}})";
    const auto r = ws("phantom --config " + ws.p("bad.json") + " --count 1 --out " + ws.p("d"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("learnig_rate") != std::string::npos);
    CHECK_FALSE(fs::exists(ws.dir / "d"));
  }

  TEST_CASE("usage errors exit 2") {
    Workspace ws;
    CHECK(ws("").exit_code == 2);
    CHECK(ws("phantom --out " + ws.p("x")).exit_code == 2);
    CHECK(ws("train --mode fancy --data x --out y").exit_code == 2);
    CHECK(ws("frobnicate").exit_code == 2);
    CHECK(ws("--help").exit_code == 0);
  }

  TEST_CASE("unwritable output exits 2") {
    Workspace ws;
    std::ofstream(ws.p("file")) << "x";
    const auto r = ws("phantom --count 1 --out " + ws.p("file") + "/sub");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("error") != std::string::npos);
  }

  TEST_CASE("train modes and their outputs") {
    Workspace ws;
    ws.make_data();
    const std::string common = " --config " + ws.config + " --data " + ws.p("train");

    CHECK(ws("train --mode base" + common + " --out " + ws.p("base")).exit_code == 0);
    CHECK(fs::exists(ws.dir / "base" / "model.dom"));
    CHECK(cli::slurp(ws.dir / "base" / "trace.csv").rfind("iteration,loss\n", 0) == 0);
    CHECK_FALSE(fs::exists(ws.dir / "base" / "penalty.csv"));

    CHECK(ws("train --mode cm" + common + " --out " + ws.p("nocm")).exit_code == 2);
    CHECK_FALSE(fs::exists(ws.dir / "nocm"));

    CHECK(ws("train --mode cm" + common + " --heldout " + ws.p("held") + " --out " + ws.p("cm"))
              .exit_code == 0);
    for (const char* f : {"model.dom", "base_model.dom", "trace.csv", "confusion.csv", "penalty.csv"})
      CHECK(fs::exists(ws.dir / "cm" / f));
    const auto wcm = read_csv(ws.p("cm/penalty.csv"));
    for (std::size_t i = 0; i < wcm.rows(); ++i) CHECK(wcm(i, i) == 0.0);
    CHECK(cli::slurp(ws.dir / "cm" / "base_model.dom") == cli::slurp(ws.dir / "base" / "model.dom"));

    CHECK(ws("train --mode hc" + common + " --out " + ws.p("hc")).exit_code == 0);
    const auto whc = read_csv(ws.p("hc/penalty.csv"));
    REQUIRE(whc.rows() == 11);
    for (std::size_t i = 0; i < 11; ++i) {
      for (std::size_t j = 0; j < 11; ++j) {
        CHECK(whc(i, j) == whc(j, i));
        if (i != j) CHECK((whc(i, j) == 1.0 || whc(i, j) == 3.0));
      }
    }
  }

  TEST_CASE("hc mode needs a hierarchy") {
    Workspace ws;
    std::ofstream(ws.p("two.json")) << R"({
      "classes": ["bg", "fg"],
      "phantom": {"size": 16, "class_means": {"bg": 0.1, "fg": 0.9}, "background": "bg",
                  "layout": [{"class": "fg", "cx": 0.5, "cy": 0.5, "rx": 0.3, "ry": 0.2}]},
      "train": {"iterations": 5}
    })";
    const std::string cfg = " --config " + ws.p("two.json");
    REQUIRE(ws("phantom" + cfg + " --count 2 --out " + ws.p("d2")).exit_code == 0);
    const auto r = ws("train --mode hc" + cfg + " --data " + ws.p("d2") + " --out " + ws.p("m2"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("hierarchy") != std::string::npos);
    REQUIRE(ws("train" + cfg + " --data " + ws.p("d2") + " --out " + ws.p("m2")).exit_code == 0);
    // A 2-class model against an 11-class dataset.
    ws.make_data();
    CHECK(ws("eval --model " + ws.p("m2/model.dom") + " --data " + ws.p("held") + " --out " +
             ws.p("e2"))
              .exit_code == 2);
  }

  TEST_CASE("eval writes reports and warns on training data") {
    Workspace ws;
    ws.make_data();
    REQUIRE(ws("train --config " + ws.config + " --data " + ws.p("train") + " --out " + ws.p("m"))
                .exit_code == 0);
    const auto before = cli::snapshot(ws.dir / "held");
    const auto r = ws("eval --config " + ws.config + " --model " + ws.p("m/model.dom") + " --data " +
                      ws.p("held") + " --out " + ws.p("e") + " --merged");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("merged (6 classes)") != std::string::npos);
    CHECK(r.output.find("warning") == std::string::npos);
    CHECK(fs::exists(ws.dir / "e" / "report.json"));
    CHECK(fs::exists(ws.dir / "e" / "reliability_merged_Bone.svg"));
    CHECK(cli::snapshot(ws.dir / "held") == before);

    const auto own = ws("eval --config " + ws.config + " --model " + ws.p("m/model.dom") +
                        " --data " + ws.p("train") + " --out " + ws.p("own"));
    CHECK(own.exit_code == 0);
    CHECK(own.output.find("warning:") != std::string::npos);
    CHECK(cli::slurp(ws.dir / "own" / "report.json").find("training set") != std::string::npos);
  }

  TEST_CASE("missing model leaves no partial output") {
    Workspace ws;
    ws.make_data();
    const auto r = ws("eval --model " + ws.p("nope.dom") + " --data " + ws.p("held") + " --out " +
                      ws.p("e"));
    CHECK(r.exit_code == 2);
    CHECK_FALSE(fs::exists(ws.dir / "e"));
  }

  TEST_CASE("standalone penalty construction") {
    Workspace ws;
    std::ofstream(ws.p("c.csv")) << "7,3\n2,8\n";
    CHECK(ws("penalty --from-confusion " + ws.p("c.csv") + " --out " + ws.p("w")).exit_code == 0);
    const auto w = read_csv(ws.p("w/penalty.csv"));
    CHECK(w(0, 1) == doctest::Approx(2.1));
    CHECK(w(1, 0) == doctest::Approx(2.4));
    CHECK(ws("penalty --from-confusion " + ws.p("c.csv") + " --scale 1 --out " + ws.p("w1"))
              .exit_code == 0);
    CHECK(read_csv(ws.p("w1/penalty.csv"))(0, 1) == doctest::Approx(0.7));
    CHECK(ws("penalty --hierarchy --out " + ws.p("h")).exit_code == 0);
    CHECK(read_csv(ws.p("h/penalty.csv")).rows() == 11);
    CHECK(ws("penalty --out " + ws.p("none")).exit_code == 2);
    std::ofstream(ws.p("rect.csv")) << "1,2,3\n";
    CHECK(ws("penalty --from-confusion " + ws.p("rect.csv") + " --out " + ws.p("r")).exit_code == 2);
  }

  TEST_CASE("report re-renders the eval SVGs") {
    Workspace ws;
    ws.make_data();
    REQUIRE(ws("train --config " + ws.config + " --data " + ws.p("train") + " --out " + ws.p("m"))
                .exit_code == 0);
    REQUIRE(ws("eval --config " + ws.config + " --model " + ws.p("m/model.dom") + " --data " +
               ws.p("held") + " --out " + ws.p("e"))
                .exit_code == 0);
    CHECK(ws("report --in " + ws.p("e") + " --out " + ws.p("plots")).exit_code == 0);
    int svgs = 0;
    for (const auto& e : fs::directory_iterator(ws.dir / "plots")) {
      ++svgs;
      CHECK(cli::slurp(e.path()) == cli::slurp(ws.dir / "e" / e.path().filename()));
    }
    CHECK(svgs == 11);
    CHECK(ws("report --in " + ws.p("missing") + " --out " + ws.p("p2")).exit_code == 2);
  }
}
