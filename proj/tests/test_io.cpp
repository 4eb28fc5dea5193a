#include <doctest.h>

#include <sstream>

#include "domino/dom1.hpp"
#include "helpers.hpp"

using namespace domino;
using testing::error_kind_of;

TEST_SUITE("io") {
  TEST_CASE("DOM1 tensors round-trip") {
    CounterRng rng(6, 0);
    const auto labels = testing::random_labels(rng, 5, 3, 7);
    const auto probs = testing::random_probs(rng, 4, 2, 3);
    std::stringstream a, b;
    dom1::write(a, dom1::to_tensor(labels));
    dom1::write(b, dom1::to_tensor(probs));
    CHECK(dom1::to_label_map(dom1::read(a), 7) == labels);
    CHECK(dom1::to_prob_map(dom1::read(b)) == probs);
  }

  TEST_CASE("DOM1 header layout") {
    std::stringstream s;
    dom1::write(s, dom1::to_tensor(DenseMatrix(2, 3, 1.5)));
    const std::string bytes = s.str();
    CHECK(bytes.rfind("DOM1 f64 2 2 3\n", 0) == 0);
    CHECK(bytes.size() == 15 + 6 * 8);
  }

  TEST_CASE("DOM1 parse errors name the offset") {
    std::stringstream s;
    dom1::write(s, dom1::to_tensor(Image(2, 2, {0.1, 0.2, 0.3, 0.4})));
    const std::string bytes = s.str();
    std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
    try {
      dom1::read(truncated);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      CHECK(std::string(e.what()).find("at byte") != std::string::npos);
    }
    std::istringstream magic("DOM2 f64 1 1\n");
    CHECK(error_kind_of([&] { dom1::read(magic); }) == ErrorKind::Parse);
    std::istringstream dtype("DOM1 i32 1 1\n");
    CHECK(error_kind_of([&] { dom1::read(dtype); }) == ErrorKind::Parse);
  }

  TEST_CASE("label tensors are checked against the class count") {
    const LabelMap m(2, 1, 5, std::vector<std::uint8_t>{0, 4});
    CHECK(error_kind_of([&] { dom1::to_label_map(dom1::to_tensor(m), 3); }) ==
          ErrorKind::Validation);
  }

  TEST_CASE("CSV matrices round-trip bit-exactly") {
    CounterRng rng(12, 0);
    std::vector<double> d(12);
    for (auto& v : d) v = rng.uniform(-1e3, 1e3) / 3.0;
    const DenseMatrix m(3, 4, d);
    std::stringstream s;
    csv::write_matrix(s, m);
    CHECK(csv::read_matrix(s) == m);
  }

  TEST_CASE("CSV errors name the line") {
    std::istringstream ragged("1,2\n3\n");
    try {
      csv::read_matrix(ragged);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::istringstream junk("1,x\n");
    CHECK(error_kind_of([&] { csv::read_matrix(junk); }) == ErrorKind::Parse);
    std::istringstream empty("");
    CHECK(error_kind_of([&] { csv::read_matrix(empty); }) == ErrorKind::Parse);
  }

  TEST_CASE("atomic writes replace the target") {
    testing::TempDir dir("atomic");
    write_file_atomic(dir / "f.txt", "one");
    write_file_atomic(dir / "f.txt", "two");
    CHECK(read_file(dir / "f.txt") == "two");
    CHECK_FALSE(std::filesystem::exists(dir / "f.txt.tmp"));
  }
}
