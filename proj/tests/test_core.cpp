#include <doctest.h>

#include "domino/core.hpp"
#include "helpers.hpp"

using namespace domino;
using testing::error_kind_of;

TEST_SUITE("core") {
  TEST_CASE("one_hot encodes a label") {
    CHECK(one_hot(0, 3) == std::vector<double>{1, 0, 0});
    CHECK(one_hot(2, 3) == std::vector<double>{0, 0, 1});
    CHECK(error_kind_of([] { one_hot(5, 4); }) == ErrorKind::Index);
  }

  TEST_CASE("argmax_map breaks ties toward the lower index") {
    ProbMap p(3, 1, 3, {0.1, 0.7, 0.2, 0.5, 0.5, 0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3});
    const auto a = argmax_map(p);
    CHECK(a[0] == 1);
    CHECK(a[1] == 0);
    CHECK(a[2] == 0);
  }

  TEST_CASE("binary_mask reads pixels row-major") {
    LabelMap zeros(2, 2, 2, std::uint8_t{0});
    CHECK(binary_mask(zeros, 0) == std::vector<Pixel>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    CHECK(binary_mask(zeros, 1).empty());
    LabelMap checker(2, 2, 2, std::vector<std::uint8_t>{0, 1, 1, 0});
    CHECK(binary_mask(checker, 1) == std::vector<Pixel>{{1, 0}, {0, 1}});
    CHECK(error_kind_of([&] { binary_mask(checker, 2); }) == ErrorKind::Index);
  }

  TEST_CASE("label maps reject out-of-range labels and bad shapes") {
    CHECK(error_kind_of([] { LabelMap(2, 1, 2, std::vector<std::uint8_t>{0, 2}); }) ==
          ErrorKind::Validation);
    CHECK(error_kind_of([] { LabelMap(2, 2, 2, std::vector<std::uint8_t>{0, 1}); }) ==
          ErrorKind::Shape);
  }

  TEST_CASE("prob maps enforce the simplex") {
    CHECK_NOTHROW(ProbMap(1, 1, 2, {0.25, 0.75}));
    CHECK(error_kind_of([] { ProbMap(1, 1, 2, {0.5, 0.6}); }) == ErrorKind::Validation);
    CHECK(error_kind_of([] { ProbMap(1, 1, 2, {-0.1, 1.1}); }) == ErrorKind::Validation);
  }

  TEST_CASE("logit maps and images reject non-finite entries") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK(error_kind_of([&] { LogitMap(1, 1, 2, {0.0, nan}); }) == ErrorKind::Numeric);
    CHECK(error_kind_of([&] { Image(1, 1, {nan}); }) == ErrorKind::Numeric);
  }

  TEST_CASE("one_hot_map round-trips through argmax") {
    domino::CounterRng rng(4, 0);
    const auto t = testing::random_labels(rng, 5, 4, 6);
    CHECK(argmax_map(one_hot_map(t)) == t);
  }

  TEST_CASE("class sets require unique names") {
    ClassSet cs({"a", "b", "c"});
    CHECK(cs.index_of("c") == 2);
    CHECK(error_kind_of([&] { (void)cs.index_of("z"); }) == ErrorKind::Config);
    CHECK(error_kind_of([] { ClassSet({"a", "a"}); }) == ErrorKind::Config);
  }
}
