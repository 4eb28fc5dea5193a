#include <doctest.h>

#include "domino/config.hpp"
#include "domino/metrics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace domino;
using testing::error_kind_of;

namespace {

std::vector<Pixel> random_points(CounterRng& rng, std::size_t n) {
  std::vector<Pixel> pts(n);
  for (auto& p : pts) {
    p.x = static_cast<int>(rng.next_u64() % 40);
    p.y = static_cast<int>(rng.next_u64() % 40);
  }
  return pts;
}

// Probability map of identical pixels.
ProbMap constant_probs(int w, int h, std::vector<double> px) {
  std::vector<double> d;
  for (int i = 0; i < w * h; ++i) d.insert(d.end(), px.begin(), px.end());
  return ProbMap(w, h, px.size(), d);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("dice") {
    LabelMap a(4, 2, 2, std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0, 0, 0});
    LabelMap b(4, 2, 2, std::vector<std::uint8_t>{0, 0, 1, 1, 1, 1, 0, 0});
    LabelMap c(4, 2, 2, std::vector<std::uint8_t>{0, 0, 0, 0, 1, 1, 1, 1});
    CHECK(dice(a, a, 1) == 1.0);
    CHECK(dice(a, c, 1) == 0.0);
    CHECK(dice(a, b, 1) == 0.5);
    LabelMap none(2, 1, 2, std::uint8_t{0});
    CHECK(dice(none, none, 1) == 1.0);
  }

  TEST_CASE("hausdorff") {
    CounterRng rng(2, 0);
    const auto pts = random_points(rng, 10);
    CHECK(hausdorff(pts, pts) == 0.0);
    CHECK(hausdorff(std::vector<Pixel>{{0, 0}}, std::vector<Pixel>{{3, 4}}) == 5.0);
    CHECK(error_kind_of([&] { hausdorff(pts, std::vector<Pixel>{}); }) == ErrorKind::Argument);
    for (int trial = 0; trial < 20; ++trial) {
      const auto a = random_points(rng, 20), b = random_points(rng, 20);
      CHECK(hausdorff(a, b) == oracle::hausdorff(a, b));
    }
  }

  TEST_CASE("modified hausdorff") {
    CounterRng rng(3, 0);
    const auto pts = random_points(rng, 10);
    CHECK(modified_hausdorff(pts, pts) == 0.0);
    CHECK(modified_hausdorff(std::vector<Pixel>{{0, 0}, {0, 2}}, std::vector<Pixel>{{0, 0}}) == 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto a = random_points(rng, 1 + rng.next_u64() % 25);
      const auto b = random_points(rng, 1 + rng.next_u64() % 25);
      CHECK(modified_hausdorff(a, b) <= hausdorff(a, b));
      CHECK(modified_hausdorff(a, b) == doctest::Approx(oracle::modified_hausdorff(a, b)).epsilon(1e-12));
    }
  }

  TEST_CASE("top-n accuracy") {
    ProbMap p(1, 1, 3, {0.5, 0.3, 0.2});
    LabelMap t(1, 1, 3, std::vector<std::uint8_t>{1});
    CHECK(top_n_accuracy(p, t, 1) == 0.0);
    CHECK(top_n_accuracy(p, t, 2) == 1.0);
    CHECK(top_n_accuracy(p, t, 3) == 1.0);
    CHECK(error_kind_of([&] { top_n_accuracy(p, t, 0); }) == ErrorKind::Argument);
    CHECK(error_kind_of([&] { top_n_accuracy(p, t, 4); }) == ErrorKind::Argument);

    CounterRng rng(5, 0);
    const auto rp = testing::random_probs(rng, 8, 8, 5);
    const auto rt = testing::random_labels(rng, 8, 8, 5);
    double prev = 0.0;
    for (std::size_t n = 1; n <= 5; ++n) {
      const double acc = top_n_accuracy(rp, rt, n);
      CHECK(acc >= prev);
      prev = acc;
    }
    CHECK(prev == 1.0);
  }

  TEST_CASE("top-1 ties use the lower index") {
    ProbMap p(1, 1, 3, {0.4, 0.4, 0.2});
    CHECK(top_n_accuracy(p, LabelMap(1, 1, 3, std::uint8_t{0}), 1) == 1.0);
    CHECK(top_n_accuracy(p, LabelMap(1, 1, 3, std::uint8_t{1}), 1) == 0.0);
  }

  TEST_CASE("reliability curves") {
    CounterRng rng(4, 0);
    const auto t = testing::random_labels(rng, 6, 6, 3);
    const auto perfect = reliability_curve(one_hot_map(t), t, 1);
    for (std::size_t b = 0; b < perfect.bins(); ++b) {
      if (perfect.counts[b] > 0) CHECK(perfect.mean_confidence[b] == perfect.observed_frequency[b]);
    }
    CHECK(expected_calibration_error(perfect) == 0.0);

    // 10 pixels predicted 0.7 for class 0, 7 of them truly class 0.
    const auto p7 = constant_probs(10, 1, {0.7, 0.3});
    LabelMap t7(10, 1, 2, std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0, 1, 1, 1});
    const auto c7 = reliability_curve(p7, t7, 0);
    CHECK(c7.counts[7] == 10);
    CHECK(c7.mean_confidence[7] == doctest::Approx(0.7));
    CHECK(c7.observed_frequency[7] == doctest::Approx(0.7));

    const auto p9 = constant_probs(10, 1, {0.9, 0.1});
    LabelMap t9(10, 1, 2, std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
    const auto c9 = reliability_curve(p9, t9, 0);
    CHECK(c9.counts[9] == 10);
    CHECK(c9.observed_frequency[9] == 0.5);
    CHECK(expected_calibration_error(c9) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(c9.total() == 10);
  }

  TEST_CASE("ECE is count-weighted") {
    ReliabilityCurve c;
    c.edges = {0.0, 0.5, 1.0};
    c.mean_confidence = {0.3, 0.8};
    c.observed_frequency = {0.1, 0.8};
    c.counts = {5, 5};
    CHECK(expected_calibration_error(c) == doctest::Approx(0.1).epsilon(1e-14));
  }

  TEST_CASE("probability one lands in the top bin") {
    ProbMap p(1, 1, 2, {1.0, 0.0});
    const auto c = reliability_curve(p, LabelMap(1, 1, 2, std::uint8_t{0}), 0);
    CHECK(c.counts.back() == 1);
    CHECK(c.counts.front() == 0);
  }

  TEST_CASE("merging") {
    const GroupMap g({0, 0, 1}, {"ab", "c"});
    ProbMap p(1, 1, 3, {0.2, 0.3, 0.5});
    const auto m = merge_prob(p, g);
    CHECK(m.pixel(0)[0] == 0.5);
    CHECK(m.pixel(0)[1] == 0.5);

    CounterRng rng(7, 0);
    const auto rp = testing::random_probs(rng, 6, 6, 3);
    const ClassSet cs({"a", "b", "c"});
    CHECK(merge_prob(rp, GroupMap::identity(cs)) == rp);
    const auto rt = testing::random_labels(rng, 6, 6, 3);
    CHECK(merge_labels(rt, GroupMap::identity(cs)) == rt);
    const auto mp = merge_prob(rp, g);
    for (std::size_t i = 0; i < mp.num_pixels(); ++i) {
      CHECK(mp.pixel(i)[0] + mp.pixel(i)[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("merged argmax agrees with merged labels under dominance") {
    const auto rc = default_head_config();
    const auto& g = *rc.group_map;
    CounterRng rng(9, 0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> px(11, 0.0);
      const std::size_t winner = rng.next_u64() % 11;
      px[winner] = 0.6;
      double rest = 0.4;
      for (std::size_t k = 0; k < 11; ++k) {
        if (k == winner) continue;
        const double v = rest * rng.uniform() * 0.5;
        px[k] = v;
        rest -= v;
      }
      px[winner] += rest;
      ProbMap p(1, 1, 11, px);
      CHECK(merge_labels(argmax_map(p), g) == argmax_map(merge_prob(p, g)));
    }
  }

  TEST_CASE("head group map") {
    const auto rc = default_head_config();
    REQUIRE(rc.group_map);
    const auto& g = *rc.group_map;
    CHECK(g.coarse_classes() == 6);
    CHECK(g.coarse_of(rc.classes.index_of("cancellous_bone")) ==
          g.coarse_of(rc.classes.index_of("cortical_bone")));
    CHECK(error_kind_of([] { GroupMap({0, 2}, {"a", "b", "c"}); }) == ErrorKind::Argument);
    CHECK(error_kind_of([] { GroupMap({0, 1}, {"a", "a"}); }) == ErrorKind::Argument);
  }

  TEST_CASE("evaluate on perfect predictions") {
    CounterRng rng(10, 0);
    const ClassSet cs({"a", "b", "c", "d"});
    std::vector<LabelMap> truths;
    std::vector<ProbMap> preds;
    for (int i = 0; i < 3; ++i) {
      truths.push_back(testing::random_labels(rng, 8, 8, 4));
      preds.push_back(one_hot_map(truths.back()));
    }
    const GroupMap g({0, 0, 1, 1}, {"ab", "cd"});
    const auto r = evaluate(preds, truths, cs, &g);
    for (const auto* gr : {&r.fine, &*r.merged}) {
      for (const auto& c : gr->classes) {
        CHECK(c.dice == 1.0);
        CHECK(c.ece == 0.0);
        if (c.hausdorff) CHECK(*c.hausdorff == 0.0);
      }
      for (double v : gr->top_n) CHECK(v == 1.0);
      CHECK(gr->mean_ece == 0.0);
    }
    CHECK(r.fine.classes.size() == 4);
    CHECK(r.merged->classes.size() == 2);
    CHECK(r.fine.top_n.size() == 3);
  }

  TEST_CASE("evaluate reports undefined hausdorff for absent classes") {
    const ClassSet cs({"a", "b", "c"});
    LabelMap t(3, 1, 3, std::vector<std::uint8_t>{0, 0, 1});
    const auto r = evaluate(std::vector{one_hot_map(t)}, std::vector{t}, cs);
    CHECK(r.fine.classes[2].support == 0);
    CHECK_FALSE(r.fine.classes[2].hausdorff.has_value());
    CHECK(r.fine.classes[2].hausdorff_undefined == 1);
  }
}
