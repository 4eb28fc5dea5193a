#include <doctest.h>

#include <cmath>

#include "domino/loss.hpp"
#include "domino/penalty.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace domino;
using testing::error_kind_of;

namespace {

PenaltyMatrix random_penalty(CounterRng& rng, std::size_t n, double s = 3.0) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m(i, j) = rng.uniform(0.0, s);
  return PenaltyMatrix(m, s);
}

std::vector<std::vector<double>> rows_of(const PenaltyMatrix& w) {
  std::vector<std::vector<double>> r;
  for (std::size_t i = 0; i < w.size(); ++i) r.emplace_back(w.row(i).begin(), w.row(i).end());
  return r;
}

std::vector<int> labels_of(const LabelMap& t) {
  return std::vector<int>(t.data().begin(), t.data().end());
}

}  // namespace

TEST_SUITE("loss") {
  TEST_CASE("softmax closed forms and stability") {
    std::vector<double> v{0, 0, 0};
    softmax_inplace(v);
    for (double x : v) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-15));
    std::vector<double> u{std::log(2.0), 0.0};
    softmax_inplace(u);
    CHECK(u[0] == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(u[1] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    std::vector<double> big{1000.0, 0.0};
    softmax_inplace(big);
    CHECK(std::isfinite(big[0]));
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(big[1] < 1e-300);
  }

  TEST_CASE("cross entropy") {
    LabelMap t(2, 1, 4, std::vector<std::uint8_t>{0, 3});
    CHECK(cross_entropy(one_hot_map(t), t, 0.0) == 0.0);
    ProbMap uni(2, 1, 4, std::vector<double>(8, 0.25));
    CHECK(cross_entropy(uni, t, 0.0) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
    LabelMap t1(1, 1, 2, std::vector<std::uint8_t>{0});
    ProbMap wrong(1, 1, 2, {0.0, 1.0});
    CHECK(cross_entropy(wrong, t1, 1e-8) == doctest::Approx(18.420680743952367).epsilon(1e-12));
  }

  TEST_CASE("soft dice") {
    CounterRng rng(3, 0);
    const auto t = testing::random_labels(rng, 4, 4, 3);
    CHECK(soft_dice_loss(one_hot_map(t), t) == doctest::Approx(0.0).epsilon(1e-6));

    LabelMap t1(1, 1, 2, std::vector<std::uint8_t>{0});
    ProbMap half(1, 1, 2, {0.5, 0.5});
    CHECK(soft_dice_loss(half, t1, 0.0) == doctest::Approx(2.0 / 3).epsilon(1e-15));

    // Class 1 present in truth but never predicted: its dice is ~0.
    LabelMap t2(2, 1, 2, std::vector<std::uint8_t>{0, 1});
    ProbMap none(2, 1, 2, {1.0, 0.0, 1.0, 0.0});
    const double d = soft_dice_loss(none, t2, 1e-12);
    // class 0 dice = 2/3, class 1 dice = 0
    CHECK(d == doctest::Approx(1.0 - (2.0 / 3) / 2).epsilon(1e-9));
  }

  TEST_CASE("domino penalty") {
    DenseMatrix m(3, 3);
    m(0, 1) = 3;
    m(0, 2) = 1;
    PenaltyMatrix w(m, 3);
    LabelMap t(1, 1, 3, std::vector<std::uint8_t>{0});
    ProbMap p(1, 1, 3, {0.7, 0.2, 0.1});
    CHECK(domino_penalty(p, t, w) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(domino_penalty(one_hot_map(t), t, w) == 0.0);
    CHECK(domino_penalty(p, t, PenaltyMatrix::zeros(3)) == 0.0);
  }

  TEST_CASE("beta = 0 reduces exactly to the DiceCE objective") {
    CounterRng rng(11, 0);
    const auto z = testing::random_logits(rng, 6, 5, 4);
    const auto t = testing::random_labels(rng, 6, 5, 4);
    const auto w = random_penalty(rng, 4);
    LossConfig cfg;
    cfg.lambda_ce = 0.7;
    cfg.lambda_dice = 1.3;
    const auto r = total_loss_and_grad(z, t, w, cfg);
    const auto p = softmax_map(z);
    CHECK(r.terms.total ==
          cfg.lambda_ce * cross_entropy(p, t, cfg.epsilon) +
              cfg.lambda_dice * soft_dice_loss(p, t, cfg.epsilon));
  }

  TEST_CASE("strongly peaked logits sit at the optimum") {
    CounterRng rng(5, 0);
    const auto t = testing::random_labels(rng, 4, 4, 3);
    std::vector<double> z(16 * 3, -40.0);
    for (std::size_t i = 0; i < 16; ++i) z[i * 3 + t[i]] = 40.0;
    LossConfig cfg;
    cfg.beta = 1.0;
    const auto r = total_loss_and_grad(LogitMap(4, 4, 3, z), t, random_penalty(rng, 3), cfg);
    CHECK(r.terms.total < 1e-4);
    for (double g : r.grad.data()) CHECK(std::abs(g) < 1e-12);
  }

  TEST_CASE("loss matches the independent oracle and its finite differences") {
    CounterRng rng(21, 0);
    const auto z = testing::random_logits(rng, 8, 8, 4);
    const auto t = testing::random_labels(rng, 8, 8, 4);
    const auto w = random_penalty(rng, 4);
    LossConfig cfg;
    cfg.beta = 0.3;
    const auto r = total_loss_and_grad(z, t, w, cfg);
    const oracle::LossWeights lw{cfg.beta, cfg.lambda_ce, cfg.lambda_dice, cfg.epsilon};
    std::vector<double> zz(z.data().begin(), z.data().end());
    const auto rows = rows_of(w);
    const auto lab = labels_of(t);
    CHECK(r.terms.total == doctest::Approx(oracle::total_loss(zz, lab, 4, rows, lw)).epsilon(1e-13));

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < zz.size(); ++i) {
      const double keep = zz[i];
      zz[i] = keep + h;
      const double up = oracle::total_loss(zz, lab, 4, rows, lw);
      zz[i] = keep - h;
      const double down = oracle::total_loss(zz, lab, 4, rows, lw);
      zz[i] = keep;
      worst = std::max(worst, testing::rel_error(r.grad.data()[i], (up - down) / (2 * h)));
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("penalty gradient is additive in beta") {
    CounterRng rng(8, 0);
    const auto z = testing::random_logits(rng, 5, 5, 3);
    const auto t = testing::random_labels(rng, 5, 5, 3);
    const auto w = random_penalty(rng, 3);
    LossConfig c0, c5;
    c5.beta = 0.5;
    const auto p = softmax_map(z);
    const auto g0 = total_loss_and_grad(z, t, w, c0).grad;
    const auto g5 = total_loss_and_grad(z, t, w, c5).grad;
    const double pixels = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto px = p.pixel(i);
      const auto row = w.row(t[i]);
      double mean_w = 0.0;
      for (std::size_t j = 0; j < 3; ++j) mean_w += row[j] * px[j];
      for (std::size_t k = 0; k < 3; ++k) {
        const double expected = c5.beta / pixels * px[k] * (row[k] - mean_w);
        const double diff = g5.data()[i * 3 + k] - g0.data()[i * 3 + k];
        CHECK(diff == doctest::Approx(expected).epsilon(1e-9).scale(1e-6));
      }
    }
  }

  TEST_CASE("loss config validation") {
    LossConfig c;
    c.beta = 1.5;
    CHECK(error_kind_of([&] { c.validate(); }) == ErrorKind::Argument);
    c.beta = -0.1;
    CHECK(error_kind_of([&] { c.validate(); }) == ErrorKind::Argument);
    c.beta = 1.0;
    CHECK_NOTHROW(c.validate());
    c.epsilon = 0.0;
    CHECK(error_kind_of([&] { c.validate(); }) == ErrorKind::Argument);
  }

  TEST_CASE("shape mismatches are rejected") {
    CounterRng rng(2, 0);
    const auto z = testing::random_logits(rng, 3, 3, 3);
    const auto t = testing::random_labels(rng, 3, 2, 3);
    CHECK(error_kind_of([&] {
            total_loss_and_grad(z, t, PenaltyMatrix::zeros(3), LossConfig{});
          }) == ErrorKind::Shape);
  }
}
