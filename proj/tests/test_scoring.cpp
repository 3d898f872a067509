#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "peerpredict/equilibria.hpp"
#include "peerpredict/scoring.hpp"

namespace pp = peerpredict;

namespace {

const pp::Prior kRestaurant{28.0 / 45, 17.0 / 30};

}  // namespace

TEST(Scoring, BrierValues) {
  EXPECT_NEAR(pp::brier(1, 28.0 / 45), 0.715, 5e-4);
  EXPECT_NEAR(pp::brier(0, 17.0 / 30), 0.358, 5e-4);
  EXPECT_NEAR(pp::brier(0.5, 0.5), 0.5, 1e-15);
  for (int i = 0; i <= 100; ++i) EXPECT_LE(pp::brier(0.5, i / 100.0), 0.5 + 1e-15);
  EXPECT_THROW(pp::brier(1, 1.5), pp::Error);
}

TEST(Scoring, BrierMatrixRestaurant) {
  const pp::PayoffMatrix m = pp::matrix_from_rule(pp::brier_rule(), kRestaurant);
  EXPECT_NEAR(m.h11, 0.715, 5e-4);
  EXPECT_NEAR(m.h10, 0.624, 5e-4);
  EXPECT_NEAR(m.h01, 0.226, 5e-4);
  EXPECT_NEAR(m.h00, 0.358, 5e-4);
}

TEST(Scoring, BreakEvenBrier) {
  EXPECT_NEAR(pp::break_even(pp::brier_rule(), kRestaurant), 107.0 / 180, 1e-12);
  EXPECT_EQ(pp::break_even(pp::LineSet{1, -1, 0.4, 0}), 0.4);
}

// Bisection on PS(x, q11) - PS(x, q10) for an affinely shifted Brier rule.
TEST(Scoring, BreakEvenShiftedBrier) {
  pp::ScoringRule r = pp::brier_rule();
  pp::ScoringRule s;
  s.at0 = [r](double q) { return 3.0 * r.at0(q) - 2.0; };
  s.at1 = [r](double q) { return 3.0 * r.at1(q) - 2.0; };
  const double root = oracle::bisect(
      [&](double x) { return s.eval(x, kRestaurant.q11) - s.eval(x, kRestaurant.q10); }, 0.0, 1.0);
  EXPECT_NEAR(pp::break_even(s, kRestaurant), root, 1e-12);
  EXPECT_NEAR(root, 107.0 / 180, 1e-12);
}

TEST(Scoring, BreakEvenInsideForRandomPriors) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), b = u(rng);
    const pp::Prior p{std::max(a, b), std::min(a, b)};
    if (p.q11 - p.q10 < 1e-6) continue;
    const double q = pp::break_even(pp::brier_rule(), p);
    EXPECT_GT(q, p.q10);
    EXPECT_LT(q, p.q11);
  }
}

TEST(Scoring, ConstantRuleIsNotStrict) {
  pp::ScoringRule c;
  c.at0 = [](double) { return 0.3; };
  c.at1 = [](double) { return 0.3; };
  const pp::PayoffMatrix m = pp::matrix_from_rule(c, kRestaurant);
  EXPECT_EQ(m, (pp::PayoffMatrix{0.3, 0.3, 0.3, 0.3}));
  try {
    pp::break_even(c, kRestaurant);
    FAIL();
  } catch (const pp::Error& e) {
    EXPECT_EQ(e.kind(), pp::ErrorKind::NotStrict);
  }
}

TEST(Scoring, LineSetToMatrixDirectEvaluation) {
  const pp::LineSet ls{1, -1, 0.5, 0};
  const pp::PayoffMatrix m = pp::lineset_to_matrix(ls);
  EXPECT_EQ(m, (pp::PayoffMatrix{0.5, -0.5, -0.5, 0.5}));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2), uq(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    pp::LineSet l{u(rng), u(rng), uq(rng), u(rng)};
    if (l.beta >= l.alpha) std::swap(l.alpha, l.beta);
    if (l.beta == l.alpha) continue;
    const pp::PayoffMatrix g = pp::lineset_to_matrix(l);
    EXPECT_NEAR(g.h11, l.alpha * (1 - l.qstar) + l.gamma, 1e-14);
    EXPECT_NEAR(g.h10, l.beta * (1 - l.qstar) + l.gamma, 1e-14);
    EXPECT_NEAR(g.h01, -l.alpha * l.qstar + l.gamma, 1e-14);
    EXPECT_NEAR(g.h00, -l.beta * l.qstar + l.gamma, 1e-14);
    const pp::LineSet back = pp::lineset_from_matrix(g);
    EXPECT_NEAR(back.alpha, l.alpha, 1e-12);
    EXPECT_NEAR(back.beta, l.beta, 1e-12);
    EXPECT_NEAR(back.qstar, l.qstar, 1e-10);
    EXPECT_NEAR(back.gamma, l.gamma, 1e-10);
  }
  EXPECT_THROW(pp::lineset_to_matrix(pp::LineSet{1, 1, 0.5, 0}), pp::Error);
}

TEST(Scoring, NormalizeBasics) {
  const pp::PayoffMatrix n = pp::normalize(pp::PayoffMatrix{2, 0, 0, 1});
  EXPECT_EQ(n, (pp::PayoffMatrix{1, 0, 0, 0.5}));
  EXPECT_EQ(pp::normalize(n), n);
  try {
    pp::normalize(pp::PayoffMatrix{1, 1, 1, 1});
    FAIL();
  } catch (const pp::Error& e) {
    EXPECT_EQ(e.kind(), pp::ErrorKind::DegenerateMatrix);
  }
}

TEST(Scoring, NormalizeIdempotentRandom) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const pp::PayoffMatrix m{u(rng), u(rng), u(rng), u(rng)};
    const pp::PayoffMatrix n = pp::normalize(m);
    EXPECT_EQ(n.min(), 0.0);
    EXPECT_EQ(n.max(), 1.0);
    EXPECT_EQ(pp::normalize(n), n);
  }
}

TEST(Scoring, NormalizedGDependsOnlyOnKAndQstar) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ua(0.1, 4), ug(-3, 3), uk(0.2, 3);
  for (int i = 0; i < 200; ++i) {
    const double k = uk(rng);
    const double qs = kRestaurant.q10 + (kRestaurant.q11 - kRestaurant.q10) * (i + 0.5) / 200;
    const pp::PayoffMatrix ref = pp::normalized_g(kRestaurant, k, qs);
    for (int j = 0; j < 2; ++j) {
      const double alpha = ua(rng), gamma = ug(rng);
      const pp::LineSet ls{alpha, -k * alpha * kRestaurant.q10 / kRestaurant.q01(), qs, gamma};
      const pp::PayoffMatrix n = pp::normalize(pp::lineset_to_matrix(ls));
      for (int e = 0; e < 4; ++e) EXPECT_NEAR(n.entries()[e], ref.entries()[e], 1e-12);
    }
  }
}

TEST(Scoring, LineSetFromKQstar) {
  const pp::LineSet ls = pp::lineset_from_k_qstar(1.0, 0.6, kRestaurant);
  EXPECT_NEAR(ls.beta, -1.5, 1e-14);
  EXPECT_EQ(ls.alpha, 1.0);
  EXPECT_EQ(ls.gamma, 0.0);
  for (double k : {1e-6, 0.3, 1.0, 7.5}) EXPECT_NEAR(pp::slope_k(pp::lineset_from_k_qstar(k, 0.6, kRestaurant), kRestaurant), k, 1e-12 * k);
  EXPECT_THROW(pp::lineset_from_k_qstar(0.0, 0.6, kRestaurant), pp::Error);
  EXPECT_THROW(pp::lineset_from_k_qstar(1.0, 0.7, kRestaurant), pp::Error);
}

// Normalization keeps both the contour slope and the equilibrium set.
TEST(Scoring, NormalizePreservesSlopeAndEquilibria) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3), uq(0.02, 0.98);
  int checked = 0;
  while (checked < 300) {
    const double a = uq(rng), b = uq(rng);
    const pp::Prior p{std::max(a, b), std::min(a, b)};
    const pp::PayoffMatrix m{u(rng), u(rng), u(rng), u(rng)};
    pp::LineSet ls;
    try {
      ls = pp::lineset_from_matrix(m);
    } catch (const pp::Error&) {
      continue;
    }
    if (!(ls.qstar > p.q10 + 1e-6 && ls.qstar < p.q11 - 1e-6)) continue;
    const pp::PayoffMatrix n = pp::normalize(m);
    EXPECT_NEAR(pp::slope_k(pp::lineset_from_matrix(n), p), pp::slope_k(ls, p), 1e-9);
    const auto e1 = pp::enumerate(p, m), e2 = pp::enumerate(p, n);
    ASSERT_EQ(e1.count(), e2.count());
    for (std::size_t i = 0; i < e1.count(); ++i) {
      EXPECT_EQ(e1.items[i].label, e2.items[i].label);
      EXPECT_NEAR(e1.items[i].strategy.t0, e2.items[i].strategy.t0, 1e-9);
      EXPECT_NEAR(e1.items[i].strategy.t1, e2.items[i].strategy.t1, 1e-9);
    }
    ++checked;
  }
}

TEST(Scoring, ConvexGeneratorAgreesWithBrier) {
  const pp::PayoffMatrix b = pp::matrix_from_rule(pp::brier_rule(), kRestaurant);
  const pp::LineSet ls = pp::lineset_from_matrix(b);
  const pp::ScoringRule r = pp::convex_generator(ls, kRestaurant);
  const pp::PayoffMatrix g = pp::matrix_from_rule(r, kRestaurant);
  for (int e = 0; e < 4; ++e) EXPECT_NEAR(g.entries()[e], b.entries()[e], 1e-9);
  // Generic branch, just inside the tangent points.
  const double eps = 1e-9;
  EXPECT_NEAR(r.at1(kRestaurant.q11 - eps), b.h11, 1e-6);
  EXPECT_NEAR(r.at0(kRestaurant.q10 + eps), b.h00, 1e-6);
}

TEST(Scoring, ConvexGeneratorSymmetric) {
  const pp::Prior p{0.7, 0.3};
  const pp::ScoringRule r = pp::convex_generator(pp::LineSet{1, -1, 0.5, 0}, p);
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    EXPECT_NEAR(r.generator(x), r.generator(1 - x), 1e-12);
  }
}

TEST(Scoring, ConvexGeneratorProperOnGrid) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> uq(0.05, 0.95), ua(0.2, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = uq(rng), b = uq(rng);
    const pp::Prior p{std::max(a, b), std::min(a, b)};
    if (p.q11 - p.q10 < 0.05) continue;
    const double qs = p.q10 + (p.q11 - p.q10) * (0.2 + 0.6 * uq(rng));
    const pp::ScoringRule r = pp::convex_generator(pp::LineSet{ua(rng), -ua(rng), qs, 0.0}, p);
    for (int i = 0; i <= 100; ++i) {
      const double pr = i / 100.0;
      int best = -1;
      double bv = -1e300;
      for (int j = 0; j <= 100; ++j) {
        const double v = r.eval(pr, j / 100.0);
        if (v > bv) bv = v, best = j;
      }
      EXPECT_EQ(best, i) << "trial " << trial << " p " << pr;
    }
  }
}

TEST(Scoring, ConvexGeneratorInfeasible) {
  try {
    pp::convex_generator(pp::LineSet{1, -1, 0.9, 0}, kRestaurant);
    FAIL();
  } catch (const pp::Error& e) {
    EXPECT_EQ(e.kind(), pp::ErrorKind::InfeasibleTangents);
  }
  EXPECT_THROW(pp::convex_generator(pp::LineSet{-1, 1, 0.6, 0}, kRestaurant), pp::Error);
}

// Positive affine transforms of the outputs keep the argmax.
TEST(Scoring, AffineShiftKeepsArgmax) {
  const pp::ScoringRule r = pp::brier_rule();
  for (int i = 0; i <= 50; ++i) {
    const double pr = i / 50.0;
    int b1 = -1, b2 = -1;
    double v1 = -1e300, v2 = -1e300;
    for (int j = 0; j <= 50; ++j) {
      const double v = r.eval(pr, j / 50.0), w = 2.5 * v - 7.0;
      if (v > v1) v1 = v, b1 = j;
      if (w > v2) v2 = w, b2 = j;
    }
    EXPECT_EQ(b1, b2);
    EXPECT_EQ(b1, i);
  }
}

// B(p,q) = f(q) p + g(q): f increasing, g'(q) = -q f'(q).
TEST(Scoring, BrierDecomposition) {
  const pp::ScoringRule r = pp::brier_rule();
  auto f = [&](double q) { return r.at1(q) - r.at0(q); };
  auto g = [&](double q) { return r.at0(q); };
  const double h = 1e-5;
  for (int i = 1; i < 100; ++i) {
    const double q = i / 100.0;
    const double fp = (f(q + h) - f(q - h)) / (2 * h), gp = (g(q + h) - g(q - h)) / (2 * h);
    EXPECT_GT(fp, 0);
    EXPECT_NEAR(gp, -q * fp, 1e-6);
  }
}

TEST(Scoring, MatrixMirror) {
  const pp::PayoffMatrix m{1, 2, 3, 4};
  EXPECT_EQ(m.mirrored(), (pp::PayoffMatrix{4, 3, 2, 1}));
  EXPECT_EQ(m.mirrored().mirrored(), m);
  EXPECT_EQ(m.at(1, 0), 2);
  EXPECT_EQ(m.at(0, 1), 3);
}
