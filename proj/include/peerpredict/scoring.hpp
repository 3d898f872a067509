#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>

#include "peerpredict/error.hpp"
#include "peerpredict/prior.hpp"

namespace peerpredict {

inline constexpr double kSnapTol = 1e-12;

// l(x,1) = alpha (x - q*) + gamma, l(x,0) = beta (x - q*) + gamma.
struct LineSet {
  double alpha = 1.0;
  double beta = -1.0;
  double qstar = 0.5;
  double gamma = 0.0;

  double at(double x, int report) const {
    return (report ? alpha : beta) * (x - qstar) + gamma;
  }
};

inline void validate(const LineSet& ls) {
  if (!(ls.beta < ls.alpha)) throw Error(ErrorKind::NotStrict, "line-set needs beta < alpha");
}

// h_{peer report, own report}.
struct PayoffMatrix {
  double h11 = 0.0;
  double h10 = 0.0;
  double h01 = 0.0;
  double h00 = 0.0;

  double at(int peer, int own) const {
    if (peer) return own ? h11 : h10;
    return own ? h01 : h00;
  }
  std::array<double, 4> entries() const { return {h11, h10, h01, h00}; }
  double min() const { return std::min({h11, h10, h01, h00}); }
  double max() const { return std::max({h11, h10, h01, h00}); }
  // Expected payment for reporting `own` when the peer reports 1 with probability z.
  double expected(double z, int own) const { return z * at(1, own) + (1.0 - z) * at(0, own); }
  // Swap the roles of 0 and 1.
  PayoffMatrix mirrored() const { return PayoffMatrix{h00, h01, h10, h11}; }

  bool operator==(const PayoffMatrix&) const = default;
};

// PS(0,q) and PS(1,q); an optional convex generator r with derivative.
struct ScoringRule {
  std::function<double(double)> at0;
  std::function<double(double)> at1;
  std::function<double(double)> generator;
  std::function<double(double)> generator_slope;

  // Affine extension in the first argument.
  double eval(double p, double q) const { return p * at1(q) + (1.0 - p) * at0(q); }
};

inline double brier(double p, double q) {
  if (!(q >= 0.0 && q <= 1.0) || !(p >= 0.0 && p <= 1.0))
    throw Error(ErrorKind::OutOfRange, "brier arguments must lie in [0,1]");
  return 2.0 * p * q + 2.0 * (1.0 - p) * (1.0 - q) - q * q - (1.0 - q) * (1.0 - q);
}

inline ScoringRule brier_rule() {
  ScoringRule r;
  r.at0 = [](double q) { return brier(0.0, q); };
  r.at1 = [](double q) { return brier(1.0, q); };
  r.generator = [](double q) { return q * q + (1.0 - q) * (1.0 - q); };
  r.generator_slope = [](double q) { return 4.0 * q - 2.0; };
  return r;
}

inline double break_even(const LineSet& ls) { return ls.qstar; }

// Peer probability at which reporting 0 and 1 pay the same.
inline double break_even(const PayoffMatrix& pf) {
  const double slope = (pf.h11 - pf.h10) - (pf.h01 - pf.h00);
  if (!(std::abs(slope) > 1e-15 * std::max(1.0, std::abs(pf.max()) + std::abs(pf.min()))))
    throw Error(ErrorKind::NotStrict, "reports 0 and 1 pay the same at every peer probability");
  return (pf.h00 - pf.h01) / slope;
}

inline PayoffMatrix matrix_from_rule(const ScoringRule& rule, const Prior& prior) {
  return PayoffMatrix{rule.at1(prior.q11), rule.at1(prior.q10), rule.at0(prior.q11), rule.at0(prior.q10)};
}

inline double break_even(const ScoringRule& rule, const Prior& prior) {
  const double q = break_even(matrix_from_rule(rule, prior));
  if (!(q > prior.q10 && q < prior.q11))
    throw Error(ErrorKind::NotStrict, "break-even point outside (q10, q11)");
  return q;
}

inline PayoffMatrix lineset_to_matrix(const LineSet& ls) {
  validate(ls);
  return PayoffMatrix{ls.at(1.0, 1), ls.at(1.0, 0), ls.at(0.0, 1), ls.at(0.0, 0)};
}

// Inverse of lineset_to_matrix.
inline LineSet lineset_from_matrix(const PayoffMatrix& pf) {
  LineSet ls;
  ls.alpha = pf.h11 - pf.h01;
  ls.beta = pf.h10 - pf.h00;
  if (!(ls.beta < ls.alpha)) throw Error(ErrorKind::NotStrict, "matrix does not reward agreement");
  ls.qstar = break_even(pf);
  ls.gamma = pf.expected(ls.qstar, 1);
  return ls;
}

inline PayoffMatrix normalize(const PayoffMatrix& pf) {
  const double lo = pf.min(), hi = pf.max();
  if (!(hi > lo)) throw Error(ErrorKind::DegenerateMatrix, "all entries are equal");
  auto n = [&](double v) {
    if (std::abs(v - lo) <= kSnapTol) return 0.0;
    if (std::abs(hi - v) <= kSnapTol) return 1.0;
    return (v - lo) / (hi - lo);
  };
  return PayoffMatrix{n(pf.h11), n(pf.h10), n(pf.h01), n(pf.h00)};
}

// Contour slope of the truth quadrant: -beta q01 / (alpha q10).
inline double slope_k(const LineSet& ls, const Prior& prior) {
  return -ls.beta * prior.q01() / (ls.alpha * prior.q10);
}

inline LineSet lineset_from_k_qstar(double k, double qstar, const Prior& prior) {
  if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorKind::OutOfRange, "k must be positive");
  if (!(qstar > prior.q10 && qstar < prior.q11))
    throw Error(ErrorKind::OutOfRange, "q* must lie in (q10, q11)");
  return LineSet{1.0, -k * prior.q10 / prior.q01(), qstar, 0.0};
}

// Normalized matrix of the (k, q*) line-set.
inline PayoffMatrix normalized_g(const Prior& prior, double k, double qstar) {
  return normalize(lineset_to_matrix(lineset_from_k_qstar(k, qstar, prior)));
}

namespace detail {

// Convex r on [0,1] whose tangents at q10 and q11 are l(.,0) and l(.,1).
// Quadratic Bezier between the tangent points, quadratic extension outside.
struct TangentGenerator {
  double q10, q11, qstar, y0, yc, y2;
  double left_curv, right_curv, left_slope, right_slope;

  TangentGenerator(const LineSet& ls, const Prior& prior)
      : q10(prior.q10), q11(prior.q11), qstar(ls.qstar),
        y0(ls.at(prior.q10, 0)), yc(ls.gamma), y2(ls.at(prior.q11, 1)),
        left_slope(ls.beta), right_slope(ls.alpha) {
    left_curv = 0.5 * second(0.0);
    right_curv = 0.5 * second(1.0);
  }

  double A() const { return q10 - 2.0 * qstar + q11; }
  double B() const { return 2.0 * (qstar - q10); }
  double Ay() const { return y0 - 2.0 * yc + y2; }
  double By() const { return 2.0 * (yc - y0); }

  double param(double x) const {
    const double c = q10 - x;
    const double disc = std::max(0.0, B() * B() - 4.0 * A() * c);
    return std::clamp(-2.0 * c / (B() + std::sqrt(disc)), 0.0, 1.0);
  }
  double second(double s) const {
    const double xp = B() + 2.0 * A() * s, yp = By() + 2.0 * Ay() * s;
    return (xp * 2.0 * Ay() - yp * 2.0 * A()) / (xp * xp * xp);
  }

  double value(double x) const {
    if (x < q10) return y0 + left_slope * (x - q10) + left_curv * (x - q10) * (x - q10);
    if (x > q11) return y2 + right_slope * (x - q11) + right_curv * (x - q11) * (x - q11);
    const double s = param(x);
    return y0 + By() * s + Ay() * s * s;
  }
  double slope(double x) const {
    if (x < q10) return left_slope + 2.0 * left_curv * (x - q10);
    if (x > q11) return right_slope + 2.0 * right_curv * (x - q11);
    const double s = param(x);
    return (By() + 2.0 * Ay() * s) / (B() + 2.0 * A() * s);
  }
};

}  // namespace detail

// Strictly proper rule PS(p,q) = r(q) + r'(q)(p - q) agreeing with ls at q10, q11.
inline ScoringRule convex_generator(const LineSet& ls, const Prior& prior) {
  if (!(ls.beta < ls.alpha)) throw Error(ErrorKind::InfeasibleTangents, "tangent slopes need beta < alpha");
  if (!(ls.qstar > prior.q10 && ls.qstar < prior.q11))
    throw Error(ErrorKind::InfeasibleTangents, "tangent lines meet outside (q10, q11)");
  auto g = std::make_shared<detail::TangentGenerator>(ls, prior);
  ScoringRule r;
  // Exact line-set values at the two tangent points.
  r.at0 = [g, ls](double q) {
    if (q == g->q10) return ls.at(0.0, 0);
    if (q == g->q11) return ls.at(0.0, 1);
    return g->value(q) - q * g->slope(q);
  };
  r.at1 = [g, ls](double q) {
    if (q == g->q10) return ls.at(1.0, 0);
    if (q == g->q11) return ls.at(1.0, 1);
    return g->value(q) + (1.0 - q) * g->slope(q);
  };
  r.generator = [g](double q) { return g->value(q); };
  r.generator_slope = [g](double q) { return g->slope(q); };
  return r;
}

}  // namespace peerpredict
