#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "peerpredict/error.hpp"
#include "peerpredict/prior.hpp"
#include "peerpredict/scoring.hpp"

namespace peerpredict {

inline constexpr double kQuadrantTol = 1e-12;
inline constexpr double kDuplicateTol = 1e-9;
inline constexpr double kHullSlack = 1e-9;

// t0 = theta(1|0), t1 = theta(1|1).
struct SymmetricStrategy {
  double t0 = 0.0;
  double t1 = 0.0;
};

// x = qhat(1|0), y = qhat(1|1).
struct ResponsePoint {
  double x = 0.0;
  double y = 0.0;
};

enum class EqLabel { Zero, One, Truth, Lie, QStarMix, TruthOne, TruthZero, LieOne, LieZero };

inline const char* label_name(EqLabel l) {
  switch (l) {
    case EqLabel::Zero: return "Zero";
    case EqLabel::One: return "One";
    case EqLabel::Truth: return "Truth";
    case EqLabel::Lie: return "Lie";
    case EqLabel::QStarMix: return "QStarMix";
    case EqLabel::TruthOne: return "TruthOne";
    case EqLabel::TruthZero: return "TruthZero";
    case EqLabel::LieOne: return "LieOne";
    case EqLabel::LieZero: return "LieZero";
  }
  return "?";
}

inline std::optional<EqLabel> label_from_name(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(EqLabel::LieZero); ++i) {
    const auto l = static_cast<EqLabel>(i);
    if (s == label_name(l)) return l;
  }
  return std::nullopt;
}

struct Equilibrium {
  EqLabel label = EqLabel::Truth;
  SymmetricStrategy strategy;
  ResponsePoint point;
  double payoff = std::numeric_limits<double>::quiet_NaN();
};

struct EquilibriumSet {
  double qstar = 0.0;
  std::vector<Equilibrium> items;

  std::size_t count() const { return items.size(); }
  const Equilibrium* find(EqLabel l) const {
    for (const auto& e : items)
      if (e.label == l) return &e;
    return nullptr;
  }
};

enum class Quadrant { Tru, One, Zero, Fal, AxisX, AxisY, Center };

inline const char* quadrant_name(Quadrant q) {
  switch (q) {
    case Quadrant::Tru: return "R_tru";
    case Quadrant::One: return "R_one";
    case Quadrant::Zero: return "R_zero";
    case Quadrant::Fal: return "R_fal";
    case Quadrant::AxisX: return "x=q*";
    case Quadrant::AxisY: return "y=q*";
    case Quadrant::Center: return "center";
  }
  return "?";
}

inline ResponsePoint response_point(const Prior& prior, const SymmetricStrategy& s) {
  return ResponsePoint{s.t0 * prior.q00() + s.t1 * prior.q10, s.t0 * prior.q01() + s.t1 * prior.q11};
}

inline SymmetricStrategy strategy_from_point(const Prior& prior, const ResponsePoint& p) {
  const double det = prior.q11 - prior.q10;
  double t0 = (p.x * prior.q11 - p.y * prior.q10) / det;
  double t1 = (p.y * prior.q00() - p.x * prior.q01()) / det;
  auto inside = [](double t) { return t >= -kHullSlack && t <= 1.0 + kHullSlack; };
  if (!inside(t0) || !inside(t1)) throw Error(ErrorKind::OutsideHull, "point is not a response point");
  return SymmetricStrategy{std::clamp(t0, 0.0, 1.0), std::clamp(t1, 0.0, 1.0)};
}

inline Quadrant quadrant(const ResponsePoint& p, double qstar) {
  const double dx = p.x - qstar, dy = p.y - qstar;
  const bool on_x = std::abs(dx) <= kQuadrantTol, on_y = std::abs(dy) <= kQuadrantTol;
  if (on_x && on_y) return Quadrant::Center;
  if (on_x) return Quadrant::AxisX;
  if (on_y) return Quadrant::AxisY;
  if (dx < 0 && dy > 0) return Quadrant::Tru;
  if (dx > 0 && dy > 0) return Quadrant::One;
  if (dx < 0 && dy < 0) return Quadrant::Zero;
  return Quadrant::Fal;
}

// Best-response payoff table by quadrant.
inline double best_response_payoff(const Prior& prior, const LineSet& ls, const ResponsePoint& p) {
  const double q0 = prior.q0(), q1 = prior.q1();
  const double dx = p.x - ls.qstar, dy = p.y - ls.qstar;
  const bool x_hi = dx >= 0.0, y_hi = dy >= 0.0;
  double v;
  if (!x_hi && y_hi)
    v = ls.beta * q0 * dx + ls.alpha * q1 * dy;
  else if (x_hi && y_hi)
    v = ls.alpha * (q0 * dx + q1 * dy);
  else if (!x_hi && !y_hi)
    v = ls.beta * (q0 * dx + q1 * dy);
  else
    v = ls.alpha * q0 * dx + ls.beta * q1 * dy;
  return v + ls.gamma;
}

inline double expected_payoff(const Prior& prior, const PayoffMatrix& pf, const SymmetricStrategy& s) {
  const ResponsePoint r = response_point(prior, s);
  const double u0 = (1.0 - s.t0) * pf.expected(r.x, 0) + s.t0 * pf.expected(r.x, 1);
  const double u1 = (1.0 - s.t1) * pf.expected(r.y, 0) + s.t1 * pf.expected(r.y, 1);
  return prior.q0() * u0 + prior.q1() * u1;
}

namespace detail {

// Pure strategies first, then QStarMix, then the one-sided mixtures.
inline int specificity(EqLabel l) {
  switch (l) {
    case EqLabel::Zero:
    case EqLabel::One:
    case EqLabel::Truth:
    case EqLabel::Lie: return 0;
    case EqLabel::QStarMix: return 1;
    default: return 2;
  }
}

}  // namespace detail

// All symmetric equilibria for a given break-even point; payoffs left NaN.
inline EquilibriumSet enumerate(const Prior& prior, double qstar) {
  if (!(qstar > prior.q10 && qstar < prior.q11))
    throw Error(ErrorKind::OutOfRange, "q* must lie in (q10, q11)");
  const double q00 = prior.q00(), q01 = prior.q01(), q10 = prior.q10, q11 = prior.q11;
  std::vector<std::pair<EqLabel, SymmetricStrategy>> c = {
      {EqLabel::Zero, {0.0, 0.0}},
      {EqLabel::One, {1.0, 1.0}},
      {EqLabel::Truth, {0.0, 1.0}},
      {EqLabel::QStarMix, {qstar, qstar}},
      {EqLabel::TruthZero, {0.0, qstar / q11}},
      {EqLabel::TruthOne, {(qstar - q10) / q00, 1.0}},
  };
  if (q01 <= qstar && qstar <= q00) c.push_back({EqLabel::Lie, {1.0, 0.0}});
  if (q01 <= qstar) c.push_back({EqLabel::LieOne, {1.0, (qstar - q01) / q11}});
  if (qstar <= q00) c.push_back({EqLabel::LieZero, {qstar / q00, 0.0}});

  std::stable_sort(c.begin(), c.end(), [](const auto& a, const auto& b) {
    return detail::specificity(a.first) < detail::specificity(b.first);
  });
  EquilibriumSet out;
  out.qstar = qstar;
  for (const auto& [label, s] : c) {
    bool dup = false;
    for (const auto& e : out.items)
      if (std::max(std::abs(e.strategy.t0 - s.t0), std::abs(e.strategy.t1 - s.t1)) < kDuplicateTol) dup = true;
    if (dup) continue;
    Equilibrium e;
    e.label = label;
    e.strategy = s;
    e.point = response_point(prior, s);
    out.items.push_back(e);
  }
  std::sort(out.items.begin(), out.items.end(),
            [](const Equilibrium& a, const Equilibrium& b) { return a.label < b.label; });
  return out;
}

inline EquilibriumSet enumerate(const Prior& prior, const LineSet& ls) {
  validate(ls);
  EquilibriumSet set = enumerate(prior, ls.qstar);
  for (auto& e : set.items) {
    if (e.label == EqLabel::Zero)
      e.payoff = ls.at(0.0, 0);
    else if (e.label == EqLabel::One)
      e.payoff = ls.at(1.0, 1);
    else
      e.payoff = best_response_payoff(prior, ls, e.point);
  }
  return set;
}

inline EquilibriumSet enumerate(const Prior& prior, const PayoffMatrix& pf) {
  const LineSet ls = lineset_from_matrix(pf);
  EquilibriumSet set = enumerate(prior, ls);
  for (auto& e : set.items) {
    if (e.label == EqLabel::Zero) e.payoff = pf.h00;
    if (e.label == EqLabel::One) e.payoff = pf.h11;
  }
  return set;
}

// Payoff-preserving map into the closure of the truth quadrant.
inline ResponsePoint translate(const Prior& prior, double qstar, const ResponsePoint& p) {
  (void)strategy_from_point(prior, p);
  const double r10 = prior.q1() / prior.q0();  // = q10 / q01
  const double dx = p.x - qstar, dy = p.y - qstar;
  if (dx <= 0.0 && dy >= 0.0) return p;
  if (dx >= 0.0 && dy >= 0.0) return ResponsePoint{qstar, p.y + dx / r10};
  if (dx <= 0.0 && dy <= 0.0) return ResponsePoint{p.x + r10 * dy, qstar};
  return ResponsePoint{qstar + r10 * dy, qstar + dx / r10};
}

struct HullReport {
  bool truth_extreme = false;
  bool lie_equals_truth = false;
  std::vector<EqLabel> neighbors;
  std::vector<EqLabel> hull;  // counter-clockwise, one label per vertex
  std::vector<std::pair<EqLabel, ResponsePoint>> translated;
};

namespace detail {

inline double cross(const ResponsePoint& o, const ResponsePoint& a, const ResponsePoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; collinear points are dropped. Returns indices.
inline std::vector<std::size_t> convex_hull(const std::vector<ResponsePoint>& pts, double tol) {
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
  });
  if (idx.size() < 3) return idx;
  std::vector<std::size_t> h(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && cross(pts[h[k - 2]], pts[h[k - 1]], pts[idx[i]]) <= tol) --k;
    h[k++] = idx[i];
  }
  for (std::size_t i = idx.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(pts[h[k - 2]], pts[h[k - 1]], pts[idx[i]]) <= tol) --k;
    h[k++] = idx[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace detail

inline HullReport hull_report(const Prior& prior, double qstar) {
  const EquilibriumSet set = enumerate(prior, qstar);
  HullReport rep;
  std::vector<ResponsePoint> pts;
  std::vector<EqLabel> labels;
  std::size_t truth_idx = 0;
  for (const auto& e : set.items) {
    if (e.label == EqLabel::Zero || e.label == EqLabel::One) continue;
    const ResponsePoint f = translate(prior, qstar, e.point);
    rep.translated.push_back({e.label, f});
    bool merged = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::max(std::abs(pts[i].x - f.x), std::abs(pts[i].y - f.y)) < kDuplicateTol) {
        merged = true;
        if ((labels[i] == EqLabel::Truth && e.label == EqLabel::Lie) ||
            (labels[i] == EqLabel::Lie && e.label == EqLabel::Truth))
          rep.lie_equals_truth = true;
        if (e.label == EqLabel::Truth) {
          labels[i] = EqLabel::Truth;
          truth_idx = i;
        }
      }
    }
    if (merged) continue;
    if (e.label == EqLabel::Truth) truth_idx = pts.size();
    pts.push_back(f);
    labels.push_back(e.label);
  }
  const auto h = detail::convex_hull(pts, 1e-14);
  for (std::size_t i = 0; i < h.size(); ++i) {
    rep.hull.push_back(labels[h[i]]);
    if (h[i] == truth_idx) {
      rep.truth_extreme = true;
      rep.neighbors = {labels[h[(i + h.size() - 1) % h.size()]], labels[h[(i + 1) % h.size()]]};
    }
  }
  return rep;
}

struct PlotSample {
  double x = 0.0;
  double y = 0.0;
  Quadrant quadrant = Quadrant::Tru;
  double payoff = 0.0;
};

// Samples R on a uniform strategy grid (t0 outer, t1 inner).
inline std::vector<PlotSample> plot_data(const Prior& prior, const LineSet& ls, int resolution) {
  if (resolution < 2) throw Error(ErrorKind::OutOfRange, "resolution must be at least 2");
  validate(ls);
  std::vector<PlotSample> out;
  out.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      const SymmetricStrategy s{double(i) / (resolution - 1), double(j) / (resolution - 1)};
      const ResponsePoint p = response_point(prior, s);
      out.push_back(PlotSample{p.x, p.y, quadrant(p, ls.qstar), best_response_payoff(prior, ls, p)});
    }
  }
  return out;
}

}  // namespace peerpredict
