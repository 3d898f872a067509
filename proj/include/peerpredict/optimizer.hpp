#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "peerpredict/equilibria.hpp"
#include "peerpredict/error.hpp"
#include "peerpredict/prior.hpp"
#include "peerpredict/scoring.hpp"

namespace peerpredict {

enum class Branch { A, B };
enum class RegionTag { R1, R2, R3 };

inline const char* region_name(RegionTag r) {
  switch (r) {
    case RegionTag::R1: return "R1";
    case RegionTag::R2: return "R2";
    case RegionTag::R3: return "R3";
  }
  return "?";
}

struct Region {
  RegionTag tag = RegionTag::R1;
  bool mirrored = false;  // witnesses refer to the relabeled prior
  double qstar_a_opt = std::numeric_limits<double>::quiet_NaN();
  double delta_a = std::numeric_limits<double>::quiet_NaN();
  double delta_b = std::numeric_limits<double>::quiet_NaN();
  double xi_a_at_q00 = std::numeric_limits<double>::quiet_NaN();
};

struct GapReport {
  Region region;
  double delta_star = 0.0;
  PayoffMatrix mechanism;
  double qstar_opt = 0.0;
  double k_opt = 0.0;
  std::optional<double> epsilon;
  double t = 0.0;
};

// Truth payoff minus the best other informative equilibrium payoff.
inline double gap(const Prior& prior, const PayoffMatrix& pf) {
  if (!(pf.max() > pf.min())) throw Error(ErrorKind::DegenerateMatrix, "all entries are equal");
  const double slope = (pf.h11 - pf.h10) - (pf.h01 - pf.h00);
  if (!(slope > 0.0)) throw Error(ErrorKind::TruthNotEquilibrium, "matrix does not reward agreement");
  const double qs = break_even(pf);
  if (!(qs > prior.q10 && qs < prior.q11))
    throw Error(ErrorKind::TruthNotEquilibrium, "break-even point outside (q10, q11)");
  const EquilibriumSet set = enumerate(prior, pf);
  double truth = 0.0, best = -std::numeric_limits<double>::infinity();
  for (const auto& e : set.items) {
    if (e.label == EqLabel::Truth)
      truth = e.payoff;
    else if (e.label != EqLabel::Zero && e.label != EqLabel::One)
      best = std::max(best, e.payoff);
  }
  return truth - best;
}

inline double xi(const Prior& prior, double k, double qstar) {
  return gap(prior, normalized_g(prior, k, qstar));
}

inline void require_oriented(const Prior& prior) {
  if (!prior.signal_asymmetric()) throw Error(ErrorKind::SymmetricPrior, "q(0|0) = q(1|1)");
  if (prior.q11 < prior.q00()) throw Error(ErrorKind::MirrorRequired, "relabel bits so that q(1|1) > q(0|0)");
}

// Slope maximizing xi for fixed q*.
inline double k_sup(const Prior& prior, double qstar) {
  if (!(qstar > prior.q10 && qstar < prior.q11))
    throw Error(ErrorKind::OutOfRange, "q* must lie in (q10, q11)");
  const double q00 = prior.q00();
  if (std::abs(qstar - q00) <= kQuadrantTol) throw Error(ErrorKind::Boundary, "q* = q(0|0)");
  if (qstar > q00) return prior.q11 * (1.0 - qstar) / (q00 * qstar);
  require_oriented(prior);
  // Slope of the segment joining the translated TruthOne and Lie points.
  const EquilibriumSet set = enumerate(prior, qstar);
  const ResponsePoint a = translate(prior, qstar, set.find(EqLabel::TruthOne)->point);
  const ResponsePoint b = translate(prior, qstar, set.find(EqLabel::Lie)->point);
  return (a.y - b.y) / (a.x - b.x);
}

inline std::pair<double, double> kappa_iota(const Prior& prior, Branch branch, double qstar) {
  const double q00 = prior.q00(), q01 = prior.q01(), q10 = prior.q10, q11 = prior.q11;
  const double qs = qstar;
  if (branch == Branch::A) {
    if (!(qs > q10 && qs < q11)) throw Error(ErrorKind::OutOfRange, "branch a needs q10 < q* < q11");
    const double c = q01 / (q10 + q01);
    const double num = (q11 - qs) * (qs - q10);
    const double kappa = c * num / (q11 * (1.0 - qs));
    const double iota = c * q10 * num / (qs * (q10 * q11 - (q11 - q00) * qs));
    return {kappa, iota};
  }
  if (!(qs > q10 && qs <= q00)) throw Error(ErrorKind::OutOfRange, "branch b needs q10 < q* <= q00");
  const double c = q01 * (q11 - q00) / (q10 + q01);
  const double num = (qs - q10) * (q00 - qs);
  const double kappa = c * num / (q00 * q10 * (qs - q01));
  const double iota = c * num / ((q00 * q10 + q01 * (qs - 1.0)) * (1.0 - qs));
  return {kappa, iota};
}

inline double optimal_qstar(const Prior& prior, Branch branch) {
  require_oriented(prior);
  const double q00 = prior.q00(), q01 = prior.q01(), q10 = prior.q10, q11 = prior.q11;
  if (branch == Branch::A) return (q10 * q11 - std::sqrt(q10 * q01 * q00 * q11)) / (q11 - q00);
  const double disc = (q10 - 1.0) * q10 * (q10 - q11) * (q10 + q11 - 1.0);
  return (-q10 * q10 - std::sqrt(disc) + q10 + q11 - 1.0) / (q11 - 1.0);
}

inline double delta_a_closed(const Prior& prior) {
  const double q00 = prior.q00(), q01 = prior.q01(), q10 = prior.q10, q11 = prior.q11;
  const double s = std::sqrt(q00 * q10 * q01 * q11);
  return q01 * (q00 * q10 - s) * (s - q01 * q11) /
         ((q01 + q10) * q11 * (q11 - q00) * (s + q11 - q00 - q10 * q11));
}

inline double delta_b_closed(const Prior& prior) {
  const double q00 = prior.q00(), q01 = prior.q01(), q10 = prior.q10, q11 = prior.q11;
  return (q11 - q00) * (q00 * q10 * (q11 - q01) - std::sqrt(q00 * q10 * (q11 - q10) * (q11 - q00))) /
         ((q10 + q01) * q10 * q11 * q00);
}

namespace detail {

inline Region classify_oriented(const Prior& p) {
  Region r;
  const double q00 = p.q00();
  r.qstar_a_opt = optimal_qstar(p, Branch::A);
  r.delta_a = delta_a_closed(p);
  if (q00 <= p.q10) {
    r.tag = RegionTag::R1;
    return r;
  }
  r.delta_b = delta_b_closed(p);
  const auto [ka, ia] = kappa_iota(p, Branch::A, q00);
  r.xi_a_at_q00 = std::min(ka, ia);
  if (r.qstar_a_opt > q00)
    r.tag = r.delta_a >= r.delta_b ? RegionTag::R1 : RegionTag::R2;
  else
    r.tag = r.xi_a_at_q00 <= r.delta_b ? RegionTag::R2 : RegionTag::R3;
  return r;
}

}  // namespace detail

inline Region classify_region(const Prior& prior) {
  if (!prior.signal_asymmetric()) throw Error(ErrorKind::SymmetricPrior, "q(0|0) = q(1|1)");
  if (prior.q11 < prior.q00()) {
    Region r = detail::classify_oriented(prior.mirrored());
    r.mirrored = true;
    return r;
  }
  return detail::classify_oriented(prior);
}

inline double zeta(const Prior& p) {
  return std::sqrt(p.q00() * p.q01() / (p.q10 * p.q11));
}

inline double eta(const Prior& p) {
  const double q00 = p.q00(), q01 = p.q01(), q10 = p.q10, q11 = p.q11;
  return (std::sqrt((q11 - q10) * (q11 - q00) / (q00 * q10)) + q01) / q11;
}

inline GapReport optimal_mechanism(const Prior& prior, std::optional<double> epsilon = std::nullopt) {
  const Region region = classify_region(prior);
  const Prior p = region.mirrored ? prior.mirrored() : prior;
  GapReport rep;
  rep.region = region;
  PayoffMatrix m;
  switch (region.tag) {
    case RegionTag::R1: {
      m = PayoffMatrix{zeta(p), 0.0, 0.0, 1.0};
      const double qs = optimal_qstar(p, Branch::A);
      rep.delta_star = xi(p, k_sup(p, qs), qs);
      break;
    }
    case RegionTag::R2: {
      m = PayoffMatrix{1.0, 0.0, 0.0, eta(p)};
      const double qs = optimal_qstar(p, Branch::B);
      rep.delta_star = xi(p, k_sup(p, qs), qs);
      break;
    }
    case RegionTag::R3: {
      if (!epsilon) throw Error(ErrorKind::EpsilonMissing, "prior is unattainable; pass epsilon");
      const double qs = p.q00() + *epsilon;
      if (!(*epsilon > 0.0) || !(qs < p.q11)) throw Error(ErrorKind::OutOfRange, "epsilon must lie in (0, q11 - q00)");
      m = normalized_g(p, k_sup(p, qs), qs);
      rep.epsilon = epsilon;
      rep.delta_star = gap(p, m);
      break;
    }
  }
  rep.mechanism = region.mirrored ? m.mirrored() : m;
  const LineSet ls = lineset_from_matrix(rep.mechanism);
  rep.qstar_opt = ls.qstar;
  rep.k_opt = slope_k(ls, prior);
  rep.t = enumerate(prior, rep.mechanism).find(EqLabel::Truth)->payoff;
  return rep;
}

}  // namespace peerpredict
