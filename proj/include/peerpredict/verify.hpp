#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "peerpredict/equilibria.hpp"
#include "peerpredict/error.hpp"
#include "peerpredict/mechanism.hpp"
#include "peerpredict/optimizer.hpp"
#include "peerpredict/prior.hpp"
#include "peerpredict/scoring.hpp"

namespace peerpredict {

inline constexpr double kGainTol = 1e-6;

// One (t0, t1) pair per agent; entries need not be equal.
using ProfileN = std::vector<SymmetricStrategy>;

struct DeviationReport {
  double gain = 0.0;
  SymmetricStrategy deviation;
  double payoff = 0.0;  // current expected payment, punishment included
};

namespace detail {

// Probability the agents other than i all report the same bit, given i's signal b.
inline double others_identical_given_signal(const GenerativeModel& model, const Prior& prior, const ProfileN& profile,
                                            std::size_t i, int b) {
  auto f = [&](double p) {
    double all1 = 1.0, all0 = 1.0;
    for (std::size_t k = 0; k < profile.size(); ++k) {
      if (k == i) continue;
      const double r = profile[k].t0 + (profile[k].t1 - profile[k].t0) * p;
      all1 *= r;
      all0 *= 1.0 - r;
    }
    return (b ? p : 1.0 - p) * (all1 + all0);
  };
  return model.expect(f) / prior.marginal(b);
}

}  // namespace detail

// Best unilateral improvement for agent i. Punishment terms enter the payoff of
// both reports identically, since they depend only on the other agents.
inline DeviationReport deviation_gain(const Prior& prior, const MechanismSpec& spec, const ProfileN& profile,
                                      std::size_t i) {
  if (profile.size() < 2 || i >= profile.size()) throw Error(ErrorKind::IndexOutOfRange, "bad profile or agent index");
  DeviationReport rep;
  const double inv = 1.0 / static_cast<double>(profile.size() - 1);
  for (int b = 0; b <= 1; ++b) {
    double z = 0.0;
    for (std::size_t k = 0; k < profile.size(); ++k) {
      if (k == i) continue;
      z += profile[k].t0 * prior.cond(0, b) + profile[k].t1 * prior.cond(1, b);
    }
    z *= inv;
    double pun = 0.0;
    if (spec.punishment > 0.0)
      pun = spec.punishment * detail::others_identical_given_signal(*spec.model, prior, profile, i, b);
    const double e0 = spec.matrix.expected(z, 0), e1 = spec.matrix.expected(z, 1);
    const double own = b ? profile[i].t1 : profile[i].t0;
    rep.payoff += prior.marginal(b) * (own * e1 + (1.0 - own) * e0 - pun);
    const double diff = e1 - e0;
    const double g = own * std::max(0.0, -diff) + (1.0 - own) * std::max(0.0, diff);
    rep.gain += prior.marginal(b) * g;
    const double best = diff > 0.0 ? 1.0 : (diff < 0.0 ? 0.0 : own);
    (b ? rep.deviation.t1 : rep.deviation.t0) = best;
  }
  return rep;
}

inline DeviationReport deviation_gain(const Prior& prior, const PayoffMatrix& pf, const ProfileN& profile, std::size_t i) {
  MechanismSpec spec;
  spec.matrix = pf;
  spec.n_agents = static_cast<int>(profile.size());
  return deviation_gain(prior, spec, profile, i);
}

// Gain for one agent when every agent plays s.
inline double symmetric_gain(const Prior& prior, const PayoffMatrix& pf, const SymmetricStrategy& s) {
  return deviation_gain(prior, pf, ProfileN{s, s}, 0).gain;
}

struct Cluster {
  std::vector<SymmetricStrategy> members;
  SymmetricStrategy center;
  double diameter = 0.0;  // L-infinity extent of the bounding box
};

// Symmetric grid strategies with gain below tol, grouped into 8-connected clusters.
inline std::vector<Cluster> grid_scan(const Prior& prior, const PayoffMatrix& pf, int resolution, double tol = kGainTol) {
  if (resolution < 11) throw Error(ErrorKind::OutOfRange, "resolution must be at least 11");
  const int n = resolution;
  const double h = 1.0 / (n - 1);
  std::vector<char> hit(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      hit[static_cast<std::size_t>(i) * n + j] = symmetric_gain(prior, pf, {i * h, j * h}) < tol;

  std::vector<Cluster> out;
  std::vector<char> seen(hit.size(), 0);
  std::vector<std::pair<int, int>> stack;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t id = static_cast<std::size_t>(i) * n + j;
      if (!hit[id] || seen[id]) continue;
      Cluster c;
      double lo0 = 1, hi0 = 0, lo1 = 1, hi1 = 0, s0 = 0, s1 = 0;
      stack.assign(1, {i, j});
      seen[id] = 1;
      while (!stack.empty()) {
        const auto [a, b] = stack.back();
        stack.pop_back();
        const SymmetricStrategy s{a * h, b * h};
        c.members.push_back(s);
        lo0 = std::min(lo0, s.t0), hi0 = std::max(hi0, s.t0);
        lo1 = std::min(lo1, s.t1), hi1 = std::max(hi1, s.t1);
        s0 += s.t0, s1 += s.t1;
        for (int da = -1; da <= 1; ++da)
          for (int db = -1; db <= 1; ++db) {
            const int x = a + da, y = b + db;
            if (x < 0 || y < 0 || x >= n || y >= n) continue;
            const std::size_t nid = static_cast<std::size_t>(x) * n + y;
            if (hit[nid] && !seen[nid]) {
              seen[nid] = 1;
              stack.push_back({x, y});
            }
          }
      }
      const double m = static_cast<double>(c.members.size());
      c.center = {s0 / m, s1 / m};
      c.diameter = std::max(hi0 - lo0, hi1 - lo1);
      out.push_back(std::move(c));
    }
  }
  return out;
}

// Profiles on a per-agent product grid where every agent's gain is below tol.
// Agents are unordered, so each multiset of strategies is visited once.
inline std::vector<ProfileN> asymmetric_scan(const Prior& prior, const PayoffMatrix& pf, int n, int resolution,
                                             double tol = 1e-9) {
  if (n < 2 || n > 3) throw Error(ErrorKind::OutOfRange, "asymmetric scans support n = 2 or 3");
  if (resolution < 2 || resolution > 21) throw Error(ErrorKind::OutOfRange, "asymmetric scans need resolution <= 21");
  const int g = resolution * resolution;
  const double h = 1.0 / (resolution - 1);
  std::vector<SymmetricStrategy> pts(static_cast<std::size_t>(g));
  for (int a = 0; a < resolution; ++a)
    for (int b = 0; b < resolution; ++b) pts[static_cast<std::size_t>(a * resolution + b)] = {a * h, b * h};

  // Per-signal peer-report probabilities of each grid strategy.
  std::vector<std::array<double, 2>> z(pts.size());
  for (std::size_t s = 0; s < pts.size(); ++s)
    for (int b = 0; b <= 1; ++b) z[s][b] = pts[s].t0 * prior.cond(0, b) + pts[s].t1 * prior.cond(1, b);
  const double q[2] = {prior.q0(), prior.q1()};
  auto gain = [&](std::size_t self, double z0, double z1) {
    double out = 0.0;
    const double zz[2] = {z0, z1};
    for (int b = 0; b <= 1; ++b) {
      const double diff = pf.expected(zz[b], 1) - pf.expected(zz[b], 0);
      const double own = b ? pts[self].t1 : pts[self].t0;
      out += q[b] * (own * std::max(0.0, -diff) + (1.0 - own) * std::max(0.0, diff));
    }
    return out;
  };

  std::vector<ProfileN> found;
  if (n == 2) {
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a; b < pts.size(); ++b)
        if (gain(a, z[b][0], z[b][1]) < tol && gain(b, z[a][0], z[a][1]) < tol) found.push_back({pts[a], pts[b]});
    return found;
  }
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a; b < pts.size(); ++b) {
      for (std::size_t c = b; c < pts.size(); ++c) {
        if (gain(a, 0.5 * (z[b][0] + z[c][0]), 0.5 * (z[b][1] + z[c][1])) >= tol) continue;
        if (gain(b, 0.5 * (z[a][0] + z[c][0]), 0.5 * (z[a][1] + z[c][1])) >= tol) continue;
        if (gain(c, 0.5 * (z[a][0] + z[b][0]), 0.5 * (z[a][1] + z[b][1])) >= tol) continue;
        found.push_back({pts[a], pts[b], pts[c]});
      }
    }
  return found;
}

struct MonteCarloResult {
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline constexpr std::uint64_t kChunks = 64;

struct Accum {
  std::vector<double> mean, m2;
  std::uint64_t count = 0;
};

inline double draw_p(const GenerativeModel& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (m.kind) {
    case ModelKind::Uniform: return m.a + (m.b - m.a) * u(rng);
    case ModelKind::Beta: {
      std::gamma_distribution<double> ga(m.a, 1.0), gb(m.b, 1.0);
      const double x = ga(rng), y = gb(rng);
      return x / (x + y);
    }
    case ModelKind::Discrete: {
      std::discrete_distribution<std::size_t> d(m.weights.begin(), m.weights.end());
      return m.points[d(rng)];
    }
  }
  return 0.0;
}

}  // namespace detail

// Seeded simulation of per-agent payments. Trials are split into fixed chunks,
// each with its own stream, and merged in chunk order.
inline MonteCarloResult monte_carlo(const GenerativeModel& model, const MechanismSpec& spec, const ProfileN& profile,
                                    std::uint64_t trials, std::uint64_t seed, unsigned threads = 0) {
  spec.validate();
  model.validate();
  if (trials < 1) throw Error(ErrorKind::OutOfRange, "trials must be at least 1");
  if (profile.size() != static_cast<std::size_t>(spec.n_agents))
    throw Error(ErrorKind::IndexOutOfRange, "profile size does not match n_agents");
  const std::size_t n = profile.size();
  const auto d = static_cast<std::size_t>(spec.d);
  const std::uint64_t chunks = std::min<std::uint64_t>(detail::kChunks, trials);
  std::vector<detail::Accum> acc(chunks);

  auto run_chunk = [&](std::uint64_t c) {
    const std::uint64_t begin = trials * c / chunks, end = trials * (c + 1) / chunks;
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(sseq);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    detail::Accum& a = acc[c];
    a.mean.assign(n, 0.0);
    a.m2.assign(n, 0.0);
    PaymentRound round;
    round.seed = seed;
    round.reports.assign(n, std::vector<int>(d, 0));
    for (std::uint64_t t = begin; t < end; ++t) {
      round.round_id = t;
      for (std::size_t k = 0; k < d; ++k) {
        const double p = detail::draw_p(model, rng);
        for (std::size_t i = 0; i < n; ++i) {
          const int sig = u(rng) < p;
          const double prob1 = sig ? profile[i].t1 : profile[i].t0;
          round.reports[i][k] = u(rng) < prob1;
        }
      }
      ++a.count;
      for (std::size_t i = 0; i < n; ++i) {
        const double pay = d > 1 ? multidim_pay(spec, round, i)
                                 : (spec.punishment > 0.0 ? mppm_pay(spec, round, i) : ppm_pay(spec, round, i));
        const double delta = pay - a.mean[i];
        a.mean[i] += delta / static_cast<double>(a.count);
        a.m2[i] += delta * (pay - a.mean[i]);
      }
    }
  };

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    for (auto& th : pool) th.join();
  }

  // Chan et al. pairwise merge in chunk order.
  detail::Accum tot;
  tot.mean.assign(n, 0.0);
  tot.m2.assign(n, 0.0);
  for (const auto& a : acc) {
    if (a.count == 0) continue;
    const double na = static_cast<double>(tot.count), nb = static_cast<double>(a.count), nt = na + nb;
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = a.mean[i] - tot.mean[i];
      tot.mean[i] += delta * nb / nt;
      tot.m2[i] += a.m2[i] + delta * delta * na * nb / nt;
    }
    tot.count += a.count;
  }
  MonteCarloResult res;
  res.trials = trials;
  res.seed = seed;
  res.mean = tot.mean;
  res.stderr_.resize(n);
  const double tc = static_cast<double>(trials);
  for (std::size_t i = 0; i < n; ++i)
    res.stderr_[i] = trials > 1 ? std::sqrt(tot.m2[i] / (tc - 1.0) / tc) : 0.0;
  return res;
}

// Supremum estimate of xi over (k, q*): a 60x60 grid with k log-spaced inside
// the focal window, refined by repeated zooms around the best cell. Every
// evaluated value is included in the returned maximum.
struct XiGridResult {
  double best = -1.0;
  double k = 0.0;
  double qstar = 0.0;
  std::size_t evaluations = 0;
};

inline std::pair<double, double> focal_window(const Prior& prior, double qstar) {
  const double lo = prior.q01() / prior.q00();
  const double hi = qstar > prior.q00() ? prior.q11 / prior.q10 : prior.q01() * (1.0 - qstar) / (prior.q10 * qstar);
  return {lo, hi};
}

inline XiGridResult xi_grid_sup(const Prior& prior, int n = 60, int levels = 4) {
  XiGridResult r;
  double a0 = prior.q10, a1 = prior.q11, u0 = 0.0, u1 = 1.0;
  for (int lev = 0; lev < levels; ++lev) {
    const double dq = (a1 - a0) / n, du = (u1 - u0) / n;
    double lb = -1.0, lq = 0.5 * (a0 + a1), lu = 0.5 * (u0 + u1);
    for (int i = 0; i < n; ++i) {
      const double qs = a0 + dq * (i + 0.5);
      const auto [lo, hi] = focal_window(prior, qs);
      if (!(hi > lo)) continue;
      for (int j = 0; j < n; ++j) {
        const double u = u0 + du * (j + 0.5);
        const double k = lo * std::pow(hi / lo, u);
        double v;
        try {
          v = xi(prior, k, qs);
        } catch (const Error&) {
          continue;
        }
        ++r.evaluations;
        if (v > lb) lb = v, lq = qs, lu = u;
        if (v > r.best) {
          r.best = v;
          r.k = k;
          r.qstar = qs;
        }
      }
    }
    a0 = std::max(prior.q10, lq - dq), a1 = std::min(prior.q11, lq + dq);
    u0 = std::max(0.0, lu - du), u1 = std::min(1.0, lu + du);
  }
  return r;
}

}  // namespace peerpredict
