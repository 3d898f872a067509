#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "peerpredict/equilibria.hpp"
#include "peerpredict/error.hpp"
#include "peerpredict/optimizer.hpp"
#include "peerpredict/prior.hpp"
#include "peerpredict/scoring.hpp"

namespace peerpredict {

// Stateless keyed generator: splitmix64 finalizer over (seed, round, agent, stream).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t keyed_draw(std::uint64_t seed, std::uint64_t round, std::uint64_t agent, std::uint64_t stream) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ round);
  h = mix64(h ^ agent);
  return mix64(h ^ stream);
}

// Uniform integer in [0, n).
inline std::uint64_t keyed_index(std::uint64_t n, std::uint64_t seed, std::uint64_t round, std::uint64_t agent,
                                 std::uint64_t stream) {
  const unsigned __int128 wide = static_cast<unsigned __int128>(keyed_draw(seed, round, agent, stream)) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

struct MechanismSpec {
  PayoffMatrix matrix;
  double punishment = 0.0;
  int n_agents = 2;
  std::optional<GenerativeModel> model;
  int d = 1;
  std::vector<PayoffMatrix> dims;  // per-dimension matrices when d > 1

  void validate() const {
    if (n_agents < 2) throw Error(ErrorKind::OutOfRange, "mechanism needs at least 2 agents");
    if (d < 1) throw Error(ErrorKind::OutOfRange, "dimension must be at least 1");
    if (punishment < 0.0) throw Error(ErrorKind::OutOfRange, "punishment must be non-negative");
    if (punishment > 0.0 && !model) throw Error(ErrorKind::InvalidModel, "punishment needs a generative model");
    if (punishment > 0.0 && d > 1) throw Error(ErrorKind::OutOfRange, "punishment is defined for d = 1 only");
    if ((d > 1) != !dims.empty() || (d > 1 && static_cast<int>(dims.size()) != d))
      throw Error(ErrorKind::OutOfRange, "per-dimension matrices must be present iff d > 1");
  }
  const PayoffMatrix& dim(int k) const { return d > 1 ? dims[static_cast<std::size_t>(k)] : matrix; }
};

// reports[i][k] is agent i's report on dimension k.
struct PaymentRound {
  std::vector<std::vector<int>> reports;
  std::uint64_t seed = 0;
  std::uint64_t round_id = 0;
};

namespace detail {

inline constexpr std::uint64_t kPeerStream = 0;
inline constexpr std::uint64_t kDimStream = 1;

inline void check_round(const MechanismSpec& spec, const PaymentRound& round, std::size_t i) {
  if (round.reports.size() != static_cast<std::size_t>(spec.n_agents))
    throw Error(ErrorKind::IndexOutOfRange, "report count does not match n_agents");
  if (i >= round.reports.size()) throw Error(ErrorKind::IndexOutOfRange, "agent index out of range");
  for (const auto& r : round.reports)
    if (r.size() != static_cast<std::size_t>(spec.d)) throw Error(ErrorKind::IndexOutOfRange, "report width does not match d");
}

inline std::size_t draw_peer(const MechanismSpec& spec, const PaymentRound& round, std::size_t i) {
  const auto j = keyed_index(static_cast<std::uint64_t>(spec.n_agents - 1), round.seed, round.round_id, i, kPeerStream);
  return j >= i ? j + 1 : j;
}

}  // namespace detail

inline double ppm_pay(const MechanismSpec& spec, const PaymentRound& round, std::size_t i) {
  detail::check_round(spec, round, i);
  if (spec.d != 1) throw Error(ErrorKind::OutOfRange, "ppm_pay needs d = 1");
  const std::size_t j = detail::draw_peer(spec, round, i);
  return spec.matrix.at(round.reports[j][0], round.reports[i][0]);
}

inline bool others_identical(const PaymentRound& round, std::size_t i) {
  int first = -1;
  for (std::size_t k = 0; k < round.reports.size(); ++k) {
    if (k == i) continue;
    if (first < 0)
      first = round.reports[k][0];
    else if (round.reports[k][0] != first)
      return false;
  }
  return true;
}

inline double mppm_pay(const MechanismSpec& spec, const PaymentRound& round, std::size_t i) {
  const double base = ppm_pay(spec, round, i);
  return others_identical(round, i) ? base - spec.punishment : base;
}

inline double multidim_pay(const MechanismSpec& spec, const PaymentRound& round, std::size_t i) {
  detail::check_round(spec, round, i);
  const auto k = static_cast<std::size_t>(
      spec.d == 1 ? 0 : keyed_index(static_cast<std::uint64_t>(spec.d), round.seed, round.round_id, i, detail::kDimStream));
  const std::size_t j = detail::draw_peer(spec, round, i);
  return spec.dim(static_cast<int>(k)).at(round.reports[j][k], round.reports[i][k]);
}

inline double punishment_level(double t, double delta_star, double eps_q) {
  if (!(eps_q > 0.0 && eps_q < 1.0)) throw Error(ErrorKind::OutOfRange, "eps_q must lie in (0,1)");
  return (1.0 - t) / (2.0 * (1.0 - eps_q)) + delta_star / (2.0 * eps_q);
}

inline double focality_threshold(double t, double delta_star) { return delta_star / (1.0 - t + delta_star); }

inline bool focality_condition(double eps_q, double t, double delta_star) {
  return eps_q < focality_threshold(t, delta_star);
}

inline constexpr int kMaxAgents = 1000000;

// Smallest n >= 2 meeting the focality condition; epsilon_q decreases in n.
inline int min_agents_focal(const GenerativeModel& model, double t, double delta_star) {
  auto ok = [&](int n) { return focality_condition(epsilon_q(model.with_agents(n)), t, delta_star); };
  if (!ok(kMaxAgents)) throw Error(ErrorKind::NeverFocal, "focality not reached by n = 1e6");
  if (ok(2)) return 2;
  int lo = 2, hi = 4;
  while (hi < kMaxAgents && !ok(hi)) {
    lo = hi;
    hi = std::min(2 * hi, kMaxAgents);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Runs the optimizer on the prior the model induces; epsilon applies to unattainable priors.
inline int min_agents_focal(const GenerativeModel& model, double epsilon = 1e-6) {
  const GapReport rep = optimal_mechanism(prior_from_model(model), epsilon);
  return min_agents_focal(model, rep.t, rep.delta_star);
}

// Builds the punished mechanism for a model with a fixed agent count.
inline MechanismSpec mppm_spec(const GenerativeModel& model, const GapReport& rep) {
  MechanismSpec spec;
  spec.matrix = rep.mechanism;
  spec.n_agents = model.n_agents;
  spec.model = model;
  spec.punishment = punishment_level(rep.t, rep.delta_star, epsilon_q(model));
  spec.validate();
  return spec;
}

// Probability that the n-1 other agents, all playing s, submit identical reports.
inline double prob_others_identical(const GenerativeModel& model, const SymmetricStrategy& s) {
  const int m = model.n_agents - 1;
  return model.expect_linear_power(s.t0, s.t1 - s.t0, m) +
         model.expect_linear_power(1.0 - s.t0, s.t0 - s.t1, m);
}

// Expected MPPM payment when every agent plays s.
inline double mppm_expected_payoff(const MechanismSpec& spec, const SymmetricStrategy& s) {
  spec.validate();
  const Prior prior = prior_from_model(*spec.model);
  const double base = expected_payoff(prior, spec.matrix, s);
  return base - spec.punishment * prob_others_identical(spec.model->with_agents(spec.n_agents), s);
}

// Subtract the punishment and rescale so payments stay in [0,1] again.
inline PayoffMatrix renormalize_after_punishment(const PayoffMatrix& pf, double punishment) {
  const double lo = pf.min() - punishment, hi = pf.max();
  auto n = [&](double v) { return (v - lo) / (hi - lo); };
  return PayoffMatrix{n(pf.h11), n(pf.h10), n(pf.h01), n(pf.h00)};
}

}  // namespace peerpredict
