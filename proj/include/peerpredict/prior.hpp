#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "peerpredict/error.hpp"

namespace peerpredict {

inline constexpr double kSymmetryTol = 1e-9;

// Binary symmetric prior given by q11 = q(1|1) and q10 = q(1|0).
struct Prior {
  double q11 = 0.0;
  double q10 = 0.0;

  double q00() const { return 1.0 - q10; }
  double q01() const { return 1.0 - q11; }
  double q1() const { return q10 / (q01() + q10); }
  double q0() const { return q01() / (q01() + q10); }
  // q(b'|b) for bits b', b.
  double cond(int to, int from) const {
    const double one = from ? q11 : q10;
    return to ? one : 1.0 - one;
  }
  double marginal(int b) const { return b ? q1() : q0(); }
  bool signal_asymmetric() const { return std::abs(q00() - q11) > kSymmetryTol; }
  // Relabel 0 <-> 1.
  Prior mirrored() const { return Prior{q00(), q01()}; }
};

inline Prior prior_from_conditionals(double q11, double q10) {
  if (!(q11 > 0.0 && q11 < 1.0 && q10 > 0.0 && q10 < 1.0))
    throw Error(ErrorKind::OutOfRange, "conditionals must lie in (0,1)");
  if (!(q11 > q10))
    throw Error(ErrorKind::NotPositivelyCorrelated, "requires q(1|1) > q(1|0)");
  return Prior{q11, q10};
}

enum class ModelKind { Uniform, Beta, Discrete };

// Agents share a latent p; signals are i.i.d. Bernoulli(p) given p.
struct GenerativeModel {
  ModelKind kind = ModelKind::Uniform;
  double a = 0.0;  // interval start, or first beta shape
  double b = 1.0;  // interval end, or second beta shape
  std::vector<double> points;
  std::vector<double> weights;
  int n_agents = 2;

  static GenerativeModel uniform(double a, double b, int n) {
    GenerativeModel m;
    m.kind = ModelKind::Uniform;
    m.a = a;
    m.b = b;
    m.n_agents = n;
    m.validate();
    return m;
  }
  static GenerativeModel beta(double shape_a, double shape_b, int n) {
    GenerativeModel m;
    m.kind = ModelKind::Beta;
    m.a = shape_a;
    m.b = shape_b;
    m.n_agents = n;
    m.validate();
    return m;
  }
  static GenerativeModel discrete(std::vector<double> pts, std::vector<double> w, int n) {
    GenerativeModel m;
    m.kind = ModelKind::Discrete;
    m.points = std::move(pts);
    m.weights = std::move(w);
    m.n_agents = n;
    m.validate();
    return m;
  }

  GenerativeModel with_agents(int n) const {
    GenerativeModel m = *this;
    m.n_agents = n;
    m.validate();
    return m;
  }

  void validate() const {
    if (n_agents < 1) throw Error(ErrorKind::InvalidModel, "n_agents must be positive");
    switch (kind) {
      case ModelKind::Uniform:
        if (!(a >= 0.0 && b <= 1.0 && a < b))
          throw Error(ErrorKind::InvalidModel, "uniform model needs 0 <= a < b <= 1");
        break;
      case ModelKind::Beta:
        if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
          throw Error(ErrorKind::InvalidModel, "beta shapes must be positive");
        break;
      case ModelKind::Discrete: {
        if (points.empty() || points.size() != weights.size())
          throw Error(ErrorKind::InvalidModel, "discrete model needs matching points and weights");
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          if (!(points[i] >= 0.0 && points[i] <= 1.0) || !(weights[i] >= 0.0))
            throw Error(ErrorKind::InvalidModel, "discrete support must lie in [0,1] with weights >= 0");
          total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-9)
          throw Error(ErrorKind::InvalidModel, "discrete weights must sum to 1");
        break;
      }
    }
  }

  // E[p^k]
  double moment(int k) const { return raw_moment(k, false); }
  // E[(1-p)^k]
  double moment_complement(int k) const { return raw_moment(k, true); }

  // E[f(p)]; closed form is not available for general f, so quadrature.
  double expect(const std::function<double(double)>& f) const {
    switch (kind) {
      case ModelKind::Uniform: {
        double err = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, a, b, 15, 1e-10, &err);
        return v / (b - a);
      }
      case ModelKind::Beta: {
        const boost::math::beta_distribution<double> dist(a, b);
        boost::math::quadrature::tanh_sinh<double> integrator;
        auto g = [&](double p) { return f(p) * boost::math::pdf(dist, p); };
        return integrator.integrate(g, 0.0, 1.0, 1e-10);
      }
      case ModelKind::Discrete: {
        double s = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
        return s;
      }
    }
    return 0.0;
  }

  // E[(c + d p)^m], closed form for the uniform and discrete kinds.
  double expect_linear_power(double c, double d, int m) const {
    if (kind == ModelKind::Uniform && std::abs(d) > 1e-12) {
      const double hi = c + d * b, lo = c + d * a;
      return (std::pow(hi, m + 1) - std::pow(lo, m + 1)) / ((m + 1) * d * (b - a));
    }
    if (kind == ModelKind::Uniform) return std::pow(c + d * 0.5 * (a + b), m);
    return expect([&](double p) { return std::pow(c + d * p, m); });
  }

 private:
  double raw_moment(int k, bool complement) const {
    switch (kind) {
      case ModelKind::Uniform: {
        const double lo = complement ? 1.0 - b : a;
        const double hi = complement ? 1.0 - a : b;
        return (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / ((k + 1) * (hi - lo));
      }
      case ModelKind::Beta: {
        const double s = complement ? b : a;
        double v = 1.0;
        for (int i = 0; i < k; ++i) v *= (s + i) / (a + b + i);
        return v;
      }
      case ModelKind::Discrete: {
        double v = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i)
          v += weights[i] * std::pow(complement ? 1.0 - points[i] : points[i], k);
        return v;
      }
    }
    return 0.0;
  }
};

inline Prior prior_from_model(const GenerativeModel& model) {
  model.validate();
  const double m1 = model.moment(1);
  const double m2 = model.moment(2);
  const double c1 = 1.0 - m1;
  if (!(m1 > 0.0 && c1 > 0.0)) throw Error(ErrorKind::DegenerateModel, "mean of p is 0 or 1");
  const double q11 = m2 / m1;
  const double q10 = (m1 - m2) / c1;
  if (!(q11 > q10)) throw Error(ErrorKind::DegenerateModel, "induced prior is not positively correlated");
  return Prior{q11, q10};
}

// Probability that n-1 fixed agents all see 1, or all see 0, whichever is larger.
inline double epsilon_q(const GenerativeModel& model) {
  if (model.n_agents < 2) throw Error(ErrorKind::OutOfRange, "epsilon_q needs at least 2 agents");
  const int m = model.n_agents - 1;
  return std::max(model.moment(m), model.moment_complement(m));
}

// Probability that n-1 fixed agents all see the same signal (both cases summed).
inline double prob_others_same_signal(const GenerativeModel& model) {
  const int m = model.n_agents - 1;
  return model.moment(m) + model.moment_complement(m);
}

}  // namespace peerpredict
