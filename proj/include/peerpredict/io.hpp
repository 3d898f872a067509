#pragma once

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "json.hpp"

#include "peerpredict/equilibria.hpp"
#include "peerpredict/mechanism.hpp"
#include "peerpredict/optimizer.hpp"
#include "peerpredict/prior.hpp"
#include "peerpredict/scoring.hpp"
#include "peerpredict/verify.hpp"

namespace peerpredict::io {

using nlohmann::json;

// Malformed or incomplete JSON input; distinct from domain errors.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rounds to 12 significant digits so emitted numbers are stable.
inline double sig12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline double need_number(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number())
    throw InputError(std::string("missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

inline int need_int(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number_integer())
    throw InputError(std::string("missing integer field '") + key + "'");
  return j.at(key).get<int>();
}

inline json parse_arg(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

inline GenerativeModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) throw InputError("model needs a 'kind'");
  const std::string kind = j.at("kind");
  const int n = j.contains("n") ? need_int(j, "n") : 2;
  if (kind == "uniform") return GenerativeModel::uniform(need_number(j, "a"), need_number(j, "b"), n);
  if (kind == "beta") return GenerativeModel::beta(need_number(j, "a"), need_number(j, "b"), n);
  if (kind == "discrete") {
    if (!j.contains("points") || !j.contains("weights")) throw InputError("discrete model needs points and weights");
    try {
      return GenerativeModel::discrete(j.at("points").get<std::vector<double>>(),
                                       j.at("weights").get<std::vector<double>>(), n);
    } catch (const json::exception& e) {
      throw InputError(std::string("bad discrete model: ") + e.what());
    }
  }
  throw InputError("unknown model kind '" + kind + "'");
}

inline json model_to_json(const GenerativeModel& m) {
  switch (m.kind) {
    case ModelKind::Uniform: return {{"kind", "uniform"}, {"a", sig12(m.a)}, {"b", sig12(m.b)}, {"n", m.n_agents}};
    case ModelKind::Beta: return {{"kind", "beta"}, {"a", sig12(m.a)}, {"b", sig12(m.b)}, {"n", m.n_agents}};
    case ModelKind::Discrete: {
      json pts = json::array(), ws = json::array();
      for (double v : m.points) pts.push_back(sig12(v));
      for (double v : m.weights) ws.push_back(sig12(v));
      return {{"kind", "discrete"}, {"points", pts}, {"weights", ws}, {"n", m.n_agents}};
    }
  }
  return {};
}

// A prior plus the model it came from, if any.
struct PriorInput {
  Prior prior;
  std::optional<GenerativeModel> model;
};

inline PriorInput prior_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) throw InputError("prior needs a 'kind'");
  if (j.at("kind") == "conditionals")
    return {prior_from_conditionals(need_number(j, "q11"), need_number(j, "q10")), std::nullopt};
  GenerativeModel m = model_from_json(j);
  return {prior_from_model(m), m};
}

inline PayoffMatrix matrix_from_json(const json& j) {
  return PayoffMatrix{need_number(j, "h11"), need_number(j, "h10"), need_number(j, "h01"), need_number(j, "h00")};
}

inline json to_json(const PayoffMatrix& m) {
  return {{"h11", sig12(m.h11)}, {"h10", sig12(m.h10)}, {"h01", sig12(m.h01)}, {"h00", sig12(m.h00)}};
}

inline LineSet lineset_from_json(const json& j) {
  return LineSet{need_number(j, "alpha"), need_number(j, "beta"), need_number(j, "qstar"), need_number(j, "gamma")};
}

inline json to_json(const LineSet& ls) {
  return {{"alpha", sig12(ls.alpha)}, {"beta", sig12(ls.beta)}, {"qstar", sig12(ls.qstar)}, {"gamma", sig12(ls.gamma)}};
}

inline json to_json(const Prior& p) {
  return {{"q11", sig12(p.q11)}, {"q10", sig12(p.q10)}, {"q00", sig12(p.q00())}, {"q01", sig12(p.q01())},
          {"q1", sig12(p.q1())},  {"q0", sig12(p.q0())},   {"signal_asymmetric", p.signal_asymmetric()}};
}

inline json to_json(const Equilibrium& e) {
  return {{"label", label_name(e.label)}, {"t0", sig12(e.strategy.t0)}, {"t1", sig12(e.strategy.t1)},
          {"x", sig12(e.point.x)},        {"y", sig12(e.point.y)},        {"payoff", sig12(e.payoff)}};
}

inline json to_json(const EquilibriumSet& s) {
  json list = json::array();
  for (const auto& e : s.items) list.push_back(to_json(e));
  return {{"qstar", sig12(s.qstar)}, {"count", s.count()}, {"equilibria", list}};
}

inline EquilibriumSet equilibria_from_json(const json& j) {
  EquilibriumSet s;
  s.qstar = need_number(j, "qstar");
  for (const auto& e : j.at("equilibria")) {
    Equilibrium q;
    const auto label = label_from_name(e.at("label").get<std::string>());
    if (!label) throw InputError("unknown equilibrium label");
    q.label = *label;
    q.strategy = {need_number(e, "t0"), need_number(e, "t1")};
    q.point = {need_number(e, "x"), need_number(e, "y")};
    q.payoff = need_number(e, "payoff");
    s.items.push_back(q);
  }
  return s;
}

inline json to_json(const GapReport& r) {
  json out = {{"region", region_name(r.region.tag)},
              {"delta_star", sig12(r.delta_star)},
              {"qstar_opt", sig12(r.qstar_opt)},
              {"k_opt", sig12(r.k_opt)},
              {"t", sig12(r.t)},
              {"mechanism", to_json(r.mechanism)}};
  if (r.epsilon) out["epsilon"] = sig12(*r.epsilon);
  return out;
}

inline json to_json(const MonteCarloResult& r) {
  json mean = json::array(), se = json::array();
  for (double v : r.mean) mean.push_back(sig12(v));
  for (double v : r.stderr_) se.push_back(sig12(v));
  return {{"mean", mean}, {"stderr", se}, {"trials", r.trials}, {"seed", r.seed}};
}

inline MechanismSpec spec_from_json(const json& j) {
  MechanismSpec s;
  if (!j.is_object() || !j.contains("matrix")) throw InputError("spec needs a 'matrix'");
  s.matrix = matrix_from_json(j.at("matrix"));
  if (j.contains("punishment")) s.punishment = need_number(j, "punishment");
  if (j.contains("model")) s.model = model_from_json(j.at("model"));
  s.n_agents = j.contains("n_agents") ? need_int(j, "n_agents") : (s.model ? s.model->n_agents : 2);
  if (j.contains("d")) s.d = need_int(j, "d");
  if (j.contains("dims"))
    for (const auto& m : j.at("dims")) s.dims.push_back(matrix_from_json(m));
  if (s.model) s.model = s.model->with_agents(s.n_agents);
  s.validate();
  return s;
}

inline json to_json(const MechanismSpec& s) {
  json out = {{"matrix", to_json(s.matrix)}, {"punishment", sig12(s.punishment)}, {"n_agents", s.n_agents}, {"d", s.d}};
  if (s.model) out["model"] = model_to_json(*s.model);
  if (!s.dims.empty()) {
    out["dims"] = json::array();
    for (const auto& m : s.dims) out["dims"].push_back(to_json(m));
  }
  return out;
}

// Accepts [t0,t1] (applied to every agent) or [[t0,t1], ...].
inline ProfileN profile_from_json(const json& j, int n_agents) {
  auto pair = [](const json& p) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw InputError("strategy must be [t0, t1]");
    const SymmetricStrategy s{p[0].get<double>(), p[1].get<double>()};
    if (!(s.t0 >= 0 && s.t0 <= 1 && s.t1 >= 0 && s.t1 <= 1)) throw InputError("strategy entries must lie in [0,1]");
    return s;
  };
  if (j.is_array() && j.size() == 2 && j[0].is_number()) return ProfileN(static_cast<std::size_t>(n_agents), pair(j));
  if (!j.is_array()) throw InputError("profile must be a JSON array");
  ProfileN out;
  for (const auto& p : j) out.push_back(pair(p));
  if (out.size() != static_cast<std::size_t>(n_agents)) throw InputError("profile length must equal n_agents");
  return out;
}

// Bits as CSV, one row per agent, one column per dimension.
inline std::vector<std::vector<int>> rounds_from_csv(const std::string& text) {
  std::vector<std::vector<int>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<int> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      if (cell != "0" && cell != "1") throw InputError("report cells must be 0 or 1");
      row.push_back(cell == "1");
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw InputError("ragged report rows");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string plot_csv(const std::vector<PlotSample>& samples) {
  std::string out = "x,y,quadrant,payoff\n";
  for (const auto& s : samples)
    out += fixed6(s.x) + "," + fixed6(s.y) + "," + quadrant_name(s.quadrant) + "," + fixed6(s.payoff) + "\n";
  return out;
}

}  // namespace peerpredict::io
