// peerpredict: command-line front end.
//
// Exit codes: 0 success, 1 domain error, 2 flag or input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "peerpredict/io.hpp"
#include "peerpredict/peerpredict.hpp"

namespace pp = peerpredict;
using pp::io::json;

namespace {

// Inline text, or the contents of a file when prefixed with '@'.
std::string read_arg(const std::string& v) {
  if (v.empty() || v[0] != '@') return v;
  std::ifstream in(v.substr(1));
  if (!in) throw pp::io::InputError("cannot read " + v.substr(1));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json arg_json(const std::string& v) { return pp::io::parse_arg(read_arg(v)); }

unsigned thread_cap() {
  const char* env = std::getenv("PEERPREDICT_THREADS");
  if (!env) return 0;
  const long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<unsigned>(v) : 0;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peer-prediction equilibrium analysis and mechanism design"};
  app.require_subcommand(1);

  std::string prior_arg, matrix_arg, rule_arg, spec_arg, profile_arg, model_arg, out_arg, rounds_arg;
  std::optional<double> epsilon;
  int resolution = 101;
  std::uint64_t trials = 100000, seed = 0;

  auto* analyze = app.add_subcommand("analyze", "Summarize a prior");
  analyze->add_option("--prior", prior_arg, "Prior JSON")->required();

  auto* equilibria = app.add_subcommand("equilibria", "List all symmetric equilibria");
  equilibria->add_option("--prior", prior_arg, "Prior JSON")->required();
  auto* eq_matrix = equilibria->add_option("--matrix", matrix_arg, "Payoff matrix JSON");
  equilibria->add_option("--rule", rule_arg, "Named scoring rule")->check(CLI::IsMember({"brier"}))->excludes(eq_matrix);

  auto* design = app.add_subcommand("design", "Optimal payoff matrix for a prior");
  design->add_option("--prior", prior_arg, "Prior JSON")->required();
  design->add_option("--epsilon", epsilon, "Offset for unattainable priors");

  auto* gap = app.add_subcommand("gap", "Gap of the normalized matrix");
  gap->add_option("--prior", prior_arg, "Prior JSON")->required();
  gap->add_option("--matrix", matrix_arg, "Payoff matrix JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo payments, or payments for one round");
  simulate->add_option("--spec", spec_arg, "Mechanism spec JSON")->required();
  auto* sim_profile = simulate->add_option("--profile", profile_arg, "Strategy profile JSON");
  auto* sim_rounds = simulate->add_option("--rounds", rounds_arg, "Reports CSV, one row per agent");
  sim_profile->excludes(sim_rounds);
  simulate->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Seed");

  auto* verify = app.add_subcommand("verify", "Compare enumeration against a grid oracle");
  verify->add_option("--prior", prior_arg, "Prior JSON")->required();
  verify->add_option("--matrix", matrix_arg, "Payoff matrix JSON")->required();
  verify->add_option("--resolution", resolution, "Grid points per axis")->check(CLI::Range(11, 2001));

  auto* plot = app.add_subcommand("plot", "Best-response plot data as CSV");
  plot->add_option("--prior", prior_arg, "Prior JSON")->required();
  plot->add_option("--matrix", matrix_arg, "Payoff matrix JSON")->required();
  plot->add_option("--resolution", resolution, "Grid points per axis")->check(CLI::Range(2, 2001));
  plot->add_option("--out", out_arg, "Output file (default stdout)");

  auto* min_agents = app.add_subcommand("min-agents", "Smallest n making truth-telling focal");
  min_agents->add_option("--model", model_arg, "Generative model JSON")->required();
  min_agents->add_option("--epsilon", epsilon, "Offset for unattainable priors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*analyze) {
      const auto in = pp::io::prior_from_json(arg_json(prior_arg));
      json out = {{"prior", pp::io::to_json(in.prior)}};
      if (in.prior.signal_asymmetric()) {
        const pp::Region r = pp::classify_region(in.prior);
        out["region"] = pp::region_name(r.tag);
      }
      out["brier_qstar"] = pp::io::sig12(pp::break_even(pp::brier_rule(), in.prior));
      if (in.model && in.model->n_agents >= 2) out["epsilon_q"] = pp::io::sig12(pp::epsilon_q(*in.model));
      emit(out);
    } else if (*equilibria) {
      const auto in = pp::io::prior_from_json(arg_json(prior_arg));
      if (matrix_arg.empty() && rule_arg.empty()) throw pp::io::InputError("equilibria needs --matrix or --rule");
      const pp::PayoffMatrix pf = matrix_arg.empty() ? pp::matrix_from_rule(pp::brier_rule(), in.prior)
                                                     : pp::io::matrix_from_json(arg_json(matrix_arg));
      json out = pp::io::to_json(pp::enumerate(in.prior, pf));
      out["matrix"] = pp::io::to_json(pf);
      emit(out);
    } else if (*design) {
      const auto in = pp::io::prior_from_json(arg_json(prior_arg));
      emit(pp::io::to_json(pp::optimal_mechanism(in.prior, epsilon)));
    } else if (*gap) {
      const auto in = pp::io::prior_from_json(arg_json(prior_arg));
      const pp::PayoffMatrix pf = pp::normalize(pp::io::matrix_from_json(arg_json(matrix_arg)));
      std::cout << json(pp::io::sig12(pp::gap(in.prior, pf))).dump() << "\n";
    } else if (*simulate) {
      const pp::MechanismSpec spec = pp::io::spec_from_json(arg_json(spec_arg));
      if (!rounds_arg.empty()) {
        pp::PaymentRound round;
        round.reports = pp::io::rounds_from_csv(read_arg(rounds_arg));
        round.seed = seed;
        json pays = json::array();
        for (std::size_t i = 0; i < round.reports.size(); ++i) {
          const double v = spec.d > 1 ? pp::multidim_pay(spec, round, i)
                                      : (spec.punishment > 0 ? pp::mppm_pay(spec, round, i) : pp::ppm_pay(spec, round, i));
          pays.push_back(pp::io::sig12(v));
        }
        emit({{"payments", pays}, {"seed", seed}});
      } else {
        if (profile_arg.empty()) throw pp::io::InputError("simulate needs --profile or --rounds");
        if (!spec.model) throw pp::io::InputError("simulate needs a model in the spec");
        const pp::ProfileN profile = pp::io::profile_from_json(arg_json(profile_arg), spec.n_agents);
        emit(pp::io::to_json(pp::monte_carlo(*spec.model, spec, profile, trials, seed, thread_cap())));
      }
    } else if (*verify) {
      const auto in = pp::io::prior_from_json(arg_json(prior_arg));
      const pp::PayoffMatrix pf = pp::io::matrix_from_json(arg_json(matrix_arg));
      const pp::EquilibriumSet set = pp::enumerate(in.prior, pf);
      const auto clusters = pp::grid_scan(in.prior, pf, resolution);
      const double cell = 1.5 / (resolution - 1);
      double max_gain = 0.0;
      for (const auto& e : set.items) max_gain = std::max(max_gain, pp::symmetric_gain(in.prior, pf, e.strategy));
      json unmatched = json::array();
      for (const auto& c : clusters) {
        bool near = false;
        for (const auto& e : set.items)
          near |= std::max(std::abs(c.center.t0 - e.strategy.t0), std::abs(c.center.t1 - e.strategy.t1)) <=
                  cell + 0.5 * c.diameter;
        if (!near) unmatched.push_back({pp::io::sig12(c.center.t0), pp::io::sig12(c.center.t1)});
      }
      emit({{"enumerated", set.count()},
            {"clusters", clusters.size()},
            {"unmatched_clusters", unmatched},
            {"max_equilibrium_gain", pp::io::sig12(max_gain)},
            {"ok", unmatched.empty() && max_gain < 1e-9}});
    } else if (*plot) {
      const auto in = pp::io::prior_from_json(arg_json(prior_arg));
      const pp::LineSet ls = pp::lineset_from_matrix(pp::io::matrix_from_json(arg_json(matrix_arg)));
      const std::string csv = pp::io::plot_csv(pp::plot_data(in.prior, ls, resolution));
      if (out_arg.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(out_arg);
        if (!f) throw pp::io::InputError("cannot write " + out_arg);
        f << csv;
      }
    } else if (*min_agents) {
      const pp::GenerativeModel model = pp::io::model_from_json(arg_json(model_arg));
      std::cout << pp::min_agents_focal(model, epsilon.value_or(1e-6)) << "\n";
    }
  } catch (const pp::io::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const pp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
