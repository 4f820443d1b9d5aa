// Python surface of the toolkit. Every entry point takes the same JSON
// configuration text the command-line tool reads, so a notebook can step
// environments, inspect mask rows, renormalize logits and run short trainings
// without shelling out. Multi-seed sweeps and file artifacts stay in the CLI.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "maskrl/action_mask.hpp"
#include "maskrl/envs/inventory.hpp"
#include "maskrl/envs/lms.hpp"
#include "maskrl/envs/paintshop.hpp"
#include "maskrl/exp/config.hpp"
#include "maskrl/exp/oracle.hpp"
#include "maskrl/exp/runner.hpp"
#include "maskrl/mask.hpp"
#include "maskrl/masked_dist.hpp"
#include "maskrl/ppo/ppo.hpp"
#include "maskrl/version.hpp"

namespace py = pybind11;
using namespace maskrl;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<long>(v.size()));
}

std::vector<bool> row_to_bools(const ActionMask& row) {
  std::vector<bool> out(row.size());
  for (int a = 0; a < row.size(); ++a) out[a] = row.allowed(a);
  return out;
}

ActionMask row_from_bools(const std::vector<bool>& allowed) {
  if (allowed.empty() || allowed.size() > ActionMask::kMaxActions)
    throw std::invalid_argument("allowed: need between 1 and 64 entries");
  ActionMask row = ActionMask::none(static_cast<int>(allowed.size()));
  for (size_t a = 0; a < allowed.size(); ++a)
    if (allowed[a]) row.set(static_cast<int>(a), true);
  return row;
}

exp::ExperimentConfig parse_for(const std::string& config_json,
                                const std::string& environment) {
  exp::ExperimentConfig cfg = exp::parse_config(config_json);
  if (cfg.environment != environment)
    throw exp::UserError("environment: expected \"" + environment +
                         "\", got \"" + cfg.environment + "\"");
  return cfg;
}

void check_action(int action, int n) {
  if (action < 0 || action >= n)
    throw py::index_error("action " + std::to_string(action) +
                          " outside [0, " + std::to_string(n) + ")");
}

// One environment plus the mask level its configuration selects. The mask row
// is a pure view of the current state; stepping is the only mutation.
template <class E>
struct PyEnv {
  E env;
  Mask<typename E::State> mask;
  Mask<typename E::State> validity;

  PyEnv(E e, Mask<typename E::State> m)
      : env(std::move(e)), mask(std::move(m)), validity(env.validity_mask()) {}
};

template <class E, class Make, class MaskOf>
py::class_<PyEnv<E>> bind_env(py::module_& m, const char* pyname,
                              const char* key, Make make, MaskOf mask_of,
                              const char* doc) {
  using W = PyEnv<E>;
  auto cls = py::class_<W>(m, pyname, doc);
  cls.def(py::init([key = std::string(key), make, mask_of](
                       const std::string& config_json) {
            exp::ExperimentConfig cfg = parse_for(config_json, key);
            return new W(make(cfg), mask_of(cfg));
          }),
          py::arg("config_json"));
  cls.def_property_readonly(
      "action_count", [](const W& w) { return w.env.action_count(); });
  cls.def_property_readonly(
      "observation_dim", [](const W& w) { return w.env.observation_dim(); });
  cls.def_property_readonly("mask_name",
                            [](const W& w) { return w.mask.name; });
  cls.def(
      "reset", [](W& w, uint64_t seed) { return to_std(w.env.reset(seed)); },
      py::arg("seed"), "Start an episode and return the first observation.");
  cls.def(
      "step",
      [](W& w, int action) {
        check_action(action, w.env.action_count());
        StepOutcome o = w.env.step(action);
        py::dict info;
        for (const auto& [k, v] : o.info) info[py::str(k)] = v;
        return py::make_tuple(to_std(o.observation), o.reward, o.done, info);
      },
      py::arg("action"), "Advance one transition: (obs, reward, done, info).");
  cls.def(
      "mask_row", [](const W& w) { return row_to_bools(w.mask(w.env.state())); },
      "Admissibility of each action under the configured mask, right now.");
  cls.def(
      "valid_row",
      [](const W& w) { return row_to_bools(w.validity(w.env.state())); },
      "The environment's own validity row, ignoring the configured mask.");
  return cls;
}

std::map<std::string, double> eval_policy(const exp::ExperimentConfig& cfg,
                                          const PolicyBundle& policy) {
  std::map<std::string, double> e;
  if (cfg.environment == "paintshop") {
    const exp::PsEvalResult r = exp::ps_evaluate_policy(cfg, policy);
    e["mean_color_changes"] = r.mean_color_changes;
    e["mean_reward"] = r.mean_reward;
    e["completed_fraction"] = r.completed_fraction;
  } else if (cfg.environment == "lms") {
    const lms::EvalSummary s = exp::lms_evaluate_policy(cfg, policy);
    e["solved_fraction"] = s.solved_fraction;
    e["mean_reward"] = s.mean_reward;
  } else {
    const inv::SimSummary s = exp::inv_evaluate_policy(cfg, policy);
    e["mean_cost_per_step"] = s.mean_cost_per_step;
    e["std_error"] = s.std_error;
  }
  return e;
}

// Keeps the trained policy alive so it can be queried after training.
struct TrainOutcome {
  exp::ExperimentConfig cfg;
  TrainResult result;
  std::map<std::string, double> eval;
};

}  // namespace

PYBIND11_MODULE(_maskrl, m) {
  m.doc() =
      "Action-masked reinforcement learning on three operations-research "
      "control problems. Entry points take the JSON experiment configuration "
      "understood by the maskrl command-line tool.";
  m.attr("__version__") = kVersion;

  py::register_exception<exp::UserError>(m, "ConfigError", PyExc_ValueError);

  py::class_<MaskedDistribution>(m, "MaskedDistribution",
                                 "Categorical distribution over actions in "
                                 "which forbidden entries carry exactly zero "
                                 "probability.")
      .def_property_readonly(
          "probs", [](const MaskedDistribution& d) { return to_std(d.probs); })
      .def_property_readonly(
          "allowed",
          [](const MaskedDistribution& d) { return row_to_bools(d.admissible); })
      .def_readonly("fallback_used", &MaskedDistribution::fallback_used)
      .def("entropy", &MaskedDistribution::entropy)
      .def(
          "log_prob",
          [](const MaskedDistribution& d, int a) {
            check_action(a, static_cast<int>(d.probs.size()));
            return d.log_prob(a);
          },
          py::arg("action"))
      .def(
          "sample",
          [](const MaskedDistribution& d, double u) {
            if (!(u >= 0.0 && u < 1.0))
              throw std::invalid_argument("u must lie in [0, 1)");
            return d.sample(u);
          },
          py::arg("u"), "Inverse-CDF draw; u in [0, 1).")
      .def("argmax", &MaskedDistribution::argmax);

  m.def(
      "masked_distribution",
      [](const std::vector<double>& logits, const std::vector<bool>& allowed) {
        if (logits.size() != allowed.size())
          throw std::invalid_argument("logits and allowed differ in length");
        return masked_distribution(from_std(logits), row_from_bools(allowed));
      },
      py::arg("logits"), py::arg("allowed"),
      "Renormalize logits over the allowed actions. An all-false row falls "
      "back to all actions and sets fallback_used.");

  m.def(
      "canonical_config",
      [](const std::string& text) { return exp::parse_config(text).canonical(); },
      py::arg("config_json"),
      "Validate a configuration and return it with every default "
      "materialized, keys sorted.");
  m.def(
      "config_hash",
      [](const std::string& text) {
        return exp::hash_hex(exp::parse_config(text).hash());
      },
      py::arg("config_json"),
      "Hash of the fully resolved configuration, as the artifact files "
      "record it.");

  bind_env<ps::Env>(
      m, "PaintShop", "paintshop",
      [](const exp::ExperimentConfig& c) { return ps::Env(c.paintshop); },
      [](const exp::ExperimentConfig& c) { return exp::ps_mask(c); },
      "Color-batching retrieval scheduler: store arriving cars into lanes, "
      "retrieve them in an order with few paint color changes.")
      .def(
          "reset_with_sequence",
          [](PyEnv<ps::Env>& w, std::vector<int> sequence) {
            return to_std(w.env.reset_with_sequence(std::move(sequence)));
          },
          py::arg("sequence"),
          "Start an episode on a fixed arrival sequence, for paired "
          "comparisons.")
      .def_property_readonly("outgoing", [](const PyEnv<ps::Env>& w) {
        return w.env.outgoing();
      });

  bind_env<lms::Env>(
      m, "LoadManagement", "lms",
      [](const exp::ExperimentConfig& c) { return lms::Env(c.lms_config()); },
      [](const exp::ExperimentConfig& c) { return exp::lms_mask(c); },
      "Peak-load management: switch a consumer off during forecast peaks "
      "under a daily off budget.")
      .def_property_readonly_static(
          "ACTION_ON", [](py::object) { return lms::kActionOn; })
      .def_property_readonly_static(
          "ACTION_OFF", [](py::object) { return lms::kActionOff; });

  bind_env<inv::Env>(
      m, "Inventory", "inventory",
      [](const exp::ExperimentConfig& c) { return inv::Env(c.inv_config()); },
      [](const exp::ExperimentConfig& c) { return exp::inv_mask(c); },
      "Lost-sales inventory control under Poisson demand and order lead "
      "times; actions are grid order quantities.");

  m.def(
      "generate_instance",
      [](const std::string& config_json, uint64_t seed) {
        return ps::generate_instance(seed,
                                     parse_for(config_json, "paintshop").paintshop);
      },
      py::arg("config_json"), py::arg("seed"),
      "Arrival color sequence of one paint-shop instance.");

  m.def(
      "optimal_color_changes",
      [](const std::string& config_json, const std::vector<int>& sequence,
         const std::string& level) {
        const exp::ExperimentConfig cfg = parse_for(config_json, "paintshop");
        const std::string lvl = level.empty() ? cfg.oracle.level : level;
        exp::PsOracleResult r;
        {
          py::gil_scoped_release release;
          r = exp::ps_optimal_changes(sequence, cfg.paintshop, lvl);
        }
        py::dict out;
        out["optimal_changes"] = r.optimal_changes;
        out["states_visited"] = r.states_visited;
        return out;
      },
      py::arg("config_json"), py::arg("sequence"), py::arg("level") = "",
      "Exhaustive minimum of color changes on one instance, searching only "
      "actions the given mask level admits. Toy geometries only.");

  m.def(
      "optimal_inventory_cost",
      [](const std::string& config_json) {
        const exp::ExperimentConfig cfg = parse_for(config_json, "inventory");
        const inv::Config ic = cfg.inv_config();
        if (ic.pipeline != 1 || ic.stochastic_lead)
          throw exp::UserError(
              "optimal_inventory_cost: exact recursion needs pipeline 1 with "
              "deterministic lead");
        double total = 0.0;
        {
          py::gil_scoped_release release;
          exp::InvDp dp(ic, cfg.oracle.horizon, cfg.oracle.demand_cap);
          total = dp.value(0, 0, 0);
        }
        py::dict out;
        out["total_cost"] = total;
        out["cost_per_step"] = total / cfg.oracle.horizon;
        out["horizon"] = cfg.oracle.horizon;
        return out;
      },
      py::arg("config_json"),
      "Exact expected cost of optimal play from empty stock, by "
      "finite-horizon recursion over the truncated demand.");

  m.def(
      "evaluate_greedy",
      [](const std::string& config_json) {
        const exp::ExperimentConfig cfg = parse_for(config_json, "paintshop");
        exp::PsEvalResult r;
        {
          py::gil_scoped_release release;
          r = exp::ps_evaluate_greedy(cfg);
        }
        py::dict out;
        out["mean_color_changes"] = r.mean_color_changes;
        out["mean_reward"] = r.mean_reward;
        out["completed_fraction"] = r.completed_fraction;
        return out;
      },
      py::arg("config_json"),
      "The first-admissible-action player under the full mask stack, on the "
      "evaluation instances.");

  m.def(
      "evaluate_rule",
      [](const std::string& config_json) {
        const exp::ExperimentConfig cfg = parse_for(config_json, "lms");
        lms::EvalSummary s;
        {
          py::gil_scoped_release release;
          s = exp::lms_evaluate_rule(cfg);
        }
        py::dict out;
        out["solved_fraction"] = s.solved_fraction;
        out["mean_reward"] = s.mean_reward;
        return out;
      },
      py::arg("config_json"),
      "The fixed switch-off rule: off whenever the forecast reaches the "
      "configured rule threshold.");

  m.def(
      "base_stock_cost",
      [](const std::string& config_json) {
        const exp::ExperimentConfig cfg = parse_for(config_json, "inventory");
        inv::SimSummary s;
        {
          py::gil_scoped_release release;
          s = inv::base_stock_simulate(cfg.inv_config(), cfg.inventory.base_stock,
                                       cfg.eval_episodes, cfg.eval_seed);
        }
        py::dict out;
        out["mean_cost_per_step"] = s.mean_cost_per_step;
        out["std_error"] = s.std_error;
        return out;
      },
      py::arg("config_json"),
      "Simulated cost of the configured order-up-to policy, on the same "
      "demand streams an RL evaluation faces.");

  py::class_<TrainOutcome>(m, "TrainResult",
                           "A finished training run: learning curve, "
                           "evaluation metrics and the trained policy.")
      .def_property_readonly("curve",
                             [](const TrainOutcome& t) {
                               py::list out;
                               for (const CurvePoint& p : t.result.curve)
                                 out.append(py::make_tuple(
                                     p.timesteps, p.mean_episode_reward));
                               return out;
                             })
      .def_property_readonly(
          "timesteps", [](const TrainOutcome& t) { return t.result.timesteps; })
      .def_property_readonly(
          "episodes", [](const TrainOutcome& t) { return t.result.episodes; })
      .def_property_readonly("fallback_events",
                             [](const TrainOutcome& t) {
                               return t.result.fallback_events;
                             })
      .def_property_readonly("config_hash",
                             [](const TrainOutcome& t) {
                               return exp::hash_hex(t.cfg.hash());
                             })
      .def_property_readonly("eval",
                             [](const TrainOutcome& t) { return t.eval; })
      .def(
          "logits",
          [](const TrainOutcome& t, const std::vector<double>& obs) {
            return to_std(t.result.policy.logits(from_std(obs)));
          },
          py::arg("observation"))
      .def(
          "greedy_action",
          [](const TrainOutcome& t, const std::vector<double>& obs,
             const std::vector<bool>& allowed) {
            const Eigen::VectorXd l = t.result.policy.logits(from_std(obs));
            if (static_cast<size_t>(l.size()) != allowed.size())
              throw std::invalid_argument(
                  "allowed row does not match the action count");
            return masked_distribution(l, row_from_bools(allowed)).argmax();
          },
          py::arg("observation"), py::arg("allowed"),
          "Highest-probability action among the allowed ones.");

  m.def(
      "train",
      [](const std::string& config_json, uint64_t seed) {
        exp::ExperimentConfig cfg = exp::parse_config(config_json);
        std::optional<TrainResult> r;
        std::map<std::string, double> eval;
        {
          py::gil_scoped_release release;
          r.emplace(exp::train_one(cfg, seed));
          eval = eval_policy(cfg, r->policy);
        }
        return TrainOutcome{std::move(cfg), std::move(*r), std::move(eval)};
      },
      py::arg("config_json"), py::arg("seed") = uint64_t{0},
      "One training run for one seed, without file output. Blocks until the "
      "configured timestep budget is spent.");
}
