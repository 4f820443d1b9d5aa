#include "maskrl/exp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "maskrl/exp/csv.hpp"
#include "maskrl/exp/oracle.hpp"
#include "maskrl/masked_dist.hpp"
#include "maskrl/version.hpp"

namespace maskrl::exp {

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return resolve_output_dir(cfg) + "/" + name;
}

std::string ckpt_path(const ExperimentConfig& cfg, uint64_t seed) {
  return out_path(cfg, "policy_seed" + std::to_string(seed) + ".ckpt");
}

void write_resolved_config(const ExperimentConfig& cfg) {
  const std::string path = out_path(cfg, "config.json");
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << cfg.canonical() << "\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move " + tmp + " into place");
}

// argmax play of a policy under a mask, with the environment's validity mask
// as the empty-row fallback
template <class E>
auto argmax_act(const E& env, const PolicyBundle& policy,
                Mask<typename E::State> mask) {
  return [&policy, mask = std::move(mask), fallback = env.validity_mask()](
             const typename E::State& s, const Eigen::VectorXd& obs) {
    const ActionMask fb = fallback(s);
    return masked_distribution(policy.logits(obs), mask(s), &fb).argmax();
  };
}

}  // namespace

Mask<ps::State> ps_mask(const ExperimentConfig& cfg) {
  return ps::combined_mask(cfg.mask, cfg.paintshop);
}

std::string ps_eval_level(const std::string& train_level) {
  return train_level == "none" ? "inv" : train_level;
}

Mask<lms::State> lms_mask(const ExperimentConfig& cfg) {
  if (cfg.mask == "threshold") return lms::forecast_threshold_mask(cfg.lms.theta);
  return allow_all<lms::State>(2);
}

Mask<inv::State> inv_mask(const ExperimentConfig& cfg) {
  const inv::Config env_cfg = cfg.inv_config();
  if (cfg.mask == "int")
    return inv::interval_mask(cfg.inventory.base_stock, env_cfg);
  if (cfg.mask == "thr")
    return inv::threshold_mask(cfg.inventory.base_stock, env_cfg);
  return allow_all<inv::State>(env_cfg.levels);
}

namespace {

template <class ActFn>
PsEvalResult ps_run_episodes(const ExperimentConfig& cfg, ActFn&& act) {
  ps::Env env(cfg.paintshop);
  PsEvalResult res;
  for (int i = 0; i < cfg.eval_episodes; ++i) {
    const std::vector<int> seq = ps::generate_instance(
        derive_seed(cfg.eval_seed, Stream::kEval, i), cfg.paintshop);
    Eigen::VectorXd obs = env.reset_with_sequence(seq);
    double ep_reward = 0.0;
    bool done = false;
    while (!done) {
      const StepOutcome out = env.step(act(env.state(), obs));
      obs = out.observation;
      ep_reward += out.reward;
      done = out.done;
    }
    const int changes = ps::count_color_changes(env.outgoing());
    res.per_episode_changes.push_back(changes);
    res.mean_color_changes += changes;
    res.mean_reward += ep_reward;
    if (env.state().retrieved == cfg.paintshop.sequence_length)
      res.completed_fraction += 1.0;
  }
  res.mean_color_changes /= cfg.eval_episodes;
  res.mean_reward /= cfg.eval_episodes;
  res.completed_fraction /= cfg.eval_episodes;
  return res;
}

}  // namespace

PsEvalResult ps_evaluate_policy(const ExperimentConfig& cfg,
                                const PolicyBundle& policy) {
  ps::Env probe(cfg.paintshop);
  const Mask<ps::State> mask =
      ps::combined_mask(ps_eval_level(cfg.mask), cfg.paintshop);
  return ps_run_episodes(cfg, argmax_act(probe, policy, mask));
}

PsEvalResult ps_evaluate_greedy(const ExperimentConfig& cfg) {
  // one tie-break stream per episode keeps episodes independent of ordering
  long episode = -1;
  Rng rng(0);
  return ps_run_episodes(
      cfg, [&, ps_cfg = cfg.paintshop](const ps::State& s,
                                       const Eigen::VectorXd&) mutable {
        if (s.steps_taken == 0) {
          ++episode;
          rng = Rng(derive_seed(cfg.eval_seed, Stream::kBaseline, episode));
        }
        return ps::greedy_action(s, ps_cfg, rng);
      });
}

lms::EvalSummary lms_evaluate_policy(const ExperimentConfig& cfg,
                                     const PolicyBundle& policy) {
  lms::Env env(cfg.lms_config());
  return lms::evaluate(env, argmax_act(env, policy, lms_mask(cfg)),
                       cfg.eval_episodes, cfg.eval_seed);
}

lms::EvalSummary lms_evaluate_rule(const ExperimentConfig& cfg) {
  lms::Env env(cfg.lms_config());
  const double zeta = cfg.lms.zeta;
  return lms::evaluate(
      env,
      [zeta](const lms::State& s, const Eigen::VectorXd&) {
        return s.forecast >= zeta ? lms::kActionOff : lms::kActionOn;
      },
      cfg.eval_episodes, cfg.eval_seed);
}

inv::SimSummary inv_evaluate_policy(const ExperimentConfig& cfg,
                                    const PolicyBundle& policy) {
  inv::Env env(cfg.inv_config());
  return inv::simulate_policy(env, argmax_act(env, policy, inv_mask(cfg)),
                              cfg.eval_episodes, cfg.eval_seed);
}

TrainResult train_one(const ExperimentConfig& cfg, uint64_t seed, bool quiet) {
  TrainHooks hooks;
  long next_report = 100'000;
  if (!quiet)
    hooks.on_update = [&next_report, seed](const CurvePoint& p,
                                           const UpdateStats&) {
      if (p.timesteps >= next_report) {
        std::fprintf(stderr, "  seed %llu: %ld steps, ep_rew_mean %.3f\n",
                     static_cast<unsigned long long>(seed), p.timesteps,
                     p.mean_episode_reward);
        next_report += 100'000;
      }
      return true;
    };

  if (cfg.environment == "paintshop") {
    ps::Env env(cfg.paintshop);
    return train(env, ps_mask(cfg), cfg.ppo, cfg.total_timesteps, seed, hooks);
  }
  if (cfg.environment == "lms") {
    lms::Env env(cfg.lms_config());
    return train(env, lms_mask(cfg), cfg.ppo, cfg.total_timesteps, seed, hooks);
  }
  inv::Env env(cfg.inv_config());
  return train(env, inv_mask(cfg), cfg.ppo, cfg.total_timesteps, seed, hooks);
}

namespace {

Table eval_table(const ExperimentConfig& cfg) {
  Table t;
  if (cfg.environment == "paintshop")
    t.header = {"config_hash", "version", "seed",
                "mean_color_changes", "mean_reward", "completed_fraction"};
  else if (cfg.environment == "lms")
    t.header = {"config_hash", "version", "seed", "solved_fraction",
                "mean_reward"};
  else
    t.header = {"config_hash", "version", "seed", "mean_cost_per_step",
                "std_error"};
  return t;
}

void append_eval_row(Table& t, const ExperimentConfig& cfg,
                     const std::string& seed_label,
                     const PolicyBundle& policy) {
  const std::string hash = hash_hex(cfg.hash());
  if (cfg.environment == "paintshop") {
    const PsEvalResult r = ps_evaluate_policy(cfg, policy);
    t.rows.push_back({hash, kVersion, seed_label,
                      format_double(r.mean_color_changes),
                      format_double(r.mean_reward),
                      format_double(r.completed_fraction)});
  } else if (cfg.environment == "lms") {
    const lms::EvalSummary r = lms_evaluate_policy(cfg, policy);
    t.rows.push_back({hash, kVersion, seed_label,
                      format_double(r.solved_fraction),
                      format_double(r.mean_reward)});
  } else {
    const inv::SimSummary r = inv_evaluate_policy(cfg, policy);
    t.rows.push_back({hash, kVersion, seed_label,
                      format_double(r.mean_cost_per_step),
                      format_double(r.std_error)});
  }
}

void write_curve(const ExperimentConfig& cfg, uint64_t seed,
                 const std::vector<CurvePoint>& curve) {
  Table t;
  t.header = {"config_hash", "version", "seed", "timesteps",
              "mean_episode_reward"};
  const std::string hash = hash_hex(cfg.hash());
  for (const CurvePoint& p : curve)
    t.rows.push_back({hash, kVersion, std::to_string(seed),
                      std::to_string(p.timesteps),
                      format_double(p.mean_episode_reward)});
  write_csv(out_path(cfg, "curve_seed" + std::to_string(seed) + ".csv"), t);
}

}  // namespace

void cmd_train(const ExperimentConfig& cfg, const RunOptions& opt) {
  ensure_dir(resolve_output_dir(cfg));
  write_resolved_config(cfg);

  const int n = static_cast<int>(cfg.seeds.size());
  std::vector<TrainResult> results(n);
  std::atomic<int> next{0};
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int jobs = std::max(1, std::min(opt.jobs > 0 ? opt.jobs : hw, n));

  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      const uint64_t seed = cfg.seeds[i];
      if (!opt.quiet)
        std::fprintf(stderr, "training seed %llu (%s, mask %s)\n",
                     static_cast<unsigned long long>(seed),
                     cfg.environment.c_str(), cfg.mask.c_str());
      results[i] = train_one(cfg, seed, opt.quiet || jobs > 1);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  Table evals = eval_table(cfg);
  for (int i = 0; i < n; ++i) {
    const uint64_t seed = cfg.seeds[i];
    write_curve(cfg, seed, results[i].curve);
    save_checkpoint(ckpt_path(cfg, seed), results[i].policy, cfg.hash());
    append_eval_row(evals, cfg, std::to_string(seed), results[i].policy);
    if (!opt.quiet)
      std::fprintf(stderr,
                   "seed %llu done: %ld steps, %ld episodes, "
                   "%ld mask fallbacks\n",
                   static_cast<unsigned long long>(seed), results[i].timesteps,
                   results[i].episodes, results[i].fallback_events);
  }
  write_csv(out_path(cfg, "eval.csv"), evals);
  std::cout << "trained " << n << " seed(s) -> " << resolve_output_dir(cfg)
            << "\n";
}

void cmd_eval(const ExperimentConfig& cfg, bool ignore_hash) {
  Table evals = eval_table(cfg);
  for (const uint64_t seed : cfg.seeds) {
    const std::string path = ckpt_path(cfg, seed);
    if (!std::filesystem::exists(path))
      throw UserError("checkpoint not found: " + path);
    PolicyBundle policy;
    try {
      policy = load_checkpoint(path, cfg.hash(), ignore_hash);
    } catch (const std::runtime_error& e) {
      throw UserError(e.what());
    }
    append_eval_row(evals, cfg, std::to_string(seed), policy);
  }
  write_csv(out_path(cfg, "eval.csv"), evals);
  std::cout << "evaluated " << cfg.seeds.size() << " checkpoint(s) -> "
            << out_path(cfg, "eval.csv") << "\n";
}

void cmd_baseline(const ExperimentConfig& cfg) {
  ensure_dir(resolve_output_dir(cfg));
  Table t;
  const std::string hash = hash_hex(cfg.hash());
  if (cfg.environment == "paintshop") {
    const PsEvalResult r = ps_evaluate_greedy(cfg);
    t.header = {"config_hash", "version", "baseline", "mean_color_changes",
                "mean_reward", "completed_fraction"};
    t.rows.push_back({hash, kVersion, "greedy",
                      format_double(r.mean_color_changes),
                      format_double(r.mean_reward),
                      format_double(r.completed_fraction)});
  } else if (cfg.environment == "lms") {
    const lms::EvalSummary r = lms_evaluate_rule(cfg);
    t.header = {"config_hash", "version", "baseline", "solved_fraction",
                "mean_reward"};
    t.rows.push_back({hash, kVersion, "threshold_rule",
                      format_double(r.solved_fraction),
                      format_double(r.mean_reward)});
  } else {
    const inv::SimSummary r = inv::base_stock_simulate(
        cfg.inv_config(), cfg.inventory.base_stock, cfg.eval_episodes,
        cfg.eval_seed);
    t.header = {"config_hash", "version", "baseline", "mean_cost_per_step",
                "std_error"};
    t.rows.push_back({hash, kVersion, "base_stock",
                      format_double(r.mean_cost_per_step),
                      format_double(r.std_error)});
  }
  write_csv(out_path(cfg, "baseline.csv"), t);
  std::cout << "baseline -> " << out_path(cfg, "baseline.csv") << "\n";
}

void cmd_oracle(const ExperimentConfig& cfg) {
  ensure_dir(resolve_output_dir(cfg));
  Table t;
  const std::string hash = hash_hex(cfg.hash());
  if (cfg.environment == "paintshop") {
    const long space =
        static_cast<long>(cfg.paintshop.lanes) * cfg.paintshop.width;
    if (space > 8 || cfg.paintshop.sequence_length > 16)
      throw UserError(
          "paintshop oracle is exhaustive; keep lanes*width <= 8 and "
          "sequence_length <= 16");
    t.header = {"config_hash", "version", "instance", "level",
                "optimal_color_changes", "states_visited"};
    for (int i = 0; i < cfg.oracle.instances; ++i) {
      const std::vector<int> seq = ps::generate_instance(
          derive_seed(cfg.eval_seed, Stream::kEval, i), cfg.paintshop);
      const PsOracleResult r =
          ps_optimal_changes(seq, cfg.paintshop, cfg.oracle.level);
      t.rows.push_back({hash, kVersion, std::to_string(i), cfg.oracle.level,
                        std::to_string(r.optimal_changes),
                        std::to_string(r.states_visited)});
      std::cout << "instance " << i << ": optimal color changes "
                << r.optimal_changes << " under level " << cfg.oracle.level
                << "\n";
    }
  } else if (cfg.environment == "inventory") {
    inv::Config small = cfg.inv_config();
    InvDp dp(small, cfg.oracle.horizon, cfg.oracle.demand_cap);
    const double total = dp.value(0, 0, 0);
    const double per_step = total / cfg.oracle.horizon;
    t.header = {"config_hash", "version", "horizon", "expected_total_cost",
                "expected_cost_per_step"};
    t.rows.push_back({hash, kVersion, std::to_string(cfg.oracle.horizon),
                      format_double(total), format_double(per_step)});
    std::cout << "optimal expected cost over " << cfg.oracle.horizon
              << " periods: " << total << " (" << per_step << " per step)\n";
  } else {
    throw UserError("oracle supports environments paintshop and inventory");
  }
  write_csv(out_path(cfg, "oracle.csv"), t);
}

void cmd_curves(const std::vector<std::string>& inputs,
                const std::string& output) {
  if (inputs.empty()) throw UserError("curves: no input files given");
  Table merged;
  for (const std::string& path : inputs) {
    if (!std::filesystem::exists(path))
      throw UserError("curves: no such file: " + path);
    const Table t = read_csv(path);
    if (merged.header.empty())
      merged.header = t.header;
    else if (merged.header != t.header)
      throw UserError("curves: header mismatch in " + path);
    for (const auto& row : t.rows) merged.rows.push_back(row);
  }
  write_csv(output, merged);
  std::cout << "merged " << inputs.size() << " file(s) -> " << output << "\n";
}

}  // namespace maskrl::exp
