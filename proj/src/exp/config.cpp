#include "maskrl/exp/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace maskrl::exp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw UserError("config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& known) {
  for (const auto& [key, _] : obj.items())
    if (!known.count(key))
      fail(path.empty() ? key : path + "." + key, "unknown field");
}

template <class T>
void get(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path.empty() ? key : path + "." + std::string(key), "wrong type");
  }
}

void parse_ppo(const json& j, PpoConfig& ppo) {
  check_keys(j, "ppo",
             {"horizon", "minibatch", "epochs", "lr", "gamma", "gae_lambda",
              "clip", "value_coef", "entropy_coef", "max_grad_norm", "hidden"});
  get(j, "ppo", "horizon", ppo.horizon);
  get(j, "ppo", "minibatch", ppo.minibatch);
  get(j, "ppo", "epochs", ppo.epochs);
  get(j, "ppo", "lr", ppo.lr);
  get(j, "ppo", "gamma", ppo.gamma);
  get(j, "ppo", "gae_lambda", ppo.gae_lambda);
  get(j, "ppo", "clip", ppo.clip);
  get(j, "ppo", "value_coef", ppo.value_coef);
  get(j, "ppo", "entropy_coef", ppo.entropy_coef);
  get(j, "ppo", "max_grad_norm", ppo.max_grad_norm);
  get(j, "ppo", "hidden", ppo.hidden);
  if (ppo.horizon < 1) fail("ppo.horizon", "must be >= 1");
  if (ppo.minibatch < 1) fail("ppo.minibatch", "must be >= 1");
  if (ppo.epochs < 1) fail("ppo.epochs", "must be >= 1");
}

const std::set<std::string> kPsMasks = {"none", "inv", "inv+gr", "inv+gr+ft",
                                        "all"};
const std::set<std::string> kLmsMasks = {"none", "threshold"};
const std::set<std::string> kInvMasks = {"none", "int", "thr"};

std::string join(const std::set<std::string>& values) {
  std::string out;
  for (const auto& v : values) out += (out.empty() ? "" : "|") + v;
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UserError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UserError("config: top level must be an object");

  check_keys(j, "",
             {"environment", "mask", "seeds", "total_timesteps", "eval_episodes",
              "eval_seed", "output_dir", "paintshop", "lms", "inventory",
              "oracle", "ppo"});

  ExperimentConfig cfg;
  get(j, "", "environment", cfg.environment);
  if (cfg.environment.empty()) fail("environment", "required");
  if (cfg.environment != "paintshop" && cfg.environment != "lms" &&
      cfg.environment != "inventory")
    fail("environment",
         "unknown value \"" + cfg.environment + "\" (expected paintshop|lms|inventory)");

  get(j, "", "mask", cfg.mask);
  get(j, "", "seeds", cfg.seeds);
  get(j, "", "total_timesteps", cfg.total_timesteps);
  get(j, "", "eval_episodes", cfg.eval_episodes);
  get(j, "", "eval_seed", cfg.eval_seed);
  get(j, "", "output_dir", cfg.output_dir);
  if (cfg.seeds.empty()) fail("seeds", "must list at least one seed");
  if (cfg.total_timesteps < 1) fail("total_timesteps", "must be >= 1");
  if (cfg.eval_episodes < 1) fail("eval_episodes", "must be >= 1");

  // sections for other environments are rejected rather than ignored
  for (const char* section : {"paintshop", "lms", "inventory"})
    if (j.contains(section) && cfg.environment != section)
      fail(section, "section does not match environment \"" + cfg.environment + "\"");

  if (j.contains("paintshop")) {
    const json& p = j.at("paintshop");
    check_keys(p, "paintshop",
               {"lanes", "width", "colors", "lookahead", "sequence_length",
                "step_cap_factor"});
    get(p, "paintshop", "lanes", cfg.paintshop.lanes);
    get(p, "paintshop", "width", cfg.paintshop.width);
    get(p, "paintshop", "colors", cfg.paintshop.colors);
    get(p, "paintshop", "lookahead", cfg.paintshop.lookahead);
    get(p, "paintshop", "sequence_length", cfg.paintshop.sequence_length);
    get(p, "paintshop", "step_cap_factor", cfg.paintshop.step_cap_factor);
    if (cfg.paintshop.lanes < 1) fail("paintshop.lanes", "must be >= 1");
    if (cfg.paintshop.width < 1) fail("paintshop.width", "must be >= 1");
    if (cfg.paintshop.colors < 1) fail("paintshop.colors", "must be >= 1");
    if (cfg.paintshop.lookahead < 1) fail("paintshop.lookahead", "must be >= 1");
    if (cfg.paintshop.sequence_length < 1)
      fail("paintshop.sequence_length", "must be >= 1");
    if (cfg.paintshop.step_cap_factor < 2)
      fail("paintshop.step_cap_factor", "must be >= 2");
    if (cfg.paintshop.action_count() > ActionMask::kMaxActions)
      fail("paintshop.lanes", "too many actions (2*lanes must be <= 64)");
  }
  if (j.contains("lms")) {
    const json& p = j.at("lms");
    check_keys(p, "lms", {"sigma", "theta", "zeta", "off_budget", "curve_file"});
    get(p, "lms", "sigma", cfg.lms.sigma);
    get(p, "lms", "theta", cfg.lms.theta);
    get(p, "lms", "zeta", cfg.lms.zeta);
    get(p, "lms", "off_budget", cfg.lms.off_budget);
    get(p, "lms", "curve_file", cfg.lms.curve_file);
    if (cfg.lms.sigma < 0) fail("lms.sigma", "must be >= 0");
    if (cfg.lms.theta < 0) fail("lms.theta", "must be >= 0");
    if (cfg.lms.off_budget < 0) fail("lms.off_budget", "must be >= 0");
  }
  if (j.contains("inventory")) {
    const json& p = j.at("inventory");
    check_keys(p, "inventory",
               {"pipeline", "stochastic_lead", "lambda", "holding_cost",
                "penalty", "levels", "quantum", "horizon", "base_stock"});
    get(p, "inventory", "pipeline", cfg.inventory.pipeline);
    get(p, "inventory", "stochastic_lead", cfg.inventory.stochastic_lead);
    get(p, "inventory", "lambda", cfg.inventory.lambda);
    get(p, "inventory", "holding_cost", cfg.inventory.holding_cost);
    get(p, "inventory", "penalty", cfg.inventory.penalty);
    get(p, "inventory", "levels", cfg.inventory.levels);
    get(p, "inventory", "quantum", cfg.inventory.quantum);
    get(p, "inventory", "horizon", cfg.inventory.horizon);
    get(p, "inventory", "base_stock", cfg.inventory.base_stock);
    if (cfg.inventory.pipeline < 1) fail("inventory.pipeline", "must be >= 1");
    if (cfg.inventory.lambda < 0) fail("inventory.lambda", "must be >= 0");
    if (cfg.inventory.levels < 1 ||
        cfg.inventory.levels > ActionMask::kMaxActions)
      fail("inventory.levels", "must be in 1..64");
    if (cfg.inventory.quantum < 1) fail("inventory.quantum", "must be >= 1");
    if (cfg.inventory.horizon < 1) fail("inventory.horizon", "must be >= 1");
  }
  if (j.contains("oracle")) {
    const json& p = j.at("oracle");
    check_keys(p, "oracle", {"instances", "level", "horizon", "demand_cap"});
    get(p, "oracle", "instances", cfg.oracle.instances);
    get(p, "oracle", "level", cfg.oracle.level);
    get(p, "oracle", "horizon", cfg.oracle.horizon);
    get(p, "oracle", "demand_cap", cfg.oracle.demand_cap);
    if (cfg.oracle.instances < 1) fail("oracle.instances", "must be >= 1");
    if (cfg.oracle.horizon < 1) fail("oracle.horizon", "must be >= 1");
    if (cfg.oracle.demand_cap < 1) fail("oracle.demand_cap", "must be >= 1");
  }
  if (j.contains("ppo")) parse_ppo(j.at("ppo"), cfg.ppo);

  const std::set<std::string>* valid_masks =
      cfg.environment == "paintshop"
          ? &kPsMasks
          : cfg.environment == "lms" ? &kLmsMasks : &kInvMasks;
  if (!valid_masks->count(cfg.mask))
    fail("mask", "unknown value \"" + cfg.mask + "\" for environment " +
                     cfg.environment + " (expected " + join(*valid_masks) + ")");
  if (!kPsMasks.count(cfg.oracle.level))
    fail("oracle.level",
         "unknown value \"" + cfg.oracle.level + "\" (expected " +
             join(kPsMasks) + ")");

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string ExperimentConfig::canonical() const {
  // nlohmann objects iterate in key order, so dump() is already canonical
  json j;
  j["environment"] = environment;
  j["mask"] = mask;
  j["seeds"] = seeds;
  j["total_timesteps"] = total_timesteps;
  j["eval_episodes"] = eval_episodes;
  j["eval_seed"] = eval_seed;
  j["output_dir"] = output_dir;
  if (environment == "paintshop")
    j["paintshop"] = {{"lanes", paintshop.lanes},
                      {"width", paintshop.width},
                      {"colors", paintshop.colors},
                      {"lookahead", paintshop.lookahead},
                      {"sequence_length", paintshop.sequence_length},
                      {"step_cap_factor", paintshop.step_cap_factor}};
  if (environment == "lms")
    j["lms"] = {{"sigma", lms.sigma},
                {"theta", lms.theta},
                {"zeta", lms.zeta},
                {"off_budget", lms.off_budget},
                {"curve_file", lms.curve_file}};
  if (environment == "inventory")
    j["inventory"] = {{"pipeline", inventory.pipeline},
                      {"stochastic_lead", inventory.stochastic_lead},
                      {"lambda", inventory.lambda},
                      {"holding_cost", inventory.holding_cost},
                      {"penalty", inventory.penalty},
                      {"levels", inventory.levels},
                      {"quantum", inventory.quantum},
                      {"horizon", inventory.horizon},
                      {"base_stock", inventory.base_stock}};
  j["oracle"] = {{"instances", oracle.instances},
                 {"level", oracle.level},
                 {"horizon", oracle.horizon},
                 {"demand_cap", oracle.demand_cap}};
  j["ppo"] = {{"horizon", ppo.horizon},
              {"minibatch", ppo.minibatch},
              {"epochs", ppo.epochs},
              {"lr", ppo.lr},
              {"gamma", ppo.gamma},
              {"gae_lambda", ppo.gae_lambda},
              {"clip", ppo.clip},
              {"value_coef", ppo.value_coef},
              {"entropy_coef", ppo.entropy_coef},
              {"max_grad_norm", ppo.max_grad_norm},
              {"hidden", ppo.hidden}};
  return j.dump();
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

lms::Config ExperimentConfig::lms_config() const {
  lms::Config c;
  c.curve = lms.curve_file.empty() ? lms::default_curve()
                                   : lms::load_curve(lms.curve_file);
  c.sigma = lms.sigma;
  c.zeta = lms.zeta;
  c.off_budget = lms.off_budget;
  return c;
}

inv::Config ExperimentConfig::inv_config() const {
  inv::Config c;
  c.pipeline = inventory.pipeline;
  c.stochastic_lead = inventory.stochastic_lead;
  c.lambda = inventory.lambda;
  c.holding_cost = inventory.holding_cost;
  c.penalty = inventory.penalty;
  c.levels = inventory.levels;
  c.quantum = inventory.quantum;
  c.horizon = inventory.horizon;
  return c;
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
  const char* root = std::getenv("MASKRL_OUT");
  if (root && *root && !cfg.output_dir.empty() && cfg.output_dir[0] != '/')
    return std::string(root) + "/" + cfg.output_dir;
  return cfg.output_dir;
}

}  // namespace maskrl::exp
