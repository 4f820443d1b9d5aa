#include "maskrl/ppo/ppo.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "maskrl/masked_dist.hpp"

namespace maskrl {

PolicyBundle::PolicyBundle(int obs_dim, int action_count, const PpoConfig& cfg,
                           uint64_t root_seed)
    : actor(obs_dim, cfg.hidden, action_count),
      critic(obs_dim, cfg.hidden, 1) {
  Rng rng(derive_seed(root_seed, Stream::kInit, 0));
  actor.init_orthogonal(0.01, rng);
  critic.init_orthogonal(1.0, rng);
  opt.lr = cfg.lr;
  opt.init(actor, critic);
}

void gae(const Trajectory& traj, double gamma, double lambda,
         std::vector<double>& advantages, std::vector<double>& returns) {
  const int n = traj.steps();
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double last_gae = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double next_value =
        t == n - 1 ? traj.tail_value : traj.values[t + 1];
    const double nonterminal = traj.dones[t] ? 0.0 : 1.0;
    const double delta = traj.rewards[t] +
                         gamma * next_value * nonterminal - traj.values[t];
    last_gae = delta + gamma * lambda * nonterminal * last_gae;
    advantages[t] = last_gae;
    returns[t] = advantages[t] + traj.values[t];
  }
}

namespace {

void check_finite(double v, const char* term) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("ppo_update: non-finite ") + term +
                             ", update aborted");
}

}  // namespace

UpdateStats ppo_update(PolicyBundle& policy, const Trajectory& traj,
                       const PpoConfig& cfg, Rng& shuffle_rng) {
  const int n = traj.steps();
  assert(n > 0);

  std::vector<double> adv, ret;
  gae(traj, cfg.gamma, cfg.gae_lambda, adv, ret);

  // standardize once over the whole batch
  double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= n;
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : adv) a = (a - mean) * inv_std;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  long minibatches = 0;

  Mlp::Grads ga, gc;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates, driven by our own rng for reproducibility
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);

    for (int start = 0; start < n; start += cfg.minibatch) {
      const int b = std::min(cfg.minibatch, n - start);

      Eigen::MatrixXd x(traj.observations.rows(), b);
      for (int i = 0; i < b; ++i)
        x.col(i) = traj.observations.col(order[start + i]);

      Mlp::Cache actor_cache, critic_cache;
      const Eigen::MatrixXd logits = policy.actor.forward(x, &actor_cache);
      const Eigen::MatrixXd values = policy.critic.forward(x, &critic_cache);

      Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(logits.rows(), b);
      Eigen::MatrixXd dvalues(1, b);

      double policy_loss = 0.0, value_loss = 0.0, entropy_sum = 0.0;
      double kl_sum = 0.0;
      int clipped = 0;

      for (int i = 0; i < b; ++i) {
        const int idx = order[start + i];
        const int action = traj.actions[idx];
        const double advantage = adv[idx];

        const MaskedDistribution dist =
            masked_distribution(logits.col(i), traj.masks[idx]);
        const double logp_new = dist.log_prob(action);
        const double ratio = std::exp(logp_new - traj.log_probs[idx]);

        const double surr1 = ratio * advantage;
        const double clipped_ratio =
            std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
        const double surr2 = clipped_ratio * advantage;
        policy_loss -= std::min(surr1, surr2);

        // d(-min)/dlogp. When the clipped branch is strictly smaller its
        // clamp is necessarily active, so its gradient is zero; on ties both
        // branches agree (an inactive clamp makes them identical, an active
        // one forces advantage = 0).
        const double dsurr_dlogp = surr1 <= surr2 ? ratio * advantage : 0.0;
        const double dloss_dlogp = -dsurr_dlogp / b;

        const Eigen::VectorXd glp = dist.log_prob_grad(action);
        dlogits.col(i) = dloss_dlogp * glp;
        if (cfg.entropy_coef != 0.0)
          dlogits.col(i) -= (cfg.entropy_coef / b) * dist.entropy_grad();

        entropy_sum += dist.entropy();
        if (std::abs(ratio - 1.0) > cfg.clip) ++clipped;
        const double logr = logp_new - traj.log_probs[idx];
        kl_sum += std::exp(logr) - 1.0 - logr;

        const double verr = values(0, i) - ret[idx];
        value_loss += verr * verr;
        dvalues(0, i) = cfg.value_coef * 2.0 * verr / b;
      }

      policy_loss /= b;
      value_loss /= b;
      const double entropy_mean = entropy_sum / b;
      const double total = policy_loss + cfg.value_coef * value_loss -
                           cfg.entropy_coef * entropy_mean;
      check_finite(policy_loss, "policy loss");
      check_finite(value_loss, "value loss");
      check_finite(entropy_mean, "entropy");
      check_finite(total, "total loss");

      ga.match_zero(policy.actor);
      gc.match_zero(policy.critic);
      policy.actor.backward(actor_cache, dlogits, ga);
      policy.critic.backward(critic_cache, dvalues, gc);
      stats.grad_norm += clip_grad_norm(ga, gc, cfg.max_grad_norm);
      policy.opt.step(policy.actor, ga, policy.critic, gc);

      stats.policy_loss += policy_loss;
      stats.value_loss += value_loss;
      stats.entropy += entropy_mean;
      stats.clip_fraction += static_cast<double>(clipped) / b;
      stats.approx_kl += kl_sum / b;
      ++minibatches;
    }
  }

  stats.policy_loss /= minibatches;
  stats.value_loss /= minibatches;
  stats.entropy /= minibatches;
  stats.clip_fraction /= minibatches;
  stats.approx_kl /= minibatches;
  stats.grad_norm /= minibatches;
  return stats;
}

namespace {

constexpr char kMagic[8] = {'M', 'K', 'R', 'L', 'C', 'K', 'P', '1'};

void put_u64(std::ostream& out, uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  put_u64(out, static_cast<uint64_t>(m.rows()));
  put_u64(out, static_cast<uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Eigen::MatrixXd get_matrix(std::istream& in) {
  const auto rows = static_cast<Eigen::Index>(get_u64(in));
  const auto cols = static_cast<Eigen::Index>(get_u64(in));
  if (rows < 0 || cols < 0 || rows > 1 << 20 || cols > 1 << 20)
    throw std::runtime_error("checkpoint: corrupt tensor header");
  Eigen::MatrixXd m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  return m;
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
  put_u64(out, static_cast<uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
}

Eigen::VectorXd get_vector(std::istream& in) {
  const auto n = static_cast<Eigen::Index>(get_u64(in));
  if (n < 0 || n > 1 << 24)
    throw std::runtime_error("checkpoint: corrupt tensor header");
  Eigen::VectorXd v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double) * v.size()));
  return v;
}

void put_net(std::ostream& out, const Mlp& net) {
  put_matrix(out, net.w1);
  put_matrix(out, net.w2);
  put_matrix(out, net.w3);
  put_vector(out, net.b1);
  put_vector(out, net.b2);
  put_vector(out, net.b3);
}

Mlp get_net(std::istream& in) {
  Mlp net;
  net.w1 = get_matrix(in);
  net.w2 = get_matrix(in);
  net.w3 = get_matrix(in);
  net.b1 = get_vector(in);
  net.b2 = get_vector(in);
  net.b3 = get_vector(in);
  return net;
}

void put_grads(std::ostream& out, const Mlp::Grads& g) {
  put_matrix(out, g.w1);
  put_matrix(out, g.w2);
  put_matrix(out, g.w3);
  put_vector(out, g.b1);
  put_vector(out, g.b2);
  put_vector(out, g.b3);
}

Mlp::Grads get_grads(std::istream& in) {
  Mlp::Grads g;
  g.w1 = get_matrix(in);
  g.w2 = get_matrix(in);
  g.w3 = get_matrix(in);
  g.b1 = get_vector(in);
  g.b2 = get_vector(in);
  g.b3 = get_vector(in);
  return g;
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyBundle& policy,
                     uint64_t config_hash) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp);
    out.write(kMagic, sizeof(kMagic));
    put_u64(out, config_hash);
    put_net(out, policy.actor);
    put_net(out, policy.critic);
    put_u64(out, static_cast<uint64_t>(policy.opt.t));
    // double bit pattern survives the round trip untouched
    uint64_t lr_bits;
    std::memcpy(&lr_bits, &policy.opt.lr, 8);
    put_u64(out, lr_bits);
    put_grads(out, policy.opt.m_actor);
    put_grads(out, policy.opt.v_actor);
    put_grads(out, policy.opt.m_critic);
    put_grads(out, policy.opt.v_critic);
    if (!out) throw std::runtime_error("short write on checkpoint: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move checkpoint into place: " + path);
}

PolicyBundle load_checkpoint(const std::string& path, uint64_t expected_hash,
                             bool ignore_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const uint64_t hash = get_u64(in);
  if (!ignore_hash && hash != expected_hash)
    throw std::runtime_error(
        "checkpoint was produced under a different configuration: " + path);
  PolicyBundle p;
  p.actor = get_net(in);
  p.critic = get_net(in);
  p.opt.t = static_cast<long>(get_u64(in));
  const uint64_t lr_bits = get_u64(in);
  std::memcpy(&p.opt.lr, &lr_bits, 8);
  p.opt.m_actor = get_grads(in);
  p.opt.v_actor = get_grads(in);
  p.opt.m_critic = get_grads(in);
  p.opt.v_critic = get_grads(in);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return p;
}

}  // namespace maskrl
