#include "maskrl/ppo/mlp.hpp"

#include <Eigen/QR>
#include <cassert>
#include <cmath>

namespace maskrl {

Mlp::Mlp(int in, int hidden, int out) {
  w1.setZero(hidden, in);
  w2.setZero(hidden, hidden);
  w3.setZero(out, hidden);
  b1.setZero(hidden);
  b2.setZero(hidden);
  b3.setZero(out);
}

Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  // QR of a normal draw; flip columns so diag(R) > 0, making Q unique and
  // uniformly distributed. Rectangular shapes factor the long side.
  const bool transpose = rows < cols;
  const int r = transpose ? cols : rows;
  const int c = transpose ? rows : cols;
  Eigen::MatrixXd g(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
  const Eigen::MatrixXd rm = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (int j = 0; j < c; ++j)
    if (rm(j, j) < 0) q.col(j) *= -1.0;
  q *= gain;
  return transpose ? q.transpose() : q;
}

void Mlp::init_orthogonal(double head_gain, Rng& rng) {
  w1 = orthogonal(static_cast<int>(w1.rows()), static_cast<int>(w1.cols()),
                  std::sqrt(2.0), rng);
  w2 = orthogonal(static_cast<int>(w2.rows()), static_cast<int>(w2.cols()),
                  std::sqrt(2.0), rng);
  w3 = orthogonal(static_cast<int>(w3.rows()), static_cast<int>(w3.cols()),
                  head_gain, rng);
  b1.setZero();
  b2.setZero();
  b3.setZero();
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  Eigen::MatrixXd h1 = ((w1 * x).colwise() + b1).array().tanh();
  Eigen::MatrixXd h2 = ((w2 * h1).colwise() + b2).array().tanh();
  Eigen::MatrixXd y = (w3 * h2).colwise() + b3;
  if (cache) {
    cache->x = x;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
  }
  return y;
}

Eigen::VectorXd Mlp::forward1(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd h1 = ((w1 * x) + b1).array().tanh();
  const Eigen::VectorXd h2 = ((w2 * h1) + b2).array().tanh();
  return (w3 * h2) + b3;
}

void Mlp::Grads::match_zero(const Mlp& net) {
  w1.setZero(net.w1.rows(), net.w1.cols());
  w2.setZero(net.w2.rows(), net.w2.cols());
  w3.setZero(net.w3.rows(), net.w3.cols());
  b1.setZero(net.b1.size());
  b2.setZero(net.b2.size());
  b3.setZero(net.b3.size());
}

double Mlp::Grads::squared_norm() const {
  return w1.squaredNorm() + w2.squaredNorm() + w3.squaredNorm() +
         b1.squaredNorm() + b2.squaredNorm() + b3.squaredNorm();
}

void Mlp::backward(const Cache& c, const Eigen::MatrixXd& dout, Grads& g) const {
  // tanh' = 1 - tanh^2, activations are cached post-tanh
  g.w3 += dout * c.h2.transpose();
  g.b3 += dout.rowwise().sum();
  Eigen::MatrixXd dh2 =
      (w3.transpose() * dout).array() * (1.0 - c.h2.array().square());
  g.w2 += dh2 * c.h1.transpose();
  g.b2 += dh2.rowwise().sum();
  Eigen::MatrixXd dh1 =
      (w2.transpose() * dh2).array() * (1.0 - c.h1.array().square());
  g.w1 += dh1 * c.x.transpose();
  g.b1 += dh1.rowwise().sum();
}

void Adam::init(const Mlp& actor, const Mlp& critic) {
  m_actor.match_zero(actor);
  v_actor.match_zero(actor);
  m_critic.match_zero(critic);
  v_critic.match_zero(critic);
  t = 0;
}

namespace {

template <class T>
void adam_tensor(T& param, const T& grad, T& m, T& v, double lr, double b1,
                 double b2, double eps, long t) {
  m = b1 * m + (1.0 - b1) * grad;
  v.array() = b2 * v.array() + (1.0 - b2) * grad.array().square();
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t));
  param.array() -=
      lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
}

}  // namespace

void Adam::step(Mlp& actor, Mlp::Grads& ga, Mlp& critic, Mlp::Grads& gc) {
  ++t;
  Mlp::zip(actor, ga, m_actor, v_actor, [&](auto& p, auto& g, auto& m, auto& v) {
    adam_tensor(p, g, m, v, lr, beta1, beta2, eps, t);
  });
  Mlp::zip(critic, gc, m_critic, v_critic,
           [&](auto& p, auto& g, auto& m, auto& v) {
             adam_tensor(p, g, m, v, lr, beta1, beta2, eps, t);
           });
}

double clip_grad_norm(Mlp::Grads& ga, Mlp::Grads& gc, double max_norm) {
  const double norm = std::sqrt(ga.squared_norm() + gc.squared_norm());
  const double coef = max_norm / (norm + 1e-6);
  if (coef < 1.0) {
    for (auto* g : {&ga, &gc}) {
      g->w1 *= coef;
      g->w2 *= coef;
      g->w3 *= coef;
      g->b1 *= coef;
      g->b2 *= coef;
      g->b3 *= coef;
    }
  }
  return norm;
}

}  // namespace maskrl
