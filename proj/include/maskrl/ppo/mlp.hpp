#pragma once

#include <Eigen/Core>

#include "maskrl/rng.hpp"

namespace maskrl {

// Fully connected network with two tanh hidden layers and a linear head,
// batch forward/backward with one column per sample. Weights are stored as
// (out x in) matrices acting on column vectors.
struct Mlp {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  Mlp() = default;
  Mlp(int in, int hidden, int out);

  int in() const { return static_cast<int>(w1.cols()); }
  int hidden() const { return static_cast<int>(w1.rows()); }
  int out() const { return static_cast<int>(w3.rows()); }

  // orthogonal weights (gain sqrt(2) hidden, head_gain on the last layer),
  // zero biases
  void init_orthogonal(double head_gain, Rng& rng);

  struct Cache {
    Eigen::MatrixXd x, h1, h2;  // inputs and post-tanh activations
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
  Eigen::VectorXd forward1(const Eigen::VectorXd& x) const;

  struct Grads {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    void match_zero(const Mlp& net);
    double squared_norm() const;
  };

  // dout: gradient of the loss wrt the head outputs, same shape as forward's
  // result; accumulates into g
  void backward(const Cache& cache, const Eigen::MatrixXd& dout, Grads& g) const;

  // iterate parameter/grad/moment tensors in a fixed order
  template <class F>
  static void zip(Mlp& net, Grads& a, Grads& b, Grads& c, F&& f) {
    f(net.w1, a.w1, b.w1, c.w1);
    f(net.w2, a.w2, b.w2, c.w2);
    f(net.w3, a.w3, b.w3, c.w3);
    f(net.b1, a.b1, b.b1, c.b1);
    f(net.b2, a.b2, b.b2, c.b2);
    f(net.b3, a.b3, b.b3, c.b3);
  }
};

// one optimizer instance covers every parameter tensor passed through step()
struct Adam {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-5;
  long t = 0;

  Mlp::Grads m_actor, v_actor, m_critic, v_critic;

  void init(const Mlp& actor, const Mlp& critic);

  // applies one update to both networks; grads were already clipped
  void step(Mlp& actor, Mlp::Grads& ga, Mlp& critic, Mlp::Grads& gc);
};

// global gradient clipping across both networks; returns the pre-clip norm
double clip_grad_norm(Mlp::Grads& ga, Mlp::Grads& gc, double max_norm);

// orthogonal matrix via Householder QR of a standard normal draw, sign-fixed
// so the factorization is unique, scaled by gain
Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng);

}  // namespace maskrl
