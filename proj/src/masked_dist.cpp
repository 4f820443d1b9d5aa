#include "maskrl/masked_dist.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace maskrl {

MaskedDistribution masked_distribution(const Eigen::VectorXd& logits,
                                       ActionMask row, const ActionMask* fallback,
                                       long* fallback_events) {
  const int n = static_cast<int>(logits.size());
  assert(row.size() == n);

  MaskedDistribution d;
  if (!row.any()) {
    row = fallback ? *fallback : ActionMask::all(n);
    assert(row.any());
    d.fallback_used = true;
    if (fallback_events) ++*fallback_events;
  }
  d.admissible = row;

  Eigen::VectorXd z(n);
  double zmax = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    z[a] = row.allowed(a) ? logits[a] : kForbiddenLogit;
    if (row.allowed(a) && z[a] > zmax) zmax = z[a];
  }

  d.shifted = z.array() - zmax;
  d.probs.resize(n);
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    // exp underflows to exactly 0 for the sentinel; forced for tiny real logits
    double e = row.allowed(a) ? std::exp(d.shifted[a]) : 0.0;
    d.probs[a] = e;
    sum += e;
  }
  d.probs /= sum;
  d.log_norm = std::log(sum);
  return d;
}

double MaskedDistribution::entropy() const {
  double h = 0.0;
  for (int a = 0; a < probs.size(); ++a)
    if (probs[a] > 0.0) h -= probs[a] * (shifted[a] - log_norm);
  return h;
}

int MaskedDistribution::sample(double u) const {
  assert(u >= 0.0 && u < 1.0);
  double cdf = 0.0;
  int last_admissible = -1;
  for (int a = 0; a < probs.size(); ++a) {
    if (!admissible.allowed(a)) continue;
    last_admissible = a;
    cdf += probs[a];
    if (u < cdf) return a;
  }
  // rounding residue: cdf summed to slightly below 1
  assert(last_admissible >= 0);
  return last_admissible;
}

int MaskedDistribution::argmax() const {
  int best = -1;
  double best_p = -1.0;
  for (int a = 0; a < probs.size(); ++a)
    if (admissible.allowed(a) && probs[a] > best_p) {
      best = a;
      best_p = probs[a];
    }
  assert(best >= 0);
  return best;
}

Eigen::VectorXd MaskedDistribution::log_prob_grad(int a) const {
  assert(admissible.allowed(a));
  Eigen::VectorXd g = -probs;
  g[a] += 1.0;
  return g;
}

Eigen::VectorXd MaskedDistribution::entropy_grad() const {
  const double h = entropy();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(probs.size());
  for (int a = 0; a < probs.size(); ++a)
    if (probs[a] > 0.0) g[a] = -probs[a] * ((shifted[a] - log_norm) + h);
  return g;
}

}  // namespace maskrl
