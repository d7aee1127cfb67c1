// Copyright 2026 The MAIC Testbed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared active-inference math: generalized beliefs, sensory prediction
// errors, Laplace free energy, attractor dynamics, Euler integration.

#ifndef MAIC_FREE_ENERGY_HPP_
#define MAIC_FREE_ENERGY_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace maic {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Image = Eigen::MatrixXd;  // grayscale, values in [0, 1]

inline bool AllFinite(const Vec& v) { return v.allFinite(); }

// Proprioceptive belief in generalized coordinates, truncated at order 2:
// position, velocity and acceleration estimates.
struct GeneralizedBelief {
  Vec mu;   // rad
  Vec mu1;  // rad/s
  Vec mu2;  // rad/s^2

  static GeneralizedBelief Zero(Eigen::Index n) {
    return {Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
  }

  void Validate() const {
    if (mu1.size() != mu.size() || mu2.size() != mu.size())
      throw std::invalid_argument("GeneralizedBelief: order lengths differ");
    if (!AllFinite(mu) || !AllFinite(mu1) || !AllFinite(mu2))
      throw std::invalid_argument("GeneralizedBelief: non-finite entries");
  }
};

// Shared latent state used by the autoencoder-backed controller.
struct LatentBelief {
  Vec z;
};

// One tick of observations.
struct SensorSnapshot {
  Vec y_q;       // joint angles, rad
  Vec y_qdot;    // joint velocities, rad/s
  Vec y_ee;      // end-effector position, m
  Image y_v;     // camera image; may be empty when no visual consumer runs
};

// Desired state. ee_d and v_d are derived from q_d by the harness.
struct Goal {
  Vec q_d;
  Vec ee_d;
  Image v_d;
};

// Diagonal variances per modality (scalar broadcast), plus the per-pixel
// visual variance. Precisions are elementwise reciprocals.
struct PrecisionSet {
  double var_q = 3.0;
  double var_qdot = 3.0;
  double var_mu = 5.0;
  double var_mu1 = 5.0;
  double var_f = 4.0;
  double var_ee = 6.0;
  Image var_v;  // entries strictly positive when set

  void Validate() const {
    const double vars[] = {var_q, var_qdot, var_mu, var_mu1, var_f, var_ee};
    for (double v : vars)
      if (!(v > 0.0)) throw std::invalid_argument("PrecisionSet: variance <= 0");
    if (var_v.size() > 0 && !(var_v.minCoeff() > 0.0))
      throw std::invalid_argument("PrecisionSet: visual variance <= 0");
  }

  double prec_q() const { return 1.0 / var_q; }
  double prec_qdot() const { return 1.0 / var_qdot; }
  double prec_mu() const { return 1.0 / var_mu; }
  double prec_mu1() const { return 1.0 / var_mu1; }
  double prec_f() const { return 1.0 / var_f; }
  double prec_ee() const { return 1.0 / var_ee; }
};

// Proprioceptive sensory prediction errors.
//   eps_yq   = y_q    - mu
//   eps_yqd  = y_qdot - mu1
//   eps_mu   = mu1 + mu  - q_d      (first-order goal attractor form)
//   eps_mu1  = mu1 + mu2
struct SpeBundle {
  Vec eps_yq;
  Vec eps_yqdot;
  Vec eps_mu;
  Vec eps_mu1;
};

inline SpeBundle spe_proprio(const GeneralizedBelief& belief,
                             const SensorSnapshot& snap, const Goal& goal) {
  const Eigen::Index n = belief.mu.size();
  if (snap.y_q.size() != n || snap.y_qdot.size() != n ||
      goal.q_d.size() != n || belief.mu1.size() != n || belief.mu2.size() != n)
    throw std::invalid_argument("spe_proprio: dimension mismatch");
  SpeBundle spe;
  spe.eps_yq = snap.y_q - belief.mu;
  spe.eps_yqdot = snap.y_qdot - belief.mu1;
  spe.eps_mu = belief.mu1 + belief.mu - goal.q_d;
  spe.eps_mu1 = belief.mu1 + belief.mu2;
  return spe;
}

// One precision-weighted quadratic contribution to the free energy:
// err' * (1/var) * err over a modality with a shared scalar variance.
struct VfeTerm {
  Vec err;
  double var;
};

// Laplace-approximated variational free energy over the supplied modalities:
// the sum of precision-weighted squared errors plus 1/2 ln|Sigma| per
// modality. Diagnostic quantity; the control laws never evaluate it.
inline double vfe_laplace(const std::vector<VfeTerm>& terms,
                          const Image* img_err = nullptr,
                          const Image* img_var = nullptr) {
  double f = 0.0;
  for (const VfeTerm& term : terms) {
    if (!(term.var > 0.0))
      throw std::invalid_argument("vfe_laplace: variance must be positive");
    f += term.err.squaredNorm() / term.var;
    f += 0.5 * static_cast<double>(term.err.size()) * std::log(term.var);
  }
  if (img_err != nullptr) {
    if (img_var == nullptr || img_var->rows() != img_err->rows() ||
        img_var->cols() != img_err->cols())
      throw std::invalid_argument("vfe_laplace: image variance shape mismatch");
    if (!(img_var->minCoeff() > 0.0))
      throw std::invalid_argument("vfe_laplace: image variance must be positive");
    f += (img_err->array().square() / img_var->array()).sum();
    f += 0.5 * img_var->array().log().sum();
  }
  return f;
}

// Goal attractor: the internal dynamics f = (dg/dx)' (y_d - g(x)) pulling the
// belief toward the configuration whose predicted sensation equals y_d.
// jac_g has shape (dim y, dim x); the transpose maps the sensory residual
// back into belief space.
inline Vec attractor_f(const Vec& g_of_belief, const Mat& jac_g,
                       const Vec& y_d) {
  if (y_d.size() != g_of_belief.size() || jac_g.rows() != g_of_belief.size())
    throw std::invalid_argument("attractor_f: shape mismatch");
  return jac_g.transpose() * (y_d - g_of_belief);
}

// Forward Euler step, x + dt * xdot. All belief and action integration in the
// controllers goes through here.
inline Vec euler_update(const Vec& x, const Vec& xdot, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("euler_update: dt must be > 0");
  if (xdot.size() != x.size())
    throw std::invalid_argument("euler_update: dimension mismatch");
  return x + dt * xdot;
}

}  // namespace maic

#endif  // MAIC_FREE_ENERGY_HPP_
