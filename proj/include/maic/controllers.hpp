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

// The six control laws behind a uniform tick interface:
//   AIC        proprioceptive active inference (the ablated MAIC)
//   MAIC-GP    AIC plus an end-effector modality through a GP mapping
//   MAIC-VAE   latent-space active inference through the multimodal
//              autoencoder decoders
//   IC         joint impedance with model-based gravity/Coriolis terms
//   MPC        iterative-LQR torque MPC at 10 Hz
// plus the sensor-free mental-simulation mode of the autoencoder controller.
//
// Belief updates for the proprioceptive family:
//   mu'   = mu1 + k_mu/var_q (y_q - mu) [+ EE term] - k_mu/var_mu eps_mu
//   mu1'  = mu2 + k_mu/var_qd (y_qd - mu1) - k_mu/var_mu eps_mu
//                                          - k_mu/var_mu1 eps_mu1
//   mu2'  = -k_mu/var_mu1 eps_mu1
// Action integrates the negated precision-weighted sensory errors with the
// inverse models reduced to their sign (identity).

#ifndef MAIC_CONTROLLERS_HPP_
#define MAIC_CONTROLLERS_HPP_

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "maic/arm.hpp"
#include "maic/free_energy.hpp"
#include "maic/gp.hpp"
#include "maic/mpc.hpp"
#include "maic/mvae.hpp"

namespace maic {

struct ControllerGains {
  double k_mu = 18.67;
  double k_q = 1.5;
  double k_v = 0.2;
  double k_ee = 1.4;
  double k_a = 9.0;
  // Latent attractor rate. No published value exists for it; tuned on the
  // vanilla sequential-reaching task (the latent loop has no inertia, so it
  // tolerates and needs a much faster rate than the proprioceptive belief).
  double k_z = 160.0;
  double dt = 0.001;

  void Validate() const {
    const double vals[] = {k_mu, k_q, k_v, k_ee, k_a, k_z};
    for (double v : vals)
      if (!(v >= 0)) throw std::invalid_argument("ControllerGains: rates must be >= 0");
    if (!(dt > 0)) throw std::invalid_argument("ControllerGains: dt must be > 0");
  }
};

struct ControllerDiagnostics {
  SpeBundle spe;
  double vfe = 0.0;
  double ee_error = 0.0;     // MAIC-GP: |y_ee - gp(mu)|
  double image_error = 0.0;  // MAIC-VAE: Frobenius residual of the prediction
};

struct ControllerState {
  GeneralizedBelief belief;
  LatentBelief latent;
  Vec action;
  ControllerDiagnostics diag;
};

class Controller {
 public:
  virtual ~Controller() = default;
  // Initializes beliefs and action from the first observation.
  virtual void Reset(const SensorSnapshot& snap) = 0;
  // Pure transition: advances internal state, returns the commanded torque.
  virtual Vec Tick(const SensorSnapshot& snap, const Goal& goal) = 0;
  virtual const ControllerState& state() const = 0;
  virtual std::string_view name() const = 0;
  virtual bool needs_image() const { return false; }
};

inline Vec ClampTorque(const Vec& tau, const Vec& limits) {
  return tau.cwiseMin(limits).cwiseMax(-limits);
}

// Proprioceptive active-inference controller; with a GP attached it becomes
// MAIC-GP, and the `ablated` flag strips the end-effector modality back out
// (producing torque streams identical to the plain AIC).
class ProprioAifController : public Controller {
 public:
  ProprioAifController(const ControllerGains& gains, const PrecisionSet& prec,
                       const Vec& torque_limits, const GpModel* gp = nullptr,
                       bool ablated = false)
      : gains_(gains), prec_(prec), limits_(torque_limits), gp_(gp),
        ablated_(ablated) {
    gains_.Validate();
    prec_.Validate();
  }

  void Reset(const SensorSnapshot& snap) override {
    state_.belief.mu = snap.y_q;
    state_.belief.mu1 = snap.y_qdot;
    state_.belief.mu2 = Vec::Zero(snap.y_q.size());
    state_.action = Vec::Zero(snap.y_q.size());
    state_.latent.z.resize(0);
  }

  Vec Tick(const SensorSnapshot& snap, const Goal& goal) override {
    const SpeBundle spe = spe_proprio(state_.belief, snap, goal);
    Vec dmu = state_.belief.mu1 + gains_.k_mu * prec_.prec_q() * spe.eps_yq -
              gains_.k_mu * prec_.prec_mu() * spe.eps_mu;
    Vec dmu1 = state_.belief.mu2 +
               gains_.k_mu * prec_.prec_qdot() * spe.eps_yqdot -
               gains_.k_mu * prec_.prec_mu() * spe.eps_mu -
               gains_.k_mu * prec_.prec_mu1() * spe.eps_mu1;
    Vec dmu2 = -gains_.k_mu * prec_.prec_mu1() * spe.eps_mu1;
    Vec da = -gains_.k_a * (prec_.prec_q() * spe.eps_yq +
                            prec_.prec_qdot() * spe.eps_yqdot);

    std::vector<VfeTerm> terms{{spe.eps_yq, prec_.var_q},
                               {spe.eps_yqdot, prec_.var_qdot},
                               {spe.eps_mu, prec_.var_mu},
                               {spe.eps_mu1, prec_.var_mu1}};
    state_.diag.ee_error = 0.0;
    if (use_ee()) {
      const Vec eps_yee = snap.y_ee - predict(*gp_, state_.belief.mu);
      const Mat jac = jacobian(*gp_, state_.belief.mu);
      dmu += gains_.k_ee * prec_.prec_ee() * (jac.transpose() * eps_yee);
      da += -gains_.k_a * (jac.transpose() * (prec_.prec_ee() * eps_yee));
      terms.push_back({eps_yee, prec_.var_ee});
      state_.diag.ee_error = eps_yee.norm();
    }

    state_.belief.mu = euler_update(state_.belief.mu, dmu, gains_.dt);
    state_.belief.mu1 = euler_update(state_.belief.mu1, dmu1, gains_.dt);
    state_.belief.mu2 = euler_update(state_.belief.mu2, dmu2, gains_.dt);
    state_.action = ClampTorque(euler_update(state_.action, da, gains_.dt), limits_);
    if (!AllFinite(state_.belief.mu) || !AllFinite(state_.action))
      throw std::runtime_error(std::string(name()) + ": non-finite controller state");

    state_.diag.spe = spe;
    state_.diag.vfe = vfe_laplace(terms);
    return state_.action;
  }

  const ControllerState& state() const override { return state_; }
  std::string_view name() const override {
    if (gp_ == nullptr) return "aic";
    return ablated_ ? "maic-gp-ablated" : "maic-gp";
  }

 private:
  bool use_ee() const { return gp_ != nullptr && !ablated_; }

  ControllerGains gains_;
  PrecisionSet prec_;
  Vec limits_;
  const GpModel* gp_;
  bool ablated_;
  ControllerState state_;
};

// Latent-space controller over the trained multimodal autoencoder. The
// proprioceptive belief is decoded from the latent; its velocity and
// acceleration orders keep the generalized-coordinate update laws.
class MaicVaeController : public Controller {
 public:
  MaicVaeController(const ControllerGains& gains, const PrecisionSet& prec,
                    const Vec& torque_limits, const MvaeModel* mvae,
                    bool ablated = false, bool encode_init = true)
      : gains_(gains), prec_(prec), limits_(torque_limits), mvae_(mvae),
        ablated_(ablated), encode_init_(encode_init) {
    gains_.Validate();
    prec_.Validate();
    if (mvae_ == nullptr)
      throw std::invalid_argument("MaicVaeController: model required");
    mask1_ = FlattenImage(mvae_->precision_mask).array() + 1.0;
    prec_v_ = FlattenImage(mvae_->precision_mask);
  }

  void Reset(const SensorSnapshot& snap) override {
    if (encode_init_ && snap.y_v.size() > 0)
      state_.latent.z = encode(*mvae_, snap.y_v, snap.y_q);
    else
      state_.latent.z = Vec::Zero(mvae_->cfg.latent_dim);
    state_.belief.mu = decode_q(*mvae_, state_.latent.z);
    state_.belief.mu1 = snap.y_qdot;
    state_.belief.mu2 = Vec::Zero(snap.y_q.size());
    state_.action = Vec::Zero(snap.y_q.size());
  }

  Vec Tick(const SensorSnapshot& snap, const Goal& goal) override {
    const DecoderEval eval = eval_decoders(*mvae_, state_.latent.z);
    state_.belief.mu = eval.q_out;
    const SpeBundle spe = spe_proprio(state_.belief, snap, goal);

    // Sensory and goal residuals pulled back through the decoders; the
    // per-modality pieces combine before the single transpose pass (the
    // product is linear in the residual). The latent attractor is the joint
    // modality's prediction-minus-goal residual, mirroring eps_mu of the
    // proprioceptive family; the visual modality enters through its sensory
    // term only.
    Vec q_residual = gains_.k_q * prec_.prec_q() * spe.eps_yq -
                     gains_.k_z * prec_.prec_f() * (eval.q_out - goal.q_d);
    Vec dz = jtp_q_cached(*mvae_, eval, q_residual);
    state_.diag.image_error = 0.0;
    if (!ablated_) {
      if (snap.y_v.size() == 0)
        throw std::invalid_argument("maic-vae: snapshot carries no image");
      // The trained generative prediction of the camera image is the decoder
      // output rescaled by (1 + mask); the residual is taken against it and
      // the rescaling folds into the transpose product by linearity.
      const Vec y_v = FlattenImage(snap.y_v);
      const Vec pred_v = mask1_.cwiseProduct(eval.v_out);
      const Vec eps_yv = y_v - pred_v;
      Vec v_residual =
          mask1_.cwiseProduct(gains_.k_v * prec_v_.cwiseProduct(eps_yv));
      dz += jtp_v_cached(*mvae_, eval, v_residual);
      state_.diag.image_error = eps_yv.norm();
    }

    Vec dmu1 = state_.belief.mu2 +
               gains_.k_mu * prec_.prec_qdot() * spe.eps_yqdot -
               gains_.k_mu * prec_.prec_mu() * spe.eps_mu -
               gains_.k_mu * prec_.prec_mu1() * spe.eps_mu1;
    Vec dmu2 = -gains_.k_mu * prec_.prec_mu1() * spe.eps_mu1;
    Vec da = -gains_.k_a * (prec_.prec_q() * spe.eps_yq +
                            prec_.prec_qdot() * spe.eps_yqdot);

    state_.latent.z = euler_update(state_.latent.z, dz, gains_.dt);
    state_.belief.mu1 = euler_update(state_.belief.mu1, dmu1, gains_.dt);
    state_.belief.mu2 = euler_update(state_.belief.mu2, dmu2, gains_.dt);
    state_.action = ClampTorque(euler_update(state_.action, da, gains_.dt), limits_);
    if (!AllFinite(state_.latent.z) || !AllFinite(state_.action))
      throw std::runtime_error(std::string(name()) + ": non-finite controller state");

    state_.diag.spe = spe;
    std::vector<VfeTerm> terms{{spe.eps_yq, prec_.var_q},
                               {spe.eps_yqdot, prec_.var_qdot},
                               {spe.eps_mu, prec_.var_mu},
                               {spe.eps_mu1, prec_.var_mu1}};
    state_.diag.vfe = vfe_laplace(terms);
    return state_.action;
  }

  const ControllerState& state() const override { return state_; }
  std::string_view name() const override {
    return ablated_ ? "maic-vae-ablated" : "maic-vae";
  }
  bool needs_image() const override { return !ablated_; }

 private:
  ControllerGains gains_;
  PrecisionSet prec_;
  Vec limits_;
  const MvaeModel* mvae_;
  bool ablated_;
  bool encode_init_;
  Vec mask1_;    // 1 + precision mask, flattened
  Vec prec_v_;   // per-pixel visual precision, flattened
  ControllerState state_;
};

// Joint impedance with critical damping computed once at the home pose:
// tau = K (q_goal - q) - D qd + C(q, qd) qd + g(q).
class ImpedanceController : public Controller {
 public:
  ImpedanceController(const ArmModel& model, const Vec& stiffness,
                      const Vec& q_home)
      : model_(model), stiffness_(stiffness) {
    if (!(stiffness.minCoeff() > 0))
      throw std::invalid_argument("ImpedanceController: stiffness must be > 0");
    const Mat m_home = mass_matrix(model_, q_home);
    damping_ = 2.0 * stiffness_.cwiseProduct(m_home.diagonal()).cwiseSqrt();
  }

  void Reset(const SensorSnapshot& snap) override {
    state_.belief.mu = snap.y_q;
    state_.belief.mu1 = snap.y_qdot;
    state_.belief.mu2 = Vec::Zero(snap.y_q.size());
    state_.action = Vec::Zero(snap.y_q.size());
  }

  Vec Tick(const SensorSnapshot& snap, const Goal& goal) override {
    const Vec& q = snap.y_q;
    const Vec& qd = snap.y_qdot;
    Vec tau = stiffness_.cwiseProduct(goal.q_d - q) - damping_.cwiseProduct(qd) +
              coriolis_vector(model_, q, qd) + gravity_vector(model_, q);
    state_.action = ClampTorque(tau, model_.torque_limits);
    state_.belief.mu = q;
    state_.belief.mu1 = qd;
    return state_.action;
  }

  const ControllerState& state() const override { return state_; }
  std::string_view name() const override { return "ic"; }

  const Vec& damping() const { return damping_; }

 private:
  ArmModel model_;
  Vec stiffness_;
  Vec damping_;
  ControllerState state_;
};

// Receding-horizon iLQR torque MPC; replans every `replan_ticks` controller
// ticks (10 Hz at the 1 kHz tick) and holds the torque in between.
class MpcController : public Controller {
 public:
  MpcController(const ArmModel& model, const McpConfig& cfg, int replan_ticks)
      : model_(model), solver_(model, cfg), replan_ticks_(replan_ticks) {
    if (replan_ticks < 1)
      throw std::invalid_argument("MpcController: replan_ticks < 1");
  }

  void Reset(const SensorSnapshot& snap) override {
    state_.belief.mu = snap.y_q;
    state_.belief.mu1 = snap.y_qdot;
    state_.belief.mu2 = Vec::Zero(snap.y_q.size());
    state_.action = Vec::Zero(snap.y_q.size());
    ticks_since_solve_ = replan_ticks_;  // solve on the first tick
  }

  Vec Tick(const SensorSnapshot& snap, const Goal& goal) override {
    if (ticks_since_solve_ >= replan_ticks_) {
      const MpcResult result = solver_.Solve(snap.y_q, snap.y_qdot, goal.q_d);
      state_.action = ClampTorque(result.tau, model_.torque_limits);
      degraded_ = result.degraded;
      ticks_since_solve_ = 0;
    }
    ++ticks_since_solve_;
    state_.belief.mu = snap.y_q;
    state_.belief.mu1 = snap.y_qdot;
    return state_.action;
  }

  const ControllerState& state() const override { return state_; }
  std::string_view name() const override { return "mpc"; }
  bool last_solve_degraded() const { return degraded_; }

 private:
  ArmModel model_;
  MpcSolver solver_;
  int replan_ticks_;
  int ticks_since_solve_ = 0;
  bool degraded_ = false;
  ControllerState state_;
};

// ---------------------------------------------------------------------------
// Mental simulation: belief updates without sensory input. The update law is
// the closed-loop latent law with the sensory terms dropped, leaving only the
// goal attractor; decoded joints and images are the imagined trajectory.

struct MentalSimResult {
  std::vector<double> joint_error;   // mean |g_q(z) - q_d| per tick
  std::vector<double> image_error;   // Frobenius residual vs goal image
  Mat imagined_q;                    // n_joints x ticks
};

inline MentalSimResult mental_simulate(const MvaeModel& mvae, const LatentBelief& z0,
                                       const std::vector<Goal>& goals,
                                       const ControllerGains& gains,
                                       const PrecisionSet& prec,
                                       int ticks_per_goal) {
  MentalSimResult result;
  const int total = ticks_per_goal * static_cast<int>(goals.size());
  result.imagined_q.resize(mvae.cfg.n_joints, total);
  Vec z = z0.z;
  const Vec mask1 = FlattenImage(mvae.precision_mask).array() + 1.0;
  int col = 0;
  for (const Goal& goal : goals) {
    const Vec v_d = FlattenImage(goal.v_d);
    for (int k = 0; k < ticks_per_goal; ++k) {
      const DecoderEval eval = eval_decoders(mvae, z);
      const Vec dz = jtp_q_cached(
          mvae, eval, -gains.k_z * prec.prec_f() * (eval.q_out - goal.q_d));
      z = euler_update(z, dz, gains.dt);
      const DecoderEval after = eval_decoders(mvae, z);
      result.joint_error.push_back(
          (after.q_out - goal.q_d).cwiseAbs().mean());
      result.image_error.push_back(
          (mask1.cwiseProduct(after.v_out) - v_d).norm());
      result.imagined_q.col(col++) = after.q_out;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Perception-only gradient steps with frozen observations, used by the
// free-energy descent checks: no generalized-coordinate shift, no attractor,
// no action. Each returns the updated belief; the matching Vfe() evaluates
// exactly the objective the step descends.

struct PerceptionDescent {
  // AIC / MAIC-GP family over (mu, mu1, mu2).
  static double Vfe(const GeneralizedBelief& b, const SensorSnapshot& snap,
                    const PrecisionSet& prec, const GpModel* gp) {
    std::vector<VfeTerm> terms{{snap.y_q - b.mu, prec.var_q},
                               {snap.y_qdot - b.mu1, prec.var_qdot},
                               {b.mu1 + b.mu2, prec.var_mu1}};
    if (gp != nullptr)
      terms.push_back({snap.y_ee - predict(*gp, b.mu), prec.var_ee});
    return vfe_laplace(terms);
  }

  static GeneralizedBelief Step(const GeneralizedBelief& b,
                                const SensorSnapshot& snap,
                                const PrecisionSet& prec, const GpModel* gp,
                                const ControllerGains& gains, double scale) {
    const Vec eps_yq = snap.y_q - b.mu;
    const Vec eps_yqd = snap.y_qdot - b.mu1;
    const Vec eps_mu1 = b.mu1 + b.mu2;
    Vec dmu = gains.k_mu * prec.prec_q() * eps_yq;
    if (gp != nullptr) {
      const Vec eps_yee = snap.y_ee - predict(*gp, b.mu);
      dmu += gains.k_ee * prec.prec_ee() *
             (jacobian(*gp, b.mu).transpose() * eps_yee);
    }
    const Vec dmu1 = gains.k_mu * prec.prec_qdot() * eps_yqd -
                     gains.k_mu * prec.prec_mu1() * eps_mu1;
    const Vec dmu2 = -gains.k_mu * prec.prec_mu1() * eps_mu1;
    GeneralizedBelief next;
    next.mu = euler_update(b.mu, scale * dmu, gains.dt);
    next.mu1 = euler_update(b.mu1, scale * dmu1, gains.dt);
    next.mu2 = euler_update(b.mu2, scale * dmu2, gains.dt);
    return next;
  }

  // MAIC-VAE family over the latent.
  static double LatentVfe(const MvaeModel& mvae, const Vec& z,
                          const SensorSnapshot& snap, const PrecisionSet& prec) {
    const DecoderEval eval = eval_decoders(mvae, z);
    const Vec mask1 = FlattenImage(mvae.precision_mask).array() + 1.0;
    const Vec eps_yv = FlattenImage(snap.y_v) - mask1.cwiseProduct(eval.v_out);
    const Vec prec_v = FlattenImage(mvae.precision_mask);
    double f = (snap.y_q - eval.q_out).squaredNorm() * (1.0 / prec.var_q) +
               static_cast<double>(snap.y_q.size()) * 0.5 * std::log(prec.var_q);
    f += eps_yv.array().square().matrix().dot(prec_v);
    for (Eigen::Index i = 0; i < prec_v.size(); ++i)
      if (prec_v[i] > 0) f += 0.5 * std::log(1.0 / prec_v[i]);
    return f;
  }

  static Vec LatentStep(const MvaeModel& mvae, const Vec& z,
                        const SensorSnapshot& snap, const PrecisionSet& prec,
                        const ControllerGains& gains, double scale) {
    const DecoderEval eval = eval_decoders(mvae, z);
    const Vec mask1 = FlattenImage(mvae.precision_mask).array() + 1.0;
    const Vec prec_v = FlattenImage(mvae.precision_mask);
    const Vec eps_yv = FlattenImage(snap.y_v) - mask1.cwiseProduct(eval.v_out);
    Vec dz = jtp_q_cached(mvae, eval,
                          gains.k_q * prec.prec_q() * (snap.y_q - eval.q_out));
    dz += jtp_v_cached(mvae, eval,
                       mask1.cwiseProduct(gains.k_v * prec_v.cwiseProduct(eps_yv)));
    return euler_update(z, scale * dz, gains.dt);
  }
};

}  // namespace maic

#endif  // MAIC_CONTROLLERS_HPP_
