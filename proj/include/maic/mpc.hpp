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

// Finite-horizon torque MPC solved by iterative LQR: RK2 rollouts of the
// nominal (unperturbed) dynamics, finite-difference linearization, Riccati
// backward pass with regularization, line-searched forward pass with the
// torque box enforced by clamping. Returns the first torque of the plan.

#ifndef MAIC_MPC_HPP_
#define MAIC_MPC_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "maic/arm.hpp"
#include "maic/free_energy.hpp"

namespace maic {

struct McpConfig {
  int horizon = 20;        // N
  double dt_mpc = 0.1;     // s
  Vec w_goal;              // diagonal goal weights, per joint
  Vec w_tau;               // diagonal torque weights, per joint
  int max_iters = 15;
  double tol = 1e-6;
  // Internal integration substeps per transition; one RK2 step over the full
  // 0.1 s interval is an unstable discretization for light, damped links.
  int substeps = 20;

  void Validate(int n_joints) const {
    if (horizon < 1) throw std::invalid_argument("McpConfig: horizon < 1");
    if (!(dt_mpc > 0)) throw std::invalid_argument("McpConfig: dt_mpc <= 0");
    if (substeps < 1) throw std::invalid_argument("McpConfig: substeps < 1");
    if (w_goal.size() != n_joints || w_tau.size() != n_joints)
      throw std::invalid_argument("McpConfig: weight dimensions mismatch");
    if (!(w_goal.minCoeff() > 0) || !(w_tau.minCoeff() > 0))
      throw std::invalid_argument("McpConfig: weights must be positive");
    if (max_iters < 1) throw std::invalid_argument("McpConfig: max_iters < 1");
  }
};

// Canonical weight fixture (7 joints); desk arms take the first n entries.
inline McpConfig default_mpc_config(int n_joints) {
  static const double kTauWeights7[] = {1.75, 2.0, 2.5, 5.0, 20.0, 18.75, 62.5};
  McpConfig cfg;
  cfg.w_goal = Vec::Constant(n_joints, 400.0);
  cfg.w_tau.resize(n_joints);
  for (int i = 0; i < n_joints; ++i)
    cfg.w_tau[i] = kTauWeights7[std::min(i, 6)];
  return cfg;
}

struct MpcResult {
  Vec tau;                 // first control of the plan
  bool degraded = false;   // iteration budget exhausted without convergence
  double grad_norm = 0.0;  // max |Q_u| over the horizon at the solution
  double cost = 0.0;
};

class MpcSolver {
 public:
  MpcSolver(const ArmModel& model, const McpConfig& cfg)
      : model_(model), cfg_(cfg) {
    cfg_.Validate(model.n_joints);
    const int n = model.n_joints;
    plan_.assign(cfg_.horizon, Vec::Zero(n));
  }

  // Discrete transition over dt_mpc: x = [q; qd].
  Vec Transition(const Vec& x, const Vec& u) const {
    const int n = model_.n_joints;
    ArmState s;
    s.q = x.head(n);
    s.q_dot = x.tail(n);
    s.t = 0.0;
    const double h = cfg_.dt_mpc / cfg_.substeps;
    for (int k = 0; k < cfg_.substeps; ++k)
      s = step(model_, s, u, Perturbation{}, h);
    Vec out(2 * n);
    out.head(n) = s.q;
    out.tail(n) = s.q_dot;
    return out;
  }

  MpcResult Solve(const Vec& q, const Vec& qd, const Vec& q_goal) {
    const int n = model_.n_joints;
    const int horizon = cfg_.horizon;
    Vec x0(2 * n);
    x0.head(n) = q;
    x0.tail(n) = qd;

    ClampPlan();
    std::vector<Vec> xs;
    double cost = Rollout(x0, plan_, &xs, q_goal);

    MpcResult result;
    result.degraded = true;
    double reg = 1e-8;
    for (int iter = 0; iter < cfg_.max_iters; ++iter) {
      // Linearize around the current trajectory.
      std::vector<Mat> as(horizon), bs(horizon);
      for (int k = 0; k < horizon; ++k)
        Linearize(xs[k], plan_[k], &as[k], &bs[k]);

      // Backward Riccati pass.
      std::vector<Vec> ks(horizon);
      std::vector<Mat> gains(horizon);
      Vec vx = TerminalCostGrad(xs[horizon], q_goal);
      Mat vxx = TerminalCostHess();
      double max_qu = 0.0;
      bool pass_ok = true;
      for (int k = horizon - 1; k >= 0; --k) {
        const Vec qx = StageCostGradX(xs[k], q_goal) + as[k].transpose() * vx;
        const Vec qu = StageCostGradU(plan_[k]) + bs[k].transpose() * vx;
        const Mat qxx = StageCostHessX() + as[k].transpose() * vxx * as[k];
        Mat quu = StageCostHessU() + bs[k].transpose() * vxx * bs[k];
        quu.diagonal().array() += reg;
        const Mat qux = bs[k].transpose() * vxx * as[k];
        const Eigen::LLT<Mat> llt(quu);
        if (llt.info() != Eigen::Success) {
          pass_ok = false;
          break;
        }
        ks[k] = -llt.solve(qu);
        gains[k] = -llt.solve(qux);
        vx = qx + gains[k].transpose() * quu * ks[k] + gains[k].transpose() * qu +
             qux.transpose() * ks[k];
        vxx = qxx + gains[k].transpose() * quu * gains[k] +
              gains[k].transpose() * qux + qux.transpose() * gains[k];
        vxx = 0.5 * (vxx + vxx.transpose());
        max_qu = std::max(max_qu, qu.lpNorm<Eigen::Infinity>());
      }
      if (!pass_ok) {
        reg *= 10.0;
        continue;
      }
      result.grad_norm = max_qu;
      if (max_qu < cfg_.tol) {
        result.degraded = false;
        break;
      }

      // Line-searched forward pass with clamped controls.
      bool improved = false;
      for (double alpha : {1.0, 0.5, 0.25, 0.1, 0.03, 0.01}) {
        std::vector<Vec> new_plan(horizon);
        std::vector<Vec> new_xs;
        Vec x = x0;
        new_xs.push_back(x);
        for (int k = 0; k < horizon; ++k) {
          Vec u = plan_[k] + alpha * ks[k] + gains[k] * (x - xs[k]);
          u = u.cwiseMin(model_.torque_limits).cwiseMax(-model_.torque_limits);
          new_plan[k] = u;
          x = Transition(x, u);
          new_xs.push_back(x);
        }
        const double new_cost = PlanCost(new_xs, new_plan, q_goal);
        if (new_cost < cost - 1e-12) {
          plan_ = new_plan;
          xs = new_xs;
          cost = new_cost;
          improved = true;
          break;
        }
      }
      if (!improved) {
        reg *= 10.0;
        if (reg > 1e6) break;
      } else {
        reg = std::max(reg * 0.5, 1e-8);
      }
    }
    result.tau = plan_[0];
    result.cost = cost;

    // Warm start for the next solve: shift by one step.
    for (int k = 0; k + 1 < horizon; ++k) plan_[k] = plan_[k + 1];
    return result;
  }

 private:
  void ClampPlan() {
    for (Vec& u : plan_)
      u = u.cwiseMin(model_.torque_limits).cwiseMax(-model_.torque_limits);
  }

  double Rollout(const Vec& x0, const std::vector<Vec>& plan,
                 std::vector<Vec>* xs, const Vec& q_goal) const {
    xs->clear();
    xs->push_back(x0);
    Vec x = x0;
    for (const Vec& u : plan) {
      x = Transition(x, u);
      xs->push_back(x);
    }
    return PlanCost(*xs, plan, q_goal);
  }

  double PlanCost(const std::vector<Vec>& xs, const std::vector<Vec>& plan,
                  const Vec& q_goal) const {
    const int n = model_.n_joints;
    double cost = 0.0;
    for (std::size_t k = 0; k < plan.size(); ++k) {
      const Vec dq = xs[k].head(n) - q_goal;
      cost += dq.dot(cfg_.w_goal.cwiseProduct(dq)) +
              plan[k].dot(cfg_.w_tau.cwiseProduct(plan[k]));
    }
    const Vec dq = xs.back().head(n) - q_goal;
    cost += dq.dot(cfg_.w_goal.cwiseProduct(dq));
    return cost;
  }

  Vec StageCostGradX(const Vec& x, const Vec& q_goal) const {
    const int n = model_.n_joints;
    Vec g = Vec::Zero(2 * n);
    g.head(n) = 2.0 * cfg_.w_goal.cwiseProduct(x.head(n) - q_goal);
    return g;
  }
  Vec StageCostGradU(const Vec& u) const { return 2.0 * cfg_.w_tau.cwiseProduct(u); }
  Mat StageCostHessX() const {
    const int n = model_.n_joints;
    Mat h = Mat::Zero(2 * n, 2 * n);
    h.topLeftCorner(n, n) = (2.0 * cfg_.w_goal).asDiagonal();
    return h;
  }
  Mat StageCostHessU() const { return Mat((2.0 * cfg_.w_tau).asDiagonal()); }
  Vec TerminalCostGrad(const Vec& x, const Vec& q_goal) const {
    return StageCostGradX(x, q_goal);
  }
  Mat TerminalCostHess() const { return StageCostHessX(); }

  void Linearize(const Vec& x, const Vec& u, Mat* a, Mat* b) const {
    const int nx = static_cast<int>(x.size());
    const int nu = static_cast<int>(u.size());
    const double h = 1e-6;
    a->resize(nx, nx);
    b->resize(nx, nu);
    for (int j = 0; j < nx; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      a->col(j) = (Transition(xp, u) - Transition(xm, u)) / (2.0 * h);
    }
    for (int j = 0; j < nu; ++j) {
      Vec up = u, um = u;
      up[j] += h;
      um[j] -= h;
      b->col(j) = (Transition(x, up) - Transition(x, um)) / (2.0 * h);
    }
  }

  ArmModel model_;
  McpConfig cfg_;
  std::vector<Vec> plan_;
};

}  // namespace maic

#endif  // MAIC_MPC_HPP_
