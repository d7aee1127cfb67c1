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

// Multimodal autoencoder tying joint angles and camera images to a shared
// latent. Fixed fully connected architecture, tanh hidden units, logistic
// image output, affine joint output. Gradients are hand-derived reverse-mode
// passes over batched matrices; no autodiff framework involved.
//
// The reconstruction loss keeps the precision-mask placement of the training
// objective: MSE((1 + mask) .* g_v(z), y_v) + MSE(g_q(z), y_q), so the
// quantity the image decoder learns to output is y_v / (1 + mask). The
// calibrated prediction of an actual image is therefore
// (1 + mask) .* decode_v(z); see calibrated_decode_v().

#ifndef MAIC_MVAE_HPP_
#define MAIC_MVAE_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maic/arm.hpp"
#include "maic/camera.hpp"
#include "maic/free_energy.hpp"
#include "maic/rng.hpp"

namespace maic {

struct LinearLayer {
  Mat w;  // out x in
  Vec b;  // out

  void Init(Eigen::Index out, Eigen::Index in, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    w.resize(out, in);
    for (Eigen::Index j = 0; j < in; ++j)
      for (Eigen::Index i = 0; i < out; ++i) w(i, j) = rng.Uniform(-bound, bound);
    b = Vec::Zero(out);
  }

  // Y = W X + b (column-wise).
  Mat Forward(const Mat& x) const { return (w * x).colwise() + b; }
};

struct MvaeConfig {
  int image_h = 32;
  int image_w = 32;
  int n_joints = 3;
  int latent_dim = 8;
  int hidden_enc = 128;
  int hidden_q = 64;
  int hidden_v = 128;

  int pixels() const { return image_h * image_w; }
  int input_dim() const { return pixels() + n_joints; }
};

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 7e-3;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double kl_weight = 0.0;  // optional latent prior regularizer, default off

  void Validate(Eigen::Index dataset_size) const {
    if (!(learning_rate > 0)) throw std::invalid_argument("TrainConfig: learning_rate <= 0");
    if (batch_size < 1 || batch_size > dataset_size)
      throw std::invalid_argument("TrainConfig: batch_size out of range");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs < 1");
    if (momentum < 0 || momentum >= 1) throw std::invalid_argument("TrainConfig: momentum out of [0,1)");
  }
};

struct MvaeModel {
  MvaeConfig cfg;
  LinearLayer enc1, enc2;  // (image + joints) -> hidden_enc -> latent
  LinearLayer q1, q2;      // latent -> hidden_q -> joints
  LinearLayer v1, v2;      // latent -> hidden_v -> pixels (logistic)
  Image precision_mask;    // per-pixel reciprocal training variance, >= 0

  void InitParams(std::uint64_t seed) {
    Rng rng(seed);
    enc1.Init(cfg.hidden_enc, cfg.input_dim(), rng);
    // Input-group balance: a handful of joint inputs against ~10^3 pixels of
    // which only a few dozen are ever lit. Without the boost the latent
    // starts essentially blind to the joints and the joint round-trip never
    // tightens within the training budget.
    enc1.w.rightCols(cfg.n_joints) *= 32.0;
    enc2.Init(cfg.latent_dim, cfg.hidden_enc, rng);
    q1.Init(cfg.hidden_q, cfg.latent_dim, rng);
    q2.Init(cfg.n_joints, cfg.hidden_q, rng);
    v1.Init(cfg.hidden_v, cfg.latent_dim, rng);
    v2.Init(cfg.pixels(), cfg.hidden_v, rng);
    // Image output bias starts near the background logit instead of 0.5, so
    // early training is not dominated by uniform-gray reconstruction error.
    v2.b.setConstant(-3.0);
    precision_mask = Image::Zero(cfg.image_h, cfg.image_w);
  }
};

// Paired dataset, one column per sample.
struct MvaeDataset {
  Mat x_v;  // pixels x n
  Mat x_q;  // joints x n

  Eigen::Index size() const { return x_v.cols(); }
};

inline Vec FlattenImage(const Image& img) {
  return Eigen::Map<const Vec>(img.data(), img.size());
}

inline Image UnflattenImage(const Vec& v, int h, int w) {
  return Eigen::Map<const Image>(v.data(), h, w);
}

// Renders every joint configuration (plus seeded jittered copies) into a
// paired image/joint dataset. Deterministic given the seed.
inline MvaeDataset build_image_dataset(const ArmModel& arm, const CameraConfig& cam,
                                       const Mat& x_q_rows, int n_jitter = 2,
                                       double jitter_std = 0.02,
                                       std::uint64_t seed = 0) {
  const Eigen::Index base = x_q_rows.rows();
  const Eigen::Index total = base * (1 + n_jitter);
  MvaeDataset ds;
  ds.x_v.resize(static_cast<Eigen::Index>(cam.height) * cam.width, total);
  ds.x_q.resize(x_q_rows.cols(), total);
  Rng rng(seed);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < base; ++i) {
    Vec q = x_q_rows.row(i).transpose();
    ds.x_q.col(col) = q;
    ds.x_v.col(col) = FlattenImage(render(arm, q, cam));
    ++col;
    for (int j = 0; j < n_jitter; ++j) {
      Vec qj = q;
      for (Eigen::Index k = 0; k < qj.size(); ++k)
        qj[k] += rng.Gaussian(0.0, jitter_std);
      ds.x_q.col(col) = qj;
      ds.x_v.col(col) = FlattenImage(render(arm, qj, cam));
      ++col;
    }
  }
  return ds;
}

// Per-pixel precision: reciprocal of the pixel variance across the images,
// with low-variance pixels mapped to zero rather than infinity. The default
// floor treats pixels lit in less than about one percent of the frames as
// uninformative; their reciprocal variances would otherwise dwarf every
// other term in the masked objective.
inline Image precision_mask(const Mat& x_v_cols, int h, int w,
                            double var_epsilon = 1e-2) {
  if (x_v_cols.cols() < 2)
    throw std::invalid_argument("precision_mask: need at least 2 images");
  const Vec mean = x_v_cols.rowwise().mean();
  Vec var = Vec::Zero(x_v_cols.rows());
  for (Eigen::Index c = 0; c < x_v_cols.cols(); ++c)
    var += (x_v_cols.col(c) - mean).array().square().matrix();
  var /= static_cast<double>(x_v_cols.cols());
  Vec prec(var.size());
  for (Eigen::Index i = 0; i < var.size(); ++i)
    prec[i] = (var[i] < var_epsilon) ? 0.0 : 1.0 / var[i];
  return UnflattenImage(prec, h, w);
}

namespace detail {

inline Mat Logistic(const Mat& x) {
  return 1.0 / (1.0 + (-x.array()).exp());
}

// Full forward pass activations for a batch (one column per sample).
struct MvaeForward {
  Mat input;          // (pixels + joints) x b
  Mat enc_hidden;     // tanh activations
  Mat z;              // latent x b
  Mat q_hidden;       // tanh
  Mat q_out;          // joints x b
  Mat v_hidden;       // tanh
  Mat v_out;          // pixels x b, logistic
};

inline MvaeForward ForwardPass(const MvaeModel& m, const Mat& y_v, const Mat& y_q) {
  MvaeForward f;
  f.input.resize(y_v.rows() + y_q.rows(), y_v.cols());
  f.input.topRows(y_v.rows()) = y_v;
  f.input.bottomRows(y_q.rows()) = y_q;
  f.enc_hidden = m.enc1.Forward(f.input).array().tanh();
  f.z = m.enc2.Forward(f.enc_hidden);
  f.q_hidden = m.q1.Forward(f.z).array().tanh();
  f.q_out = m.q2.Forward(f.q_hidden);
  f.v_hidden = m.v1.Forward(f.z).array().tanh();
  f.v_out = Logistic(m.v2.Forward(f.v_hidden));
  return f;
}

// Decoder-only forward from a given latent batch.
inline void DecodeOnly(const MvaeModel& m, const Mat& z, MvaeForward* f) {
  f->z = z;
  f->q_hidden = m.q1.Forward(z).array().tanh();
  f->q_out = m.q2.Forward(f->q_hidden);
  f->v_hidden = m.v1.Forward(z).array().tanh();
  f->v_out = Logistic(m.v2.Forward(f->v_hidden));
}

}  // namespace detail

struct MvaeGrads {
  Mat enc1_w, enc2_w, q1_w, q2_w, v1_w, v2_w;
  Vec enc1_b, enc2_b, q1_b, q2_b, v1_b, v2_b;

  static MvaeGrads ZeroLike(const MvaeModel& m) {
    MvaeGrads g;
    g.enc1_w = Mat::Zero(m.enc1.w.rows(), m.enc1.w.cols());
    g.enc2_w = Mat::Zero(m.enc2.w.rows(), m.enc2.w.cols());
    g.q1_w = Mat::Zero(m.q1.w.rows(), m.q1.w.cols());
    g.q2_w = Mat::Zero(m.q2.w.rows(), m.q2.w.cols());
    g.v1_w = Mat::Zero(m.v1.w.rows(), m.v1.w.cols());
    g.v2_w = Mat::Zero(m.v2.w.rows(), m.v2.w.cols());
    g.enc1_b = Vec::Zero(m.enc1.b.size());
    g.enc2_b = Vec::Zero(m.enc2.b.size());
    g.q1_b = Vec::Zero(m.q1.b.size());
    g.q2_b = Vec::Zero(m.q2.b.size());
    g.v1_b = Vec::Zero(m.v1.b.size());
    g.v2_b = Vec::Zero(m.v2.b.size());
    return g;
  }
};

// Flat double spans over all parameters (or gradients) in a fixed order, for
// optimizer loops and the finite-difference test.
inline std::vector<std::span<double>> ParamSpans(MvaeModel& m) {
  auto span = [](auto& mat) {
    return std::span<double>(mat.data(), static_cast<std::size_t>(mat.size()));
  };
  return {span(m.enc1.w), span(m.enc1.b), span(m.enc2.w), span(m.enc2.b),
          span(m.q1.w),   span(m.q1.b),   span(m.q2.w),   span(m.q2.b),
          span(m.v1.w),   span(m.v1.b),   span(m.v2.w),   span(m.v2.b)};
}

inline std::vector<std::span<double>> GradSpans(MvaeGrads& g) {
  auto span = [](auto& mat) {
    return std::span<double>(mat.data(), static_cast<std::size_t>(mat.size()));
  };
  return {span(g.enc1_w), span(g.enc1_b), span(g.enc2_w), span(g.enc2_b),
          span(g.q1_w),   span(g.q1_b),   span(g.q2_w),   span(g.q2_b),
          span(g.v1_w),   span(g.v1_b),   span(g.v2_w),   span(g.v2_b)};
}

// Batch reconstruction loss:
//   mean_samples[ MSE((1 + mask) .* v_hat, y_v) + MSE(q_hat, y_q) ]
// plus the optional latent prior term. MSE averages over elements.
inline double loss(const MvaeModel& m, const Mat& y_v, const Mat& y_q,
                   double kl_weight = 0.0) {
  if (y_v.cols() != y_q.cols())
    throw std::invalid_argument("loss: batch sizes differ");
  const auto f = detail::ForwardPass(m, y_v, y_q);
  const Vec mask1 = FlattenImage(m.precision_mask).array() + 1.0;
  const double b = static_cast<double>(y_v.cols());
  const double loss_v =
      ((mask1.asDiagonal() * f.v_out) - y_v).array().square().sum() /
      (b * static_cast<double>(y_v.rows()));
  const double loss_q =
      (f.q_out - y_q).array().square().sum() / (b * static_cast<double>(y_q.rows()));
  double total = loss_v + loss_q;
  if (kl_weight > 0) total += kl_weight * 0.5 * f.z.array().square().sum() / b;
  return total;
}

// Loss together with gradients for every parameter (reverse mode).
inline double loss_and_gradients(const MvaeModel& m, const Mat& y_v, const Mat& y_q,
                                 MvaeGrads* grads, double kl_weight = 0.0) {
  const auto f = detail::ForwardPass(m, y_v, y_q);
  const Vec mask1 = FlattenImage(m.precision_mask).array() + 1.0;
  const double b = static_cast<double>(y_v.cols());
  const double np = static_cast<double>(y_v.rows());
  const double nq = static_cast<double>(y_q.rows());

  const Mat scaled_v = mask1.asDiagonal() * f.v_out;
  const Mat resid_v = scaled_v - y_v;
  const Mat resid_q = f.q_out - y_q;
  double total = resid_v.array().square().sum() / (b * np) +
                 resid_q.array().square().sum() / (b * nq);

  // d loss / d v_out and back through the logistic.
  Mat d_vout = (2.0 / (b * np)) * (mask1.asDiagonal() * resid_v);
  Mat d_vpre = d_vout.array() * (f.v_out.array() * (1.0 - f.v_out.array()));
  grads->v2_w = d_vpre * f.v_hidden.transpose();
  grads->v2_b = d_vpre.rowwise().sum();
  Mat d_vhid = m.v2.w.transpose() * d_vpre;
  Mat d_vhid_pre = d_vhid.array() * (1.0 - f.v_hidden.array().square());
  grads->v1_w = d_vhid_pre * f.z.transpose();
  grads->v1_b = d_vhid_pre.rowwise().sum();

  Mat d_qout = (2.0 / (b * nq)) * resid_q;
  grads->q2_w = d_qout * f.q_hidden.transpose();
  grads->q2_b = d_qout.rowwise().sum();
  Mat d_qhid = m.q2.w.transpose() * d_qout;
  Mat d_qhid_pre = d_qhid.array() * (1.0 - f.q_hidden.array().square());
  grads->q1_w = d_qhid_pre * f.z.transpose();
  grads->q1_b = d_qhid_pre.rowwise().sum();

  Mat d_z = m.v1.w.transpose() * d_vhid_pre + m.q1.w.transpose() * d_qhid_pre;
  if (kl_weight > 0) {
    total += kl_weight * 0.5 * f.z.array().square().sum() / b;
    d_z += (kl_weight / b) * f.z;
  }

  grads->enc2_w = d_z * f.enc_hidden.transpose();
  grads->enc2_b = d_z.rowwise().sum();
  Mat d_ehid = m.enc2.w.transpose() * d_z;
  Mat d_ehid_pre = d_ehid.array() * (1.0 - f.enc_hidden.array().square());
  grads->enc1_w = d_ehid_pre * f.input.transpose();
  grads->enc1_b = d_ehid_pre.rowwise().sum();
  return total;
}

inline Vec encode(const MvaeModel& m, const Image& y_v, const Vec& y_q) {
  Mat v = FlattenImage(y_v);
  Mat q = y_q;
  const auto f = detail::ForwardPass(m, v, q);
  return f.z.col(0);
}

inline Vec decode_q(const MvaeModel& m, const Vec& z) {
  const Mat hidden = (m.q1.Forward(z)).array().tanh();
  return m.q2.Forward(hidden).col(0);
}

inline Image decode_v(const MvaeModel& m, const Vec& z) {
  const Mat hidden = (m.v1.Forward(z)).array().tanh();
  const Mat out = detail::Logistic(m.v2.Forward(hidden));
  return UnflattenImage(out.col(0), m.cfg.image_h, m.cfg.image_w);
}

// Prediction of a real image under the trained objective: the decoder output
// rescaled by (1 + mask).
inline Image calibrated_decode_v(const MvaeModel& m, const Vec& z) {
  const Image raw = decode_v(m, z);
  return ((m.precision_mask.array() + 1.0) * raw.array()).matrix();
}

enum class DecoderKind { kJoints, kImage };

// J' r through one decoder: reverse-mode pass from the output residual back
// to the latent, never materializing the Jacobian. For kImage the residual is
// taken against the raw decoder output (flattened image order).
inline Vec jacobian_transpose_product(const MvaeModel& m, DecoderKind which,
                                      const Vec& z, const Vec& residual) {
  if (which == DecoderKind::kJoints) {
    if (residual.size() != m.cfg.n_joints)
      throw std::invalid_argument("jtp: joint residual size mismatch");
    const Mat hidden = (m.q1.Forward(z)).array().tanh();
    Mat d_hid = m.q2.w.transpose() * residual;
    Mat d_pre = d_hid.array() * (1.0 - hidden.array().square());
    return m.q1.w.transpose() * d_pre;
  }
  if (residual.size() != m.cfg.pixels())
    throw std::invalid_argument("jtp: image residual size mismatch");
  const Mat hidden = (m.v1.Forward(z)).array().tanh();
  const Mat out = detail::Logistic(m.v2.Forward(hidden));
  Mat d_pre_out = residual.array() * (out.col(0).array() * (1.0 - out.col(0).array()));
  Mat d_hid = m.v2.w.transpose() * d_pre_out;
  Mat d_pre = d_hid.array() * (1.0 - hidden.array().square());
  return m.v1.w.transpose() * d_pre;
}

// Cached single-sample decoder evaluation for the controller hot path: one
// forward per decoder, then any number of transpose products against it.
struct DecoderEval {
  Vec z;
  Vec q_hidden, q_out;
  Vec v_hidden, v_out;
};

inline DecoderEval eval_decoders(const MvaeModel& m, const Vec& z) {
  DecoderEval e;
  e.z = z;
  e.q_hidden = (m.q1.Forward(z)).array().tanh();
  e.q_out = m.q2.Forward(e.q_hidden).col(0);
  e.v_hidden = (m.v1.Forward(z)).array().tanh();
  e.v_out = detail::Logistic(m.v2.Forward(e.v_hidden)).col(0);
  return e;
}

inline Vec jtp_q_cached(const MvaeModel& m, const DecoderEval& e, const Vec& residual) {
  Mat d_pre = (m.q2.w.transpose() * residual).array() *
              (1.0 - e.q_hidden.array().square());
  return m.q1.w.transpose() * d_pre;
}

inline Vec jtp_v_cached(const MvaeModel& m, const DecoderEval& e, const Vec& residual) {
  Vec d_pre_out =
      residual.array() * (e.v_out.array() * (1.0 - e.v_out.array()));
  Mat d_pre = (m.v2.w.transpose() * d_pre_out).array() *
              (1.0 - e.v_hidden.array().square());
  return m.v1.w.transpose() * d_pre;
}

struct TrainResult {
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

// Minibatch gradient descent with momentum; seeded shuffling; deterministic.
inline TrainResult train(MvaeModel& m, const MvaeDataset& ds, const TrainConfig& cfg) {
  cfg.Validate(ds.size());
  TrainResult result;
  MvaeGrads grads = MvaeGrads::ZeroLike(m);
  MvaeGrads velocity = MvaeGrads::ZeroLike(m);
  Rng rng(Rng::DeriveSeed(cfg.seed, 0x7261696e));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ds.size()));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SeededShuffle(order, rng);
    double epoch_sum = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index start = 0; start < ds.size(); start += cfg.batch_size) {
      const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, ds.size() - start);
      Mat bv(ds.x_v.rows(), bs), bq(ds.x_q.rows(), bs);
      for (Eigen::Index i = 0; i < bs; ++i) {
        bv.col(i) = ds.x_v.col(order[static_cast<std::size_t>(start + i)]);
        bq.col(i) = ds.x_q.col(order[static_cast<std::size_t>(start + i)]);
      }
      const double batch_loss = loss_and_gradients(m, bv, bq, &grads, cfg.kl_weight);
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("mvae train: loss diverged at epoch " +
                                 std::to_string(epoch));
      auto pspans = ParamSpans(m);
      auto gspans = GradSpans(grads);
      auto vspans = GradSpans(velocity);
      for (std::size_t s = 0; s < pspans.size(); ++s) {
        for (std::size_t k = 0; k < pspans[s].size(); ++k) {
          vspans[s][k] = cfg.momentum * vspans[s][k] - cfg.learning_rate * gspans[s][k];
          pspans[s][k] += vspans[s][k];
        }
      }
      epoch_sum += batch_loss * static_cast<double>(bs);
      seen += bs;
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(seen));
  }
  return result;
}

}  // namespace maic

#endif  // MAIC_MVAE_HPP_
