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

// Model and dataset files use a hybrid layout: one line of JSON (dims,
// hyperparameters, array directory), then the raw arrays as little-endian
// 64-bit floats in row-major order, in directory order. CSV output is
// formatted with shortest-round-trip conversion so identical runs produce
// identical bytes.

#ifndef MAIC_IO_HPP_
#define MAIC_IO_HPP_

#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "maic/gp.hpp"
#include "maic/mvae.hpp"

namespace maic {

using Json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "file format assumes a little-endian host");

inline std::string FormatDouble(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline std::uint64_t Fnv1aHash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline void WriteMatrixRowMajor(std::ostream& out, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
}

inline Mat ReadMatrixRowMajor(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      m(r, c) = v;
    }
  if (!in) throw std::runtime_error("model file: truncated array data");
  return m;
}

inline Json ArrayEntry(const std::string& name, const Mat& m) {
  return Json{{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}};
}

struct NamedMat {
  std::string name;
  const Mat* mat;
};

inline void WriteHybrid(const std::filesystem::path& path, Json header,
                        const std::vector<NamedMat>& arrays) {
  Json dir = Json::array();
  for (const auto& a : arrays) dir.push_back(ArrayEntry(a.name, *a.mat));
  header["arrays"] = dir;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header.dump() << '\n';
  for (const auto& a : arrays) WriteMatrixRowMajor(out, *a.mat);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct HybridFile {
  Json header;
  std::vector<Mat> arrays;  // directory order

  const Mat& Get(const std::string& name) const {
    const auto& dir = header.at("arrays");
    for (std::size_t i = 0; i < dir.size(); ++i)
      if (dir[i].at("name") == name) return arrays[i];
    throw std::runtime_error("model file: missing array " + name);
  }
};

inline HybridFile ReadHybrid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty model file " + path.string());
  HybridFile file;
  file.header = Json::parse(line);
  for (const auto& entry : file.header.at("arrays"))
    file.arrays.push_back(ReadMatrixRowMajor(in, entry.at("rows").get<Eigen::Index>(),
                                             entry.at("cols").get<Eigen::Index>()));
  return file;
}

}  // namespace detail

inline void save_gp(const std::filesystem::path& path, const GpModel& model,
                    std::uint64_t root_seed) {
  Json header{{"format", "maic-gp"},
              {"version", 1},
              {"root_seed", root_seed},
              {"input_dim", model.input_dim()},
              {"n_points", model.n_points()},
              {"sigma_f2", model.hp.sigma_f2},
              {"sigma_n2", model.hp.sigma_n2}};
  Mat theta = model.hp.theta;
  detail::WriteHybrid(path, header,
                      {{"theta", &theta},
                       {"x_q", &model.x_q},
                       {"x_ee", &model.x_ee},
                       {"k_inv", &model.k_inv},
                       {"alpha", &model.alpha}});
}

inline GpModel load_gp(const std::filesystem::path& path) {
  const auto file = detail::ReadHybrid(path);
  if (file.header.value("format", "") != "maic-gp")
    throw std::runtime_error(path.string() + " is not a GP model file");
  GpModel model;
  model.hp.theta = file.Get("theta");
  model.hp.sigma_f2 = file.header.at("sigma_f2").get<double>();
  model.hp.sigma_n2 = file.header.at("sigma_n2").get<double>();
  model.x_q = file.Get("x_q");
  model.x_ee = file.Get("x_ee");
  model.k_inv = file.Get("k_inv");
  model.alpha = file.Get("alpha");
  return model;
}

inline void save_dataset(const std::filesystem::path& path, const GridDataset& ds,
                         std::uint64_t root_seed) {
  Json header{{"format", "maic-dataset"},
              {"version", 1},
              {"root_seed", root_seed},
              {"candidates", ds.candidates},
              {"dropped", ds.dropped}};
  detail::WriteHybrid(path, header, {{"x_q", &ds.x_q}, {"x_ee", &ds.x_ee}});
}

inline GridDataset load_dataset(const std::filesystem::path& path) {
  const auto file = detail::ReadHybrid(path);
  if (file.header.value("format", "") != "maic-dataset")
    throw std::runtime_error(path.string() + " is not a dataset file");
  GridDataset ds;
  ds.x_q = file.Get("x_q");
  ds.x_ee = file.Get("x_ee");
  ds.candidates = file.header.at("candidates").get<int>();
  ds.dropped = file.header.at("dropped").get<int>();
  return ds;
}

inline void save_mvae(const std::filesystem::path& path, const MvaeModel& model,
                      const TrainConfig& cfg, std::uint64_t root_seed) {
  Json header{{"format", "maic-mvae"},
              {"version", 1},
              {"root_seed", root_seed},
              {"image_h", model.cfg.image_h},
              {"image_w", model.cfg.image_w},
              {"n_joints", model.cfg.n_joints},
              {"latent_dim", model.cfg.latent_dim},
              {"hidden_enc", model.cfg.hidden_enc},
              {"hidden_q", model.cfg.hidden_q},
              {"hidden_v", model.cfg.hidden_v},
              {"train",
               {{"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"learning_rate", cfg.learning_rate},
                {"momentum", cfg.momentum},
                {"seed", cfg.seed},
                {"kl_weight", cfg.kl_weight}}}};
  Mat e1b = model.enc1.b, e2b = model.enc2.b, q1b = model.q1.b, q2b = model.q2.b,
      v1b = model.v1.b, v2b = model.v2.b;
  detail::WriteHybrid(path, header,
                      {{"enc1_w", &model.enc1.w}, {"enc1_b", &e1b},
                       {"enc2_w", &model.enc2.w}, {"enc2_b", &e2b},
                       {"q1_w", &model.q1.w},     {"q1_b", &q1b},
                       {"q2_w", &model.q2.w},     {"q2_b", &q2b},
                       {"v1_w", &model.v1.w},     {"v1_b", &v1b},
                       {"v2_w", &model.v2.w},     {"v2_b", &v2b},
                       {"precision_mask", &model.precision_mask}});
}

inline MvaeModel load_mvae(const std::filesystem::path& path) {
  const auto file = detail::ReadHybrid(path);
  if (file.header.value("format", "") != "maic-mvae")
    throw std::runtime_error(path.string() + " is not an MVAE model file");
  MvaeModel model;
  model.cfg.image_h = file.header.at("image_h").get<int>();
  model.cfg.image_w = file.header.at("image_w").get<int>();
  model.cfg.n_joints = file.header.at("n_joints").get<int>();
  model.cfg.latent_dim = file.header.at("latent_dim").get<int>();
  model.cfg.hidden_enc = file.header.at("hidden_enc").get<int>();
  model.cfg.hidden_q = file.header.at("hidden_q").get<int>();
  model.cfg.hidden_v = file.header.at("hidden_v").get<int>();
  model.enc1.w = file.Get("enc1_w");
  model.enc1.b = file.Get("enc1_b");
  model.enc2.w = file.Get("enc2_w");
  model.enc2.b = file.Get("enc2_b");
  model.q1.w = file.Get("q1_w");
  model.q1.b = file.Get("q1_b");
  model.q2.w = file.Get("q2_w");
  model.q2.b = file.Get("q2_b");
  model.v1.w = file.Get("v1_w");
  model.v1.b = file.Get("v1_b");
  model.v2.w = file.Get("v2_w");
  model.v2.b = file.Get("v2_b");
  model.precision_mask = file.Get("precision_mask");
  return model;
}

// Minimal deterministic CSV writer: caller supplies rows, every double goes
// through FormatDouble.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
  }

  void Comment(const std::string& text) { out_ << "# " << text << '\n'; }

  void Header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i)
      out_ << (i ? "," : "") << names[i];
    out_ << '\n';
  }

  void Row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      out_ << (i ? "," : "") << FormatDouble(values[i]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace maic

#endif  // MAIC_IO_HPP_
