#pragma once

#include <unistd.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dfn/clip/model.hpp"
#include "dfn/core/pool.hpp"
#include "dfn/core/rng.hpp"
#include "dfn/core/synthetic.hpp"

namespace dfn::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dfn-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Pool of i.i.d. Gaussian features with arbitrary ids and metadata.
inline Pool random_pool(std::size_t n, Dims dims, std::uint64_t seed, std::uint64_t id_base = 0) {
  Rng rng(seed);
  Pool p(dims);
  Record r;
  r.image.resize(dims.image);
  r.text.resize(dims.text);
  for (std::size_t i = 0; i < n; ++i) {
    r.id = id_base + i;
    for (float& v : r.image) v = static_cast<float>(rng.normal());
    for (float& v : r.text) v = static_cast<float>(rng.normal());
    r.concept_label = static_cast<std::uint32_t>(rng.below(7));
    r.aligned = static_cast<Alignment>(rng.below(2));
    p.push_back(r);
  }
  return p;
}

inline std::vector<float> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(scale * rng.normal());
  return v;
}

// Double-precision re-computation of one tower: normalize(W x + b).
inline std::vector<double> reference_encode(const std::vector<float>& w, const std::vector<float>& b,
                                            std::size_t rows, std::size_t cols, std::span<const float> x) {
  std::vector<double> out(rows);
  double norm2 = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += double(w[r * cols + c]) * double(x[c]);
    out[r] = acc;
    norm2 += acc * acc;
  }
  for (double& v : out) v /= std::sqrt(norm2);
  return out;
}

inline double reference_cosine(const clip::TwoTowerModel& m, const RecordView& r) {
  const auto a = reference_encode(m.w_img, m.b_img, m.d_emb, m.d_img, r.image);
  const auto b = reference_encode(m.w_txt, m.b_txt, m.d_emb, m.d_txt, r.text);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Model whose towers are the pseudo-inverses of the world's maps, so a
// noiseless record of concept k embeds exactly onto c_k.
inline clip::TwoTowerModel oracle_model(const World& w) {
  auto pinv = [&](const std::vector<double>& a, std::uint32_t rows) {
    Eigen::MatrixXd m(rows, w.d_latent);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < w.d_latent; ++c) m(r, c) = a[std::size_t{r} * w.d_latent + c];
    const Eigen::MatrixXd p = m.completeOrthogonalDecomposition().pseudoInverse();
    std::vector<float> out(std::size_t{w.d_latent} * rows);
    for (std::uint32_t r = 0; r < w.d_latent; ++r)
      for (std::uint32_t c = 0; c < rows; ++c) out[std::size_t{r} * rows + c] = static_cast<float>(p(r, c));
    return out;
  };
  clip::TwoTowerModel m;
  m.d_img = w.d_img;
  m.d_txt = w.d_txt;
  m.d_emb = w.d_latent;
  m.w_img = pinv(w.a_img, w.d_img);
  m.w_txt = pinv(w.a_txt, w.d_txt);
  m.b_img.assign(w.d_latent, 0.0f);
  m.b_txt.assign(w.d_latent, 0.0f);
  return m;
}

}  // namespace dfn::test
