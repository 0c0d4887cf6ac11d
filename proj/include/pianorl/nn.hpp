// Copyright 2026 The pianorl Authors
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

#ifndef PIANORL_NN_HPP_
#define PIANORL_NN_HPP_

// Fully connected networks with hand-written backpropagation. Batches are
// stored column-wise: a (features x batch) matrix holds one sample per column.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pianorl::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

using Rng = std::mt19937_64;

// Hidden blocks are Linear -> Dropout -> LayerNorm -> ReLU; dropout and
// layer normalization are optional.
struct MlpSpec {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;
  double dropout = 0.0;
  bool layer_norm = false;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

inline std::size_t parameter_count(const MlpSpec& spec) {
  std::size_t n = 0;
  int in = spec.input;
  for (int h : spec.hidden) {
    n += static_cast<std::size_t>(h) * static_cast<std::size_t>(in + 1);
    if (spec.layer_norm) n += 2 * static_cast<std::size_t>(h);
    in = h;
  }
  n += static_cast<std::size_t>(spec.output) * static_cast<std::size_t>(in + 1);
  return n;
}

template <typename S>
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    if (spec_.input <= 0 || spec_.output <= 0) throw std::invalid_argument("bad MLP shape");
    theta_ = Vec<S>::Zero(static_cast<Eigen::Index>(parameter_count(spec_)));
    grad_ = Vec<S>::Zero(theta_.size());
    Eigen::Index offset = 0;
    int in = spec_.input;
    for (int h : spec_.hidden) {
      layers_.push_back(make_layer(offset, in, h, spec_.layer_norm));
      in = h;
    }
    layers_.push_back(make_layer(offset, in, spec_.output, false));
    cache_.resize(layers_.size());
    set_unit_layer_norm();
  }

  const MlpSpec& spec() const { return spec_; }
  Vec<S>& parameters() { return theta_; }
  const Vec<S>& parameters() const { return theta_; }
  Vec<S>& gradient() { return grad_; }
  const Vec<S>& gradient() const { return grad_; }
  void zero_grad() { grad_.setZero(); }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, unit
  // gain and zero shift for layer norms. The output layer is scaled by
  // `output_scale`.
  void initialize(Rng& rng, double output_scale = 1.0) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& L = layers_[l];
      const double bound = (l + 1 == layers_.size() ? output_scale : 1.0) / std::sqrt(L.in);
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index i = 0; i < L.out * (L.in + 1); ++i) {
        theta_[L.w + i] = static_cast<S>(dist(rng));
      }
    }
    set_unit_layer_norm();
  }

  // With train = true dropout masks are drawn from rng. Caches activations
  // for the next backward().
  Mat<S> forward(const Mat<S>& x, bool train = false, Rng* rng = nullptr) {
    if (x.rows() != spec_.input) throw std::invalid_argument("MLP input size mismatch");
    const bool drop = train && spec_.dropout > 0.0;
    if (drop && rng == nullptr) throw std::invalid_argument("dropout needs an rng");
    Mat<S> a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& L = layers_[l];
      Cache& c = cache_[l];
      c.input = a;
      Mat<S> z = weight(L) * a;
      z.colwise() += bias(L);
      if (l + 1 == layers_.size()) return z;
      c.dropped = drop;
      if (drop) {
        const S keep_scale = static_cast<S>(1.0 / (1.0 - spec_.dropout));
        std::bernoulli_distribution keep(1.0 - spec_.dropout);
        c.mask.resize(z.rows(), z.cols());
        for (Eigen::Index i = 0; i < c.mask.size(); ++i) {
          c.mask.data()[i] = keep(*rng) ? keep_scale : S(0);
        }
        z = z.cwiseProduct(c.mask);
      }
      if (L.layer_norm) {
        const S n = static_cast<S>(z.rows());
        const RowVec<S> mean = z.colwise().sum() / n;
        Mat<S> centered = z.rowwise() - mean;
        const RowVec<S> var = centered.cwiseAbs2().colwise().sum() / n;
        c.inv_std = (var.array() + S(kLayerNormEps)).rsqrt().matrix();
        c.normalized = centered * c.inv_std.asDiagonal();
        z = (c.normalized.array().colwise() * gain(L).array()).matrix();
        z.colwise() += shift(L);
      }
      c.pre_activation = z;
      a = z.cwiseMax(S(0));
    }
    return a;
  }

  // Inference without dropout or caching.
  Mat<S> predict(const Mat<S>& x) const {
    if (x.rows() != spec_.input) throw std::invalid_argument("MLP input size mismatch");
    Mat<S> a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& L = layers_[l];
      Mat<S> z = weight(L) * a;
      z.colwise() += bias(L);
      if (l + 1 == layers_.size()) return z;
      if (L.layer_norm) {
        const S n = static_cast<S>(z.rows());
        const RowVec<S> mean = z.colwise().sum() / n;
        z.rowwise() -= mean;
        const RowVec<S> inv_std =
            ((z.cwiseAbs2().colwise().sum() / n).array() + S(kLayerNormEps)).rsqrt().matrix();
        z = z * inv_std.asDiagonal();
        z = (z.array().colwise() * gain(L).array()).matrix();
        z.colwise() += shift(L);
      }
      a = z.cwiseMax(S(0));
    }
    return a;
  }

  // (offset, size) of every weight, bias, gain and shift block.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> parameter_segments() const {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    for (const Layer& L : layers_) {
      out.emplace_back(L.w, static_cast<Eigen::Index>(L.in) * L.out);
      out.emplace_back(L.b, L.out);
      if (L.layer_norm) {
        out.emplace_back(L.gamma, L.out);
        out.emplace_back(L.beta, L.out);
      }
    }
    return out;
  }

  // Back-propagates d(loss)/d(output) through the last forward() and returns
  // d(loss)/d(input). Parameter gradients accumulate into gradient() unless
  // accumulate_params is false.
  Mat<S> backward(const Mat<S>& grad_out, bool accumulate_params = true) {
    Mat<S> g = grad_out;
    for (std::size_t li = layers_.size(); li-- > 0;) {
      const Layer& L = layers_[li];
      const Cache& c = cache_[li];
      if (li + 1 != layers_.size()) {
        g = g.cwiseProduct((c.pre_activation.array() > S(0)).template cast<S>().matrix());
        if (L.layer_norm) {
          if (accumulate_params) {
            gain_grad(L) += g.cwiseProduct(c.normalized).rowwise().sum();
            shift_grad(L) += g.rowwise().sum();
          }
          const Mat<S> gx = (g.array().colwise() * gain(L).array()).matrix();
          const S n = static_cast<S>(gx.rows());
          const RowVec<S> sum_g = gx.colwise().sum();
          const RowVec<S> sum_gx = gx.cwiseProduct(c.normalized).colwise().sum();
          Mat<S> t = (gx * n).rowwise() - sum_g;
          t -= c.normalized * sum_gx.asDiagonal();
          g = t * (c.inv_std / n).asDiagonal();
        }
        if (c.dropped) g = g.cwiseProduct(c.mask);
      }
      if (accumulate_params) {
        weight_grad(L).noalias() += g * c.input.transpose();
        bias_grad(L) += g.rowwise().sum();
      }
      g = weight(L).transpose() * g;
    }
    return g;
  }

  // theta <- (1 - tau) theta + tau * other.theta
  void soft_update_from(const Mlp& other, S tau) {
    theta_ = (S(1) - tau) * theta_ + tau * other.theta_;
  }

  template <typename T>
  Mlp<T> cast() const {
    Mlp<T> out(spec_);
    out.parameters() = theta_.template cast<T>();
    return out;
  }

 private:
  static constexpr double kLayerNormEps = 1e-5;

  struct Layer {
    int in;
    int out;
    Eigen::Index w;  // out x in, column-major
    Eigen::Index b;
    bool layer_norm;
    Eigen::Index gamma;
    Eigen::Index beta;
  };

  struct Cache {
    Mat<S> input;
    Mat<S> mask;
    Mat<S> normalized;
    RowVec<S> inv_std;
    Mat<S> pre_activation;
    bool dropped = false;
  };

  static Layer make_layer(Eigen::Index& offset, int in, int out, bool layer_norm) {
    Layer L{in, out, offset, 0, layer_norm, 0, 0};
    offset += static_cast<Eigen::Index>(in) * out;
    L.b = offset;
    offset += out;
    if (layer_norm) {
      L.gamma = offset;
      offset += out;
      L.beta = offset;
      offset += out;
    }
    return L;
  }

  void set_unit_layer_norm() {
    for (const Layer& L : layers_) {
      if (!L.layer_norm) continue;
      theta_.segment(L.gamma, L.out).setOnes();
      theta_.segment(L.beta, L.out).setZero();
    }
  }

  Eigen::Map<const Mat<S>> weight(const Layer& L) const { return {theta_.data() + L.w, L.out, L.in}; }
  Eigen::Map<const Vec<S>> bias(const Layer& L) const { return {theta_.data() + L.b, L.out}; }
  Eigen::Map<const Vec<S>> gain(const Layer& L) const { return {theta_.data() + L.gamma, L.out}; }
  Eigen::Map<const Vec<S>> shift(const Layer& L) const { return {theta_.data() + L.beta, L.out}; }
  Eigen::Map<Mat<S>> weight(const Layer& L) { return {theta_.data() + L.w, L.out, L.in}; }
  Eigen::Map<Mat<S>> weight_grad(const Layer& L) { return {grad_.data() + L.w, L.out, L.in}; }
  Eigen::Map<Vec<S>> bias(const Layer& L) { return {theta_.data() + L.b, L.out}; }
  Eigen::Map<Vec<S>> bias_grad(const Layer& L) { return {grad_.data() + L.b, L.out}; }
  Eigen::Map<Vec<S>> gain(const Layer& L) { return {theta_.data() + L.gamma, L.out}; }
  Eigen::Map<Vec<S>> gain_grad(const Layer& L) { return {grad_.data() + L.gamma, L.out}; }
  Eigen::Map<Vec<S>> shift(const Layer& L) { return {theta_.data() + L.beta, L.out}; }
  Eigen::Map<Vec<S>> shift_grad(const Layer& L) { return {grad_.data() + L.beta, L.out}; }

  MlpSpec spec_;
  Vec<S> theta_;
  Vec<S> grad_;
  std::vector<Layer> layers_;
  std::vector<Cache> cache_;
};

// Adam over a flat parameter vector.
template <typename S>
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(Vec<S>::Zero(size)), v_(Vec<S>::Zero(size)) {}

  void step(Vec<S>& theta, const Vec<S>& grad) {
    ++t_;
    m_ = S(beta1_) * m_ + S(1 - beta1_) * grad;
    v_ = S(beta2_) * v_ + S(1 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const S step_size = static_cast<S>(lr_ * std::sqrt(c2) / c1);
    theta.array() -= step_size * m_.array() / (v_.array().sqrt() + S(eps_ * std::sqrt(c2)));
  }

  std::int64_t steps() const { return t_; }

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  Vec<S> m_;
  Vec<S> v_;
  std::int64_t t_ = 0;
};

}  // namespace pianorl::nn

#endif  // PIANORL_NN_HPP_
