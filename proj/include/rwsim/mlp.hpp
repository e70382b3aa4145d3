#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace rwsim {

/// Fully connected network with rectifier hidden units and a linear output
/// layer. Gradients are computed by hand; the optimizer is plain SGD.
template <typename Scalar>
class Mlp {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Mlp() = default;

  /// sizes = {input, hidden..., output}; weights drawn uniform in
  /// [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  Mlp(const std::vector<int>& sizes, std::mt19937_64& rng) : sizes_(sizes) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need >= 2 layers");
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const Scalar bound = Scalar(1) / std::sqrt(Scalar(sizes[l]));
      std::uniform_real_distribution<double> u(-double(bound), double(bound));
      Mat w(sizes[l + 1], sizes[l]);
      for (Eigen::Index i = 0; i < w.size(); ++i)
        w.data()[i] = Scalar(u(rng));
      weights_.push_back(std::move(w));
      biases_.push_back(Vec::Zero(sizes[l + 1]));
    }
  }

  /// Activations recorded during a forward pass, consumed by backward().
  struct Tape {
    Vec input;
    std::vector<Vec> post;  // post-activation output of each layer
  };

  struct Gradients {
    std::vector<Mat> dw;
    std::vector<Vec> db;
  };

  Vec forward(const Vec& x) const {
    Vec h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      h = (weights_[l] * h + biases_[l]).eval();
      if (l + 1 < weights_.size()) h = h.cwiseMax(Scalar(0));
    }
    return h;
  }

  Vec forward(const Vec& x, Tape& tape) const {
    tape.input = x;
    tape.post.resize(weights_.size());
    Vec h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      h = (weights_[l] * h + biases_[l]).eval();
      if (l + 1 < weights_.size()) h = h.cwiseMax(Scalar(0));
      tape.post[l] = h;
    }
    return h;
  }

  /// Backpropagate d(loss)/d(output) through the taped pass.
  Gradients backward(const Tape& tape, const Vec& grad_output) const {
    Gradients g;
    g.dw.resize(weights_.size());
    g.db.resize(weights_.size());
    Vec delta = grad_output;
    for (std::size_t l = weights_.size(); l-- > 0;) {
      if (l + 1 < weights_.size()) {
        // gate by the rectifier of this layer's output
        delta = delta.cwiseProduct(
            (tape.post[l].array() > Scalar(0)).template cast<Scalar>().matrix());
      }
      const Vec& below = (l == 0) ? tape.input : tape.post[l - 1];
      g.dw[l] = delta * below.transpose();
      g.db[l] = delta;
      if (l > 0) delta = (weights_[l].transpose() * delta).eval();
    }
    return g;
  }

  /// theta += step * grad (caller folds learning rate and sign into step).
  void apply(const Gradients& g, Scalar step) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      weights_[l] += step * g.dw[l];
      biases_[l] += step * g.db[l];
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
      n += weights_[l].size() + biases_[l].size();
    return n;
  }

  Vec flatten_parameters() const {
    Vec out(parameter_count());
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.segment(at, weights_[l].size()) =
          Eigen::Map<const Vec>(weights_[l].data(), weights_[l].size());
      at += weights_[l].size();
      out.segment(at, biases_[l].size()) = biases_[l];
      at += biases_[l].size();
    }
    return out;
  }

  void set_parameters(const Vec& flat) {
    if (flat.size() != parameter_count())
      throw std::invalid_argument("Mlp: parameter size mismatch");
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::Map<Vec>(weights_[l].data(), weights_[l].size()) =
          flat.segment(at, weights_[l].size());
      at += weights_[l].size();
      biases_[l] = flat.segment(at, biases_[l].size());
      at += biases_[l].size();
    }
  }

  static Vec flatten_gradients(const Gradients& g) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < g.dw.size(); ++l)
      n += g.dw[l].size() + g.db[l].size();
    Vec out(n);
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < g.dw.size(); ++l) {
      out.segment(at, g.dw[l].size()) =
          Eigen::Map<const Vec>(g.dw[l].data(), g.dw[l].size());
      at += g.dw[l].size();
      out.segment(at, g.db[l].size()) = g.db[l];
      at += g.db[l].size();
    }
    return out;
  }

  void save(std::ostream& out) const {
    const std::uint32_t n_layers = static_cast<std::uint32_t>(sizes_.size());
    out.write(reinterpret_cast<const char*>(&n_layers), sizeof(n_layers));
    for (int s : sizes_) {
      const std::int64_t v = s;
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.write(reinterpret_cast<const char*>(weights_[l].data()),
                static_cast<std::streamsize>(weights_[l].size() * sizeof(Scalar)));
      out.write(reinterpret_cast<const char*>(biases_[l].data()),
                static_cast<std::streamsize>(biases_[l].size() * sizeof(Scalar)));
    }
  }

  static Mlp load(std::istream& in) {
    std::uint32_t n_layers = 0;
    in.read(reinterpret_cast<char*>(&n_layers), sizeof(n_layers));
    if (!in || n_layers < 2) throw std::runtime_error("Mlp: bad checkpoint");
    std::vector<int> sizes(n_layers);
    for (auto& s : sizes) {
      std::int64_t v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      s = static_cast<int>(v);
    }
    Mlp net;
    net.sizes_ = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      Mat w(sizes[l + 1], sizes[l]);
      Vec b(sizes[l + 1]);
      in.read(reinterpret_cast<char*>(w.data()),
              static_cast<std::streamsize>(w.size() * sizeof(Scalar)));
      in.read(reinterpret_cast<char*>(b.data()),
              static_cast<std::streamsize>(b.size() * sizeof(Scalar)));
      net.weights_.push_back(std::move(w));
      net.biases_.push_back(std::move(b));
    }
    if (!in) throw std::runtime_error("Mlp: truncated checkpoint");
    return net;
  }

 private:
  std::vector<int> sizes_;
  std::vector<Mat> weights_;
  std::vector<Vec> biases_;
};

using MlpD = Mlp<double>;

}  // namespace rwsim
