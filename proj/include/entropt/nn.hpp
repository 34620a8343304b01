#ifndef ENTROPT_NN_HPP
#define ENTROPT_NN_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "entropt/objective.hpp"
#include "entropt/rng.hpp"

namespace entropt {

// One minibatch of examples: images as columns, labels as class indices.
struct Batch {
  Eigen::MatrixXd images;  // input_dim x B, values in [0,1]
  Eigen::VectorXi labels;  // B entries in [0, classes)
};

// Dense feed-forward network with rectifier hidden units and softmax
// cross-entropy loss, operating on a flat parameter vector. Layout per
// layer l: weight matrix W_l (out x in, column-major) followed by bias b_l.
class DenseNet {
 public:
  explicit DenseNet(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2)
      throw std::invalid_argument("net: need at least input and output layer");
    for (int w : widths_)
      if (w < 1) throw std::invalid_argument("net: layer width must be >= 1");
    param_count_ = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l)
      param_count_ += static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1] +
                      widths_[l + 1];
  }

  const std::vector<int>& widths() const { return widths_; }
  Eigen::Index param_count() const { return param_count_; }
  int input_dim() const { return widths_.front(); }
  int classes() const { return widths_.back(); }
  std::size_t layer_count() const { return widths_.size() - 1; }

  Eigen::Map<const Eigen::MatrixXd> weights(const ParamVector& params,
                                            std::size_t layer) const {
    return Eigen::Map<const Eigen::MatrixXd>(
        params.data() + layer_offset(layer), widths_[layer + 1],
        widths_[layer]);
  }
  Eigen::Map<const Eigen::VectorXd> biases(const ParamVector& params,
                                           std::size_t layer) const {
    return Eigen::Map<const Eigen::VectorXd>(
        params.data() + layer_offset(layer) +
            static_cast<Eigen::Index>(widths_[layer]) * widths_[layer + 1],
        widths_[layer + 1]);
  }

  // Glorot-uniform weights, zero biases; deterministic under the stream.
  ParamVector init_params(RngStream stream) const {
    Rng rng(stream);
    ParamVector params = ParamVector::Zero(param_count_);
    for (std::size_t l = 0; l < layer_count(); ++l) {
      const double limit =
          std::sqrt(6.0 / (widths_[l] + widths_[l + 1]));
      double* w = params.data() + layer_offset(l);
      const Eigen::Index n =
          static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1];
      for (Eigen::Index i = 0; i < n; ++i)
        w[i] = limit * (2.0 * rng.uniform() - 1.0);
    }
    return params;
  }

  // Mean softmax cross-entropy over the batch, log-sum-exp stabilized.
  double forward_loss(const ParamVector& params, const Batch& batch) const {
    check(params, batch);
    const Eigen::MatrixXd logits = forward(params, batch.images);
    const Eigen::Index b = batch.images.cols();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto col = logits.col(i);
      const double m = col.maxCoeff();
      const double lse = m + std::log((col.array() - m).exp().sum());
      loss += lse - col[batch.labels[i]];
    }
    return loss / static_cast<double>(b);
  }

  // Gradient of forward_loss with respect to the flat parameter vector.
  ParamVector backward(const ParamVector& params, const Batch& batch) const {
    check(params, batch);
    const Eigen::Index b = batch.images.cols();

    // forward pass keeping activations
    std::vector<Eigen::MatrixXd> activations;
    activations.reserve(layer_count() + 1);
    activations.push_back(batch.images);
    for (std::size_t l = 0; l < layer_count(); ++l) {
      Eigen::MatrixXd z =
          (weights(params, l) * activations.back()).colwise() +
          biases(params, l);
      if (l + 1 < layer_count()) z = z.cwiseMax(0.0);
      activations.push_back(std::move(z));
    }

    // softmax minus one-hot, averaged over the batch
    Eigen::MatrixXd delta = activations.back();
    for (Eigen::Index i = 0; i < b; ++i) {
      auto col = delta.col(i);
      const double m = col.maxCoeff();
      col = (col.array() - m).exp();
      col /= col.sum();
      col[batch.labels[i]] -= 1.0;
    }
    delta /= static_cast<double>(b);

    ParamVector grad = ParamVector::Zero(param_count_);
    for (std::size_t l = layer_count(); l-- > 0;) {
      Eigen::Map<Eigen::MatrixXd> gw(grad.data() + layer_offset(l),
                                     widths_[l + 1], widths_[l]);
      Eigen::Map<Eigen::VectorXd> gb(
          grad.data() + layer_offset(l) +
              static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1],
          widths_[l + 1]);
      gw.noalias() = delta * activations[l].transpose();
      gb = delta.rowwise().sum();
      if (l > 0) {
        Eigen::MatrixXd next = weights(params, l).transpose() * delta;
        // rectifier derivative on the pre-activation sign, recovered from
        // the stored post-activation
        delta = next.cwiseProduct(
            (activations[l].array() > 0.0).cast<double>().matrix());
      }
    }
    return grad;
  }

  // Fraction of argmax predictions matching labels; ties resolve to the
  // lowest class index.
  double accuracy(const ParamVector& params, const Eigen::MatrixXd& images,
                  const Eigen::VectorXi& labels) const {
    if (images.cols() == 0)
      throw std::invalid_argument("accuracy: empty evaluation set");
    if (images.cols() != labels.size())
      throw std::invalid_argument("accuracy: image/label count mismatch");
    const Eigen::MatrixXd logits = forward(params, images);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < images.cols(); ++i) {
      int best = 0;
      for (int k = 1; k < classes(); ++k)
        if (logits(k, i) > logits(best, i)) best = k;
      if (best == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(images.cols());
  }

  Eigen::MatrixXd forward(const ParamVector& params,
                          const Eigen::MatrixXd& images) const {
    Eigen::MatrixXd a = images;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      a = (weights(params, l) * a).colwise() + biases(params, l);
      if (l + 1 < layer_count()) a = a.cwiseMax(0.0);
    }
    return a;
  }

 private:
  Eigen::Index layer_offset(std::size_t layer) const {
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < layer; ++l)
      off += static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1] +
             widths_[l + 1];
    return off;
  }

  void check(const ParamVector& params, const Batch& batch) const {
    if (params.size() != param_count_)
      throw std::invalid_argument("net: parameter vector has wrong length");
    if (batch.images.rows() != input_dim())
      throw std::invalid_argument("net: image rows != input dim");
    if (batch.images.cols() != batch.labels.size())
      throw std::invalid_argument("net: image/label count mismatch");
    for (Eigen::Index i = 0; i < batch.labels.size(); ++i)
      if (batch.labels[i] < 0 || batch.labels[i] >= classes())
        throw std::invalid_argument("net: label out of range");
  }

  std::vector<int> widths_;
  Eigen::Index param_count_;
};

}  // namespace entropt

#endif
