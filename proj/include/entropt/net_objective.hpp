#ifndef ENTROPT_NET_OBJECTIVE_HPP
#define ENTROPT_NET_OBJECTIVE_HPP

#include <algorithm>

#include "entropt/data.hpp"
#include "entropt/nn.hpp"
#include "entropt/objective.hpp"

namespace entropt {

// Empirical risk f(x) = (1/N) sum_i f_i(x) of a dense network over a
// dataset, with f_i the per-example softmax cross-entropy.
class NetObjective final : public Objective {
 public:
  NetObjective(const DenseNet& net, const Dataset& data)
      : net_(&net), data_(&data) {
    if (net.input_dim() != data.images.rows())
      throw std::invalid_argument("net objective: input dim != image size");
  }

  Eigen::Index dim() const override { return net_->param_count(); }
  bool has_minibatch() const override { return true; }
  std::int64_t dataset_size() const override { return data_->size(); }

  double value(const ParamVector& x) const override {
    check_point(x);
    // chunked full pass; exact mean over all N examples
    const Eigen::Index n = data_->size();
    const Eigen::Index chunk = 1000;
    double loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += chunk) {
      const Eigen::Index b = std::min(chunk, n - start);
      Batch batch{data_->images.middleCols(start, b),
                  data_->labels.segment(start, b)};
      loss += net_->forward_loss(x, batch) * static_cast<double>(b);
    }
    return loss / static_cast<double>(n);
  }

  ParamVector gradient(const ParamVector& x) const override {
    check_point(x);
    const Eigen::Index n = data_->size();
    const Eigen::Index chunk = 1000;
    ParamVector grad = ParamVector::Zero(dim());
    for (Eigen::Index start = 0; start < n; start += chunk) {
      const Eigen::Index b = std::min(chunk, n - start);
      Batch batch{data_->images.middleCols(start, b),
                  data_->labels.segment(start, b)};
      grad += net_->backward(x, batch) * static_cast<double>(b);
    }
    return grad / static_cast<double>(n);
  }

  double value(const ParamVector& x, const MinibatchSpec& batch) const override {
    check_point(x);
    check_batch(batch);
    return net_->forward_loss(x, gather(batch));
  }

  ParamVector gradient(const ParamVector& x,
                       const MinibatchSpec& batch) const override {
    check_point(x);
    check_batch(batch);
    return net_->backward(x, gather(batch));
  }

  const DenseNet& net() const { return *net_; }
  const Dataset& data() const { return *data_; }

 private:
  Batch gather(const MinibatchSpec& indices) const {
    if (indices.empty())
      throw std::invalid_argument("net objective: empty minibatch");
    Batch batch;
    batch.images.resize(data_->images.rows(),
                        static_cast<Eigen::Index>(indices.size()));
    batch.labels.resize(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      batch.images.col(static_cast<Eigen::Index>(i)) =
          data_->images.col(indices[i]);
      batch.labels[static_cast<Eigen::Index>(i)] =
          data_->labels[indices[i]];
    }
    return batch;
  }

  const DenseNet* net_;
  const Dataset* data_;
};

}  // namespace entropt

#endif
