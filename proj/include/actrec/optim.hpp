#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "actrec/tensor.hpp"

namespace actrec {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias-corrected moments:
//   m <- b1 m + (1 - b1) g        mhat = m / (1 - b1^t)
//   v <- b2 v + (1 - b2) g^2      vhat = v / (1 - b2^t)
//   theta <- theta - lr * mhat / (sqrt(vhat) + eps)
// Moment buffers are per-parameter and the step count is shared. A non-finite
// gradient anywhere rejects the whole step before any state changes.
class Adam {
  public:
    explicit Adam(AdamConfig config = {});

    // params and grads are matched element-for-element; shapes are bound on
    // the first step and must not change afterwards.
    void step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads);

    const AdamConfig& config() const { return config_; }
    std::uint64_t steps() const { return t_; }

    void save(std::ostream& out) const;
    void load(std::istream& in);

  private:
    AdamConfig config_;
    std::uint64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace actrec
