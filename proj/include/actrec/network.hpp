#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "actrec/rng.hpp"
#include "actrec/tensor.hpp"

namespace actrec {

// Single-sample layer primitives. Inputs and activations are laid out
// [height, width, channels] with height = joints and width = time; the
// Network below composes them over batches.

struct ConvLayer {
    Tensor kernels;  // [K_out, kH, kW, C_in]
    Tensor bias;  // [K_out]
    std::size_t stride_h = 1;
    std::size_t stride_w = 1;
};

// Valid padding, floor semantics:
// out[i,j,k] = bias[k] + sum over window of kernels[k] * input patch at
// (i*sH, j*sW). Output is [(H-kH)/sH + 1, (W-kW)/sW + 1, K_out].
Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer);

struct ConvGrads {
    Tensor input;
    Tensor kernels;
    Tensor bias;
};

ConvGrads conv2d_backward(const Tensor& grad_out, const Tensor& input, const ConvLayer& layer);

// 2x2 window, stride 2, trailing remainder cells dropped. argmax holds the
// flat (row-major) input offset feeding each output cell; ties go to the
// first cell scanned.
std::pair<Tensor, std::vector<std::size_t>> maxpool_forward(const Tensor& input);
Tensor maxpool_backward(const Tensor& grad_out, const std::vector<std::size_t>& argmax,
                        const std::vector<std::size_t>& input_shape);

struct DenseLayer {
    Tensor weights;  // [in, out]
    Tensor bias;  // [out]
};

// y = x W + b over a batch: x is [N, in], result [N, out].
Tensor dense_forward(const Tensor& input, const DenseLayer& layer);

struct DenseGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const DenseLayer& layer);

// max(0, x); the subgradient at exactly 0 is taken as 0.
Tensor relu_forward(const Tensor& input);
Tensor relu_backward(const Tensor& grad_out, const Tensor& input);

// Inverted dropout: training multiplies by mask / keep_prob so inference is
// the identity. The mask is returned so backward can reuse it.
std::pair<Tensor, Tensor> dropout_forward(const Tensor& input, double keep_prob, Rng& rng);
Tensor dropout_backward(const Tensor& grad_out, const Tensor& mask, double keep_prob);

// Softmax with max subtraction; loss = -log p[label]; grad = p - onehot.
std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, std::size_t label);

// Architecture knobs. Defaults reproduce the full-size stack; tests shrink
// frames and widths to keep runtimes sane.
struct NetConfig {
    std::size_t frames = 1961;
    std::size_t stride = 5;  // conv1 time-axis stride
    std::size_t classes = 0;
    std::size_t conv1_kernels = 256;
    std::size_t conv2_kernels = 64;
    std::size_t fc1 = 1024;
    std::size_t fc2 = 256;
    double keep_prob = 0.5;
};

// Spatial extents of every stage for a given config; throws ConfigError with
// the offending stage when any extent collapses to zero.
struct ShapeChain {
    std::size_t conv1_h, conv1_w;
    std::size_t pool1_h, pool1_w;
    std::size_t conv2_h, conv2_w;
    std::size_t pool2_h, pool2_w;
    std::size_t flat;
};

ShapeChain shape_chain(const NetConfig& config);

enum class Mode { Train, Infer };

// conv1 -> relu -> pool -> conv2 -> relu -> pool -> flatten ->
// FC1 -> relu -> dropout -> FC2 -> relu -> dropout -> output dense.
// Softmax cross-entropy lives outside forward so evaluation can argmax raw
// logits.
class Network {
  public:
    Network(const NetConfig& config, const Rng& rng);

    const NetConfig& config() const { return config_; }
    Mode mode() const { return mode_; }
    void set_mode(Mode mode) { mode_ = mode; }

    // batch is [N, 15, frames, 4]; returns logits [N, classes]. Training
    // mode draws dropout masks from rng (required); inference ignores it.
    Tensor forward(const Tensor& batch, Rng* rng = nullptr);

    // grad_logits is [N, classes], already scaled for the batch mean.
    // Accumulates into the gradient buffers; training mode only.
    void backward(const Tensor& grad_logits);

    // Fixed order: conv1 kernels, conv1 bias, conv2 kernels, conv2 bias,
    // fc1 W, fc1 b, fc2 W, fc2 b, out W, out b.
    std::vector<Tensor*> params();
    std::vector<const Tensor*> grads() const;
    void zero_grads();

    void save(std::ostream& out) const;
    static Network load(std::istream& in);

  private:
    Network() = default;

    NetConfig config_;
    ShapeChain chain_{};
    Mode mode_ = Mode::Train;

    ConvLayer conv1_, conv2_;
    DenseLayer fc1_, fc2_, out_;

    ConvGrads conv1_grads_, conv2_grads_;
    DenseGrads fc1_grads_, fc2_grads_, out_grads_;

    // Forward caches for the batch most recently seen in training mode.
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

}  // namespace actrec
