#include "actrec/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "actrec/common.hpp"
#include "actrec/dataset.hpp"
#include "actrec/preprocess.hpp"

namespace actrec {

namespace {

std::string dims(const std::vector<std::size_t>& shape) {
    std::string out;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    return out;
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank) {
        throw ShapeError(std::string(what) + " must have rank " + std::to_string(rank) +
                         ", got " + dims(t.shape()));
    }
}

// Patch matrix: row r = output position (flattened row-major over OH x OW),
// columns enumerate the kH x kW x C window in row-major order. Convolution
// is then one matrix product against the kernels.
Tensor im2col(const Tensor& input, std::size_t kh, std::size_t kw, std::size_t sh,
              std::size_t sw, std::size_t oh, std::size_t ow) {
    const std::size_t c = input.shape()[2];
    const std::size_t w = input.shape()[1];
    Tensor col = Tensor::zeros({oh * ow, kh * kw * c});
    const double* src = input.data();
    double* dst = col.data();
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            for (std::size_t di = 0; di < kh; ++di) {
                // One contiguous run of kw * c values per kernel row.
                const double* run = src + ((i * sh + di) * w + j * sw) * c;
                std::memcpy(dst, run, kw * c * sizeof(double));
                dst += kw * c;
            }
        }
    }
    return col;
}

// Scatter-add inverse of im2col: overlapping windows accumulate.
Tensor col2im(const Tensor& col, const std::vector<std::size_t>& input_shape, std::size_t kh,
              std::size_t kw, std::size_t sh, std::size_t sw, std::size_t oh, std::size_t ow) {
    const std::size_t w = input_shape[1];
    const std::size_t c = input_shape[2];
    Tensor out = Tensor::zeros(input_shape);
    const double* src = col.data();
    double* dst = out.data();
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            for (std::size_t di = 0; di < kh; ++di) {
                double* run = dst + ((i * sh + di) * w + j * sw) * c;
                for (std::size_t k = 0; k < kw * c; ++k) run[k] += src[k];
                src += kw * c;
            }
        }
    }
    return out;
}

Tensor kernel_matrix(const Tensor& kernels) {
    // [K, kH, kW, C] viewed as [K, kH*kW*C]; same memory order as im2col rows.
    const auto& s = kernels.shape();
    return kernels.reshaped({s[0], s[1] * s[2] * s[3]});
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer) {
    require_rank(input, 3, "conv input");
    require_rank(layer.kernels, 4, "conv kernels");
    const std::size_t h = input.shape()[0], w = input.shape()[1], c = input.shape()[2];
    const std::size_t k = layer.kernels.shape()[0];
    const std::size_t kh = layer.kernels.shape()[1], kw = layer.kernels.shape()[2];
    if (layer.kernels.shape()[3] != c) {
        throw ShapeError("conv kernels expect " + std::to_string(layer.kernels.shape()[3]) +
                         " channels, input has " + std::to_string(c));
    }
    if (layer.bias.shape() != std::vector<std::size_t>{k}) {
        throw ShapeError("conv bias shape does not match kernel count");
    }
    if (kh > h || kw > w) {
        throw ShapeError("conv kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                         " larger than input " + std::to_string(h) + "x" + std::to_string(w));
    }
    if (layer.stride_h == 0 || layer.stride_w == 0) throw ParamError("conv stride must be >= 1");
    const std::size_t oh = (h - kh) / layer.stride_h + 1;
    const std::size_t ow = (w - kw) / layer.stride_w + 1;
    const Tensor col = im2col(input, kh, kw, layer.stride_h, layer.stride_w, oh, ow);
    Tensor out_mat = matmul_nt(col, kernel_matrix(layer.kernels));  // [oh*ow, k]
    double* o = out_mat.data();
    const double* b = layer.bias.data();
    for (std::size_t r = 0; r < oh * ow; ++r) {
        for (std::size_t kk = 0; kk < k; ++kk) o[r * k + kk] += b[kk];
    }
    return out_mat.reshaped({oh, ow, k});
}

ConvGrads conv2d_backward(const Tensor& grad_out, const Tensor& input, const ConvLayer& layer) {
    require_rank(grad_out, 3, "conv grad_out");
    require_rank(input, 3, "conv input");
    const std::size_t k = layer.kernels.shape()[0];
    const std::size_t kh = layer.kernels.shape()[1], kw = layer.kernels.shape()[2];
    const std::size_t oh = (input.shape()[0] - kh) / layer.stride_h + 1;
    const std::size_t ow = (input.shape()[1] - kw) / layer.stride_w + 1;
    if (grad_out.shape() != std::vector<std::size_t>{oh, ow, k}) {
        throw ShapeError("conv grad_out shape " + dims(grad_out.shape()) +
                         " does not match forward output " + dims({oh, ow, k}));
    }
    const Tensor col = im2col(input, kh, kw, layer.stride_h, layer.stride_w, oh, ow);
    const Tensor gom = grad_out.reshaped({oh * ow, k});
    ConvGrads g;
    g.bias = Tensor::zeros({k});
    const double* gm = gom.data();
    for (std::size_t r = 0; r < oh * ow; ++r) {
        for (std::size_t kk = 0; kk < k; ++kk) g.bias.data()[kk] += gm[r * k + kk];
    }
    Tensor gk = matmul_tn(gom, col);  // [k, kh*kw*c]
    g.kernels = gk.reshaped(layer.kernels.shape());
    const Tensor gcol = matmul(gom, kernel_matrix(layer.kernels));  // [oh*ow, kh*kw*c]
    g.input = col2im(gcol, input.shape(), kh, kw, layer.stride_h, layer.stride_w, oh, ow);
    return g;
}

std::pair<Tensor, std::vector<std::size_t>> maxpool_forward(const Tensor& input) {
    require_rank(input, 3, "pool input");
    const std::size_t h = input.shape()[0], w = input.shape()[1], c = input.shape()[2];
    if (h < 2 || w < 2) {
        throw ShapeError("pool input " + dims(input.shape()) + " smaller than its 2x2 window");
    }
    const std::size_t oh = h / 2, ow = w / 2;
    Tensor out = Tensor::zeros({oh, ow, c});
    std::vector<std::size_t> argmax(oh * ow * c);
    const double* src = input.data();
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                std::size_t best = (2 * i * w + 2 * j) * c + ch;
                double best_v = src[best];
                // Row-major scan over the window; strict > keeps the first
                // maximum on ties.
                for (std::size_t di = 0; di < 2; ++di) {
                    for (std::size_t dj = 0; dj < 2; ++dj) {
                        const std::size_t idx = ((2 * i + di) * w + 2 * j + dj) * c + ch;
                        if (src[idx] > best_v) {
                            best_v = src[idx];
                            best = idx;
                        }
                    }
                }
                out(i, j, ch) = best_v;
                argmax[(i * ow + j) * c + ch] = best;
            }
        }
    }
    return {std::move(out), std::move(argmax)};
}

Tensor maxpool_backward(const Tensor& grad_out, const std::vector<std::size_t>& argmax,
                        const std::vector<std::size_t>& input_shape) {
    require_rank(grad_out, 3, "pool grad_out");
    if (grad_out.size() != argmax.size()) {
        throw ShapeError("pool grad_out does not match the recorded argmax count");
    }
    Tensor out = Tensor::zeros(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) {
        if (argmax[i] >= out.size()) throw ShapeError("pool argmax index out of range");
        out.data()[argmax[i]] += grad_out.data()[i];
    }
    return out;
}

Tensor dense_forward(const Tensor& input, const DenseLayer& layer) {
    require_rank(input, 2, "dense input");
    require_rank(layer.weights, 2, "dense weights");
    if (input.shape()[1] != layer.weights.shape()[0]) {
        throw ShapeError("dense input width " + std::to_string(input.shape()[1]) +
                         " does not match weight rows " +
                         std::to_string(layer.weights.shape()[0]));
    }
    const std::size_t out_dim = layer.weights.shape()[1];
    if (layer.bias.shape() != std::vector<std::size_t>{out_dim}) {
        throw ShapeError("dense bias shape does not match weight columns");
    }
    Tensor out = matmul(input, layer.weights);
    double* o = out.data();
    const double* b = layer.bias.data();
    for (std::size_t r = 0; r < out.shape()[0]; ++r) {
        for (std::size_t j = 0; j < out_dim; ++j) o[r * out_dim + j] += b[j];
    }
    return out;
}

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const DenseLayer& layer) {
    require_rank(grad_out, 2, "dense grad_out");
    if (grad_out.shape()[0] != input.shape()[0] ||
        grad_out.shape()[1] != layer.weights.shape()[1]) {
        throw ShapeError("dense grad_out shape " + dims(grad_out.shape()) +
                         " does not match forward output");
    }
    DenseGrads g;
    g.weights = matmul_tn(input, grad_out);
    g.input = matmul_nt(grad_out, layer.weights);
    g.bias = Tensor::zeros({grad_out.shape()[1]});
    const double* go = grad_out.data();
    const std::size_t cols = grad_out.shape()[1];
    for (std::size_t r = 0; r < grad_out.shape()[0]; ++r) {
        for (std::size_t j = 0; j < cols; ++j) g.bias.data()[j] += go[r * cols + j];
    }
    return g;
}

Tensor relu_forward(const Tensor& input) {
    return map(input, [](double x) { return x > 0.0 ? x : 0.0; });
}

Tensor relu_backward(const Tensor& grad_out, const Tensor& input) {
    return zip_map(grad_out, input, [](double g, double x) { return x > 0.0 ? g : 0.0; });
}

std::pair<Tensor, Tensor> dropout_forward(const Tensor& input, double keep_prob, Rng& rng) {
    if (keep_prob <= 0.0 || keep_prob > 1.0) {
        throw ParamError("keep probability must lie in (0, 1]");
    }
    Tensor mask = Tensor::zeros(input.shape());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask.data()[i] = rng.next_double() < keep_prob ? 1.0 : 0.0;
    }
    Tensor out = zip_map(input, mask, [keep_prob](double x, double m) { return x * m / keep_prob; });
    return {std::move(out), std::move(mask)};
}

Tensor dropout_backward(const Tensor& grad_out, const Tensor& mask, double keep_prob) {
    if (keep_prob <= 0.0 || keep_prob > 1.0) {
        throw ParamError("keep probability must lie in (0, 1]");
    }
    return zip_map(grad_out, mask, [keep_prob](double g, double m) { return g * m / keep_prob; });
}

std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, std::size_t label) {
    require_rank(logits, 1, "logits");
    const std::size_t c = logits.shape()[0];
    if (c < 2) throw ParamError("softmax needs at least two classes");
    if (label >= c) throw LabelError("label index " + std::to_string(label) + " out of range");
    if (!logits.all_finite()) throw ParamError("non-finite logits");
    const double* x = logits.data();
    double mx = x[0];
    for (std::size_t i = 1; i < c; ++i) mx = std::max(mx, x[i]);
    Tensor grad = Tensor::zeros({c});
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        grad.data()[i] = std::exp(x[i] - mx);
        sum += grad.data()[i];
    }
    for (std::size_t i = 0; i < c; ++i) grad.data()[i] /= sum;
    const double loss = -(std::log(grad.data()[label]));
    grad.data()[label] -= 1.0;
    return {loss, std::move(grad)};
}

ShapeChain shape_chain(const NetConfig& config) {
    if (config.classes < 2) throw ConfigError("network needs at least 2 classes");
    if (config.stride < 1 || config.stride > 7) {
        throw ConfigError("stride " + std::to_string(config.stride) + " outside [1, 7]");
    }
    if (config.keep_prob <= 0.0 || config.keep_prob > 1.0) {
        throw ConfigError("keep probability must lie in (0, 1]");
    }
    if (config.conv1_kernels == 0 || config.conv2_kernels == 0 || config.fc1 == 0 ||
        config.fc2 == 0) {
        throw ConfigError("layer widths must all be positive");
    }
    ShapeChain s{};
    if (kJointCount < 3 || config.frames < 10) {
        throw ConfigError("input " + std::to_string(kJointCount) + "x" +
                          std::to_string(config.frames) + " smaller than the 3x10 conv1 kernel");
    }
    s.conv1_h = (kJointCount - 3) / 1 + 1;
    s.conv1_w = (config.frames - 10) / config.stride + 1;
    if (s.conv1_h < 2 || s.conv1_w < 2) {
        throw ConfigError("conv1 output " + std::to_string(s.conv1_h) + "x" +
                          std::to_string(s.conv1_w) + " too small for 2x2 pooling");
    }
    s.pool1_h = s.conv1_h / 2;
    s.pool1_w = s.conv1_w / 2;
    if (s.pool1_h < 5 || s.pool1_w < 5) {
        throw ConfigError("pool1 output " + std::to_string(s.pool1_h) + "x" +
                          std::to_string(s.pool1_w) + " smaller than the 5x5 conv2 kernel");
    }
    s.conv2_h = s.pool1_h - 5 + 1;
    s.conv2_w = s.pool1_w - 5 + 1;
    if (s.conv2_h < 2 || s.conv2_w < 2) {
        throw ConfigError("conv2 output " + std::to_string(s.conv2_h) + "x" +
                          std::to_string(s.conv2_w) + " too small for 2x2 pooling");
    }
    s.pool2_h = s.conv2_h / 2;
    s.pool2_w = s.conv2_w / 2;
    s.flat = s.pool2_h * s.pool2_w * config.conv2_kernels;
    return s;
}

struct Network::Cache {
    struct Sample {
        Tensor input;  // [15, frames, 4]
        Tensor z1;  // conv1 pre-activation
        Tensor p1;  // pool1 output, conv2 input
        Tensor z2;  // conv2 pre-activation
        std::vector<std::size_t> am1, am2;
    };
    std::vector<Sample> samples;
    Tensor flat;  // [N, flat]
    Tensor pre1, mask1, d1;
    Tensor pre2, mask2, d2;
};

Network::Network(const NetConfig& config, const Rng& rng) : config_(config) {
    chain_ = shape_chain(config);
    Rng r = rng;
    // Draw order is part of the format: conv1, conv2, fc1, fc2, output
    // weights, in that sequence; every bias is the constant 0.1.
    conv1_.kernels = truncated_normal(r, {config.conv1_kernels, 3, 10, kAttrCount}, 0.1, 2.0);
    conv1_.bias = Tensor::full({config.conv1_kernels}, 0.1);
    conv1_.stride_h = 1;
    conv1_.stride_w = config.stride;
    conv2_.kernels = truncated_normal(r, {config.conv2_kernels, 5, 5, config.conv1_kernels}, 0.1, 2.0);
    conv2_.bias = Tensor::full({config.conv2_kernels}, 0.1);
    fc1_.weights = truncated_normal(r, {chain_.flat, config.fc1}, 0.1, 2.0);
    fc1_.bias = Tensor::full({config.fc1}, 0.1);
    fc2_.weights = truncated_normal(r, {config.fc1, config.fc2}, 0.1, 2.0);
    fc2_.bias = Tensor::full({config.fc2}, 0.1);
    out_.weights = truncated_normal(r, {config.fc2, config.classes}, 0.1, 2.0);
    out_.bias = Tensor::full({config.classes}, 0.1);
    zero_grads();
}

Tensor Network::forward(const Tensor& batch, Rng* rng) {
    const std::vector<std::size_t> expected{batch.rank() > 0 ? batch.shape()[0] : 0, kJointCount,
                                            config_.frames, kAttrCount};
    if (batch.rank() != 4 || batch.shape() != expected) {
        throw ShapeError("batch shape " + dims(batch.shape()) + " does not match [N, " +
                         std::to_string(kJointCount) + ", " + std::to_string(config_.frames) +
                         ", " + std::to_string(kAttrCount) + "]");
    }
    const bool training = mode_ == Mode::Train;
    if (training && rng == nullptr) throw ParamError("training-mode forward needs an rng");
    const std::size_t n = batch.shape()[0];
    const std::size_t sample_size = kJointCount * config_.frames * kAttrCount;
    auto cache = training ? std::make_shared<Cache>() : nullptr;
    Tensor flat = Tensor::zeros({n, chain_.flat});
    for (std::size_t i = 0; i < n; ++i) {
        Tensor x = Tensor::zeros({kJointCount, config_.frames, kAttrCount});
        std::memcpy(x.data(), batch.data() + i * sample_size, sample_size * sizeof(double));
        Tensor z1 = conv2d_forward(x, conv1_);
        auto [p1, am1] = maxpool_forward(relu_forward(z1));
        Tensor z2 = conv2d_forward(p1, conv2_);
        auto [p2, am2] = maxpool_forward(relu_forward(z2));
        std::memcpy(flat.data() + i * chain_.flat, p2.data(), chain_.flat * sizeof(double));
        if (training) {
            cache->samples.push_back({std::move(x), std::move(z1), std::move(p1), std::move(z2),
                                      std::move(am1), std::move(am2)});
        }
    }
    Tensor pre1 = dense_forward(flat, fc1_);
    Tensor h1 = relu_forward(pre1);
    Tensor d1 = h1;
    Tensor mask1;
    if (training) {
        std::tie(d1, mask1) = dropout_forward(h1, config_.keep_prob, *rng);
    }
    Tensor pre2 = dense_forward(d1, fc2_);
    Tensor h2 = relu_forward(pre2);
    Tensor d2 = h2;
    Tensor mask2;
    if (training) {
        std::tie(d2, mask2) = dropout_forward(h2, config_.keep_prob, *rng);
    }
    Tensor logits = dense_forward(d2, out_);
    if (training) {
        cache->flat = std::move(flat);
        cache->pre1 = std::move(pre1);
        cache->mask1 = std::move(mask1);
        cache->d1 = std::move(d1);
        cache->pre2 = std::move(pre2);
        cache->mask2 = std::move(mask2);
        cache->d2 = std::move(d2);
        cache_ = std::move(cache);
    }
    return logits;
}

void Network::backward(const Tensor& grad_logits) {
    if (mode_ != Mode::Train) throw StateError("backward pass requires training mode");
    if (!cache_) throw StateError("backward pass without a cached forward pass");
    const std::size_t n = cache_->samples.size();
    if (grad_logits.shape() != std::vector<std::size_t>{n, config_.classes}) {
        throw ShapeError("grad_logits shape " + dims(grad_logits.shape()) +
                         " does not match the cached batch");
    }
    auto accumulate = [](Tensor& into, const Tensor& g) {
        for (std::size_t i = 0; i < into.size(); ++i) into.data()[i] += g.data()[i];
    };
    DenseGrads og = dense_backward(grad_logits, cache_->d2, out_);
    accumulate(out_grads_.weights, og.weights);
    accumulate(out_grads_.bias, og.bias);
    Tensor g = dropout_backward(og.input, cache_->mask2, config_.keep_prob);
    g = relu_backward(g, cache_->pre2);
    DenseGrads g2 = dense_backward(g, cache_->d1, fc2_);
    accumulate(fc2_grads_.weights, g2.weights);
    accumulate(fc2_grads_.bias, g2.bias);
    g = dropout_backward(g2.input, cache_->mask1, config_.keep_prob);
    g = relu_backward(g, cache_->pre1);
    DenseGrads g1 = dense_backward(g, cache_->flat, fc1_);
    accumulate(fc1_grads_.weights, g1.weights);
    accumulate(fc1_grads_.bias, g1.bias);
    for (std::size_t i = 0; i < n; ++i) {
        const Cache::Sample& s = cache_->samples[i];
        Tensor gp2 = Tensor::zeros({chain_.pool2_h, chain_.pool2_w, config_.conv2_kernels});
        std::memcpy(gp2.data(), g1.input.data() + i * chain_.flat, chain_.flat * sizeof(double));
        Tensor ga2 = maxpool_backward(gp2, s.am2, s.z2.shape());
        Tensor gz2 = relu_backward(ga2, s.z2);
        ConvGrads c2 = conv2d_backward(gz2, s.p1, conv2_);
        accumulate(conv2_grads_.kernels, c2.kernels);
        accumulate(conv2_grads_.bias, c2.bias);
        Tensor ga1 = maxpool_backward(c2.input, s.am1, s.z1.shape());
        Tensor gz1 = relu_backward(ga1, s.z1);
        ConvGrads c1 = conv2d_backward(gz1, s.input, conv1_);
        accumulate(conv1_grads_.kernels, c1.kernels);
        accumulate(conv1_grads_.bias, c1.bias);
    }
}

std::vector<Tensor*> Network::params() {
    return {&conv1_.kernels, &conv1_.bias, &conv2_.kernels, &conv2_.bias, &fc1_.weights,
            &fc1_.bias,      &fc2_.weights, &fc2_.bias,     &out_.weights, &out_.bias};
}

std::vector<const Tensor*> Network::grads() const {
    return {&conv1_grads_.kernels, &conv1_grads_.bias, &conv2_grads_.kernels, &conv2_grads_.bias,
            &fc1_grads_.weights,   &fc1_grads_.bias,   &fc2_grads_.weights,   &fc2_grads_.bias,
            &out_grads_.weights,   &out_grads_.bias};
}

void Network::zero_grads() {
    conv1_grads_ = {Tensor{}, Tensor::zeros(conv1_.kernels.shape()),
                    Tensor::zeros(conv1_.bias.shape())};
    conv2_grads_ = {Tensor{}, Tensor::zeros(conv2_.kernels.shape()),
                    Tensor::zeros(conv2_.bias.shape())};
    fc1_grads_ = {Tensor{}, Tensor::zeros(fc1_.weights.shape()), Tensor::zeros(fc1_.bias.shape())};
    fc2_grads_ = {Tensor{}, Tensor::zeros(fc2_.weights.shape()), Tensor::zeros(fc2_.bias.shape())};
    out_grads_ = {Tensor{}, Tensor::zeros(out_.weights.shape()), Tensor::zeros(out_.bias.shape())};
}

void Network::save(std::ostream& out) const {
    write_u64(out, config_.frames);
    write_u64(out, config_.stride);
    write_u64(out, config_.classes);
    write_u64(out, config_.conv1_kernels);
    write_u64(out, config_.conv2_kernels);
    write_u64(out, config_.fc1);
    write_u64(out, config_.fc2);
    write_f64(out, config_.keep_prob);
    for (const Tensor* p : const_cast<Network*>(this)->params()) write_tensor(out, *p);
}

Network Network::load(std::istream& in) {
    NetConfig c;
    c.frames = read_u64(in);
    c.stride = read_u64(in);
    c.classes = read_u64(in);
    c.conv1_kernels = read_u64(in);
    c.conv2_kernels = read_u64(in);
    c.fc1 = read_u64(in);
    c.fc2 = read_u64(in);
    c.keep_prob = read_f64(in);
    Network net;
    net.config_ = c;
    net.chain_ = shape_chain(c);
    net.conv1_.stride_h = 1;
    net.conv1_.stride_w = c.stride;
    const std::vector<std::vector<std::size_t>> expected{
        {c.conv1_kernels, 3, 10, kAttrCount},
        {c.conv1_kernels},
        {c.conv2_kernels, 5, 5, c.conv1_kernels},
        {c.conv2_kernels},
        {net.chain_.flat, c.fc1},
        {c.fc1},
        {c.fc1, c.fc2},
        {c.fc2},
        {c.fc2, c.classes},
        {c.classes}};
    std::vector<Tensor*> slots{&net.conv1_.kernels, &net.conv1_.bias, &net.conv2_.kernels,
                               &net.conv2_.bias,    &net.fc1_.weights, &net.fc1_.bias,
                               &net.fc2_.weights,   &net.fc2_.bias,    &net.out_.weights,
                               &net.out_.bias};
    for (std::size_t i = 0; i < slots.size(); ++i) {
        *slots[i] = read_tensor(in);
        if (slots[i]->shape() != expected[i]) {
            throw ParseError("checkpoint tensor " + std::to_string(i) + " has shape " +
                             dims(slots[i]->shape()) + ", manifest implies " + dims(expected[i]));
        }
    }
    net.zero_grads();
    return net;
}

}  // namespace actrec
