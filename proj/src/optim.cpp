#include "actrec/optim.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "actrec/common.hpp"

namespace actrec {

Adam::Adam(AdamConfig config) : config_(config) {
    if (config_.learning_rate <= 0.0) throw ParamError("learning rate must be positive");
    if (config_.beta1 < 0.0 || config_.beta1 >= 1.0) throw ParamError("beta1 must lie in [0, 1)");
    if (config_.beta2 < 0.0 || config_.beta2 >= 1.0) throw ParamError("beta2 must lie in [0, 1)");
    if (config_.epsilon <= 0.0) throw ParamError("epsilon must be positive");
}

void Adam::step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size()) {
        throw ParamError("parameter and gradient counts differ");
    }
    if (params.empty()) throw ParamError("optimizer step with no parameters");
    const bool bound = !m_.empty();
    if (bound && params.size() != m_.size()) {
        throw StateError("parameter count changed between optimizer steps");
    }
    // Validate everything before touching t_/m_/v_ (including the lazy
    // moment binding) so a rejected step leaves the optimizer exactly as it
    // was.
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (bound && params[i]->shape() != m_[i].shape()) {
            throw StateError("parameter shape changed between optimizer steps");
        }
        if (grads[i]->shape() != params[i]->shape()) {
            throw ShapeError("gradient shape does not match its parameter");
        }
        if (!grads[i]->all_finite()) {
            throw OptimError("non-finite gradient in parameter " + std::to_string(i));
        }
    }
    if (!bound) {
        for (const Tensor* p : params) {
            m_.push_back(Tensor::zeros(p->shape()));
            v_.push_back(Tensor::zeros(p->shape()));
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* theta = params[i]->data();
        const double* g = grads[i]->data();
        double* m = m_[i].data();
        double* v = v_[i].data();
        for (std::size_t k = 0; k < params[i]->size(); ++k) {
            m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
            v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            theta[k] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

void Adam::save(std::ostream& out) const {
    write_f64(out, config_.learning_rate);
    write_f64(out, config_.beta1);
    write_f64(out, config_.beta2);
    write_f64(out, config_.epsilon);
    write_u64(out, t_);
    write_u32(out, static_cast<std::uint32_t>(m_.size()));
    for (std::size_t i = 0; i < m_.size(); ++i) {
        write_tensor(out, m_[i]);
        write_tensor(out, v_[i]);
    }
}

void Adam::load(std::istream& in) {
    AdamConfig c;
    c.learning_rate = read_f64(in);
    c.beta1 = read_f64(in);
    c.beta2 = read_f64(in);
    c.epsilon = read_f64(in);
    Adam fresh(c);
    fresh.t_ = read_u64(in);
    const std::uint32_t n = read_u32(in);
    for (std::uint32_t i = 0; i < n; ++i) {
        fresh.m_.push_back(read_tensor(in));
        fresh.v_.push_back(read_tensor(in));
        if (fresh.m_.back().shape() != fresh.v_.back().shape()) {
            throw ParseError("optimizer state has mismatched moment shapes");
        }
    }
    *this = std::move(fresh);
}

}  // namespace actrec
