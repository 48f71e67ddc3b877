#include "noneguard/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "noneguard/error.hpp"
#include "noneguard/rng.hpp"

namespace noneguard::nn {

namespace {

/// Cached per-layer state needed by the backward pass.
struct LayerTrace {
    Tensor input;
    Tensor pre;                        // pre-activation, parameterized layers only
    std::vector<std::size_t> argmax;   // maxpool routing, index into the input
};

struct Trace {
    std::vector<LayerTrace> layers;
    Tensor output;
};

std::size_t batch_size_of(const NetworkState& net, const Tensor& batch) {
    const Shape& in = net.spec.input_shape;
    if (batch.rank() != in.size() + 1 || !std::equal(in.begin(), in.end(), batch.shape().begin() + 1)) {
        throw InputError("batch shape " + shape_to_string(batch.shape()) + " does not match network input (N," +
                         shape_to_string(in).substr(1));
    }
    return batch.extent(0);
}

std::size_t fan_in(const LayerKind& kind) {
    if (const auto* d = std::get_if<Dense>(&kind)) return d->in;
    const auto& c = std::get<Conv2D>(kind);
    return c.in_channels * c.kernel * c.kernel;
}

void draw_neuron(LayerParams& p, const LayerKind& kind, std::size_t neuron, std::uint64_t seed) {
    const std::size_t fan = fan_in(kind);
    const double bound = init_bound(fan);
    Rng rng(seed);
    double* w = p.weight.data() + neuron * fan;
    for (std::size_t i = 0; i < fan; ++i) w[i] = rng.uniform(-bound, bound);
    p.bias[neuron] = 0.0;
}

// Valid output range [lo, hi) along one axis such that o * stride + k - pad lies in [0, extent).
inline void valid_range(std::size_t k, std::size_t pad, std::size_t stride, std::size_t extent, std::size_t out,
                        std::size_t& lo, std::size_t& hi) {
    const std::ptrdiff_t first = static_cast<std::ptrdiff_t>(pad) - static_cast<std::ptrdiff_t>(k);
    lo = first <= 0 ? 0 : static_cast<std::size_t>((first + static_cast<std::ptrdiff_t>(stride) - 1) /
                                                   static_cast<std::ptrdiff_t>(stride));
    const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(extent) - 1 + static_cast<std::ptrdiff_t>(pad) -
                                static_cast<std::ptrdiff_t>(k);
    if (last < 0) {
        hi = lo;
        return;
    }
    hi = std::min(out, static_cast<std::size_t>(last) / stride + 1);
    if (hi < lo) hi = lo;
}

void dense_forward(const Dense& d, const LayerParams& p, const Tensor& x, Tensor& y) {
    const std::size_t n = x.extent(0);
    y = Tensor({n, d.out});
    const double* w = p.weight.data();
    const double* b = p.bias.data();
    for (std::size_t s = 0; s < n; ++s) {
        const double* xs = x.data() + s * d.in;
        double* ys = y.data() + s * d.out;
        for (std::size_t o = 0; o < d.out; ++o) {
            const double* wo = w + o * d.in;
            double acc = 0.0;
            for (std::size_t i = 0; i < d.in; ++i) acc += wo[i] * xs[i];
            ys[o] = acc + b[o];
        }
    }
}

void dense_backward(const Dense& d, const LayerParams& p, const Tensor& x, const Tensor& gy, LayerParams& g,
                    Tensor* gx) {
    const std::size_t n = x.extent(0);
    double* gw = g.weight.data();
    double* gb = g.bias.data();
    const double* w = p.weight.data();
    if (gx) *gx = Tensor(x.shape());
    for (std::size_t s = 0; s < n; ++s) {
        const double* xs = x.data() + s * d.in;
        const double* gys = gy.data() + s * d.out;
        double* gxs = gx ? gx->data() + s * d.in : nullptr;
        for (std::size_t o = 0; o < d.out; ++o) {
            const double go = gys[o];
            if (go == 0.0) continue;
            gb[o] += go;
            double* gwo = gw + o * d.in;
            for (std::size_t i = 0; i < d.in; ++i) gwo[i] += go * xs[i];
            if (gxs) {
                const double* wo = w + o * d.in;
                for (std::size_t i = 0; i < d.in; ++i) gxs[i] += go * wo[i];
            }
        }
    }
}

struct ConvGeometry {
    std::size_t n, cin, h, w, cout, ho, wo, k, stride, pad;
};

ConvGeometry conv_geometry(const Conv2D& c, const Shape& in, const Shape& out) {
    return {in[0], c.in_channels, in[2], in[3], c.out_channels, out[2], out[3], c.kernel, c.stride, c.padding};
}

void conv_forward(const Conv2D& c, const LayerParams& p, const Tensor& x, const Shape& out_sample, Tensor& y) {
    const std::size_t n = x.extent(0);
    y = Tensor({n, out_sample[0], out_sample[1], out_sample[2]});
    const ConvGeometry g = conv_geometry(c, x.shape(), y.shape());
    const std::size_t in_plane = g.h * g.w, out_plane = g.ho * g.wo;
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t oc = 0; oc < g.cout; ++oc) {
            double* yo = y.data() + (s * g.cout + oc) * out_plane;
            std::fill(yo, yo + out_plane, p.bias[oc]);
            for (std::size_t ic = 0; ic < g.cin; ++ic) {
                const double* xi = x.data() + (s * g.cin + ic) * in_plane;
                const double* wk = p.weight.data() + (oc * g.cin + ic) * g.k * g.k;
                for (std::size_t kh = 0; kh < g.k; ++kh) {
                    std::size_t oh_lo, oh_hi;
                    valid_range(kh, g.pad, g.stride, g.h, g.ho, oh_lo, oh_hi);
                    for (std::size_t kw = 0; kw < g.k; ++kw) {
                        const double wv = wk[kh * g.k + kw];
                        std::size_t ow_lo, ow_hi;
                        valid_range(kw, g.pad, g.stride, g.w, g.wo, ow_lo, ow_hi);
                        for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
                            const double* xrow = xi + (oh * g.stride + kh - g.pad) * g.w + kw - g.pad;
                            double* yrow = yo + oh * g.wo;
                            if (g.stride == 1) {
                                for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) yrow[ow] += wv * xrow[ow];
                            } else {
                                for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) yrow[ow] += wv * xrow[ow * g.stride];
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv_backward(const Conv2D& c, const LayerParams& p, const Tensor& x, const Tensor& gy, LayerParams& gp,
                   Tensor* gx) {
    const ConvGeometry g = conv_geometry(c, x.shape(), gy.shape());
    const std::size_t in_plane = g.h * g.w, out_plane = g.ho * g.wo;
    if (gx) *gx = Tensor(x.shape());
    for (std::size_t s = 0; s < g.n; ++s) {
        for (std::size_t oc = 0; oc < g.cout; ++oc) {
            const double* go = gy.data() + (s * g.cout + oc) * out_plane;
            double bias_acc = 0.0;
            for (std::size_t i = 0; i < out_plane; ++i) bias_acc += go[i];
            gp.bias[oc] += bias_acc;
            for (std::size_t ic = 0; ic < g.cin; ++ic) {
                const double* xi = x.data() + (s * g.cin + ic) * in_plane;
                double* gxi = gx ? gx->data() + (s * g.cin + ic) * in_plane : nullptr;
                const double* wk = p.weight.data() + (oc * g.cin + ic) * g.k * g.k;
                double* gwk = gp.weight.data() + (oc * g.cin + ic) * g.k * g.k;
                for (std::size_t kh = 0; kh < g.k; ++kh) {
                    std::size_t oh_lo, oh_hi;
                    valid_range(kh, g.pad, g.stride, g.h, g.ho, oh_lo, oh_hi);
                    for (std::size_t kw = 0; kw < g.k; ++kw) {
                        std::size_t ow_lo, ow_hi;
                        valid_range(kw, g.pad, g.stride, g.w, g.wo, ow_lo, ow_hi);
                        const double wv = wk[kh * g.k + kw];
                        double acc = 0.0;
                        for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
                            const std::size_t off = (oh * g.stride + kh - g.pad) * g.w + kw - g.pad;
                            const double* xrow = xi + off;
                            const double* grow = go + oh * g.wo;
                            if (g.stride == 1) {
                                for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) acc += grow[ow] * xrow[ow];
                                if (gxi) {
                                    double* gxrow = gxi + off;
                                    for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) gxrow[ow] += wv * grow[ow];
                                }
                            } else {
                                for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) acc += grow[ow] * xrow[ow * g.stride];
                                if (gxi) {
                                    double* gxrow = gxi + off;
                                    for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) gxrow[ow * g.stride] += wv * grow[ow];
                                }
                            }
                        }
                        gwk[kh * g.k + kw] += acc;
                    }
                }
            }
        }
    }
}

void maxpool_forward(const MaxPool& mp, const Tensor& x, const Shape& out_sample, Tensor& y,
                     std::vector<std::size_t>& argmax) {
    const std::size_t n = x.extent(0), ch = x.extent(1), h = x.extent(2), w = x.extent(3);
    const std::size_t ho = out_sample[1], wo = out_sample[2], win = mp.window;
    y = Tensor({n, ch, ho, wo});
    argmax.assign(y.size(), 0);
    std::size_t out_idx = 0;
    for (std::size_t plane = 0; plane < n * ch; ++plane) {
        const std::size_t base = plane * h * w;
        for (std::size_t oh = 0; oh < ho; ++oh) {
            for (std::size_t ow = 0; ow < wo; ++ow, ++out_idx) {
                std::size_t best = base + (oh * win) * w + ow * win;
                double best_v = x[best];
                for (std::size_t dh = 0; dh < win; ++dh) {
                    for (std::size_t dw = 0; dw < win; ++dw) {
                        const std::size_t idx = base + (oh * win + dh) * w + ow * win + dw;
                        if (x[idx] > best_v) {
                            best_v = x[idx];
                            best = idx;
                        }
                    }
                }
                y[out_idx] = best_v;
                argmax[out_idx] = best;
            }
        }
    }
}

void apply_activation(const Activation& act, const Tensor& pre, Tensor& out) {
    out = pre;
    if (act.kind == ActivationKind::None) return;
    for (auto& v : out.values()) v = act.apply(v);
}

Shape batched(std::size_t n, const Shape& sample) {
    Shape s{n};
    s.insert(s.end(), sample.begin(), sample.end());
    return s;
}

void check_finite(const Tensor& t, std::size_t layer, const char* what) {
    if (!t.all_finite()) throw NumericError(std::string("non-finite ") + what, layer);
}

/// Runs the network, optionally keeping what backprop needs.
Trace run(const NetworkState& net, const Tensor& batch, bool keep, bool check, ActivationRecord* record) {
    const std::size_t n = batch_size_of(net, batch);
    const auto shapes = infer_shapes(net.spec);
    Trace trace;
    if (keep) trace.layers.resize(net.spec.layers.size());
    Tensor current = batch;
    for (std::size_t li = 0; li < net.spec.layers.size(); ++li) {
        const auto& layer = net.spec.layers[li];
        const auto& params = net.params[li];
        Tensor pre, out;
        std::vector<std::size_t> argmax;
        if (const auto* d = std::get_if<Dense>(&layer.kind)) {
            dense_forward(*d, params, current, pre);
        } else if (const auto* c = std::get_if<Conv2D>(&layer.kind)) {
            conv_forward(*c, params, current, shapes[li], pre);
        } else if (const auto* mp = std::get_if<MaxPool>(&layer.kind)) {
            maxpool_forward(*mp, current, shapes[li], out, argmax);
        } else {
            out = current.reshaped(batched(n, shapes[li]));
        }
        if (layer.has_parameters()) {
            if (check) check_finite(pre, li, "pre-activation");
            if (record) {
                LayerActivations acts;
                acts.layer = li;
                acts.neurons = shapes[li][0];
                acts.samples = n;
                acts.values.resize(n * acts.neurons);
                const std::size_t plane = element_count(shapes[li]) / acts.neurons;
                for (std::size_t s = 0; s < n; ++s) {
                    for (std::size_t k = 0; k < acts.neurons; ++k) {
                        const double* v = pre.data() + (s * acts.neurons + k) * plane;
                        acts.values[s * acts.neurons + k] = *std::max_element(v, v + plane);
                    }
                }
                record->layers.push_back(std::move(acts));
            }
            apply_activation(layer.activation, pre, out);
            if (check) check_finite(out, li, "activation output");
        }
        if (keep) {
            trace.layers[li].input = std::move(current);
            trace.layers[li].pre = std::move(pre);
            trace.layers[li].argmax = std::move(argmax);
        }
        current = std::move(out);
    }
    trace.output = std::move(current);
    return trace;
}

void check_labels(std::span<const int> labels, std::size_t n, std::size_t classes) {
    if (labels.size() != n) {
        throw InputError("label count " + std::to_string(labels.size()) + " does not match batch size " +
                         std::to_string(n));
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= classes) {
            throw InputError("label " + std::to_string(y) + " outside [0," + std::to_string(classes) + ")");
        }
    }
}

/// Mean cross-entropy; writes d(loss)/d(logits) into `grad` when non-null.
double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* grad) {
    const std::size_t n = logits.extent(0), k = logits.extent(1);
    if (grad) *grad = Tensor(logits.shape());
    double total = 0.0;
    std::vector<double> p(k);
    for (std::size_t s = 0; s < n; ++s) {
        const double* z = logits.data() + s * k;
        const double zmax = *std::max_element(z, z + k);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            p[j] = std::exp(z[j] - zmax);
            sum += p[j];
        }
        const auto y = static_cast<std::size_t>(labels[s]);
        total += std::log(sum) - (z[y] - zmax);
        if (grad) {
            double* g = grad->data() + s * k;
            for (std::size_t j = 0; j < k; ++j) g[j] = (p[j] / sum - (j == y ? 1.0 : 0.0)) / static_cast<double>(n);
        }
    }
    return total / static_cast<double>(n);
}

LayerParams zeros_like(const LayerParams& p) {
    LayerParams z;
    if (!p.weight.empty()) z.weight = Tensor(p.weight.shape());
    if (!p.bias.empty()) z.bias = Tensor(p.bias.shape());
    return z;
}

}  // namespace

double init_bound(std::size_t fan) { return std::sqrt(6.0 / static_cast<double>(fan)); }

std::size_t NetworkState::class_count() const { return infer_shapes(spec).back()[0]; }

std::vector<std::size_t> NetworkState::parameterized_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (spec.layers[i].has_parameters()) out.push_back(i);
    }
    return out;
}

std::size_t NetworkState::neuron_count(std::size_t layer) const {
    if (layer >= spec.layers.size() || !spec.layers[layer].has_parameters()) {
        throw InputError("layer " + std::to_string(layer) + " is not a parameterized layer");
    }
    return params[layer].bias.size();
}

NetworkState init_network(NetworkSpec spec, std::uint64_t seed, OptimizerSettings optimizer) {
    infer_shapes(spec);
    NetworkState net;
    net.spec = std::move(spec);
    net.rng_seed = seed;
    net.optimizer.settings = optimizer;
    net.params.resize(net.spec.layers.size());
    for (std::size_t li = 0; li < net.spec.layers.size(); ++li) {
        const auto& kind = net.spec.layers[li].kind;
        auto& p = net.params[li];
        std::size_t neurons = 0;
        if (const auto* d = std::get_if<Dense>(&kind)) {
            p.weight = Tensor({d->out, d->in});
            neurons = d->out;
        } else if (const auto* c = std::get_if<Conv2D>(&kind)) {
            p.weight = Tensor({c->out_channels, c->in_channels, c->kernel, c->kernel});
            neurons = c->out_channels;
        } else {
            continue;
        }
        p.bias = Tensor({neurons});
        for (std::size_t k = 0; k < neurons; ++k) draw_neuron(p, kind, k, mix_seed(seed, li, k));
    }
    net.optimizer.velocity.reserve(net.params.size());
    for (const auto& p : net.params) net.optimizer.velocity.push_back(zeros_like(p));
    return net;
}

ForwardResult forward(const NetworkState& net, const Tensor& batch, bool record) {
    ForwardResult result;
    ActivationRecord rec;
    Trace t = run(net, batch, false, false, record ? &rec : nullptr);
    result.logits = std::move(t.output);
    if (record) result.record = std::move(rec);
    return result;
}

std::vector<int> predict(const NetworkState& net, const Tensor& batch) {
    const Tensor logits = forward(net, batch).logits;
    const std::size_t n = logits.extent(0), k = logits.extent(1);
    std::vector<int> out(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double* z = logits.data() + s * k;
        out[s] = static_cast<int>(std::max_element(z, z + k) - z);
    }
    return out;
}

double evaluate_loss(const NetworkState& net, const Tensor& batch, std::span<const int> labels) {
    const Tensor logits = forward(net, batch).logits;
    check_labels(labels, logits.extent(0), logits.extent(1));
    return softmax_cross_entropy(logits, labels, nullptr);
}

Gradients compute_gradients(const NetworkState& net, const Tensor& batch, std::span<const int> labels) {
    Trace trace = run(net, batch, true, true, nullptr);
    const std::size_t last = net.spec.layers.size() - 1;
    check_labels(labels, trace.output.extent(0), trace.output.extent(1));
    Gradients g;
    Tensor grad;
    g.loss = softmax_cross_entropy(trace.output, labels, &grad);
    if (!std::isfinite(g.loss)) throw NumericError("non-finite loss", last);
    g.params.reserve(net.params.size());
    for (const auto& p : net.params) g.params.push_back(zeros_like(p));

    for (std::size_t li = net.spec.layers.size(); li-- > 0;) {
        const auto& layer = net.spec.layers[li];
        auto& lt = trace.layers[li];
        const bool need_input_grad = li > 0;
        Tensor grad_in;
        if (layer.has_parameters()) {
            if (layer.activation.kind != ActivationKind::None) {
                for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= layer.activation.derivative(lt.pre[i]);
            }
            if (const auto* d = std::get_if<Dense>(&layer.kind)) {
                dense_backward(*d, net.params[li], lt.input, grad, g.params[li], need_input_grad ? &grad_in : nullptr);
            } else {
                conv_backward(std::get<Conv2D>(layer.kind), net.params[li], lt.input, grad, g.params[li],
                              need_input_grad ? &grad_in : nullptr);
            }
            if (!g.params[li].weight.all_finite() || !g.params[li].bias.all_finite()) {
                throw NumericError("non-finite gradient", li);
            }
        } else if (std::holds_alternative<MaxPool>(layer.kind)) {
            if (need_input_grad) {
                grad_in = Tensor(lt.input.shape());
                for (std::size_t i = 0; i < grad.size(); ++i) grad_in[lt.argmax[i]] += grad[i];
            }
        } else {
            if (need_input_grad) grad_in = grad.reshaped(lt.input.shape());
        }
        if (!need_input_grad) break;
        grad = std::move(grad_in);
    }
    return g;
}

double train_step(NetworkState& net, const Tensor& batch, std::span<const int> labels, double learning_rate) {
    Gradients g = compute_gradients(net, batch, labels);
    const double mu = net.optimizer.settings.momentum;
    for (std::size_t li = 0; li < net.params.size(); ++li) {
        auto& p = net.params[li];
        auto& v = net.optimizer.velocity[li];
        auto update = [&](Tensor& param, Tensor& vel, const Tensor& grad) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                vel[i] = mu * vel[i] + grad[i];
                param[i] -= learning_rate * vel[i];
            }
        };
        if (!p.weight.empty()) update(p.weight, v.weight, g.params[li].weight);
        if (!p.bias.empty()) update(p.bias, v.bias, g.params[li].bias);
    }
    return g.loss;
}

void reinit_neuron(NetworkState& net, std::size_t layer, std::size_t neuron, std::uint64_t seed) {
    const std::size_t neurons = net.neuron_count(layer);
    if (neuron >= neurons) {
        throw InputError("neuron " + std::to_string(neuron) + " out of range for layer " + std::to_string(layer) +
                         " with " + std::to_string(neurons) + " neurons");
    }
    const auto& kind = net.spec.layers[layer].kind;
    draw_neuron(net.params[layer], kind, neuron, mix_seed(seed, layer, neuron));
    auto& v = net.optimizer.velocity[layer];
    const std::size_t fan = fan_in(kind);
    std::fill(v.weight.data() + neuron * fan, v.weight.data() + (neuron + 1) * fan, 0.0);
    v.bias[neuron] = 0.0;
}

}  // namespace noneguard::nn
