#include "noneguard/nn/layer.hpp"

#include <cmath>

#include "noneguard/error.hpp"

namespace noneguard::nn {

double Activation::apply(double x) const noexcept {
    switch (kind) {
        case ActivationKind::None:
            return x;
        case ActivationKind::ReLU:
            return x > 0.0 ? x : 0.0;
        case ActivationKind::LeakyReLU:
            return x > 0.0 ? x : parameter * x;
        case ActivationKind::ELU:
            return x > 0.0 ? x : parameter * std::expm1(x);
        case ActivationKind::Tanhshrink:
            return x - std::tanh(x);
        case ActivationKind::Softplus:
            // log(1 + e^x) without overflow
            return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    return x;
}

double Activation::derivative(double x) const noexcept {
    switch (kind) {
        case ActivationKind::None:
            return 1.0;
        case ActivationKind::ReLU:
            return x > 0.0 ? 1.0 : 0.0;
        case ActivationKind::LeakyReLU:
            return x > 0.0 ? 1.0 : parameter;
        case ActivationKind::ELU:
            return x > 0.0 ? 1.0 : parameter * std::exp(x);
        case ActivationKind::Tanhshrink: {
            const double t = std::tanh(x);
            return t * t;
        }
        case ActivationKind::Softplus:
            return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return 1.0;
}

std::string to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::None:
            return "none";
        case ActivationKind::ReLU:
            return "relu";
        case ActivationKind::LeakyReLU:
            return "leaky_relu";
        case ActivationKind::ELU:
            return "elu";
        case ActivationKind::Tanhshrink:
            return "tanhshrink";
        case ActivationKind::Softplus:
            return "softplus";
    }
    return "none";
}

ActivationKind parse_activation_kind(const std::string& name) {
    for (auto k : all_activation_kinds()) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown activation '" + name + "'");
}

const std::vector<ActivationKind>& all_activation_kinds() {
    static const std::vector<ActivationKind> kinds{ActivationKind::None,          ActivationKind::ReLU,
                                                   ActivationKind::LeakyReLU,     ActivationKind::ELU,
                                                   ActivationKind::Tanhshrink,    ActivationKind::Softplus};
    return kinds;
}

std::string LayerSpec::kind_name() const {
    struct Namer {
        std::string operator()(const Dense&) const { return "dense"; }
        std::string operator()(const Conv2D&) const { return "conv2d"; }
        std::string operator()(const Flatten&) const { return "flatten"; }
        std::string operator()(const MaxPool&) const { return "maxpool"; }
    };
    return std::visit(Namer{}, kind);
}

namespace {

struct ShapeStep {
    std::size_t index;
    const Shape& in;

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("layer " + std::to_string(index) + ": " + why + " (input shape " + shape_to_string(in) +
                          ")");
    }

    Shape operator()(const Dense& d) const {
        if (d.in == 0 || d.out == 0) fail("dense extents must be positive");
        if (in.size() != 1 || in[0] != d.in) fail("dense expects input of extent " + std::to_string(d.in));
        return {d.out};
    }
    Shape operator()(const Conv2D& c) const {
        if (c.in_channels == 0 || c.out_channels == 0 || c.kernel == 0 || c.stride == 0) {
            fail("conv2d extents must be positive");
        }
        if (in.size() != 3 || in[0] != c.in_channels) {
            fail("conv2d expects (" + std::to_string(c.in_channels) + ",H,W) input");
        }
        const std::size_t h = in[1] + 2 * c.padding, w = in[2] + 2 * c.padding;
        if (h < c.kernel || w < c.kernel) fail("conv2d kernel larger than padded input");
        return {c.out_channels, (h - c.kernel) / c.stride + 1, (w - c.kernel) / c.stride + 1};
    }
    Shape operator()(const Flatten&) const { return {element_count(in)}; }
    Shape operator()(const MaxPool& p) const {
        if (p.window == 0) fail("maxpool window must be positive");
        if (in.size() != 3 || in[1] < p.window || in[2] < p.window) fail("maxpool expects (C,H,W) input >= window");
        return {in[0], in[1] / p.window, in[2] / p.window};
    }
};

}  // namespace

std::vector<Shape> infer_shapes(const NetworkSpec& spec) {
    if (spec.layers.empty()) throw ConfigError("network has no layers");
    if (spec.input_shape.empty()) throw ConfigError("network input shape is empty");
    for (auto e : spec.input_shape) {
        if (e == 0) throw ConfigError("network input extents must be positive");
    }
    std::vector<Shape> shapes;
    shapes.reserve(spec.layers.size());
    const Shape* current = &spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& layer = spec.layers[i];
        if (!layer.has_parameters() && layer.activation.kind != ActivationKind::None) {
            throw ConfigError("layer " + std::to_string(i) + ": " + layer.kind_name() +
                              " layers cannot carry an activation");
        }
        shapes.push_back(std::visit(ShapeStep{i, *current}, layer.kind));
        current = &shapes.back();
    }
    if (shapes.back().size() != 1) throw ConfigError("network output must be a vector of class logits");
    return shapes;
}

NetworkSpec mlp_spec(std::size_t inputs, std::size_t width, std::size_t depth, std::size_t classes,
                     Activation hidden) {
    NetworkSpec spec{{inputs}, {}};
    std::size_t prev = inputs;
    for (std::size_t i = 0; i < depth; ++i) {
        spec.layers.push_back(dense(prev, width, hidden));
        prev = width;
    }
    spec.layers.push_back(dense(prev, classes));
    return spec;
}

NetworkSpec small_conv_spec(std::size_t classes, Activation hidden) {
    NetworkSpec spec{{1, 28, 28}, {}};
    spec.layers = {
        conv2d(1, 8, 5, hidden, 1, 2),   // 8x28x28
        max_pool(2),                     // 8x14x14
        conv2d(8, 16, 3, hidden, 1, 1),  // 16x14x14
        max_pool(2),                     // 16x7x7
        flatten(),
        dense(784, 64, hidden),
        dense(64, classes),
    };
    return spec;
}

}  // namespace noneguard::nn
