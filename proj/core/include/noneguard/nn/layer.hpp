#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "noneguard/tensor.hpp"

namespace noneguard::nn {

struct Dense {
    std::size_t in = 0;
    std::size_t out = 0;
};

struct Conv2D {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 1;
    std::size_t stride = 1;
    std::size_t padding = 0;
};

struct Flatten {};

/// Non-overlapping max pooling; stride equals the window.
struct MaxPool {
    std::size_t window = 2;
};

using LayerKind = std::variant<Dense, Conv2D, Flatten, MaxPool>;

enum class ActivationKind { None, ReLU, LeakyReLU, ELU, Tanhshrink, Softplus };

/// Elementwise nonlinearity. `parameter` is the negative slope for LeakyReLU and
/// alpha for ELU; other kinds ignore it. Every kind has its breakpoint at 0.
struct Activation {
    ActivationKind kind = ActivationKind::None;
    double parameter = 0.0;

    static Activation none() { return {}; }
    static Activation relu() { return {ActivationKind::ReLU, 0.0}; }
    static Activation leaky_relu(double slope = 0.01) { return {ActivationKind::LeakyReLU, slope}; }
    static Activation elu(double alpha = 1.0) { return {ActivationKind::ELU, alpha}; }
    static Activation tanhshrink() { return {ActivationKind::Tanhshrink, 0.0}; }
    static Activation softplus() { return {ActivationKind::Softplus, 0.0}; }

    double apply(double x) const noexcept;
    double derivative(double x) const noexcept;

    friend bool operator==(const Activation&, const Activation&) = default;
};

std::string to_string(ActivationKind kind);
/// Accepts "none", "relu", "leaky_relu", "elu", "tanhshrink", "softplus".
ActivationKind parse_activation_kind(const std::string& name);
const std::vector<ActivationKind>& all_activation_kinds();

struct LayerSpec {
    LayerKind kind;
    Activation activation;

    bool has_parameters() const noexcept {
        return std::holds_alternative<Dense>(kind) || std::holds_alternative<Conv2D>(kind);
    }
    std::string kind_name() const;
};

inline LayerSpec dense(std::size_t in, std::size_t out, Activation act = Activation::none()) {
    return {Dense{in, out}, act};
}
inline LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                        Activation act = Activation::none(), std::size_t stride = 1, std::size_t padding = 0) {
    return {Conv2D{in_channels, out_channels, kernel, stride, padding}, act};
}
inline LayerSpec flatten() { return {Flatten{}, Activation::none()}; }
inline LayerSpec max_pool(std::size_t window) { return {MaxPool{window}, Activation::none()}; }

/// Input shape of a single sample plus the ordered layer list.
struct NetworkSpec {
    Shape input_shape;
    std::vector<LayerSpec> layers;
};

/// Per-sample output shape of every layer. Throws ConfigError when the layers do not compose.
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

/// Fully connected ReLU network: `depth` hidden layers of `width` units, linear output.
NetworkSpec mlp_spec(std::size_t inputs, std::size_t width, std::size_t depth, std::size_t classes,
                     Activation hidden = Activation::relu());

/// Small two-stage conv net for 1x28x28 inputs. Convolutions are same-padded so a
/// corner trigger pixel stays inside every receptive field.
NetworkSpec small_conv_spec(std::size_t classes, Activation hidden = Activation::relu());

}  // namespace noneguard::nn
