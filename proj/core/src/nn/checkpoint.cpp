#include "noneguard/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "noneguard/error.hpp"

namespace noneguard::nn {

using nlohmann::json;

namespace {

json activation_to_json(const Activation& a) {
    return json{{"kind", to_string(a.kind)}, {"parameter", a.parameter}};
}

Activation activation_from_json(const json& j) {
    return {parse_activation_kind(j.at("kind").get<std::string>()), j.value("parameter", 0.0)};
}

json layer_to_json(const LayerSpec& l) {
    json j{{"kind", l.kind_name()}, {"activation", activation_to_json(l.activation)}};
    if (const auto* d = std::get_if<Dense>(&l.kind)) {
        j["in"] = d->in;
        j["out"] = d->out;
    } else if (const auto* c = std::get_if<Conv2D>(&l.kind)) {
        j["in_channels"] = c->in_channels;
        j["out_channels"] = c->out_channels;
        j["kernel"] = c->kernel;
        j["stride"] = c->stride;
        j["padding"] = c->padding;
    } else if (const auto* m = std::get_if<MaxPool>(&l.kind)) {
        j["window"] = m->window;
    }
    return j;
}

LayerSpec layer_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const Activation act = j.contains("activation") ? activation_from_json(j.at("activation")) : Activation::none();
    if (kind == "dense") return {Dense{j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>()}, act};
    if (kind == "conv2d") {
        return {Conv2D{j.at("in_channels").get<std::size_t>(), j.at("out_channels").get<std::size_t>(),
                       j.at("kernel").get<std::size_t>(), j.value("stride", std::size_t{1}),
                       j.value("padding", std::size_t{0})},
                act};
    }
    if (kind == "flatten") return {Flatten{}, act};
    if (kind == "maxpool") return {MaxPool{j.at("window").get<std::size_t>()}, act};
    throw ConfigError("unknown layer kind '" + kind + "'");
}

json spec_json(const NetworkSpec& spec) {
    json layers = json::array();
    for (const auto& l : spec.layers) layers.push_back(layer_to_json(l));
    return json{{"input_shape", spec.input_shape}, {"layers", layers}};
}

NetworkSpec spec_from(const json& j) {
    NetworkSpec spec;
    spec.input_shape = j.at("input_shape").get<Shape>();
    for (const auto& l : j.at("layers")) spec.layers.push_back(layer_from_json(l));
    infer_shapes(spec);
    return spec;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(const std::vector<std::uint8_t>& in, std::size_t offset, int bytes) {
    if (offset + static_cast<std::size_t>(bytes) > in.size()) throw FormatError("truncated checkpoint", in.size());
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
    return v;
}

void put_blob(std::vector<std::uint8_t>& out, const Tensor& t) {
    for (double d : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

void read_blob(const std::vector<std::uint8_t>& in, std::size_t& offset, Tensor& t) {
    for (auto& d : t.values()) {
        d = std::bit_cast<double>(get_le(in, offset, 8));
        offset += 8;
    }
}

}  // namespace

std::string spec_to_json(const NetworkSpec& spec) { return spec_json(spec).dump(); }

NetworkSpec spec_from_json(const std::string& text) {
    try {
        return spec_from(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid network spec: ") + e.what());
    }
}

std::vector<std::uint8_t> encode_checkpoint(const NetworkState& net) {
    json header{{"spec", spec_json(net.spec)},
                {"seed", net.rng_seed},
                {"learning_rate_bits", std::bit_cast<std::uint64_t>(net.optimizer.settings.learning_rate)},
                {"momentum_bits", std::bit_cast<std::uint64_t>(net.optimizer.settings.momentum)}};
    json blobs = json::array();
    for (std::size_t li = 0; li < net.params.size(); ++li) {
        if (net.params[li].weight.empty()) continue;
        blobs.push_back({{"layer", li}, {"weight", net.params[li].weight.size()}, {"bias", net.params[li].bias.size()}});
    }
    header["blobs"] = blobs;
    const std::string h = header.dump();

    std::vector<std::uint8_t> out{'N', 'G', 'C', 'K'};
    put_u32(out, kCheckpointVersion);
    put_u64(out, h.size());
    out.insert(out.end(), h.begin(), h.end());
    for (std::size_t li = 0; li < net.params.size(); ++li) {
        if (net.params[li].weight.empty()) continue;
        put_blob(out, net.params[li].weight);
        put_blob(out, net.params[li].bias);
        put_blob(out, net.optimizer.velocity[li].weight);
        put_blob(out, net.optimizer.velocity[li].bias);
    }
    return out;
}

NetworkState decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "NGCK", 4) != 0) {
        throw FormatError("not a noneguard checkpoint (bad magic)", 0);
    }
    const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
    }
    const std::uint64_t hlen = get_le(bytes, 8, 8);
    if (16 + hlen > bytes.size()) throw FormatError("truncated checkpoint header", bytes.size());
    json header;
    try {
        header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(hlen));
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid checkpoint header: ") + e.what(), 16);
    }
    OptimizerSettings opt{std::bit_cast<double>(header.at("learning_rate_bits").get<std::uint64_t>()),
                          std::bit_cast<double>(header.at("momentum_bits").get<std::uint64_t>())};
    NetworkState net = init_network(spec_from(header.at("spec")), header.at("seed").get<std::uint64_t>(), opt);
    std::size_t offset = 16 + hlen;
    for (const auto& b : header.at("blobs")) {
        const auto li = b.at("layer").get<std::size_t>();
        if (li >= net.params.size() || net.params[li].weight.size() != b.at("weight").get<std::size_t>() ||
            net.params[li].bias.size() != b.at("bias").get<std::size_t>()) {
            throw FormatError("checkpoint blob table does not match spec", 16);
        }
        read_blob(bytes, offset, net.params[li].weight);
        read_blob(bytes, offset, net.params[li].bias);
        read_blob(bytes, offset, net.optimizer.velocity[li].weight);
        read_blob(bytes, offset, net.optimizer.velocity[li].bias);
    }
    if (offset != bytes.size()) throw FormatError("trailing bytes after checkpoint blobs", offset);
    return net;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkState& net) {
    const auto bytes = encode_checkpoint(net);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing", path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing checkpoint", path.string());
}

NetworkState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint", path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace noneguard::nn
