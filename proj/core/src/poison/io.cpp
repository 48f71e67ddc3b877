#include "noneguard/poison/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "noneguard/error.hpp"

namespace noneguard::poison {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file", path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off, const std::filesystem::path& path) {
    if (off + 4 > b.size()) throw FormatError("truncated IDX header in " + path.string(), b.size());
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
           std::uint32_t{b[off + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                           static_cast<char>(v)};
    out.write(bytes, 4);
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open file for writing", path.string());
    return out;
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t limit) {
    const auto img = read_file(images);
    const auto lab = read_file(labels);

    if (const auto magic = be32(img, 0, images); magic != kIdxImageMagic) {
        throw FormatError("bad IDX image magic in " + images.string(), 0);
    }
    if (const auto magic = be32(lab, 0, labels); magic != kIdxLabelMagic) {
        throw FormatError("bad IDX label magic in " + labels.string(), 0);
    }
    const std::size_t n_img = be32(img, 4, images), rows = be32(img, 8, images), cols = be32(img, 12, images);
    const std::size_t n_lab = be32(lab, 4, labels);
    if (n_img != n_lab) {
        throw FormatError("image count " + std::to_string(n_img) + " differs from label count " +
                              std::to_string(n_lab),
                          4);
    }
    if (rows == 0 || cols == 0) throw FormatError("IDX images have a zero extent", 8);
    const std::size_t plane = rows * cols;
    if (img.size() < 16 + n_img * plane) throw FormatError("truncated IDX image data in " + images.string(), img.size());
    if (lab.size() < 8 + n_lab) throw FormatError("truncated IDX label data in " + labels.string(), lab.size());

    const std::size_t n = std::min(n_img, limit);
    LabeledDataset d;
    d.inputs.reserve(n);
    d.labels.reserve(n);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> px(plane);
        const std::uint8_t* src = img.data() + 16 + i * plane;
        for (std::size_t p = 0; p < plane; ++p) px[p] = src[p] / 255.0;
        d.inputs.emplace_back(Shape{1, rows, cols}, std::move(px));
        d.labels.push_back(lab[8 + i]);
        max_label = std::max(max_label, static_cast<int>(lab[8 + i]));
    }
    // Labels are read from the full file so a short prefix still reports every class.
    for (std::size_t i = n; i < n_lab; ++i) max_label = std::max(max_label, static_cast<int>(lab[8 + i]));
    d.poison_flags.assign(n, 0);
    d.class_count = max_label + 1;
    return d;
}

void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, const LabeledDataset& d) {
    d.validate();
    if (d.empty()) throw InputError("cannot write an empty IDX dataset");
    const Shape& s = d.sample_shape();
    if (s.size() != 3 || s[0] != 1) throw InputError("IDX export expects (1,H,W) samples");
    auto img = open_out(images, true);
    put_be32(img, kIdxImageMagic);
    put_be32(img, static_cast<std::uint32_t>(d.size()));
    put_be32(img, static_cast<std::uint32_t>(s[1]));
    put_be32(img, static_cast<std::uint32_t>(s[2]));
    std::vector<char> buf(s[1] * s[2]);
    for (const auto& x : d.inputs) {
        for (std::size_t p = 0; p < buf.size(); ++p) {
            buf[p] = static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(x[p], 0.0, 1.0) * 255.0)));
        }
        img.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    auto lab = open_out(labels, true);
    put_be32(lab, kIdxLabelMagic);
    put_be32(lab, static_cast<std::uint32_t>(d.size()));
    for (int y : d.labels) lab.put(static_cast<char>(y));
    if (!img || !lab) throw IoError("failed writing IDX files", images.string());
}

IdxPair mnist_files(const std::filesystem::path& root, bool train) {
    const std::string prefix = train ? "train" : "t10k";
    return {root / (prefix + "-images-idx3-ubyte"), root / (prefix + "-labels-idx1-ubyte")};
}

std::filesystem::path data_root(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("NONEGUARD_DATA"); env && *env) return env;
    return fallback;
}

void write_points_csv(const std::filesystem::path& path, const LabeledDataset& d) {
    d.validate();
    auto out = open_out(path, false);
    out << "x1,x2,label,flag\n";
    out.precision(17);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.inputs[i].size() != 2) throw InputError("points CSV needs 2-D samples");
        out << d.inputs[i][0] << ',' << d.inputs[i][1] << ',' << d.labels[i] << ',' << int{d.poison_flags[i]} << '\n';
    }
}

LabeledDataset read_points_csv(const std::filesystem::path& path, int class_count) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file", path.string());
    std::string line;
    std::getline(in, line);
    if (line != "x1,x2,label,flag") throw FormatError("unexpected CSV header in " + path.string(), 0);
    LabeledDataset d;
    d.class_count = class_count;
    std::size_t offset = line.size() + 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double x1, x2;
        int y, f;
        char c1, c2, c3;
        if (!(ss >> x1 >> c1 >> x2 >> c2 >> y >> c3 >> f) || c1 != ',' || c2 != ',' || c3 != ',') {
            throw FormatError("malformed CSV row in " + path.string(), offset);
        }
        d.inputs.push_back(Tensor::from_values({x1, x2}));
        d.labels.push_back(y);
        d.poison_flags.push_back(static_cast<std::uint8_t>(f != 0));
        offset += line.size() + 1;
    }
    d.validate();
    return d;
}

void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> pixels) {
    if (pixels.size() != width * height) throw InputError("PGM pixel count does not match dimensions");
    auto out = open_out(path, true);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("failed writing PGM", path.string());
}

void write_trigger_pgm(const std::filesystem::path& path, const TriggerSpec& trig) {
    trig.validate();
    if (trig.mask.rank() != 3) throw InputError("trigger visualization needs (C,H,W) triggers");
    const std::size_t h = trig.mask.extent(1), w = trig.mask.extent(2);
    std::vector<std::uint8_t> px(h * w);
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double v = trig.mask[i] * trig.pattern[i];
        px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    }
    write_pgm(path, w, h, px);
}

void write_index_list(const std::filesystem::path& path, std::span<const std::size_t> indices) {
    auto out = open_out(path, false);
    for (auto i : indices) out << i << '\n';
}

std::vector<std::size_t> read_index_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file", path.string());
    std::vector<std::size_t> out;
    std::size_t v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw FormatError("malformed index list " + path.string(), 0);
    return out;
}

}  // namespace noneguard::poison
