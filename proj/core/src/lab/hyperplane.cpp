#include "noneguard/lab/hyperplane.hpp"

#include <algorithm>

#include "noneguard/error.hpp"
#include "noneguard/harness/metrics.hpp"

namespace noneguard::lab {

bool Hyperplane::vacuous() const {
    return std::all_of(mask_diag.begin(), mask_diag.end(), [](double a) { return a == 0.0; });
}

Hyperplane hyperplane_from_trigger(const poison::TriggerSpec& trig, std::vector<std::string>* warnings) {
    if (!trig.is_fixed()) throw UnsupportedError("a hyperplane needs a fixed trigger placement");
    trig.validate();
    Hyperplane h;
    h.shape = trig.mask.shape();
    h.mask_diag.assign(trig.mask.values().begin(), trig.mask.values().end());
    h.offset.resize(h.mask_diag.size());
    for (std::size_t i = 0; i < h.offset.size(); ++i) h.offset[i] = h.mask_diag[i] * trig.pattern[i];
    if (warnings && h.vacuous()) warnings->push_back("trigger mask is empty; the hyperplane is the whole input space");
    return h;
}

namespace {

void check_shape(const Hyperplane& h, const Tensor& x) {
    if (x.size() != h.dimension()) {
        throw InputError("input " + shape_to_string(x.shape()) + " does not match hyperplane " +
                         shape_to_string(h.shape));
    }
}

}  // namespace

std::vector<double> residual(const Hyperplane& h, const Tensor& x) {
    check_shape(h, x);
    std::vector<double> r(h.dimension());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = h.mask_diag[i] * x[i] - h.offset[i];
    return r;
}

Tensor project(const Hyperplane& h, const Tensor& x) {
    check_shape(h, x);
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (h.mask_diag[i] != 0.0) out[i] = h.offset[i];
    }
    return out;
}

double trojan_region_coverage(const nn::NetworkState& net, const Hyperplane& h, const poison::LabeledDataset& base,
                              int target) {
    if (base.empty()) throw InputError("coverage of an empty base set");
    poison::LabeledDataset projected;
    projected.class_count = base.class_count;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (base.labels[i] == target) continue;
        projected.inputs.push_back(project(h, base.inputs[i]));
        projected.labels.push_back(base.labels[i]);
        projected.poison_flags.push_back(0);
    }
    if (projected.empty()) throw InputError("every base sample already carries the target label");
    const auto pred = harness::predict_dataset(net, projected);
    const auto hits = std::count(pred.begin(), pred.end(), target);
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace noneguard::lab
