#include "ambient/degradation.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <utility>

#include "ambient/errors.hpp"

namespace ambient::degrade {

using nlohmann::json;

DegradationOp DegradationOp::identity() {
    return DegradationOp{};
}

DegradationOp DegradationOp::additive_gaussian(double mean, double std) {
    DegradationOp op;
    op.kind = OpKind::AdditiveGaussian;
    op.mean = mean;
    op.std = std;
    return op;
}

DegradationOp DegradationOp::gaussian_blur(double sigma) {
    DegradationOp op;
    op.kind = OpKind::GaussianBlur;
    op.sigma = sigma;
    return op;
}

DegradationOp DegradationOp::compose(std::vector<DegradationOp> ops) {
    DegradationOp op;
    op.kind = OpKind::Compose;
    op.ops = std::move(ops);
    return op;
}

namespace {

int tree_depth(const DegradationOp& op) {
    if (op.kind != OpKind::Compose) return 1;
    int d = 0;
    for (const auto& c : op.ops) d = std::max(d, tree_depth(c));
    return d + 1;
}

}  // namespace

void validate(const DegradationOp& op) {
    switch (op.kind) {
        case OpKind::Identity:
            break;
        case OpKind::AdditiveGaussian:
            if (!(op.std >= 0.0) || !std::isfinite(op.std) || !std::isfinite(op.mean))
                throw ConfigError("degradation: gauss std must be finite and >= 0");
            break;
        case OpKind::GaussianBlur:
            if (!(op.sigma >= 0.0) || !std::isfinite(op.sigma))
                throw ConfigError("degradation: blur sigma must be finite and >= 0");
            break;
        case OpKind::Compose:
            if (op.ops.empty()) throw ConfigError("degradation: compose list must be non-empty");
            for (const auto& c : op.ops) validate(c);
            break;
    }
    if (tree_depth(op) > 8) throw ConfigError("degradation: tree depth exceeds 8");
}

json to_json(const DegradationOp& op) {
    switch (op.kind) {
        case OpKind::Identity:
            return json{{"identity", json::object()}};
        case OpKind::AdditiveGaussian:
            return json{{"gauss", {{"mean", op.mean}, {"std", op.std}}}};
        case OpKind::GaussianBlur:
            return json{{"blur", {{"sigma", op.sigma}}}};
        case OpKind::Compose: {
            json arr = json::array();
            for (const auto& c : op.ops) arr.push_back(to_json(c));
            return json{{"compose", arr}};
        }
    }
    throw ConfigError("degradation: unknown op kind");
}

DegradationOp from_json(const json& j) {
    if (!j.is_object() || j.size() != 1)
        throw ConfigError("degradation: op node must be a single-key object");
    const auto it = j.begin();
    const std::string& key = it.key();
    const json& body = it.value();
    DegradationOp op;
    if (key == "identity") {
        op.kind = OpKind::Identity;
    } else if (key == "gauss") {
        op.kind = OpKind::AdditiveGaussian;
        op.mean = body.at("mean").get<double>();
        op.std = body.at("std").get<double>();
        if (body.size() != 2) throw ConfigError("degradation: gauss takes exactly {mean, std}");
    } else if (key == "blur") {
        op.kind = OpKind::GaussianBlur;
        op.sigma = body.at("sigma").get<double>();
        if (body.size() != 1) throw ConfigError("degradation: blur takes exactly {sigma}");
    } else if (key == "compose") {
        op.kind = OpKind::Compose;
        if (!body.is_array()) throw ConfigError("degradation: compose body must be an array");
        for (const auto& c : body) op.ops.push_back(from_json(c));
    } else {
        throw ConfigError("degradation: unknown op '" + key + "'");
    }
    validate(op);
    return op;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma <= 0.0) return {1.0};
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

ImageGrid blur(const ImageGrid& img, double sigma) {
    if (sigma <= 0.0) return img;
    const auto k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    const int w = img.width, h = img.height;

    std::vector<double> tmp(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d)
                acc += k[d + radius] * img.at(reflect_index(x + d, w), y);
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    }
    ImageGrid out(w, h);
    out.range_lo = img.range_lo;
    out.range_hi = img.range_hi;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d)
                acc += k[d + radius] * tmp[static_cast<size_t>(reflect_index(y + d, h)) * w + x];
            out.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

ImageGrid apply(const DegradationOp& op, const ImageGrid& img, Rng& rng) {
    check_valid(img, "degrade::apply input");
    switch (op.kind) {
        case OpKind::Identity:
            return img;
        case OpKind::AdditiveGaussian: {
            ImageGrid out = img;
            if (op.std > 0.0 || op.mean != 0.0) {
                for (float& v : out.data)
                    v = static_cast<float>(static_cast<double>(v) + rng.normal(op.mean, op.std));
            }
            return out;
        }
        case OpKind::GaussianBlur:
            return blur(img, op.sigma);
        case OpKind::Compose: {
            ImageGrid cur = img;
            for (const auto& c : op.ops) cur = apply(c, cur, rng);
            return cur;
        }
    }
    throw ConfigError("degradation: unknown op kind");
}

std::vector<ImageGrid> apply_batch(const DegradationOp& op, const std::vector<ImageGrid>& imgs,
                                   const Rng& rng, std::size_t first_index) {
    std::vector<ImageGrid> out;
    out.reserve(imgs.size());
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        Rng item_rng(rng.seed(), rng.stream() ^ static_cast<std::uint64_t>(first_index + i));
        out.push_back(apply(op, imgs[i], item_rng));
    }
    return out;
}

}  // namespace ambient::degrade
