#include "ambient/tensor.hpp"

#include "ambient/errors.hpp"

namespace ambient::nn {

Tensor batch_from_images(const std::vector<const ImageGrid*>& imgs) {
    if (imgs.empty()) throw ConfigError("batch_from_images: empty batch");
    const int h = imgs[0]->height, w = imgs[0]->width;
    Tensor t(static_cast<int>(imgs.size()), 1, h, w);
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        if (imgs[i]->width != w || imgs[i]->height != h)
            throw ConfigError("batch_from_images: dimension mismatch in batch");
        for (std::size_t j = 0; j < imgs[i]->data.size(); ++j)
            t.v[i * imgs[i]->data.size() + j] = static_cast<double>(imgs[i]->data[j]);
    }
    return t;
}

Tensor batch_from_images(const std::vector<ImageGrid>& imgs) {
    std::vector<const ImageGrid*> ptrs;
    ptrs.reserve(imgs.size());
    for (const auto& im : imgs) ptrs.push_back(&im);
    return batch_from_images(ptrs);
}

std::vector<ImageGrid> images_from_batch(const Tensor& t) {
    if (t.c != 1) throw ConfigError("images_from_batch: expected single-channel batch");
    std::vector<ImageGrid> out;
    out.reserve(t.n);
    const std::size_t plane = static_cast<std::size_t>(t.h) * t.w;
    for (int i = 0; i < t.n; ++i) {
        ImageGrid img(t.w, t.h);
        for (std::size_t j = 0; j < plane; ++j)
            img.data[j] = static_cast<float>(t.v[i * plane + j]);
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace ambient::nn
