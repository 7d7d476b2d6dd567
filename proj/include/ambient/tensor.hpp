#pragma once

#include <cstddef>
#include <vector>

#include "ambient/image.hpp"

namespace ambient::nn {

// Dense NCHW tensor, double precision. Double keeps finite-difference
// gradient checks meaningful; image data is widened on load.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_) * c_ * h_ * w_, 0.0) {}

    double& at(int i, int ci, int y, int x) {
        return v[((static_cast<size_t>(i) * c + ci) * h + y) * w + x];
    }
    double at(int i, int ci, int y, int x) const {
        return v[((static_cast<size_t>(i) * c + ci) * h + y) * w + x];
    }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }

    static Tensor zeros_like(const Tensor& o) { return Tensor(o.n, o.c, o.h, o.w); }
};

// Stack single-channel images into a [n,1,h,w] batch.
Tensor batch_from_images(const std::vector<const ImageGrid*>& imgs);
Tensor batch_from_images(const std::vector<ImageGrid>& imgs);

// Split a [n,1,h,w] batch back into images.
std::vector<ImageGrid> images_from_batch(const Tensor& t);

}  // namespace ambient::nn
