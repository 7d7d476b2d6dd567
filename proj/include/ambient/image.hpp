#pragma once

#include <cstddef>
#include <vector>

namespace ambient {

// Row-major 2-D scalar field. Pixel storage is float32 so that on-disk
// round-trips and cross-module handoffs are bit-exact; numerical kernels
// promote to double internally.
struct ImageGrid {
    int width = 0;
    int height = 0;
    std::vector<float> data;      // height rows of width values
    float range_lo = 0.0f;        // declared value range (not enforced on
    float range_hi = 1.0f;        // measured grids; noise is never clipped)

    ImageGrid() = default;
    ImageGrid(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0.0f) {}

    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }

    bool same_dims(const ImageGrid& o) const { return width == o.width && height == o.height; }
};

// Throws ConfigError when dims are inconsistent or any value is non-finite.
void check_valid(const ImageGrid& img, const char* what);

void require_same_dims(const ImageGrid& a, const ImageGrid& b, const char* what);

std::pair<float, float> min_max(const ImageGrid& img);

double mean_value(const ImageGrid& img);

// Center crop of size (cw, ch); throws if the crop does not fit.
ImageGrid center_crop(const ImageGrid& img, int cw, int ch);

bool bit_equal(const ImageGrid& a, const ImageGrid& b);

}  // namespace ambient
