#include "ambient/image.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "ambient/errors.hpp"

namespace ambient {

void check_valid(const ImageGrid& img, const char* what) {
    if (img.width <= 0 || img.height <= 0)
        throw ConfigError(std::string(what) + ": non-positive dimensions");
    if (img.data.size() != static_cast<size_t>(img.width) * img.height)
        throw ConfigError(std::string(what) + ": data length != width*height");
    for (float v : img.data) {
        if (!std::isfinite(v))
            throw ConfigError(std::string(what) + ": non-finite pixel value");
    }
}

void require_same_dims(const ImageGrid& a, const ImageGrid& b, const char* what) {
    if (!a.same_dims(b))
        throw ConfigError(std::string(what) + ": dimension mismatch");
}

std::pair<float, float> min_max(const ImageGrid& img) {
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (float v : img.data) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return {lo, hi};
}

double mean_value(const ImageGrid& img) {
    double s = 0.0;
    for (float v : img.data) s += v;
    return img.data.empty() ? 0.0 : s / static_cast<double>(img.data.size());
}

ImageGrid center_crop(const ImageGrid& img, int cw, int ch) {
    if (cw > img.width || ch > img.height)
        throw ConfigError("center_crop: crop larger than image");
    const int x0 = (img.width - cw) / 2;
    const int y0 = (img.height - ch) / 2;
    ImageGrid out(cw, ch);
    out.range_lo = img.range_lo;
    out.range_hi = img.range_hi;
    for (int y = 0; y < ch; ++y)
        std::memcpy(&out.data[static_cast<size_t>(y) * cw],
                    &img.data[static_cast<size_t>(y0 + y) * img.width + x0],
                    sizeof(float) * cw);
    return out;
}

bool bit_equal(const ImageGrid& a, const ImageGrid& b) {
    if (!a.same_dims(b)) return false;
    return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

}  // namespace ambient
