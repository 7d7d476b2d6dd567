#pragma once

// Shared helpers and independent reference implementations used as test
// oracles. Everything here is deliberately naive (double loops, explicit
// formulas) and must stay independent of the library code paths it checks.

#include <cmath>
#include <functional>
#include <vector>

#include "ambient/image.hpp"
#include "ambient/rng.hpp"

namespace oracle {

using ambient::ImageGrid;

inline ImageGrid random_image(int w, int h, ambient::Rng& rng, double lo = 0.0, double hi = 1.0) {
    ImageGrid img(w, h);
    for (auto& v : img.data) v = static_cast<float>(lo + (hi - lo) * rng.uniform());
    return img;
}

// Naive per-window SSIM: evaluates every valid 11x11 window independently.
inline double ssim_naive(const ImageGrid& a, const ImageGrid& b, double data_range) {
    const int r = 5;
    std::vector<double> kern1d(11);
    double ksum = 0.0;
    for (int i = -r; i <= r; ++i) {
        kern1d[i + r] = std::exp(-0.5 * i * i / (1.5 * 1.5));
        ksum += kern1d[i + r];
    }
    for (auto& k : kern1d) k /= ksum;

    const double c1 = 0.01 * data_range * 0.01 * data_range;
    const double c2 = 0.03 * data_range * 0.03 * data_range;
    double acc = 0.0;
    int count = 0;
    for (int cy = r; cy < a.height - r; ++cy) {
        for (int cx = r; cx < a.width - r; ++cx) {
            double mu_a = 0, mu_b = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double wgt = kern1d[dy + r] * kern1d[dx + r];
                    mu_a += wgt * a.at(cx + dx, cy + dy);
                    mu_b += wgt * b.at(cx + dx, cy + dy);
                }
            double va = 0, vb = 0, cov = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double wgt = kern1d[dy + r] * kern1d[dx + r];
                    const double da = a.at(cx + dx, cy + dy) - mu_a;
                    const double db = b.at(cx + dx, cy + dy) - mu_b;
                    va += wgt * da * da;
                    vb += wgt * db * db;
                    cov += wgt * da * db;
                }
            const double num = (2 * mu_a * mu_b + c1) * (2 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2);
            acc += num / den;
            ++count;
        }
    }
    return acc / count;
}

inline double mse_naive(const ImageGrid& a, const ImageGrid& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

// Dense 2-D convolution with an explicit normalized Gaussian kernel and the
// same edge-repeating reflect padding the library declares.
inline ImageGrid blur_naive(const ImageGrid& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    const int k = 2 * r + 1;
    std::vector<double> kern(static_cast<size_t>(k) * k);
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
            kern[static_cast<size_t>(dy + r) * k + (dx + r)] = v;
            sum += v;
        }
    for (auto& v : kern) v /= sum;

    auto reflect = [](int i, int n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return i;
    };
    ImageGrid out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    acc += kern[static_cast<size_t>(dy + r) * k + (dx + r)] *
                           img.at(reflect(x + dx, img.width), reflect(y + dy, img.height));
            out.at(x, y) = static_cast<float>(acc);
        }
    return out;
}

// Standard normal CDF.
inline double phi(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// One-sample Kolmogorov-Smirnov statistic against the standard normal.
inline double ks_statistic_vs_normal(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double f = phi(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

// Central finite difference of a scalar function w.r.t. one coordinate.
inline double central_diff(const std::function<double()>& eval, double& coord, double h) {
    const double saved = coord;
    coord = saved + h;
    const double up = eval();
    coord = saved - h;
    const double down = eval();
    coord = saved;
    return (up - down) / (2.0 * h);
}

inline bool grad_close(double analytic, double numeric, double rel_tol, double abs_tol) {
    const double diff = std::abs(analytic - numeric);
    if (diff <= abs_tol) return true;
    return diff <= rel_tol * std::max(std::abs(analytic), std::abs(numeric));
}

}  // namespace oracle
