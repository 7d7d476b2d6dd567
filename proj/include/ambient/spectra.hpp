#pragma once

#include <filesystem>
#include <vector>

#include "ambient/image.hpp"

namespace ambient::spectra {

// Eigenvalues of the empirical covariance of vectorized mean-subtracted
// images (divisor n-1), via SVD of the centered data matrix; descending,
// length min(n, d).
std::vector<double> singular_value_spectrum(const std::vector<ImageGrid>& set);

// 2-D DFT power |F(u,v)|^2 / (W*H) of one image, row-major over (v, u).
// This normalization makes the grid sum equal the pixel-domain energy.
std::vector<double> dft_power(const ImageGrid& img);

struct RadialSpectrum {
    std::vector<double> freq;   // integer radius bin centers, 0..W/2
    std::vector<double> power;  // mean power per annulus, averaged over the set
    int n_images = 0;
};

// Square images only; annuli indexed by round(sqrt(u^2+v^2)) in centered
// frequency coordinates.
RadialSpectrum radial_power_spectrum(const std::vector<ImageGrid>& set);

struct Histogram {
    std::vector<double> edges;    // n_bins + 1
    std::vector<double> density;  // n_bins; sum(density * width) == 1
    int n_excluded = 0;           // non-finite inputs (e.g. infinite PSNR)
};

// Equal-width density histogram over [min, max]. A degenerate range
// (all values equal) collapses to one unit-width bin.
Histogram metric_pdf(const std::vector<double>& values, int n_bins);

void write_spectrum_csv(const std::filesystem::path& path, const std::vector<double>& values,
                        const char* value_name);
void write_radial_csv(const std::filesystem::path& path, const RadialSpectrum& rs);
void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);

}  // namespace ambient::spectra
