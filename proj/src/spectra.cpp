#include "ambient/spectra.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ambient/errors.hpp"

namespace ambient::spectra {

std::vector<double> singular_value_spectrum(const std::vector<ImageGrid>& set) {
    const int n = static_cast<int>(set.size());
    if (n < 2) throw ConfigError("singular_value_spectrum: need at least 2 images");
    const Eigen::Index d = static_cast<Eigen::Index>(set[0].size());
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
        if (!set[i].same_dims(set[0]))
            throw ConfigError("singular_value_spectrum: dimension mismatch in set");
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = static_cast<double>(set[i].data[j]);
    }
    x.rowwise() -= x.colwise().mean();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
    const Eigen::VectorXd sv = svd.singularValues();  // descending
    std::vector<double> out(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) out[i] = sv[i] * sv[i] / (n - 1);
    return out;
}

std::vector<double> dft_power(const ImageGrid& img) {
    const int w = img.width, h = img.height;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> freq(static_cast<size_t>(w) * h);

    // Row transforms, then column transforms.
    std::vector<double> row(w);
    std::vector<std::complex<double>> row_out(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) row[x] = static_cast<double>(img.at(x, y));
        fft.fwd(row_out, row);
        for (int x = 0; x < w; ++x) freq[static_cast<size_t>(y) * w + x] = row_out[x];
    }
    std::vector<std::complex<double>> col(h), col_out(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) col[y] = freq[static_cast<size_t>(y) * w + x];
        fft.fwd(col_out, col);
        for (int y = 0; y < h; ++y) freq[static_cast<size_t>(y) * w + x] = col_out[y];
    }

    std::vector<double> power(freq.size());
    const double inv = 1.0 / (static_cast<double>(w) * h);
    for (size_t i = 0; i < freq.size(); ++i) power[i] = std::norm(freq[i]) * inv;
    return power;
}

RadialSpectrum radial_power_spectrum(const std::vector<ImageGrid>& set) {
    if (set.empty()) throw ConfigError("radial_power_spectrum: empty set");
    const int w = set[0].width, h = set[0].height;
    if (w != h) throw ConfigError("radial_power_spectrum: images must be square");

    std::vector<double> mean_power(static_cast<size_t>(w) * h, 0.0);
    for (const auto& img : set) {
        if (!img.same_dims(set[0]))
            throw ConfigError("radial_power_spectrum: dimension mismatch in set");
        const auto p = dft_power(img);
        for (size_t i = 0; i < p.size(); ++i) mean_power[i] += p[i];
    }
    const double inv_n = 1.0 / static_cast<double>(set.size());
    for (double& v : mean_power) v *= inv_n;

    const int n_bins = w / 2 + 1;
    std::vector<double> acc(n_bins, 0.0);
    std::vector<long> cnt(n_bins, 0);
    for (int v = 0; v < h; ++v) {
        const int vc = (v <= h / 2) ? v : v - h;
        for (int u = 0; u < w; ++u) {
            const int uc = (u <= w / 2) ? u : u - w;
            const int r = static_cast<int>(std::llround(std::sqrt(static_cast<double>(uc) * uc + static_cast<double>(vc) * vc)));
            if (r >= n_bins) continue;  // corner frequencies beyond Nyquist
            acc[r] += mean_power[static_cast<size_t>(v) * w + u];
            ++cnt[r];
        }
    }
    RadialSpectrum rs;
    rs.n_images = static_cast<int>(set.size());
    for (int r = 0; r < n_bins; ++r) {
        rs.freq.push_back(static_cast<double>(r));
        rs.power.push_back(cnt[r] ? acc[r] / static_cast<double>(cnt[r]) : 0.0);
    }
    return rs;
}

Histogram metric_pdf(const std::vector<double>& values, int n_bins) {
    if (n_bins < 1) throw ConfigError("metric_pdf: n_bins must be >= 1");
    std::vector<double> finite;
    int excluded = 0;
    for (double v : values) {
        if (std::isfinite(v))
            finite.push_back(v);
        else
            ++excluded;
    }
    if (finite.size() < 2) throw ConfigError("metric_pdf: need at least 2 finite values");

    double lo = finite[0], hi = finite[0];
    for (double v : finite) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    Histogram hist;
    hist.n_excluded = excluded;
    if (hi == lo) {
        hist.edges = {lo - 0.5, lo + 0.5};
        hist.density = {1.0};
        return hist;
    }
    const double width = (hi - lo) / n_bins;
    hist.edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) hist.edges[i] = lo + width * i;
    hist.edges[n_bins] = hi;
    std::vector<long> counts(n_bins, 0);
    for (double v : finite) {
        int b = static_cast<int>((v - lo) / width);
        if (b >= n_bins) b = n_bins - 1;  // right edge belongs to the last bin
        ++counts[b];
    }
    const double total = static_cast<double>(finite.size());
    hist.density.resize(n_bins);
    for (int i = 0; i < n_bins; ++i) hist.density[i] = counts[i] / (total * width);
    return hist;
}

void write_spectrum_csv(const std::filesystem::path& path, const std::vector<double>& values,
                        const char* value_name) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("write_spectrum_csv: cannot open " + path.string());
    f << "index," << value_name << "\n";
    char row[64];
    for (size_t i = 0; i < values.size(); ++i) {
        std::snprintf(row, sizeof(row), "%zu,%.17g", i, values[i]);
        f << row << "\n";
    }
}

void write_radial_csv(const std::filesystem::path& path, const RadialSpectrum& rs) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("write_radial_csv: cannot open " + path.string());
    f << "frequency,mean_power\n";
    char row[64];
    for (size_t i = 0; i < rs.freq.size(); ++i) {
        std::snprintf(row, sizeof(row), "%.17g,%.17g", rs.freq[i], rs.power[i]);
        f << row << "\n";
    }
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("write_histogram_csv: cannot open " + path.string());
    f << "bin_lo,bin_hi,density\n";
    char row[96];
    for (size_t i = 0; i < h.density.size(); ++i) {
        std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g", h.edges[i], h.edges[i + 1],
                      h.density[i]);
        f << row << "\n";
    }
}

}  // namespace ambient::spectra
