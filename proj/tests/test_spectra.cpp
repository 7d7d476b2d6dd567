#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ambient/errors.hpp"
#include "ambient/spectra.hpp"
#include "test_util.hpp"

using namespace ambient;

TEST_CASE("identical images give an all-zero spectrum") {
    Rng rng(1, 0);
    const ImageGrid img = oracle::random_image(8, 8, rng);
    const std::vector<ImageGrid> set(10, img);
    const auto sv = spectra::singular_value_spectrum(set);
    CHECK(sv.size() == 10);  // min(n, d)
    for (double v : sv) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-24));
}

TEST_CASE("rank-1 perturbation set has exactly one nonzero eigenvalue") {
    Rng rng(2, 0);
    const ImageGrid base = oracle::random_image(6, 6, rng);
    ImageGrid dir(6, 6);
    for (auto& v : dir.data) v = static_cast<float>(rng.uniform() - 0.5);

    std::vector<double> alphas;
    std::vector<ImageGrid> set;
    for (int i = 0; i < 7; ++i) {
        const double a = 2.0 * rng.uniform() - 1.0;
        alphas.push_back(a);
        ImageGrid g = base;
        for (size_t j = 0; j < g.data.size(); ++j)
            g.data[j] = static_cast<float>(base.data[j] + a * dir.data[j]);
        set.push_back(g);
    }
    const auto sv = spectra::singular_value_spectrum(set);

    // var(alpha) * ||u||^2 from the float32-quantized images actually stored
    double amean = 0;
    for (double a : alphas) amean += a;
    amean /= alphas.size();
    double avar = 0;
    for (double a : alphas) avar += (a - amean) * (a - amean);
    avar /= (alphas.size() - 1);
    double unorm2 = 0;
    for (float v : dir.data) unorm2 += static_cast<double>(v) * v;

    CHECK(sv[0] == doctest::Approx(avar * unorm2).epsilon(1e-5));
    for (size_t i = 1; i < sv.size(); ++i) CHECK(sv[i] < sv[0] * 1e-9);
}

TEST_CASE("white-noise spectrum stays inside the Marchenko-Pastur band") {
    // Oracle bound: eigenvalues of the sample covariance of n d-dim white
    // noise samples concentrate in sigma^2 * (1 +- sqrt(d/n))^2; allow a
    // finite-size slack of 2.5% on each edge.
    const int n = 10000, side = 8;
    const double sigma = 0.1;
    Rng rng(31, 0);
    std::vector<ImageGrid> set;
    set.reserve(n);
    for (int i = 0; i < n; ++i) {
        ImageGrid g(side, side);
        for (auto& v : g.data) v = static_cast<float>(rng.normal(0.0, sigma));
        set.push_back(std::move(g));
    }
    const auto sv = spectra::singular_value_spectrum(set);
    CHECK(sv.size() == 64);
    const double gamma = 64.0 / n;
    const double lo = sigma * sigma * std::pow(1.0 - std::sqrt(gamma), 2) * 0.975;
    const double hi = sigma * sigma * std::pow(1.0 + std::sqrt(gamma), 2) * 1.025;
    for (double v : sv) {
        CHECK(v >= lo);
        CHECK(v <= hi);
    }
    CHECK(std::is_sorted(sv.rbegin(), sv.rend()));
}

TEST_CASE("constant image is DC-only with power c^2 W H") {
    const double c = 0.37;
    ImageGrid img(16, 16);
    std::fill(img.data.begin(), img.data.end(), static_cast<float>(c));
    const auto rs = spectra::radial_power_spectrum({img});
    CHECK(rs.freq.size() == 9);  // 0..8
    CHECK(rs.power[0] ==
          doctest::Approx(static_cast<double>(img.data[0]) * img.data[0] * 256.0).epsilon(1e-10));
    for (size_t i = 1; i < rs.power.size(); ++i)
        CHECK(rs.power[i] == doctest::Approx(0.0).scale(rs.power[0]).epsilon(1e-12));
}

TEST_CASE("a pure cosine concentrates power in its frequency bin") {
    const int w = 32, k = 5;
    ImageGrid img(w, w);
    for (int y = 0; y < w; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = static_cast<float>(std::cos(2.0 * M_PI * k * x / w));
    const auto rs = spectra::radial_power_spectrum({img});
    size_t peak = 0;
    for (size_t i = 1; i < rs.power.size(); ++i)
        if (rs.power[i] > rs.power[peak]) peak = i;
    CHECK(peak == static_cast<size_t>(k));
    // analytic DFT: two impulses of |F| = WH/2 -> power W^2/4 each, averaged
    // over the 2 pi k cells of the annulus
    const double impulse_power = w * w / 4.0;
    double cells = 0;
    for (int v = 0; v < w; ++v)
        for (int u = 0; u < w; ++u) {
            const int vc = (v <= w / 2) ? v : v - w;
            const int uc = (u <= w / 2) ? u : u - w;
            if (std::llround(std::sqrt(double(uc) * uc + double(vc) * vc)) == k) cells += 1;
        }
    CHECK(rs.power[k] == doctest::Approx(2.0 * impulse_power / cells).epsilon(1e-3));
}

TEST_CASE("white-noise radial spectrum is flat within 10%") {
    const int n = 1000, side = 16;
    Rng rng(32, 0);
    std::vector<ImageGrid> set;
    for (int i = 0; i < n; ++i) {
        ImageGrid g(side, side);
        for (auto& v : g.data) v = static_cast<float>(rng.normal(0.0, 0.2));
        set.push_back(std::move(g));
    }
    const auto rs = spectra::radial_power_spectrum(set);
    const double expect = 0.2 * 0.2;  // E|F|^2/(WH) = sigma^2 at every frequency
    for (double p : rs.power) CHECK(std::abs(p - expect) / expect < 0.10);
}

TEST_CASE("parseval holds per image") {
    Rng rng(33, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const ImageGrid img = oracle::random_image(24, 24, rng, -1.0, 2.0);
        const auto p = spectra::dft_power(img);
        double freq_sum = 0;
        for (double v : p) freq_sum += v;
        double pix_sum = 0;
        for (float v : img.data) pix_sum += static_cast<double>(v) * v;
        CHECK(std::abs(freq_sum - pix_sum) / pix_sum < 1e-6);
    }
}

TEST_CASE("radial spectrum rejects non-square images") {
    CHECK_THROWS_AS(spectra::radial_power_spectrum({ImageGrid(8, 10)}), ConfigError);
}

TEST_CASE("metric_pdf: degenerate, uniform, and normalization cases") {
    // single repeated value -> one unit-width bin with density 1/width
    const auto h0 = spectra::metric_pdf({3.25, 3.25, 3.25}, 10);
    CHECK(h0.density.size() == 1);
    CHECK(h0.edges[1] - h0.edges[0] == doctest::Approx(1.0));
    CHECK(h0.density[0] == doctest::Approx(1.0));

    // uniform samples: density ~ 1/range per bin
    Rng rng(34, 0);
    std::vector<double> u;
    for (int i = 0; i < 20000; ++i) u.push_back(2.0 + 3.0 * rng.uniform());
    const auto h1 = spectra::metric_pdf(u, 10);
    for (double d : h1.density) CHECK(d == doctest::Approx(1.0 / 3.0).epsilon(0.06));

    // integral is exactly 1 up to rounding
    std::vector<double> vals;
    for (int i = 0; i < 501; ++i) vals.push_back(rng.normal(0.0, 2.0));
    vals.push_back(std::numeric_limits<double>::infinity());  // PSNR sentinel
    const auto h2 = spectra::metric_pdf(vals, 17);
    CHECK(h2.n_excluded == 1);
    double integral = 0;
    for (size_t i = 0; i < h2.density.size(); ++i)
        integral += h2.density[i] * (h2.edges[i + 1] - h2.edges[i]);
    CHECK(std::abs(integral - 1.0) < 1e-12);

    CHECK_THROWS_AS(spectra::metric_pdf({1.0}, 4), ConfigError);
    CHECK_THROWS_AS(spectra::metric_pdf({}, 4), ConfigError);
}
