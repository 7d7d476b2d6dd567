#include "ambient/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>

#include "ambient/degradation.hpp"
#include "ambient/errors.hpp"
#include "ambient/rng.hpp"

namespace ambient::metrics {

using nlohmann::json;

namespace {

constexpr int kSsimRadius = 5;  // 11x11 window
constexpr double kSsimSigma = 1.5;

// Valid-mode separable Gaussian filtering of an h x w double field.
std::vector<double> filter_valid(const std::vector<double>& in, int h, int w,
                                 const std::vector<double>& kern) {
    const int r = static_cast<int>(kern.size() / 2);
    const int ow = w - 2 * r;
    const int oh = h - 2 * r;
    std::vector<double> rows(static_cast<size_t>(h) * ow);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int d = 0; d < 2 * r + 1; ++d) acc += kern[d] * in[static_cast<size_t>(y) * w + x + d];
            rows[static_cast<size_t>(y) * ow + x] = acc;
        }
    std::vector<double> out(static_cast<size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int d = 0; d < 2 * r + 1; ++d) acc += kern[d] * rows[static_cast<size_t>(y + d) * ow + x];
            out[static_cast<size_t>(y) * ow + x] = acc;
        }
    return out;
}

std::vector<double> widen(const ImageGrid& img) {
    std::vector<double> out(img.data.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(img.data[i]);
    return out;
}

double mse(const ImageGrid& a, const ImageGrid& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

}  // namespace

double ssim(const ImageGrid& a, const ImageGrid& b, double data_range) {
    require_same_dims(a, b, "ssim");
    if (!(data_range > 0.0)) throw ConfigError("ssim: data_range must be > 0");
    if (a.width < 2 * kSsimRadius + 1 || a.height < 2 * kSsimRadius + 1)
        throw ConfigError("ssim: image smaller than the 11x11 window");

    const auto kern = degrade::gaussian_kernel(kSsimSigma);  // radius ceil(3*1.5) = 5
    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);

    const auto xa = widen(a);
    const auto xb = widen(b);
    const int h = a.height, w = a.width;
    std::vector<double> aa(xa.size()), bb(xa.size()), ab(xa.size());
    for (size_t i = 0; i < xa.size(); ++i) {
        aa[i] = xa[i] * xa[i];
        bb[i] = xb[i] * xb[i];
        ab[i] = xa[i] * xb[i];
    }
    const auto mu_a = filter_valid(xa, h, w, kern);
    const auto mu_b = filter_valid(xb, h, w, kern);
    const auto m_aa = filter_valid(aa, h, w, kern);
    const auto m_bb = filter_valid(bb, h, w, kern);
    const auto m_ab = filter_valid(ab, h, w, kern);

    double acc = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
        const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
        acc += num / den;
    }
    return acc / static_cast<double>(mu_a.size());
}

double rmse(const ImageGrid& a, const ImageGrid& b) {
    require_same_dims(a, b, "rmse");
    return std::sqrt(mse(a, b));
}

double psnr(const ImageGrid& a, const ImageGrid& b, double data_range) {
    require_same_dims(a, b, "psnr");
    if (!(data_range > 0.0)) throw ConfigError("psnr: data_range must be > 0");
    const double r = rmse(a, b);
    if (r == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(data_range) - 20.0 * std::log10(r);
}

// ---------------------------------------------------------------------------
// Embeddings

namespace {

// Exact box (area-average) resample to tw x th.
std::vector<double> box_resample(const ImageGrid& img, int tw, int th) {
    std::vector<double> out(static_cast<size_t>(tw) * th, 0.0);
    const double sx = static_cast<double>(img.width) / tw;
    const double sy = static_cast<double>(img.height) / th;
    for (int oy = 0; oy < th; ++oy) {
        const double y0 = oy * sy, y1 = (oy + 1) * sy;
        for (int ox = 0; ox < tw; ++ox) {
            const double x0 = ox * sx, x1 = (ox + 1) * sx;
            double acc = 0.0;
            for (int y = static_cast<int>(y0); y < img.height && y < y1; ++y) {
                const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
                if (wy <= 0.0) continue;
                for (int x = static_cast<int>(x0); x < img.width && x < x1; ++x) {
                    const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
                    if (wx <= 0.0) continue;
                    acc += wx * wy * static_cast<double>(img.at(x, y));
                }
            }
            out[static_cast<size_t>(oy) * tw + ox] = acc / (sx * sy);
        }
    }
    return out;
}

class Pixels16 final : public FeatureEmbedding {
  public:
    std::string name() const override { return "pixels16"; }
    Eigen::VectorXd embed(const ImageGrid& img) const override {
        const auto px = box_resample(img, 16, 16);
        return Eigen::Map<const Eigen::VectorXd>(px.data(), static_cast<Eigen::Index>(px.size()));
    }
};

class RandProj64 final : public FeatureEmbedding {
  public:
    std::string name() const override { return "randproj64"; }
    Eigen::VectorXd embed(const ImageGrid& img) const override {
        const int d_in = img.width * img.height;
        const Eigen::MatrixXd& r = projection(d_in);
        Eigen::VectorXd x(d_in);
        for (int i = 0; i < d_in; ++i) x[i] = static_cast<double>(img.data[i]);
        return r * x;
    }

  private:
    static constexpr int kDim = 64;
    mutable std::map<int, Eigen::MatrixXd> cache_;

    const Eigen::MatrixXd& projection(int d_in) const {
        auto it = cache_.find(d_in);
        if (it != cache_.end()) return it->second;
        // Fixed seed; entries N(0, 1/kDim) in row-major draw order.
        Rng rng(0x52503634 /* "RP64" */, static_cast<std::uint64_t>(d_in));
        Eigen::MatrixXd r(kDim, d_in);
        const double scale = 1.0 / std::sqrt(static_cast<double>(kDim));
        for (int i = 0; i < kDim; ++i)
            for (int j = 0; j < d_in; ++j) r(i, j) = rng.normal() * scale;
        return cache_.emplace(d_in, std::move(r)).first->second;
    }
};

}  // namespace

std::unique_ptr<FeatureEmbedding> make_embedding(const std::string& name) {
    if (name == "pixels16") return std::make_unique<Pixels16>();
    if (name == "randproj64") return std::make_unique<RandProj64>();
    throw ConfigError("unknown embedding '" + name + "' (expected pixels16 or randproj64)");
}

namespace {

void fit_moments(const std::vector<ImageGrid>& set, const FeatureEmbedding& embed,
                 Eigen::VectorXd& mu, Eigen::MatrixXd& cov) {
    const int n = static_cast<int>(set.size());
    if (n < 2) throw ConfigError("frechet_distance: need at least 2 images per set");
    Eigen::VectorXd first = embed.embed(set[0]);
    const Eigen::Index d = first.size();
    Eigen::MatrixXd feats(n, d);
    feats.row(0) = first;
    for (int i = 1; i < n; ++i) {
        Eigen::VectorXd f = embed.embed(set[i]);
        if (f.size() != d) throw ConfigError("frechet_distance: inconsistent embedding dims");
        feats.row(i) = f;
    }
    mu = feats.colwise().mean();
    feats.rowwise() -= mu.transpose();
    cov = (feats.transpose() * feats) / static_cast<double>(n - 1);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw DivergenceError("frechet_distance: eigensolver failed");
    Eigen::VectorXd lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = lam[i] > 0.0 ? std::sqrt(lam[i]) : 0.0;
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const std::vector<ImageGrid>& set_a, const std::vector<ImageGrid>& set_b,
                        const FeatureEmbedding& embed) {
    Eigen::VectorXd mu_a, mu_b;
    Eigen::MatrixXd cov_a, cov_b;
    fit_moments(set_a, embed, mu_a, cov_a);
    fit_moments(set_b, embed, mu_b, cov_b);
    if (mu_a.size() != mu_b.size()) throw ConfigError("frechet_distance: embedding dim mismatch");

    const Eigen::MatrixXd s = psd_sqrt(cov_a);
    Eigen::MatrixXd inner = s * cov_b * s;
    inner = 0.5 * (inner + inner.transpose());  // enforce symmetry before eig

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner);
    if (es.info() != Eigen::Success) throw DivergenceError("frechet_distance: sqrt eigensolver failed");
    double tr_cross = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()[i];
        if (lam < -1e-8)
            throw DivergenceError("frechet_distance: significantly negative eigenvalue in cross term");
        tr_cross += lam > 0.0 ? std::sqrt(lam) : 0.0;
    }
    const double mean_term = (mu_a - mu_b).squaredNorm();
    return mean_term + cov_a.trace() + cov_b.trace() - 2.0 * tr_cross;
}

MetricReport evaluate_pairs(const std::vector<ImageGrid>& generated,
                            const std::vector<ImageGrid>& reference, double data_range,
                            const FeatureEmbedding& embed) {
    if (generated.size() != reference.size())
        throw ConfigError("evaluate_pairs: set sizes differ");
    MetricReport r;
    r.n_images = static_cast<int>(generated.size());
    r.data_range = data_range;
    r.embedding = embed.name();
    for (size_t i = 0; i < generated.size(); ++i) {
        r.ssim.push_back(ssim(generated[i], reference[i], data_range));
        r.psnr_db.push_back(psnr(generated[i], reference[i], data_range));
        r.rmse.push_back(rmse(generated[i], reference[i]));
    }
    r.frechet = frechet_distance(generated, reference, embed);
    return r;
}

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    size_t n = 0;
    for (double x : v)
        if (std::isfinite(x)) {
            acc += x;
            ++n;
        }
    return n ? acc / static_cast<double>(n) : 0.0;
}

json report_summary_json(const MetricReport& r) {
    return json{{"n_images", r.n_images},
                {"data_range", r.data_range},
                {"embedding", r.embedding},
                {"ssim_mean", mean_of(r.ssim)},
                {"psnr_db_mean", mean_of(r.psnr_db)},
                {"rmse_mean", mean_of(r.rmse)},
                {"frechet_distance", r.frechet}};
}

void write_report_csv(const std::filesystem::path& path, const MetricReport& r) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("write_report_csv: cannot open " + path.string());
    f << "index,ssim,psnr_db,rmse\n";
    char row[128];
    for (int i = 0; i < r.n_images; ++i) {
        std::snprintf(row, sizeof(row), "%d,%.17g,%.17g,%.17g", i, r.ssim[i], r.psnr_db[i],
                      r.rmse[i]);
        f << row << "\n";
    }
    if (!f) throw IoError("write_report_csv: write failed: " + path.string());
}

}  // namespace ambient::metrics
