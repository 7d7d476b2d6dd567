#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "ambient/image.hpp"

namespace ambient::metrics {

// Standard SSIM: 11x11 Gaussian window (sigma 1.5), C1 = (0.01 L)^2,
// C2 = (0.03 L)^2, averaged over valid window positions only.
double ssim(const ImageGrid& a, const ImageGrid& b, double data_range);

// 20 log10(L) - 20 log10(rmse); +infinity when the images are identical
// (the shared rmse path makes the log identity exact by construction).
double psnr(const ImageGrid& a, const ImageGrid& b, double data_range);

double rmse(const ImageGrid& a, const ImageGrid& b);

// Feature map used by the Fréchet distance. The exact-Inception embedding
// is out of scope; built-ins are self-contained stand-ins and reports must
// name which one produced a number.
class FeatureEmbedding {
  public:
    virtual ~FeatureEmbedding() = default;
    virtual std::string name() const = 0;
    virtual Eigen::VectorXd embed(const ImageGrid& img) const = 0;
};

// "pixels16": area-averaged 16x16 downsample (dim 256).
// "randproj64": fixed seeded Gaussian random projection to dim 64.
std::unique_ptr<FeatureEmbedding> make_embedding(const std::string& name);

// ||mu_a - mu_b||^2 + Tr(Ca + Cb - 2 (Ca Cb)^{1/2}) on fitted Gaussian
// moments (covariance divisor n-1). The cross-term square root goes through
// the symmetric similarity transform sqrt(Ca) Cb sqrt(Ca); eigenvalues
// below -1e-8 raise, small negatives clamp to zero.
double frechet_distance(const std::vector<ImageGrid>& set_a, const std::vector<ImageGrid>& set_b,
                        const FeatureEmbedding& embed);

struct MetricReport {
    std::vector<double> ssim;
    std::vector<double> psnr_db;
    std::vector<double> rmse;
    double frechet = 0.0;
    std::string embedding;
    int n_images = 0;
    double data_range = 1.0;
};

// Pairwise metrics of generated[i] against reference[i] plus the set-level
// Fréchet distance between the two ensembles.
MetricReport evaluate_pairs(const std::vector<ImageGrid>& generated,
                            const std::vector<ImageGrid>& reference, double data_range,
                            const FeatureEmbedding& embed);

nlohmann::json report_summary_json(const MetricReport& r);
void write_report_csv(const std::filesystem::path& path, const MetricReport& r);

double mean_of(const std::vector<double>& v);  // infinities skipped

}  // namespace ambient::metrics
