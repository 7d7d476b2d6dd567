#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "ambient/degradation.hpp"
#include "ambient/image.hpp"
#include "ambient/rng.hpp"

namespace ambient::phantom {

struct PhantomConfig {
    int image_size = 64;
    double lump_rate = 80.0;        // Poisson mean of lump count
    double lump_width = 4.0;        // Gaussian lump std, pixels
    double lump_magnitude = 1.0;
    double modality_blur_sigma = 1.5;
    double modality_gamma = 2.0;    // contrast exponent of modality B
    std::uint64_t seed = 0;
};

void validate(const PhantomConfig& cfg);

// One training/eval record; all four grids share dimensions.
struct PairedSample {
    ImageGrid source_clean;
    ImageGrid target_clean;
    ImageGrid source_meas;
    ImageGrid target_meas;
    int sample_id = 0;
};

struct DatasetManifest {
    int schema_version = 1;
    PhantomConfig cfg;
    int n_samples = 0;
    int n_train = 0;
    degrade::DegradationOp deg_source;
    degrade::DegradationOp deg_target;
    std::vector<int> train_indices;
    std::vector<int> test_indices;
    std::filesystem::path dir;  // runtime only, not serialized
};

// Gaussian-lump superposition before any rescaling: N ~ Poisson(lump_rate)
// lumps with continuous uniform centers, b(r) = sum A*exp(-|r-c|^2/(2 w^2))
// evaluated at integer pixel coordinates, no truncation window.
ImageGrid raw_lumpy_background(const PhantomConfig& cfg, Rng& rng);

// raw_lumpy_background rescaled to [0,1] by its own min/max (an all-zero
// draw stays all-zero). Dataset builds rescale globally instead.
ImageGrid generate_lumpy_background(const PhantomConfig& cfg, Rng& rng);

// source = b unchanged; target = clamp01(blur(b^gamma, modality_blur_sigma)).
// Deterministic in b, so the translation task is well-posed.
std::pair<ImageGrid, ImageGrid> render_modalities(const ImageGrid& b, const PhantomConfig& cfg);

// Writes manifest.json plus four IGRD grids per sample; first 80% train.
// Sample i derives all its randomness from seed cfg.seed + i.
DatasetManifest build_dataset(const PhantomConfig& cfg, int n_samples,
                              const degrade::DegradationOp& deg_source,
                              const degrade::DegradationOp& deg_target,
                              const std::filesystem::path& out_dir);

DatasetManifest load_manifest(const std::filesystem::path& dir);

PairedSample load_sample(const DatasetManifest& m, int index);

std::filesystem::path grid_path(const std::filesystem::path& dir, int index, const char* kind);

}  // namespace ambient::phantom
