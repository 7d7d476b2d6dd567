#pragma once

#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "ambient/image.hpp"
#include "ambient/rng.hpp"

namespace ambient::degrade {

enum class OpKind { Identity, AdditiveGaussian, GaussianBlur, Compose };

// Declarative measurement operator mapping clean images to simulated
// noisy measurements. Serializes to a canonical JSON tree, e.g.
//   {"compose":[{"blur":{"sigma":1.0}},{"gauss":{"mean":0.0,"std":0.05}}]}
// which is the single source of truth shared with the training graph.
struct DegradationOp {
    OpKind kind = OpKind::Identity;
    double mean = 0.0;   // AdditiveGaussian
    double std = 0.0;    // AdditiveGaussian
    double sigma = 0.0;  // GaussianBlur, pixels
    std::vector<DegradationOp> ops;  // Compose, applied left-to-right

    static DegradationOp identity();
    static DegradationOp additive_gaussian(double mean, double std);
    static DegradationOp gaussian_blur(double sigma);
    static DegradationOp compose(std::vector<DegradationOp> ops);
};

// Throws ConfigError: std/sigma >= 0, Compose non-empty, tree depth <= 8.
void validate(const DegradationOp& op);

nlohmann::json to_json(const DegradationOp& op);
DegradationOp from_json(const nlohmann::json& j);

// Normalized truncated Gaussian taps, radius = ceil(3*sigma). sigma = 0
// degenerates to the identity kernel {1}.
std::vector<double> gaussian_kernel(double sigma);

// Index reflection for out-of-range taps (edge-repeating symmetric pad):
// -1 -> 0, -2 -> 1, n -> n-1, ...
int reflect_index(int i, int n);

// Separable Gaussian blur with reflect padding; double accumulation.
ImageGrid blur(const ImageGrid& img, double sigma);

// Noise draws consume rng in row-major pixel order; deterministic ops
// leave rng untouched.
ImageGrid apply(const DegradationOp& op, const ImageGrid& img, Rng& rng);

// Element i uses the fresh stream rng.stream() ^ (first_index + i) of
// rng.seed(), making results independent of how a batch is partitioned.
std::vector<ImageGrid> apply_batch(const DegradationOp& op, const std::vector<ImageGrid>& imgs,
                                   const Rng& rng, std::size_t first_index = 0);

}  // namespace ambient::degrade
