#pragma once

#include <array>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "ambient/image.hpp"
#include "ambient/rng.hpp"

namespace ambient::observer {

// One SKE/BKS binary detection experiment: a Gaussian signal of known shape
// added at the center of a 30x30 crop, i.i.d. Gaussian measurement noise.
struct DetectionTask {
    int id = 0;
    double signal_std = 0.6;       // pixels
    double signal_magnitude = 1.0;
    double noise_mean = 0.0;
    double noise_std = 1.0;        // > 0 keeps K_g invertible
    int crop = 30;
};

void validate(const DetectionTask& t);

// The five stock tasks: (signal std, magnitude, noise std) =
// (0.6,1.5,1), (0.5,1,0.7), (0.7,0.4,0.5), (0.5,1,1), (0.6,0.9,1).
std::vector<DetectionTask> default_tasks();

std::vector<DetectionTask> tasks_from_json(const nlohmann::json& j);
nlohmann::json tasks_to_json(const std::vector<DetectionTask>& tasks);

// s(i,j) = magnitude * exp(-((i-c)^2+(j-c)^2) / (2 std^2)) on the crop grid
// with continuous center c = (crop-1)/2 (14.5 on the 30x30 crop).
ImageGrid make_signal(const DetectionTask& t);

struct HypothesisEnsemble {
    std::vector<ImageGrid> backgrounds;  // center-cropped, no task noise
    ImageGrid signal;
    double noise_mean = 0.0;
    double noise_std = 1.0;
    std::vector<ImageGrid> g_h0;  // realized measurements, signal absent
    std::vector<ImageGrid> g_h1;  // realized measurements, signal present
};

// Crops each image to the task's centered crop and realizes n_noise_reps
// measurements per background under both hypotheses. With paired_noise the
// same noise field serves both hypotheses, so g_h1 - g_h0 == signal exactly.
HypothesisEnsemble build_ensembles(const std::vector<ImageGrid>& images, const DetectionTask& t,
                                   int n_noise_reps, Rng& rng, bool paired_noise = true);

// SNR_HO = sqrt(s^T K_g^{-1} s) with the known signal as the mean difference
// (signal-known-exactly) and K_g = K_b + noise_std^2 I, where K_b is the
// empirical covariance (divisor n-1) of the noise-free cropped backgrounds.
double hotelling_snr(const HypothesisEnsemble& e);

// Validation-only variant: empirical mean difference of the realized
// measurements instead of the known signal.
double hotelling_snr_empirical(const HypothesisEnsemble& e);

struct TaskSuiteResult {
    std::vector<DetectionTask> tasks;
    // snr[task][source], sources ordered as in `sources`.
    std::vector<std::array<double, 3>> snr;
    static constexpr std::array<const char*, 3> sources = {"real", "pix2pix", "ambient"};
};

TaskSuiteResult run_task_suite(const std::vector<ImageGrid>& real_images,
                               const std::vector<ImageGrid>& pix2pix_images,
                               const std::vector<ImageGrid>& ambient_images,
                               const std::vector<DetectionTask>& tasks);

void write_suite_csv(const std::filesystem::path& path, const TaskSuiteResult& r);
nlohmann::json suite_to_json(const TaskSuiteResult& r);

}  // namespace ambient::observer
