#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>

#include "ambient/observer.hpp"
#include "ambient/phantom.hpp"
#include "ambient/train.hpp"

namespace ambient {

// Whole-experiment configuration: every field has a default; the JSON file
// only overrides. Unknown keys anywhere are rejected (schema_version 1).
struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "runs/exp";
    int n_samples = 1000;
    phantom::PhantomConfig phantom;  // seed mirrors the global seed
    degrade::DegradationOp deg_source = degrade::DegradationOp::additive_gaussian(0.0, 0.05);
    degrade::DegradationOp deg_target = degrade::DegradationOp::additive_gaussian(0.0, 0.05);
    gan::TrainConfig train;          // mode/degradation filled at train time
    std::string embedding = "pixels16";
    double data_range = 1.0;
    int pdf_bins = 30;
    std::vector<observer::DetectionTask> tasks = observer::default_tasks();
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace ambient
