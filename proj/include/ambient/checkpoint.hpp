#pragma once

#include <filesystem>

#include "ambient/train.hpp"

namespace ambient::gan {

// Versioned binary container: magic "APCK", u32 version, length-prefixed
// JSON header (config, iteration, EMA losses, blob directory), then raw
// little-endian float64 blobs: parameters in declaration order, then Adam
// moments. Full-precision blobs keep save/load/resume bit-exact.
void save_checkpoint(const std::filesystem::path& path, const TrainState& st);

TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace ambient::gan
