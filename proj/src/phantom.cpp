#include "ambient/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "ambient/errors.hpp"
#include "ambient/grid_io.hpp"

namespace ambient::phantom {

using nlohmann::json;

namespace {

// Substream tags of the per-sample seed (cfg.seed + sample_id).
constexpr std::uint64_t kStreamLumps = 0x4C554D50;      // "LUMP"
constexpr std::uint64_t kStreamDegSource = 0x44455253;  // "DEGS"
constexpr std::uint64_t kStreamDegTarget = 0x44454754;  // "DEGT"

float clamp01(double v) {
    if (v < 0.0) return 0.0f;
    if (v > 1.0) return 1.0f;
    return static_cast<float>(v);
}

json phantom_to_json(const PhantomConfig& cfg) {
    return json{{"image_size", cfg.image_size},
                {"lump_rate", cfg.lump_rate},
                {"lump_width", cfg.lump_width},
                {"lump_magnitude", cfg.lump_magnitude},
                {"modality_blur_sigma", cfg.modality_blur_sigma},
                {"modality_gamma", cfg.modality_gamma},
                {"seed", cfg.seed}};
}

PhantomConfig phantom_from_json(const json& j) {
    PhantomConfig cfg;
    cfg.image_size = j.at("image_size").get<int>();
    cfg.lump_rate = j.at("lump_rate").get<double>();
    cfg.lump_width = j.at("lump_width").get<double>();
    cfg.lump_magnitude = j.at("lump_magnitude").get<double>();
    cfg.modality_blur_sigma = j.at("modality_blur_sigma").get<double>();
    cfg.modality_gamma = j.at("modality_gamma").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.size() != 7) throw ConfigError("manifest: unexpected keys in phantom config");
    return cfg;
}

}  // namespace

void validate(const PhantomConfig& cfg) {
    if (cfg.image_size < 32)
        throw ConfigError("phantom: image_size must be >= 32 (observer crop needs a 30x30 center)");
    if (!(cfg.lump_rate > 0.0)) throw ConfigError("phantom: lump_rate must be > 0");
    if (!(cfg.lump_width > 0.0)) throw ConfigError("phantom: lump_width must be > 0");
    if (!(cfg.modality_blur_sigma >= 0.0)) throw ConfigError("phantom: modality_blur_sigma must be >= 0");
    if (!(cfg.modality_gamma > 0.0)) throw ConfigError("phantom: modality_gamma must be > 0");
}

ImageGrid raw_lumpy_background(const PhantomConfig& cfg, Rng& rng) {
    validate(cfg);
    const int n = cfg.image_size;
    const int lumps = poisson(rng, cfg.lump_rate);
    const double inv_2w2 = 1.0 / (2.0 * cfg.lump_width * cfg.lump_width);

    std::vector<double> acc(static_cast<size_t>(n) * n, 0.0);
    for (int l = 0; l < lumps; ++l) {
        const double cx = rng.uniform() * n;
        const double cy = rng.uniform() * n;
        for (int y = 0; y < n; ++y) {
            const double dy2 = (y - cy) * (y - cy);
            double* row = &acc[static_cast<size_t>(y) * n];
            for (int x = 0; x < n; ++x) {
                const double d2 = (x - cx) * (x - cx) + dy2;
                row[x] += cfg.lump_magnitude * std::exp(-d2 * inv_2w2);
            }
        }
    }

    ImageGrid out(n, n);
    for (size_t i = 0; i < acc.size(); ++i) out.data[i] = static_cast<float>(acc[i]);
    return out;
}

ImageGrid generate_lumpy_background(const PhantomConfig& cfg, Rng& rng) {
    ImageGrid raw = raw_lumpy_background(cfg, rng);
    const auto [lo, hi] = min_max(raw);
    if (hi > lo) {
        const float inv = 1.0f / (hi - lo);
        for (float& v : raw.data) v = (v - lo) * inv;
    } else {
        std::fill(raw.data.begin(), raw.data.end(), 0.0f);
    }
    return raw;
}

std::pair<ImageGrid, ImageGrid> render_modalities(const ImageGrid& b, const PhantomConfig& cfg) {
    check_valid(b, "render_modalities input");
    ImageGrid powed(b.width, b.height);
    for (size_t i = 0; i < b.data.size(); ++i)
        powed.data[i] = static_cast<float>(std::pow(static_cast<double>(b.data[i]), cfg.modality_gamma));
    ImageGrid target = degrade::blur(powed, cfg.modality_blur_sigma);
    for (float& v : target.data) v = clamp01(v);
    return {b, target};
}

std::filesystem::path grid_path(const std::filesystem::path& dir, int index, const char* kind) {
    char name[64];
    std::snprintf(name, sizeof(name), "sample_%05d_%s.igrd", index, kind);
    return dir / name;
}

DatasetManifest build_dataset(const PhantomConfig& cfg, int n_samples,
                              const degrade::DegradationOp& deg_source,
                              const degrade::DegradationOp& deg_target,
                              const std::filesystem::path& out_dir) {
    validate(cfg);
    degrade::validate(deg_source);
    degrade::validate(deg_target);
    if (n_samples < 10) throw ConfigError("build_dataset: n_samples must be >= 10");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("build_dataset: cannot create " + out_dir.string() + ": " + ec.message());

    // Pass 1: raw backgrounds, then a dataset-global rescale so intensity
    // statistics are comparable across samples.
    std::vector<ImageGrid> raws;
    raws.reserve(n_samples);
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (int i = 0; i < n_samples; ++i) {
        Rng rng(cfg.seed + static_cast<std::uint64_t>(i), kStreamLumps);
        raws.push_back(raw_lumpy_background(cfg, rng));
        const auto [l, h] = min_max(raws.back());
        lo = std::min(lo, l);
        hi = std::max(hi, h);
    }
    const float inv = (hi > lo) ? 1.0f / (hi - lo) : 0.0f;

    DatasetManifest m;
    m.cfg = cfg;
    m.n_samples = n_samples;
    m.n_train = n_samples * 8 / 10;
    m.deg_source = deg_source;
    m.deg_target = deg_target;
    m.dir = out_dir;
    for (int i = 0; i < n_samples; ++i)
        (i < m.n_train ? m.train_indices : m.test_indices).push_back(i);

    for (int i = 0; i < n_samples; ++i) {
        ImageGrid b = std::move(raws[i]);
        for (float& v : b.data) v = (v - lo) * inv;
        auto [src, tgt] = render_modalities(b, cfg);

        Rng rng_s(cfg.seed + static_cast<std::uint64_t>(i), kStreamDegSource);
        Rng rng_t(cfg.seed + static_cast<std::uint64_t>(i), kStreamDegTarget);
        const ImageGrid src_meas = degrade::apply(deg_source, src, rng_s);
        const ImageGrid tgt_meas = degrade::apply(deg_target, tgt, rng_t);

        check_valid(src_meas, "build_dataset source_meas");
        check_valid(tgt_meas, "build_dataset target_meas");
        try {
            write_grid(grid_path(out_dir, i, "source_clean"), src);
            write_grid(grid_path(out_dir, i, "target_clean"), tgt);
            write_grid(grid_path(out_dir, i, "source_meas"), src_meas);
            write_grid(grid_path(out_dir, i, "target_meas"), tgt_meas);
        } catch (const IoError& e) {
            throw IoError(std::string("build_dataset: failed writing sample grids: ") + e.what());
        }
    }

    json j;
    j["schema_version"] = m.schema_version;
    j["phantom"] = phantom_to_json(cfg);
    j["n_samples"] = n_samples;
    j["n_train"] = m.n_train;
    j["seed"] = cfg.seed;
    j["degradation"] = {{"source", degrade::to_json(deg_source)}, {"target", degrade::to_json(deg_target)}};
    j["split"] = {{"train", m.train_indices}, {"test", m.test_indices}};

    std::ofstream f(out_dir / "manifest.json", std::ios::trunc);
    if (!f) throw IoError("build_dataset: cannot write manifest in " + out_dir.string());
    f << j.dump(2) << "\n";
    if (!f) throw IoError("build_dataset: manifest write failed in " + out_dir.string());
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw IoError("load_manifest: cannot open " + (dir / "manifest.json").string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("load_manifest: bad JSON: " + std::string(e.what()));
    }

    DatasetManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1) throw ConfigError("load_manifest: unsupported schema_version");
    m.cfg = phantom_from_json(j.at("phantom"));
    m.n_samples = j.at("n_samples").get<int>();
    m.n_train = j.at("n_train").get<int>();
    m.deg_source = degrade::from_json(j.at("degradation").at("source"));
    m.deg_target = degrade::from_json(j.at("degradation").at("target"));
    m.train_indices = j.at("split").at("train").get<std::vector<int>>();
    m.test_indices = j.at("split").at("test").get<std::vector<int>>();
    if (j.size() != 7) throw ConfigError("load_manifest: unexpected top-level keys");
    m.dir = dir;
    return m;
}

PairedSample load_sample(const DatasetManifest& m, int index) {
    if (index < 0 || index >= m.n_samples) throw ConfigError("load_sample: index out of range");
    PairedSample s;
    s.sample_id = index;
    s.source_clean = read_grid(grid_path(m.dir, index, "source_clean"));
    s.target_clean = read_grid(grid_path(m.dir, index, "target_clean"));
    s.source_meas = read_grid(grid_path(m.dir, index, "source_meas"));
    s.target_meas = read_grid(grid_path(m.dir, index, "target_meas"));
    return s;
}

}  // namespace ambient::phantom
