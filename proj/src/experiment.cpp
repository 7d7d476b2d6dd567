#include "ambient/experiment.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "ambient/errors.hpp"

namespace ambient {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig cfg;
    reject_unknown(j,
                   {"schema_version", "seed", "out_dir", "n_samples", "phantom", "degradation",
                    "train", "metrics", "observer"},
                   "top level");
    if (j.at("schema_version").get<int>() != 1)
        throw ConfigError("config: unsupported schema_version");
    read_opt(j, "seed", cfg.seed);
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    read_opt(j, "n_samples", cfg.n_samples);

    if (j.contains("phantom")) {
        const json& p = j.at("phantom");
        reject_unknown(p,
                       {"image_size", "lump_rate", "lump_width", "lump_magnitude",
                        "modality_blur_sigma", "modality_gamma"},
                       "phantom");
        read_opt(p, "image_size", cfg.phantom.image_size);
        read_opt(p, "lump_rate", cfg.phantom.lump_rate);
        read_opt(p, "lump_width", cfg.phantom.lump_width);
        read_opt(p, "lump_magnitude", cfg.phantom.lump_magnitude);
        read_opt(p, "modality_blur_sigma", cfg.phantom.modality_blur_sigma);
        read_opt(p, "modality_gamma", cfg.phantom.modality_gamma);
    }
    cfg.phantom.seed = cfg.seed;
    phantom::validate(cfg.phantom);

    if (j.contains("degradation")) {
        const json& d = j.at("degradation");
        reject_unknown(d, {"source", "target"}, "degradation");
        if (d.contains("source")) cfg.deg_source = degrade::from_json(d.at("source"));
        if (d.contains("target")) cfg.deg_target = degrade::from_json(d.at("target"));
    }

    if (j.contains("train")) {
        const json& t = j.at("train");
        reject_unknown(t,
                       {"lambda_l1", "lr", "beta1", "beta2", "batch_size", "total_iters",
                        "l1_target", "non_saturating_g", "literal_swapped_cgan", "noisy_input",
                        "checkpoint_every", "net"},
                       "train");
        read_opt(t, "lambda_l1", cfg.train.lambda_l1);
        read_opt(t, "lr", cfg.train.lr);
        read_opt(t, "beta1", cfg.train.beta1);
        read_opt(t, "beta2", cfg.train.beta2);
        read_opt(t, "batch_size", cfg.train.batch_size);
        read_opt(t, "total_iters", cfg.train.total_iters);
        if (t.contains("l1_target")) {
            const std::string v = t.at("l1_target").get<std::string>();
            if (v == "measurement")
                cfg.train.l1_target = gan::L1Target::Measurement;
            else if (v == "clean")
                cfg.train.l1_target = gan::L1Target::Clean;
            else
                throw ConfigError("config: l1_target must be measurement or clean");
        }
        read_opt(t, "non_saturating_g", cfg.train.non_saturating_g);
        read_opt(t, "literal_swapped_cgan", cfg.train.literal_swapped_cgan);
        read_opt(t, "noisy_input", cfg.train.noisy_input);
        read_opt(t, "checkpoint_every", cfg.train.checkpoint_every);
        if (t.contains("net")) {
            const json& n = t.at("net");
            reject_unknown(n, {"gen_depth", "gen_base", "disc_layers", "disc_base"}, "train.net");
            read_opt(n, "gen_depth", cfg.train.net.gen_depth);
            read_opt(n, "gen_base", cfg.train.net.gen_base);
            read_opt(n, "disc_layers", cfg.train.net.disc_layers);
            read_opt(n, "disc_base", cfg.train.net.disc_base);
        }
    }
    cfg.train.seed = cfg.seed;
    cfg.train.target_degradation = cfg.deg_target;
    gan::validate(cfg.train);

    if (j.contains("metrics")) {
        const json& m = j.at("metrics");
        reject_unknown(m, {"embedding", "data_range", "pdf_bins"}, "metrics");
        read_opt(m, "embedding", cfg.embedding);
        read_opt(m, "data_range", cfg.data_range);
        read_opt(m, "pdf_bins", cfg.pdf_bins);
        if (cfg.embedding != "pixels16" && cfg.embedding != "randproj64")
            throw ConfigError("config: embedding must be pixels16 or randproj64");
        if (!(cfg.data_range > 0.0)) throw ConfigError("config: data_range must be > 0");
        if (cfg.pdf_bins < 1) throw ConfigError("config: pdf_bins must be >= 1");
    }

    if (j.contains("observer")) {
        const json& o = j.at("observer");
        reject_unknown(o, {"tasks"}, "observer");
        if (o.contains("tasks")) cfg.tasks = observer::tasks_from_json(o.at("tasks"));
    }

    if (cfg.n_samples < 10) throw ConfigError("config: n_samples must be >= 10");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: bad JSON in " + path.string() + ": " + e.what());
    }
    return experiment_from_json(j);
}

}  // namespace ambient
