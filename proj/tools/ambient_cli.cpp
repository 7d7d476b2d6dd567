// Experiment pipeline entry point: dataset synthesis, translator training in
// both modes, image-quality evaluation, and Hotelling-observer studies.
//
// Exit codes: 0 ok, 2 configuration error, 3 I/O error, 4 numeric divergence.

#include <Eigen/Core>
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "ambient/checkpoint.hpp"
#include "ambient/errors.hpp"
#include "ambient/experiment.hpp"
#include "ambient/grid_io.hpp"
#include "ambient/metrics.hpp"
#include "ambient/observer.hpp"
#include "ambient/phantom.hpp"
#include "ambient/plot.hpp"
#include "ambient/spectra.hpp"
#include "ambient/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ambient;

namespace {

void init_threads() {
    if (const char* env = std::getenv("AMBIENT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) Eigen::setNbThreads(n);
    }
}

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

ExperimentConfig load_config(const CommonOpts& o) {
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{}
                                                 : load_experiment_config(o.config_path);
    if (o.seed_set) {
        cfg.seed = o.seed;
        cfg.phantom.seed = o.seed;
        cfg.train.seed = o.seed;
    }
    if (!o.out_override.empty()) cfg.out_dir = o.out_override;
    return cfg;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << j.dump(2) << "\n";
}

std::vector<ImageGrid> pick(const std::vector<ImageGrid>& all, const std::vector<int>& idx) {
    std::vector<ImageGrid> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(all[i]);
    return out;
}

int cmd_gen_data(const CommonOpts& o) {
    const ExperimentConfig cfg = load_config(o);
    const fs::path dir = cfg.out_dir / "dataset";
    const auto m = phantom::build_dataset(cfg.phantom, cfg.n_samples, cfg.deg_source,
                                          cfg.deg_target, dir);
    std::cout << "dataset: " << m.n_samples << " samples (" << m.n_train << " train / "
              << m.test_indices.size() << " test), " << cfg.phantom.image_size << "x"
              << cfg.phantom.image_size << "\n"
              << "manifest: " << (dir / "manifest.json").string() << "\n";
    return 0;
}

int cmd_train(const CommonOpts& o, const std::string& mode, long iters_override, bool resume) {
    ExperimentConfig cfg = load_config(o);
    if (mode != "pix2pix" && mode != "ambient")
        throw ConfigError("--mode must be pix2pix or ambient");

    const fs::path ds_dir = cfg.out_dir / "dataset";
    const auto manifest = phantom::load_manifest(ds_dir);
    const auto data = gan::LoadedDataset::from_manifest(manifest);

    gan::TrainConfig tc = cfg.train;
    tc.mode = (mode == "ambient") ? gan::Mode::Ambient : gan::Mode::Pix2Pix;
    tc.target_degradation = manifest.deg_target;  // dataset manifest is authoritative
    if (iters_override >= 0) tc.total_iters = iters_override;

    const fs::path run_dir = cfg.out_dir / ("train_" + mode);
    gan::TrainState st = resume ? gan::load_checkpoint(run_dir / "checkpoint.apck")
                                : gan::init_state(tc);
    if (resume) {
        st.cfg.total_iters = tc.total_iters;  // allow extending a finished run
    }
    gan::train(st, data, run_dir);
    std::cout << "trained " << mode << " to iteration " << st.iter << "\n"
              << "checkpoint: " << (run_dir / "checkpoint.apck").string() << "\n"
              << "loss log: " << (run_dir / "loss_log.csv").string() << "\n";
    return 0;
}

int cmd_translate(const std::string& checkpoint, const std::string& dataset,
                  const std::string& out, const std::string& split) {
    auto st = gan::load_checkpoint(checkpoint);
    const auto manifest = phantom::load_manifest(dataset);
    const auto data = gan::LoadedDataset::from_manifest(manifest);

    std::vector<int> idx;
    if (split == "train")
        idx = data.train_indices;
    else if (split == "test")
        idx = data.test_indices;
    else if (split == "all") {
        idx = data.train_indices;
        idx.insert(idx.end(), data.test_indices.begin(), data.test_indices.end());
    } else {
        throw ConfigError("--split must be train, test, or all");
    }

    const fs::path out_dir(out);
    fs::create_directories(out_dir);
    const auto inputs = pick(data.source_meas, idx);
    const auto translated = gan::translate_images(*st.gen, inputs);
    for (size_t k = 0; k < idx.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "translated_%05d", idx[k]);
        write_grid(out_dir / (std::string(name) + ".igrd"), translated[k]);
        write_grid_png(out_dir / (std::string(name) + ".png"), translated[k]);
    }
    std::cout << "translated " << idx.size() << " images to " << out_dir.string() << "\n";
    return 0;
}

struct EvalOutput {
    std::string mode;
    metrics::MetricReport vs_clean;
    metrics::MetricReport vs_measured;
    std::vector<ImageGrid> translated;
};

EvalOutput eval_one(const fs::path& checkpoint, const gan::LoadedDataset& data,
                    const metrics::FeatureEmbedding& emb, double data_range) {
    auto st = gan::load_checkpoint(checkpoint);
    EvalOutput out;
    out.mode = st.cfg.mode == gan::Mode::Ambient ? "ambient" : "pix2pix";
    const auto inputs = pick(data.source_meas, data.test_indices);
    out.translated = gan::translate_images(*st.gen, inputs);
    out.vs_clean = metrics::evaluate_pairs(out.translated,
                                           pick(data.target_clean, data.test_indices),
                                           data_range, emb);
    out.vs_measured = metrics::evaluate_pairs(out.translated,
                                              pick(data.target_meas, data.test_indices),
                                              data_range, emb);
    return out;
}

void emit_eval_artifacts(const fs::path& out_dir, const gan::LoadedDataset& data,
                         const std::vector<EvalOutput>& evals, int pdf_bins) {
    fs::create_directories(out_dir);
    const auto clean = pick(data.target_clean, data.test_indices);

    json summary = json::array();
    for (const auto& e : evals) {
        json row = metrics::report_summary_json(e.vs_clean);
        row["model"] = e.mode;
        row["vs_measured"] = metrics::report_summary_json(e.vs_measured);
        summary.push_back(row);
        metrics::write_report_csv(out_dir / ("metrics_" + e.mode + ".csv"), e.vs_clean);
    }
    write_json_file(out_dir / "metrics_summary.json", summary);

    // Spectra for ground truth and each model; CSV next to every plot.
    auto to_series = [](const std::vector<double>& v, const std::string& label, int ci) {
        plot::Series s;
        s.label = label;
        s.color = plot::palette(ci);
        for (size_t i = 0; i < v.size(); ++i) {
            s.x.push_back(static_cast<double>(i));
            s.y.push_back(v[i]);
        }
        return s;
    };
    std::vector<plot::Series> sv_series, rp_series;
    const auto sv_truth = spectra::singular_value_spectrum(clean);
    spectra::write_spectrum_csv(out_dir / "svspectrum_real.csv", sv_truth, "eigenvalue");
    const auto rp_truth = spectra::radial_power_spectrum(clean);
    spectra::write_radial_csv(out_dir / "radial_real.csv", rp_truth);
    sv_series.push_back(to_series(sv_truth, "real", 0));
    rp_series.push_back(to_series(rp_truth.power, "real", 0));

    int color = 1;
    for (const auto& e : evals) {
        const auto sv = spectra::singular_value_spectrum(e.translated);
        spectra::write_spectrum_csv(out_dir / ("svspectrum_" + e.mode + ".csv"), sv, "eigenvalue");
        const auto rp = spectra::radial_power_spectrum(e.translated);
        spectra::write_radial_csv(out_dir / ("radial_" + e.mode + ".csv"), rp);
        sv_series.push_back(to_series(sv, e.mode, color));
        rp_series.push_back(to_series(rp.power, e.mode, color));
        ++color;
    }
    plot::line_chart(out_dir / "svspectrum.png", sv_series, "index", "eigenvalue", true);
    plot::line_chart(out_dir / "radial_power.png", rp_series, "frequency", "power", true);

    for (const auto& e : evals) {
        spectra::write_histogram_csv(out_dir / ("pdf_ssim_" + e.mode + ".csv"),
                                     spectra::metric_pdf(e.vs_clean.ssim, pdf_bins));
        spectra::write_histogram_csv(out_dir / ("pdf_psnr_" + e.mode + ".csv"),
                                     spectra::metric_pdf(e.vs_clean.psnr_db, pdf_bins));
        spectra::write_histogram_csv(out_dir / ("pdf_rmse_" + e.mode + ".csv"),
                                     spectra::metric_pdf(e.vs_clean.rmse, pdf_bins));
    }
}

int cmd_eval(const CommonOpts& o, const std::vector<std::string>& checkpoints,
             const std::string& dataset, const std::string& embedding) {
    ExperimentConfig cfg = load_config(o);
    if (!embedding.empty()) cfg.embedding = embedding;
    const fs::path ds_dir = dataset.empty() ? cfg.out_dir / "dataset" : fs::path(dataset);
    const auto manifest = phantom::load_manifest(ds_dir);
    const auto data = gan::LoadedDataset::from_manifest(manifest);
    const auto emb = metrics::make_embedding(cfg.embedding);

    std::vector<EvalOutput> evals;
    for (const auto& ck : checkpoints) evals.push_back(eval_one(ck, data, *emb, cfg.data_range));

    const fs::path out_dir = cfg.out_dir / "eval";
    emit_eval_artifacts(out_dir, data, evals, cfg.pdf_bins);

    for (const auto& e : evals)
        std::cout << e.mode << ": ssim " << metrics::mean_of(e.vs_clean.ssim) << "  psnr "
                  << metrics::mean_of(e.vs_clean.psnr_db) << " dB  rmse "
                  << metrics::mean_of(e.vs_clean.rmse) << "  frechet(" << e.vs_clean.embedding
                  << ") " << e.vs_clean.frechet << "\n";
    std::cout << "reports in " << out_dir.string() << "\n";
    return 0;
}

int cmd_observer(const CommonOpts& o, const std::string& ck_p2p, const std::string& ck_amb,
                 const std::string& dataset, const std::string& tasks_path) {
    ExperimentConfig cfg = load_config(o);
    const fs::path ds_dir = dataset.empty() ? cfg.out_dir / "dataset" : fs::path(dataset);
    const auto manifest = phantom::load_manifest(ds_dir);
    const auto data = gan::LoadedDataset::from_manifest(manifest);

    std::vector<observer::DetectionTask> tasks = cfg.tasks;
    if (!tasks_path.empty()) {
        std::ifstream f(tasks_path);
        if (!f) throw IoError("cannot open tasks file: " + tasks_path);
        json j;
        try {
            f >> j;
        } catch (const json::exception& e) {
            throw ConfigError("tasks file: bad JSON: " + std::string(e.what()));
        }
        tasks = observer::tasks_from_json(j);
    }

    auto st_p = gan::load_checkpoint(ck_p2p);
    auto st_a = gan::load_checkpoint(ck_amb);
    const auto inputs = pick(data.source_meas, data.test_indices);
    const auto real = pick(data.target_clean, data.test_indices);
    const auto gen_p = gan::translate_images(*st_p.gen, inputs);
    const auto gen_a = gan::translate_images(*st_a.gen, inputs);

    const auto result = observer::run_task_suite(real, gen_p, gen_a, tasks);

    const fs::path out_dir = cfg.out_dir / "observer";
    fs::create_directories(out_dir);
    observer::write_suite_csv(out_dir / "snr_ho.csv", result);
    write_json_file(out_dir / "snr_ho.json", observer::suite_to_json(result));

    std::vector<std::string> group_labels;
    std::vector<std::vector<double>> values;
    for (size_t i = 0; i < result.tasks.size(); ++i) {
        group_labels.push_back("task " + std::to_string(result.tasks[i].id));
        values.push_back({result.snr[i][0], result.snr[i][1], result.snr[i][2]});
    }
    plot::grouped_bar_chart(out_dir / "snr_ho.png", group_labels,
                            {"real", "pix2pix", "ambient"}, values, "snr-ho");

    for (size_t i = 0; i < result.tasks.size(); ++i)
        std::cout << "task " << result.tasks[i].id << ": real " << result.snr[i][0]
                  << "  pix2pix " << result.snr[i][1] << "  ambient " << result.snr[i][2] << "\n";
    std::cout << "observer outputs in " << out_dir.string() << "\n";
    return 0;
}

int cmd_report(const CommonOpts& o, const std::string& ck_p2p, const std::string& ck_amb,
               const std::string& dataset, const std::string& embedding) {
    const int rc = cmd_eval(o, {ck_p2p, ck_amb}, dataset, embedding);
    if (rc != 0) return rc;
    return cmd_observer(o, ck_p2p, ck_amb, dataset, "");
}

}  // namespace

int main(int argc, char** argv) {
    init_threads();
    CLI::App app{"ambient: paired image translation trained on noisy measurements, "
                 "with objective image-quality assessment"};
    app.require_subcommand(1);

    CommonOpts common;
    long iters_override = -1;
    bool resume = false;
    std::string mode, dataset, split = "test", embedding, tasks_path;
    std::string checkpoint, ck_p2p, ck_amb, out;
    std::vector<std::string> checkpoints;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "experiment config JSON");
        cmd->add_option("--out", common.out_override, "output directory override");
        cmd->add_option("--seed", common.seed, "global seed override")
            ->each([&](const std::string&) { common.seed_set = true; });
    };

    auto* gen = app.add_subcommand("gen-data", "synthesize a paired phantom dataset");
    add_common(gen);

    auto* tr = app.add_subcommand("train", "train a translator");
    add_common(tr);
    tr->add_option("--mode", mode, "pix2pix or ambient")->required();
    tr->add_option("--iters", iters_override, "override total iterations");
    tr->add_flag("--resume", resume, "resume from the saved checkpoint");

    auto* tl = app.add_subcommand("translate", "run a trained generator over a dataset");
    tl->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    tl->add_option("--dataset", dataset, "dataset directory")->required();
    tl->add_option("--out", out, "output directory")->required();
    tl->add_option("--split", split, "train|test|all (default test)");

    auto* ev = app.add_subcommand("eval", "image-quality metrics and spectra");
    add_common(ev);
    ev->add_option("--checkpoint", checkpoints, "checkpoint file(s)")->required();
    ev->add_option("--dataset", dataset, "dataset directory (default <out>/dataset)");
    ev->add_option("--embedding", embedding, "pixels16 or randproj64");

    auto* ob = app.add_subcommand("observer", "Hotelling-observer detection study");
    add_common(ob);
    ob->add_option("--checkpoint-pix2pix", ck_p2p, "pix2pix checkpoint")->required();
    ob->add_option("--checkpoint-ambient", ck_amb, "ambient checkpoint")->required();
    ob->add_option("--dataset", dataset, "dataset directory (default <out>/dataset)");
    ob->add_option("--tasks", tasks_path, "detection task suite JSON");

    auto* rp = app.add_subcommand("report", "full evaluation bundle (metrics + observer)");
    add_common(rp);
    rp->add_option("--checkpoint-pix2pix", ck_p2p, "pix2pix checkpoint")->required();
    rp->add_option("--checkpoint-ambient", ck_amb, "ambient checkpoint")->required();
    rp->add_option("--dataset", dataset, "dataset directory (default <out>/dataset)");
    rp->add_option("--embedding", embedding, "pixels16 or randproj64");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen_data(common);
        if (tr->parsed()) return cmd_train(common, mode, iters_override, resume);
        if (tl->parsed()) return cmd_translate(checkpoint, dataset, out, split);
        if (ev->parsed()) return cmd_eval(common, checkpoints, dataset, embedding);
        if (ob->parsed()) return cmd_observer(common, ck_p2p, ck_amb, dataset, tasks_path);
        if (rp->parsed()) return cmd_report(common, ck_p2p, ck_amb, dataset, embedding);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence error: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
