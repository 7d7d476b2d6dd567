#include "ambient/observer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ambient/errors.hpp"

namespace ambient::observer {

using nlohmann::json;

void validate(const DetectionTask& t) {
    if (!(t.signal_std > 0.0)) throw ConfigError("task: signal_std must be > 0");
    if (!(t.noise_std > 0.0)) throw ConfigError("task: noise_std must be > 0 (K_g invertibility)");
    if (t.crop < 1) throw ConfigError("task: crop must be >= 1");
    if (!std::isfinite(t.signal_magnitude) || !std::isfinite(t.noise_mean))
        throw ConfigError("task: non-finite parameter");
}

std::vector<DetectionTask> default_tasks() {
    return {
        {1, 0.6, 1.5, 0.0, 1.0, 30},
        {2, 0.5, 1.0, 0.0, 0.7, 30},
        {3, 0.7, 0.4, 0.0, 0.5, 30},
        {4, 0.5, 1.0, 0.0, 1.0, 30},
        {5, 0.6, 0.9, 0.0, 1.0, 30},
    };
}

std::vector<DetectionTask> tasks_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("tasks: expected a non-empty JSON array");
    std::vector<DetectionTask> out;
    for (const auto& tj : j) {
        DetectionTask t;
        t.id = tj.at("id").get<int>();
        t.signal_std = tj.at("signal_std").get<double>();
        t.signal_magnitude = tj.at("signal_magnitude").get<double>();
        t.noise_mean = tj.at("noise_mean").get<double>();
        t.noise_std = tj.at("noise_std").get<double>();
        t.crop = tj.at("crop").get<int>();
        if (tj.size() != 6) throw ConfigError("tasks: unexpected keys in task object");
        validate(t);
        out.push_back(t);
    }
    return out;
}

json tasks_to_json(const std::vector<DetectionTask>& tasks) {
    json arr = json::array();
    for (const auto& t : tasks)
        arr.push_back({{"id", t.id},
                       {"signal_std", t.signal_std},
                       {"signal_magnitude", t.signal_magnitude},
                       {"noise_mean", t.noise_mean},
                       {"noise_std", t.noise_std},
                       {"crop", t.crop}});
    return arr;
}

ImageGrid make_signal(const DetectionTask& t) {
    validate(t);
    ImageGrid s(t.crop, t.crop);
    const double c = (t.crop - 1) / 2.0;  // continuous center; no center pixel
    const double inv = 1.0 / (2.0 * t.signal_std * t.signal_std);
    for (int y = 0; y < t.crop; ++y)
        for (int x = 0; x < t.crop; ++x) {
            const double d2 = (x - c) * (x - c) + (y - c) * (y - c);
            s.at(x, y) = static_cast<float>(t.signal_magnitude * std::exp(-d2 * inv));
        }
    return s;
}

HypothesisEnsemble build_ensembles(const std::vector<ImageGrid>& images, const DetectionTask& t,
                                   int n_noise_reps, Rng& rng, bool paired_noise) {
    validate(t);
    if (images.size() < 2) throw ConfigError("build_ensembles: need at least 2 images");
    if (n_noise_reps < 1) throw ConfigError("build_ensembles: n_noise_reps must be >= 1");

    HypothesisEnsemble e;
    e.signal = make_signal(t);
    e.noise_mean = t.noise_mean;
    e.noise_std = t.noise_std;
    e.backgrounds.reserve(images.size());
    for (const auto& img : images) e.backgrounds.push_back(center_crop(img, t.crop, t.crop));

    const size_t npix = e.signal.size();
    for (const auto& b : e.backgrounds) {
        for (int rep = 0; rep < n_noise_reps; ++rep) {
            ImageGrid g0(t.crop, t.crop), g1(t.crop, t.crop);
            for (size_t i = 0; i < npix; ++i) {
                const double n0 = rng.normal(t.noise_mean, t.noise_std);
                g0.data[i] = static_cast<float>(b.data[i] + n0);
            }
            if (paired_noise) {
                for (size_t i = 0; i < npix; ++i)
                    g1.data[i] = g0.data[i] + e.signal.data[i];
            } else {
                for (size_t i = 0; i < npix; ++i) {
                    const double n1 = rng.normal(t.noise_mean, t.noise_std);
                    g1.data[i] = static_cast<float>(b.data[i] + e.signal.data[i] + n1);
                }
            }
            e.g_h0.push_back(std::move(g0));
            e.g_h1.push_back(std::move(g1));
        }
    }
    return e;
}

namespace {

// s^T (K_b + sigma^2 I)^{-1} s by SPD factorization.
double snr_quadform(const std::vector<ImageGrid>& backgrounds, const Eigen::VectorXd& delta,
                    double noise_std) {
    const int n = static_cast<int>(backgrounds.size());
    if (n < 2) throw ConfigError("hotelling_snr: need at least 2 backgrounds");
    const Eigen::Index d = static_cast<Eigen::Index>(backgrounds[0].size());

    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = static_cast<double>(backgrounds[i].data[j]);
    x.rowwise() -= x.colwise().mean();
    Eigen::MatrixXd k = (x.transpose() * x) / static_cast<double>(n - 1);
    k.diagonal().array() += noise_std * noise_std;

    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success)
        throw DivergenceError("hotelling_snr: SPD factorization failed (should not happen with noise_std > 0)");
    const Eigen::VectorXd w = llt.solve(delta);
    return delta.dot(w);
}

Eigen::VectorXd grid_to_vec(const ImageGrid& g) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(g.data[i]);
    return v;
}

}  // namespace

double hotelling_snr(const HypothesisEnsemble& e) {
    return std::sqrt(snr_quadform(e.backgrounds, grid_to_vec(e.signal), e.noise_std));
}

double hotelling_snr_empirical(const HypothesisEnsemble& e) {
    if (e.g_h0.empty() || e.g_h0.size() != e.g_h1.size())
        throw ConfigError("hotelling_snr_empirical: missing realized measurements");
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.signal.size()));
    for (size_t i = 0; i < e.g_h0.size(); ++i)
        delta += grid_to_vec(e.g_h1[i]) - grid_to_vec(e.g_h0[i]);
    delta /= static_cast<double>(e.g_h0.size());
    return std::sqrt(snr_quadform(e.backgrounds, delta, e.noise_std));
}

TaskSuiteResult run_task_suite(const std::vector<ImageGrid>& real_images,
                               const std::vector<ImageGrid>& pix2pix_images,
                               const std::vector<ImageGrid>& ambient_images,
                               const std::vector<DetectionTask>& tasks) {
    if (real_images.size() != pix2pix_images.size() || real_images.size() != ambient_images.size())
        throw ConfigError("run_task_suite: image sets must have equal counts");
    TaskSuiteResult r;
    r.tasks = tasks;
    const std::vector<ImageGrid>* sets[3] = {&real_images, &pix2pix_images, &ambient_images};
    for (const auto& t : tasks) {
        validate(t);
        const Eigen::VectorXd s = grid_to_vec(make_signal(t));
        std::array<double, 3> row{};
        for (int src = 0; src < 3; ++src) {
            std::vector<ImageGrid> crops;
            crops.reserve(sets[src]->size());
            for (const auto& img : *sets[src]) crops.push_back(center_crop(img, t.crop, t.crop));
            row[src] = std::sqrt(snr_quadform(crops, s, t.noise_std));
        }
        r.snr.push_back(row);
    }
    return r;
}

void write_suite_csv(const std::filesystem::path& path, const TaskSuiteResult& r) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("write_suite_csv: cannot open " + path.string());
    f << "task_id,source,snr_ho\n";
    char row[96];
    for (size_t i = 0; i < r.tasks.size(); ++i)
        for (int src = 0; src < 3; ++src) {
            std::snprintf(row, sizeof(row), "%d,%s,%.17g", r.tasks[i].id,
                          TaskSuiteResult::sources[src], r.snr[i][src]);
            f << row << "\n";
        }
    if (!f) throw IoError("write_suite_csv: write failed: " + path.string());
}

json suite_to_json(const TaskSuiteResult& r) {
    json arr = json::array();
    for (size_t i = 0; i < r.tasks.size(); ++i)
        arr.push_back({{"task_id", r.tasks[i].id},
                       {"real", r.snr[i][0]},
                       {"pix2pix", r.snr[i][1]},
                       {"ambient", r.snr[i][2]}});
    return json{{"tasks", tasks_to_json(r.tasks)}, {"snr_ho", arr}};
}

}  // namespace ambient::observer
