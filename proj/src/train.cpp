#include "ambient/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "ambient/checkpoint.hpp"
#include "ambient/errors.hpp"

namespace ambient::gan {

using nlohmann::json;
using nn::Tensor;

namespace {

constexpr std::uint64_t kStreamInit = 0x494E4954;     // "INIT"
constexpr std::uint64_t kStreamShuffle = 0x53484646;  // "SHFF"
constexpr std::uint64_t kStreamDegrade = 0x44454749;  // "DEGI"

constexpr double kEmaDecay = 0.99;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_score(double s) {
    if (s < kScoreClampEps) return kScoreClampEps;
    if (s > 1.0 - kScoreClampEps) return 1.0 - kScoreClampEps;
    return s;
}

// loss = -mean log sc(z) over the map ("this should score 1"); grad w.r.t. z.
double push_up(const Tensor& z, Tensor& gz) {
    const double n = static_cast<double>(z.size());
    gz = Tensor::zeros_like(z);
    double loss = 0.0;
    for (std::size_t j = 0; j < z.v.size(); ++j) {
        const double s = sigmoid(z.v[j]);
        loss -= std::log(clamp_score(s));
        if (s > kScoreClampEps && s < 1.0 - kScoreClampEps) gz.v[j] = -(1.0 - s) / n;
    }
    return loss / n;
}

// loss = -mean log(1 - sc(z)) ("this should score 0"); grad w.r.t. z.
double push_down(const Tensor& z, Tensor& gz) {
    const double n = static_cast<double>(z.size());
    gz = Tensor::zeros_like(z);
    double loss = 0.0;
    for (std::size_t j = 0; j < z.v.size(); ++j) {
        const double s = sigmoid(z.v[j]);
        loss -= std::log(1.0 - clamp_score(s));
        if (s > kScoreClampEps && s < 1.0 - kScoreClampEps) gz.v[j] = s / n;
    }
    return loss / n;
}

double mean_log_score(const Tensor& z) {
    double acc = 0.0;
    for (double v : z.v) acc += std::log(clamp_score(sigmoid(v)));
    return acc / static_cast<double>(z.size());
}

double mean_log_one_minus_score(const Tensor& z) {
    double acc = 0.0;
    for (double v : z.v) acc += std::log(1.0 - clamp_score(sigmoid(v)));
    return acc / static_cast<double>(z.size());
}

std::string mode_name(Mode m) { return m == Mode::Pix2Pix ? "pix2pix" : "ambient"; }
std::string l1_name(L1Target t) { return t == L1Target::Measurement ? "measurement" : "clean"; }

}  // namespace

void validate(const TrainConfig& cfg) {
    nn::validate(cfg.net);
    degrade::validate(cfg.target_degradation);
    if (!(cfg.lambda_l1 >= 0.0)) throw ConfigError("TrainConfig: lambda_l1 must be >= 0");
    if (!(cfg.lr > 0.0)) throw ConfigError("TrainConfig: lr must be > 0");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0)) throw ConfigError("TrainConfig: beta1 in [0,1)");
    if (!(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) throw ConfigError("TrainConfig: beta2 in [0,1)");
    if (cfg.batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (cfg.total_iters < 0) throw ConfigError("TrainConfig: total_iters must be >= 0");
}

json to_json(const TrainConfig& cfg) {
    return json{{"mode", mode_name(cfg.mode)},
                {"lambda_l1", cfg.lambda_l1},
                {"lr", cfg.lr},
                {"beta1", cfg.beta1},
                {"beta2", cfg.beta2},
                {"batch_size", cfg.batch_size},
                {"total_iters", cfg.total_iters},
                {"target_degradation", degrade::to_json(cfg.target_degradation)},
                {"l1_target", l1_name(cfg.l1_target)},
                {"non_saturating_g", cfg.non_saturating_g},
                {"literal_swapped_cgan", cfg.literal_swapped_cgan},
                {"noisy_input", cfg.noisy_input},
                {"seed", cfg.seed},
                {"checkpoint_every", cfg.checkpoint_every},
                {"net",
                 {{"gen_depth", cfg.net.gen_depth},
                  {"gen_base", cfg.net.gen_base},
                  {"disc_layers", cfg.net.disc_layers},
                  {"disc_base", cfg.net.disc_base},
                  {"in_ch", cfg.net.in_ch},
                  {"out_ch", cfg.net.out_ch}}}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "pix2pix")
        cfg.mode = Mode::Pix2Pix;
    else if (mode == "ambient")
        cfg.mode = Mode::Ambient;
    else
        throw ConfigError("TrainConfig: mode must be pix2pix or ambient");
    cfg.lambda_l1 = j.at("lambda_l1").get<double>();
    cfg.lr = j.at("lr").get<double>();
    cfg.beta1 = j.at("beta1").get<double>();
    cfg.beta2 = j.at("beta2").get<double>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.total_iters = j.at("total_iters").get<long>();
    cfg.target_degradation = degrade::from_json(j.at("target_degradation"));
    const std::string l1t = j.at("l1_target").get<std::string>();
    if (l1t == "measurement")
        cfg.l1_target = L1Target::Measurement;
    else if (l1t == "clean")
        cfg.l1_target = L1Target::Clean;
    else
        throw ConfigError("TrainConfig: l1_target must be measurement or clean");
    cfg.non_saturating_g = j.at("non_saturating_g").get<bool>();
    cfg.literal_swapped_cgan = j.at("literal_swapped_cgan").get<bool>();
    cfg.noisy_input = j.at("noisy_input").get<bool>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.checkpoint_every = j.at("checkpoint_every").get<long>();
    const json& n = j.at("net");
    cfg.net.gen_depth = n.at("gen_depth").get<int>();
    cfg.net.gen_base = n.at("gen_base").get<int>();
    cfg.net.disc_layers = n.at("disc_layers").get<int>();
    cfg.net.disc_base = n.at("disc_base").get<int>();
    cfg.net.in_ch = n.at("in_ch").get<int>();
    cfg.net.out_ch = n.at("out_ch").get<int>();
    if (n.size() != 6) throw ConfigError("TrainConfig: unexpected keys in net");
    if (j.size() != 15) throw ConfigError("TrainConfig: unexpected top-level keys");
    validate(cfg);
    return cfg;
}

TrainState init_state(const TrainConfig& cfg) {
    validate(cfg);
    TrainState st;
    st.cfg = cfg;
    Rng init_rng(cfg.seed, derive_stream(kStreamInit, 0));
    st.gen = std::make_unique<nn::UNetGenerator>(cfg.net, init_rng);
    st.disc = std::make_unique<nn::PatchDiscriminator>(cfg.net, init_rng);
    st.opt_g.init(st.gen->params());
    st.opt_d.init(st.disc->params());
    return st;
}

double loss_cgan(nn::PatchDiscriminator& disc, const Tensor& x, const Tensor& y_real,
                 const Tensor& y_fake) {
    const Tensor z_real = disc.forward(x, y_real);
    const double real_term = mean_log_score(z_real);
    const Tensor z_fake = disc.forward(x, y_fake);
    const double fake_term = mean_log_one_minus_score(z_fake);
    return real_term + fake_term;
}

double loss_l1(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ConfigError("loss_l1: shape mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.v.size(); ++j) acc += std::abs(a.v[j] - b.v[j]);
    return acc / static_cast<double>(a.size());
}

double total_loss(double adv, double l1, double lambda) {
    return adv + lambda * l1;
}

StepLosses train_step(TrainState& st, const TrainBatch& batch, DiscTap* tap) {
    const TrainConfig& cfg = st.cfg;
    if (batch.x.n != cfg.batch_size) throw ConfigError("train_step: batch size mismatch");

    nn::UNetGenerator& gen = *st.gen;
    nn::PatchDiscriminator& disc = *st.disc;
    const nn::AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, 1e-8};

    // Fake sample: one generator forward and one measurement draw per step.
    const Tensor y_c = gen.forward(batch.x);
    Tensor y_hat;
    nn::MeasurementGraph measure(cfg.target_degradation);
    if (cfg.mode == Mode::Ambient) {
        Rng noise_rng(cfg.seed, derive_stream(kStreamDegrade, static_cast<std::uint64_t>(st.iter)));
        y_hat = measure.forward(y_c, noise_rng);
    } else {
        y_hat = y_c;
    }

    // --- Discriminator update. The generator output is detached here.
    disc.zero_grad();
    Tensor gz, gx_unused, gy_unused;

    if (tap) tap->on_disc_input(batch.x, batch.y_meas, /*real_pair=*/true);
    const Tensor z_real = disc.forward(batch.x, batch.y_meas);
    const double loss_real =
        cfg.literal_swapped_cgan ? push_down(z_real, gz) : push_up(z_real, gz);
    disc.backward(gz, gx_unused, gy_unused);

    if (tap) tap->on_disc_input(batch.x, y_hat, /*real_pair=*/false);
    const Tensor z_fake = disc.forward(batch.x, y_hat);
    const double loss_fake =
        cfg.literal_swapped_cgan ? push_up(z_fake, gz) : push_down(z_fake, gz);
    disc.backward(gz, gx_unused, gy_unused);

    const double loss_d = loss_real + loss_fake;
    adam_step(disc.params(), st.opt_d, adam);

    // --- Generator update against the refreshed discriminator.
    gen.zero_grad();
    disc.zero_grad();  // discard gradients the G pass accumulates into D
    if (tap) tap->on_disc_input(batch.x, y_hat, /*real_pair=*/false);
    const Tensor z_fake_g = disc.forward(batch.x, y_hat);

    double loss_g_adv;
    if (cfg.literal_swapped_cgan) {
        // Mechanical reading of the swapped objective: the generator term is
        // +mean log D(x, y_hat), minimized.
        Tensor tmp;
        loss_g_adv = -push_up(z_fake_g, tmp);
        gz = tmp;
        for (double& v : gz.v) v = -v;
    } else if (cfg.non_saturating_g) {
        loss_g_adv = push_up(z_fake_g, gz);
    } else {
        Tensor tmp;
        loss_g_adv = -push_down(z_fake_g, tmp);  // +mean log(1 - D(fake))
        gz = tmp;
        for (double& v : gz.v) v = -v;
    }

    Tensor gx_pair, g_yhat;
    disc.backward(gz, gx_pair, g_yhat);

    // L1 term and its gradient route.
    double l1_value;
    Tensor g_yc;
    if (cfg.l1_target == L1Target::Measurement) {
        l1_value = loss_l1(y_hat, batch.y_meas);
        const double inv_n = 1.0 / static_cast<double>(y_hat.size());
        for (std::size_t j = 0; j < y_hat.v.size(); ++j) {
            const double d = y_hat.v[j] - batch.y_meas.v[j];
            g_yhat.v[j] += cfg.lambda_l1 * (d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0));
        }
        g_yc = (cfg.mode == Mode::Ambient) ? measure.backward(g_yhat) : std::move(g_yhat);
    } else {
        l1_value = loss_l1(y_c, batch.y_clean);
        g_yc = (cfg.mode == Mode::Ambient) ? measure.backward(g_yhat) : std::move(g_yhat);
        const double inv_n = 1.0 / static_cast<double>(y_c.size());
        for (std::size_t j = 0; j < y_c.v.size(); ++j) {
            const double d = y_c.v[j] - batch.y_clean.v[j];
            g_yc.v[j] += cfg.lambda_l1 * (d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0));
        }
    }

    gen.backward(g_yc);
    adam_step(gen.params(), st.opt_g, adam);

    StepLosses out{loss_d, loss_g_adv, l1_value};
    if (!std::isfinite(out.loss_d) || !std::isfinite(out.loss_g_adv) || !std::isfinite(out.loss_l1))
        throw DivergenceError("training diverged at iteration " + std::to_string(st.iter) +
                              " (non-finite loss)");

    if (st.iter == 0) {
        st.avg_loss_d = out.loss_d;
        st.avg_loss_g_adv = out.loss_g_adv;
        st.avg_loss_l1 = out.loss_l1;
    } else {
        st.avg_loss_d = kEmaDecay * st.avg_loss_d + (1.0 - kEmaDecay) * out.loss_d;
        st.avg_loss_g_adv = kEmaDecay * st.avg_loss_g_adv + (1.0 - kEmaDecay) * out.loss_g_adv;
        st.avg_loss_l1 = kEmaDecay * st.avg_loss_l1 + (1.0 - kEmaDecay) * out.loss_l1;
    }
    ++st.iter;
    return out;
}

LoadedDataset LoadedDataset::from_manifest(const phantom::DatasetManifest& m) {
    LoadedDataset d;
    d.train_indices = m.train_indices;
    d.test_indices = m.test_indices;
    d.deg_target = m.deg_target;
    d.source_clean.reserve(m.n_samples);
    for (int i = 0; i < m.n_samples; ++i) {
        auto s = phantom::load_sample(m, i);
        d.source_clean.push_back(std::move(s.source_clean));
        d.target_clean.push_back(std::move(s.target_clean));
        d.source_meas.push_back(std::move(s.source_meas));
        d.target_meas.push_back(std::move(s.target_meas));
    }
    return d;
}

TrainBatch make_batch(const LoadedDataset& data, const std::vector<int>& indices,
                      const TrainConfig& cfg) {
    std::vector<const ImageGrid*> xs, ys_meas, ys_clean;
    for (int idx : indices) {
        xs.push_back(cfg.noisy_input ? &data.source_meas[idx] : &data.source_clean[idx]);
        ys_meas.push_back(&data.target_meas[idx]);
        ys_clean.push_back(&data.target_clean[idx]);
    }
    TrainBatch b;
    b.x = nn::batch_from_images(xs);
    b.y_meas = nn::batch_from_images(ys_meas);
    b.y_clean = nn::batch_from_images(ys_clean);
    return b;
}

std::vector<int> batch_indices(const TrainConfig& cfg, const std::vector<int>& train_indices,
                               long iter) {
    const long n = static_cast<long>(train_indices.size());
    if (n < cfg.batch_size) throw ConfigError("train: train split smaller than batch_size");

    auto epoch_perm = [&](long epoch) {
        std::vector<int> perm = train_indices;
        Rng rng(cfg.seed, derive_stream(kStreamShuffle, static_cast<std::uint64_t>(epoch)));
        for (long i = n - 1; i > 0; --i) {
            const auto j = rng.next_below(static_cast<std::uint64_t>(i + 1));
            std::swap(perm[i], perm[j]);
        }
        return perm;
    };

    std::vector<int> out;
    out.reserve(cfg.batch_size);
    long cached_epoch = -1;
    std::vector<int> perm;
    for (int j = 0; j < cfg.batch_size; ++j) {
        const long pos = iter * cfg.batch_size + j;
        const long epoch = pos / n;
        if (epoch != cached_epoch) {
            perm = epoch_perm(epoch);
            cached_epoch = epoch;
        }
        out.push_back(perm[pos % n]);
    }
    return out;
}

void train(TrainState& st, const LoadedDataset& data, const std::filesystem::path& out_dir,
           DiscTap* tap) {
    validate(st.cfg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("train: cannot create " + out_dir.string());

    const auto log_path = out_dir / "loss_log.csv";

    // Keep rows below the resume point, drop anything at or past it.
    std::vector<std::string> kept_rows;
    if (st.iter > 0) {
        std::ifstream in(log_path);
        std::string line;
        if (in && std::getline(in, line)) {
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const long row_iter = std::strtol(line.c_str(), nullptr, 10);
                if (row_iter < st.iter) kept_rows.push_back(line);
            }
        }
    }
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) throw IoError("train: cannot write " + log_path.string());
    log << "iter,loss_d,loss_g_adv,loss_l1\n";
    for (const auto& r : kept_rows) log << r << "\n";

    char row[160];
    while (st.iter < st.cfg.total_iters) {
        const long iter = st.iter;
        const auto idx = batch_indices(st.cfg, data.train_indices, iter);
        const TrainBatch batch = make_batch(data, idx, st.cfg);
        const StepLosses losses = train_step(st, batch, tap);

        std::snprintf(row, sizeof(row), "%ld,%.17g,%.17g,%.17g", iter, losses.loss_d,
                      losses.loss_g_adv, losses.loss_l1);
        log << row << "\n";

        if (st.cfg.checkpoint_every > 0 && st.iter % st.cfg.checkpoint_every == 0 &&
            st.iter < st.cfg.total_iters)
            save_checkpoint(out_dir / "checkpoint.apck", st);
    }
    log.flush();
    if (!log) throw IoError("train: loss log write failed: " + log_path.string());
    save_checkpoint(out_dir / "checkpoint.apck", st);
}

Tensor translate(nn::UNetGenerator& gen, const Tensor& x) {
    return gen.forward(x);
}

std::vector<ImageGrid> translate_images(nn::UNetGenerator& gen, const std::vector<ImageGrid>& xs,
                                        int batch_size) {
    std::vector<ImageGrid> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); i += batch_size) {
        std::vector<const ImageGrid*> chunk;
        for (std::size_t j = i; j < std::min(xs.size(), i + batch_size); ++j)
            chunk.push_back(&xs[j]);
        const Tensor y = gen.forward(nn::batch_from_images(chunk));
        auto imgs = nn::images_from_batch(y);
        for (auto& im : imgs) out.push_back(std::move(im));
    }
    return out;
}

}  // namespace ambient::gan
