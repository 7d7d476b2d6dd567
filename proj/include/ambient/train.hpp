#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "ambient/adam.hpp"
#include "ambient/degradation.hpp"
#include "ambient/networks.hpp"
#include "ambient/phantom.hpp"

namespace ambient::gan {

enum class Mode { Pix2Pix, Ambient };
enum class L1Target { Measurement, Clean };

struct TrainConfig {
    Mode mode = Mode::Pix2Pix;
    double lambda_l1 = 1.0;
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int batch_size = 4;
    long total_iters = 2000;
    // Mirrored inside the training graph in ambient mode; the canonical JSON
    // tree in the dataset manifest is the usual source for this field.
    degrade::DegradationOp target_degradation = degrade::DegradationOp::identity();
    L1Target l1_target = L1Target::Measurement;
    bool non_saturating_g = true;    // -log D(fake) instead of +log(1 - D(fake))
    bool literal_swapped_cgan = false;  // swap real/fake label assignment wholesale
    bool noisy_input = true;         // generator input is source_meas
    std::uint64_t seed = 0;
    long checkpoint_every = 500;
    nn::NetConfig net;
};

void validate(const TrainConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TrainState {
    long iter = 0;
    TrainConfig cfg;
    std::unique_ptr<nn::UNetGenerator> gen;
    std::unique_ptr<nn::PatchDiscriminator> disc;
    nn::AdamState opt_g, opt_d;
    // Running averages (EMA, 0.99) of the per-step losses.
    double avg_loss_d = 0.0, avg_loss_g_adv = 0.0, avg_loss_l1 = 0.0;
};

TrainState init_state(const TrainConfig& cfg);

struct StepLosses {
    double loss_d = 0.0;
    double loss_g_adv = 0.0;
    double loss_l1 = 0.0;
};

struct TrainBatch {
    nn::Tensor x;        // generator input
    nn::Tensor y_meas;   // measured target: real pair member and default L1 target
    nn::Tensor y_clean;  // clean target (oracle ablation only)
};

// Records every tensor pair fed to the discriminator.
struct DiscTap {
    virtual ~DiscTap() = default;
    virtual void on_disc_input(const nn::Tensor& x, const nn::Tensor& second, bool real_pair) = 0;
};

// Value of the adversarial objective in the standard orientation:
//   E[log D(x, y_real)] + E[log(1 - D(x, y_fake))]
// with sigmoid scores clamped to [eps, 1-eps], eps = 1e-7. Forward only.
double loss_cgan(nn::PatchDiscriminator& disc, const nn::Tensor& x, const nn::Tensor& y_real,
                 const nn::Tensor& y_fake);

// Mean absolute difference over all pixels and batch entries.
double loss_l1(const nn::Tensor& a, const nn::Tensor& b);

double total_loss(double adv, double l1, double lambda);

constexpr double kScoreClampEps = 1e-7;

// One alternating D-then-G update. Ambient mode feeds the discriminator
// (x, H_n(G(x))) with fresh per-iteration noise; pix2pix feeds (x, G(x)).
StepLosses train_step(TrainState& st, const TrainBatch& batch, DiscTap* tap = nullptr);

// All grids of a dataset resident in memory.
struct LoadedDataset {
    std::vector<ImageGrid> source_clean, target_clean, source_meas, target_meas;
    std::vector<int> train_indices, test_indices;
    degrade::DegradationOp deg_target = degrade::DegradationOp::identity();

    static LoadedDataset from_manifest(const phantom::DatasetManifest& m);
};

TrainBatch make_batch(const LoadedDataset& data, const std::vector<int>& indices,
                      const TrainConfig& cfg);

// Deterministic batch composition for an iteration: the shuffled train split
// is cycled, reshuffling at every epoch boundary with an epoch-derived
// stream. A pure function of (cfg.seed, iter), which is what makes resume
// trivially exact.
std::vector<int> batch_indices(const TrainConfig& cfg, const std::vector<int>& train_indices,
                               long iter);

// Runs cfg.total_iters steps (resuming from st.iter), writing
// checkpoint.apck and loss_log.csv under out_dir.
void train(TrainState& st, const LoadedDataset& data, const std::filesystem::path& out_dir,
           DiscTap* tap = nullptr);

// Pure generator forward; never applies the degradation.
nn::Tensor translate(nn::UNetGenerator& gen, const nn::Tensor& x);
std::vector<ImageGrid> translate_images(nn::UNetGenerator& gen, const std::vector<ImageGrid>& xs,
                                        int batch_size = 8);

}  // namespace ambient::gan
