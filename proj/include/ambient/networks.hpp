#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ambient/layers.hpp"

namespace ambient::nn {

struct NetConfig {
    int gen_depth = 4;    // encoder levels; input must be divisible by 2^depth
    int gen_base = 32;    // channels after the first encoder conv
    int disc_layers = 3;  // total convs in the patch classifier
    int disc_base = 32;
    int in_ch = 1;
    int out_ch = 1;
};

void validate(const NetConfig& cfg);

// Encoder-decoder with skip connections; 4x4 convs, stride-2 down/up,
// instance norm except on the outermost layers, tanh output mapped to [0,1].
class UNetGenerator {
  public:
    UNetGenerator(const NetConfig& cfg, Rng& init_rng);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);  // accumulates parameter grads
    void zero_grad();
    std::vector<ParamRef> params();
    const NetConfig& config() const { return cfg_; }

  private:
    struct EncBlock {
        Conv2d conv;
        std::optional<InstanceNorm2d> norm;
        LeakyReLU act{0.2};
        EncBlock(int ic, int oc, bool with_norm);
    };
    struct DecBlock {
        ConvTranspose2d conv;
        std::optional<InstanceNorm2d> norm;
        LeakyReLU act{0.0};  // plain ReLU
        DecBlock(int ic, int oc, bool with_norm);
    };

    NetConfig cfg_;
    std::vector<EncBlock> enc_;   // outermost first
    std::vector<DecBlock> dec_;   // innermost first
    ConvTranspose2d final_;
    Tanh01 out_act_;
};

// Patch classifier over channel-concatenated (x, y) pairs; returns a map of
// raw logits. Sigmoid (with clamping) is applied by the loss functions.
class PatchDiscriminator {
  public:
    PatchDiscriminator(const NetConfig& cfg, Rng& init_rng);

    Tensor forward(const Tensor& x, const Tensor& y);
    // Returns gradients w.r.t. both inputs of the pair.
    void backward(const Tensor& glogits, Tensor& gx, Tensor& gy);
    void zero_grad();
    std::vector<ParamRef> params();

  private:
    struct Block {
        Conv2d conv;
        std::optional<InstanceNorm2d> norm;
        std::optional<LeakyReLU> act;
        Block(int ic, int oc, int stride, bool with_norm, bool with_act);
    };
    NetConfig cfg_;
    std::vector<Block> blocks_;
    int in_split_ = 0;  // channels of x within the concatenated input
};

// Number of scalar parameters across a param list.
std::size_t param_count(const std::vector<ParamRef>& params);

}  // namespace ambient::nn
