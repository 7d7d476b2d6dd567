#include "ambient/networks.hpp"

#include "ambient/errors.hpp"

namespace ambient::nn {

namespace {
constexpr double kInitStd = 0.02;
}

void validate(const NetConfig& cfg) {
    if (cfg.gen_depth < 2) throw ConfigError("NetConfig: gen_depth must be >= 2");
    if (cfg.gen_base < 1 || cfg.disc_base < 1) throw ConfigError("NetConfig: base channels must be >= 1");
    if (cfg.disc_layers < 2) throw ConfigError("NetConfig: disc_layers must be >= 2");
    if (cfg.in_ch < 1 || cfg.out_ch < 1) throw ConfigError("NetConfig: channel counts must be >= 1");
}

// ---------------------------------------------------------------------------
// UNetGenerator

UNetGenerator::EncBlock::EncBlock(int ic, int oc, bool with_norm) : conv(ic, oc, 4, 2, 1) {
    if (with_norm) norm.emplace(oc);
}

UNetGenerator::DecBlock::DecBlock(int ic, int oc, bool with_norm) : conv(ic, oc, 4, 2, 1) {
    if (with_norm) norm.emplace(oc);
}

UNetGenerator::UNetGenerator(const NetConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      final_(2 * cfg.gen_base, cfg.out_ch, 4, 2, 1) {
    validate(cfg);
    const int depth = cfg.gen_depth;
    auto level_ch = [&](int level) { return cfg.gen_base << (level - 1); };  // level 1..depth

    enc_.reserve(depth);
    enc_.emplace_back(cfg.in_ch, level_ch(1), /*with_norm=*/false);
    for (int level = 2; level <= depth; ++level)
        enc_.emplace_back(level_ch(level - 1), level_ch(level), /*with_norm=*/true);

    dec_.reserve(depth - 1);
    for (int j = 0; j <= depth - 2; ++j) {
        const int out_level = depth - 1 - j;  // produces c_{out_level}
        const int ic = (j == 0) ? level_ch(depth) : 2 * level_ch(depth - j);
        dec_.emplace_back(ic, level_ch(out_level), /*with_norm=*/true);
    }

    for (auto& b : enc_) b.conv.init(init_rng, kInitStd);
    for (auto& b : dec_) b.conv.init(init_rng, kInitStd);
    final_.init(init_rng, kInitStd);
}

Tensor UNetGenerator::forward(const Tensor& x) {
    const int depth = cfg_.gen_depth;
    if (x.h % (1 << depth) != 0 || x.w % (1 << depth) != 0)
        throw ConfigError("generator: input size must be divisible by 2^depth");

    std::vector<Tensor> skips;
    skips.reserve(depth);
    Tensor a = x;
    for (auto& b : enc_) {
        a = b.conv.forward(a);
        if (b.norm) a = b.norm->forward(a);
        a = b.act.forward(a);
        skips.push_back(a);
    }

    Tensor u = skips.back();
    for (std::size_t j = 0; j < dec_.size(); ++j) {
        auto& b = dec_[j];
        u = b.conv.forward(u);
        if (b.norm) u = b.norm->forward(u);
        u = b.act.forward(u);
        u = concat_channels(u, skips[dec_.size() - 1 - j]);
    }
    return out_act_.forward(final_.forward(u));
}

Tensor UNetGenerator::backward(const Tensor& gy) {
    const int depth = cfg_.gen_depth;
    Tensor g = final_.backward(out_act_.backward(gy));

    std::vector<Tensor> skip_grads(depth - 1);
    for (int j = static_cast<int>(dec_.size()) - 1; j >= 0; --j) {
        auto& b = dec_[j];
        Tensor gd, gs;
        split_channels(g, g.c / 2, gd, gs);
        skip_grads[dec_.size() - 1 - j] = std::move(gs);
        gd = b.act.backward(gd);
        if (b.norm) gd = b.norm->backward(gd);
        g = b.conv.backward(gd);
    }

    // g is now the gradient w.r.t. the bottleneck activation; fold the skip
    // consumers back in while walking the encoder in reverse.
    for (int i = depth - 1; i >= 0; --i) {
        if (i != depth - 1) {
            const Tensor& extra = skip_grads[i];
            for (std::size_t t = 0; t < g.v.size(); ++t) g.v[t] += extra.v[t];
        }
        auto& b = enc_[i];
        g = b.act.backward(g);
        if (b.norm) g = b.norm->backward(g);
        g = b.conv.backward(g);
    }
    return g;
}

void UNetGenerator::zero_grad() {
    for (auto& b : enc_) {
        b.conv.zero_grad();
        if (b.norm) b.norm->zero_grad();
    }
    for (auto& b : dec_) {
        b.conv.zero_grad();
        if (b.norm) b.norm->zero_grad();
    }
    final_.zero_grad();
}

std::vector<ParamRef> UNetGenerator::params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
        auto p = enc_[i].conv.params("gen.enc" + std::to_string(i));
        out.insert(out.end(), p.begin(), p.end());
        if (enc_[i].norm) {
            auto q = enc_[i].norm->params("gen.enc" + std::to_string(i) + ".norm");
            out.insert(out.end(), q.begin(), q.end());
        }
    }
    for (std::size_t i = 0; i < dec_.size(); ++i) {
        auto p = dec_[i].conv.params("gen.dec" + std::to_string(i));
        out.insert(out.end(), p.begin(), p.end());
        if (dec_[i].norm) {
            auto q = dec_[i].norm->params("gen.dec" + std::to_string(i) + ".norm");
            out.insert(out.end(), q.begin(), q.end());
        }
    }
    auto p = final_.params("gen.final");
    out.insert(out.end(), p.begin(), p.end());
    return out;
}

// ---------------------------------------------------------------------------
// PatchDiscriminator

PatchDiscriminator::Block::Block(int ic, int oc, int stride, bool with_norm, bool with_act)
    : conv(ic, oc, 4, stride, 1) {
    if (with_norm) norm.emplace(oc);
    if (with_act) act.emplace(0.2);
}

PatchDiscriminator::PatchDiscriminator(const NetConfig& cfg, Rng& init_rng) : cfg_(cfg) {
    validate(cfg);
    const int L = cfg.disc_layers;
    blocks_.reserve(L);
    blocks_.emplace_back(2 * cfg.in_ch, cfg.disc_base, 2, false, true);
    for (int i = 1; i <= L - 2; ++i)
        blocks_.emplace_back(cfg.disc_base << (i - 1), cfg.disc_base << i, 2, true, true);
    blocks_.emplace_back(cfg.disc_base << (L - 2), 1, 1, false, false);
    for (auto& b : blocks_) b.conv.init(init_rng, kInitStd);
}

Tensor PatchDiscriminator::forward(const Tensor& x, const Tensor& y) {
    if (x.n != y.n || x.h != y.h || x.w != y.w)
        throw ConfigError("discriminator: pair dimension mismatch");
    in_split_ = x.c;
    Tensor a = concat_channels(x, y);
    for (auto& b : blocks_) {
        a = b.conv.forward(a);
        if (b.norm) a = b.norm->forward(a);
        if (b.act) a = b.act->forward(a);
    }
    return a;  // raw logits
}

void PatchDiscriminator::backward(const Tensor& glogits, Tensor& gx, Tensor& gy) {
    Tensor g = glogits;
    for (int i = static_cast<int>(blocks_.size()) - 1; i >= 0; --i) {
        auto& b = blocks_[i];
        if (b.act) g = b.act->backward(g);
        if (b.norm) g = b.norm->backward(g);
        g = b.conv.backward(g);
    }
    split_channels(g, in_split_, gx, gy);
}

void PatchDiscriminator::zero_grad() {
    for (auto& b : blocks_) {
        b.conv.zero_grad();
        if (b.norm) b.norm->zero_grad();
    }
}

std::vector<ParamRef> PatchDiscriminator::params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        auto p = blocks_[i].conv.params("disc.l" + std::to_string(i));
        out.insert(out.end(), p.begin(), p.end());
        if (blocks_[i].norm) {
            auto q = blocks_[i].norm->params("disc.l" + std::to_string(i) + ".norm");
            out.insert(out.end(), q.begin(), q.end());
        }
    }
    return out;
}

std::size_t param_count(const std::vector<ParamRef>& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p.value->size();
    return n;
}

}  // namespace ambient::nn
