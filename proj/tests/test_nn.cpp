#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "ambient/adam.hpp"
#include "ambient/errors.hpp"
#include "ambient/layers.hpp"
#include "ambient/networks.hpp"
#include "ambient/train.hpp"
#include "test_util.hpp"

using namespace ambient;
using nn::Tensor;

namespace {

Tensor random_tensor(int n, int c, int h, int w, Rng& rng, double scale = 1.0) {
    Tensor t(n, c, h, w);
    for (auto& v : t.v) v = scale * (rng.uniform() - 0.5);
    return t;
}

// Checks every parameter gradient of `loss` (which must run forward+backward
// and leave gradients accumulated) against central differences of `eval`
// (forward-only). Returns max observed mismatch count.
int check_param_grads(const std::vector<nn::ParamRef>& params,
                      const std::function<double()>& loss_and_backward,
                      const std::function<double()>& eval, double h = 1e-4,
                      double rel_tol = 1e-3, double abs_tol = 1e-5) {
    loss_and_backward();
    int bad = 0;
    for (const auto& p : params) {
        for (std::size_t j = 0; j < p.value->v.size(); ++j) {
            const double analytic = p.grad->v[j];
            const double numeric = oracle::central_diff(eval, p.value->v[j], h);
            if (!oracle::grad_close(analytic, numeric, rel_tol, abs_tol)) {
                ++bad;
                if (bad < 5)
                    MESSAGE("grad mismatch " << p.name << "[" << j << "]: analytic " << analytic
                                             << " numeric " << numeric);
            }
        }
    }
    return bad;
}

}  // namespace

TEST_CASE("conv2d forward/backward against finite differences") {
    Rng rng(1, 0);
    nn::Conv2d conv(2, 3, 4, 2, 1);
    conv.init(rng, 0.5);
    Tensor x = random_tensor(2, 2, 8, 8, rng);

    auto eval = [&] {
        Tensor y = conv.forward(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * std::sin(0.1 * i);
        return acc;
    };
    auto loss_bwd = [&] {
        conv.zero_grad();
        Tensor y = conv.forward(x);
        Tensor gy = Tensor::zeros_like(y);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) {
            gy.v[i] = std::sin(0.1 * i);
            acc += y.v[i] * gy.v[i];
        }
        Tensor gx = conv.backward(gy);
        // input gradient spot check
        for (int t = 0; t < 20; ++t) {
            const std::size_t j = (t * 7919) % x.v.size();
            const double num = oracle::central_diff(eval, x.v[j], 1e-4);
            CHECK(oracle::grad_close(gx.v[j], num, 1e-3, 1e-5));
        }
        return acc;
    };
    CHECK(check_param_grads(conv.params("conv"), loss_bwd, eval) == 0);
}

TEST_CASE("conv transpose forward/backward against finite differences") {
    Rng rng(2, 0);
    nn::ConvTranspose2d conv(3, 2, 4, 2, 1);
    conv.init(rng, 0.5);
    Tensor x = random_tensor(2, 3, 4, 4, rng);

    auto eval = [&] {
        Tensor y = conv.forward(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * std::cos(0.05 * i);
        return acc;
    };
    auto loss_bwd = [&] {
        conv.zero_grad();
        Tensor y = conv.forward(x);
        CHECK(y.h == 8);  // (4-1)*2 - 2 + 4
        Tensor gy = Tensor::zeros_like(y);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) {
            gy.v[i] = std::cos(0.05 * i);
            acc += y.v[i] * gy.v[i];
        }
        Tensor gx = conv.backward(gy);
        for (int t = 0; t < 20; ++t) {
            const std::size_t j = (t * 104729) % x.v.size();
            const double num = oracle::central_diff(eval, x.v[j], 1e-4);
            CHECK(oracle::grad_close(gx.v[j], num, 1e-3, 1e-5));
        }
        return acc;
    };
    CHECK(check_param_grads(conv.params("convT"), loss_bwd, eval) == 0);
}

TEST_CASE("instance norm backward against finite differences") {
    Rng rng(3, 0);
    nn::InstanceNorm2d norm(3);
    norm.gamma.v = {1.2, 0.8, 1.0};
    norm.beta.v = {0.1, -0.2, 0.0};
    Tensor x = random_tensor(2, 3, 5, 5, rng, 2.0);

    auto eval = [&] {
        Tensor y = norm.forward(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * std::sin(0.3 * i);
        return acc;
    };
    auto loss_bwd = [&] {
        norm.zero_grad();
        Tensor y = norm.forward(x);
        Tensor gy = Tensor::zeros_like(y);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) {
            gy.v[i] = std::sin(0.3 * i);
            acc += y.v[i] * gy.v[i];
        }
        Tensor gx = norm.backward(gy);
        for (int t = 0; t < 25; ++t) {
            const std::size_t j = (t * 31) % x.v.size();
            const double num = oracle::central_diff(eval, x.v[j], 1e-5);
            CHECK(oracle::grad_close(gx.v[j], num, 1e-3, 1e-6));
        }
        return acc;
    };
    CHECK(check_param_grads(norm.params("in"), loss_bwd, eval, 1e-5, 1e-3, 1e-6) == 0);
}

TEST_CASE("measurement blur backward is the exact adjoint") {
    Rng rng(4, 0);
    nn::MeasurementGraph blur(degrade::DegradationOp::gaussian_blur(1.2));
    const Tensor x = random_tensor(2, 1, 9, 9, rng);
    const Tensor u = random_tensor(2, 1, 9, 9, rng);
    Rng unused(0, 0);
    const Tensor bx = blur.forward(x, unused);
    const Tensor btu = blur.backward(u);
    // <Bx, u> == <x, B^T u>
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        lhs += bx.v[i] * u.v[i];
        rhs += x.v[i] * btu.v[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("generator shape contract and determinism") {
    nn::NetConfig cfg;
    cfg.gen_depth = 4;
    cfg.gen_base = 8;
    Rng init(42, 0);
    nn::UNetGenerator gen(cfg, init);
    Rng rng(5, 0);
    const Tensor x = random_tensor(4, 1, 64, 64, rng, 1.0);
    const Tensor y1 = gen.forward(x);
    CHECK(y1.n == 4);
    CHECK(y1.c == 1);
    CHECK(y1.h == 64);
    CHECK(y1.w == 64);
    for (double v : y1.v) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const Tensor y2 = gen.forward(x);
    for (std::size_t i = 0; i < y1.v.size(); ++i) CHECK(y1.v[i] == y2.v[i]);

    Tensor bad = random_tensor(1, 1, 24, 24, rng);  // not divisible by 16
    CHECK_THROWS_AS(gen.forward(bad), ConfigError);
}

TEST_CASE("generator input gradient matches finite differences") {
    nn::NetConfig cfg;
    cfg.gen_depth = 2;
    cfg.gen_base = 2;
    Rng init(1, 0);
    nn::UNetGenerator gen(cfg, init);
    Rng rng(6, 0);
    Tensor x = random_tensor(1, 1, 8, 8, rng);

    auto eval = [&] {
        const Tensor y = gen.forward(x);
        double acc = 0.0;
        for (double v : y.v) acc += v;
        return acc;
    };
    gen.zero_grad();
    const Tensor y = gen.forward(x);
    Tensor ones(y.n, y.c, y.h, y.w);
    std::fill(ones.v.begin(), ones.v.end(), 1.0);
    const Tensor gx = gen.backward(ones);
    for (std::size_t j = 0; j < x.v.size(); ++j) {
        const double num = oracle::central_diff(eval, x.v[j], 1e-3);
        CHECK(oracle::grad_close(gx.v[j], num, 1e-3, 1e-6));
    }
}

TEST_CASE("deeper generator skip wiring passes an input-gradient check") {
    nn::NetConfig cfg;
    cfg.gen_depth = 3;
    cfg.gen_base = 2;
    Rng init(21, 0);
    nn::UNetGenerator gen(cfg, init);
    Rng rng(22, 0);
    Tensor x = random_tensor(1, 1, 16, 16, rng);

    auto eval = [&] {
        const Tensor y = gen.forward(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * std::sin(0.2 * i);
        return acc;
    };
    gen.zero_grad();
    const Tensor y = gen.forward(x);
    Tensor gy = Tensor::zeros_like(y);
    for (std::size_t i = 0; i < gy.v.size(); ++i) gy.v[i] = std::sin(0.2 * i);
    const Tensor gx = gen.backward(gy);
    for (int t = 0; t < 40; ++t) {
        const std::size_t j = (t * 6007) % x.v.size();
        const double num = oracle::central_diff(eval, x.v[j], 1e-4);
        CHECK(oracle::grad_close(gx.v[j], num, 1e-3, 1e-6));
    }
    // and a sample of parameter gradients through all three levels; the
    // small step keeps central differences off the activation kinks
    auto params = gen.params();
    int checked = 0;
    for (auto& p : params) {
        const std::size_t j = p.value->v.size() / 2;
        const double analytic = p.grad->v[j];
        const double num = oracle::central_diff(eval, p.value->v[j], 1e-5);
        CHECK(oracle::grad_close(analytic, num, 1e-3, 1e-6));
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("discriminator emits a patch map and separates pairs") {
    nn::NetConfig cfg;
    cfg.disc_layers = 3;
    cfg.disc_base = 8;
    Rng init(7, 0);
    nn::PatchDiscriminator disc(cfg, init);
    Rng rng(8, 0);
    const Tensor x = random_tensor(2, 1, 64, 64, rng);
    const Tensor y = random_tensor(2, 1, 64, 64, rng);
    const Tensor z = disc.forward(x, y);
    CHECK(z.c == 1);
    CHECK(z.h * z.w > 1);  // patch-wise, not a global scalar

    const Tensor y2 = random_tensor(2, 1, 64, 64, rng);
    const Tensor z2 = disc.forward(x, y2);
    double diff = 0.0;
    for (std::size_t i = 0; i < z.v.size(); ++i) diff += std::abs(z.v[i] - z2.v[i]);
    CHECK(diff > 0.0);  // conditioning on the second argument is not degenerate
}

TEST_CASE("full-net parameter gradients of the total losses (<=1k params, 8x8)") {
    nn::NetConfig net;
    net.gen_depth = 2;
    net.gen_base = 2;
    net.disc_layers = 3;
    net.disc_base = 2;

    gan::TrainConfig cfg;
    cfg.net = net;
    cfg.mode = gan::Mode::Ambient;
    cfg.target_degradation = degrade::DegradationOp::compose(
        {degrade::DegradationOp::gaussian_blur(0.8),
         degrade::DegradationOp::additive_gaussian(0.0, 0.05)});
    cfg.lambda_l1 = 1.0;
    cfg.seed = 99;

    gan::TrainState st = gan::init_state(cfg);
    CHECK(nn::param_count(st.gen->params()) <= 1000);
    CHECK(nn::param_count(st.disc->params()) <= 1000);

    Rng rng(10, 0);
    const Tensor x = random_tensor(2, 1, 8, 8, rng);

    nn::MeasurementGraph measure(cfg.target_degradation);
    auto make_yhat = [&](const Tensor& y_c) {
        Rng noise(cfg.seed, 1234);  // fixed draw so FD sees a deterministic graph
        return measure.forward(y_c, noise);
    };

    // Keep |y_hat - y_meas| bounded away from the L1 kink so central
    // differences never straddle a sign flip.
    Tensor y_meas = make_yhat(st.gen->forward(x));
    for (std::size_t i = 0; i < y_meas.v.size(); ++i)
        y_meas.v[i] += (i % 2 == 0) ? 0.15 : -0.15;

    // Generator objective: -mean log D(x, H(G(x))) + lambda * L1(H(G(x)), y_meas)
    auto g_eval = [&] {
        const Tensor y_hat = make_yhat(st.gen->forward(x));
        const Tensor z = st.disc->forward(x, y_hat);
        double adv = 0.0;
        for (double v : z.v) adv -= std::log(1.0 / (1.0 + std::exp(-v)));
        adv /= static_cast<double>(z.size());
        return adv + cfg.lambda_l1 * gan::loss_l1(y_hat, y_meas);
    };
    auto g_loss_bwd = [&] {
        st.gen->zero_grad();
        st.disc->zero_grad();
        const Tensor y_c = st.gen->forward(x);
        const Tensor y_hat = make_yhat(y_c);
        const Tensor z = st.disc->forward(x, y_hat);
        Tensor gz = Tensor::zeros_like(z);
        double adv = 0.0;
        const double n = static_cast<double>(z.size());
        for (std::size_t i = 0; i < z.v.size(); ++i) {
            const double s = 1.0 / (1.0 + std::exp(-z.v[i]));
            adv -= std::log(s);
            gz.v[i] = -(1.0 - s) / n;
        }
        adv /= n;
        Tensor gx_pair, g_yhat;
        st.disc->backward(gz, gx_pair, g_yhat);
        const double l1 = gan::loss_l1(y_hat, y_meas);
        const double inv = 1.0 / static_cast<double>(y_hat.size());
        for (std::size_t i = 0; i < y_hat.v.size(); ++i) {
            const double d = y_hat.v[i] - y_meas.v[i];
            g_yhat.v[i] += cfg.lambda_l1 * (d > 0 ? inv : (d < 0 ? -inv : 0.0));
        }
        st.gen->backward(measure.backward(g_yhat));
        return adv + cfg.lambda_l1 * l1;
    };
    CHECK(check_param_grads(st.gen->params(), g_loss_bwd, g_eval, 1e-5, 1e-3, 1e-5) == 0);

    // Discriminator objective: -[mean log D(x,y) + mean log(1 - D(x,yhat))]
    const Tensor y_hat_fixed = make_yhat(st.gen->forward(x));
    auto d_eval = [&] {
        const Tensor zr = st.disc->forward(x, y_meas);
        double acc = 0.0;
        for (double v : zr.v) acc -= std::log(1.0 / (1.0 + std::exp(-v)));
        double acc_r = acc / static_cast<double>(zr.size());
        const Tensor zf = st.disc->forward(x, y_hat_fixed);
        acc = 0.0;
        for (double v : zf.v) acc -= std::log(1.0 - 1.0 / (1.0 + std::exp(-v)));
        return acc_r + acc / static_cast<double>(zf.size());
    };
    auto d_loss_bwd = [&] {
        st.disc->zero_grad();
        Tensor gxp, gyp;
        const Tensor zr = st.disc->forward(x, y_meas);
        Tensor gzr = Tensor::zeros_like(zr);
        double lr_acc = 0.0;
        const double nr = static_cast<double>(zr.size());
        for (std::size_t i = 0; i < zr.v.size(); ++i) {
            const double s = 1.0 / (1.0 + std::exp(-zr.v[i]));
            lr_acc -= std::log(s);
            gzr.v[i] = -(1.0 - s) / nr;
        }
        st.disc->backward(gzr, gxp, gyp);
        const Tensor zf = st.disc->forward(x, y_hat_fixed);
        Tensor gzf = Tensor::zeros_like(zf);
        double lf_acc = 0.0;
        const double nf = static_cast<double>(zf.size());
        for (std::size_t i = 0; i < zf.v.size(); ++i) {
            const double s = 1.0 / (1.0 + std::exp(-zf.v[i]));
            lf_acc -= std::log(1.0 - s);
            gzf.v[i] = s / nf;
        }
        st.disc->backward(gzf, gxp, gyp);
        return lr_acc / nr + lf_acc / nf;
    };
    CHECK(check_param_grads(st.disc->params(), d_loss_bwd, d_eval, 1e-5, 1e-3, 1e-5) == 0);
}

TEST_CASE("adam matches the scalar hand-rolled recurrence") {
    Tensor theta(1, 1, 1, 1), grad(1, 1, 1, 1);
    theta.v[0] = 0.5;
    std::vector<nn::ParamRef> params{{"p", &theta, &grad}};
    nn::AdamState st;
    const nn::AdamConfig cfg{0.1, 0.9, 0.99, 1e-8};

    double ref_theta = 0.5, m = 0.0, v = 0.0;
    const double g = 0.3;  // fixed gradient
    for (int t = 1; t <= 25; ++t) {
        grad.v[0] = g;
        adam_step(params, st, cfg);
        m = 0.9 * m + 0.1 * g;
        v = 0.99 * v + 0.01 * g * g;
        const double mhat = m / (1.0 - std::pow(0.9, t));
        const double vhat = v / (1.0 - std::pow(0.99, t));
        ref_theta -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
        CHECK(theta.v[0] == doctest::Approx(ref_theta).epsilon(1e-12));
    }
    // with constant gradient the bias-corrected step is ~ -lr * sign(g)
    CHECK(std::abs((0.5 - theta.v[0]) / 25.0) == doctest::Approx(0.1).epsilon(0.01));
}
