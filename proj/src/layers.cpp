#include "ambient/layers.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "ambient/errors.hpp"

namespace ambient::nn {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;
using MapCM = Eigen::Map<Eigen::MatrixXd>;
using ConstMapCM = Eigen::Map<const Eigen::MatrixXd>;

int conv_out_dim(int in, int k, int stride, int pad) {
    const int num = in + 2 * pad - k;
    if (num < 0 || num % stride != 0)
        throw ConfigError("conv: input size " + std::to_string(in) + " incompatible with kernel/stride/pad");
    return num / stride + 1;
}

// cols is (c*k*k) x (oh*ow), column-major; one sample at a time.
void im2col(const double* x, int c, int h, int w, int k, int stride, int pad, int oh, int ow,
            double* cols) {
    const int rows = c * k * k;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const std::size_t col = static_cast<std::size_t>(oy) * ow + ox;
            double* dst = cols + col * rows;
            for (int ci = 0; ci < c; ++ci) {
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        *dst++ = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                                     ? x[(static_cast<std::size_t>(ci) * h + iy) * w + ix]
                                     : 0.0;
                    }
                }
            }
        }
    }
}

void col2im(const double* cols, int c, int h, int w, int k, int stride, int pad, int oh, int ow,
            double* x) {
    const int rows = c * k * k;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const std::size_t col = static_cast<std::size_t>(oy) * ow + ox;
            const double* src = cols + col * rows;
            for (int ci = 0; ci < c; ++ci) {
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        if (iy >= 0 && iy < h && ix >= 0 && ix < w)
                            x[(static_cast<std::size_t>(ci) * h + iy) * w + ix] += *src;
                        ++src;
                    }
                }
            }
        }
    }
}

void fill_normal(Tensor& t, Rng& rng, double stddev) {
    for (double& v : t.v) v = rng.normal(0.0, stddev);
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_ch_, int out_ch_, int k_, int stride_, int pad_)
    : in_ch(in_ch_), out_ch(out_ch_), k(k_), stride(stride_), pad(pad_),
      weight(out_ch_, in_ch_, k_, k_), bias(out_ch_, 1, 1, 1),
      wgrad(out_ch_, in_ch_, k_, k_), bgrad(out_ch_, 1, 1, 1) {}

void Conv2d::init(Rng& rng, double wstd) {
    fill_normal(weight, rng, wstd);
    bias.zero();
}

Tensor Conv2d::forward(const Tensor& x) {
    if (x.c != in_ch) throw ConfigError("Conv2d: channel mismatch");
    oh_ = conv_out_dim(x.h, k, stride, pad);
    ow_ = conv_out_dim(x.w, k, stride, pad);
    x_ = x;

    const int rows = in_ch * k * k;
    const std::size_t per_sample = static_cast<std::size_t>(rows) * oh_ * ow_;
    cols_.resize(per_sample * x.n);

    Tensor y(x.n, out_ch, oh_, ow_);
    ConstMapRM wm(weight.v.data(), out_ch, rows);
    const std::size_t x_stride = static_cast<std::size_t>(x.c) * x.h * x.w;
    const std::size_t y_stride = static_cast<std::size_t>(out_ch) * oh_ * ow_;
    for (int i = 0; i < x.n; ++i) {
        double* cols = cols_.data() + per_sample * i;
        im2col(x.v.data() + x_stride * i, x.c, x.h, x.w, k, stride, pad, oh_, ow_, cols);
        ConstMapCM cm(cols, rows, static_cast<Eigen::Index>(oh_) * ow_);
        MapRM ym(y.v.data() + y_stride * i, out_ch, static_cast<Eigen::Index>(oh_) * ow_);
        ym.noalias() = wm * cm;
        for (int co = 0; co < out_ch; ++co) ym.row(co).array() += bias.v[co];
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
    const int rows = in_ch * k * k;
    const std::size_t per_sample = static_cast<std::size_t>(rows) * oh_ * ow_;
    Tensor gx(x_.n, x_.c, x_.h, x_.w);

    MapRM gwm(wgrad.v.data(), out_ch, rows);
    ConstMapRM wm(weight.v.data(), out_ch, rows);
    const std::size_t x_stride = static_cast<std::size_t>(x_.c) * x_.h * x_.w;
    const std::size_t y_stride = static_cast<std::size_t>(out_ch) * oh_ * ow_;
    std::vector<double> gcols(per_sample);
    for (int i = 0; i < x_.n; ++i) {
        ConstMapRM gym(gy.v.data() + y_stride * i, out_ch, static_cast<Eigen::Index>(oh_) * ow_);
        ConstMapCM cm(cols_.data() + per_sample * i, rows, static_cast<Eigen::Index>(oh_) * ow_);
        gwm.noalias() += gym * cm.transpose();
        for (int co = 0; co < out_ch; ++co) bgrad.v[co] += gym.row(co).sum();

        MapCM gcm(gcols.data(), rows, static_cast<Eigen::Index>(oh_) * ow_);
        gcm.noalias() = wm.transpose() * gym;
        col2im(gcols.data(), x_.c, x_.h, x_.w, k, stride, pad, oh_, ow_,
               gx.v.data() + x_stride * i);
    }
    return gx;
}

void Conv2d::zero_grad() {
    wgrad.zero();
    bgrad.zero();
}

std::vector<ParamRef> Conv2d::params(const std::string& prefix) {
    return {{prefix + ".weight", &weight, &wgrad}, {prefix + ".bias", &bias, &bgrad}};
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_ch_, int out_ch_, int k_, int stride_, int pad_)
    : in_ch(in_ch_), out_ch(out_ch_), k(k_), stride(stride_), pad(pad_),
      weight(in_ch_, out_ch_, k_, k_), bias(out_ch_, 1, 1, 1),
      wgrad(in_ch_, out_ch_, k_, k_), bgrad(out_ch_, 1, 1, 1) {}

void ConvTranspose2d::init(Rng& rng, double wstd) {
    fill_normal(weight, rng, wstd);
    bias.zero();
}

Tensor ConvTranspose2d::forward(const Tensor& x) {
    if (x.c != in_ch) throw ConfigError("ConvTranspose2d: channel mismatch");
    x_ = x;
    oh_ = (x.h - 1) * stride - 2 * pad + k;
    ow_ = (x.w - 1) * stride - 2 * pad + k;
    if (oh_ <= 0 || ow_ <= 0) throw ConfigError("ConvTranspose2d: non-positive output size");

    const int rows = out_ch * k * k;
    Tensor y(x.n, out_ch, oh_, ow_);
    ConstMapRM wm(weight.v.data(), in_ch, rows);
    const std::size_t x_stride = static_cast<std::size_t>(in_ch) * x.h * x.w;
    const std::size_t y_stride = static_cast<std::size_t>(out_ch) * oh_ * ow_;
    std::vector<double> cols(static_cast<std::size_t>(rows) * x.h * x.w);
    for (int i = 0; i < x.n; ++i) {
        ConstMapRM xm(x.v.data() + x_stride * i, in_ch, static_cast<Eigen::Index>(x.h) * x.w);
        MapCM cm(cols.data(), rows, static_cast<Eigen::Index>(x.h) * x.w);
        cm.noalias() = wm.transpose() * xm;
        // The transposed conv scatters exactly where a (k, stride, pad) conv
        // from [oh, ow] down to [x.h, x.w] would have gathered.
        col2im(cols.data(), out_ch, oh_, ow_, k, stride, pad, x.h, x.w, y.v.data() + y_stride * i);
        MapRM ym(y.v.data() + y_stride * i, out_ch, static_cast<Eigen::Index>(oh_) * ow_);
        for (int co = 0; co < out_ch; ++co) ym.row(co).array() += bias.v[co];
    }
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& gy) {
    const int rows = out_ch * k * k;
    Tensor gx(x_.n, in_ch, x_.h, x_.w);
    ConstMapRM wm(weight.v.data(), in_ch, rows);
    MapRM gwm(wgrad.v.data(), in_ch, rows);
    const std::size_t x_stride = static_cast<std::size_t>(in_ch) * x_.h * x_.w;
    const std::size_t y_stride = static_cast<std::size_t>(out_ch) * oh_ * ow_;
    std::vector<double> cols(static_cast<std::size_t>(rows) * x_.h * x_.w);
    for (int i = 0; i < x_.n; ++i) {
        im2col(gy.v.data() + y_stride * i, out_ch, oh_, ow_, k, stride, pad, x_.h, x_.w,
               cols.data());
        ConstMapCM cm(cols.data(), rows, static_cast<Eigen::Index>(x_.h) * x_.w);
        MapRM gxm(gx.v.data() + x_stride * i, in_ch, static_cast<Eigen::Index>(x_.h) * x_.w);
        gxm.noalias() = wm * cm;

        ConstMapRM xm(x_.v.data() + x_stride * i, in_ch, static_cast<Eigen::Index>(x_.h) * x_.w);
        gwm.noalias() += xm * cm.transpose();
        ConstMapRM gym(gy.v.data() + y_stride * i, out_ch, static_cast<Eigen::Index>(oh_) * ow_);
        for (int co = 0; co < out_ch; ++co) bgrad.v[co] += gym.row(co).sum();
    }
    return gx;
}

void ConvTranspose2d::zero_grad() {
    wgrad.zero();
    bgrad.zero();
}

std::vector<ParamRef> ConvTranspose2d::params(const std::string& prefix) {
    return {{prefix + ".weight", &weight, &wgrad}, {prefix + ".bias", &bias, &bgrad}};
}

// ---------------------------------------------------------------------------
// InstanceNorm2d

InstanceNorm2d::InstanceNorm2d(int ch_)
    : ch(ch_), gamma(ch_, 1, 1, 1), beta(ch_, 1, 1, 1), ggrad(ch_, 1, 1, 1), bgrad(ch_, 1, 1, 1) {
    std::fill(gamma.v.begin(), gamma.v.end(), 1.0);
}

Tensor InstanceNorm2d::forward(const Tensor& x) {
    if (x.c != ch) throw ConfigError("InstanceNorm2d: channel mismatch");
    const int m = x.h * x.w;
    xhat_ = Tensor(x.n, x.c, x.h, x.w);
    inv_std_.assign(static_cast<std::size_t>(x.n) * x.c, 0.0);
    Tensor y(x.n, x.c, x.h, x.w);
    for (int i = 0; i < x.n; ++i) {
        for (int ci = 0; ci < ch; ++ci) {
            const double* xp = &x.v[(static_cast<std::size_t>(i) * ch + ci) * m];
            double mu = 0.0;
            for (int j = 0; j < m; ++j) mu += xp[j];
            mu /= m;
            double var = 0.0;
            for (int j = 0; j < m; ++j) var += (xp[j] - mu) * (xp[j] - mu);
            var /= m;
            const double istd = 1.0 / std::sqrt(var + eps);
            inv_std_[static_cast<std::size_t>(i) * ch + ci] = istd;
            double* xh = &xhat_.v[(static_cast<std::size_t>(i) * ch + ci) * m];
            double* yp = &y.v[(static_cast<std::size_t>(i) * ch + ci) * m];
            const double g = gamma.v[ci], b = beta.v[ci];
            for (int j = 0; j < m; ++j) {
                xh[j] = (xp[j] - mu) * istd;
                yp[j] = g * xh[j] + b;
            }
        }
    }
    return y;
}

Tensor InstanceNorm2d::backward(const Tensor& gy) {
    const int m = xhat_.h * xhat_.w;
    Tensor gx(xhat_.n, xhat_.c, xhat_.h, xhat_.w);
    for (int i = 0; i < xhat_.n; ++i) {
        for (int ci = 0; ci < ch; ++ci) {
            const std::size_t base = (static_cast<std::size_t>(i) * ch + ci) * m;
            const double* gyp = &gy.v[base];
            const double* xh = &xhat_.v[base];
            double* gxp = &gx.v[base];
            const double g = gamma.v[ci];
            const double istd = inv_std_[static_cast<std::size_t>(i) * ch + ci];

            double sum_gy = 0.0, sum_gy_xh = 0.0;
            for (int j = 0; j < m; ++j) {
                sum_gy += gyp[j];
                sum_gy_xh += gyp[j] * xh[j];
            }
            ggrad.v[ci] += sum_gy_xh;
            bgrad.v[ci] += sum_gy;
            const double mean_gy = sum_gy / m;
            const double mean_gy_xh = sum_gy_xh / m;
            for (int j = 0; j < m; ++j)
                gxp[j] = g * istd * (gyp[j] - mean_gy - xh[j] * mean_gy_xh);
        }
    }
    return gx;
}

void InstanceNorm2d::zero_grad() {
    ggrad.zero();
    bgrad.zero();
}

std::vector<ParamRef> InstanceNorm2d::params(const std::string& prefix) {
    return {{prefix + ".gamma", &gamma, &ggrad}, {prefix + ".beta", &beta, &bgrad}};
}

// ---------------------------------------------------------------------------
// Activations

Tensor LeakyReLU::forward(const Tensor& x) {
    x_ = x;
    Tensor y = x;
    for (double& v : y.v)
        if (v < 0.0) v *= alpha;
    return y;
}

Tensor LeakyReLU::backward(const Tensor& gy) const {
    Tensor gx = gy;
    for (std::size_t j = 0; j < gx.v.size(); ++j)
        if (x_.v[j] < 0.0) gx.v[j] *= alpha;
    return gx;
}

Tensor Tanh01::forward(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.v) v = 0.5 * (std::tanh(v) + 1.0);
    y_ = y;
    return y;
}

Tensor Tanh01::backward(const Tensor& gy) const {
    Tensor gx = gy;
    for (std::size_t j = 0; j < gx.v.size(); ++j) {
        const double t = 2.0 * y_.v[j] - 1.0;  // tanh(x)
        gx.v[j] *= 0.5 * (1.0 - t * t);
    }
    return gx;
}

// ---------------------------------------------------------------------------
// Concat

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n != b.n || a.h != b.h || a.w != b.w)
        throw ConfigError("concat_channels: spatial/batch mismatch");
    Tensor y(a.n, a.c + b.c, a.h, a.w);
    const std::size_t plane = static_cast<std::size_t>(a.h) * a.w;
    for (int i = 0; i < a.n; ++i) {
        std::copy_n(&a.v[static_cast<std::size_t>(i) * a.c * plane], a.c * plane,
                    &y.v[static_cast<std::size_t>(i) * y.c * plane]);
        std::copy_n(&b.v[static_cast<std::size_t>(i) * b.c * plane], b.c * plane,
                    &y.v[static_cast<std::size_t>(i) * y.c * plane + a.c * plane]);
    }
    return y;
}

void split_channels(const Tensor& g, int ca, Tensor& ga, Tensor& gb) {
    const int cb = g.c - ca;
    ga = Tensor(g.n, ca, g.h, g.w);
    gb = Tensor(g.n, cb, g.h, g.w);
    const std::size_t plane = static_cast<std::size_t>(g.h) * g.w;
    for (int i = 0; i < g.n; ++i) {
        std::copy_n(&g.v[static_cast<std::size_t>(i) * g.c * plane], ca * plane,
                    &ga.v[static_cast<std::size_t>(i) * ca * plane]);
        std::copy_n(&g.v[static_cast<std::size_t>(i) * g.c * plane + ca * plane], cb * plane,
                    &gb.v[static_cast<std::size_t>(i) * cb * plane]);
    }
}

// ---------------------------------------------------------------------------
// MeasurementGraph

namespace {

void blur_rows(std::vector<double>& buf, int h, int w, const std::vector<double>& kern,
               int radius, std::vector<double>& scratch) {
    for (int y = 0; y < h; ++y) {
        const double* row = &buf[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d)
                acc += kern[d + radius] * row[degrade::reflect_index(x + d, w)];
            scratch[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    buf.swap(scratch);
}

void blur_cols(std::vector<double>& buf, int h, int w, const std::vector<double>& kern,
               int radius, std::vector<double>& scratch) {
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d)
                acc += kern[d + radius] * buf[static_cast<std::size_t>(degrade::reflect_index(y + d, h)) * w + x];
            scratch[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    buf.swap(scratch);
}

// Adjoints of the passes above: gather loops become scatter loops.
void blur_rows_adj(std::vector<double>& buf, int h, int w, const std::vector<double>& kern,
                   int radius, std::vector<double>& scratch) {
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double g = buf[static_cast<std::size_t>(y) * w + x];
            for (int d = -radius; d <= radius; ++d)
                scratch[static_cast<std::size_t>(y) * w + degrade::reflect_index(x + d, w)] +=
                    kern[d + radius] * g;
        }
    }
    buf.swap(scratch);
}

void blur_cols_adj(std::vector<double>& buf, int h, int w, const std::vector<double>& kern,
                   int radius, std::vector<double>& scratch) {
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double g = buf[static_cast<std::size_t>(y) * w + x];
            for (int d = -radius; d <= radius; ++d)
                scratch[static_cast<std::size_t>(degrade::reflect_index(y + d, h)) * w + x] +=
                    kern[d + radius] * g;
        }
    }
    buf.swap(scratch);
}

void tensor_blur(Tensor& t, double sigma, bool adjoint) {
    if (sigma <= 0.0) return;
    const auto kern = degrade::gaussian_kernel(sigma);
    const int radius = static_cast<int>(kern.size() / 2);
    const std::size_t plane = static_cast<std::size_t>(t.h) * t.w;
    std::vector<double> buf(plane), scratch(plane);
    for (int i = 0; i < t.n; ++i) {
        for (int ci = 0; ci < t.c; ++ci) {
            double* p = &t.v[(static_cast<std::size_t>(i) * t.c + ci) * plane];
            std::copy_n(p, plane, buf.begin());
            if (!adjoint) {
                blur_rows(buf, t.h, t.w, kern, radius, scratch);
                blur_cols(buf, t.h, t.w, kern, radius, scratch);
            } else {
                blur_cols_adj(buf, t.h, t.w, kern, radius, scratch);
                blur_rows_adj(buf, t.h, t.w, kern, radius, scratch);
            }
            std::copy_n(buf.begin(), plane, p);
        }
    }
}

void measure_forward(const degrade::DegradationOp& op, Tensor& t, Rng& rng) {
    using degrade::OpKind;
    switch (op.kind) {
        case OpKind::Identity:
            return;
        case OpKind::AdditiveGaussian:
            if (op.std > 0.0 || op.mean != 0.0)
                for (double& v : t.v) v += rng.normal(op.mean, op.std);
            return;
        case OpKind::GaussianBlur:
            tensor_blur(t, op.sigma, /*adjoint=*/false);
            return;
        case OpKind::Compose:
            for (const auto& c : op.ops) measure_forward(c, t, rng);
            return;
    }
}

void measure_backward(const degrade::DegradationOp& op, Tensor& g) {
    using degrade::OpKind;
    switch (op.kind) {
        case OpKind::Identity:
        case OpKind::AdditiveGaussian:
            return;
        case OpKind::GaussianBlur:
            tensor_blur(g, op.sigma, /*adjoint=*/true);
            return;
        case OpKind::Compose:
            for (auto it = op.ops.rbegin(); it != op.ops.rend(); ++it) measure_backward(*it, g);
            return;
    }
}

bool op_is_identity(const degrade::DegradationOp& op) {
    using degrade::OpKind;
    switch (op.kind) {
        case OpKind::Identity:
            return true;
        case OpKind::AdditiveGaussian:
            return op.std == 0.0 && op.mean == 0.0;
        case OpKind::GaussianBlur:
            return op.sigma <= 0.0;
        case OpKind::Compose:
            for (const auto& c : op.ops)
                if (!op_is_identity(c)) return false;
            return true;
    }
    return false;
}

}  // namespace

MeasurementGraph::MeasurementGraph(degrade::DegradationOp op) : op_(std::move(op)) {
    degrade::validate(op_);
}

Tensor MeasurementGraph::forward(const Tensor& x, Rng& rng) {
    Tensor y = x;
    measure_forward(op_, y, rng);
    return y;
}

Tensor MeasurementGraph::backward(const Tensor& gy) const {
    Tensor gx = gy;
    measure_backward(op_, gx);
    return gx;
}

bool MeasurementGraph::is_identity() const {
    return op_is_identity(op_);
}

}  // namespace ambient::nn
