#pragma once

#include <string>
#include <vector>

#include "ambient/degradation.hpp"
#include "ambient/rng.hpp"
#include "ambient/tensor.hpp"

namespace ambient::nn {

// A named view into one parameter tensor and its gradient accumulator.
struct ParamRef {
    std::string name;
    Tensor* value = nullptr;
    Tensor* grad = nullptr;
};

// Layers cache whatever their backward pass needs during forward; a layer
// instance therefore serves one in-flight forward/backward pair at a time.

struct Conv2d {
    int in_ch, out_ch, k, stride, pad;
    Tensor weight;  // [out_ch, in_ch, k, k]
    Tensor bias;    // [out_ch]
    Tensor wgrad, bgrad;

    Conv2d(int in_ch, int out_ch, int k, int stride, int pad);
    void init(Rng& rng, double wstd);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);
    void zero_grad();
    std::vector<ParamRef> params(const std::string& prefix);

  private:
    Tensor x_;               // cached input
    std::vector<double> cols_;  // cached im2col of x_
    int oh_ = 0, ow_ = 0;
};

struct ConvTranspose2d {
    int in_ch, out_ch, k, stride, pad;
    Tensor weight;  // [in_ch, out_ch, k, k]
    Tensor bias;    // [out_ch]
    Tensor wgrad, bgrad;

    ConvTranspose2d(int in_ch, int out_ch, int k, int stride, int pad);
    void init(Rng& rng, double wstd);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);
    void zero_grad();
    std::vector<ParamRef> params(const std::string& prefix);

  private:
    Tensor x_;
    int oh_ = 0, ow_ = 0;
};

struct InstanceNorm2d {
    int ch;
    double eps = 1e-5;
    Tensor gamma;  // [ch]
    Tensor beta;   // [ch]
    Tensor ggrad, bgrad;

    explicit InstanceNorm2d(int ch);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);
    void zero_grad();
    std::vector<ParamRef> params(const std::string& prefix);

  private:
    Tensor xhat_;
    std::vector<double> inv_std_;  // per (n, c)
};

struct LeakyReLU {
    double alpha;  // 0 for plain ReLU
    explicit LeakyReLU(double alpha) : alpha(alpha) {}

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy) const;

  private:
    Tensor x_;
};

// y = 0.5 * (tanh(x) + 1): maps onto the declared [0,1] image range.
struct Tanh01 {
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy) const;

  private:
    Tensor y_;
};

// Channel concatenation [a | b] with the matching split in backward.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& g, int ca, Tensor& ga, Tensor& gb);

// Differentiable mirror of a DegradationOp inside the training graph.
// Additive noise is reparameterized (drawn independently of the input, so
// the gradient passes through unchanged); blur is a fixed linear operator
// whose backward is the exact adjoint, sharing kernel and padding
// conventions with degrade::blur.
struct MeasurementGraph {
    explicit MeasurementGraph(degrade::DegradationOp op);

    Tensor forward(const Tensor& x, Rng& rng);
    Tensor backward(const Tensor& gy) const;
    bool is_identity() const;

  private:
    degrade::DegradationOp op_;
};

}  // namespace ambient::nn
