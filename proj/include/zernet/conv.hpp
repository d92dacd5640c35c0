#pragma once

// Zernike convolution: rotated kernel banks, the coefficient dot-product
// forward pass, angular max pooling, the direction-preserving variant, and
// exact gradients for all of them. Everything here is pure given its inputs;
// gradient sums run as fixed-order matrix products, so results are
// deterministic for any outer batch partitioning.

#include <Eigen/Dense>

#include <vector>

#include "zernet/decompose.hpp"

namespace zernet {

// Trainable kernel coefficients plus their s precomputed rotations.
// base is (k * d_in) x d_out, one column per output channel, input channel
// blocks of k rows stacked (same layout as a PatchTensor column). bank[t]
// holds the kernel rotated by 2 pi t / s.
struct KernelBank {
    int k = 0;
    int d_in = 0;
    int d_out = 0;
    int s = 1;
    Eigen::MatrixXd base;
    Eigen::VectorXd bias;
    std::vector<Eigen::MatrixXd> bank;
};

KernelBank make_kernel_bank(const Eigen::MatrixXd& base, int k, int s,
                            const Eigen::VectorXd& bias = Eigen::VectorXd());

// Recomputes the rotated slices after base or bias changed in place.
void refresh_kernel_bank(KernelBank& bank);

// Raw convolution responses: slice t is d_out x N.
struct ConvResponse {
    int n = 0;
    int d_out = 0;
    int s = 1;
    std::vector<Eigen::MatrixXd> data;
};

// response[t](o, p) = sum_{i,c} F[p](i,c) * bank[t](c*k+i, o) + bias[o]
ConvResponse zer_conv_forward(const PatchTensor& tensor, const KernelBank& bank);

// Max over the direction axis; ties go to the smallest direction index so
// gradients are deterministic.
struct PooledResponse {
    Eigen::MatrixXd values;  // d_out x N
    Eigen::MatrixXi argmax;  // d_out x N, entries in [0, s)
};

PooledResponse angular_max_pool(const ConvResponse& response);

// Routes the pooled gradient back to each argmax slot; all other slots get
// zero.
std::vector<Eigen::MatrixXd> angular_max_pool_backward(const PooledResponse& pooled,
                                                       const Eigen::MatrixXd& upstream,
                                                       int s);

// Gradients of sum(upstream .* response) for the plain convolution.
struct ZerConvGradients {
    Eigen::MatrixXd d_tensor;  // (k * d_in) x N
    Eigen::MatrixXd d_base;    // (k * d_in) x d_out
    Eigen::VectorXd d_bias;    // d_out
};

ZerConvGradients zer_conv_backward(const PatchTensor& tensor, const KernelBank& bank,
                                   const std::vector<Eigen::MatrixXd>& upstream);

// Direction-preserving activations: slice t is the (k * d) x N coefficient
// stack seen by direction channel t.
struct DirectionalTensor {
    int n = 0;
    int k = 0;
    int d = 0;
    int s = 1;
    double r0 = 0.0;
    std::vector<Eigen::MatrixXd> slices;
};

// First-layer bridge: copies one tensor across all s direction channels.
DirectionalTensor replicate_directions(const PatchTensor& tensor, int s);

// output[t] = bank[t]^T * F_dir[t] + bias: direction channel t meets the
// kernel rotated by phi_t, keeping the direction axis intact.
ConvResponse directional_conv_forward(const DirectionalTensor& tensor,
                                      const KernelBank& bank);

struct DirectionalConvGradients {
    std::vector<Eigen::MatrixXd> d_slices;  // per direction, (k * d_in) x N
    Eigen::MatrixXd d_base;
    Eigen::VectorXd d_bias;
};

DirectionalConvGradients directional_conv_backward(
    const DirectionalTensor& tensor, const KernelBank& bank,
    const std::vector<Eigen::MatrixXd>& upstream);

}  // namespace zernet
