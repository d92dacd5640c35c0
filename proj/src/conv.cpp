#include "zernet/conv.hpp"

#include <string>

#include "zernet/errors.hpp"
#include "zernet/util.hpp"
#include "zernet/zernike.hpp"

namespace zernet {

namespace {

void check_bank(const KernelBank& bank) {
    if (bank.k < 1 || bank.d_in < 1 || bank.d_out < 1 || bank.s < 1)
        throw ShapeError("kernel bank dimensions must be positive");
    if (bank.base.rows() != static_cast<Eigen::Index>(bank.k) * bank.d_in ||
        bank.base.cols() != bank.d_out)
        throw ShapeError("kernel base is " + std::to_string(bank.base.rows()) + "x" +
                         std::to_string(bank.base.cols()) + ", expected " +
                         std::to_string(static_cast<long>(bank.k) * bank.d_in) + "x" +
                         std::to_string(bank.d_out));
    if (bank.bias.size() != bank.d_out)
        throw ShapeError("kernel bias has " + std::to_string(bank.bias.size()) +
                         " entries for " + std::to_string(bank.d_out) + " output channels");
    if (static_cast<int>(bank.bank.size()) != bank.s)
        throw ShapeError("kernel bank holds " + std::to_string(bank.bank.size()) +
                         " slices for angular resolution " + std::to_string(bank.s));
}

void check_pair(const PatchTensor& tensor, const KernelBank& bank) {
    check_bank(bank);
    tensor.validate();
    if (tensor.k != bank.k || tensor.d != bank.d_in)
        throw ShapeError("tensor (k=" + std::to_string(tensor.k) + ", d=" +
                         std::to_string(tensor.d) + ") does not match kernel (k=" +
                         std::to_string(bank.k) + ", d_in=" + std::to_string(bank.d_in) +
                         ")");
}

void check_directional(const DirectionalTensor& tensor, const KernelBank& bank) {
    check_bank(bank);
    if (tensor.n < 1 || tensor.k < 1 || tensor.d < 1)
        throw ShapeError("directional tensor dimensions must be positive");
    if (tensor.s != bank.s)
        throw ShapeError("directional tensor has " + std::to_string(tensor.s) +
                         " direction channels, kernel bank has " + std::to_string(bank.s));
    if (static_cast<int>(tensor.slices.size()) != tensor.s)
        throw ShapeError("directional tensor holds " + std::to_string(tensor.slices.size()) +
                         " slices for s=" + std::to_string(tensor.s));
    if (tensor.k != bank.k || tensor.d != bank.d_in)
        throw ShapeError("directional tensor (k=" + std::to_string(tensor.k) + ", d=" +
                         std::to_string(tensor.d) + ") does not match kernel (k=" +
                         std::to_string(bank.k) + ", d_in=" + std::to_string(bank.d_in) +
                         ")");
    for (const Eigen::MatrixXd& slice : tensor.slices)
        if (slice.rows() != static_cast<Eigen::Index>(tensor.k) * tensor.d ||
            slice.cols() != tensor.n)
            throw ShapeError("directional slice has the wrong shape");
}

void check_upstream(const std::vector<Eigen::MatrixXd>& upstream, int s, int d_out, int n) {
    if (static_cast<int>(upstream.size()) != s)
        throw ShapeError("upstream gradient has " + std::to_string(upstream.size()) +
                         " slices for s=" + std::to_string(s));
    for (const Eigen::MatrixXd& g : upstream)
        if (g.rows() != d_out || g.cols() != n)
            throw ShapeError("upstream gradient slice is " + std::to_string(g.rows()) + "x" +
                             std::to_string(g.cols()) + ", expected " +
                             std::to_string(d_out) + "x" + std::to_string(n));
}

}  // namespace

KernelBank make_kernel_bank(const Eigen::MatrixXd& base, int k, int s,
                            const Eigen::VectorXd& bias) {
    if (k < 1) throw DomainError("basis size must be positive, got " + std::to_string(k));
    if (s < 1)
        throw DomainError("angular resolution must be positive, got " + std::to_string(s));
    if (base.rows() < 1 || base.rows() % k != 0)
        throw ShapeError("kernel base rows (" + std::to_string(base.rows()) +
                         ") must be a positive multiple of k=" + std::to_string(k));
    if (base.cols() < 1) throw ShapeError("kernel base needs at least one output channel");

    KernelBank out;
    out.k = k;
    out.d_in = static_cast<int>(base.rows()) / k;
    out.d_out = static_cast<int>(base.cols());
    out.s = s;
    out.base = base;
    out.bias = bias.size() == 0 ? Eigen::VectorXd::Zero(out.d_out) : bias;
    if (out.bias.size() != out.d_out)
        throw ShapeError("kernel bias has " + std::to_string(bias.size()) + " entries for " +
                         std::to_string(out.d_out) + " output channels");
    refresh_kernel_bank(out);
    return out;
}

void refresh_kernel_bank(KernelBank& bank) {
    if (bank.k < 1 || bank.s < 1 || bank.d_in < 1)
        throw ShapeError("kernel bank is uninitialized");
    bank.bank.assign(static_cast<std::size_t>(bank.s), Eigen::MatrixXd());
    for (int t = 0; t < bank.s; ++t) {
        const double phi = kTwoPi * t / bank.s;
        const Eigen::MatrixXd rot = rotation_matrix(bank.k, phi);
        Eigen::MatrixXd& slice = bank.bank[static_cast<std::size_t>(t)];
        slice.resizeLike(bank.base);
        for (int c = 0; c < bank.d_in; ++c)
            slice.middleRows(static_cast<Eigen::Index>(c) * bank.k, bank.k) =
                rot * bank.base.middleRows(static_cast<Eigen::Index>(c) * bank.k, bank.k);
    }
}

ConvResponse zer_conv_forward(const PatchTensor& tensor, const KernelBank& bank) {
    check_pair(tensor, bank);
    ConvResponse out;
    out.n = tensor.n;
    out.d_out = bank.d_out;
    out.s = bank.s;
    out.data.reserve(static_cast<std::size_t>(bank.s));
    for (int t = 0; t < bank.s; ++t) {
        Eigen::MatrixXd slice =
            bank.bank[static_cast<std::size_t>(t)].transpose() * tensor.data;
        slice.colwise() += bank.bias;
        out.data.push_back(std::move(slice));
    }
    return out;
}

PooledResponse angular_max_pool(const ConvResponse& response) {
    if (response.s < 1 || response.data.empty())
        throw ShapeError("response has no direction slices to pool");
    PooledResponse out;
    out.values = response.data[0];
    out.argmax = Eigen::MatrixXi::Zero(response.data[0].rows(), response.data[0].cols());
    for (int t = 1; t < response.s; ++t) {
        const Eigen::MatrixXd& slice = response.data[static_cast<std::size_t>(t)];
        for (Eigen::Index j = 0; j < slice.cols(); ++j)
            for (Eigen::Index i = 0; i < slice.rows(); ++i)
                if (slice(i, j) > out.values(i, j)) {  // strict: ties keep the earlier t
                    out.values(i, j) = slice(i, j);
                    out.argmax(i, j) = t;
                }
    }
    return out;
}

std::vector<Eigen::MatrixXd> angular_max_pool_backward(const PooledResponse& pooled,
                                                       const Eigen::MatrixXd& upstream,
                                                       int s) {
    if (s < 1) throw DomainError("angular resolution must be positive");
    if (upstream.rows() != pooled.values.rows() || upstream.cols() != pooled.values.cols())
        throw ShapeError("pool upstream gradient shape does not match pooled values");
    std::vector<Eigen::MatrixXd> out(
        static_cast<std::size_t>(s),
        Eigen::MatrixXd::Zero(pooled.values.rows(), pooled.values.cols()));
    for (Eigen::Index j = 0; j < upstream.cols(); ++j)
        for (Eigen::Index i = 0; i < upstream.rows(); ++i) {
            const int t = pooled.argmax(i, j);
            if (t < 0 || t >= s)
                throw ShapeError("argmax entry " + std::to_string(t) +
                                 " outside direction range");
            out[static_cast<std::size_t>(t)](i, j) = upstream(i, j);
        }
    return out;
}

ZerConvGradients zer_conv_backward(const PatchTensor& tensor, const KernelBank& bank,
                                   const std::vector<Eigen::MatrixXd>& upstream) {
    check_pair(tensor, bank);
    check_upstream(upstream, bank.s, bank.d_out, tensor.n);

    ZerConvGradients out;
    out.d_tensor = Eigen::MatrixXd::Zero(tensor.data.rows(), tensor.data.cols());
    out.d_base = Eigen::MatrixXd::Zero(bank.base.rows(), bank.base.cols());
    out.d_bias = Eigen::VectorXd::Zero(bank.d_out);
    for (int t = 0; t < bank.s; ++t) {
        const Eigen::MatrixXd& up = upstream[static_cast<std::size_t>(t)];
        out.d_tensor.noalias() += bank.bank[static_cast<std::size_t>(t)] * up;
        // gradient w.r.t. the rotated slice, pulled back through the fixed
        // rotation: d_base += R_t^T d_slice per input-channel block
        const Eigen::MatrixXd d_slice = tensor.data * up.transpose();
        const Eigen::MatrixXd rot =
            rotation_matrix(bank.k, kTwoPi * t / bank.s).transpose();
        for (int c = 0; c < bank.d_in; ++c)
            out.d_base.middleRows(static_cast<Eigen::Index>(c) * bank.k, bank.k).noalias() +=
                rot * d_slice.middleRows(static_cast<Eigen::Index>(c) * bank.k, bank.k);
        out.d_bias += up.rowwise().sum();
    }
    return out;
}

DirectionalTensor replicate_directions(const PatchTensor& tensor, int s) {
    tensor.validate();
    if (s < 1)
        throw DomainError("angular resolution must be positive, got " + std::to_string(s));
    DirectionalTensor out;
    out.n = tensor.n;
    out.k = tensor.k;
    out.d = tensor.d;
    out.s = s;
    out.r0 = tensor.r0;
    out.slices.assign(static_cast<std::size_t>(s), tensor.data);
    return out;
}

ConvResponse directional_conv_forward(const DirectionalTensor& tensor,
                                      const KernelBank& bank) {
    check_directional(tensor, bank);
    ConvResponse out;
    out.n = tensor.n;
    out.d_out = bank.d_out;
    out.s = bank.s;
    out.data.reserve(static_cast<std::size_t>(bank.s));
    for (int t = 0; t < bank.s; ++t) {
        Eigen::MatrixXd slice = bank.bank[static_cast<std::size_t>(t)].transpose() *
                                tensor.slices[static_cast<std::size_t>(t)];
        slice.colwise() += bank.bias;
        out.data.push_back(std::move(slice));
    }
    return out;
}

DirectionalConvGradients directional_conv_backward(
    const DirectionalTensor& tensor, const KernelBank& bank,
    const std::vector<Eigen::MatrixXd>& upstream) {
    check_directional(tensor, bank);
    check_upstream(upstream, bank.s, bank.d_out, tensor.n);

    DirectionalConvGradients out;
    out.d_slices.reserve(static_cast<std::size_t>(bank.s));
    out.d_base = Eigen::MatrixXd::Zero(bank.base.rows(), bank.base.cols());
    out.d_bias = Eigen::VectorXd::Zero(bank.d_out);
    for (int t = 0; t < bank.s; ++t) {
        const Eigen::MatrixXd& up = upstream[static_cast<std::size_t>(t)];
        out.d_slices.push_back(bank.bank[static_cast<std::size_t>(t)] * up);
        const Eigen::MatrixXd d_slice =
            tensor.slices[static_cast<std::size_t>(t)] * up.transpose();
        const Eigen::MatrixXd rot =
            rotation_matrix(bank.k, kTwoPi * t / bank.s).transpose();
        for (int c = 0; c < bank.d_in; ++c)
            out.d_base.middleRows(static_cast<Eigen::Index>(c) * bank.k, bank.k).noalias() +=
                rot * d_slice.middleRows(static_cast<Eigen::Index>(c) * bank.k, bank.k);
        out.d_bias += up.rowwise().sum();
    }
    return out;
}

}  // namespace zernet
