#include "zernet/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <utility>

#include "zernet/errors.hpp"
#include "zernet/util.hpp"

namespace zernet {

namespace {

// Decomposes per-vertex values (d x N, column per vertex) into one k x d
// coefficient block per vertex through the precomputed operators. Vertices
// whose operator is empty (failed patches) get zero coefficients.
PatchTensor tensor_from_values(const Eigen::MatrixXd& values,
                               const std::vector<DecomposeOperator>& ops, int k,
                               double r0) {
    const int n = static_cast<int>(values.cols());
    const int d = static_cast<int>(values.rows());
    if (static_cast<int>(ops.size()) != n)
        throw ShapeError("operator count " + std::to_string(ops.size()) +
                         " does not match vertex count " + std::to_string(n));
    PatchTensor tensor;
    tensor.n = n;
    tensor.k = k;
    tensor.d = d;
    tensor.r0 = r0;
    tensor.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k) * d, n);
    for (int p = 0; p < n; ++p) {
        const auto& op = ops[static_cast<std::size_t>(p)];
        if (op.columns.empty()) continue;
        Eigen::MatrixXd sub(d, static_cast<Eigen::Index>(op.columns.size()));
        for (std::size_t c = 0; c < op.columns.size(); ++c)
            sub.col(static_cast<Eigen::Index>(c)) = values.col(op.columns[c]);
        const Eigen::MatrixXd alpha = op.matrix * sub.transpose();  // k x d
        tensor.data.col(p) =
            Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());
    }
    return tensor;
}

// Adjoint of tensor_from_values: maps a gradient w.r.t. the coefficient
// stack back to a gradient w.r.t. the per-vertex values it was gathered
// from.
Eigen::MatrixXd values_from_tensor_grad(const Eigen::MatrixXd& d_tensor,
                                        const std::vector<DecomposeOperator>& ops,
                                        int k, int d, int n) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, n);
    for (int p = 0; p < n; ++p) {
        const auto& op = ops[static_cast<std::size_t>(p)];
        if (op.columns.empty()) continue;
        const Eigen::Map<const Eigen::MatrixXd> d_alpha(d_tensor.col(p).data(), k, d);
        const Eigen::MatrixXd d_sub = d_alpha.transpose() * op.matrix;  // d x cols
        for (std::size_t c = 0; c < op.columns.size(); ++c)
            out.col(op.columns[c]) += d_sub.col(static_cast<Eigen::Index>(c));
    }
    return out;
}

Eigen::MatrixXd stable_softmax_columns(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const Eigen::VectorXd shifted =
            (x.col(j).array() - x.col(j).maxCoeff()).exp();
        out.col(j) = shifted / shifted.sum();
    }
    return out;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

LayerSpec conv_layer(int d_out, double r0, int k, int s, bool directional) {
    LayerSpec spec;
    spec.kind = LayerKind::ZerConv;
    spec.d_out = d_out;
    spec.r0 = r0;
    spec.k = k;
    spec.s = s;
    spec.directional = directional;
    return spec;
}

LayerSpec relu_layer() {
    LayerSpec spec;
    spec.kind = LayerKind::ReLU;
    return spec;
}

LayerSpec linear_layer(int d_out) {
    LayerSpec spec;
    spec.kind = LayerKind::Linear;
    spec.d_out = d_out;
    return spec;
}

LayerSpec softmax_layer() {
    LayerSpec spec;
    spec.kind = LayerKind::Softmax;
    return spec;
}

PatchDomain make_patch_domain(const TriMesh& mesh, double r0, int sample_count,
                              int target_count, std::uint64_t seed, int threads) {
    PatchSet set = build_patch_set(mesh, sample_count, r0, 3, target_count, seed, threads);
    const auto n = static_cast<double>(mesh.vertices.rows());
    if (static_cast<double>(set.failed_vertices.size()) > 0.01 * n)
        throw AggregateFailureError(
            "patch extraction failed at " + std::to_string(set.failed_vertices.size()) +
                " of " + std::to_string(mesh.vertices.rows()) + " vertices, first: " +
                (set.failure_reasons.empty() ? std::string("?") : set.failure_reasons[0]),
            static_cast<int>(set.failed_vertices.size()));
    PatchDomain domain;
    domain.r0 = r0;
    domain.graph = build_neighbor_graph(mesh, set.samples);
    domain.patches = std::move(set.patches);
    return domain;
}

Model::Model(const ModelSpec& spec) : spec_(spec) {
    if (spec_.d_in < 1) throw DomainError("model input width must be positive");
    if (spec_.layers.empty()) throw DomainError("model needs at least one layer");

    int conv_count = 0;
    int last_conv = -1;
    int first_linear = -1;
    bool any_directional = false;
    int directional_s = 0;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        const LayerSpec& ls = spec_.layers[i];
        if (ls.kind == LayerKind::ZerConv) {
            ++conv_count;
            last_conv = static_cast<int>(i);
            if (conv_count == 1) {
                any_directional = ls.directional;
                directional_s = ls.s;
            } else if (ls.directional != any_directional) {
                throw DomainError("conv layers must agree on directional mode");
            } else if (any_directional && ls.s != directional_s) {
                throw DomainError("directional conv layers must share one direction count");
            }
            if (first_linear >= 0)
                throw DomainError("conv layers cannot follow a linear layer");
        } else if (ls.kind == LayerKind::Linear && first_linear < 0) {
            first_linear = static_cast<int>(i);
        }
    }
    if (conv_count == 0) throw DomainError("model needs at least one conv layer");

    for (std::size_t i = 0; i < spec_.layers.size(); ++i)
        if (spec_.layers[i].kind == LayerKind::Softmax &&
            i + 1 != spec_.layers.size())
            throw DomainError("softmax is only valid as the final layer");
    const bool ends_softmax = spec_.layers.back().kind == LayerKind::Softmax;
    if (spec_.loss == LossKind::CrossEntropy && !ends_softmax)
        throw DomainError("cross-entropy training requires a final softmax layer");
    if (spec_.loss == LossKind::Mse && ends_softmax)
        throw DomainError("mse training does not use a softmax layer");

    layers_.resize(spec_.layers.size());
    dir_in_.assign(spec_.layers.size(), 0);
    dir_out_.assign(spec_.layers.size(), 0);
    conv_pos_.assign(spec_.layers.size(), -1);
    param_slot_.assign(spec_.layers.size(), -1);
    width_in_.assign(spec_.layers.size(), 0);

    Rng rng(spec_.seed);
    int width = spec_.d_in;
    bool directional_active = false;
    int conv_index = 0;
    param_count_ = 0;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        Layer& layer = layers_[i];
        layer.spec = spec_.layers[i];
        width_in_[i] = width;
        dir_in_[i] = directional_active ? 1 : 0;
        switch (layer.spec.kind) {
            case LayerKind::ZerConv: {
                if (layer.spec.d_out < 1)
                    throw DomainError("conv width must be positive");
                if (!(layer.spec.r0 > 0.0) || !std::isfinite(layer.spec.r0))
                    throw DomainError("conv patch radius must be positive and finite");
                if (layer.spec.s < 1)
                    throw DomainError("conv direction count must be positive");
                conv_pos_[i] = conv_index++;
                const Eigen::Index rows =
                    static_cast<Eigen::Index>(layer.spec.k) * width;
                const double scale =
                    1.0 / std::sqrt(static_cast<double>(layer.spec.k) * width);
                Eigen::MatrixXd base(rows, layer.spec.d_out);
                for (Eigen::Index c = 0; c < base.cols(); ++c)
                    for (Eigen::Index r = 0; r < base.rows(); ++r)
                        base(r, c) = scale * rng.uniform(-1.0, 1.0);
                // validates k against whole angular orders
                layer.bank = make_kernel_bank(base, layer.spec.k, layer.spec.s);
                layer.pool_output =
                    !layer.spec.directional || static_cast<int>(i) == last_conv;
                directional_active = layer.spec.directional && !layer.pool_output;
                param_slot_[i] = param_count_;
                param_count_ += 2;
                width = layer.spec.d_out;
                break;
            }
            case LayerKind::ReLU:
                break;
            case LayerKind::Linear: {
                if (layer.spec.d_out < 1)
                    throw DomainError("linear width must be positive");
                if (directional_active)
                    throw DomainError(
                        "linear layers are only valid after directions are pooled");
                const double scale = 1.0 / std::sqrt(static_cast<double>(width));
                layer.weight.resize(layer.spec.d_out, width);
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                        layer.weight(r, c) = scale * rng.uniform(-1.0, 1.0);
                layer.bias = Eigen::VectorXd::Zero(layer.spec.d_out);
                param_slot_[i] = param_count_;
                param_count_ += 2;
                width = layer.spec.d_out;
                break;
            }
            case LayerKind::Softmax:
                if (directional_active)
                    throw DomainError(
                        "softmax is only valid after directions are pooled");
                break;
        }
        dir_out_[i] = directional_active ? 1 : 0;
    }
}

PreparedMesh Model::prepare(const MeshData& data) const {
    if (layers_.empty()) throw StateError("model is empty");
    const int n = static_cast<int>(data.mesh.vertices.rows());
    PreparedMesh prepared;
    prepared.data = &data;

    // identical (radius, k) pairs share one operator table
    std::map<std::pair<const PatchDomain*, int>, std::vector<DecomposeOperator>> cache;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& layer = layers_[i];
        if (layer.spec.kind != LayerKind::ZerConv) continue;
        const PatchDomain* domain = nullptr;
        for (const PatchDomain& d : data.domains)
            if (d.r0 == layer.spec.r0) {
                domain = &d;
                break;
            }
        if (domain == nullptr)
            throw StateError("no patch domain for conv radius " +
                             std::to_string(layer.spec.r0));
        if (static_cast<int>(domain->patches.size()) != n)
            throw StateError("patch domain covers " +
                             std::to_string(domain->patches.size()) + " of " +
                             std::to_string(n) + " vertices");
        const auto key = std::make_pair(domain, layer.spec.k);
        auto it = cache.find(key);
        if (it == cache.end()) {
            std::vector<DecomposeOperator> ops(static_cast<std::size_t>(n));
            for (int v = 0; v < n; ++v) {
                const GeodesicPatch& patch = domain->patches[static_cast<std::size_t>(v)];
                if (!patch.valid()) {
                    // failed patch: the vertex contributes zero coefficients
                    ops[static_cast<std::size_t>(v)].matrix.resize(layer.spec.k, 0);
                    continue;
                }
                ops[static_cast<std::size_t>(v)] =
                    decompose_operator(data.mesh, domain->graph, patch, layer.spec.k);
            }
            it = cache.emplace(key, std::move(ops)).first;
        }
        prepared.conv_ops.push_back(it->second);
    }
    return prepared;
}

Eigen::MatrixXd Model::forward(const PreparedMesh& prepared,
                               const Eigen::MatrixXd& input,
                               ForwardTrace* trace) const {
    if (layers_.empty()) throw StateError("model is empty");
    if (prepared.data == nullptr) throw StateError("prepared mesh is empty");
    const int n = static_cast<int>(prepared.data->mesh.vertices.rows());
    if (static_cast<int>(input.rows()) != n ||
        static_cast<int>(input.cols()) != spec_.d_in)
        throw ShapeError("input is " + std::to_string(input.rows()) + "x" +
                         std::to_string(input.cols()) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(spec_.d_in));

    if (trace != nullptr) {
        trace->inputs.assign(layers_.size(), Eigen::MatrixXd());
        trace->dir_inputs.assign(layers_.size(), {});
        trace->tensors.assign(layers_.size(), PatchTensor());
        trace->dir_tensors.assign(layers_.size(), DirectionalTensor());
        trace->pooled.assign(layers_.size(), PooledResponse());
        trace->outputs.clear();
        trace->valid = false;
    }

    Eigen::MatrixXd x = input.transpose();  // d x N, column per vertex
    std::vector<Eigen::MatrixXd> x_dir;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& layer = layers_[i];
        switch (layer.spec.kind) {
            case LayerKind::ZerConv: {
                const auto& ops =
                    prepared.conv_ops[static_cast<std::size_t>(conv_pos_[i])];
                if (!layer.spec.directional) {
                    PatchTensor tensor =
                        tensor_from_values(x, ops, layer.spec.k, layer.spec.r0);
                    PooledResponse pool =
                        angular_max_pool(zer_conv_forward(tensor, layer.bank));
                    x = pool.values;
                    if (trace != nullptr) {
                        trace->tensors[i] = std::move(tensor);
                        trace->pooled[i] = std::move(pool);
                    }
                    break;
                }
                DirectionalTensor tensor;
                if (!dir_in_[i]) {
                    tensor = replicate_directions(
                        tensor_from_values(x, ops, layer.spec.k, layer.spec.r0),
                        layer.spec.s);
                } else {
                    tensor.n = n;
                    tensor.k = layer.spec.k;
                    tensor.d = width_in_[i];
                    tensor.s = layer.spec.s;
                    tensor.r0 = layer.spec.r0;
                    tensor.slices.reserve(x_dir.size());
                    for (const Eigen::MatrixXd& slice : x_dir)
                        tensor.slices.push_back(
                            tensor_from_values(slice, ops, layer.spec.k, layer.spec.r0)
                                .data);
                }
                ConvResponse response = directional_conv_forward(tensor, layer.bank);
                if (layer.pool_output) {
                    PooledResponse pool = angular_max_pool(response);
                    x = pool.values;
                    x_dir.clear();
                    if (trace != nullptr) trace->pooled[i] = std::move(pool);
                } else {
                    x_dir = std::move(response.data);
                }
                if (trace != nullptr) trace->dir_tensors[i] = std::move(tensor);
                break;
            }
            case LayerKind::ReLU:
                if (dir_in_[i]) {
                    if (trace != nullptr) trace->dir_inputs[i] = x_dir;
                    for (Eigen::MatrixXd& slice : x_dir)
                        slice = slice.cwiseMax(0.0);
                } else {
                    if (trace != nullptr) trace->inputs[i] = x;
                    x = x.cwiseMax(0.0);
                }
                break;
            case LayerKind::Linear:
                if (trace != nullptr) trace->inputs[i] = x;
                x = (layer.weight * x).colwise() + layer.bias;
                break;
            case LayerKind::Softmax:
                x = stable_softmax_columns(x);
                break;
        }
    }
    if (trace != nullptr) {
        trace->outputs.push_back(x);
        trace->valid = true;
    }
    return x.transpose();
}

std::vector<Eigen::VectorXd> Model::backward(const PreparedMesh& prepared,
                                             const ForwardTrace& trace,
                                             const Eigen::MatrixXd& d_output) const {
    if (!trace.valid) throw StateError("backward needs a trace from forward");
    if (prepared.data == nullptr) throw StateError("prepared mesh is empty");
    const int n = static_cast<int>(prepared.data->mesh.vertices.rows());
    const int out_width = static_cast<int>(trace.outputs.back().rows());
    if (static_cast<int>(d_output.rows()) != n ||
        static_cast<int>(d_output.cols()) != out_width)
        throw ShapeError("output gradient is " + std::to_string(d_output.rows()) + "x" +
                         std::to_string(d_output.cols()) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(out_width));

    std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(param_count_));
    Eigen::MatrixXd g = d_output.transpose();  // d x N
    std::vector<Eigen::MatrixXd> g_dir;
    for (std::size_t ri = layers_.size(); ri-- > 0;) {
        const Layer& layer = layers_[ri];
        switch (layer.spec.kind) {
            case LayerKind::ZerConv: {
                const auto& ops =
                    prepared.conv_ops[static_cast<std::size_t>(conv_pos_[ri])];
                const auto slot = static_cast<std::size_t>(param_slot_[ri]);
                if (!layer.spec.directional) {
                    const std::vector<Eigen::MatrixXd> upstream =
                        angular_max_pool_backward(trace.pooled[ri], g, layer.spec.s);
                    ZerConvGradients cg =
                        zer_conv_backward(trace.tensors[ri], layer.bank, upstream);
                    grads[slot] = flatten(cg.d_base);
                    grads[slot + 1] = cg.d_bias;
                    g = values_from_tensor_grad(cg.d_tensor, ops, layer.spec.k,
                                                width_in_[ri], n);
                    break;
                }
                std::vector<Eigen::MatrixXd> upstream;
                if (layer.pool_output)
                    upstream =
                        angular_max_pool_backward(trace.pooled[ri], g, layer.spec.s);
                else
                    upstream = std::move(g_dir);
                DirectionalConvGradients cg = directional_conv_backward(
                    trace.dir_tensors[ri], layer.bank, upstream);
                grads[slot] = flatten(cg.d_base);
                grads[slot + 1] = cg.d_bias;
                if (dir_in_[ri]) {
                    g_dir.resize(cg.d_slices.size());
                    for (std::size_t t = 0; t < cg.d_slices.size(); ++t)
                        g_dir[t] = values_from_tensor_grad(cg.d_slices[t], ops,
                                                           layer.spec.k, width_in_[ri], n);
                } else {
                    // the replicated tensor fans one decomposition out to every
                    // direction, so its adjoint sums the per-direction gradients
                    Eigen::MatrixXd d_single = cg.d_slices[0];
                    for (std::size_t t = 1; t < cg.d_slices.size(); ++t)
                        d_single += cg.d_slices[t];
                    g = values_from_tensor_grad(d_single, ops, layer.spec.k,
                                                width_in_[ri], n);
                    g_dir.clear();
                }
                break;
            }
            case LayerKind::ReLU:
                if (dir_in_[ri]) {
                    for (std::size_t t = 0; t < g_dir.size(); ++t)
                        g_dir[t] = g_dir[t]
                                       .cwiseProduct((trace.dir_inputs[ri][t].array() > 0.0)
                                                         .cast<double>()
                                                         .matrix());
                } else {
                    g = g.cwiseProduct(
                        (trace.inputs[ri].array() > 0.0).cast<double>().matrix());
                }
                break;
            case LayerKind::Linear: {
                const auto slot = static_cast<std::size_t>(param_slot_[ri]);
                grads[slot] = flatten(g * trace.inputs[ri].transpose());
                grads[slot + 1] = g.rowwise().sum();
                g = layer.weight.transpose() * g;
                break;
            }
            case LayerKind::Softmax:
                // the only softmax sits under cross-entropy, whose backward
                // already reports the gradient at the softmax input
                break;
        }
    }
    return grads;
}

std::vector<Model::ParamView> Model::parameters() {
    std::vector<ParamView> views;
    views.reserve(static_cast<std::size_t>(param_count_));
    for (Layer& layer : layers_) {
        if (layer.spec.kind == LayerKind::ZerConv) {
            views.push_back({layer.bank.base.data(), layer.bank.base.size()});
            views.push_back({layer.bank.bias.data(), layer.bank.bias.size()});
        } else if (layer.spec.kind == LayerKind::Linear) {
            views.push_back({layer.weight.data(), layer.weight.size()});
            views.push_back({layer.bias.data(), layer.bias.size()});
        }
    }
    return views;
}

std::vector<Eigen::VectorXd> Model::parameter_values() const {
    std::vector<Eigen::VectorXd> values;
    values.reserve(static_cast<std::size_t>(param_count_));
    for (const Layer& layer : layers_) {
        if (layer.spec.kind == LayerKind::ZerConv) {
            values.push_back(flatten(layer.bank.base));
            values.push_back(layer.bank.bias);
        } else if (layer.spec.kind == LayerKind::Linear) {
            values.push_back(flatten(layer.weight));
            values.push_back(layer.bias);
        }
    }
    return values;
}

void Model::refresh() {
    for (Layer& layer : layers_)
        if (layer.spec.kind == LayerKind::ZerConv) refresh_kernel_bank(layer.bank);
}

double cross_entropy_loss(const Eigen::MatrixXd& probabilities,
                          const Eigen::VectorXi& labels) {
    if (probabilities.rows() != labels.size())
        throw ShapeError("probability rows " + std::to_string(probabilities.rows()) +
                         " do not match label count " + std::to_string(labels.size()));
    if (probabilities.rows() == 0) throw DomainError("cross-entropy needs samples");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= probabilities.cols())
            throw DomainError("label " + std::to_string(y) + " outside the " +
                              std::to_string(probabilities.cols()) + " classes");
        sum -= std::log(std::max(probabilities(i, y), 1e-300));
    }
    return sum / static_cast<double>(labels.size());
}

Eigen::MatrixXd cross_entropy_backward(const Eigen::MatrixXd& probabilities,
                                       const Eigen::VectorXi& labels) {
    if (probabilities.rows() != labels.size())
        throw ShapeError("probability rows " + std::to_string(probabilities.rows()) +
                         " do not match label count " + std::to_string(labels.size()));
    if (probabilities.rows() == 0) throw DomainError("cross-entropy needs samples");
    Eigen::MatrixXd grad = probabilities;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= probabilities.cols())
            throw DomainError("label " + std::to_string(y) + " outside the " +
                              std::to_string(probabilities.cols()) + " classes");
        grad(i, y) -= 1.0;
    }
    return grad / static_cast<double>(labels.size());
}

double mse_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw ShapeError("prediction and target shapes differ");
    if (predictions.size() == 0) throw DomainError("mse needs samples");
    return (predictions - targets).squaredNorm() /
           static_cast<double>(predictions.size());
}

Eigen::MatrixXd mse_backward(const Eigen::MatrixXd& predictions,
                             const Eigen::MatrixXd& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw ShapeError("prediction and target shapes differ");
    if (predictions.size() == 0) throw DomainError("mse needs samples");
    return 2.0 * (predictions - targets) / static_cast<double>(predictions.size());
}

Adam::Adam(const AdamConfig& config, std::vector<Model::ParamView> parameters)
    : config_(config), parameters_(std::move(parameters)) {
    if (!(config_.learning_rate >= 0.0) || !std::isfinite(config_.learning_rate))
        throw DomainError("learning rate must be finite and non-negative");
    if (config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 ||
        config_.beta2 >= 1.0)
        throw DomainError("adam betas must lie in [0, 1)");
    if (!(config_.epsilon > 0.0)) throw DomainError("adam epsilon must be positive");
    m_.reserve(parameters_.size());
    v_.reserve(parameters_.size());
    for (const Model::ParamView& p : parameters_) {
        if (p.data == nullptr) throw StateError("adam received a null parameter view");
        m_.push_back(Eigen::VectorXd::Zero(p.size));
        v_.push_back(Eigen::VectorXd::Zero(p.size));
    }
}

void Adam::step(const std::vector<Eigen::VectorXd>& gradients) {
    if (gradients.size() != parameters_.size())
        throw ShapeError("gradient count " + std::to_string(gradients.size()) +
                         " does not match parameter count " +
                         std::to_string(parameters_.size()));
    ++steps_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
        if (gradients[i].size() != parameters_[i].size)
            throw ShapeError("gradient " + std::to_string(i) + " has " +
                             std::to_string(gradients[i].size()) + " entries, expected " +
                             std::to_string(parameters_[i].size));
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * gradients[i];
        v_[i] = config_.beta2 * v_[i] +
                (1.0 - config_.beta2) * gradients[i].cwiseProduct(gradients[i]);
        Eigen::Map<Eigen::VectorXd> param(parameters_[i].data, parameters_[i].size);
        param.array() -= config_.learning_rate * (m_[i].array() / bc1) /
                         ((v_[i].array() / bc2).sqrt() + config_.epsilon);
    }
}

TrainResult train(Model& model, const TrainConfig& config,
                  const std::vector<MeshData>& dataset) {
    if (dataset.empty()) throw DomainError("training needs at least one mesh");
    if (config.epochs < 1) throw DomainError("epoch count must be positive");

    const bool classify = model.spec().loss == LossKind::CrossEntropy;
    int out_width = model.spec().d_in;
    for (const LayerSpec& ls : model.spec().layers)
        if (ls.kind == LayerKind::ZerConv || ls.kind == LayerKind::Linear)
            out_width = ls.d_out;

    std::vector<PreparedMesh> prepared;
    prepared.reserve(dataset.size());
    for (const MeshData& data : dataset) {
        const auto n = data.mesh.vertices.rows();
        if (classify) {
            if (data.labels.size() != n)
                throw ShapeError("mesh has " + std::to_string(n) + " vertices but " +
                                 std::to_string(data.labels.size()) + " labels");
        } else if (data.targets.rows() != n || data.targets.cols() != out_width) {
            throw ShapeError("targets are " + std::to_string(data.targets.rows()) + "x" +
                             std::to_string(data.targets.cols()) + ", expected " +
                             std::to_string(n) + "x" + std::to_string(out_width));
        }
        prepared.push_back(model.prepare(data));
    }

    Adam adam(config.adam, model.parameters());
    TrainResult result;
    result.history.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double loss_sum = 0.0;
        double metric_sum = 0.0;
        for (std::size_t m = 0; m < dataset.size(); ++m) {
            const MeshData& data = dataset[m];
            ForwardTrace trace;
            const Eigen::MatrixXd out = model.forward(prepared[m], data.input, &trace);
            double loss;
            Eigen::MatrixXd d_out;
            if (classify) {
                loss = cross_entropy_loss(out, data.labels);
                d_out = cross_entropy_backward(out, data.labels);
                metric_sum += evaluate_classification(predict_labels(out), data.labels);
            } else {
                loss = mse_loss(out, data.targets);
                d_out = mse_backward(out, data.targets);
                metric_sum += std::sqrt(loss);
            }
            if (!std::isfinite(loss))
                throw DivergenceError(
                    "loss became non-finite at epoch " + std::to_string(epoch), epoch);
            adam.step(model.backward(prepared[m], trace, d_out));
            model.refresh();
            loss_sum += loss;
        }
        EpochRecord record;
        record.epoch = epoch;
        record.loss = loss_sum / static_cast<double>(dataset.size());
        record.metric = metric_sum / static_cast<double>(dataset.size());
        result.history.push_back(record);
        if (config.on_epoch) config.on_epoch(epoch, record.loss, record.metric, model);
    }
    return result;
}

Eigen::VectorXi predict_labels(const Eigen::MatrixXd& outputs) {
    if (outputs.cols() == 0) throw DomainError("prediction needs at least one class");
    Eigen::VectorXi labels(outputs.rows());
    for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        int best = 0;
        for (Eigen::Index c = 1; c < outputs.cols(); ++c)
            if (outputs(i, c) > outputs(i, best)) best = static_cast<int>(c);
        labels[i] = best;
    }
    return labels;
}

double evaluate_classification(const Eigen::VectorXi& predictions,
                               const Eigen::VectorXi& truth) {
    if (predictions.size() != truth.size())
        throw ShapeError("prediction count " + std::to_string(predictions.size()) +
                         " does not match truth count " + std::to_string(truth.size()));
    if (predictions.size() == 0) throw DomainError("accuracy needs samples");
    return static_cast<double>((predictions.array() == truth.array()).count()) /
           static_cast<double>(predictions.size());
}

std::vector<std::pair<double, double>> evaluate_correspondence(
    const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth, const TriMesh& mesh,
    const std::vector<double>& radius_fractions) {
    if (predicted.size() != truth.size())
        throw ShapeError("prediction count " + std::to_string(predicted.size()) +
                         " does not match truth count " + std::to_string(truth.size()));
    if (predicted.size() == 0) throw DomainError("correspondence needs samples");
    const int n = static_cast<int>(mesh.vertices.rows());
    for (Eigen::Index i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0 || predicted[i] >= n || truth[i] < 0 || truth[i] >= n)
            throw DomainError("vertex id outside the mesh at entry " +
                              std::to_string(i));
    }
    const double diameter = mesh_diameter(mesh);
    if (!(diameter > 0.0)) throw DomainError("mesh diameter must be positive");

    // one Dijkstra per distinct ground-truth vertex
    std::unordered_map<int, std::vector<double>> distances;
    Eigen::VectorXd errors(predicted.size());
    for (Eigen::Index i = 0; i < predicted.size(); ++i) {
        auto it = distances.find(truth[i]);
        if (it == distances.end())
            it = distances.emplace(truth[i], vertex_distances(mesh, truth[i])).first;
        const double d = it->second[static_cast<std::size_t>(predicted[i])];
        if (!std::isfinite(d))
            throw DomainError("prediction " + std::to_string(predicted[i]) +
                              " is unreachable from vertex " + std::to_string(truth[i]));
        errors[i] = d;
    }

    std::vector<std::pair<double, double>> curve;
    curve.reserve(radius_fractions.size());
    for (double fraction : radius_fractions) {
        if (fraction < 0.0 || !std::isfinite(fraction))
            throw DomainError("radius fractions must be non-negative");
        const double limit = fraction * diameter;
        const double hits =
            static_cast<double>((errors.array() <= limit).count());
        curve.emplace_back(fraction, hits / static_cast<double>(errors.size()));
    }
    return curve;
}

RegressionReport evaluate_regression(const Eigen::VectorXd& predictions,
                                     const Eigen::VectorXd& truth,
                                     const std::vector<double>& thresholds) {
    if (predictions.size() != truth.size())
        throw ShapeError("prediction count " + std::to_string(predictions.size()) +
                         " does not match truth count " + std::to_string(truth.size()));
    if (predictions.size() < 2)
        throw DomainError("regression metrics need at least two samples");

    RegressionReport report;
    const Eigen::VectorXd err = predictions - truth;

    const double truth_rms = std::sqrt(truth.squaredNorm() /
                                       static_cast<double>(truth.size()));
    if (!(truth_rms > 0.0))
        throw DomainError("rrmse is undefined for all-zero truth");
    report.rrmse =
        std::sqrt(err.squaredNorm() / static_cast<double>(err.size())) / truth_rms;

    const double mp = predictions.mean();
    const double mt = truth.mean();
    const Eigen::VectorXd cp = predictions.array() - mp;
    const Eigen::VectorXd ct = truth.array() - mt;
    const double denom = std::sqrt(cp.squaredNorm() * ct.squaredNorm());
    if (!(denom > 0.0))
        throw DomainError("pearson correlation is undefined for constant input");
    report.pcc = cp.dot(ct) / denom;

    // relative metrics skip exact-zero truth entries and report the count
    double mape_sum = 0.0;
    int used = 0;
    std::map<double, int> hits;
    for (double t : thresholds) {
        if (!(t > 0.0) || !std::isfinite(t))
            throw DomainError("hit-rate thresholds must be positive");
        hits[t] = 0;
    }
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0.0) {
            ++report.excluded;
            continue;
        }
        const double rel = std::fabs(err[i] / truth[i]);
        mape_sum += rel;
        ++used;
        for (auto& [threshold, count] : hits)
            if (rel <= threshold) ++count;
    }
    if (used == 0) throw DomainError("every truth entry is zero");
    report.mape = mape_sum / static_cast<double>(used);
    for (const auto& [threshold, count] : hits)
        report.hit_rate[threshold] =
            static_cast<double>(count) / static_cast<double>(used);
    return report;
}

}  // namespace zernet
