#pragma once

// Trainable single-scale networks built from Zernike convolution blocks,
// pointwise nonlinearities, and dense layers, plus losses, Adam, the
// training loop, and evaluation metrics.
//
// Between conv blocks activations live as per-vertex values; each ZerConv
// re-decomposes them into Zernike coefficients over its fixed patches
// through a precomputed per-vertex linear operator, convolves, and (for the
// last conv block) pools over directions.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "zernet/conv.hpp"
#include "zernet/decompose.hpp"
#include "zernet/exp_map.hpp"
#include "zernet/mesh.hpp"

namespace zernet {

enum class LayerKind { ZerConv, ReLU, Linear, Softmax };

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    int d_out = 0;        // ZerConv, Linear
    double r0 = 0.0;      // ZerConv
    int k = 0;            // ZerConv
    int s = 1;            // ZerConv
    bool directional = false;  // ZerConv
};

LayerSpec conv_layer(int d_out, double r0, int k, int s, bool directional = false);
LayerSpec relu_layer();
LayerSpec linear_layer(int d_out);
LayerSpec softmax_layer();

enum class LossKind { CrossEntropy, Mse };

struct ModelSpec {
    std::vector<LayerSpec> layers;
    LossKind loss = LossKind::CrossEntropy;
    int d_in = 0;  // input field channels
    std::uint64_t seed = 0;
};

// One mesh with its fields and every patch domain the model's conv layers
// need, keyed by patch radius.
struct PatchDomain {
    double r0 = 0.0;
    NeighborGraph graph;
    std::vector<GeodesicPatch> patches;
};

struct MeshData {
    TriMesh mesh;
    std::vector<PatchDomain> domains;
    Eigen::MatrixXd input;     // N x d_in
    Eigen::VectorXi labels;    // classification targets
    Eigen::MatrixXd targets;   // regression targets, N x width
};

// Builds the standard patch pipeline for one radius: sample, graph, patch +
// densify per vertex. Throws AggregateFailureError when more than 1% of the
// vertices fail.
PatchDomain make_patch_domain(const TriMesh& mesh, double r0, int sample_count,
                              int target_count, std::uint64_t seed, int threads = 1);

// A layer with its parameters.
struct Layer {
    LayerSpec spec;
    // ZerConv
    KernelBank bank;
    bool pool_output = false;
    // Linear
    Eigen::MatrixXd weight;
    Eigen::VectorXd bias;
};

// Per-mesh precomputation: one decomposition operator per vertex per conv
// layer, mapping gathered field values to Zernike coefficients.
struct PreparedMesh {
    const MeshData* data = nullptr;
    std::vector<std::vector<DecomposeOperator>> conv_ops;  // indexed like model convs
};

// Cached activations of one forward pass, consumed by backward.
struct ForwardTrace {
    // per layer: the single-path input (d x N) or the directional input
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<std::vector<Eigen::MatrixXd>> dir_inputs;
    std::vector<PatchTensor> tensors;                     // conv layers
    std::vector<DirectionalTensor> dir_tensors;           // directional convs
    std::vector<PooledResponse> pooled;                   // pooling convs
    std::vector<Eigen::MatrixXd> outputs;                 // final d x N
    bool valid = false;
};

class Model {
public:
    Model() = default;
    // builds layers and initializes parameters deterministically from spec.seed
    explicit Model(const ModelSpec& spec);

    const ModelSpec& spec() const { return spec_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    // precomputes the per-vertex decomposition operators this model needs on
    // one mesh; throws when a conv layer's radius has no patch domain
    PreparedMesh prepare(const MeshData& data) const;

    // per-vertex outputs, rows = vertices
    Eigen::MatrixXd forward(const PreparedMesh& prepared, const Eigen::MatrixXd& input,
                            ForwardTrace* trace = nullptr) const;

    // loss gradients for every trainable tensor, flattened and ordered like
    // parameters(); d_output is the gradient at the network output (for
    // cross-entropy: at the softmax input, as produced by
    // cross_entropy_backward)
    std::vector<Eigen::VectorXd> backward(const PreparedMesh& prepared,
                                          const ForwardTrace& trace,
                                          const Eigen::MatrixXd& d_output) const;

    // flat views over all trainable tensors, in a fixed order
    struct ParamView {
        double* data = nullptr;
        Eigen::Index size = 0;
    };
    std::vector<ParamView> parameters();

    // copies of all trainable tensors in parameters() order, for persistence
    std::vector<Eigen::VectorXd> parameter_values() const;

    // re-derives rotated kernel slices after parameters changed
    void refresh();

private:
    ModelSpec spec_;
    std::vector<Layer> layers_;
    // static per-layer wiring, derived once at construction
    std::vector<char> dir_in_;     // layer consumes direction-resolved input
    std::vector<char> dir_out_;    // layer emits direction-resolved output
    std::vector<int> conv_pos_;    // index into PreparedMesh::conv_ops, -1 otherwise
    std::vector<int> param_slot_;  // first parameters() slot of this layer, -1
    std::vector<int> width_in_;    // input channels of each layer
    int param_count_ = 0;
};

double cross_entropy_loss(const Eigen::MatrixXd& probabilities,
                          const Eigen::VectorXi& labels);
double mse_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

// d(loss)/d(network output); for cross-entropy the model fuses this with the
// trailing softmax, so the gradient is taken at the softmax input
Eigen::MatrixXd cross_entropy_backward(const Eigen::MatrixXd& probabilities,
                                       const Eigen::VectorXi& labels);
Eigen::MatrixXd mse_backward(const Eigen::MatrixXd& predictions,
                             const Eigen::MatrixXd& targets);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias-corrected moments; holds one slot per parameter tensor.
class Adam {
public:
    Adam(const AdamConfig& config, std::vector<Model::ParamView> parameters);
    void step(const std::vector<Eigen::VectorXd>& gradients);
    long steps_taken() const { return steps_; }

private:
    AdamConfig config_;
    std::vector<Model::ParamView> parameters_;
    std::vector<Eigen::VectorXd> m_;
    std::vector<Eigen::VectorXd> v_;
    long steps_ = 0;
};

struct TrainConfig {
    AdamConfig adam;
    int epochs = 100;
    int checkpoint_interval = 0;  // 0: never
    // called after each epoch; also the checkpoint hook (epoch, loss, metric)
    std::function<void(int, double, double, const Model&)> on_epoch;
};

struct EpochRecord {
    int epoch = 0;
    double loss = 0.0;
    double metric = 0.0;  // accuracy for cross-entropy, rmse for mse
};

struct TrainResult {
    std::vector<EpochRecord> history;
};

// Full-mesh batches, one optimizer step per mesh per epoch. Throws
// DivergenceError when the loss stops being finite.
TrainResult train(Model& model, const TrainConfig& config,
                  const std::vector<MeshData>& dataset);

// argmax over output rows, ties to the smallest class index
Eigen::VectorXi predict_labels(const Eigen::MatrixXd& outputs);

double evaluate_classification(const Eigen::VectorXi& predictions,
                               const Eigen::VectorXi& truth);

// Fraction of predictions whose geodesic distance to the ground-truth vertex
// is within each radius, radii given as fractions of the mesh diameter.
std::vector<std::pair<double, double>> evaluate_correspondence(
    const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth, const TriMesh& mesh,
    const std::vector<double>& radius_fractions);

struct RegressionReport {
    double mape = 0.0;
    double rrmse = 0.0;
    double pcc = 0.0;
    std::map<double, double> hit_rate;  // threshold -> fraction within
    int excluded = 0;                   // zero-truth entries skipped by MAPE/HR
};

RegressionReport evaluate_regression(const Eigen::VectorXd& predictions,
                                     const Eigen::VectorXd& truth,
                                     const std::vector<double>& thresholds = {0.1, 0.2,
                                                                              0.3});

}  // namespace zernet
