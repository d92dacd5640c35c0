#pragma once

// Least-squares Zernike decomposition of patch-sampled fields, pointwise
// reconstruction, and assembly of the per-mesh coefficient tensor.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "zernet/exp_map.hpp"
#include "zernet/mesh.hpp"

namespace zernet {

// Zernike coefficients for all vertices of one mesh. data is (k * d) x N,
// one column per vertex; within a column, channel c's coefficients occupy
// rows c * k .. c * k + k - 1, basis index fastest.
struct PatchTensor {
    Eigen::MatrixXd data;
    int n = 0;
    int k = 0;
    int d = 0;
    double r0 = 0.0;

    // k x d coefficient block of one vertex
    Eigen::MatrixXd coefficients(int vertex) const;
    void validate() const;
};

struct DecomposeOptions {
    // opt-in fallback: ridge-regularized solve instead of failing when the
    // sample geometry is rank-deficient
    bool ridge = false;
};

// Coefficients (k x d) and per-channel residual norms of the least-squares
// fit min_alpha |B alpha - values| over a patch's samples.
struct DecomposeResult {
    Eigen::MatrixXd alpha;
    Eigen::VectorXd residual;
};

DecomposeResult decompose(const GeodesicPatch& patch, const Eigen::MatrixXd& values,
                          int k, const DecomposeOptions& options = {});

// Fitted function value at one point of the unit disk; alpha is one
// coefficient column (scalar field) or k x d (one value per channel).
double reconstruct(const Eigen::VectorXd& alpha, double r, double theta);
Eigen::VectorXd reconstruct(const Eigen::MatrixXd& alpha, double r, double theta);

// The map from per-vertex field values to one vertex's coefficients is
// linear; this materializes it as a k x |columns| matrix acting on the
// field rows listed in columns.
struct DecomposeOperator {
    std::vector<int> columns;
    Eigen::MatrixXd matrix;
};

DecomposeOperator decompose_operator(const TriMesh& mesh, const NeighborGraph& graph,
                                     const GeodesicPatch& patch, int k,
                                     const DecomposeOptions& options = {});

// Coefficient tensor for a whole mesh plus the vertices whose patch or fit
// failed. Failed columns are zero and listed, never silently dropped.
struct FieldDecomposition {
    PatchTensor tensor;
    std::vector<int> failed_vertices;
    std::vector<std::string> failure_reasons;
};

FieldDecomposition field_to_patch_tensor(const TriMesh& mesh, const NeighborGraph& graph,
                                         const std::vector<GeodesicPatch>& patches,
                                         const Eigen::MatrixXd& field, int k,
                                         const DecomposeOptions& options = {},
                                         int threads = 1);

}  // namespace zernet
