#include "zernet/decompose.hpp"

#include <algorithm>
#include <cmath>

#include "zernet/errors.hpp"
#include "zernet/util.hpp"
#include "zernet/zernike.hpp"

namespace zernet {

namespace {

// design matrix over the patch's samples with radii mapped onto the unit disk
Eigen::MatrixXd patch_basis_matrix(const GeodesicPatch& patch, int k) {
    const Eigen::Index n = static_cast<Eigen::Index>(patch.entries.size());
    Eigen::VectorXd r(n);
    Eigen::VectorXd theta(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const PatchEntry& e = patch.entries[static_cast<std::size_t>(i)];
        // convex blends can overshoot r0 by rounding only; clamp that away
        r[i] = std::min(e.r / patch.r0, 1.0);
        theta[i] = e.theta;
    }
    return basis_matrix<double>(r, theta, k);
}

// minimum-norm ridge solve used only when the caller opted in on a
// rank-deficient system: alpha = V diag(s / (s^2 + lambda)) U^T rhs
Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& rhs) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double lambda = 1e-8 * sigma[0];
    Eigen::VectorXd filter(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        filter[i] = sigma[i] / (sigma[i] * sigma[i] + lambda);
    return svd.matrixV() * filter.asDiagonal() * (svd.matrixU().transpose() * rhs);
}

// shared solver: least squares of basis * X = rhs with rank policy applied
Eigen::MatrixXd solve_patch_system(const GeodesicPatch& patch, int k,
                                   const Eigen::MatrixXd& rhs,
                                   const DecomposeOptions& options,
                                   Eigen::MatrixXd* basis_out) {
    if (!patch.valid()) throw DomainError("decompose needs a valid patch");
    if (k < 1) throw DomainError("basis size must be positive, got " + std::to_string(k));
    if (!(patch.r0 > 0.0)) throw DomainError("patch radius must be positive");
    const int n = static_cast<int>(patch.entries.size());
    if (n < k)
        throw DomainError("decompose needs at least " + std::to_string(k) +
                          " samples, patch at vertex " + std::to_string(patch.center) +
                          " has " + std::to_string(n));

    const Eigen::MatrixXd basis = patch_basis_matrix(patch, k);
    if (basis_out != nullptr) *basis_out = basis;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    const int rank = static_cast<int>(qr.rank());
    if (rank < k) {
        if (!options.ridge)
            throw RankDeficiencyError("patch sample geometry at vertex " +
                                          std::to_string(patch.center) +
                                          " has numerical rank " + std::to_string(rank) +
                                          " < " + std::to_string(k),
                                      rank);
        return ridge_solve(basis, rhs);
    }
    return qr.solve(rhs);
}

}  // namespace

Eigen::MatrixXd PatchTensor::coefficients(int vertex) const {
    if (vertex < 0 || vertex >= n)
        throw DomainError("vertex " + std::to_string(vertex) + " outside tensor with " +
                          std::to_string(n) + " columns");
    return Eigen::Map<const Eigen::MatrixXd>(data.col(vertex).data(), k, d);
}

void PatchTensor::validate() const {
    if (n < 1 || k < 1 || d < 1)
        throw ShapeError("patch tensor dimensions must be positive, got n=" +
                         std::to_string(n) + " k=" + std::to_string(k) + " d=" +
                         std::to_string(d));
    if (data.rows() != static_cast<Eigen::Index>(k) * d ||
        data.cols() != static_cast<Eigen::Index>(n))
        throw ShapeError("patch tensor storage is " + std::to_string(data.rows()) + "x" +
                         std::to_string(data.cols()) + ", expected " +
                         std::to_string(static_cast<long>(k) * d) + "x" + std::to_string(n));
    if (!(r0 > 0.0)) throw ShapeError("patch tensor radius must be positive");
    if (!data.allFinite()) throw ShapeError("patch tensor has non-finite entries");
}

DecomposeResult decompose(const GeodesicPatch& patch, const Eigen::MatrixXd& values,
                          int k, const DecomposeOptions& options) {
    if (values.rows() != static_cast<Eigen::Index>(patch.entries.size()))
        throw ShapeError("values have " + std::to_string(values.rows()) +
                         " rows for a patch with " + std::to_string(patch.entries.size()) +
                         " entries");
    if (values.cols() < 1) throw ShapeError("values need at least one channel");

    Eigen::MatrixXd basis;
    DecomposeResult out;
    out.alpha = solve_patch_system(patch, k, values, options, &basis);
    out.residual = (basis * out.alpha - values).colwise().norm();
    return out;
}

double reconstruct(const Eigen::VectorXd& alpha, double r, double theta) {
    if (!(r >= 0.0 && r <= 1.0))
        throw DomainError("reconstruction radius must lie in [0, 1], got " +
                          std::to_string(r));
    double sum = 0.0;
    for (Eigen::Index j = 0; j < alpha.size(); ++j)
        sum += alpha[j] * normalized_zernike<double>(static_cast<int>(j) + 1, r, theta);
    return sum;
}

Eigen::VectorXd reconstruct(const Eigen::MatrixXd& alpha, double r, double theta) {
    if (!(r >= 0.0 && r <= 1.0))
        throw DomainError("reconstruction radius must lie in [0, 1], got " +
                          std::to_string(r));
    Eigen::VectorXd basis(alpha.rows());
    for (Eigen::Index j = 0; j < alpha.rows(); ++j)
        basis[j] = normalized_zernike<double>(static_cast<int>(j) + 1, r, theta);
    return alpha.transpose() * basis;
}

DecomposeOperator decompose_operator(const TriMesh& mesh, const NeighborGraph& graph,
                                     const GeodesicPatch& patch, int k,
                                     const DecomposeOptions& options) {
    const PatchWeights weights = patch_weight_matrix(mesh, graph, patch);
    DecomposeOperator out;
    out.columns = weights.columns;
    out.matrix = solve_patch_system(patch, k, weights.weights, options, nullptr);
    return out;
}

FieldDecomposition field_to_patch_tensor(const TriMesh& mesh, const NeighborGraph& graph,
                                         const std::vector<GeodesicPatch>& patches,
                                         const Eigen::MatrixXd& field, int k,
                                         const DecomposeOptions& options, int threads) {
    const int n = mesh.vertex_count();
    if (static_cast<int>(patches.size()) != n)
        throw ShapeError("expected one patch per vertex: " + std::to_string(patches.size()) +
                         " patches for " + std::to_string(n) + " vertices");
    if (field.rows() != n)
        throw ShapeError("field has " + std::to_string(field.rows()) + " rows for " +
                         std::to_string(n) + " vertices");
    if (field.cols() < 1) throw ShapeError("field needs at least one channel");
    if (k < 1) throw DomainError("basis size must be positive, got " + std::to_string(k));

    const int d = static_cast<int>(field.cols());
    FieldDecomposition out;
    out.tensor.n = n;
    out.tensor.k = k;
    out.tensor.d = d;
    out.tensor.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k) * d, n);

    double r0 = 0.0;
    for (const GeodesicPatch& p : patches)
        if (p.valid()) {
            r0 = p.r0;
            break;
        }
    out.tensor.r0 = r0 > 0.0 ? r0 : 1.0;

    std::vector<std::string> reasons(static_cast<std::size_t>(n));
    std::vector<char> failed(static_cast<std::size_t>(n), 0);
    parallel_for(n, threads, [&](int begin, int end) {
        for (int v = begin; v < end; ++v) {
            const GeodesicPatch& p = patches[static_cast<std::size_t>(v)];
            try {
                if (!p.valid()) throw DomainError("no patch");
                const Eigen::MatrixXd values = patch_values(mesh, graph, p, field);
                const DecomposeResult res = decompose(p, values, k, options);
                out.tensor.data.col(v) =
                    Eigen::Map<const Eigen::VectorXd>(res.alpha.data(),
                                                      static_cast<Eigen::Index>(k) * d);
            } catch (const Error& e) {
                failed[static_cast<std::size_t>(v)] = 1;
                reasons[static_cast<std::size_t>(v)] = e.what();
            }
        }
    });

    for (int v = 0; v < n; ++v)
        if (failed[static_cast<std::size_t>(v)]) {
            out.failed_vertices.push_back(v);
            out.failure_reasons.push_back(reasons[static_cast<std::size_t>(v)]);
        }
    if (static_cast<double>(out.failed_vertices.size()) > 0.01 * n)
        throw AggregateFailureError(
            "field decomposition failed at " + std::to_string(out.failed_vertices.size()) +
                " of " + std::to_string(n) + " vertices, first: " +
                (out.failure_reasons.empty() ? std::string("?") : out.failure_reasons[0]),
            static_cast<int>(out.failed_vertices.size()));
    return out;
}

}  // namespace zernet
