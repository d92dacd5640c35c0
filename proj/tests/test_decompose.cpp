#include "zernet/decompose.hpp"

#include <cmath>

#include "doctest.h"
#include "zernet/errors.hpp"
#include "zernet/util.hpp"
#include "zernet/zernike.hpp"

using namespace zernet;

namespace {

// well-spread synthetic patch: golden-angle spiral on a disk of radius r0
GeodesicPatch spiral_patch(int count, double r0) {
    GeodesicPatch patch;
    patch.center = 0;
    patch.r0 = r0;
    patch.entries.resize(static_cast<std::size_t>(count));
    const double golden = 2.3999632297286533;
    for (int i = 0; i < count; ++i) {
        PatchEntry& e = patch.entries[static_cast<std::size_t>(i)];
        e.r = r0 * std::sqrt((i + 0.5) / count);
        e.theta = wrap_angle(golden * i);
        e.node_a = i;
    }
    return patch;
}

Eigen::MatrixXd spiral_basis(const GeodesicPatch& patch, int k) {
    const Eigen::Index n = static_cast<Eigen::Index>(patch.entries.size());
    Eigen::VectorXd r(n), theta(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r[i] = std::min(patch.entries[static_cast<std::size_t>(i)].r / patch.r0, 1.0);
        theta[i] = patch.entries[static_cast<std::size_t>(i)].theta;
    }
    return basis_matrix<double>(r, theta, k);
}

}  // namespace

TEST_CASE("constant fields decompose onto the piston coefficient alone") {
    const GeodesicPatch patch = spiral_patch(60, 0.37);
    const double c = -2.25;
    Eigen::MatrixXd values =
        Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(patch.entries.size()), 1, c);
    const DecomposeResult res = decompose(patch, values, 21);
    REQUIRE(res.alpha.rows() == 21);
    REQUIRE(res.alpha.cols() == 1);
    CHECK(res.alpha(0, 0) == doctest::Approx(c * std::sqrt(kPi)).epsilon(1e-10));
    for (int j = 1; j < 21; ++j) CHECK(std::fabs(res.alpha(j, 0)) < 1e-8);
    CHECK(res.residual[0] < 1e-10);
}

TEST_CASE("band-limited fields round-trip through decomposition") {
    const int k = 21;
    const GeodesicPatch patch = spiral_patch(50, 0.8);
    Rng rng(91);
    Eigen::MatrixXd truth(k, 3);
    for (int j = 0; j < k; ++j)
        for (int c = 0; c < 3; ++c) truth(j, c) = rng.uniform(-2.0, 2.0);

    Eigen::MatrixXd values(static_cast<Eigen::Index>(patch.entries.size()), 3);
    for (std::size_t i = 0; i < patch.entries.size(); ++i) {
        const double r = patch.entries[i].r / patch.r0;
        const double theta = patch.entries[i].theta;
        for (int c = 0; c < 3; ++c) {
            double sum = 0.0;
            for (int j = 0; j < k; ++j)
                sum += truth(j, c) * normalized_zernike<double>(j + 1, r, theta);
            values(static_cast<Eigen::Index>(i), c) = sum;
        }
    }
    const DecomposeResult res = decompose(patch, values, k);
    CHECK((res.alpha - truth).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(res.residual.maxCoeff() < 1e-8);
}

TEST_CASE("decomposition is linear in the field") {
    const GeodesicPatch patch = spiral_patch(64, 0.5);
    Rng rng(7);
    const Eigen::Index n = static_cast<Eigen::Index>(patch.entries.size());
    Eigen::MatrixXd f(n, 1), g(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        f(i, 0) = rng.normal();
        g(i, 0) = rng.normal();
    }
    const Eigen::MatrixXd combo = 2.5 * f - 1.25 * g;
    const Eigen::MatrixXd direct = decompose(patch, combo, 10).alpha;
    const Eigen::MatrixXd composed =
        2.5 * decompose(patch, f, 10).alpha - 1.25 * decompose(patch, g, 10).alpha;
    CHECK((direct - composed).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("no perturbation of the solution decreases the residual") {
    const int k = 15;
    const GeodesicPatch patch = spiral_patch(70, 1.0);
    Rng rng(123);
    const Eigen::Index n = static_cast<Eigen::Index>(patch.entries.size());
    Eigen::MatrixXd values(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) values(i, 0) = rng.normal();

    const DecomposeResult res = decompose(patch, values, k);
    CHECK(res.residual[0] > 1e-3);  // noise is not band-limited
    const Eigen::MatrixXd basis = spiral_basis(patch, k);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd dir(k);
        for (int j = 0; j < k; ++j) dir[j] = rng.normal();
        dir.normalize();
        const Eigen::VectorXd perturbed = res.alpha.col(0) + 1e-3 * dir;
        const double moved = (basis * perturbed - values.col(0)).norm();
        CHECK(moved >= res.residual[0] - 1e-12);
    }
}

TEST_CASE("collinear samples trigger a rank-deficiency error unless ridge is on") {
    GeodesicPatch patch = spiral_patch(50, 1.0);
    for (auto& e : patch.entries) e.theta = 0.0;  // all samples on one ray
    Eigen::MatrixXd values =
        Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(patch.entries.size()), 1);
    try {
        decompose(patch, values, 21);
        FAIL("expected RankDeficiencyError");
    } catch (const RankDeficiencyError& e) {
        CHECK(e.rank() >= 1);
        CHECK(e.rank() < 21);
        CHECK(std::string(e.code()) == "rank_deficient");
    }

    DecomposeOptions ridge;
    ridge.ridge = true;
    const DecomposeResult res = decompose(patch, values, 21, ridge);
    CHECK(res.alpha.allFinite());
    // the regularized fit still reproduces the values along the sampled ray,
    // up to the small bias the ridge penalty introduces
    CHECK(res.residual[0] < 1e-4);
}

TEST_CASE("decompose validates shapes and sample counts") {
    const GeodesicPatch patch = spiral_patch(10, 1.0);
    const Eigen::MatrixXd values = Eigen::MatrixXd::Ones(10, 1);
    CHECK_THROWS_AS(decompose(patch, values, 21), DomainError);  // 10 < k
    CHECK_THROWS_AS(decompose(patch, values, 0), DomainError);
    CHECK_THROWS_AS(decompose(patch, Eigen::MatrixXd::Ones(9, 1), 5), ShapeError);
    GeodesicPatch invalid;
    CHECK_THROWS_AS(decompose(invalid, Eigen::MatrixXd(0, 1), 5), DomainError);
}

TEST_CASE("reconstruct evaluates the fitted expansion") {
    const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(21);
    CHECK(reconstruct(zeros, 0.5, 1.0) == 0.0);
    Eigen::VectorXd piston = Eigen::VectorXd::Zero(21);
    piston[0] = std::sqrt(kPi);
    CHECK(reconstruct(piston, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(reconstruct(piston, 0.9, 2.7) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(reconstruct(piston, 1.5, 0.0), DomainError);
    CHECK_THROWS_AS(reconstruct(piston, -0.1, 0.0), DomainError);

    // residual returned by decompose equals the pointwise reconstruction error
    const GeodesicPatch patch = spiral_patch(40, 0.6);
    Rng rng(5);
    Eigen::MatrixXd values(40, 2);
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index c = 0; c < 2; ++c) values(i, c) = rng.normal();
    const DecomposeResult res = decompose(patch, values, 12);
    Eigen::MatrixXd recon(40, 2);
    for (std::size_t i = 0; i < patch.entries.size(); ++i)
        recon.row(static_cast<Eigen::Index>(i)) =
            reconstruct(res.alpha, patch.entries[i].r / patch.r0, patch.entries[i].theta)
                .transpose();
    for (Eigen::Index c = 0; c < 2; ++c)
        CHECK((recon.col(c) - values.col(c)).norm() ==
              doctest::Approx(res.residual[c]).epsilon(1e-10));
}

TEST_CASE("decompose operator reproduces the direct decomposition route") {
    const TriMesh disk = make_planar_disk(1.0, 6);
    const auto samples = uniform_sample_surface(disk, 3000, 11);
    const NeighborGraph graph = build_neighbor_graph(disk, samples);
    GeodesicPatch patch = geodesic_patch(disk, graph, 40, 0.3, 3);
    densify_patch(patch, 60, 9);

    Eigen::MatrixXd field(disk.vertex_count(), 2);
    Rng rng(77);
    for (Eigen::Index i = 0; i < field.rows(); ++i) {
        const Eigen::Vector3d p = disk.vertices.row(i);
        field(i, 0) = std::sin(3.0 * p.x()) + p.y();
        field(i, 1) = rng.normal();
    }
    const int k = 10;
    const Eigen::MatrixXd direct =
        decompose(patch, patch_values(disk, graph, patch, field), k).alpha;
    const DecomposeOperator op = decompose_operator(disk, graph, patch, k);
    Eigen::MatrixXd sub(op.columns.size(), field.cols());
    for (std::size_t c = 0; c < op.columns.size(); ++c) sub.row(c) = field.row(op.columns[c]);
    const Eigen::MatrixXd via_operator = op.matrix * sub;
    CHECK((via_operator - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("field decomposition fills a tensor column per vertex") {
    const TriMesh disk = make_planar_disk(1.0, 6);
    const PatchSet set = build_patch_set(disk, 3000, 0.25, 3, 60, 31, 1);
    REQUIRE(set.failed_vertices.empty());
    const NeighborGraph graph = build_neighbor_graph(disk, set.samples);

    const int k = 21;
    const double c = 1.75;
    Eigen::MatrixXd field = Eigen::MatrixXd::Constant(disk.vertex_count(), 1, c);
    const FieldDecomposition fd =
        field_to_patch_tensor(disk, graph, set.patches, field, k);
    CHECK(fd.failed_vertices.empty());
    fd.tensor.validate();
    CHECK(fd.tensor.n == disk.vertex_count());
    CHECK(fd.tensor.k == k);
    CHECK(fd.tensor.d == 1);
    CHECK(fd.tensor.r0 == 0.25);
    for (int v = 0; v < fd.tensor.n; ++v) {
        const Eigen::MatrixXd alpha = fd.tensor.coefficients(v);
        CHECK(alpha(0, 0) == doctest::Approx(c * std::sqrt(kPi)).epsilon(1e-8));
        for (int j = 1; j < k; ++j) CHECK(std::fabs(alpha(j, 0)) < 1e-7);
    }

    // bit-identical across reruns and thread counts
    const FieldDecomposition again =
        field_to_patch_tensor(disk, graph, set.patches, field, k, {}, 3);
    CHECK((again.tensor.data - fd.tensor.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sphere coordinates produce the expected tensor shape") {
    const TriMesh sphere = make_icosphere(3);
    REQUIRE(sphere.vertex_count() == 642);
    const PatchSet set = build_patch_set(sphere, 4000, 0.3, 3, 60, 7, 1);
    REQUIRE(set.failed_vertices.empty());
    const NeighborGraph graph = build_neighbor_graph(sphere, set.samples);
    const FieldDecomposition fd =
        field_to_patch_tensor(sphere, graph, set.patches, sphere.vertices, 21);
    CHECK(fd.failed_vertices.empty());
    CHECK(fd.tensor.n == 642);
    CHECK(fd.tensor.k == 21);
    CHECK(fd.tensor.d == 3);
    CHECK(fd.tensor.data.rows() == 63);
    CHECK(fd.tensor.data.cols() == 642);
    fd.tensor.validate();
}

TEST_CASE("failed vertices are listed and too many abort the decomposition") {
    const TriMesh disk = make_planar_disk(1.0, 6);
    const PatchSet set = build_patch_set(disk, 3000, 0.25, 3, 60, 31, 1);
    const NeighborGraph graph = build_neighbor_graph(disk, set.samples);
    Eigen::MatrixXd field = Eigen::MatrixXd::Ones(disk.vertex_count(), 1);

    // one bad vertex out of 127 stays under the 1% abort threshold
    std::vector<GeodesicPatch> patched = set.patches;
    patched[5] = GeodesicPatch();
    const FieldDecomposition fd = field_to_patch_tensor(disk, graph, patched, field, 21);
    REQUIRE(fd.failed_vertices.size() == 1);
    CHECK(fd.failed_vertices[0] == 5);
    CHECK_FALSE(fd.failure_reasons[0].empty());
    CHECK(fd.tensor.data.col(5).cwiseAbs().maxCoeff() == 0.0);

    patched[6] = GeodesicPatch();  // 2 of 127 exceeds 1%
    try {
        field_to_patch_tensor(disk, graph, patched, field, 21);
        FAIL("expected AggregateFailureError");
    } catch (const AggregateFailureError& e) {
        CHECK(e.failed() == 2);
        CHECK(std::string(e.code()) == "aggregate_failure");
    }

    CHECK_THROWS_AS(field_to_patch_tensor(disk, graph, set.patches,
                                          Eigen::MatrixXd::Ones(5, 1), 21),
                    ShapeError);
}
