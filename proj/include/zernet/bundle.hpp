#pragma once

// Experiment bundles: bind meshes, input fields, labels or targets, surface
// samples, geodesic patches, and the input coefficient tensor into one
// directory artifact with an integrity-checked manifest. Preparation is a
// pure function of (input files, config, seed), so reruns are byte-identical.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "zernet/decompose.hpp"
#include "zernet/exp_map.hpp"
#include "zernet/mesh.hpp"
#include "zernet/network.hpp"

namespace zernet {

struct PrepareConfig {
    std::vector<std::string> mesh_paths;
    // each list is either empty or parallel to mesh_paths
    std::vector<std::string> field_paths;   // empty: vertex xyz becomes the input
    std::vector<std::string> label_paths;   // classification targets
    std::vector<std::string> target_paths;  // regression targets
    std::vector<double> radii{0.3};         // patch radius per conv scale
    int k = 21;
    int s = 4;
    int sample_count = 12000;
    int target_count = 50;
    double area = 0.0;  // normalize each mesh to this surface area; 0 keeps scale
    std::uint64_t seed = 0;
    int threads = 1;
};

struct BundleMesh {
    std::string name;
    std::string source_path;
    TriMesh mesh;
    std::vector<SurfaceSample> samples;
    std::vector<std::vector<GeodesicPatch>> patches;  // indexed like config.radii
    PatchTensor tensor;                               // input field at radii[0]
    Eigen::MatrixXd input;                            // N x d
    Eigen::VectorXi labels;                           // empty when absent
    Eigen::MatrixXd targets;                          // 0 x 0 when absent
    std::vector<int> failed_vertices;                 // union over radii + tensor
};

struct ExperimentBundle {
    int version = 1;
    PrepareConfig config;
    std::uint64_t config_hash = 0;
    std::vector<BundleMesh> meshes;
};

// Stable fingerprint of everything that shapes the artifacts.
std::uint64_t config_fingerprint(const PrepareConfig& config);

// normalize -> sample -> patch (every radius) -> decompose, per mesh. A mesh
// that fails as a whole (unreadable input, over 1% failed vertices) aborts
// with an error naming it; residual per-vertex failures are recorded.
ExperimentBundle prepare_bundle(const PrepareConfig& config);

// Writes the directory artifact. Refuses an existing bundle unless force.
void save_bundle(const ExperimentBundle& bundle, const std::string& dir,
                 bool force = false);

// Verifies the manifest version and every per-file hash before loading.
ExperimentBundle load_bundle(const std::string& dir);

// Rebuilds the training-ready view (graphs are derived, not stored).
std::vector<MeshData> bundle_to_dataset(const ExperimentBundle& bundle);

}  // namespace zernet
