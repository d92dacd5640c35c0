#pragma once

// Discrete exponential map: a densified point graph over mesh vertices and
// surface samples, shortest-path geodesic polar patches around vertices, and
// synthetic patch densification.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "zernet/mesh.hpp"

namespace zernet {

// Graph over mesh vertices and surface samples. Node ids 0..V-1 are the mesh
// vertices, V..V+S-1 index into samples. Edges connect nodes co-located on a
// face or on faces sharing a vertex and are weighted by Euclidean length.
struct NeighborGraph {
    int n_vertices = 0;
    int n_samples = 0;
    std::vector<int> offsets;  // CSR, size node_count() + 1
    std::vector<int> adjacency;
    std::vector<double> weights;
    Eigen::Matrix<double, Eigen::Dynamic, 3> positions;  // one row per node
    std::vector<SurfaceSample> samples;                  // anchors for field interpolation

    int node_count() const { return n_vertices + n_samples; }
};

NeighborGraph build_neighbor_graph(const TriMesh& mesh,
                                   const std::vector<SurfaceSample>& samples);

// Dijkstra from source, truncated at graph distance limit. Equal-distance
// queue entries settle in ascending node order, which pins the reported
// first hops. first_hop[w] is the first node after source on the shortest
// path to w (-1 for source and unreached nodes).
struct ShortestPaths {
    std::vector<double> dist;
    std::vector<int> first_hop;
};

ShortestPaths truncated_dijkstra(const NeighborGraph& graph, int source, double limit);

// One patch neighbor. Raw entries reference graph node node_a (node_b < 0).
// Densified entries blend two raw nodes: position and value are
// (1 - t) * node_a + t * node_b.
struct PatchEntry {
    double r = 0.0;
    double theta = 0.0;
    int node_a = -1;
    int node_b = -1;
    double t = 0.0;
};

// Geodesic polar neighborhood of a vertex: every graph node within graph
// distance r0. r is the graph distance; theta is the angle of the first
// shortest-path segment, projected into the tangent plane and measured from
// frame.e1 counterclockwise about frame.normal. The center itself is entry 0
// with r = 0.
struct GeodesicPatch {
    int center = -1;
    double r0 = 0.0;
    TangentFrame frame;
    std::vector<PatchEntry> entries;

    bool valid() const { return center >= 0; }
};

GeodesicPatch geodesic_patch(const TriMesh& mesh, const NeighborGraph& graph, int center,
                             double r0, int min_raw_neighbors = 3);

// Appends convex blends of random raw entry pairs until the patch holds
// max(current, target_count) entries. Deterministic in seed.
void densify_patch(GeodesicPatch& patch, int target_count, std::uint64_t seed);

// Field value at a graph node: direct lookup for vertex nodes, barycentric
// interpolation for sample nodes.
Eigen::VectorXd node_field_value(const TriMesh& mesh, const NeighborGraph& graph, int node,
                                 const Eigen::MatrixXd& field);

// Values of a per-vertex field (N x d) at all patch entries (entries x d).
Eigen::MatrixXd patch_values(const TriMesh& mesh, const NeighborGraph& graph,
                             const GeodesicPatch& patch, const Eigen::MatrixXd& field);

// Every patch entry's value is a fixed linear combination of per-vertex
// field values; this materializes that map. weights is (entries x columns),
// columns lists the mesh vertices involved in ascending order.
struct PatchWeights {
    std::vector<int> columns;
    Eigen::MatrixXd weights;
};

PatchWeights patch_weight_matrix(const TriMesh& mesh, const NeighborGraph& graph,
                                 const GeodesicPatch& patch);

// Patches for all vertices of one mesh plus the sample set they refer to.
// Vertices whose patch failed stay in place with center == -1 and are listed
// in failed_vertices alongside a reason.
struct PatchSet {
    double r0 = 0.0;
    int min_raw = 3;
    int target_count = 0;
    std::uint64_t seed = 0;
    std::vector<SurfaceSample> samples;
    std::vector<GeodesicPatch> patches;
    std::vector<int> failed_vertices;
    std::vector<std::string> failure_reasons;
};

// Samples the surface, builds the graph, and extracts + densifies a patch
// per vertex. Deterministic in seed for any thread count.
PatchSet build_patch_set(const TriMesh& mesh, int sample_count, double r0,
                         int min_raw_neighbors, int target_count, std::uint64_t seed,
                         int threads = 1);

}  // namespace zernet
