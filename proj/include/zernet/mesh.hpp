#pragma once

// Triangle meshes: loading, synthesis, area normalization, uniform surface
// sampling, per-vertex tangent frames, and the adjacency tables everything
// downstream leans on.

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "zernet/errors.hpp"
#include "zernet/util.hpp"

namespace zernet {

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3>;

// Triangle mesh plus named per-vertex fields. Adjacency tables are derived
// state; finalize_mesh(...) must run after any direct mutation of vertices
// or faces (loaders and generators call it themselves).
struct TriMesh {
    Vertices vertices;
    Faces faces;
    std::map<std::string, Eigen::MatrixXd> fields;

    bool non_manifold = false;
    int boundary_edge_count = 0;

    std::vector<std::vector<int>> vertex_faces;      // incident faces, ascending
    std::vector<std::vector<int>> vertex_neighbors;  // one-ring vertices, ascending
    std::vector<std::vector<int>> face_adjacency;    // faces sharing an edge, ascending
    std::vector<bool> vertex_on_non_manifold_edge;

    int vertex_count() const { return static_cast<int>(vertices.rows()); }
    int face_count() const { return static_cast<int>(faces.rows()); }
};

// Validates indices, drops zero-area faces, rebuilds adjacency, and flags
// non-manifold edges (flagged, not fatal; patch extraction rejects them
// locally). Returns the number of dropped faces.
int finalize_mesh(TriMesh& mesh);

// Format chosen by extension (.off / .obj, case-insensitive).
TriMesh load_mesh(const std::string& path);
TriMesh load_off(std::istream& in, const std::string& name);
TriMesh load_obj(std::istream& in, const std::string& name);

// Writes vertices at full double precision so a load round-trips exactly.
void save_off(const TriMesh& mesh, const std::string& path);

double face_area(const TriMesh& mesh, int face);
double mesh_area(const TriMesh& mesh);

// Longest graph-geodesic estimate (double Dijkstra sweep over mesh edges);
// the characteristic length used to normalize correspondence error radii.
double mesh_diameter(const TriMesh& mesh);

// Shortest edge-path distances from one vertex to every vertex (infinity
// where unreachable).
std::vector<double> vertex_distances(const TriMesh& mesh, int source);

// Uniformly scales the mesh in place so total area hits target; returns the
// linear scale factor applied.
double normalize_area(TriMesh& mesh, double target_area);

// Point on a mesh face. position is redundant with (face, barycentric) and
// kept for convenience; both are serialized.
struct SurfaceSample {
    int face = -1;
    Eigen::Vector3d barycentric{0, 0, 0};
    Eigen::Vector3d position{0, 0, 0};
};

// Area-weighted uniform sampling, deterministic in seed.
std::vector<SurfaceSample> uniform_sample_surface(const TriMesh& mesh, int count,
                                                  std::uint64_t seed);

// Linear interpolation of a per-vertex field (N x d) at a surface sample.
Eigen::VectorXd sample_field_value(const TriMesh& mesh, const Eigen::MatrixXd& field,
                                   const SurfaceSample& sample);

// Orthonormal right-handed frame in the tangent plane of a vertex. e1 points
// along the projected edge to the lowest-index neighbor whose projection is
// not degenerate; e2 = normal x e1.
struct TangentFrame {
    int vertex = -1;
    Eigen::Vector3d normal{0, 0, 1};
    Eigen::Vector3d e1{1, 0, 0};
    Eigen::Vector3d e2{0, 1, 0};
};

TangentFrame tangent_frame(const TriMesh& mesh, int vertex);

// Synthetic fixtures. Each retains its analytic surface coordinates as a
// per-vertex field for ground-truth comparisons.

// 10 * 4^subdivisions + 2 vertices; field "spherical" = (polar, azimuth).
TriMesh make_icosphere(int subdivisions, double radius = 1.0);

// field "angles" = (major angle, minor angle).
TriMesh make_torus(double major_radius, double minor_radius, int segments_major,
                   int segments_minor);

// Flat disk in the z = 0 plane; ring r has 6r vertices; field "polar" = (r, theta).
TriMesh make_planar_disk(double radius, int rings);

}  // namespace zernet
