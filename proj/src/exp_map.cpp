#include "zernet/exp_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <utility>

namespace zernet {

NeighborGraph build_neighbor_graph(const TriMesh& mesh,
                                   const std::vector<SurfaceSample>& samples) {
    NeighborGraph graph;
    graph.n_vertices = mesh.vertex_count();
    graph.n_samples = static_cast<int>(samples.size());
    graph.samples = samples;

    const int n = graph.node_count();
    graph.positions.resize(n, 3);
    graph.positions.topRows(graph.n_vertices) = mesh.vertices;
    for (int s = 0; s < graph.n_samples; ++s) {
        if (samples[s].face < 0 || samples[s].face >= mesh.face_count())
            throw DomainError("sample " + std::to_string(s) + " references face " +
                              std::to_string(samples[s].face) + " out of range");
        graph.positions.row(graph.n_vertices + s) = samples[s].position;
    }

    // nodes sitting on each face: its corners plus the samples drawn on it
    std::vector<std::vector<int>> face_nodes(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f)
        face_nodes[f] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
    for (int s = 0; s < graph.n_samples; ++s)
        face_nodes[samples[s].face].push_back(graph.n_vertices + s);

    // faces count as adjacent when they share at least one vertex; the wider
    // stencil keeps short Euclidean hops one edge long even across fan corners
    std::vector<std::vector<int>> face_adjacent(mesh.face_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const auto& ring = mesh.vertex_faces[v];
        for (int f : ring)
            for (int g : ring)
                if (f != g) face_adjacent[f].push_back(g);
    }
    for (auto& list : face_adjacent) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    std::vector<std::pair<int, int>> edges;
    auto connect = [&edges](const std::vector<int>& a, const std::vector<int>& b) {
        for (int u : a)
            for (int v : b)
                if (u != v) edges.emplace_back(std::min(u, v), std::max(u, v));
    };
    for (int f = 0; f < mesh.face_count(); ++f) {
        connect(face_nodes[f], face_nodes[f]);
        for (int g : face_adjacent[f])
            if (f < g) connect(face_nodes[f], face_nodes[g]);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<int> degree(n, 0);
    for (const auto& [u, v] : edges) {
        ++degree[u];
        ++degree[v];
    }
    graph.offsets.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) graph.offsets[i + 1] = graph.offsets[i] + degree[i];
    graph.adjacency.resize(edges.size() * 2);
    graph.weights.resize(edges.size() * 2);
    std::vector<int> cursor(graph.offsets.begin(), graph.offsets.end() - 1);
    for (const auto& [u, v] : edges) {
        const double w = (graph.positions.row(u) - graph.positions.row(v)).norm();
        graph.adjacency[cursor[u]] = v;
        graph.weights[cursor[u]++] = w;
        graph.adjacency[cursor[v]] = u;
        graph.weights[cursor[v]++] = w;
    }
    return graph;
}

ShortestPaths truncated_dijkstra(const NeighborGraph& graph, int source, double limit) {
    const int n = graph.node_count();
    if (source < 0 || source >= n)
        throw DomainError("source node " + std::to_string(source) + " out of range");
    if (!(limit >= 0.0)) throw DomainError("distance limit must be nonnegative");

    ShortestPaths out;
    out.dist.assign(n, std::numeric_limits<double>::infinity());
    out.first_hop.assign(n, -1);
    using Item = std::pair<double, int>;  // lexicographic: distance, then node index
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    out.dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > out.dist[u]) continue;
        for (int e = graph.offsets[u]; e < graph.offsets[u + 1]; ++e) {
            const int w = graph.adjacency[e];
            const double nd = d + graph.weights[e];
            if (nd <= limit && nd < out.dist[w]) {
                out.dist[w] = nd;
                out.first_hop[w] = (u == source) ? w : out.first_hop[u];
                queue.emplace(nd, w);
            }
        }
    }
    return out;
}

GeodesicPatch geodesic_patch(const TriMesh& mesh, const NeighborGraph& graph, int center,
                             double r0, int min_raw_neighbors) {
    if (center < 0 || center >= graph.n_vertices)
        throw DomainError("patch center " + std::to_string(center) + " is not a mesh vertex");
    if (!(r0 > 0.0)) throw DomainError("patch radius must be positive");
    if (graph.n_vertices != mesh.vertex_count())
        throw ShapeError("graph was built over a different mesh");

    GeodesicPatch patch;
    patch.center = center;
    patch.r0 = r0;
    patch.frame = tangent_frame(mesh, center);

    const ShortestPaths paths = truncated_dijkstra(graph, center, r0);
    const Eigen::Vector3d origin = mesh.vertices.row(center);

    patch.entries.push_back(PatchEntry{0.0, 0.0, center, -1, 0.0});
    for (int node = 0; node < graph.node_count(); ++node) {
        if (node == center || !(paths.dist[node] <= r0)) continue;
        if (node < graph.n_vertices && mesh.vertex_on_non_manifold_edge[node])
            throw DomainError("patch at vertex " + std::to_string(center) +
                              " touches a non-manifold edge at vertex " + std::to_string(node));
        const Eigen::Vector3d step =
            Eigen::Vector3d(graph.positions.row(paths.first_hop[node])) - origin;
        const double x = step.dot(patch.frame.e1);
        const double y = step.dot(patch.frame.e2);
        const double theta = (x == 0.0 && y == 0.0) ? 0.0 : wrap_angle(std::atan2(y, x));
        patch.entries.push_back(PatchEntry{paths.dist[node], theta, node, -1, 0.0});
    }
    if (mesh.vertex_on_non_manifold_edge[center])
        throw DomainError("patch center " + std::to_string(center) +
                          " lies on a non-manifold edge");

    const int raw_neighbors = static_cast<int>(patch.entries.size()) - 1;
    if (raw_neighbors < min_raw_neighbors)
        throw SparsePatchError("patch at vertex " + std::to_string(center) + " has only " +
                                   std::to_string(raw_neighbors) + " raw neighbors (need " +
                                   std::to_string(min_raw_neighbors) + ")",
                               center);

    // canonical ordering: radius, then node index (both already unique)
    std::sort(patch.entries.begin(), patch.entries.end(),
              [](const PatchEntry& a, const PatchEntry& b) {
                  if (a.r != b.r) return a.r < b.r;
                  return a.node_a < b.node_a;
              });
    return patch;
}

void densify_patch(GeodesicPatch& patch, int target_count, std::uint64_t seed) {
    if (!patch.valid()) throw StateError("cannot densify an invalid patch");
    const int current = static_cast<int>(patch.entries.size());
    if (target_count <= current) return;

    // blend only raw entries so every synthetic entry stays a two-node recipe
    std::vector<int> raw;
    for (int i = 0; i < current; ++i)
        if (patch.entries[i].node_b < 0) raw.push_back(i);
    if (raw.size() < 2)
        throw SparsePatchError("patch at vertex " + std::to_string(patch.center) +
                                   " has too few raw entries to densify",
                               patch.center);

    Rng rng(seed);
    patch.entries.reserve(static_cast<std::size_t>(target_count));
    while (static_cast<int>(patch.entries.size()) < target_count) {
        const int ia = raw[static_cast<std::size_t>(rng.below(raw.size()))];
        int ib = ia;
        while (ib == ia) ib = raw[static_cast<std::size_t>(rng.below(raw.size()))];
        const double t = rng.uniform();
        const PatchEntry& a = patch.entries[ia];
        const PatchEntry& b = patch.entries[ib];
        const double x = (1.0 - t) * a.r * std::cos(a.theta) + t * b.r * std::cos(b.theta);
        const double y = (1.0 - t) * a.r * std::sin(a.theta) + t * b.r * std::sin(b.theta);
        PatchEntry blended;
        blended.r = std::hypot(x, y);
        blended.theta = (x == 0.0 && y == 0.0) ? 0.0 : wrap_angle(std::atan2(y, x));
        blended.node_a = a.node_a;
        blended.node_b = b.node_a;
        blended.t = t;
        patch.entries.push_back(blended);
    }
}

Eigen::VectorXd node_field_value(const TriMesh& mesh, const NeighborGraph& graph, int node,
                                 const Eigen::MatrixXd& field) {
    if (field.rows() != mesh.vertex_count())
        throw ShapeError("field has " + std::to_string(field.rows()) + " rows for " +
                         std::to_string(mesh.vertex_count()) + " vertices");
    if (node < 0 || node >= graph.node_count())
        throw DomainError("node " + std::to_string(node) + " out of range");
    if (node < graph.n_vertices) return field.row(node).transpose();
    return sample_field_value(mesh, field, graph.samples[node - graph.n_vertices]);
}

Eigen::MatrixXd patch_values(const TriMesh& mesh, const NeighborGraph& graph,
                             const GeodesicPatch& patch, const Eigen::MatrixXd& field) {
    if (!patch.valid()) throw StateError("cannot evaluate an invalid patch");
    Eigen::MatrixXd values(static_cast<long>(patch.entries.size()), field.cols());
    for (std::size_t i = 0; i < patch.entries.size(); ++i) {
        const PatchEntry& e = patch.entries[i];
        if (e.node_b < 0) {
            values.row(static_cast<long>(i)) =
                node_field_value(mesh, graph, e.node_a, field).transpose();
        } else {
            values.row(static_cast<long>(i)) =
                (1.0 - e.t) * node_field_value(mesh, graph, e.node_a, field).transpose() +
                e.t * node_field_value(mesh, graph, e.node_b, field).transpose();
        }
    }
    return values;
}

PatchWeights patch_weight_matrix(const TriMesh& mesh, const NeighborGraph& graph,
                                 const GeodesicPatch& patch) {
    if (!patch.valid()) throw StateError("cannot evaluate an invalid patch");
    // vertex -> column slot, ascending
    std::map<int, int> slot;
    auto touch = [&](int node) {
        if (node < graph.n_vertices) {
            slot.emplace(node, 0);
        } else {
            const SurfaceSample& s = graph.samples[node - graph.n_vertices];
            for (int c = 0; c < 3; ++c) slot.emplace(mesh.faces(s.face, c), 0);
        }
    };
    for (const PatchEntry& e : patch.entries) {
        touch(e.node_a);
        if (e.node_b >= 0) touch(e.node_b);
    }
    PatchWeights out;
    out.columns.reserve(slot.size());
    for (auto& [vertex, index] : slot) {
        index = static_cast<int>(out.columns.size());
        out.columns.push_back(vertex);
    }
    out.weights = Eigen::MatrixXd::Zero(static_cast<long>(patch.entries.size()),
                                        static_cast<long>(out.columns.size()));
    auto add_node = [&](long row, int node, double scale) {
        if (node < graph.n_vertices) {
            out.weights(row, slot[node]) += scale;
        } else {
            const SurfaceSample& s = graph.samples[node - graph.n_vertices];
            for (int c = 0; c < 3; ++c)
                out.weights(row, slot[mesh.faces(s.face, c)]) += scale * s.barycentric[c];
        }
    };
    for (std::size_t i = 0; i < patch.entries.size(); ++i) {
        const PatchEntry& e = patch.entries[i];
        if (e.node_b < 0) {
            add_node(static_cast<long>(i), e.node_a, 1.0);
        } else {
            add_node(static_cast<long>(i), e.node_a, 1.0 - e.t);
            add_node(static_cast<long>(i), e.node_b, e.t);
        }
    }
    return out;
}

PatchSet build_patch_set(const TriMesh& mesh, int sample_count, double r0,
                         int min_raw_neighbors, int target_count, std::uint64_t seed,
                         int threads) {
    PatchSet set;
    set.r0 = r0;
    set.min_raw = min_raw_neighbors;
    set.target_count = target_count;
    set.seed = seed;
    set.samples = uniform_sample_surface(mesh, sample_count, seed);
    const NeighborGraph graph = build_neighbor_graph(mesh, set.samples);

    const int nv = mesh.vertex_count();
    set.patches.assign(static_cast<std::size_t>(nv), GeodesicPatch{});
    std::vector<std::string> errors(static_cast<std::size_t>(nv));
    parallel_for(static_cast<std::size_t>(nv), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            try {
                GeodesicPatch patch =
                    geodesic_patch(mesh, graph, static_cast<int>(v), r0, min_raw_neighbors);
                densify_patch(patch, target_count, mix_seed(seed, v));
                set.patches[v] = std::move(patch);
            } catch (const Error& e) {
                errors[v] = e.what();
            }
        }
    });
    for (int v = 0; v < nv; ++v) {
        if (!set.patches[static_cast<std::size_t>(v)].valid()) {
            set.failed_vertices.push_back(v);
            set.failure_reasons.push_back(errors[static_cast<std::size_t>(v)]);
        }
    }
    return set;
}

}  // namespace zernet
