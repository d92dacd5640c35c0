#include "zernet/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace zernet {

namespace {

std::uint64_t edge_key(int a, int b) {
    const std::uint64_t lo = static_cast<std::uint64_t>(std::min(a, b));
    const std::uint64_t hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

bool face_is_degenerate(const TriMesh& mesh, int f) {
    const int a = mesh.faces(f, 0), b = mesh.faces(f, 1), c = mesh.faces(f, 2);
    if (a == b || b == c || a == c) return true;
    const Eigen::Vector3d pa = mesh.vertices.row(a);
    const Eigen::Vector3d pb = mesh.vertices.row(b);
    const Eigen::Vector3d pc = mesh.vertices.row(c);
    const double lmax2 =
        std::max({(pb - pa).squaredNorm(), (pc - pb).squaredNorm(), (pa - pc).squaredNorm()});
    if (lmax2 == 0.0) return true;
    const double doubled_area = (pb - pa).cross(pc - pa).norm();
    return doubled_area <= 1e-14 * lmax2;
}

}  // namespace

int finalize_mesh(TriMesh& mesh) {
    const int nv = mesh.vertex_count();
    for (int f = 0; f < mesh.face_count(); ++f)
        for (int c = 0; c < 3; ++c)
            if (mesh.faces(f, c) < 0 || mesh.faces(f, c) >= nv)
                throw DomainError("face " + std::to_string(f) + " references vertex " +
                                  std::to_string(mesh.faces(f, c)) + " outside 0.." +
                                  std::to_string(nv - 1));

    // drop degenerate faces
    int kept = 0;
    Faces cleaned(mesh.face_count(), 3);
    for (int f = 0; f < mesh.face_count(); ++f)
        if (!face_is_degenerate(mesh, f)) cleaned.row(kept++) = mesh.faces.row(f);
    const int dropped = mesh.face_count() - kept;
    mesh.faces = cleaned.topRows(kept);

    mesh.vertex_faces.assign(nv, {});
    mesh.vertex_neighbors.assign(nv, {});
    mesh.face_adjacency.assign(mesh.face_count(), {});
    mesh.vertex_on_non_manifold_edge.assign(nv, false);
    mesh.non_manifold = false;
    mesh.boundary_edge_count = 0;

    std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
    edge_faces.reserve(static_cast<std::size_t>(mesh.face_count()) * 2);
    for (int f = 0; f < mesh.face_count(); ++f) {
        for (int c = 0; c < 3; ++c) {
            const int a = mesh.faces(f, c);
            const int b = mesh.faces(f, (c + 1) % 3);
            edge_faces[edge_key(a, b)].push_back(f);
            mesh.vertex_neighbors[a].push_back(b);
            mesh.vertex_neighbors[b].push_back(a);
        }
        for (int c = 0; c < 3; ++c) mesh.vertex_faces[mesh.faces(f, c)].push_back(f);
    }

    for (const auto& [key, faces] : edge_faces) {
        if (faces.size() == 1) ++mesh.boundary_edge_count;
        if (faces.size() > 2) {
            mesh.non_manifold = true;
            const int a = static_cast<int>(key & 0xffffffffull);
            const int b = static_cast<int>(key >> 32);
            mesh.vertex_on_non_manifold_edge[a] = true;
            mesh.vertex_on_non_manifold_edge[b] = true;
        }
        for (std::size_t i = 0; i < faces.size(); ++i)
            for (std::size_t j = 0; j < faces.size(); ++j)
                if (i != j) mesh.face_adjacency[faces[i]].push_back(faces[j]);
    }

    auto sort_unique = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    for (auto& v : mesh.vertex_faces) sort_unique(v);
    for (auto& v : mesh.vertex_neighbors) sort_unique(v);
    for (auto& v : mesh.face_adjacency) sort_unique(v);
    return dropped;
}

// ---------------------------------------------------------------------------
// loaders

namespace {

struct LineReader {
    std::istream& in;
    long line_no = 0;

    // next non-empty, non-comment line
    bool next(std::string& out) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto first = raw.find_first_not_of(" \t\r\n");
            if (first == std::string::npos) continue;
            if (raw[first] == '#') continue;
            out = raw;
            return true;
        }
        return false;
    }
};

}  // namespace

TriMesh load_off(std::istream& in, const std::string& name) {
    LineReader reader{in};
    std::string line;
    if (!reader.next(line)) throw ParseError(name + ": empty file", reader.line_no);

    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic != "OFF") throw FormatError(name + ": missing OFF header");

    long nv = -1, nf = -1, ne = 0;
    if (!(header >> nv >> nf)) {
        if (!reader.next(line)) throw ParseError(name + ": missing element counts", reader.line_no);
        std::istringstream counts(line);
        if (!(counts >> nv >> nf)) throw ParseError(name + ": malformed element counts", reader.line_no);
        counts >> ne;
    } else {
        header >> ne;
    }
    if (nv < 0 || nf < 0) throw ParseError(name + ": negative element count", reader.line_no);

    TriMesh mesh;
    mesh.vertices.resize(nv, 3);
    for (long v = 0; v < nv; ++v) {
        if (!reader.next(line))
            throw ParseError(name + ": unexpected end of file in vertex list", reader.line_no);
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z))
            throw ParseError(name + ": malformed vertex " + std::to_string(v), reader.line_no);
        mesh.vertices.row(v) << x, y, z;
    }

    mesh.faces.resize(nf, 3);
    for (long f = 0; f < nf; ++f) {
        if (!reader.next(line))
            throw ParseError(name + ": unexpected end of file in face list", reader.line_no);
        std::istringstream ls(line);
        long count;
        if (!(ls >> count))
            throw ParseError(name + ": malformed face " + std::to_string(f), reader.line_no);
        if (count != 3)
            throw ParseError(name + ": face " + std::to_string(f) +
                                 " has " + std::to_string(count) + " vertices; only triangles are supported",
                             reader.line_no);
        for (int c = 0; c < 3; ++c) {
            long idx;
            if (!(ls >> idx))
                throw ParseError(name + ": malformed face " + std::to_string(f), reader.line_no);
            if (idx < 0 || idx >= nv)
                throw ParseError(name + ": face " + std::to_string(f) + " references vertex " +
                                     std::to_string(idx) + " outside 0.." + std::to_string(nv - 1),
                                 reader.line_no);
            mesh.faces(f, c) = static_cast<int>(idx);
        }
    }

    finalize_mesh(mesh);
    return mesh;
}

TriMesh load_obj(std::istream& in, const std::string& name) {
    LineReader reader{in};
    std::string line;
    std::vector<Eigen::Vector3d> verts;
    std::vector<std::array<int, 3>> faces;

    while (reader.next(line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw ParseError(name + ": malformed vertex record", reader.line_no);
            verts.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> refs;
            std::string token;
            while (ls >> token) {
                const std::string head = token.substr(0, token.find('/'));
                long idx = 0;
                try {
                    std::size_t used = 0;
                    idx = std::stol(head, &used);
                    if (used != head.size()) throw std::invalid_argument(head);
                } catch (const std::exception&) {
                    throw ParseError(name + ": malformed face index '" + token + "'",
                                     reader.line_no);
                }
                // negative indices count back from the most recent vertex
                const long resolved = idx > 0 ? idx - 1 : static_cast<long>(verts.size()) + idx;
                if (resolved < 0 || resolved >= static_cast<long>(verts.size()))
                    throw ParseError(name + ": face references vertex " + std::to_string(idx) +
                                         " outside the " + std::to_string(verts.size()) +
                                         " read so far",
                                     reader.line_no);
                refs.push_back(static_cast<int>(resolved));
            }
            if (refs.size() != 3)
                throw ParseError(name + ": face has " + std::to_string(refs.size()) +
                                     " vertices; only triangles are supported",
                                 reader.line_no);
            faces.push_back({refs[0], refs[1], refs[2]});
        }
        // all other record types (vn, vt, usemtl, ...) are ignored
    }

    TriMesh mesh;
    mesh.vertices.resize(static_cast<long>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<long>(i)) = verts[i];
    mesh.faces.resize(static_cast<long>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i)
        mesh.faces.row(static_cast<long>(i)) << faces[i][0], faces[i][1], faces[i][2];

    finalize_mesh(mesh);
    return mesh;
}

TriMesh load_mesh(const std::string& path) {
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext != "off" && ext != "obj")
        throw FormatError("unsupported mesh format '." + ext + "' for " + path);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file " + path);
    return ext == "off" ? load_off(in, path) : load_obj(in, path);
}

void save_off(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mesh file " + path);
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << " 0\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (int v = 0; v < mesh.vertex_count(); ++v)
        out << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' ' << mesh.vertices(v, 2)
            << '\n';
    for (int f = 0; f < mesh.face_count(); ++f)
        out << "3 " << mesh.faces(f, 0) << ' ' << mesh.faces(f, 1) << ' ' << mesh.faces(f, 2)
            << '\n';
    if (!out) throw IoError("failed while writing " + path);
}

// ---------------------------------------------------------------------------
// measures

double face_area(const TriMesh& mesh, int face) {
    const Eigen::Vector3d a = mesh.vertices.row(mesh.faces(face, 0));
    const Eigen::Vector3d b = mesh.vertices.row(mesh.faces(face, 1));
    const Eigen::Vector3d c = mesh.vertices.row(mesh.faces(face, 2));
    return 0.5 * (b - a).cross(c - a).norm();
}

double mesh_area(const TriMesh& mesh) {
    double total = 0.0;
    for (int f = 0; f < mesh.face_count(); ++f) total += face_area(mesh, f);
    return total;
}

std::vector<double> vertex_distances(const TriMesh& mesh, int source) {
    const int nv = mesh.vertex_count();
    if (source < 0 || source >= nv)
        throw DomainError("source vertex " + std::to_string(source) + " out of range");
    std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (int w : mesh.vertex_neighbors[u]) {
            const double nd = d + (mesh.vertices.row(w) - mesh.vertices.row(u)).norm();
            if (nd < dist[w]) {
                dist[w] = nd;
                queue.emplace(nd, w);
            }
        }
    }
    return dist;
}

namespace {

int farthest_finite(const std::vector<double>& dist) {
    int best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (std::isfinite(dist[i]) && dist[i] > best_d) {
            best_d = dist[i];
            best = static_cast<int>(i);
        }
    return best;
}

}  // namespace

double mesh_diameter(const TriMesh& mesh) {
    if (mesh.vertex_count() == 0) throw DomainError("diameter of an empty mesh");
    // iterated farthest-point sweeps; a standard diameter lower bound that is
    // tight on elongated graphs and within a small factor elsewhere
    int source = 0;
    double best = 0.0;
    for (int sweep = 0; sweep < 3; ++sweep) {
        const auto dist = vertex_distances(mesh, source);
        const int far = farthest_finite(dist);
        if (dist[far] <= best) break;
        best = dist[far];
        source = far;
    }
    return best;
}

double normalize_area(TriMesh& mesh, double target_area) {
    if (!(target_area > 0.0)) throw DomainError("target area must be positive");
    const double area = mesh_area(mesh);
    if (!(area > 0.0)) throw DomainError("mesh has zero total area");
    const double scale = std::sqrt(target_area / area);
    mesh.vertices *= scale;
    return scale;
}

// ---------------------------------------------------------------------------
// sampling

std::vector<SurfaceSample> uniform_sample_surface(const TriMesh& mesh, int count,
                                                  std::uint64_t seed) {
    if (count < 1) throw DomainError("sample count must be positive, got " + std::to_string(count));
    if (mesh.face_count() == 0) throw DomainError("cannot sample a mesh without faces");

    std::vector<double> prefix(mesh.face_count());
    double total = 0.0;
    for (int f = 0; f < mesh.face_count(); ++f) {
        total += face_area(mesh, f);
        prefix[f] = total;
    }
    if (!(total > 0.0)) throw DomainError("cannot sample a mesh with zero area");

    Rng rng(seed);
    std::vector<SurfaceSample> samples(count);
    for (int i = 0; i < count; ++i) {
        const double u = rng.uniform() * total;
        const auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
        const int face = std::min<int>(static_cast<int>(it - prefix.begin()), mesh.face_count() - 1);
        // square-root warp makes the barycentric draw area-uniform
        const double s = std::sqrt(rng.uniform());
        const double t = rng.uniform();
        SurfaceSample& out = samples[i];
        out.face = face;
        out.barycentric = Eigen::Vector3d(1.0 - s, s * (1.0 - t), s * t);
        out.position = out.barycentric[0] * mesh.vertices.row(mesh.faces(face, 0)) +
                       out.barycentric[1] * mesh.vertices.row(mesh.faces(face, 1)) +
                       out.barycentric[2] * mesh.vertices.row(mesh.faces(face, 2));
    }
    return samples;
}

Eigen::VectorXd sample_field_value(const TriMesh& mesh, const Eigen::MatrixXd& field,
                                   const SurfaceSample& sample) {
    if (field.rows() != mesh.vertex_count())
        throw ShapeError("field has " + std::to_string(field.rows()) + " rows for " +
                         std::to_string(mesh.vertex_count()) + " vertices");
    if (sample.face < 0 || sample.face >= mesh.face_count())
        throw DomainError("sample face " + std::to_string(sample.face) + " out of range");
    return sample.barycentric[0] * field.row(mesh.faces(sample.face, 0)).transpose() +
           sample.barycentric[1] * field.row(mesh.faces(sample.face, 1)).transpose() +
           sample.barycentric[2] * field.row(mesh.faces(sample.face, 2)).transpose();
}

// ---------------------------------------------------------------------------
// tangent frames

TangentFrame tangent_frame(const TriMesh& mesh, int vertex) {
    if (vertex < 0 || vertex >= mesh.vertex_count())
        throw DomainError("vertex " + std::to_string(vertex) + " out of range");
    if (mesh.vertex_faces[vertex].empty())
        throw DomainError("vertex " + std::to_string(vertex) + " has no incident faces");

    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    for (int f : mesh.vertex_faces[vertex]) {
        const Eigen::Vector3d a = mesh.vertices.row(mesh.faces(f, 0));
        const Eigen::Vector3d b = mesh.vertices.row(mesh.faces(f, 1));
        const Eigen::Vector3d c = mesh.vertices.row(mesh.faces(f, 2));
        normal += 0.5 * (b - a).cross(c - a);  // face normal weighted by its area
    }
    const double norm = normal.norm();
    if (norm <= 1e-300)
        throw DomainError("area-weighted normal vanishes at vertex " + std::to_string(vertex));
    normal /= norm;

    TangentFrame frame;
    frame.vertex = vertex;
    frame.normal = normal;
    const Eigen::Vector3d origin = mesh.vertices.row(vertex);
    for (int nb : mesh.vertex_neighbors[vertex]) {
        const Eigen::Vector3d edge = Eigen::Vector3d(mesh.vertices.row(nb)) - origin;
        const Eigen::Vector3d proj = edge - edge.dot(normal) * normal;
        if (proj.norm() > 1e-10 * edge.norm()) {
            frame.e1 = proj.normalized();
            frame.e2 = normal.cross(frame.e1);
            return frame;
        }
    }
    throw DomainError("no usable tangent direction at vertex " + std::to_string(vertex));
}

// ---------------------------------------------------------------------------
// synthetic fixtures

TriMesh make_icosphere(int subdivisions, double radius) {
    if (subdivisions < 0 || subdivisions > 9)
        throw DomainError("subdivisions must be in 0..9, got " + std::to_string(subdivisions));
    if (!(radius > 0.0)) throw DomainError("radius must be positive");

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v = v.normalized() * radius;
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int iter = 0; iter < subdivisions; ++iter) {
        std::unordered_map<std::uint64_t, int> midpoint;
        auto mid = [&](int a, int b) {
            const std::uint64_t key = edge_key(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const Eigen::Vector3d m = ((verts[a] + verts[b]) * 0.5).normalized() * radius;
            verts.push_back(m);
            const int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    TriMesh mesh;
    mesh.vertices.resize(static_cast<long>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<long>(i)) = verts[i];
    mesh.faces.resize(static_cast<long>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i)
        mesh.faces.row(static_cast<long>(i)) << faces[i][0], faces[i][1], faces[i][2];

    Eigen::MatrixXd spherical(mesh.vertex_count(), 2);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const double z = std::clamp(mesh.vertices(v, 2) / radius, -1.0, 1.0);
        spherical(v, 0) = std::acos(z);
        spherical(v, 1) = wrap_angle(std::atan2(mesh.vertices(v, 1), mesh.vertices(v, 0)));
    }
    mesh.fields["spherical"] = spherical;

    finalize_mesh(mesh);
    return mesh;
}

TriMesh make_torus(double major_radius, double minor_radius, int segments_major,
                   int segments_minor) {
    if (!(major_radius > minor_radius && minor_radius > 0.0))
        throw DomainError("torus radii must satisfy major > minor > 0");
    if (segments_major < 3 || segments_minor < 3)
        throw DomainError("torus needs at least 3 segments per loop");

    TriMesh mesh;
    const int nv = segments_major * segments_minor;
    mesh.vertices.resize(nv, 3);
    Eigen::MatrixXd angles(nv, 2);
    for (int i = 0; i < segments_major; ++i) {
        const double u = kTwoPi * i / segments_major;
        for (int j = 0; j < segments_minor; ++j) {
            const double v = kTwoPi * j / segments_minor;
            const int idx = i * segments_minor + j;
            const double ring = major_radius + minor_radius * std::cos(v);
            mesh.vertices.row(idx) << ring * std::cos(u), ring * std::sin(u),
                minor_radius * std::sin(v);
            angles(idx, 0) = u;
            angles(idx, 1) = v;
        }
    }
    mesh.faces.resize(2 * nv, 3);
    int f = 0;
    for (int i = 0; i < segments_major; ++i) {
        const int inext = (i + 1) % segments_major;
        for (int j = 0; j < segments_minor; ++j) {
            const int jnext = (j + 1) % segments_minor;
            const int a = i * segments_minor + j;
            const int b = inext * segments_minor + j;
            const int c = inext * segments_minor + jnext;
            const int d = i * segments_minor + jnext;
            mesh.faces.row(f++) << a, b, c;
            mesh.faces.row(f++) << a, c, d;
        }
    }
    mesh.fields["angles"] = angles;
    finalize_mesh(mesh);
    return mesh;
}

TriMesh make_planar_disk(double radius, int rings) {
    if (!(radius > 0.0)) throw DomainError("radius must be positive");
    if (rings < 1) throw DomainError("need at least one ring");

    TriMesh mesh;
    const int nv = 1 + 3 * rings * (rings + 1);
    mesh.vertices.resize(nv, 3);
    Eigen::MatrixXd polar = Eigen::MatrixXd::Zero(nv, 2);
    mesh.vertices.row(0).setZero();

    auto ring_start = [](int ring) { return 1 + 3 * ring * (ring - 1); };
    for (int ring = 1; ring <= rings; ++ring) {
        const int count = 6 * ring;
        const double r = radius * ring / rings;
        for (int i = 0; i < count; ++i) {
            const double theta = kTwoPi * i / count;
            const int idx = ring_start(ring) + i;
            mesh.vertices.row(idx) << r * std::cos(theta), r * std::sin(theta), 0.0;
            polar(idx, 0) = r;
            polar(idx, 1) = theta;
        }
    }

    std::vector<std::array<int, 3>> faces;
    // innermost fan
    for (int i = 0; i < 6; ++i) faces.push_back({0, 1 + i, 1 + (i + 1) % 6});
    // bands, merged by angle walking both rings counterclockwise
    for (int ring = 2; ring <= rings; ++ring) {
        const int ni = 6 * (ring - 1), no = 6 * ring;
        const int si = ring_start(ring - 1), so = ring_start(ring);
        int a = 0, b = 0;
        while (a < ni || b < no) {
            const double next_inner =
                a < ni ? kTwoPi * (a + 1) / ni : std::numeric_limits<double>::infinity();
            const double next_outer =
                b < no ? kTwoPi * (b + 1) / no : std::numeric_limits<double>::infinity();
            if (next_outer <= next_inner) {
                faces.push_back({si + (a % ni), so + (b % no), so + ((b + 1) % no)});
                ++b;
            } else {
                faces.push_back({si + (a % ni), so + (b % no), si + ((a + 1) % ni)});
                ++a;
            }
        }
    }
    mesh.faces.resize(static_cast<long>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i)
        mesh.faces.row(static_cast<long>(i)) << faces[i][0], faces[i][1], faces[i][2];

    mesh.fields["polar"] = polar;
    finalize_mesh(mesh);
    return mesh;
}

}  // namespace zernet
