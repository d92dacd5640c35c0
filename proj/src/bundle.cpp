#include "zernet/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "zernet/errors.hpp"
#include "zernet/io.hpp"
#include "zernet/util.hpp"

namespace zernet {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

std::string mesh_stem(const std::string& path) {
    return fs::path(path).stem().string();
}

std::string hash_hex(std::uint64_t h) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(h));
    return buffer;
}

std::uint64_t hash_from_hex(const std::string& hex, const std::string& what) {
    if (hex.size() != 16) throw FormatError(what + " hash has the wrong length");
    std::uint64_t value = 0;
    for (char c : hex) {
        value <<= 4;
        if (c >= '0' && c <= '9')
            value |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f')
            value |= static_cast<std::uint64_t>(c - 'a' + 10);
        else
            throw FormatError(what + " hash is not lowercase hex");
    }
    return value;
}

void check_config(const PrepareConfig& config) {
    if (config.mesh_paths.empty()) throw ConfigError("no meshes given");
    const auto parallel = [&](const std::vector<std::string>& list, const char* name) {
        if (!list.empty() && list.size() != config.mesh_paths.size())
            throw ConfigError(std::string(name) + " list has " +
                              std::to_string(list.size()) + " entries for " +
                              std::to_string(config.mesh_paths.size()) + " meshes");
    };
    parallel(config.field_paths, "field");
    parallel(config.label_paths, "label");
    parallel(config.target_paths, "target");
    if (config.radii.empty()) throw ConfigError("at least one patch radius is needed");
    for (double r : config.radii)
        if (!(r > 0.0) || !std::isfinite(r))
            throw ConfigError("patch radii must be positive and finite");
    if (config.k < 1) throw ConfigError("basis size must be positive");
    if (config.s < 1) throw ConfigError("direction count must be positive");
    if (config.sample_count < 1) throw ConfigError("sample count must be positive");
    if (config.target_count < 1)
        throw ConfigError("per-patch target count must be positive");
    if (config.area < 0.0 || !std::isfinite(config.area))
        throw ConfigError("target area must be non-negative and finite");

    std::set<std::string> names;
    for (const std::string& path : config.mesh_paths)
        if (!names.insert(mesh_stem(path)).second)
            throw ConfigError("two meshes share the name '" + mesh_stem(path) + "'");
}

// rethrows a known error with the mesh name attached, keeping its type
[[noreturn]] void rethrow_named(const std::string& name, const Error& e) {
    std::string what = "mesh " + name + ": " + e.what();
    const std::string code = e.code();
    if (code == "io") throw IoError(what);
    if (code == "parse") {
        // ParseError appends its own " (line N)"; strip the copy we inherited
        const auto& parse = dynamic_cast<const ParseError&>(e);
        const std::string suffix = " (line " + std::to_string(parse.line()) + ")";
        if (what.ends_with(suffix)) what.erase(what.size() - suffix.size());
        throw ParseError(what, parse.line());
    }
    if (code == "shape") throw ShapeError(what);
    if (code == "domain") throw DomainError(what);
    if (code == "format") throw FormatError(what);
    if (code == "corruption") throw CorruptionError(what);
    if (code == "config") throw ConfigError(what);
    if (code == "aggregate_failure")
        throw AggregateFailureError(
            what, dynamic_cast<const AggregateFailureError&>(e).failed());
    throw StateError(what);
}

BundleMesh prepare_mesh(const PrepareConfig& config, std::size_t index) {
    BundleMesh entry;
    entry.source_path = config.mesh_paths[index];
    entry.name = mesh_stem(entry.source_path);

    entry.mesh = load_mesh(entry.source_path);
    if (config.area > 0.0) normalize_area(entry.mesh, config.area);
    const int n = entry.mesh.vertex_count();

    if (config.field_paths.empty()) {
        entry.input = entry.mesh.vertices;
    } else {
        entry.input = read_field_csv(config.field_paths[index]);
        if (entry.input.rows() != n)
            throw ShapeError("input field has " + std::to_string(entry.input.rows()) +
                             " rows for " + std::to_string(n) + " vertices");
    }
    if (!config.label_paths.empty()) {
        entry.labels = read_labels_csv(config.label_paths[index]);
        if (entry.labels.size() != n)
            throw ShapeError("labels cover " + std::to_string(entry.labels.size()) +
                             " of " + std::to_string(n) + " vertices");
    }
    if (!config.target_paths.empty()) {
        entry.targets = read_field_csv(config.target_paths[index]);
        if (entry.targets.rows() != n)
            throw ShapeError("targets cover " + std::to_string(entry.targets.rows()) +
                             " of " + std::to_string(n) + " vertices");
    }

    // one sampling per mesh, shared by every radius: the per-mesh seed feeds
    // each build so all radii see identical samples
    const std::uint64_t mesh_seed = mix_seed(config.seed, index);
    std::set<int> failed;
    entry.patches.reserve(config.radii.size());
    for (double r0 : config.radii) {
        PatchSet set = build_patch_set(entry.mesh, config.sample_count, r0, 3,
                                       config.target_count, mesh_seed, config.threads);
        if (static_cast<double>(set.failed_vertices.size()) > 0.01 * n)
            throw AggregateFailureError(
                "patch extraction at radius " + format_double(r0) + " failed at " +
                    std::to_string(set.failed_vertices.size()) + " of " +
                    std::to_string(n) + " vertices, first: " +
                    (set.failure_reasons.empty() ? std::string("?")
                                                 : set.failure_reasons[0]),
                static_cast<int>(set.failed_vertices.size()));
        failed.insert(set.failed_vertices.begin(), set.failed_vertices.end());
        if (entry.samples.empty()) entry.samples = std::move(set.samples);
        entry.patches.push_back(std::move(set.patches));
    }

    const NeighborGraph graph = build_neighbor_graph(entry.mesh, entry.samples);
    FieldDecomposition decomposition =
        field_to_patch_tensor(entry.mesh, graph, entry.patches[0], entry.input,
                              config.k, {}, config.threads);
    failed.insert(decomposition.failed_vertices.begin(),
                  decomposition.failed_vertices.end());
    entry.tensor = std::move(decomposition.tensor);
    entry.failed_vertices.assign(failed.begin(), failed.end());
    return entry;
}

std::string patches_file(std::size_t radius_index) {
    return "patches_r" + std::to_string(radius_index) + ".bin";
}

}  // namespace

std::uint64_t config_fingerprint(const PrepareConfig& config) {
    std::ostringstream text;
    text << "version=1\nk=" << config.k << "\ns=" << config.s
         << "\nsample_count=" << config.sample_count
         << "\ntarget_count=" << config.target_count
         << "\narea=" << format_double(config.area) << "\nseed=" << config.seed
         << "\nradii=";
    for (std::size_t i = 0; i < config.radii.size(); ++i)
        text << (i ? "," : "") << format_double(config.radii[i]);
    text << "\nmeshes=";
    for (std::size_t i = 0; i < config.mesh_paths.size(); ++i)
        text << (i ? "," : "") << mesh_stem(config.mesh_paths[i]);
    text << "\nfields=" << (config.field_paths.empty() ? 0 : 1)
         << "\nlabels=" << (config.label_paths.empty() ? 0 : 1)
         << "\ntargets=" << (config.target_paths.empty() ? 0 : 1) << "\n";
    return fnv1a64(text.str());
}

ExperimentBundle prepare_bundle(const PrepareConfig& config) {
    check_config(config);
    ExperimentBundle bundle;
    bundle.config = config;
    bundle.config_hash = config_fingerprint(config);
    bundle.meshes.reserve(config.mesh_paths.size());
    for (std::size_t i = 0; i < config.mesh_paths.size(); ++i) {
        try {
            bundle.meshes.push_back(prepare_mesh(config, i));
        } catch (const Error& e) {
            rethrow_named(mesh_stem(config.mesh_paths[i]), e);
        }
    }
    return bundle;
}

void save_bundle(const ExperimentBundle& bundle, const std::string& dir, bool force) {
    const fs::path root(dir);
    const fs::path manifest_path = root / "manifest.json";
    if (fs::exists(manifest_path) && !force)
        throw IoError(dir + " already holds a bundle (pass force to replace it)");
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create " + dir + ": " + ec.message());

    json manifest;
    manifest["version"] = bundle.version;
    manifest["config_hash"] = hash_hex(bundle.config_hash);
    manifest["seed"] = bundle.config.seed;
    manifest["k"] = bundle.config.k;
    manifest["s"] = bundle.config.s;
    manifest["sample_count"] = bundle.config.sample_count;
    manifest["target_count"] = bundle.config.target_count;
    manifest["area"] = bundle.config.area;
    manifest["radii"] = bundle.config.radii;

    json meshes = json::array();
    for (const BundleMesh& entry : bundle.meshes) {
        const fs::path mesh_dir = root / "meshes" / entry.name;
        fs::create_directories(mesh_dir, ec);
        if (ec)
            throw IoError("cannot create " + mesh_dir.string() + ": " + ec.message());

        std::vector<std::string> files;
        save_off(entry.mesh, (mesh_dir / "mesh.off").string());
        files.push_back("mesh.off");
        write_field_csv(entry.input, (mesh_dir / "input.csv").string());
        files.push_back("input.csv");
        save_samples(entry.samples, (mesh_dir / "samples.bin").string());
        files.push_back("samples.bin");
        for (std::size_t ri = 0; ri < entry.patches.size(); ++ri) {
            save_patches(entry.patches[ri], (mesh_dir / patches_file(ri)).string());
            files.push_back(patches_file(ri));
        }
        save_patch_tensor(entry.tensor, (mesh_dir / "tensor.bin").string());
        files.push_back("tensor.bin");
        if (entry.labels.size() > 0) {
            write_labels_csv(entry.labels, (mesh_dir / "labels.csv").string());
            files.push_back("labels.csv");
        }
        if (entry.targets.size() > 0) {
            write_field_csv(entry.targets, (mesh_dir / "targets.csv").string());
            files.push_back("targets.csv");
        }

        json record;
        record["name"] = entry.name;
        record["source"] = entry.source_path;
        record["failed_vertices"] = entry.failed_vertices;
        json hashes;
        for (const std::string& file : files)
            hashes[file] = hash_hex(file_hash((mesh_dir / file).string()));
        record["files"] = hashes;
        meshes.push_back(record);
    }
    manifest["meshes"] = meshes;

    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + manifest_path.string() + " for writing");
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + manifest_path.string());
}

ExperimentBundle load_bundle(const std::string& dir) {
    const fs::path root(dir);
    const fs::path manifest_path = root / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + manifest_path.string() + " for reading");
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw FormatError(manifest_path.string() + " is not valid JSON: " + e.what());
    }

    try {
        ExperimentBundle bundle;
        bundle.version = manifest.at("version").get<int>();
        if (bundle.version != 1)
            throw FormatError(dir + " uses unsupported bundle version " +
                              std::to_string(bundle.version));
        bundle.config_hash =
            hash_from_hex(manifest.at("config_hash").get<std::string>(), "config");
        bundle.config.seed = manifest.at("seed").get<std::uint64_t>();
        bundle.config.k = manifest.at("k").get<int>();
        bundle.config.s = manifest.at("s").get<int>();
        bundle.config.sample_count = manifest.at("sample_count").get<int>();
        bundle.config.target_count = manifest.at("target_count").get<int>();
        bundle.config.area = manifest.at("area").get<double>();
        bundle.config.radii = manifest.at("radii").get<std::vector<double>>();

        for (const json& record : manifest.at("meshes")) {
            BundleMesh entry;
            entry.name = record.at("name").get<std::string>();
            entry.source_path = record.at("source").get<std::string>();
            entry.failed_vertices = record.at("failed_vertices").get<std::vector<int>>();
            bundle.config.mesh_paths.push_back(entry.source_path);

            const fs::path mesh_dir = root / "meshes" / entry.name;
            const json& hashes = record.at("files");
            for (const auto& [file, expected] : hashes.items()) {
                const std::string path = (mesh_dir / file).string();
                const std::uint64_t actual = file_hash(path);
                if (actual != hash_from_hex(expected.get<std::string>(), file))
                    throw CorruptionError(path + " does not match its manifest hash");
            }
            const auto has = [&hashes](const char* file) {
                return hashes.contains(file);
            };
            if (!has("mesh.off") || !has("input.csv") || !has("samples.bin") ||
                !has("tensor.bin"))
                throw FormatError(dir + " mesh " + entry.name +
                                  " is missing required artifacts");

            entry.mesh = load_mesh((mesh_dir / "mesh.off").string());
            entry.input = read_field_csv((mesh_dir / "input.csv").string());
            entry.samples = load_samples((mesh_dir / "samples.bin").string());
            for (std::size_t ri = 0; ri < bundle.config.radii.size(); ++ri) {
                if (!has(patches_file(ri).c_str()))
                    throw FormatError(dir + " mesh " + entry.name + " is missing " +
                                      patches_file(ri));
                entry.patches.push_back(
                    load_patches((mesh_dir / patches_file(ri)).string()));
            }
            entry.tensor = load_patch_tensor((mesh_dir / "tensor.bin").string());
            if (has("labels.csv"))
                entry.labels = read_labels_csv((mesh_dir / "labels.csv").string());
            if (has("targets.csv"))
                entry.targets = read_field_csv((mesh_dir / "targets.csv").string());

            const int n = entry.mesh.vertex_count();
            if (entry.input.rows() != n || entry.tensor.n != n)
                throw FormatError(dir + " mesh " + entry.name +
                                  " artifacts disagree on the vertex count");
            for (const auto& patches : entry.patches)
                if (static_cast<int>(patches.size()) != n)
                    throw FormatError(dir + " mesh " + entry.name +
                                      " patch tables disagree on the vertex count");
            bundle.meshes.push_back(std::move(entry));
        }
        return bundle;
    } catch (const json::exception& e) {
        throw FormatError(manifest_path.string() + " is missing fields: " + e.what());
    }
}

std::vector<MeshData> bundle_to_dataset(const ExperimentBundle& bundle) {
    std::vector<MeshData> dataset;
    dataset.reserve(bundle.meshes.size());
    for (const BundleMesh& entry : bundle.meshes) {
        MeshData data;
        data.mesh = entry.mesh;
        data.input = entry.input;
        data.labels = entry.labels;
        data.targets = entry.targets;
        for (std::size_t ri = 0; ri < entry.patches.size(); ++ri) {
            PatchDomain domain;
            domain.r0 = bundle.config.radii[ri];
            domain.graph = build_neighbor_graph(data.mesh, entry.samples);
            domain.patches = entry.patches[ri];
            data.domains.push_back(std::move(domain));
        }
        dataset.push_back(std::move(data));
    }
    return dataset;
}

}  // namespace zernet
