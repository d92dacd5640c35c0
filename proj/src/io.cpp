#include "zernet/io.hpp"

#include <bit>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "zernet/errors.hpp"
#include "zernet/util.hpp"

namespace zernet {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDimLimit = 1ull << 32;  // sanity bound on header counts

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    return in;
}

void write_bytes(std::ostream& out, const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void read_bytes(std::istream& in, void* data, std::size_t size,
                const std::string& path) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(in.gcount()) != size)
        throw CorruptionError(path + " ends early");
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    write_bytes(out, b, 8);
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
    unsigned char b[8];
    read_bytes(in, b, 8, path);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}

double read_f64(std::istream& in, const std::string& path) {
    return std::bit_cast<double>(read_u64(in, path));
}

void write_i64(std::ostream& out, std::int64_t v) {
    write_u64(out, static_cast<std::uint64_t>(v));
}

std::int64_t read_i64(std::istream& in, const std::string& path) {
    return static_cast<std::int64_t>(read_u64(in, path));
}

void write_magic(std::ostream& out, const char* magic) {
    write_bytes(out, magic, 8);
}

void expect_magic(std::istream& in, const char* magic, const std::string& path) {
    char got[8];
    read_bytes(in, got, 8, path);
    if (std::memcmp(got, magic, 8) != 0)
        throw FormatError(path + " does not start with the " + std::string(magic, 8) +
                          " magic");
}

void expect_end(std::istream& in, const std::string& path) {
    if (in.peek() != std::char_traits<char>::eof())
        throw CorruptionError(path + " has trailing bytes");
}

int checked_dim(std::uint64_t v, const char* name, const std::string& path) {
    if (v >= kDimLimit)
        throw FormatError(path + " header field " + name + " is out of range");
    return static_cast<int>(v);
}

void write_vec3(std::ostream& out, const Eigen::Vector3d& v) {
    write_f64(out, v[0]);
    write_f64(out, v[1]);
    write_f64(out, v[2]);
}

Eigen::Vector3d read_vec3(std::istream& in, const std::string& path) {
    Eigen::Vector3d v;
    v[0] = read_f64(in, path);
    v[1] = read_f64(in, path);
    v[2] = read_f64(in, path);
    return v;
}

void write_doubles(std::ostream& out, const double* data, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) write_f64(out, data[i]);
}

void read_doubles(std::istream& in, double* data, Eigen::Index count,
                  const std::string& path) {
    for (Eigen::Index i = 0; i < count; ++i) data[i] = read_f64(in, path);
}

// round-trip-exact decimal rendering
std::string format_double(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

double parse_double(const std::string& cell, long line) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError("'" + cell + "' is not a number", line);
    return value;
}

long parse_long(const std::string& cell, long line) {
    long value = 0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError("'" + cell + "' is not an integer", line);
    return value;
}

// strips one trailing \r so files written on other platforms parse too
std::string chomp(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

const char* loss_name(LossKind loss) {
    return loss == LossKind::CrossEntropy ? "cross_entropy" : "mse";
}

LossKind loss_from_name(const std::string& name, const std::string& path) {
    if (name == "cross_entropy") return LossKind::CrossEntropy;
    if (name == "mse") return LossKind::Mse;
    throw FormatError(path + " names unknown loss '" + name + "'");
}

const char* layer_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::ZerConv: return "zerconv";
        case LayerKind::ReLU: return "relu";
        case LayerKind::Linear: return "linear";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

}  // namespace

void save_patch_tensor(const PatchTensor& tensor, const std::string& path) {
    tensor.validate();
    std::ofstream out = open_out(path);
    write_magic(out, "ZNTENS01");
    write_u64(out, static_cast<std::uint64_t>(tensor.n));
    write_u64(out, static_cast<std::uint64_t>(tensor.k));
    write_u64(out, static_cast<std::uint64_t>(tensor.d));
    write_f64(out, tensor.r0);
    write_doubles(out, tensor.data.data(), tensor.data.size());
    if (!out) throw IoError("failed writing " + path);
}

PatchTensor load_patch_tensor(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "ZNTENS01", path);
    PatchTensor tensor;
    tensor.n = checked_dim(read_u64(in, path), "N", path);
    tensor.k = checked_dim(read_u64(in, path), "k", path);
    tensor.d = checked_dim(read_u64(in, path), "d", path);
    tensor.r0 = read_f64(in, path);
    if (tensor.n < 0 || tensor.k < 1 || tensor.d < 1)
        throw FormatError(path + " header describes an empty tensor");
    tensor.data.resize(static_cast<Eigen::Index>(tensor.k) * tensor.d, tensor.n);
    read_doubles(in, tensor.data.data(), tensor.data.size(), path);
    expect_end(in, path);
    tensor.validate();
    return tensor;
}

void save_kernel_bank(const KernelBank& bank, const std::string& path) {
    std::ofstream out = open_out(path);
    write_magic(out, "ZNKERN01");
    write_u64(out, static_cast<std::uint64_t>(bank.k));
    write_u64(out, static_cast<std::uint64_t>(bank.d_in));
    write_u64(out, static_cast<std::uint64_t>(bank.d_out));
    write_u64(out, static_cast<std::uint64_t>(bank.s));
    write_doubles(out, bank.base.data(), bank.base.size());
    write_doubles(out, bank.bias.data(), bank.bias.size());
    if (!out) throw IoError("failed writing " + path);
}

KernelBank load_kernel_bank(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "ZNKERN01", path);
    const int k = checked_dim(read_u64(in, path), "k", path);
    const int d_in = checked_dim(read_u64(in, path), "d_in", path);
    const int d_out = checked_dim(read_u64(in, path), "d_out", path);
    const int s = checked_dim(read_u64(in, path), "s", path);
    if (k < 1 || d_in < 1 || d_out < 1 || s < 1)
        throw FormatError(path + " header describes an empty kernel");
    Eigen::MatrixXd base(static_cast<Eigen::Index>(k) * d_in, d_out);
    Eigen::VectorXd bias(d_out);
    read_doubles(in, base.data(), base.size(), path);
    read_doubles(in, bias.data(), bias.size(), path);
    expect_end(in, path);
    return make_kernel_bank(base, k, s, bias);
}

void save_samples(const std::vector<SurfaceSample>& samples, const std::string& path) {
    std::ofstream out = open_out(path);
    write_magic(out, "ZNSAMPL1");
    write_u64(out, samples.size());
    for (const SurfaceSample& sample : samples) {
        write_i64(out, sample.face);
        write_vec3(out, sample.barycentric);
        write_vec3(out, sample.position);
    }
    if (!out) throw IoError("failed writing " + path);
}

std::vector<SurfaceSample> load_samples(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "ZNSAMPL1", path);
    const std::uint64_t count = read_u64(in, path);
    if (count >= kDimLimit) throw FormatError(path + " sample count is out of range");
    std::vector<SurfaceSample> samples(count);
    for (SurfaceSample& sample : samples) {
        sample.face = static_cast<int>(read_i64(in, path));
        sample.barycentric = read_vec3(in, path);
        sample.position = read_vec3(in, path);
    }
    expect_end(in, path);
    return samples;
}

void save_patches(const std::vector<GeodesicPatch>& patches, const std::string& path) {
    std::ofstream out = open_out(path);
    write_magic(out, "ZNPATCH1");
    write_u64(out, patches.size());
    for (const GeodesicPatch& patch : patches) {
        write_i64(out, patch.center);
        write_f64(out, patch.r0);
        write_i64(out, patch.frame.vertex);
        write_vec3(out, patch.frame.normal);
        write_vec3(out, patch.frame.e1);
        write_vec3(out, patch.frame.e2);
        write_u64(out, patch.entries.size());
        for (const PatchEntry& entry : patch.entries) {
            write_f64(out, entry.r);
            write_f64(out, entry.theta);
            write_i64(out, entry.node_a);
            write_i64(out, entry.node_b);
            write_f64(out, entry.t);
        }
    }
    if (!out) throw IoError("failed writing " + path);
}

std::vector<GeodesicPatch> load_patches(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "ZNPATCH1", path);
    const std::uint64_t count = read_u64(in, path);
    if (count >= kDimLimit) throw FormatError(path + " patch count is out of range");
    std::vector<GeodesicPatch> patches(count);
    for (GeodesicPatch& patch : patches) {
        patch.center = static_cast<int>(read_i64(in, path));
        patch.r0 = read_f64(in, path);
        patch.frame.vertex = static_cast<int>(read_i64(in, path));
        patch.frame.normal = read_vec3(in, path);
        patch.frame.e1 = read_vec3(in, path);
        patch.frame.e2 = read_vec3(in, path);
        const std::uint64_t entries = read_u64(in, path);
        if (entries >= kDimLimit)
            throw FormatError(path + " entry count is out of range");
        patch.entries.resize(entries);
        for (PatchEntry& entry : patch.entries) {
            entry.r = read_f64(in, path);
            entry.theta = read_f64(in, path);
            entry.node_a = static_cast<int>(read_i64(in, path));
            entry.node_b = static_cast<int>(read_i64(in, path));
            entry.t = read_f64(in, path);
        }
    }
    expect_end(in, path);
    return patches;
}

void save_checkpoint(const Model& model, int epoch, const std::string& path) {
    const ModelSpec& spec = model.spec();
    const std::vector<Eigen::VectorXd> values = model.parameter_values();

    json manifest;
    manifest["version"] = 1;
    manifest["epoch"] = epoch;
    manifest["seed"] = spec.seed;
    manifest["d_in"] = spec.d_in;
    manifest["loss"] = loss_name(spec.loss);
    json layers = json::array();
    for (const LayerSpec& ls : spec.layers) {
        json layer;
        layer["kind"] = layer_name(ls.kind);
        if (ls.kind == LayerKind::ZerConv) {
            layer["d_out"] = ls.d_out;
            layer["r0"] = ls.r0;
            layer["k"] = ls.k;
            layer["s"] = ls.s;
            layer["directional"] = ls.directional;
        } else if (ls.kind == LayerKind::Linear) {
            layer["d_out"] = ls.d_out;
        }
        layers.push_back(layer);
    }
    manifest["layers"] = layers;
    json shapes = json::array();
    for (const Eigen::VectorXd& v : values)
        shapes.push_back(static_cast<std::uint64_t>(v.size()));
    manifest["shapes"] = shapes;
    const std::string text = manifest.dump();

    std::ofstream out = open_out(path);
    write_magic(out, "ZNCKPT01");
    write_u64(out, text.size());
    write_bytes(out, text.data(), text.size());
    for (const Eigen::VectorXd& v : values) write_doubles(out, v.data(), v.size());
    if (!out) throw IoError("failed writing " + path);
}

Model load_checkpoint(const std::string& path, int* epoch) {
    std::ifstream in = open_in(path);
    expect_magic(in, "ZNCKPT01", path);
    const std::uint64_t text_size = read_u64(in, path);
    if (text_size >= kDimLimit)
        throw FormatError(path + " manifest length is out of range");
    std::string text(text_size, '\0');
    read_bytes(in, text.data(), text.size(), path);

    json manifest;
    try {
        manifest = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(path + " manifest is not valid JSON: " + e.what());
    }
    try {
        if (manifest.at("version").get<int>() != 1)
            throw FormatError(path + " has an unsupported checkpoint version");
        ModelSpec spec;
        spec.seed = manifest.at("seed").get<std::uint64_t>();
        spec.d_in = manifest.at("d_in").get<int>();
        spec.loss = loss_from_name(manifest.at("loss").get<std::string>(), path);
        for (const json& layer : manifest.at("layers")) {
            const std::string kind = layer.at("kind").get<std::string>();
            if (kind == "zerconv") {
                spec.layers.push_back(conv_layer(
                    layer.at("d_out").get<int>(), layer.at("r0").get<double>(),
                    layer.at("k").get<int>(), layer.at("s").get<int>(),
                    layer.at("directional").get<bool>()));
            } else if (kind == "relu") {
                spec.layers.push_back(relu_layer());
            } else if (kind == "linear") {
                spec.layers.push_back(linear_layer(layer.at("d_out").get<int>()));
            } else if (kind == "softmax") {
                spec.layers.push_back(softmax_layer());
            } else {
                throw FormatError(path + " names unknown layer kind '" + kind + "'");
            }
        }

        Model model(spec);
        auto views = model.parameters();
        const json& shapes = manifest.at("shapes");
        if (shapes.size() != views.size())
            throw FormatError(path + " stores " + std::to_string(shapes.size()) +
                              " tensors, the architecture has " +
                              std::to_string(views.size()));
        for (std::size_t p = 0; p < views.size(); ++p) {
            if (shapes[p].get<std::uint64_t>() !=
                static_cast<std::uint64_t>(views[p].size))
                throw ShapeError(path + " tensor " + std::to_string(p) +
                                 " does not match the architecture");
            read_doubles(in, views[p].data, views[p].size, path);
        }
        expect_end(in, path);
        model.refresh();
        if (epoch != nullptr) *epoch = manifest.at("epoch").get<int>();
        return model;
    } catch (const json::exception& e) {
        throw FormatError(path + " manifest is missing fields: " + e.what());
    }
}

void write_loss_history(const std::vector<EpochRecord>& history,
                        const std::string& path) {
    std::ofstream out = open_out(path);
    out << "epoch,loss,metric\n";
    for (const EpochRecord& record : history)
        out << record.epoch << ',' << format_double(record.loss) << ','
            << format_double(record.metric) << '\n';
    if (!out) throw IoError("failed writing " + path);
}

std::vector<EpochRecord> read_loss_history(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long line_no = 1;
    if (!std::getline(in, line) || chomp(line) != "epoch,loss,metric")
        throw ParseError(path + " must start with the epoch,loss,metric header",
                         line_no);
    std::vector<EpochRecord> history;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != 3) throw ParseError("expected 3 columns", line_no);
        EpochRecord record;
        record.epoch = static_cast<int>(parse_long(cells[0], line_no));
        record.loss = parse_double(cells[1], line_no);
        record.metric = parse_double(cells[2], line_no);
        history.push_back(record);
    }
    return history;
}

void write_patch_csv(const std::vector<GeodesicPatch>& patches,
                     const std::string& path) {
    std::ofstream out = open_out(path);
    out << "center,node_a,node_b,blend,r,theta\n";
    for (const GeodesicPatch& patch : patches) {
        if (!patch.valid()) continue;
        for (const PatchEntry& entry : patch.entries)
            out << patch.center << ',' << entry.node_a << ',' << entry.node_b << ','
                << format_double(entry.t) << ',' << format_double(entry.r) << ','
                << format_double(entry.theta) << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

void write_field_csv(const Eigen::MatrixXd& field, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "vertex_id";
    for (Eigen::Index c = 0; c < field.cols(); ++c) out << ",c" << c;
    out << '\n';
    for (Eigen::Index v = 0; v < field.rows(); ++v) {
        out << v;
        for (Eigen::Index c = 0; c < field.cols(); ++c)
            out << ',' << format_double(field(v, c));
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

Eigen::MatrixXd read_field_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long line_no = 1;
    if (!std::getline(in, line))
        throw ParseError(path + " is empty", line_no);
    const std::vector<std::string> header = split_csv_line(chomp(line));
    if (header.empty() || header[0] != "vertex_id")
        throw ParseError(path + " must start with a vertex_id header column", line_no);
    const std::size_t d = header.size() - 1;
    if (d == 0) throw ParseError(path + " has no value columns", line_no);
    for (std::size_t c = 0; c < d; ++c)
        if (header[c + 1] != "c" + std::to_string(c))
            throw ParseError(path + " header column '" + header[c + 1] +
                                 "' should be c" + std::to_string(c),
                             line_no);

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != d + 1)
            throw ParseError("expected " + std::to_string(d + 1) + " columns", line_no);
        const long id = parse_long(cells[0], line_no);
        if (id != static_cast<long>(rows.size()))
            throw ParseError("vertex_id " + std::to_string(id) + " should be " +
                                 std::to_string(rows.size()),
                             line_no);
        std::vector<double> row(d);
        for (std::size_t c = 0; c < d; ++c) row[c] = parse_double(cells[c + 1], line_no);
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd field(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(d));
    for (std::size_t v = 0; v < rows.size(); ++v)
        for (std::size_t c = 0; c < d; ++c)
            field(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(c)) =
                rows[v][c];
    return field;
}

void write_labels_csv(const Eigen::VectorXi& labels, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "vertex_id,label\n";
    for (Eigen::Index v = 0; v < labels.size(); ++v)
        out << v << ',' << labels[v] << '\n';
    if (!out) throw IoError("failed writing " + path);
}

Eigen::VectorXi read_labels_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long line_no = 1;
    if (!std::getline(in, line) || chomp(line) != "vertex_id,label")
        throw ParseError(path + " must start with the vertex_id,label header", line_no);
    std::vector<int> labels;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != 2) throw ParseError("expected 2 columns", line_no);
        const long id = parse_long(cells[0], line_no);
        if (id != static_cast<long>(labels.size()))
            throw ParseError("vertex_id " + std::to_string(id) + " should be " +
                                 std::to_string(labels.size()),
                             line_no);
        labels.push_back(static_cast<int>(parse_long(cells[1], line_no)));
    }
    Eigen::VectorXi out(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t v = 0; v < labels.size(); ++v)
        out[static_cast<Eigen::Index>(v)] = labels[v];
    return out;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in = open_in(path);
    char buffer[1 << 16];
    std::uint64_t hash = 14695981039346656037ull;
    while (in) {
        in.read(buffer, sizeof(buffer));
        hash = fnv1a64(buffer, static_cast<std::size_t>(in.gcount()), hash);
    }
    return hash;
}

}  // namespace zernet
