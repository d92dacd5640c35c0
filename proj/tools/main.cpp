// zernet: command-line surface for the Zernike surface-convolution pipeline.
// Subcommands: basis, patch, prepare, train, predict, eval. Every run prints
// an effective-config banner it can be reproduced from, writes outputs only
// under --out, and refuses to overwrite existing files unless --force.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"

#include "zernet/bundle.hpp"
#include "zernet/errors.hpp"
#include "zernet/exp_map.hpp"
#include "zernet/io.hpp"
#include "zernet/mesh.hpp"
#include "zernet/network.hpp"
#include "zernet/zernike.hpp"

namespace {

using namespace zernet;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

std::string format_double(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string::size_type start = 0;
    while (true) {
        const auto at = text.find(sep, start);
        if (at == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, at - start));
        start = at + 1;
    }
}

// Flat key=value configuration: defaults, then ZERNET_SEED, then the config
// file, then command-line overrides. Unknown keys are fatal.
class Config {
public:
    explicit Config(std::string command) : command_(std::move(command)) {}

    void define(const std::string& key, const std::string& value) {
        order_.push_back(key);
        values_[key] = value;
    }

    void set(const std::string& key, const std::string& value) {
        const auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("unknown key '" + key + "' for " + command_);
        it->second = value;
    }

    void apply_env_seed() {
        if (!values_.count("seed")) return;
        if (const char* env = std::getenv("ZERNET_SEED")) set("seed", env);
    }

    void apply_file(const std::string& path) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file " + path);
        std::string line;
        long number = 0;
        while (std::getline(in, line)) {
            ++number;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError(path + " entry '" + line + "' is not key=value",
                                 number);
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void apply_overrides(const std::vector<std::string>& overrides) {
        for (const std::string& entry : overrides) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos)
                throw ConfigError("override '" + entry + "' is not key=value");
            set(trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
        }
    }

    const std::string& get(const std::string& key) const { return values_.at(key); }

    std::string require(const std::string& key) const {
        const std::string& value = get(key);
        if (value.empty())
            throw ConfigError(command_ + " needs the '" + key + "' key");
        return value;
    }

    long get_int(const std::string& key, long minimum) const {
        const std::string& text = get(key);
        long value = 0;
        const auto [ptr, ec] =
            std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw ConfigError("key '" + key + "' has invalid integer '" + text + "'");
        if (value < minimum)
            throw ConfigError("key '" + key + "' must be at least " +
                              std::to_string(minimum));
        return value;
    }

    std::uint64_t get_seed() const {
        const std::string& text = get("seed");
        std::uint64_t value = 0;
        const auto [ptr, ec] =
            std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw ConfigError("key 'seed' has invalid integer '" + text + "'");
        return value;
    }

    double get_double(const std::string& key) const {
        const std::string& text = get(key);
        double value = 0.0;
        const auto [ptr, ec] =
            std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw ConfigError("key '" + key + "' has invalid number '" + text + "'");
        return value;
    }

    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> values;
        for (const std::string& part : split(get(key), ',')) {
            const std::string text = trim(part);
            double value = 0.0;
            const auto [ptr, ec] =
                std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || ptr != text.data() + text.size())
                throw ConfigError("key '" + key + "' has invalid number '" + text +
                                  "'");
            values.push_back(value);
        }
        return values;
    }

    std::vector<std::string> get_list(const std::string& key) const {
        const std::string& text = get(key);
        if (trim(text).empty()) return {};
        std::vector<std::string> values;
        for (const std::string& part : split(text, ',')) values.push_back(trim(part));
        return values;
    }

    void banner(const std::string& out, bool force, int threads, bool verbose) const {
        std::cout << "[config] command=" << command_ << '\n'
                  << "[config] out=" << out << '\n'
                  << "[config] force=" << (force ? 1 : 0) << '\n'
                  << "[config] threads=" << threads << '\n'
                  << "[config] verbose=" << (verbose ? 1 : 0) << '\n';
        for (const std::string& key : order_)
            std::cout << "[config] " << key << '=' << values_.at(key) << '\n';
    }

private:
    std::string command_;
    std::vector<std::string> order_;
    std::map<std::string, std::string> values_;
};

struct CommonOpts {
    std::string config_path;
    std::string out = ".";
    bool force = false;
    int threads = 1;
    bool verbose = false;
    std::vector<std::string> overrides;

    int resolved_threads() const {
        if (threads > 0) return threads;
        const unsigned n = std::thread::hardware_concurrency();
        return n == 0 ? 1 : static_cast<int>(n);
    }
};

void attach_common(CLI::App* sub, CommonOpts& common) {
    sub->add_option("--config", common.config_path,
                    "flat key=value config file, one entry per line");
    sub->add_option("--out", common.out, "directory all outputs are written under")
        ->capture_default_str();
    sub->add_flag("--force", common.force, "overwrite existing output files");
    sub->add_option("--threads", common.threads, "worker threads, 0 picks automatically")
        ->capture_default_str();
    sub->add_flag("--verbose", common.verbose, "print per-epoch and per-mesh detail");
    sub->add_option("overrides", common.overrides,
                    "key=value entries applied after the config file");
}

void resolve(Config& config, const CommonOpts& common) {
    config.apply_env_seed();
    config.apply_file(common.config_path);
    config.apply_overrides(common.overrides);
    config.banner(common.out, common.force, common.resolved_threads(),
                  common.verbose);
}

// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration, used for
// the radial part of disk quadrature; the angular part takes equispaced
// midpoints, which integrate trigonometric polynomials exactly.
void gauss_legendre_unit(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double node = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = node;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * node * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (node * p1 - p0) / (node * node - 1.0);
            const double dx = p1 / dp;
            node -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        x[i] = 0.5 * (node + 1.0);
        w[i] = 1.0 / ((1.0 - node * node) * dp * dp);
    }
}

fs::path output_path(const CommonOpts& common, const std::string& name) {
    std::error_code ec;
    fs::create_directories(common.out, ec);
    if (ec) throw IoError("cannot create " + common.out + ": " + ec.message());
    const fs::path path = fs::path(common.out) / name;
    if (fs::exists(path) && !common.force)
        throw IoError(path.string() + " exists (pass --force to overwrite)");
    return path;
}

// ---------------------------------------------------------------------------
// basis: tabulate the first k bases on a polar grid and their Gram matrix

void cmd_basis(const Config& config, const CommonOpts& common) {
    const int k = static_cast<int>(config.get_int("k", 1));
    const int table_grid = static_cast<int>(config.get_int("table_grid", 1));
    const int quad_grid = static_cast<int>(config.get_int("quad_grid", 2));

    const fs::path table_path = output_path(common, "basis_table.csv");
    const fs::path gram_path = output_path(common, "basis_gram.csv");

    std::ofstream table(table_path);
    if (!table) throw IoError("cannot open " + table_path.string() + " for writing");
    table << "r,theta";
    for (int j = 1; j <= k; ++j) table << ",z" << j;
    table << '\n';
    for (int ri = 0; ri < table_grid; ++ri) {
        const double r = (ri + 0.5) / table_grid;
        for (int ti = 0; ti < table_grid; ++ti) {
            const double theta = (ti + 0.5) * 2.0 * kPi / table_grid;
            table << format_double(r) << ',' << format_double(theta);
            for (int j = 1; j <= k; ++j)
                table << ',' << format_double(normalized_zernike<double>(j, r, theta));
            table << '\n';
        }
    }
    if (!table) throw IoError("failed while writing " + table_path.string());

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd z(k);
    std::vector<double> nodes, weights;
    gauss_legendre_unit(quad_grid, nodes, weights);
    for (int ri = 0; ri < quad_grid; ++ri) {
        const double r = nodes[ri];
        const double weight = r * weights[ri] * (2.0 * kPi / quad_grid);
        for (int ti = 0; ti < quad_grid; ++ti) {
            const double theta = (ti + 0.5) * 2.0 * kPi / quad_grid;
            for (int j = 1; j <= k; ++j) z[j - 1] = normalized_zernike<double>(j, r, theta);
            gram.selfadjointView<Eigen::Lower>().rankUpdate(z, weight);
        }
    }
    gram.triangularView<Eigen::StrictlyUpper>() =
        gram.triangularView<Eigen::StrictlyLower>().transpose();

    std::ofstream gram_out(gram_path);
    if (!gram_out) throw IoError("cannot open " + gram_path.string() + " for writing");
    for (int row = 0; row < k; ++row) {
        for (int col = 0; col < k; ++col)
            gram_out << (col ? "," : "") << format_double(gram(row, col));
        gram_out << '\n';
    }
    if (!gram_out) throw IoError("failed while writing " + gram_path.string());

    const double deviation =
        (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    std::cout << "wrote " << table_path.string() << " (" << table_grid * table_grid
              << " nodes) and " << gram_path.string() << " (max identity deviation "
              << format_double(deviation) << ")\n";
}

// ---------------------------------------------------------------------------
// patch: dump raw geodesic patches, one row per neighbor

void cmd_patch(const Config& config, const CommonOpts& common) {
    const std::string mesh_path = config.require("mesh");
    const double r0 = config.get_double("r0");
    if (!(r0 > 0.0)) throw ConfigError("key 'r0' must be positive");
    const int sample_count = static_cast<int>(config.get_int("samples", 1));
    const std::uint64_t seed = config.get_seed();

    const TriMesh mesh = load_mesh(mesh_path);
    const std::vector<SurfaceSample> samples =
        uniform_sample_surface(mesh, sample_count, seed);
    const NeighborGraph graph = build_neighbor_graph(mesh, samples);

    const fs::path path = output_path(common, "patches.csv");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "center_id,sample_id,r,theta\n";

    int sparse = 0;
    long rows = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        try {
            const GeodesicPatch patch = geodesic_patch(mesh, graph, v, r0);
            for (const PatchEntry& entry : patch.entries) {
                out << v << ',' << entry.node_a << ',' << format_double(entry.r) << ','
                    << format_double(entry.theta) << '\n';
                ++rows;
            }
        } catch (const SparsePatchError& e) {
            ++sparse;
            std::cerr << "warning: " << e.what() << '\n';
        }
    }
    if (!out) throw IoError("failed while writing " + path.string());
    std::cout << "wrote " << rows << " neighbor rows for "
              << mesh.vertex_count() - sparse << " of " << mesh.vertex_count()
              << " vertices to " << path.string();
    if (sparse > 0) std::cout << " (" << sparse << " too sparse)";
    std::cout << '\n';
}

// ---------------------------------------------------------------------------
// prepare: build and save an experiment bundle

void cmd_prepare(const Config& config, const CommonOpts& common) {
    PrepareConfig prep;
    prep.mesh_paths = config.get_list("meshes");
    if (prep.mesh_paths.empty()) throw ConfigError("prepare needs the 'meshes' key");
    prep.field_paths = config.get_list("fields");
    prep.label_paths = config.get_list("labels");
    prep.target_paths = config.get_list("targets");
    prep.radii = config.get_double_list("radii");
    prep.k = static_cast<int>(config.get_int("k", 1));
    prep.s = static_cast<int>(config.get_int("s", 1));
    prep.sample_count = static_cast<int>(config.get_int("sample_count", 1));
    prep.target_count = static_cast<int>(config.get_int("target_count", 1));
    prep.area = config.get_double("area");
    prep.seed = config.get_seed();
    prep.threads = common.resolved_threads();

    const ExperimentBundle bundle = prepare_bundle(prep);
    save_bundle(bundle, common.out, common.force);
    std::cout << "wrote bundle " << common.out << " with " << bundle.meshes.size()
              << " meshes (config hash " << std::hex << bundle.config_hash << std::dec
              << ")\n";
    if (common.verbose)
        for (const BundleMesh& mesh : bundle.meshes)
            std::cout << "mesh " << mesh.name << ": " << mesh.mesh.vertex_count()
                      << " vertices, " << mesh.failed_vertices.size()
                      << " failed patches\n";
}

// ---------------------------------------------------------------------------
// train: fit a model on a bundle, checkpointing along the way

std::vector<LayerSpec> parse_layers(const std::string& text, int k, int s) {
    std::vector<LayerSpec> layers;
    for (const std::string& raw : split(text, ',')) {
        const std::string token = trim(raw);
        const std::vector<std::string> parts = split(token, ':');
        const auto part_int = [&](std::size_t i) {
            long value = 0;
            const std::string& p = parts[i];
            const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), value);
            if (ec != std::errc() || ptr != p.data() + p.size() || value < 1)
                throw ConfigError("layer token '" + token + "' has invalid size '" +
                                  p + "'");
            return static_cast<int>(value);
        };
        if (parts[0] == "relu" && parts.size() == 1) {
            layers.push_back(relu_layer());
        } else if (parts[0] == "softmax" && parts.size() == 1) {
            layers.push_back(softmax_layer());
        } else if (parts[0] == "linear" && parts.size() == 2) {
            layers.push_back(linear_layer(part_int(1)));
        } else if (parts[0] == "conv" &&
                   (parts.size() == 3 || (parts.size() == 4 && parts[3] == "dir"))) {
            const std::string& p = parts[2];
            double r0 = 0.0;
            const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), r0);
            if (ec != std::errc() || ptr != p.data() + p.size() || !(r0 > 0.0))
                throw ConfigError("layer token '" + token + "' has invalid radius '" +
                                  p + "'");
            layers.push_back(conv_layer(part_int(1), r0, k, s, parts.size() == 4));
        } else {
            throw ConfigError(
                "layer token '" + token +
                "' is not conv:<d_out>:<r0>[:dir], relu, linear:<d_out>, or softmax");
        }
    }
    return layers;
}

void cmd_train(const Config& config, const CommonOpts& common) {
    const std::string bundle_path = config.require("bundle");
    const std::string layers_text = config.require("layers");
    const std::string loss_text = config.get("loss");
    LossKind loss;
    if (loss_text == "ce")
        loss = LossKind::CrossEntropy;
    else if (loss_text == "mse")
        loss = LossKind::Mse;
    else
        throw ConfigError("key 'loss' must be ce or mse, not '" + loss_text + "'");

    const ExperimentBundle bundle = load_bundle(bundle_path);
    const std::vector<MeshData> dataset = bundle_to_dataset(bundle);

    ModelSpec spec;
    spec.layers = parse_layers(layers_text, static_cast<int>(config.get_int("k", 1)),
                               static_cast<int>(config.get_int("s", 1)));
    spec.loss = loss;
    spec.d_in = static_cast<int>(dataset.front().input.cols());
    spec.seed = config.get_seed();
    Model model(spec);

    TrainConfig train_config;
    train_config.adam.learning_rate = config.get_double("lr");
    train_config.adam.beta1 = config.get_double("beta1");
    train_config.adam.beta2 = config.get_double("beta2");
    train_config.adam.epsilon = config.get_double("epsilon");
    train_config.epochs = static_cast<int>(config.get_int("epochs", 1));
    train_config.checkpoint_interval =
        static_cast<int>(config.get_int("checkpoint_interval", 0));

    const fs::path history_path = output_path(common, "loss_history.csv");
    const fs::path final_path = output_path(common, "checkpoint_final.bin");

    const int interval = train_config.checkpoint_interval;
    train_config.on_epoch = [&](int epoch, double loss_value, double metric,
                                const Model& snapshot) {
        if (common.verbose)
            std::cout << "epoch " << epoch << " loss " << format_double(loss_value)
                      << " metric " << format_double(metric) << '\n';
        if (interval > 0 && epoch % interval == 0) {
            const fs::path path = output_path(
                common, "checkpoint_epoch_" + std::to_string(epoch) + ".bin");
            save_checkpoint(snapshot, epoch, path.string());
        }
    };

    const TrainResult result = train(model, train_config, dataset);
    write_loss_history(result.history, history_path.string());
    save_checkpoint(model, train_config.epochs, final_path.string());

    const EpochRecord& last = result.history.back();
    std::cout << "trained " << train_config.epochs << " epochs, final loss "
              << format_double(last.loss) << ", final metric "
              << format_double(last.metric) << '\n'
              << "wrote " << history_path.string() << " and " << final_path.string()
              << '\n';
}

// ---------------------------------------------------------------------------
// predict: run a checkpoint over every mesh of a bundle

void cmd_predict(const Config& config, const CommonOpts& common) {
    const std::string bundle_path = config.require("bundle");
    const std::string checkpoint_path = config.require("checkpoint");

    const ExperimentBundle bundle = load_bundle(bundle_path);
    const std::vector<MeshData> dataset = bundle_to_dataset(bundle);
    const Model model = load_checkpoint(checkpoint_path);

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const std::string& name = bundle.meshes[i].name;
        const PreparedMesh prepared = model.prepare(dataset[i]);
        const Eigen::MatrixXd outputs = model.forward(prepared, dataset[i].input);
        if (model.spec().loss == LossKind::CrossEntropy) {
            const fs::path path = output_path(common, "predictions_" + name + ".csv");
            write_labels_csv(predict_labels(outputs), path.string());
            std::cout << "mesh " << name << ": wrote " << path.string() << '\n';
        } else {
            const fs::path path = output_path(common, "outputs_" + name + ".csv");
            write_field_csv(outputs, path.string());
            std::cout << "mesh " << name << ": wrote " << path.string() << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// eval: score predictions against ground truth

void write_metrics(const fs::path& path,
                   const std::vector<std::pair<std::string, double>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "metric,value\n";
    for (const auto& [name, value] : rows)
        out << name << ',' << format_double(value) << '\n';
    if (!out) throw IoError("failed while writing " + path.string());
}

void cmd_eval(const Config& config, const CommonOpts& common) {
    const std::string predictions_path = config.require("predictions");
    const std::string truth_path = config.require("truth");
    const std::string task = config.get("task");

    if (task == "classification") {
        const Eigen::VectorXi predictions = read_labels_csv(predictions_path);
        const Eigen::VectorXi truth = read_labels_csv(truth_path);
        const double accuracy = evaluate_classification(predictions, truth);
        const fs::path path = output_path(common, "metrics.csv");
        write_metrics(path, {{"accuracy", accuracy}});
        std::cout << "accuracy " << format_double(accuracy) << ", wrote "
                  << path.string() << '\n';
    } else if (task == "regression") {
        const Eigen::MatrixXd predictions = read_field_csv(predictions_path);
        const Eigen::MatrixXd truth = read_field_csv(truth_path);
        if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols())
            throw ShapeError("predictions are " + std::to_string(predictions.rows()) +
                             "x" + std::to_string(predictions.cols()) + " but truth is " +
                             std::to_string(truth.rows()) + "x" +
                             std::to_string(truth.cols()));
        const std::vector<double> thresholds = config.get_double_list("thresholds");
        const Eigen::Map<const Eigen::VectorXd> p(predictions.data(),
                                                  predictions.size());
        const Eigen::Map<const Eigen::VectorXd> t(truth.data(), truth.size());
        const RegressionReport report = evaluate_regression(p, t, thresholds);
        std::vector<std::pair<std::string, double>> rows = {
            {"mape", report.mape},
            {"rrmse", report.rrmse},
            {"pcc", report.pcc},
            {"excluded_zero_truth", static_cast<double>(report.excluded)}};
        for (const auto& [threshold, rate] : report.hit_rate)
            rows.emplace_back("hit_rate_" + format_double(threshold), rate);
        const fs::path path = output_path(common, "metrics.csv");
        write_metrics(path, rows);
        std::cout << "mape " << format_double(report.mape) << ", rrmse "
                  << format_double(report.rrmse) << ", pcc "
                  << format_double(report.pcc) << ", wrote " << path.string() << '\n';
    } else if (task == "correspondence") {
        const std::string mesh_path = config.require("mesh");
        const Eigen::VectorXi predictions = read_labels_csv(predictions_path);
        const Eigen::VectorXi truth = read_labels_csv(truth_path);
        const TriMesh mesh = load_mesh(mesh_path);
        const std::vector<double> fractions = config.get_double_list("fractions");
        const auto curve = evaluate_correspondence(predictions, truth, mesh, fractions);
        const fs::path path = output_path(common, "correspondence_curve.csv");
        std::ofstream out(path);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out << "fraction,rate\n";
        for (const auto& [fraction, rate] : curve)
            out << format_double(fraction) << ',' << format_double(rate) << '\n';
        if (!out) throw IoError("failed while writing " + path.string());
        std::cout << "wrote " << path.string() << " with " << curve.size()
                  << " points\n";
    } else {
        throw ConfigError(
            "key 'task' must be classification, regression, or correspondence, not '" +
            task + "'");
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Zernike-basis convolution on triangle-mesh surfaces"};
    app.require_subcommand(1);

    CommonOpts basis_opts, patch_opts, prepare_opts, train_opts, predict_opts,
        eval_opts;

    CLI::App* basis = app.add_subcommand(
        "basis", "tabulate the orthonormal disk bases and their Gram matrix");
    attach_common(basis, basis_opts);
    Config basis_config("basis");
    basis_config.define("k", "21");
    basis_config.define("table_grid", "64");
    basis_config.define("quad_grid", "400");

    CLI::App* patch = app.add_subcommand(
        "patch", "dump geodesic polar patches of a mesh as CSV");
    attach_common(patch, patch_opts);
    Config patch_config("patch");
    patch_config.define("mesh", "");
    patch_config.define("r0", "0.3");
    patch_config.define("samples", "12000");
    patch_config.define("seed", "0");

    CLI::App* prepare = app.add_subcommand(
        "prepare", "build an experiment bundle from meshes and field CSVs");
    attach_common(prepare, prepare_opts);
    Config prepare_config("prepare");
    prepare_config.define("meshes", "");
    prepare_config.define("fields", "");
    prepare_config.define("labels", "");
    prepare_config.define("targets", "");
    prepare_config.define("radii", "0.3");
    prepare_config.define("k", "21");
    prepare_config.define("s", "4");
    prepare_config.define("sample_count", "12000");
    prepare_config.define("target_count", "50");
    prepare_config.define("area", "0");
    prepare_config.define("seed", "0");

    CLI::App* train_cmd = app.add_subcommand("train", "fit a model on a bundle");
    attach_common(train_cmd, train_opts);
    Config train_config("train");
    train_config.define("bundle", "");
    train_config.define("layers", "");
    train_config.define("loss", "ce");
    train_config.define("k", "21");
    train_config.define("s", "4");
    train_config.define("epochs", "100");
    train_config.define("lr", "0.001");
    train_config.define("beta1", "0.9");
    train_config.define("beta2", "0.999");
    train_config.define("epsilon", "1e-08");
    train_config.define("checkpoint_interval", "0");
    train_config.define("seed", "0");

    CLI::App* predict = app.add_subcommand(
        "predict", "run a checkpoint over every mesh of a bundle");
    attach_common(predict, predict_opts);
    Config predict_config("predict");
    predict_config.define("bundle", "");
    predict_config.define("checkpoint", "");

    CLI::App* eval = app.add_subcommand(
        "eval", "score predictions against ground truth");
    attach_common(eval, eval_opts);
    Config eval_config("eval");
    eval_config.define("predictions", "");
    eval_config.define("truth", "");
    eval_config.define("task", "classification");
    eval_config.define("thresholds", "0.1,0.2,0.3");
    eval_config.define("mesh", "");
    eval_config.define("fractions", "0,0.05,0.1,0.15,0.2,0.25,0.3");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: [cli] " << e.what() << '\n';
        return 1;
    }

    if (basis->parsed()) {
        resolve(basis_config, basis_opts);
        cmd_basis(basis_config, basis_opts);
    } else if (patch->parsed()) {
        resolve(patch_config, patch_opts);
        cmd_patch(patch_config, patch_opts);
    } else if (prepare->parsed()) {
        resolve(prepare_config, prepare_opts);
        cmd_prepare(prepare_config, prepare_opts);
    } else if (train_cmd->parsed()) {
        resolve(train_config, train_opts);
        cmd_train(train_config, train_opts);
    } else if (predict->parsed()) {
        resolve(predict_config, predict_opts);
        cmd_predict(predict_config, predict_opts);
    } else if (eval->parsed()) {
        resolve(eval_config, eval_opts);
        cmd_eval(eval_config, eval_opts);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const zernet::Error& e) {
        std::cerr << "error: [" << e.code() << "] " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: [internal] " << e.what() << '\n';
        return 1;
    }
}
