#pragma once

// Binary containers, CSV exports, and model checkpoints. All binary formats
// are little-endian with an 8-byte magic, so files round-trip bit-exactly
// across platforms. Error taxonomy: unreadable/unwritable path -> IoError,
// unrecognized magic or inconsistent header -> FormatError, files that end
// early or carry trailing bytes -> CorruptionError.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "zernet/conv.hpp"
#include "zernet/decompose.hpp"
#include "zernet/exp_map.hpp"
#include "zernet/mesh.hpp"
#include "zernet/network.hpp"

namespace zernet {

// Coefficient tensor: magic "ZNTENS01", then N, k, d as u64, r0 as f64,
// then the k*d*N values column-per-vertex.
void save_patch_tensor(const PatchTensor& tensor, const std::string& path);
PatchTensor load_patch_tensor(const std::string& path);

// Kernel container: magic "ZNKERN01", then k, d_in, d_out, s as u64, the
// (k*d_in) x d_out base coefficients, and the d_out bias. The rotated bank
// is re-derived on load.
void save_kernel_bank(const KernelBank& bank, const std::string& path);
KernelBank load_kernel_bank(const std::string& path);

// Surface samples: magic "ZNSAMPL1", count, then face id, barycentric
// coordinates, and position per sample.
void save_samples(const std::vector<SurfaceSample>& samples, const std::string& path);
std::vector<SurfaceSample> load_samples(const std::string& path);

// Geodesic patches: magic "ZNPATCH1", count, then one record per vertex
// (invalid patches round-trip as invalid).
void save_patches(const std::vector<GeodesicPatch>& patches, const std::string& path);
std::vector<GeodesicPatch> load_patches(const std::string& path);

// Model checkpoint: magic "ZNCKPT01", a JSON manifest (layer list, shapes,
// seed, loss, epoch), then every trainable tensor in parameters() order.
void save_checkpoint(const Model& model, int epoch, const std::string& path);
Model load_checkpoint(const std::string& path, int* epoch = nullptr);

// CSV exports. Doubles are written with round-trip precision.
void write_loss_history(const std::vector<EpochRecord>& history,
                        const std::string& path);
std::vector<EpochRecord> read_loss_history(const std::string& path);

// One row per patch entry: center,node_a,node_b,blend,r,theta.
void write_patch_csv(const std::vector<GeodesicPatch>& patches,
                     const std::string& path);

// Header vertex_id,c0,...,c{d-1}; row index must equal vertex_id.
void write_field_csv(const Eigen::MatrixXd& field, const std::string& path);
Eigen::MatrixXd read_field_csv(const std::string& path);

// Header vertex_id,label.
void write_labels_csv(const Eigen::VectorXi& labels, const std::string& path);
Eigen::VectorXi read_labels_csv(const std::string& path);

// FNV-1a over the raw file bytes; the bundle manifest's integrity hash.
std::uint64_t file_hash(const std::string& path);

}  // namespace zernet
