#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exdeblur/cnn.hpp"
#include "exdeblur/estimation.hpp"
#include "exdeblur/exemplar.hpp"
#include "exdeblur/metrics.hpp"
#include "exdeblur/restoration.hpp"
#include "exdeblur/structure.hpp"

namespace exdeblur {

enum class EdgeMode { exemplar, cnn, oracle_edges, no_edges };

EdgeMode parse_edge_mode(const std::string& name);
std::string to_string(EdgeMode mode);

struct PipelineConfig {
    EdgeMode mode = EdgeMode::no_edges;
    DeblurConfig deblur;
    RestoreConfig restore;
    NccOptions ncc;
    EdgeSource edge_source = EdgeSource::exemplar;
    GuidedFilterParams guided;
    /// Refine oracle masks with the guided filter + Otsu before gating.
    bool refine_mask = false;
    double tau_pred = 1e-4;
    /// Pad by ceil(kernel/2) with a periodic cosine blend before estimation.
    bool edge_taper = true;
};

/// Mode-specific inputs. Which ones are required depends on the mode:
/// exemplar -> db, cnn -> weights, oracle-edges -> mask (and optionally the
/// sharp image whose gradients it gates; otherwise the input's own).
struct EdgeInputs {
    const ExemplarDB* db = nullptr;
    const NetworkWeights* weights = nullptr;
    const ContourMask* mask = nullptr;
    const GrayImage* sharp = nullptr;
};

/// Predicted salient edges for the blurred image according to cfg.mode.
/// For no-edges this is the gradient of one latent pass on the input itself
/// (delta kernel, zero guidance).
GradientField initial_edges(const GrayImage& blurred, const EdgeInputs& inputs,
                            const PipelineConfig& cfg, MatchResult* match = nullptr);

struct DeblurOutcome {
    BlurKernel kernel = BlurKernel::delta(1);
    GrayImage latent;
    GrayImage restored;
    GradientField initial_edges;
    std::vector<IterationTrace> trace;
    std::optional<MatchResult> match;
};

/// Edge prediction, kernel estimation and (if restore is true) final
/// restoration. The estimation runs on an edge-tapered copy when
/// cfg.edge_taper is set; all returned images have the input's size.
DeblurOutcome run_deblur(const GrayImage& blurred, const EdgeInputs& inputs,
                         const PipelineConfig& cfg, bool restore = true);

/// Final restoration with the same edge handling as run_deblur: padded
/// and tapered by ceil(kernel/2) when cfg.edge_taper is set.
GrayImage restore_image(const GrayImage& blurred, const BlurKernel& k, const PipelineConfig& cfg);

/// Replicate-pads by `pad` on every side and blends the pad region toward
/// the opposite border with a raised-cosine ramp so the result is smooth
/// under periodic wrap.
GrayImage edge_taper_pad(const GrayImage& img, int pad);
GradientField zero_pad(const GradientField& g, int pad);

struct BenchCase {
    std::filesystem::path sharp_path;
    std::filesystem::path kernel_path;
    double noise_level = 0.0;
    std::optional<std::filesystem::path> mask_path;
};

/// Dataset manifest: TSV of sharp_path, kernel_path, noise_level and an
/// optional mask_path. Relative paths resolve against the manifest.
std::vector<BenchCase> read_bench_manifest(const std::filesystem::path& path);

/// Runs every case (blur with seed + row index, estimate, restore, score).
/// A failing case yields a record with failed = true. Output is sorted by
/// (image_id, kernel_id) and then by noise level.
std::vector<BenchRecord> run_bench(const std::vector<BenchCase>& cases, const EdgeInputs& inputs,
                                   const PipelineConfig& cfg, std::uint64_t seed);

}  // namespace exdeblur
