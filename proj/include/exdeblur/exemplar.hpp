#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exdeblur/image.hpp"
#include "exdeblur/structure.hpp"

namespace exdeblur {

/// One resampled variant of an exemplar: gradients of the transformed
/// sharp image and the correspondingly transformed mask.
struct ExemplarEntry {
    std::string id;
    GradientField gradients;
    ContourMask mask;
    double scale = 1.0;
    double rotation = 0.0;
    /// Position of the source pair in the manifest.
    int manifest_index = 0;
};

struct ExemplarSource {
    std::string id;
    GrayImage image;
    ContourMask mask;
};

/// Search grid for variants.
struct VariantGrid {
    std::vector<double> scales{0.5, 1.0, 1.5, 2.0};
    std::vector<double> rotations = default_rotations();

    static std::vector<double> default_rotations();
};

/// Immutable collection of eagerly built variants, in manifest order, then
/// scale order, then rotation order.
class ExemplarDB {
public:
    ExemplarDB() = default;
    explicit ExemplarDB(std::vector<ExemplarEntry> entries) : entries_(std::move(entries)) {}

    const std::vector<ExemplarEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::vector<ExemplarEntry> entries_;
};

/// Bilinear scale by `scale` (output ceil(w*scale) x ceil(h*scale)), then a
/// rotation by `degrees` about the image center on the same canvas with
/// replicate fill. Mask is resampled the same way and binarized at 0.5.
ExemplarEntry make_variant(const ExemplarSource& src, double scale, double degrees,
                           int manifest_index = 0);

ExemplarDB build_exemplar_db(std::span<const ExemplarSource> sources,
                             const VariantGrid& grid = {});

/// Reads a manifest of `image_path<TAB>mask_path<TAB>id` lines (relative
/// paths resolve against the manifest's directory) and builds the DB.
ExemplarDB build_exemplar_db(const std::filesystem::path& manifest,
                             const VariantGrid& grid = {});
std::vector<ExemplarSource> read_exemplar_manifest(const std::filesystem::path& manifest);

struct NccOptions {
    /// Normalize by the query norm under the exemplar footprint instead of
    /// the global query norm.
    bool windowed = false;
};

struct NccResult {
    double score;
    int shift_x;
    int shift_y;
};

/// Maximum normalized cross-correlation over all placements t of the
/// exemplar inside the query (0 <= t <= query - exemplar). Channels dx and
/// dy are concatenated in the inner product. Ties resolve to the first
/// shift in row-major order. Throws DimensionError when the exemplar does
/// not fit, DegenerateInputError for zero-norm inputs.
NccResult ncc_score(const GradientField& query, const GradientField& exemplar,
                    const NccOptions& opts = {});

/// Exhaustive spatial-domain NCC; the reference for ncc_score.
NccResult ncc_score_direct(const GradientField& query, const GradientField& exemplar,
                           const NccOptions& opts = {});

struct MatchResult {
    std::string exemplar_id;
    std::size_t entry_index = 0;
    double score = 0.0;
    int shift_x = 0;
    int shift_y = 0;
    double scale = 1.0;
    double rotation = 0.0;
};

/// Scores every DB variant against gradient(blurred) and returns the best.
/// Ties: earlier manifest entry, then smaller |rotation|, then scale closer
/// to 1. Variants that do not fit the query or have zero norm are skipped;
/// throws DegenerateInputError if none can be scored.
MatchResult match_exemplar(const GrayImage& blurred, const ExemplarDB& db,
                           const NccOptions& opts = {});
MatchResult match_exemplar_serial(const GrayImage& blurred, const ExemplarDB& db,
                                  const NccOptions& opts = {});

enum class EdgeSource { exemplar, from_input };

/// Gated exemplar gradients translated by the matched shift and embedded
/// into a zero field of the query's size. With EdgeSource::from_input the
/// query gradients are gated by the shifted mask instead.
GradientField predicted_edges(const MatchResult& result, const ExemplarDB& db, int query_width,
                              int query_height, EdgeSource source = EdgeSource::exemplar,
                              const GradientField* query_gradients = nullptr);

}  // namespace exdeblur
