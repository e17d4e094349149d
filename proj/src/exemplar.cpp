#include "exdeblur/exemplar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "exdeblur/error.hpp"
#include "exdeblur/fft.hpp"
#include "exdeblur/image_io.hpp"
#include "exdeblur/kernels.hpp"

namespace exdeblur {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double bilinear(const GrayImage& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const double v00 = img.clamped(x0, y0);
    if (fx == 0.0 && fy == 0.0) return v00;
    return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * img.clamped(x0 + 1, y0) +
           (1 - fx) * fy * img.clamped(x0, y0 + 1) + fx * fy * img.clamped(x0 + 1, y0 + 1);
}

// One bilinear resampling implementing "scale, then rotate about the center
// of the scaled canvas".
GrayImage scale_rotate(const GrayImage& src, double scale, double degrees) {
    const int w = static_cast<int>(std::ceil(src.width() * scale - 1e-9));
    const int h = static_cast<int>(std::ceil(src.height() * scale - 1e-9));
    const double c = std::cos(degrees * kDegToRad);
    const double s = std::sin(degrees * kDegToRad);
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Inverse rotation into the scaled canvas, then back to source pixels.
            const double px = degrees == 0.0 ? x : c * (x - cx) + s * (y - cy) + cx;
            const double py = degrees == 0.0 ? y : -s * (x - cx) + c * (y - cy) + cy;
            const double sx = scale == 1.0 ? px : (px + 0.5) / scale - 0.5;
            const double sy = scale == 1.0 ? py : (py + 0.5) / scale - 0.5;
            out[static_cast<std::size_t>(y) * w + x] = bilinear(src, sx, sy);
        }
    }
    return {w, h, std::move(out)};
}

struct Placement {
    double score;
    int tx, ty;
};

// Query-side quantities shared by every exemplar scored against it.
class QueryPlan {
public:
    QueryPlan(const GradientField& q, const NccOptions& opts) : q_(q), opts_(opts) {
        fx_ = dft(q.dx);
        fy_ = dft(q.dy);
        const std::size_t n = q.dx.size();
        sq_.resize(n);
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sq_[i] = q.dx.data()[i] * q.dx.data()[i] + q.dy.data()[i] * q.dy.data()[i];
            e += sq_[i];
        }
        norm_ = std::sqrt(e);
        if (opts.windowed) build_integral();
    }

    double norm() const noexcept { return norm_; }

    // Returns nullopt when the exemplar does not fit or has zero norm.
    std::optional<Placement> score(const GradientField& ex) const {
        const int W = q_.width(), H = q_.height();
        const int w = ex.width(), h = ex.height();
        if (w > W || h > H) return std::nullopt;
        const double enorm = std::sqrt(ex.energy());
        if (enorm == 0.0 || norm_ == 0.0) return std::nullopt;
        std::vector<double> px(static_cast<std::size_t>(W) * H, 0.0), py(px.size(), 0.0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                px[static_cast<std::size_t>(y) * W + x] = ex.dx(x, y);
                py[static_cast<std::size_t>(y) * W + x] = ex.dy(x, y);
            }
        }
        const Spectrum ex_x = dft(px, W, H);
        const Spectrum ex_y = dft(py, W, H);
        Spectrum prod{W, H, std::vector<Complex>(ex_x.bins.size())};
        for (std::size_t i = 0; i < prod.bins.size(); ++i) {
            prod.bins[i] = std::conj(ex_x.bins[i]) * fx_.bins[i] + std::conj(ex_y.bins[i]) * fy_.bins[i];
        }
        const std::vector<double> corr = idft_real(prod);
        std::optional<Placement> best;
        for (int ty = 0; ty <= H - h; ++ty) {
            for (int tx = 0; tx <= W - w; ++tx) {
                double qn = norm_;
                if (opts_.windowed) {
                    qn = std::sqrt(std::max(window_energy(tx, ty, w, h), 0.0));
                    if (qn <= 1e-12 * norm_) continue;
                }
                const double v = std::clamp(corr[static_cast<std::size_t>(ty) * W + tx] / (qn * enorm), -1.0, 1.0);
                if (!best || v > best->score) best = Placement{v, tx, ty};
            }
        }
        return best;
    }

private:
    void build_integral() {
        const int W = q_.width(), H = q_.height();
        integral_.assign(static_cast<std::size_t>(W + 1) * (H + 1), 0.0);
        for (int y = 0; y < H; ++y) {
            double row = 0.0;
            for (int x = 0; x < W; ++x) {
                row += sq_[static_cast<std::size_t>(y) * W + x];
                integral_[static_cast<std::size_t>(y + 1) * (W + 1) + x + 1] =
                    integral_[static_cast<std::size_t>(y) * (W + 1) + x + 1] + row;
            }
        }
    }

    double window_energy(int x0, int y0, int w, int h) const {
        const int W1 = q_.width() + 1;
        auto I = [&](int x, int y) { return integral_[static_cast<std::size_t>(y) * W1 + x]; };
        return I(x0 + w, y0 + h) - I(x0, y0 + h) - I(x0 + w, y0) + I(x0, y0);
    }

    const GradientField& q_;
    NccOptions opts_;
    Spectrum fx_, fy_;
    std::vector<double> sq_;
    std::vector<double> integral_;
    double norm_ = 0.0;
};

void require_fit(const GradientField& query, const GradientField& exemplar) {
    if (exemplar.width() > query.width() || exemplar.height() > query.height()) {
        throw DimensionError("ncc_score: exemplar does not fit inside the query");
    }
    if (query.energy() == 0.0 || exemplar.energy() == 0.0) {
        throw DegenerateInputError("ncc_score: zero-norm gradients");
    }
}

// Strict "a is preferred over b" under the documented tie-break.
bool better(const Placement& a, const ExemplarEntry& ea, const Placement& b, const ExemplarEntry& eb) {
    if (a.score != b.score) return a.score > b.score;
    if (ea.manifest_index != eb.manifest_index) return ea.manifest_index < eb.manifest_index;
    if (std::abs(ea.rotation) != std::abs(eb.rotation)) return std::abs(ea.rotation) < std::abs(eb.rotation);
    return std::abs(ea.scale - 1.0) < std::abs(eb.scale - 1.0);
}

MatchResult reduce(const ExemplarDB& db, const std::vector<std::optional<Placement>>& scores) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i]) continue;
        if (!best || better(*scores[i], db.entries()[i], *scores[*best], db.entries()[*best])) best = i;
    }
    if (!best) throw DegenerateInputError("match_exemplar: no exemplar variant could be scored");
    const ExemplarEntry& e = db.entries()[*best];
    const Placement& p = *scores[*best];
    return {e.id, *best, p.score, p.tx, p.ty, e.scale, e.rotation};
}

}  // namespace

std::vector<double> VariantGrid::default_rotations() {
    std::vector<double> r;
    for (int d = -10; d <= 10; ++d) r.push_back(d);
    return r;
}

ExemplarEntry make_variant(const ExemplarSource& src, double scale, double degrees,
                           int manifest_index) {
    if (!(scale >= 0.5 && scale <= 2.0)) throw ValueError("exemplar scale must lie in [0.5, 2]");
    if (!(degrees >= -10.0 && degrees <= 10.0)) throw ValueError("exemplar rotation must lie in [-10, 10]");
    if (src.image.width() != src.mask.width() || src.image.height() != src.mask.height()) {
        throw DimensionError("exemplar image and mask sizes differ");
    }
    const GrayImage img = scale_rotate(src.image, scale, degrees);
    const GrayImage m = scale_rotate(src.mask.to_image(), scale, degrees);
    return {src.id, gradient(img), ContourMask::binarize(m, 0.5), scale, degrees, manifest_index};
}

ExemplarDB build_exemplar_db(std::span<const ExemplarSource> sources, const VariantGrid& grid) {
    struct Job {
        int source;
        double scale;
        double rotation;
    };
    std::vector<Job> jobs;
    for (int i = 0; i < static_cast<int>(sources.size()); ++i) {
        for (double s : grid.scales) {
            for (double r : grid.rotations) jobs.push_back({i, s, r});
        }
    }
    std::vector<ExemplarEntry> entries(jobs.size());
    kernels::parallel_for(static_cast<int>(jobs.size()), [&](int j) {
        const Job& job = jobs[static_cast<std::size_t>(j)];
        entries[static_cast<std::size_t>(j)] =
            make_variant(sources[static_cast<std::size_t>(job.source)], job.scale, job.rotation, job.source);
    });
    return ExemplarDB(std::move(entries));
}

std::vector<ExemplarSource> read_exemplar_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open manifest " + manifest.string());
    const auto base = manifest.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base / path;
    };
    std::vector<ExemplarSource> sources;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, '\t')) fields.push_back(f);
        if (fields.size() != 3) {
            throw FormatError(manifest.string() + ":" + std::to_string(lineno) +
                              ": expected image<TAB>mask<TAB>id");
        }
        GrayImage img = load_image(resolve(fields[0]));
        ContourMask mask = load_mask(resolve(fields[1]), img.width(), img.height());
        if (mask.width() != img.width() || mask.height() != img.height()) {
            throw DimensionError(manifest.string() + ":" + std::to_string(lineno) + ": mask/image size mismatch");
        }
        sources.push_back({fields[2], std::move(img), std::move(mask)});
    }
    return sources;
}

ExemplarDB build_exemplar_db(const std::filesystem::path& manifest, const VariantGrid& grid) {
    const auto sources = read_exemplar_manifest(manifest);
    return build_exemplar_db(sources, grid);
}

NccResult ncc_score(const GradientField& query, const GradientField& exemplar, const NccOptions& opts) {
    require_fit(query, exemplar);
    const QueryPlan plan(query, opts);
    const auto p = plan.score(exemplar);
    if (!p) throw DegenerateInputError("ncc_score: no placement with a defined score");
    return {p->score, p->tx, p->ty};
}

NccResult ncc_score_direct(const GradientField& query, const GradientField& exemplar,
                           const NccOptions& opts) {
    require_fit(query, exemplar);
    const int W = query.width(), H = query.height();
    const int w = exemplar.width(), h = exemplar.height();
    const double qn = std::sqrt(query.energy());
    const double en = std::sqrt(exemplar.energy());
    std::optional<NccResult> best;
    for (int ty = 0; ty <= H - h; ++ty) {
        for (int tx = 0; tx <= W - w; ++tx) {
            double num = 0.0, win = 0.0;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double qx = query.dx(x + tx, y + ty);
                    const double qy = query.dy(x + tx, y + ty);
                    num += exemplar.dx(x, y) * qx + exemplar.dy(x, y) * qy;
                    win += qx * qx + qy * qy;
                }
            }
            const double denom = (opts.windowed ? std::sqrt(win) : qn) * en;
            if (opts.windowed && std::sqrt(win) <= 1e-12 * qn) continue;
            const double v = std::clamp(num / denom, -1.0, 1.0);
            if (!best || v > best->score) best = NccResult{v, tx, ty};
        }
    }
    if (!best) throw DegenerateInputError("ncc_score: no placement with a defined score");
    return *best;
}

MatchResult match_exemplar(const GrayImage& blurred, const ExemplarDB& db, const NccOptions& opts) {
    if (db.empty()) throw ValueError("match_exemplar: empty exemplar database");
    const GradientField q = gradient(blurred);
    const QueryPlan plan(q, opts);
    std::vector<std::optional<Placement>> scores(db.size());
    kernels::parallel_for(static_cast<int>(db.size()), [&](int i) {
        scores[static_cast<std::size_t>(i)] = plan.score(db.entries()[static_cast<std::size_t>(i)].gradients);
    });
    return reduce(db, scores);
}

MatchResult match_exemplar_serial(const GrayImage& blurred, const ExemplarDB& db,
                                  const NccOptions& opts) {
    if (db.empty()) throw ValueError("match_exemplar: empty exemplar database");
    const GradientField q = gradient(blurred);
    const QueryPlan plan(q, opts);
    std::vector<std::optional<Placement>> scores(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) scores[i] = plan.score(db.entries()[i].gradients);
    return reduce(db, scores);
}

GradientField predicted_edges(const MatchResult& result, const ExemplarDB& db, int query_width,
                              int query_height, EdgeSource source,
                              const GradientField* query_gradients) {
    if (result.entry_index >= db.size()) throw ValueError("predicted_edges: match does not reference the DB");
    const ExemplarEntry& e = db.entries()[result.entry_index];
    if (result.shift_x < 0 || result.shift_y < 0 || result.shift_x + e.gradients.width() > query_width ||
        result.shift_y + e.gradients.height() > query_height) {
        throw DimensionError("predicted_edges: shifted exemplar leaves the query frame");
    }
    const std::size_t n = static_cast<std::size_t>(query_width) * query_height;
    std::vector<double> gx(n, 0.0), gy(n, 0.0);
    if (source == EdgeSource::exemplar) {
        const GradientField gated = gate(e.gradients, e.mask);
        for (int y = 0; y < gated.height(); ++y) {
            for (int x = 0; x < gated.width(); ++x) {
                const std::size_t i = static_cast<std::size_t>(y + result.shift_y) * query_width + x + result.shift_x;
                gx[i] = gated.dx(x, y);
                gy[i] = gated.dy(x, y);
            }
        }
    } else {
        if (!query_gradients || query_gradients->width() != query_width || query_gradients->height() != query_height) {
            throw ValueError("predicted_edges: from-input mode needs the query gradients");
        }
        for (int y = 0; y < e.mask.height(); ++y) {
            for (int x = 0; x < e.mask.width(); ++x) {
                if (!e.mask(x, y)) continue;
                const int qx = x + result.shift_x;
                const int qy = y + result.shift_y;
                const std::size_t i = static_cast<std::size_t>(qy) * query_width + qx;
                gx[i] = query_gradients->dx(qx, qy);
                gy[i] = query_gradients->dy(qx, qy);
            }
        }
    }
    return {GrayImage(query_width, query_height, std::move(gx)), GrayImage(query_width, query_height, std::move(gy))};
}

}  // namespace exdeblur
