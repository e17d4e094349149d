#include "exdeblur/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "exdeblur/error.hpp"
#include "exdeblur/image_io.hpp"
#include "exdeblur/kernel.hpp"
#include "exdeblur/kernels.hpp"
#include "exdeblur/synthesis.hpp"

namespace exdeblur {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Extends each line by 2*pad samples that ramp from its last value to its
// first with a raised cosine; the right pad takes the first half of the
// ramp and the left pad the second half.
std::vector<double> taper_line(const std::vector<double>& line, int pad) {
    const int n = static_cast<int>(line.size());
    std::vector<double> out(static_cast<std::size_t>(n + 2 * pad));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i + pad)] = line[static_cast<std::size_t>(i)];
    for (int t = 0; t < 2 * pad; ++t) {
        const double a = 0.5 - 0.5 * std::cos(kPi * (t + 1) / (2 * pad + 1));
        const double v = (1 - a) * line.back() + a * line.front();
        const int pos = t < pad ? n + pad + t : t - pad;
        out[static_cast<std::size_t>(pos)] = v;
    }
    return out;
}

std::string stem_id(const std::filesystem::path& p) { return p.stem().string(); }

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

EdgeMode parse_edge_mode(const std::string& name) {
    if (name == "exemplar") return EdgeMode::exemplar;
    if (name == "cnn") return EdgeMode::cnn;
    if (name == "oracle-edges") return EdgeMode::oracle_edges;
    if (name == "no-edges") return EdgeMode::no_edges;
    throw ValueError("unknown mode '" + name + "' (exemplar, cnn, oracle-edges, no-edges)");
}

std::string to_string(EdgeMode mode) {
    switch (mode) {
        case EdgeMode::exemplar: return "exemplar";
        case EdgeMode::cnn: return "cnn";
        case EdgeMode::oracle_edges: return "oracle-edges";
        case EdgeMode::no_edges: return "no-edges";
    }
    return "unknown";
}

GradientField initial_edges(const GrayImage& blurred, const EdgeInputs& inputs,
                            const PipelineConfig& cfg, MatchResult* match) {
    switch (cfg.mode) {
        case EdgeMode::exemplar: {
            if (!inputs.db) throw ValueError("exemplar mode needs an exemplar database");
            const MatchResult m = match_exemplar(blurred, *inputs.db, cfg.ncc);
            if (match) *match = m;
            const GradientField q = gradient(blurred);
            return predicted_edges(m, *inputs.db, blurred.width(), blurred.height(), cfg.edge_source, &q);
        }
        case EdgeMode::cnn:
            if (!inputs.weights) throw ValueError("cnn mode needs network weights");
            return predict_structure(blurred, *inputs.weights, cfg.tau_pred);
        case EdgeMode::oracle_edges: {
            if (!inputs.mask) throw ValueError("oracle-edges mode needs a mask");
            const GrayImage& source = inputs.sharp ? *inputs.sharp : blurred;
            if (!source.same_shape(blurred)) throw DimensionError("sharp image size differs from the input");
            if (cfg.refine_mask) {
                return extract_salient_edges(source, *inputs.mask, cfg.guided.radius, cfg.guided.eps).first;
            }
            return gate(gradient(source), *inputs.mask);
        }
        case EdgeMode::no_edges: {
            const GrayImage seed = solve_latent(blurred, BlurKernel::delta(1),
                                                GradientField::zeros(blurred.width(), blurred.height()), cfg.deblur);
            return gradient(seed);
        }
    }
    throw ValueError("unknown mode");
}

GrayImage edge_taper_pad(const GrayImage& img, int pad) {
    if (pad <= 0) return img;
    const int w = img.width();
    const int h = img.height();
    const int pw = w + 2 * pad;
    const int ph = h + 2 * pad;
    std::vector<double> rows(static_cast<std::size_t>(pw) * h);
    for (int y = 0; y < h; ++y) {
        std::vector<double> line(static_cast<std::size_t>(w));
        for (int x = 0; x < w; ++x) line[static_cast<std::size_t>(x)] = img(x, y);
        const auto ext = taper_line(line, pad);
        std::copy(ext.begin(), ext.end(), rows.begin() + static_cast<std::ptrdiff_t>(y) * pw);
    }
    std::vector<double> out(static_cast<std::size_t>(pw) * ph);
    for (int x = 0; x < pw; ++x) {
        std::vector<double> col(static_cast<std::size_t>(h));
        for (int y = 0; y < h; ++y) col[static_cast<std::size_t>(y)] = rows[static_cast<std::size_t>(y) * pw + x];
        const auto ext = taper_line(col, pad);
        for (int y = 0; y < ph; ++y) out[static_cast<std::size_t>(y) * pw + x] = ext[static_cast<std::size_t>(y)];
    }
    return {pw, ph, std::move(out)};
}

GradientField zero_pad(const GradientField& g, int pad) {
    if (pad <= 0) return g;
    const int pw = g.width() + 2 * pad;
    const int ph = g.height() + 2 * pad;
    std::vector<double> gx(static_cast<std::size_t>(pw) * ph, 0.0), gy(gx.size(), 0.0);
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            gx[static_cast<std::size_t>(y + pad) * pw + x + pad] = g.dx(x, y);
            gy[static_cast<std::size_t>(y + pad) * pw + x + pad] = g.dy(x, y);
        }
    }
    return {GrayImage(pw, ph, std::move(gx)), GrayImage(pw, ph, std::move(gy))};
}

DeblurOutcome run_deblur(const GrayImage& blurred, const EdgeInputs& inputs,
                         const PipelineConfig& cfg, bool restore) {
    cfg.deblur.validate();
    DeblurOutcome out;
    MatchResult match;
    out.initial_edges = initial_edges(blurred, inputs, cfg, &match);
    if (cfg.mode == EdgeMode::exemplar) out.match = match;

    const int pad = cfg.edge_taper ? (cfg.deblur.kernel_size + 1) / 2 : 0;
    const GrayImage work = edge_taper_pad(blurred, pad);
    EstimateResult est = estimate_kernel(work, zero_pad(out.initial_edges, pad), cfg.deblur);
    out.kernel = est.kernel;
    out.trace = std::move(est.trace);
    out.latent = pad > 0 ? crop(est.latent, pad, pad, blurred.width(), blurred.height()) : est.latent;
    if (restore) out.restored = restore_image(blurred, out.kernel, cfg);
    return out;
}

GrayImage restore_image(const GrayImage& blurred, const BlurKernel& k, const PipelineConfig& cfg) {
    const int pad = cfg.edge_taper ? (k.size() + 1) / 2 : 0;
    const GrayImage r = deconv_hyperlaplacian(edge_taper_pad(blurred, pad), k, cfg.restore);
    return pad > 0 ? crop(r, pad, pad, blurred.width(), blurred.height()) : r;
}

std::vector<BenchCase> read_bench_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset manifest " + path.string());
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path q(p);
        return q.is_absolute() ? q : base / q;
    };
    std::vector<BenchCase> cases;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, '\t')) f.push_back(tok);
        if (f.size() < 3 || f.size() > 4) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": expected sharp<TAB>kernel<TAB>noise[<TAB>mask]");
        }
        BenchCase c;
        c.sharp_path = resolve(f[0]);
        c.kernel_path = resolve(f[1]);
        try {
            c.noise_level = std::stod(f[2]);
        } catch (const std::exception&) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad noise level");
        }
        if (f.size() == 4) c.mask_path = resolve(f[3]);
        cases.push_back(std::move(c));
    }
    return cases;
}

std::vector<BenchRecord> run_bench(const std::vector<BenchCase>& cases, const EdgeInputs& inputs,
                                   const PipelineConfig& cfg, std::uint64_t seed) {
    std::vector<BenchRecord> records(cases.size());
    kernels::parallel_for(static_cast<int>(cases.size()), [&](int i) {
        const BenchCase& c = cases[static_cast<std::size_t>(i)];
        BenchRecord& rec = records[static_cast<std::size_t>(i)];
        rec.image_id = stem_id(c.sharp_path);
        rec.kernel_id = stem_id(c.kernel_path);
        rec.noise_level = c.noise_level;
        try {
            const GrayImage sharp = load_image(c.sharp_path);
            const BlurKernel truth = read_kernel(c.kernel_path);
            const GrayImage blurred = apply_blur(sharp, truth, c.noise_level, seed + static_cast<std::uint64_t>(i));
            EdgeInputs in = inputs;
            std::optional<ContourMask> mask;
            if (c.mask_path) {
                mask = load_mask(*c.mask_path, sharp.width(), sharp.height());
                in.mask = &*mask;
            }
            in.sharp = &sharp;
            PipelineConfig local = cfg;
            local.deblur.kernel_size = std::max(cfg.deblur.kernel_size, truth.size());
            const DeblurOutcome out = run_deblur(blurred, in, local);
            const GrayImage reference = restore_image(blurred, truth, local);
            rec.kernel_similarity = kernel_similarity(out.kernel, truth);
            rec.error_ratio = error_ratio_with_reference(out.restored, sharp, reference, truth.size());
            rec.psnr_db = psnr(out.restored, sharp);
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.message = csv_safe(e.what());
        }
    });
    std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        if (a.kernel_id != b.kernel_id) return a.kernel_id < b.kernel_id;
        return a.noise_level < b.noise_level;
    });
    return records;
}

}  // namespace exdeblur
