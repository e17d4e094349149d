// Command-line front end: deblur, kernel synthesis, blurring, exemplar
// database inspection, benchmarking and edge visualization.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "exdeblur/error.hpp"
#include "exdeblur/fixtures.hpp"
#include "exdeblur/image_io.hpp"
#include "exdeblur/pipeline.hpp"
#include "exdeblur/synthesis.hpp"

namespace fs = std::filesystem;
using namespace exdeblur;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat `key = value` file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

// Splices config entries in front of the subcommand's own flags so that
// flags given on the command line win (options keep the last value).
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const CLI::App& app) {
    std::optional<fs::path> config;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!config) return rest;
    std::size_t sub = 0;
    while (sub < rest.size() && rest[sub].rfind("-", 0) == 0) ++sub;
    if (sub >= rest.size()) throw UsageError("--config given without a subcommand");
    const CLI::App* cmd = nullptr;
    for (const auto* s : app.get_subcommands([](const CLI::App*) { return true; }))
        if (s->get_name() == rest[sub]) cmd = s;
    if (cmd == nullptr) return rest;

    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(*config)) {
        try {
            (void)cmd->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw UsageError("unknown config key '" + key + "' for " + cmd->get_name());
        }
        injected.push_back("--" + key + "=" + value);
    }
    std::vector<std::string> out(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(sub) + 1);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(sub) + 1, rest.end());
    return out;
}

struct DeblurFlags {
    std::string mode = "no-edges";
    std::string manifest;
    std::string weights;
    std::string mask;
    std::string sharp;
    std::string edge_source = "exemplar";
    bool windowed_ncc = false;
    bool refine_mask = false;
    bool no_taper = false;
    bool early_stop = false;
    double early_stop_tol = 1e-4;
    PipelineConfig cfg;
};

void add_pipeline_flags(CLI::App* cmd, DeblurFlags& f) {
    cmd->add_option("--mode", f.mode, "Edge mode: exemplar, cnn, oracle-edges, no-edges")
        ->check(CLI::IsMember({"exemplar", "cnn", "oracle-edges", "no-edges"}));
    cmd->add_option("--manifest", f.manifest, "Exemplar manifest (image, mask, id TSV)");
    cmd->add_option("--weights", f.weights, "EDN1 weight file for cnn mode");
    cmd->add_option("--mask", f.mask, "Contour mask for oracle-edges mode");
    cmd->add_option("--sharp", f.sharp, "Sharp image whose gradients the oracle mask gates");
    cmd->add_option("--edge-source", f.edge_source, "Exemplar edge source: exemplar or input")
        ->check(CLI::IsMember({"exemplar", "input"}));
    cmd->add_flag("--windowed-ncc", f.windowed_ncc, "Normalize NCC by the windowed query norm");
    cmd->add_flag("--refine-mask", f.refine_mask, "Refine oracle masks with guided filter and Otsu");
    cmd->add_flag("--no-taper", f.no_taper, "Skip edge tapering before estimation");

    auto& d = f.cfg.deblur;
    auto& r = f.cfg.restore;
    cmd->add_option("--kernel-size", d.kernel_size, "Odd kernel support size");
    cmd->add_option("--lambda", d.lambda, "L0 weight on latent gradients");
    cmd->add_option("--theta", d.theta, "Weight pulling latent gradients toward edges");
    cmd->add_option("--gamma", d.gamma, "Kernel ridge weight");
    cmd->add_option("--n-outer", d.n_outer, "Outer iterations");
    cmd->add_option("--beta-max", d.beta_max, "Largest splitting weight");
    cmd->add_option("--cg-tol", d.cg_tol, "Kernel CG tolerance");
    cmd->add_option("--cg-max-iter", d.cg_max_iter, "Kernel CG iteration cap");
    cmd->add_option("--prune", d.prune_fraction, "Drop kernel entries below this fraction of the max");
    cmd->add_flag("--early-stop", f.early_stop, "Stop once the kernel L1 change is below --early-stop-tol");
    cmd->add_option("--early-stop-tol", f.early_stop_tol, "Kernel change threshold for --early-stop");
    cmd->add_option("--mu", r.mu, "Restoration prior weight");
    cmd->add_option("--hl-exponent", r.hl_exponent, "Hyper-Laplacian exponent");
    cmd->add_option("--irls-iters", r.irls_iters, "Restoration IRLS rounds");
    cmd->add_option("--tau-pred", f.cfg.tau_pred, "Threshold on CNN-predicted gradients");
    cmd->add_option("--guided-radius", f.cfg.guided.radius, "Guided filter radius");
    cmd->add_option("--guided-eps", f.cfg.guided.eps, "Guided filter regularizer");
}

// Loaded mode inputs; owns what EdgeInputs points at.
struct ModeResources {
    std::optional<ExemplarDB> db;
    std::optional<NetworkWeights> weights;
    std::optional<ContourMask> mask;
    std::optional<GrayImage> sharp;

    EdgeInputs view() const {
        EdgeInputs in;
        if (db) in.db = &*db;
        if (weights) in.weights = &*weights;
        if (mask) in.mask = &*mask;
        if (sharp) in.sharp = &*sharp;
        return in;
    }
};

void finalize_flags(DeblurFlags& f, bool need_mask) {
    f.cfg.mode = parse_edge_mode(f.mode);
    f.cfg.ncc.windowed = f.windowed_ncc;
    f.cfg.refine_mask = f.refine_mask;
    f.cfg.edge_taper = !f.no_taper;
    f.cfg.deblur.early_stop = f.early_stop ? f.early_stop_tol : 0.0;
    f.cfg.edge_source = f.edge_source == "input" ? EdgeSource::from_input : EdgeSource::exemplar;
    switch (f.cfg.mode) {
        case EdgeMode::exemplar:
            if (f.manifest.empty()) throw UsageError("--mode exemplar requires --manifest");
            break;
        case EdgeMode::cnn:
            if (f.weights.empty()) throw UsageError("--mode cnn requires --weights");
            break;
        case EdgeMode::oracle_edges:
            if (need_mask && f.mask.empty()) throw UsageError("--mode oracle-edges requires --mask");
            break;
        case EdgeMode::no_edges:
            break;
    }
    try {
        f.cfg.deblur.validate();
        f.cfg.restore.validate();
    } catch (const ValueError& e) {
        throw UsageError(e.what());
    }
}

ModeResources load_resources(const DeblurFlags& f, int width, int height) {
    ModeResources res;
    switch (f.cfg.mode) {
        case EdgeMode::exemplar: res.db = build_exemplar_db(fs::path(f.manifest)); break;
        case EdgeMode::cnn: res.weights = load_weights(f.weights); break;
        case EdgeMode::oracle_edges:
            if (!f.mask.empty()) res.mask = load_mask(f.mask, width, height);
            if (!f.sharp.empty()) res.sharp = load_image(f.sharp);
            break;
        case EdgeMode::no_edges: break;
    }
    return res;
}

void write_trace(const std::vector<IterationTrace>& trace, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "iteration,kernel_residual,objective\n";
    char buf[128];
    for (const auto& t : trace) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", t.iteration, t.kernel_residual, t.objective);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path.string());
}

GrayImage visualize_edges(const GradientField& g) {
    return clip(poisson_reconstruct(g), 0.0, 1.0);
}

fs::path default_kernel_path(const fs::path& output) {
    fs::path p = output;
    p.replace_extension(".kern");
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exemplar-guided blind face deblurring", "exdeblur"};
    app.footer("Global option --config FILE reads flat `key = value` defaults for the chosen\n"
               "subcommand (keys are long option names without dashes); command-line flags win.");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", "exdeblur 1.0");

    // deblur
    DeblurFlags deblur;
    std::string db_in, db_out, db_kernel, db_trace, db_edges, db_latent;
    auto* cmd_deblur = app.add_subcommand("deblur", "Estimate the blur kernel and restore an image");
    cmd_deblur->add_option("-i,--input", db_in, "Blurred image (PNG or PGM)")->required();
    cmd_deblur->add_option("-o,--output", db_out, "Restored image")->required();
    cmd_deblur->add_option("--kernel-out", db_kernel, "Kernel file (default: output with .kern)");
    cmd_deblur->add_option("--trace", db_trace, "Per-iteration CSV");
    cmd_deblur->add_option("--edges-out", db_edges, "Poisson visualization of the predicted edges");
    cmd_deblur->add_option("--latent-out", db_latent, "Intermediate latent image");
    add_pipeline_flags(cmd_deblur, deblur);

    // synth-kernel
    TrajectoryParams traj;
    int synth_size = 15;
    std::string synth_out, synth_pgm;
    auto* cmd_synth = app.add_subcommand("synth-kernel", "Generate a camera-shake kernel");
    cmd_synth->add_option("--seed", traj.seed, "Random seed")->required();
    cmd_synth->add_option("--size", synth_size, "Odd support size in [13, 75]");
    cmd_synth->add_option("--samples", traj.num_samples, "Trajectory samples");
    cmd_synth->add_option("--impulse", traj.impulse, "Velocity impulse strength");
    cmd_synth->add_option("--anxiety", traj.anxiety, "Jerk magnitude");
    cmd_synth->add_option("--exposure", traj.exposure_fraction, "Integrated fraction of the path");
    cmd_synth->add_option("-o,--output", synth_out, "Kernel file")->required();
    cmd_synth->add_option("--pgm", synth_pgm, "Also write a PGM visualization");

    // blur
    std::string blur_in, blur_kernel, blur_out;
    double blur_noise = 0.0;
    std::uint64_t blur_seed = 0;
    auto* cmd_blur = app.add_subcommand("blur", "Blur an image with a kernel and add noise");
    cmd_blur->add_option("-i,--input", blur_in, "Sharp image")->required();
    cmd_blur->add_option("-k,--kernel", blur_kernel, "Kernel file")->required();
    cmd_blur->add_option("--noise", blur_noise, "Gaussian noise std as a fraction of range");
    cmd_blur->add_option("--seed", blur_seed, "Noise seed");
    cmd_blur->add_option("-o,--output", blur_out, "Blurred image")->required();

    // build-exemplars
    std::string ex_manifest, ex_out;
    auto* cmd_build = app.add_subcommand("build-exemplars", "Build the exemplar variant database");
    cmd_build->add_option("--manifest", ex_manifest, "Exemplar manifest")->required();
    cmd_build->add_option("-o,--output", ex_out, "Summary TSV (default: stdout)");

    // bench
    DeblurFlags bench;
    std::string bench_dataset, bench_records = "records.csv", bench_curve = "curve.csv";
    std::uint64_t bench_seed = 0;
    auto* cmd_bench = app.add_subcommand("bench", "Run a blur/deblur benchmark over a dataset manifest");
    cmd_bench->add_option("--dataset", bench_dataset, "TSV of sharp, kernel, noise[, mask]")->required();
    cmd_bench->add_option("--records", bench_records, "Per-case CSV");
    cmd_bench->add_option("--curve", bench_curve, "Cumulative error-ratio curve CSV");
    cmd_bench->add_option("--seed", bench_seed, "Base noise seed");
    add_pipeline_flags(cmd_bench, bench);

    // predict-edges
    DeblurFlags pred;
    std::string pred_in, pred_out;
    auto* cmd_pred = app.add_subcommand("predict-edges", "Write a Poisson visualization of the predicted edges");
    cmd_pred->add_option("-i,--input", pred_in, "Blurred image")->required();
    cmd_pred->add_option("-o,--output", pred_out, "Visualization image")->required();
    add_pipeline_flags(cmd_pred, pred);

    // synth-face
    int face_id = 0, face_var = 0, face_w = 128, face_h = 128;
    double face_band = 2.0;
    std::string face_out, face_mask_out;
    auto* cmd_face = app.add_subcommand("synth-face", "Render a synthetic face fixture and its contour mask");
    cmd_face->add_option("--identity", face_id, "Identity index");
    cmd_face->add_option("--variation", face_var, "Variation index");
    cmd_face->add_option("--width", face_w, "Width");
    cmd_face->add_option("--height", face_h, "Height");
    cmd_face->add_option("--band", face_band, "Mask contour half-width in pixels");
    cmd_face->add_option("-o,--output", face_out, "Face image")->required();
    cmd_face->add_option("--mask-out", face_mask_out, "Contour mask image");

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    try {
        args = expand_config(args, app);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (cmd_deblur->parsed()) {
            finalize_flags(deblur, true);
            const bool color = is_color_file(db_in);
            const GrayImage blurred = load_image(db_in);
            const ModeResources res = load_resources(deblur, blurred.width(), blurred.height());
            DeblurOutcome out = run_deblur(blurred, res.view(), deblur.cfg, !color);
            if (color) {
                RgbImage rgb = load_rgb(db_in);
                rgb.r = restore_image(rgb.r, out.kernel, deblur.cfg);
                rgb.g = restore_image(rgb.g, out.kernel, deblur.cfg);
                rgb.b = restore_image(rgb.b, out.kernel, deblur.cfg);
                save_rgb(rgb, db_out);
            } else {
                save_image(out.restored, db_out);
            }
            write_kernel(out.kernel, db_kernel.empty() ? default_kernel_path(db_out) : fs::path(db_kernel));
            if (!db_trace.empty()) write_trace(out.trace, db_trace);
            if (!db_edges.empty()) save_image(visualize_edges(out.initial_edges), db_edges);
            if (!db_latent.empty()) save_image(clip(out.latent, 0.0, 1.0), db_latent);
            if (out.match)
                std::cerr << "matched " << out.match->exemplar_id << " score " << out.match->score
                          << " scale " << out.match->scale << " rotation " << out.match->rotation
                          << " shift " << out.match->shift_x << "," << out.match->shift_y << "\n";
        } else if (cmd_synth->parsed()) {
            if (synth_size % 2 == 0 || synth_size < kMinSynthKernelSize || synth_size > kMaxSynthKernelSize)
                throw UsageError("--size must be odd and within [13, 75]");
            const BlurKernel k = synth_kernel(traj, synth_size);
            write_kernel(k, synth_out);
            if (!synth_pgm.empty()) export_kernel_pgm(k, synth_pgm);
        } else if (cmd_blur->parsed()) {
            if (blur_noise < 0.0 || blur_noise > 0.2) throw UsageError("--noise must be within [0, 0.2]");
            const GrayImage img = load_image(blur_in);
            save_image(apply_blur(img, read_kernel(blur_kernel), blur_noise, blur_seed), blur_out);
        } else if (cmd_build->parsed()) {
            const ExemplarDB db = build_exemplar_db(fs::path(ex_manifest));
            std::ostringstream ss;
            ss << "entry\tid\tmanifest_index\tscale\trotation\twidth\theight\tmask_pixels\n";
            for (std::size_t i = 0; i < db.size(); ++i) {
                const auto& e = db.entries()[i];
                ss << i << '\t' << e.id << '\t' << e.manifest_index << '\t' << e.scale << '\t' << e.rotation
                   << '\t' << e.gradients.width() << '\t' << e.gradients.height() << '\t' << e.mask.count()
                   << '\n';
            }
            if (ex_out.empty()) {
                std::cout << ss.str();
            } else {
                std::ofstream out(ex_out);
                if (!(out << ss.str())) throw IoError("cannot write " + ex_out);
            }
        } else if (cmd_bench->parsed()) {
            finalize_flags(bench, false);
            const auto cases = read_bench_manifest(bench_dataset);
            const ModeResources res = load_resources(bench, 0, 0);
            const auto records = run_bench(cases, res.view(), bench.cfg, bench_seed);
            write_bench_csv(records, bench_records);
            write_curve_csv(cumulative_error_curve(records), bench_curve);
            std::size_t failed = 0;
            for (const auto& r : records) failed += r.failed ? 1 : 0;
            std::cerr << records.size() << " cases, " << failed << " failed\n";
        } else if (cmd_pred->parsed()) {
            finalize_flags(pred, true);
            const GrayImage blurred = load_image(pred_in);
            const ModeResources res = load_resources(pred, blurred.width(), blurred.height());
            save_image(visualize_edges(initial_edges(blurred, res.view(), pred.cfg)), pred_out);
        } else if (cmd_face->parsed()) {
            const auto p = fixtures::face_identity(face_id, face_var);
            save_image(fixtures::render_face(p, face_w, face_h), face_out);
            if (!face_mask_out.empty()) save_mask(fixtures::face_mask(p, face_w, face_h, face_band), face_mask_out);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
