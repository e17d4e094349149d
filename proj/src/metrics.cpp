#include "exdeblur/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "exdeblur/error.hpp"

namespace exdeblur {

double kernel_similarity(const BlurKernel& estimate, const BlurKernel& truth) {
    const int n = std::max(estimate.size(), truth.size());
    const BlurKernel a = estimate.padded(n);
    const BlurKernel b = truth.padded(n);
    double na = 0.0, nb = 0.0;
    for (double v : a.data()) na += v * v;
    for (double v : b.data()) nb += v * v;
    if (na == 0.0 || nb == 0.0) throw DegenerateInputError("kernel_similarity: zero kernel");
    const double norm = std::sqrt(na) * std::sqrt(nb);
    double best = -std::numeric_limits<double>::infinity();
    for (int ty = -(n - 1); ty <= n - 1; ++ty) {
        for (int tx = -(n - 1); tx <= n - 1; ++tx) {
            double s = 0.0;
            const int y0 = std::max(0, -ty), y1 = std::min(n, n - ty);
            const int x0 = std::max(0, -tx), x1 = std::min(n, n - tx);
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) s += a(x, y) * b(x + tx, y + ty);
            }
            best = std::max(best, s);
        }
    }
    return best / norm;
}

double error_ratio_with_reference(const GrayImage& estimate, const GrayImage& ground_truth,
                                  const GrayImage& reference, int kernel_size) {
    if (!estimate.same_shape(ground_truth) || !reference.same_shape(ground_truth)) {
        throw DimensionError("error_ratio: image sizes differ");
    }
    const int border = (kernel_size + 1) / 2;
    const int w = ground_truth.width() - 2 * border;
    const int h = ground_truth.height() - 2 * border;
    if (w <= 0 || h <= 0) throw DimensionError("error_ratio: image smaller than the crop border");
    const GrayImage gt = crop(ground_truth, border, border, w, h);
    const double num = squared_distance(crop(estimate, border, border, w, h), gt);
    const double den = squared_distance(crop(reference, border, border, w, h), gt);
    if (den == 0.0) throw DegenerateInputError("error_ratio: true-kernel restoration is exact");
    return num / den;
}

double error_ratio(const GrayImage& estimate, const GrayImage& ground_truth,
                   const GrayImage& blurred, const BlurKernel& true_kernel,
                   const RestoreConfig& cfg) {
    if (!blurred.same_shape(ground_truth)) throw DimensionError("error_ratio: image sizes differ");
    const GrayImage reference = deconv_hyperlaplacian(blurred, true_kernel, cfg);
    return error_ratio_with_reference(estimate, ground_truth, reference, true_kernel.size());
}

double psnr(const GrayImage& a, const GrayImage& b) {
    const double mse = squared_distance(a, b) / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

ErrorCurve cumulative_error_curve(const std::vector<BenchRecord>& records) {
    if (records.empty()) throw ValueError("cumulative_error_curve: no records");
    ErrorCurve curve;
    for (int i = 0; i <= 40; ++i) {
        const double r = (10 + i) / 10.0;
        std::size_t hits = 0;
        for (const auto& rec : records) {
            if (!rec.failed && rec.error_ratio <= r) ++hits;
        }
        curve.thresholds.push_back(r);
        curve.fractions.push_back(records.empty() ? 0.0
                                                  : static_cast<double>(hits) / static_cast<double>(records.size()));
    }
    return curve;
}

void write_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "image_id,kernel_id,noise_level,kernel_similarity,error_ratio,psnr_db,status\n";
    out.precision(10);
    for (const auto& r : records) {
        out << r.image_id << ',' << r.kernel_id << ',' << r.noise_level << ',';
        if (r.failed) {
            std::string msg = r.message;
            for (char& c : msg) {
                if (c == ',' || c == '\n' || c == '\r') c = ' ';
            }
            out << ",,,failed: " << msg << '\n';
        } else {
            out << r.kernel_similarity << ',' << r.error_ratio << ',';
            if (std::isinf(r.psnr_db)) {
                out << "inf";
            } else {
                out << r.psnr_db;
            }
            out << ",ok\n";
        }
    }
}

void write_curve_csv(const ErrorCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "threshold,fraction\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        out << curve.thresholds[i] << ',' << curve.fractions[i] << '\n';
    }
}

}  // namespace exdeblur
