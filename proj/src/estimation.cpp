#include "exdeblur/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "exdeblur/convolve.hpp"
#include "exdeblur/error.hpp"
#include "exdeblur/fft.hpp"

namespace exdeblur {

namespace {

constexpr double kDenominatorFloor = 1e-12;
constexpr double kIrlsEpsilon = 1e-4;
constexpr int kIrlsRounds = 8;

void require_finite(std::span<const double> v, const char* where) {
    for (double x : v) {
        if (!std::isfinite(x)) throw SolverDivergenceError(std::string(where) + ": non-finite iterate");
    }
}

void require_same_size(const GrayImage& img, const GradientField& g, const char* where) {
    if (img.width() != g.width() || img.height() != g.height()) {
        throw DimensionError(std::string(where) + ": gradient field size differs from the image");
    }
}

// Fourier-domain pieces of the latent update that do not depend on beta.
struct LatentSystem {
    Spectrum data_term;   // conj(F k) F B
    Spectrum guide_term;  // conj(F dx) F Sx + conj(F dy) F Sy
    std::vector<double> kernel_power;  // |F k|^2
    std::vector<double> grad_power;    // |F dx|^2 + |F dy|^2
    Spectrum fdx, fdy;

    LatentSystem(const GrayImage& b, const BlurKernel& k, const GradientField& s) {
        const int w = b.width();
        const int h = b.height();
        if (k.size() > w || k.size() > h) throw DimensionError("kernel larger than image");
        const Spectrum fk = filter_otf(k.data(), k.size(), k.size(), w, h);
        fdx = dx_otf(w, h);
        fdy = dy_otf(w, h);
        data_term = multiply(fk, dft(b), true);
        const Spectrum sx = dft(s.dx);
        const Spectrum sy = dft(s.dy);
        guide_term = multiply(fdx, sx, true);
        const Spectrum gy = multiply(fdy, sy, true);
        for (std::size_t i = 0; i < guide_term.bins.size(); ++i) guide_term.bins[i] += gy.bins[i];
        kernel_power.resize(fk.bins.size());
        grad_power.resize(fk.bins.size());
        for (std::size_t i = 0; i < fk.bins.size(); ++i) {
            kernel_power[i] = std::norm(fk.bins[i]);
            grad_power[i] = std::norm(fdx.bins[i]) + std::norm(fdy.bins[i]);
        }
    }

    GrayImage solve(const GradientField& wfield, double beta, double theta) const {
        const Spectrum wx = dft(wfield.dx);
        const Spectrum wy = dft(wfield.dy);
        Spectrum out{data_term.width, data_term.height, std::vector<Complex>(data_term.bins.size())};
        for (std::size_t i = 0; i < out.bins.size(); ++i) {
            const Complex num = data_term.bins[i] +
                                beta * (std::conj(fdx.bins[i]) * wx.bins[i] + std::conj(fdy.bins[i]) * wy.bins[i]) +
                                theta * guide_term.bins[i];
            const double den = std::max(kernel_power[i] + (beta + theta) * grad_power[i], kDenominatorFloor);
            out.bins[i] = num / den;
        }
        std::vector<double> v = idft_real(out);
        require_finite(v, "solve_latent");
        return {out.width, out.height, std::move(v)};
    }
};

// Normal-equation operator of the kernel least-squares problem on a
// size x size support embedded in the image grid.
class KernelSystem {
public:
    KernelSystem(const GradientField& s, const GradientField& b, int size)
        : w_(s.width()), h_(s.height()), size_(size) {
        if (s.width() != b.width() || s.height() != b.height()) {
            throw DimensionError("kernel solve: gradient fields differ in size");
        }
        if (size > w_ || size > h_) throw DimensionError("kernel support exceeds the image");
        if (size <= 0 || size % 2 == 0) throw ValueError("kernel size must be odd and positive");
        if (s.is_zero()) throw DegenerateInputError("kernel solve: guidance edges are all zero");
        fsx_ = dft(s.dx);
        fsy_ = dft(s.dy);
        const Spectrum fbx = dft(b.dx);
        const Spectrum fby = dft(b.dy);
        power_.resize(fsx_.bins.size());
        Spectrum corr{w_, h_, std::vector<Complex>(fsx_.bins.size())};
        for (std::size_t i = 0; i < power_.size(); ++i) {
            power_[i] = std::norm(fsx_.bins[i]) + std::norm(fsy_.bins[i]);
            corr.bins[i] = std::conj(fsx_.bins[i]) * fbx.bins[i] + std::conj(fsy_.bins[i]) * fby.bins[i];
        }
        rhs_ = extract(idft_real(corr));
        bx_ = std::vector<double>(b.dx.data().begin(), b.dx.data().end());
        by_ = std::vector<double>(b.dy.data().begin(), b.dy.data().end());
    }

    int size() const noexcept { return size_; }
    const std::vector<double>& rhs() const noexcept { return rhs_; }

    // H^T H k
    std::vector<double> apply(const std::vector<double>& k) const {
        const Spectrum fk = dft(embed(k), w_, h_);
        Spectrum prod{w_, h_, std::vector<Complex>(fk.bins.size())};
        for (std::size_t i = 0; i < prod.bins.size(); ++i) prod.bins[i] = power_[i] * fk.bins[i];
        return extract(idft_real(prod));
    }

    // sum_c ||S_c * k - B_c||^2
    double residual(const std::vector<double>& k) const {
        const Spectrum fk = dft(embed(k), w_, h_);
        const std::vector<double> px = idft_real(multiply(fsx_, fk));
        const std::vector<double> py = idft_real(multiply(fsy_, fk));
        double r = 0.0;
        for (std::size_t i = 0; i < px.size(); ++i) {
            r += (px[i] - bx_[i]) * (px[i] - bx_[i]) + (py[i] - by_[i]) * (py[i] - by_[i]);
        }
        return r;
    }

private:
    std::vector<double> embed(const std::vector<double>& k) const {
        std::vector<double> grid(static_cast<std::size_t>(w_) * h_, 0.0);
        const int r = size_ / 2;
        for (int y = 0; y < size_; ++y) {
            const int gy = ((y - r) % h_ + h_) % h_;
            for (int x = 0; x < size_; ++x) {
                const int gx = ((x - r) % w_ + w_) % w_;
                grid[static_cast<std::size_t>(gy) * w_ + gx] += k[static_cast<std::size_t>(y) * size_ + x];
            }
        }
        return grid;
    }

    std::vector<double> extract(const std::vector<double>& grid) const {
        std::vector<double> k(static_cast<std::size_t>(size_) * size_);
        const int r = size_ / 2;
        for (int y = 0; y < size_; ++y) {
            const int gy = ((y - r) % h_ + h_) % h_;
            for (int x = 0; x < size_; ++x) {
                const int gx = ((x - r) % w_ + w_) % w_;
                k[static_cast<std::size_t>(y) * size_ + x] = grid[static_cast<std::size_t>(gy) * w_ + gx];
            }
        }
        return k;
    }

    int w_, h_, size_;
    Spectrum fsx_, fsy_;
    std::vector<double> power_;
    std::vector<double> rhs_;
    std::vector<double> bx_, by_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Conjugate gradient on (H^T H + diag(d)) k = rhs.
KernelSolve conjugate_gradient(const KernelSystem& sys, const std::vector<double>& diag,
                               std::vector<double> x, double tol, int max_iter) {
    const std::vector<double>& b = sys.rhs();
    auto op = [&](const std::vector<double>& v) {
        std::vector<double> out = sys.apply(v);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += diag[i] * v[i];
        return out;
    };
    KernelSolve res;
    res.size = sys.size();
    res.rhs_norm = std::sqrt(dot(b, b));
    std::vector<double> ax = op(x);
    std::vector<double> r(b.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - ax[i];
    std::vector<double> p = r;
    double rr = dot(r, r);
    double best_rr = rr;
    std::vector<double> best = x;
    const double target = tol * res.rhs_norm;
    int it = 0;
    while (std::sqrt(rr) > target && it < max_iter) {
        const std::vector<double> ap = op(p);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        ++it;
        if (rr_new < best_rr) {
            best_rr = rr_new;
            best = x;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    require_finite(best, "solve_kernel");
    // Report the true residual of the returned iterate.
    const std::vector<double> ab = op(best);
    double true_rr = 0.0;
    for (std::size_t i = 0; i < ab.size(); ++i) true_rr += (b[i] - ab[i]) * (b[i] - ab[i]);
    res.values = std::move(best);
    res.iterations = it;
    res.residual_norm = std::sqrt(true_rr);
    res.converged = res.residual_norm <= target || res.rhs_norm == 0.0;
    return res;
}

double smoothed_sqrt_penalty(double k) {
    const double s = std::sqrt(std::abs(k) + kIrlsEpsilon);
    return s + kIrlsEpsilon / s - 2.0 * std::sqrt(kIrlsEpsilon);
}

}  // namespace

void DeblurConfig::validate() const {
    if (!(lambda > 0.0) || !(theta >= 0.0) || !(gamma > 0.0) || !(alpha > 0.0)) {
        throw ValueError("deblur weights must be positive");
    }
    if (n_outer < 1) throw ValueError("n_outer must be >= 1");
    if (kernel_size <= 0 || kernel_size % 2 == 0) throw ValueError("kernel_size must be odd");
    if (!(beta_max > 0.0) || !(cg_tol > 0.0) || cg_max_iter < 1) throw ValueError("bad solver limits");
    if (prune_fraction < 0.0 || prune_fraction >= 1.0) throw ValueError("prune_fraction must lie in [0,1)");
}

GradientField hard_threshold_w(const GradientField& g, double lambda, double beta) {
    if (!(beta > 0.0)) throw ValueError("hard_threshold_w: beta must be > 0");
    const double thr = lambda / beta;
    std::vector<double> wx(g.dx.data().begin(), g.dx.data().end());
    std::vector<double> wy(g.dy.data().begin(), g.dy.data().end());
    for (std::size_t i = 0; i < wx.size(); ++i) {
        if (wx[i] * wx[i] + wy[i] * wy[i] < thr) wx[i] = wy[i] = 0.0;
    }
    return {GrayImage(g.width(), g.height(), std::move(wx)), GrayImage(g.width(), g.height(), std::move(wy))};
}

GrayImage solve_latent_step(const GrayImage& blurred, const BlurKernel& k, const GradientField& w,
                            const GradientField& s_grad, double beta, double theta) {
    require_same_size(blurred, w, "solve_latent_step");
    require_same_size(blurred, s_grad, "solve_latent_step");
    return LatentSystem(blurred, k, s_grad).solve(w, beta, theta);
}

GrayImage solve_latent(const GrayImage& blurred, const BlurKernel& k, const GradientField& s_grad,
                       const DeblurConfig& cfg, const LatentObserver& observer) {
    require_same_size(blurred, s_grad, "solve_latent");
    const LatentSystem sys(blurred, k, s_grad);
    GrayImage latent = blurred;
    GradientField w_prev = GradientField::zeros(blurred.width(), blurred.height());
    double beta = 2.0 * cfg.lambda;
    do {
        GradientField w = hard_threshold_w(gradient(latent), cfg.lambda, beta);
        GrayImage next = sys.solve(w, beta, cfg.theta);
        if (observer) observer(LatentStage{beta, latent, w_prev, w, next});
        latent = std::move(next);
        w_prev = std::move(w);
        beta *= 2.0;
    } while (beta <= cfg.beta_max);
    return latent;
}

KernelSolve solve_kernel_ls(const GradientField& s_grad, const GradientField& b_grad, int size,
                            double gamma, double cg_tol, int cg_max_iter,
                            const std::vector<double>* initial) {
    const KernelSystem sys(s_grad, b_grad, size);
    const std::size_t n = static_cast<std::size_t>(size) * size;
    std::vector<double> x0 = initial ? *initial : std::vector<double>(n, 0.0);
    if (x0.size() != n) throw DimensionError("initial kernel has the wrong size");
    return conjugate_gradient(sys, std::vector<double>(n, gamma), std::move(x0), cg_tol, cg_max_iter);
}

BlurKernel project_kernel(const KernelSolve& raw, double prune_fraction) {
    std::vector<double> k = raw.values;
    double peak = 0.0;
    for (double& v : k) {
        v = std::max(v, 0.0);
        peak = std::max(peak, v);
    }
    if (!(peak > 0.0)) throw DegenerateInputError("kernel solve produced no positive entries");
    const double cut = prune_fraction * peak;
    for (double& v : k) {
        if (v < cut) v = 0.0;
    }
    return BlurKernel::normalized(raw.size, std::move(k));
}

BlurKernel solve_kernel(const GradientField& s_grad, const GradientField& b_grad,
                        const DeblurConfig& cfg) {
    const KernelSolve raw =
        solve_kernel_ls(s_grad, b_grad, cfg.kernel_size, cfg.gamma, cfg.cg_tol, cfg.cg_max_iter);
    if (!raw.converged) {
        std::cerr << "warning: kernel CG stopped after " << raw.iterations
                  << " iterations (relative residual " << raw.residual_norm / raw.rhs_norm << ")\n";
    }
    return project_kernel(raw, cfg.prune_fraction);
}

double kernel_data_residual(const GradientField& s_grad, const GradientField& b_grad,
                            const BlurKernel& k) {
    const KernelSystem sys(s_grad, b_grad, k.size());
    return sys.residual(std::vector<double>(k.data().begin(), k.data().end()));
}

BlurKernel solve_kernel_l05(const GradientField& s_grad, const GradientField& b_grad,
                            double alpha, int size, const DeblurConfig& cfg, L05Trace* trace,
                            KernelSolve* raw) {
    if (alpha < 0.0) throw ValueError("alpha must be >= 0");
    const KernelSystem sys(s_grad, b_grad, size);
    const std::size_t n = static_cast<std::size_t>(size) * size;
    auto objective = [&](const std::vector<double>& k) {
        double pen = 0.0;
        for (double v : k) pen += smoothed_sqrt_penalty(v);
        return sys.residual(k) + alpha * pen;
    };
    // Ridge start; alpha = 0 degenerates to a nearly unregularized solve.
    const double ridge = std::max(alpha, 1e-8);
    KernelSolve cur = conjugate_gradient(sys, std::vector<double>(n, ridge), std::vector<double>(n, 0.0),
                                         cfg.cg_tol, cfg.cg_max_iter);
    if (trace) trace->objective = {objective(cur.values)};
    for (int round = 0; round < kIrlsRounds; ++round) {
        std::vector<double> weights(n);
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = alpha * 0.25 * std::pow(std::abs(cur.values[i]) + kIrlsEpsilon, -1.5);
        }
        if (alpha == 0.0) std::fill(weights.begin(), weights.end(), 1e-8);
        cur = conjugate_gradient(sys, weights, cur.values, cfg.cg_tol, cfg.cg_max_iter);
        if (trace) trace->objective.push_back(objective(cur.values));
    }
    if (raw) *raw = cur;
    return project_kernel(cur, cfg.prune_fraction);
}

double latent_objective(const GrayImage& blurred, const BlurKernel& k, const GrayImage& latent,
                        const GradientField& s_grad, double lambda, double theta) {
    const double data = squared_distance(convolve_circular(latent, k), blurred);
    const GradientField g = gradient(latent);
    double l0 = 0.0, guide = 0.0;
    for (std::size_t i = 0; i < g.dx.size(); ++i) {
        const double gx = g.dx.data()[i];
        const double gy = g.dy.data()[i];
        if (gx * gx + gy * gy > 1e-12) l0 += 1.0;
        const double ex = gx - s_grad.dx.data()[i];
        const double ey = gy - s_grad.dy.data()[i];
        guide += ex * ex + ey * ey;
    }
    return data + lambda * l0 + theta * guide;
}

EstimateResult estimate_kernel(const GrayImage& blurred, const GradientField& s0,
                               const DeblurConfig& cfg) {
    cfg.validate();
    require_same_size(blurred, s0, "estimate_kernel");
    if (s0.is_zero()) throw DegenerateInputError("estimate_kernel: initial edges are all zero");
    const GradientField b_grad = gradient(blurred);
    GradientField s = s0;
    EstimateResult result{BlurKernel::delta(cfg.kernel_size), blurred, {}};
    for (int l = 1; l <= cfg.n_outer; ++l) {
        BlurKernel k = solve_kernel(s, b_grad, cfg);
        GrayImage latent = solve_latent(blurred, k, s, cfg);
        const double residual = kernel_data_residual(s, b_grad, k);
        const double objective = latent_objective(blurred, k, latent, s, cfg.lambda, cfg.theta);
        result.trace.push_back({l, residual, objective});
        double change = 0.0;
        for (std::size_t i = 0; i < k.data().size(); ++i) {
            change += std::abs(k.data()[i] - result.kernel.data()[i]);
        }
        s = gradient(latent);
        result.kernel = std::move(k);
        result.latent = std::move(latent);
        if (cfg.early_stop > 0.0 && l > 1 && change < cfg.early_stop) break;
        if (s.is_zero()) break;
    }
    return result;
}

}  // namespace exdeblur
