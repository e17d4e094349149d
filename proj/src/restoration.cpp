#include "exdeblur/restoration.hpp"

#include <algorithm>
#include <cmath>

#include "exdeblur/convolve.hpp"
#include "exdeblur/error.hpp"
#include "exdeblur/fft.hpp"

namespace exdeblur {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// A = K^T K + mu D^T diag(weights) D, with a Fourier-diagonal preconditioner
// built from the mean weight.
class WeightedSystem {
public:
    WeightedSystem(const GrayImage& blurred, const BlurKernel& k, double mu)
        : w_(blurred.width()), h_(blurred.height()), mu_(mu) {
        fk_ = filter_otf(k.data(), k.size(), k.size(), w_, h_);
        const Spectrum fdx = dx_otf(w_, h_);
        const Spectrum fdy = dy_otf(w_, h_);
        kpow_.resize(fk_.bins.size());
        dpow_.resize(fk_.bins.size());
        for (std::size_t i = 0; i < kpow_.size(); ++i) {
            kpow_[i] = std::norm(fk_.bins[i]);
            dpow_[i] = std::norm(fdx.bins[i]) + std::norm(fdy.bins[i]);
        }
        rhs_ = idft_real(multiply(fk_, dft(blurred), true));
    }

    void set_weights(std::vector<double> weights) {
        weights_ = std::move(weights);
        double mean = 0.0;
        for (double v : weights_) mean += v;
        mean_weight_ = mean / static_cast<double>(weights_.size());
    }

    const std::vector<double>& rhs() const noexcept { return rhs_; }

    std::vector<double> apply(const std::vector<double>& x) const {
        const Spectrum fx = dft(x, w_, h_);
        Spectrum kk{w_, h_, std::vector<Complex>(fx.bins.size())};
        for (std::size_t i = 0; i < kk.bins.size(); ++i) kk.bins[i] = kpow_[i] * fx.bins[i];
        std::vector<double> out = idft_real(kk);
        const GradientField g = gradient(GrayImage(w_, h_, x));
        std::vector<double> gx(g.dx.data().begin(), g.dx.data().end());
        std::vector<double> gy(g.dy.data().begin(), g.dy.data().end());
        for (std::size_t i = 0; i < gx.size(); ++i) {
            gx[i] *= weights_[i];
            gy[i] *= weights_[i];
        }
        const GrayImage reg = gradient_adjoint({GrayImage(w_, h_, std::move(gx)), GrayImage(w_, h_, std::move(gy))});
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += mu_ * reg.data()[i];
        return out;
    }

    std::vector<double> precondition(const std::vector<double>& r) const {
        const Spectrum fr = dft(r, w_, h_);
        Spectrum z{w_, h_, std::vector<Complex>(fr.bins.size())};
        for (std::size_t i = 0; i < z.bins.size(); ++i) {
            z.bins[i] = fr.bins[i] / std::max(kpow_[i] + mu_ * mean_weight_ * dpow_[i], 1e-12);
        }
        return idft_real(z);
    }

private:
    int w_, h_;
    double mu_;
    Spectrum fk_;
    std::vector<double> kpow_, dpow_, rhs_, weights_;
    double mean_weight_ = 1.0;
};

// Preconditioned CG warm-started at x. Every iterate lowers the quadratic.
std::vector<double> pcg(const WeightedSystem& sys, std::vector<double> x, int max_iter, double tol) {
    const std::vector<double>& b = sys.rhs();
    std::vector<double> ax = sys.apply(x);
    std::vector<double> r(b.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - ax[i];
    std::vector<double> z = sys.precondition(r);
    std::vector<double> p = z;
    double rz = dot(r, z);
    const double bnorm = std::sqrt(dot(b, b));
    for (int it = 0; it < max_iter && std::sqrt(dot(r, r)) > tol * bnorm; ++it) {
        const std::vector<double> ap = sys.apply(p);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = sys.precondition(r);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    return x;
}

}  // namespace

void RestoreConfig::validate() const {
    if (!(mu > 0.0)) throw ValueError("mu must be > 0");
    if (!(hl_exponent > 0.0 && hl_exponent < 1.0)) throw ValueError("hl_exponent must lie in (0,1)");
    if (irls_iters < 1 || !(irls_epsilon > 0.0) || cg_max_iter < 1) throw ValueError("bad IRLS limits");
}

double hyperlaplacian_objective(const GrayImage& blurred, const BlurKernel& k,
                                const GrayImage& latent, const RestoreConfig& cfg) {
    const double data = squared_distance(convolve_circular(latent, k), blurred);
    const GradientField g = gradient(latent);
    double prior = 0.0;
    for (std::size_t i = 0; i < g.dx.size(); ++i) {
        const double u = g.dx.data()[i] * g.dx.data()[i] + g.dy.data()[i] * g.dy.data()[i];
        prior += std::pow(u + cfg.irls_epsilon, cfg.hl_exponent / 2.0);
    }
    return data + cfg.mu * prior;
}

GrayImage deconv_hyperlaplacian(const GrayImage& blurred, const BlurKernel& k,
                                const RestoreConfig& cfg, RestoreTrace* trace) {
    cfg.validate();
    if (k.size() > blurred.width() || k.size() > blurred.height()) {
        throw DimensionError("kernel larger than image");
    }
    WeightedSystem sys(blurred, k, cfg.mu);
    GrayImage latent = blurred;
    if (trace) trace->objective = {hyperlaplacian_objective(blurred, k, latent, cfg)};
    const double half_p = cfg.hl_exponent / 2.0;
    for (int round = 0; round < cfg.irls_iters; ++round) {
        const GradientField g = gradient(latent);
        std::vector<double> weights(latent.size());
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double u = g.dx.data()[i] * g.dx.data()[i] + g.dy.data()[i] * g.dy.data()[i];
            weights[i] = half_p * std::pow(u + cfg.irls_epsilon, half_p - 1.0);
        }
        sys.set_weights(std::move(weights));
        std::vector<double> x = pcg(sys, std::move(latent).release(), cfg.cg_max_iter, cfg.cg_tol);
        for (double v : x) {
            if (!std::isfinite(v)) {
                throw SolverDivergenceError("deconv_hyperlaplacian: non-finite iterate in IRLS round " +
                                            std::to_string(round + 1));
            }
        }
        latent = GrayImage(blurred.width(), blurred.height(), std::move(x));
        if (trace) trace->objective.push_back(hyperlaplacian_objective(blurred, k, latent, cfg));
    }
    return clip(latent, 0.0, 1.0);
}

}  // namespace exdeblur
