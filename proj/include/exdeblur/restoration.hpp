#pragma once

#include <vector>

#include "exdeblur/image.hpp"
#include "exdeblur/kernel.hpp"

namespace exdeblur {

struct RestoreConfig {
    double mu = 2e-3;
    double hl_exponent = 0.8;
    int irls_iters = 12;
    double irls_epsilon = 1e-4;
    int cg_max_iter = 100;
    double cg_tol = 1e-8;

    void validate() const;
};

struct RestoreTrace {
    /// Smoothed objective at the start and after every IRLS round.
    std::vector<double> objective;
};

/// Non-blind deconvolution minimizing
///   ||I*k - B||^2 + mu sum (|grad I|^2 + eps)^(p/2)
/// by iteratively reweighted least squares. Each round solves the weighted
/// quadratic with conjugate gradient warm-started at the current estimate.
/// The result is clipped to [0,1].
GrayImage deconv_hyperlaplacian(const GrayImage& blurred, const BlurKernel& k,
                                const RestoreConfig& cfg = {}, RestoreTrace* trace = nullptr);

/// The smoothed objective above, on an unclipped estimate.
double hyperlaplacian_objective(const GrayImage& blurred, const BlurKernel& k,
                                const GrayImage& latent, const RestoreConfig& cfg);

}  // namespace exdeblur
