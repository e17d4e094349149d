#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "exdeblur/image.hpp"
#include "exdeblur/kernel.hpp"

namespace exdeblur {

struct DeblurConfig {
    double lambda = 0.002;  ///< L0 weight on latent gradients
    double theta = 0.001;   ///< pull toward predicted edges
    double gamma = 1.0;     ///< kernel ridge weight
    int n_outer = 50;
    int kernel_size = 15;
    double beta_max = 1e5;
    double alpha = 0.005;  ///< L0.5 kernel weight (analysis mode)
    double cg_tol = 1e-6;
    int cg_max_iter = 200;
    /// Entries below this fraction of the maximum are dropped after a solve.
    double prune_fraction = 1.0 / 20.0;
    /// Stop when the kernel changes by less than this (L1); 0 disables.
    double early_stop = 0.0;

    void validate() const;
};

/// Per-pixel minimizer of beta||w - g||^2 + lambda||w||_0: keeps (gx,gy) when
/// gx^2 + gy^2 >= lambda/beta, else zero.
GradientField hard_threshold_w(const GradientField& g, double lambda, double beta);

/// One closed-form latent update: the minimizer of
///   ||I*k - B||^2 + beta||w - grad I||^2 + theta||grad I - S||^2
/// computed in the Fourier domain (denominator floored at 1e-12).
GrayImage solve_latent_step(const GrayImage& blurred, const BlurKernel& k, const GradientField& w,
                            const GradientField& s_grad, double beta, double theta);

/// Snapshot of one beta stage of the latent solver.
struct LatentStage {
    double beta;
    GrayImage latent_before;
    GradientField w_before;  ///< w of the previous stage (zero at the first)
    GradientField w;
    GrayImage latent_after;
};
using LatentObserver = std::function<void(const LatentStage&)>;

/// Half-quadratic splitting for
///   min_I ||I*k - B||^2 + lambda||grad I||_0 + theta||grad I - S||^2,
/// starting from I = B, beta = 2 lambda, doubling until beta > beta_max.
/// Throws SolverDivergenceError on non-finite iterates.
GrayImage solve_latent(const GrayImage& blurred, const BlurKernel& k, const GradientField& s_grad,
                       const DeblurConfig& cfg, const LatentObserver& observer = {});

/// Unprojected least-squares kernel.
struct KernelSolve {
    int size = 0;
    std::vector<double> values;
    int iterations = 0;
    double residual_norm = 0.0;  ///< ||A k - rhs|| of the normal equations
    double rhs_norm = 0.0;
    bool converged = false;
};

/// Conjugate gradient on (H^T H + gamma I) k = H^T b, where H convolves the
/// kernel support with both channels of s_grad and b stacks b_grad.
KernelSolve solve_kernel_ls(const GradientField& s_grad, const GradientField& b_grad, int size,
                            double gamma, double cg_tol, int cg_max_iter,
                            const std::vector<double>* initial = nullptr);

/// Zero negatives, zero entries below prune_fraction * max, rescale to unit
/// sum. Throws DegenerateInputError if nothing positive remains.
BlurKernel project_kernel(const KernelSolve& raw, double prune_fraction);

/// Ridge kernel solve followed by projection. Warns (stderr) and keeps the
/// best iterate when CG hits cg_max_iter.
BlurKernel solve_kernel(const GradientField& s_grad, const GradientField& b_grad,
                        const DeblurConfig& cfg);

/// Data residual sum_c ||S_c * k - B_c||^2.
double kernel_data_residual(const GradientField& s_grad, const GradientField& b_grad,
                            const BlurKernel& k);

struct L05Trace {
    /// Smoothed objective before the first and after every IRLS round.
    std::vector<double> objective;
};

/// Sparse kernel solve min ||S*k - B||^2 + alpha ||k||^0.5 by IRLS (8 rounds,
/// weights 0.25 (|k|+1e-4)^-1.5, CG inner solves), then projection.
BlurKernel solve_kernel_l05(const GradientField& s_grad, const GradientField& b_grad,
                            double alpha, int size, const DeblurConfig& cfg,
                            L05Trace* trace = nullptr, KernelSolve* raw = nullptr);

struct IterationTrace {
    int iteration;
    double kernel_residual;  ///< data residual of the new kernel against the edges used
    double objective;        ///< latent objective after the latent solve
};

struct EstimateResult {
    BlurKernel kernel;
    GrayImage latent;
    std::vector<IterationTrace> trace;
};

/// Alternates kernel solves, latent solves, and the edge update
/// S <- grad I for cfg.n_outer iterations at the input's own scale.
/// Throws DegenerateInputError if s0 is identically zero.
EstimateResult estimate_kernel(const GrayImage& blurred, const GradientField& s0,
                               const DeblurConfig& cfg);

/// Latent-image objective ||I*k - B||^2 + lambda||grad I||_0 +
/// theta||grad I - S||^2 with ||.||_0 counting pixels with nonzero gradient.
double latent_objective(const GrayImage& blurred, const BlurKernel& k, const GrayImage& latent,
                        const GradientField& s_grad, double lambda, double theta);

}  // namespace exdeblur
