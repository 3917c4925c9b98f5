#pragma once

#include <fftw3.h>

#include <functional>
#include <memory>

#include "hermcurv/grid.hpp"

namespace hermcurv {

using LinearOp = std::function<RVec(const RVec&)>;

// Inverse of alpha * Lbar + beta, where Lbar is the complex Laplacian with
// node-averaged coefficients. Lbar is diagonal in the Fourier basis of the
// grid, with symbols matching the scheme's first and second derivatives.
// Modes where the symbol vanishes are mapped to zero.
// apply() reuses internal FFT buffers and must not be called concurrently.
class FourierPreconditioner {
public:
    FourierPreconditioner(const GridMetric& gm, double alpha, double beta);
    ~FourierPreconditioner();
    FourierPreconditioner(const FourierPreconditioner&) = delete;
    FourierPreconditioner& operator=(const FourierPreconditioner&) = delete;
    RVec apply(const RVec& r) const;
    LinearOp op() const {
        return [this](const RVec& r) { return apply(r); };
    }
    // symbol of alpha * Lbar + beta at each Fourier mode, in node order
    const RVec& symbol() const { return symbol_; }

private:
    RVec symbol_;
    fftw_complex* buf_ = nullptr;
    fftw_plan forward_ = nullptr, backward_ = nullptr;
};

struct KrylovResult {
    RVec x;
    double relative_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Right-preconditioned restarted GMRES for A x = b.
KrylovResult gmres(const LinearOp& A, const LinearOp& Minv, const RVec& b, const RVec& x0, double rel_tol,
                   int max_iter, int restart = 60);

}  // namespace hermcurv
