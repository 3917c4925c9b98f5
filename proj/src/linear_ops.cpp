#include "hermcurv/linear_ops.hpp"

#include <cmath>

namespace hermcurv {

namespace {

// Eigenvalues of the scheme's first (as i*kappa) and second derivative for Fourier index j.
void mode_eigen(const TorusGrid& g, int a, int j, Scheme s, double& kappa, double& d2) {
    const int N = g.count(a);
    const double L = g.period(a), h = g.spacing(a);
    const int k = j <= N / 2 ? j : j - N;
    const double w = 2 * M_PI * k / L;
    if (s == Scheme::FD2) {
        kappa = std::sin(w * h) / h;
        d2 = -4 * std::pow(std::sin(0.5 * w * h), 2) / (h * h);
    } else {
        const bool nyquist = 2 * j == N;
        kappa = nyquist ? 0.0 : w;
        d2 = nyquist ? -std::pow(M_PI * N / L, 2) : -w * w;
    }
}

}  // namespace

FourierPreconditioner::FourierPreconditioner(const GridMetric& gm, double alpha, double beta) {
    const TorusGrid& g = gm.grid();
    const int A = g.axes();
    const Eigen::Index m = Eigen::Index(g.size());
    // node-averaged coefficients
    Eigen::MatrixXd cbar = Eigen::MatrixXd::Zero(A, A);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int a = 0; a < A; ++a)
            for (int b = 0; b < A; ++b) cbar(a, b) += gm.lap_coeff(i, a, b);
    cbar /= double(g.size());

    symbol_.resize(m);
    double top = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<double> kap(std::size_t(A), 0.0), d2(std::size_t(A), 0.0);
        for (int a = 0; a < A; ++a)
            if (!g.collapsed(a)) mode_eigen(g, a, g.index_along(i, a), gm.scheme(), kap[std::size_t(a)], d2[std::size_t(a)]);
        double lap = 0;
        for (int a = 0; a < A; ++a) {
            if (g.collapsed(a)) continue;
            lap += cbar(a, a) * d2[std::size_t(a)];
            for (int b = a + 1; b < A; ++b)
                if (!g.collapsed(b)) lap -= 2 * cbar(a, b) * kap[std::size_t(a)] * kap[std::size_t(b)];
        }
        symbol_(Eigen::Index(i)) = alpha * lap + beta;
        top = std::max(top, std::abs(symbol_(Eigen::Index(i))));
    }
    for (Eigen::Index i = 0; i < m; ++i)
        if (std::abs(symbol_(i)) <= 1e-12 * top) symbol_(i) = 0.0;

    // node order is row-major over the axis counts, collapsed axes have count 1
    std::vector<int> dims(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) dims[std::size_t(a)] = g.count(a);
    buf_ = fftw_alloc_complex(g.size());
    forward_ = fftw_plan_dft(A, dims.data(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft(A, dims.data(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
}

FourierPreconditioner::~FourierPreconditioner() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buf_);
}

RVec FourierPreconditioner::apply(const RVec& r) const {
    const Eigen::Index m = symbol_.size();
    for (Eigen::Index i = 0; i < m; ++i) {
        buf_[i][0] = r(i);
        buf_[i][1] = 0.0;
    }
    fftw_execute(forward_);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double s = symbol_(i) == 0.0 ? 0.0 : 1.0 / (symbol_(i) * double(m));
        buf_[i][0] *= s;
        buf_[i][1] *= s;
    }
    fftw_execute(backward_);
    RVec out(m);
    for (Eigen::Index i = 0; i < m; ++i) out(i) = buf_[i][0];
    return out;
}

KrylovResult gmres(const LinearOp& A, const LinearOp& Minv, const RVec& b, const RVec& x0, double rel_tol, int max_iter,
                   int restart) {
    KrylovResult res;
    res.x = x0.size() == b.size() ? x0 : RVec::Zero(b.size());
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.x.setZero();
        res.converged = true;
        return res;
    }
    RVec r = b - A(res.x);
    double beta = r.norm();
    res.relative_residual = beta / bnorm;
    while (res.relative_residual > rel_tol && res.iterations < max_iter) {
        std::vector<RVec> V{r / beta};
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
        Eigen::VectorXd cs = Eigen::VectorXd::Zero(restart), sn = Eigen::VectorXd::Zero(restart);
        Eigen::VectorXd gvec = Eigen::VectorXd::Zero(restart + 1);
        gvec(0) = beta;
        int k = 0;
        for (; k < restart && res.iterations < max_iter; ++k) {
            ++res.iterations;
            RVec w = A(Minv(V[std::size_t(k)]));
            for (int i = 0; i <= k; ++i) {
                H(i, k) = w.dot(V[std::size_t(i)]);
                w -= H(i, k) * V[std::size_t(i)];
            }
            H(k + 1, k) = w.norm();
            for (int i = 0; i < k; ++i) {
                const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
                H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
                H(i, k) = t;
            }
            const double den = std::hypot(H(k, k), H(k + 1, k));
            const bool breakdown = H(k + 1, k) <= 1e-14 * den;
            if (!breakdown) V.push_back(w / H(k + 1, k));
            cs(k) = den > 0 ? H(k, k) / den : 1.0;
            sn(k) = den > 0 ? H(k + 1, k) / den : 0.0;
            H(k, k) = den;
            H(k + 1, k) = 0.0;
            gvec(k + 1) = -sn(k) * gvec(k);
            gvec(k) = cs(k) * gvec(k);
            if (breakdown || std::abs(gvec(k + 1)) / bnorm <= rel_tol) {
                ++k;
                break;
            }
        }
        Eigen::VectorXd y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(gvec.head(k));
        RVec update = RVec::Zero(b.size());
        for (int i = 0; i < k; ++i) update += y(i) * V[std::size_t(i)];
        res.x += Minv(update);
        r = b - A(res.x);
        const double prev = beta;
        beta = r.norm();
        res.relative_residual = beta / bnorm;
        if (!(beta < prev)) break;  // no progress over a full cycle
    }
    res.converged = res.relative_residual <= rel_tol;
    return res;
}

}  // namespace hermcurv
