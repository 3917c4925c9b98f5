#include <cmath>
#include <ostream>
#include <thread>

#include "hermcurv/errors.hpp"
#include "hermcurv/grid.hpp"

namespace hermcurv {

Scheme parse_scheme(const std::string& s) {
    if (s == "fd2") return Scheme::FD2;
    if (s == "spectral") return Scheme::Spectral;
    throw Error("unknown scheme '" + s + "' (expected fd2 or spectral)");
}

std::string scheme_name(Scheme s) { return s == Scheme::FD2 ? "fd2" : "spectral"; }

TorusGrid::TorusGrid(int n, int N, std::vector<double> periods, std::vector<bool> active, double budget_bytes)
    : n_(n), N_(N), periods_(std::move(periods)) {
    if (n < 2) throw PreconditionError("complex dimension n >= 2 required");
    if (N < 4 || N % 2 != 0) throw PreconditionError("grid size N must be even and >= 4");
    if (periods_.empty()) periods_.assign(std::size_t(2 * n), 1.0);
    if (int(periods_.size()) != 2 * n) throw PreconditionError("grid needs 2n periods");
    for (double p : periods_)
        if (!(p > 0)) throw PreconditionError("grid periods must be positive");
    counts_.assign(std::size_t(2 * n), N);
    if (!active.empty()) {
        if (int(active.size()) != 2 * n) throw PreconditionError("active-axis mask needs 2n entries");
        for (int a = 0; a < 2 * n; ++a)
            if (!active[std::size_t(a)]) counts_[std::size_t(a)] = 1;
    }
    strides_.assign(std::size_t(2 * n), 1);
    double total = 1;
    for (int a = 2 * n - 1; a >= 0; --a) {
        if (a < 2 * n - 1) strides_[std::size_t(a)] = strides_[std::size_t(a + 1)] * std::size_t(counts_[std::size_t(a + 1)]);
        total *= counts_[std::size_t(a)];
    }
    // rough per-node footprint of metric data, fields and one sparse operator
    const double bytes_per_node = 1024.0;
    if (total * bytes_per_node > budget_bytes)
        throw PreconditionError("grid of " + std::to_string(total) + " nodes exceeds the memory budget");
    size_ = std::size_t(total);
}

double TorusGrid::cell_volume() const {
    double v = 1;
    for (int a = 0; a < axes(); ++a) v *= spacing(a);
    return v;
}

std::size_t TorusGrid::shift(std::size_t idx, int a, int s) const {
    const int c = counts_[std::size_t(a)];
    const int i = index_along(idx, a);
    int j = (i + s) % c;
    if (j < 0) j += c;
    return idx + std::size_t(j - i) * strides_[std::size_t(a)];
}

ChartPoint TorusGrid::point(std::size_t idx) const {
    ChartPoint p(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) p[std::size_t(k)] = cplx(coord(idx, 2 * k), coord(idx, 2 * k + 1));
    return p;
}

TorusField TorusField::from_real(GridPtr g, const RVec& v) {
    if (std::size_t(v.size()) != g->size()) throw Error("field size does not match grid");
    return {std::move(g), v.cast<cplx>(), true};
}

TorusField TorusField::from_complex(GridPtr g, const CVec& v) {
    if (std::size_t(v.size()) != g->size()) throw Error("field size does not match grid");
    return {std::move(g), v, false};
}

TorusField TorusField::sample(GridPtr g, const std::function<cplx(const ChartPoint&)>& f, bool real) {
    CVec v(static_cast<Eigen::Index>(g->size()));
    for (std::size_t i = 0; i < g->size(); ++i) {
        cplx z = f(g->point(i));
        v(Eigen::Index(i)) = real ? cplx(z.real(), 0.0) : z;
    }
    return {std::move(g), std::move(v), real};
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t t = std::size_t(std::max(1, threads));
    if (t == 1 || count < 2 * t) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + t - 1) / t;
    for (std::size_t b = 0; b < count; b += chunk) pool.emplace_back(body, b, std::min(count, b + chunk));
    for (auto& th : pool) th.join();
}

GridMetric::GridMetric(const ModelManifold& man, GridPtr grid, Scheme scheme, int threads)
    : man_(std::make_shared<ModelManifold>(man)), grid_(std::move(grid)), scheme_(scheme), threads_(threads) {
    if (!man.domain().periodic) throw PreconditionError("grid metrics need a periodic torus chart; '" + man.name() + "' is not");
    if (man.n() != grid_->n()) throw PreconditionError("grid dimension does not match manifold");
    for (int a = 0; a < grid_->axes(); ++a)
        if (std::abs(man.domain().periods[std::size_t(a)] - grid_->period(a)) > 1e-12)
            throw PreconditionError("grid periods do not match the manifold's periods");
    const int n = grid_->n();
    if (grid_->size() > 0) {
        std::vector<bool> act = man.active_axes();
        for (int a = 0; a < grid_->axes(); ++a)
            if (grid_->collapsed(a) && act[std::size_t(a)])
                throw PreconditionError("collapsed grid axis along which the metric varies");
    }
    const std::size_t m = grid_->size();
    sigma_ = RVec::Zero(Eigen::Index(m));
    G_.resize(m * std::size_t(n * n));
    det0_.resize(Eigen::Index(m));
    tau0_.resize(m * std::size_t(n));
    s1c0_.resize(Eigen::Index(m));
    s2c0_.resize(Eigen::Index(m));
    s2b0_.resize(Eigen::Index(m));
    lee0_.resize(m * std::size_t(2 * n));
    parallel_for(m, threads_, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            PointScalars ps = point_scalars(evaluate_metric_jet(*man_, grid_->point(i)));
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) G_[i * std::size_t(n * n) + std::size_t(r * n + c)] = ps.hinv(r, c);
            det0_(Eigen::Index(i)) = ps.det;
            s1c0_(Eigen::Index(i)) = ps.s1_chern;
            s2c0_(Eigen::Index(i)) = ps.s2_chern;
            s2b0_(Eigen::Index(i)) = ps.s2_bismut;
            for (int k = 0; k < n; ++k) {
                cplx t = ps.tau[std::size_t(k)];
                tau0_[i * std::size_t(n) + std::size_t(k)] = t;
                // eta = tau_k dz^k + conj(tau_k) dzbar^k
                lee0_[i * std::size_t(2 * n) + std::size_t(2 * k)] = 2 * t.real();
                lee0_[i * std::size_t(2 * n) + std::size_t(2 * k + 1)] = -2 * t.imag();
            }
        }
    });
    refresh_weights();
}

void GridMetric::refresh_weights() {
    const int n = grid_->n();
    const double cv = grid_->cell_volume() * std::pow(2.0, n);
    weights_.resize(Eigen::Index(size()));
    for (std::size_t i = 0; i < size(); ++i)
        weights_(Eigen::Index(i)) = cv * det0_(Eigen::Index(i)) * std::exp(n * sigma_(Eigen::Index(i)));
}

GridMetric GridMetric::conformal(const RVec& s) const {
    if (std::size_t(s.size()) != size()) throw Error("conformal factor size does not match grid");
    GridMetric g = *this;
    g.sigma_ = sigma_ + s;
    g.refresh_weights();
    return g;
}

CMatrix GridMetric::hinv(std::size_t idx) const {
    const int n = this->n();
    CMatrix G(n, n);
    const double s = std::exp(-sigma_(Eigen::Index(idx)));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) G(r, c) = s * G_[idx * std::size_t(n * n) + std::size_t(r * n + c)];
    return G;
}

double GridMetric::det(std::size_t idx) const {
    return det0_(Eigen::Index(idx)) * std::exp(n() * sigma_(Eigen::Index(idx)));
}

namespace {

bool is_zero_field(const RVec& v) { return v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

double GridMetric::lap_coeff(std::size_t idx, int a, int b) const {
    const int n = this->n();
    auto g = [&](int r, int c) { return G_[idx * std::size_t(n * n) + std::size_t(r * n + c)]; };
    // c(x_i,x_j) = c(y_i,y_j) = Re G/4, c(x_i,y_j) = -Im G/4, c(y_i,x_j) = Im G/4
    auto raw = [&](int p, int q) {
        int i = p / 2, j = q / 2;
        bool py = p % 2, qy = q % 2;
        cplx G = g(i, j);
        if (py == qy) return 0.25 * G.real();
        return py ? 0.25 * G.imag() : -0.25 * G.imag();
    };
    return 0.5 * (raw(a, b) + raw(b, a)) * std::exp(-sigma_(Eigen::Index(idx)));
}

std::vector<cplx> GridMetric::tau(std::size_t idx) const {
    const int n = this->n();
    std::vector<cplx> t(tau0_.begin() + long(idx * std::size_t(n)), tau0_.begin() + long((idx + 1) * std::size_t(n)));
    if (!is_zero_field(sigma_)) {
        // tau' = tau + (n-1) d sigma
        TorusField s = TorusField::from_real(grid_, sigma_);
        for (int k = 0; k < n; ++k) t[std::size_t(k)] += double(n - 1) * dz(s, k, scheme_).values(Eigen::Index(idx));
    }
    return t;
}

RVec GridMetric::lap_base(const RVec& u) const {
    // complex Laplacian of the base metric (sigma = 0)
    GridMetric b = *this;
    b.sigma_.setZero();
    return complex_laplacian(b, u);
}

RVec GridMetric::s1_chern() const {
    if (is_zero_field(sigma_)) return s1c0_;
    RVec l = lap_base(sigma_);
    return ((s1c0_ - n() * l).array() * (-sigma_).array().exp()).matrix();
}

RVec GridMetric::s2_chern() const {
    if (is_zero_field(sigma_)) return s2c0_;
    RVec l = lap_base(sigma_);
    return ((s2c0_ - l).array() * (-sigma_).array().exp()).matrix();
}

RVec GridMetric::s2_bismut() const {
    if (is_zero_field(sigma_)) return s2b0_;
    const int n = this->n();
    RVec l = lap_base(sigma_);
    TorusField s = TorusField::from_real(grid_, sigma_);
    std::vector<CVec> d;
    for (int k = 0; k < n; ++k) d.push_back(dz(s, k, scheme_).values);
    RVec out(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
        cplx g2 = 0, pr = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                cplx G = G_[i * std::size_t(n * n) + std::size_t(a * n + b)];
                cplx fa = d[std::size_t(a)](Eigen::Index(i)), fb = d[std::size_t(b)](Eigen::Index(i));
                g2 += G * fa * std::conj(fb);
                pr -= G * fa * std::conj(tau0_[i * std::size_t(n) + std::size_t(b)]);
            }
        const Eigen::Index e = Eigen::Index(i);
        out(e) = std::exp(-sigma_(e)) *
                 (s2b0_(e) - (2.0 * n - 1) * l(e) - (n * n - 1.0) * g2.real() + 2.0 * (n + 1) * pr.real());
    }
    return out;
}

RVec GridMetric::lee(int a) const {
    const int n = this->n();
    RVec out(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) out(Eigen::Index(i)) = lee0_[i * std::size_t(2 * n) + std::size_t(a)];
    if (!is_zero_field(sigma_)) out += double(n - 1) * axis_d1(*grid_, sigma_, a, scheme_);
    return out;
}

ClassResiduals GridMetric::base_class_residuals() const {
    const std::size_t m = size();
    std::vector<ClassResiduals> per(m);
    parallel_for(m, threads_, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) per[i] = class_residuals(evaluate_metric_jet(*man_, grid_->point(i)));
    });
    ClassResiduals r;
    for (const ClassResiduals& c : per) {
        r.kahler = std::max(r.kahler, c.kahler);
        r.balanced = std::max(r.balanced, c.balanced);
        r.gauduchon = std::max(r.gauduchon, c.gauduchon);
        r.pluriclosed = std::max(r.pluriclosed, c.pluriclosed);
    }
    return r;
}

double GridMetric::max_delstar_norm() const {
    const int n = this->n();
    double m = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        std::vector<cplx> t = tau(i);
        CMatrix G = hinv(i);
        cplx s = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) s += G(a, b) * t[std::size_t(a)] * std::conj(t[std::size_t(b)]);
        m = std::max(m, std::sqrt(std::max(0.0, s.real())));
    }
    return m;
}

void write_csv(std::ostream& os, const TorusGrid& g, const std::vector<std::pair<std::string, RVec>>& fields) {
    os << "index";
    for (int a = 0; a < g.axes(); ++a) os << (a % 2 ? ",y" : ",x") << a / 2 + 1;
    for (const auto& f : fields) os << "," << f.first;
    os << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < g.size(); ++i) {
        os << i;
        for (int a = 0; a < g.axes(); ++a) os << "," << g.coord(i, a);
        for (const auto& f : fields) os << "," << f.second(Eigen::Index(i));
        os << "\n";
    }
}

}  // namespace hermcurv
