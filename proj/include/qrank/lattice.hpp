#pragma once

// Tight-binding waveguide arrays: single-particle coupling matrix,
// propagator U = exp(-iHz), one- and two-photon observables, and the
// position-variance growth exponent used to tell ballistic from diffusive
// spreading.

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qrank/classical.hpp"
#include "qrank/common.hpp"
#include "qrank/graph.hpp"
#include "qrank/quantum.hpp"

namespace qrank {

enum class Boundary { open, periodic };

class LatticeHamiltonian {
public:
    LatticeHamiltonian(RealVector beta, RealVector coupling, Boundary boundary)
        : beta_(std::move(beta)), coupling_(std::move(coupling)), boundary_(boundary) {
        const auto n = beta_.size();
        if (n == 0) throw ValidationError("lattice needs at least one site");
        if (!beta_.allFinite() || !coupling_.allFinite()) throw ValidationError("lattice parameters must be finite");
        if (boundary_ == Boundary::open && coupling_.size() != n - 1)
            throw ValidationError("open lattice with " + std::to_string(n) + " sites needs " + std::to_string(n - 1) +
                                  " couplings, got " + std::to_string(coupling_.size()));
        if (boundary_ == Boundary::periodic) {
            if (n < 3) throw ValidationError("periodic lattice needs at least 3 sites");
            if (coupling_.size() != n)
                throw ValidationError("periodic lattice with " + std::to_string(n) + " sites needs " +
                                      std::to_string(n) + " couplings, got " + std::to_string(coupling_.size()));
        }
    }

    std::size_t site_count() const noexcept { return static_cast<std::size_t>(beta_.size()); }
    const RealVector& beta() const noexcept { return beta_; }
    const RealVector& coupling() const noexcept { return coupling_; }
    Boundary boundary() const noexcept { return boundary_; }

    // H_jj = beta_j, H_{j,j+1} = H_{j+1,j} = C_{j,j+1}; periodic adds the corners.
    RealMatrix matrix() const {
        const auto n = beta_.size();
        RealMatrix h = RealMatrix::Zero(n, n);
        h.diagonal() = beta_;
        for (Eigen::Index j = 0; j + 1 < n; ++j) h(j, j + 1) = h(j + 1, j) = coupling_(j);
        if (boundary_ == Boundary::periodic) h(0, n - 1) = h(n - 1, 0) = coupling_(n - 1);
        return h;
    }

private:
    RealVector beta_;
    RealVector coupling_;
    Boundary boundary_;
};

inline LatticeHamiltonian tight_binding(RealVector beta, RealVector coupling, Boundary boundary = Boundary::open) {
    return LatticeHamiltonian(std::move(beta), std::move(coupling), boundary);
}

// beta = 0, C = 1.
inline LatticeHamiltonian uniform_lattice(std::size_t n, Boundary boundary = Boundary::open) {
    const auto sites = static_cast<Eigen::Index>(n);
    const Eigen::Index links = boundary == Boundary::open ? sites - 1 : sites;
    return tight_binding(RealVector::Zero(sites), RealVector::Ones(std::max<Eigen::Index>(links, 0)), boundary);
}

inline HamiltonianSource as_source(const LatticeHamiltonian& h) { return LatticeSource{h.matrix()}; }

// Nearest-neighbour graph of an open chain, each site linking to its neighbours.
inline WebGraph line_graph(std::size_t n) {
    std::set<Edge> edges;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        edges.emplace(j, j + 1);
        edges.emplace(j + 1, j);
    }
    return WebGraph(n, std::move(edges));
}

class Propagator {
public:
    Propagator(ComplexMatrix u, real_t z) : u_(std::move(u)), z_(z) {
        const auto n = u_.rows();
        const real_t err = max_abs(u_.adjoint() * u_ - ComplexMatrix::Identity(n, n));
        if (err >= 1e-10) throw NumericalInstabilityError("propagator unitarity error " + format_real(err));
    }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(u_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return u_; }
    real_t z() const noexcept { return z_; }

private:
    ComplexMatrix u_;
    real_t z_;
};

// U = V exp(-i Lambda z) V^T from the symmetric eigendecomposition.
inline Propagator propagator(const LatticeHamiltonian& h, real_t z) {
    if (!std::isfinite(z)) throw ValidationError("propagation length must be finite");
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h.matrix());
    const ComplexVector phase = (-kI * z * es.eigenvalues().cast<complex_t>()).array().exp();
    const ComplexMatrix v = es.eigenvectors().cast<complex_t>();
    return Propagator(v * phase.asDiagonal() * v.transpose(), z);
}

namespace detail {

inline void require_site(const Propagator& u, std::size_t site) {
    if (site >= u.dim())
        throw ValidationError("site " + std::to_string(site) + " outside lattice of " + std::to_string(u.dim()) +
                              " sites");
}

} // namespace detail

inline RankVector single_photon_distribution(const Propagator& u, std::size_t input_site) {
    detail::require_site(u, input_site);
    return RankVector(u.matrix().col(static_cast<Eigen::Index>(input_site)).cwiseAbs2());
}

// Coincidence matrix for two indistinguishable photons injected at sites a
// and b. P(q, r) for q < r is Gamma(q, r); P(q, q) is Gamma(q, q) / 2.
inline RealMatrix two_photon_correlation(const Propagator& u, std::size_t site_a, std::size_t site_b) {
    detail::require_site(u, site_a);
    detail::require_site(u, site_b);
    const auto n = static_cast<Eigen::Index>(u.dim());
    const auto a = static_cast<Eigen::Index>(site_a);
    const auto b = static_cast<Eigen::Index>(site_b);
    const ComplexMatrix& m = u.matrix();
    const real_t bunch = site_a == site_b ? 2.0 : 1.0;

    RealMatrix gamma(n, n);
    for (Eigen::Index q = 0; q < n; ++q)
        for (Eigen::Index r = q; r < n; ++r)
            gamma(q, r) = gamma(r, q) = std::norm(m(q, a) * m(r, b) + m(q, b) * m(r, a)) / bunch;

    real_t total = 0.0;
    for (Eigen::Index q = 0; q < n; ++q)
        for (Eigen::Index r = q; r < n; ++r) total += q == r ? 0.5 * gamma(q, r) : gamma(q, r);
    return gamma / total;
}

//----------------------------------------------------------------------------
// Spreading diagnostic
//----------------------------------------------------------------------------

inline constexpr real_t kEdgeTolerance = 1e-6;

struct SpreadResult {
    std::vector<real_t> times;
    std::vector<real_t> variances;
    real_t exponent; // least-squares slope of log variance against log t
};

inline real_t position_variance(const RealVector& p) {
    const RealVector q = RealVector::LinSpaced(p.size(), 0.0, static_cast<real_t>(p.size() - 1));
    const real_t mean = q.dot(p);
    return ((q.array() - mean).square() * p.array()).sum();
}

namespace detail {

inline void require_times(const std::vector<real_t>& times, std::size_t n, std::size_t site0) {
    if (times.size() < 4) throw ValidationError("spread fit needs at least 4 time points");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0) || !std::isfinite(times[k])) throw ValidationError("spread times must be positive");
        if (k > 0 && !(times[k] > times[k - 1])) throw ValidationError("spread times must be strictly increasing");
    }
    if (site0 >= n) throw ValidationError("start site outside lattice");
}

inline real_t loglog_slope(const std::vector<real_t>& t, const std::vector<real_t>& v) {
    const auto m = static_cast<real_t>(t.size());
    real_t sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(v[k] > 0.0)) throw NumericalInstabilityError("zero variance at t = " + format_real(t[k]));
        const real_t x = std::log(t[k]);
        const real_t y = std::log(v[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline void guard_edges(const RealVector& p, real_t t, real_t edge_tol) {
    const real_t edge = std::max(p(0), p(p.size() - 1));
    if (edge > edge_tol)
        throw BoundaryContaminationError("edge occupation " + format_real(edge) + " exceeds " + format_real(edge_tol) +
                                         " at t = " + format_real(t) + "; use a larger lattice or shorter times");
}

} // namespace detail

// Coherent walk of a single photon launched at site0.
inline SpreadResult spread_exponent(const LatticeHamiltonian& h, std::size_t site0, const std::vector<real_t>& times,
                                    real_t edge_tol = kEdgeTolerance) {
    detail::require_times(times, h.site_count(), site0);
    SpreadResult res{times, {}, 0.0};
    RealVector last;
    for (const real_t t : times) {
        last = single_photon_distribution(propagator(h, t), site0).values();
        res.variances.push_back(position_variance(last));
    }
    detail::guard_edges(last, times.back(), edge_tol);
    res.exponent = detail::loglog_slope(res.times, res.variances);
    return res;
}

// Open-system walk: populations are the diagonal of rho(t), rho(0) = |site0><site0|.
inline SpreadResult spread_exponent(const Liouvillian& l, std::size_t site0, const std::vector<real_t>& times,
                                    real_t dt = kDefaultDt, real_t edge_tol = kEdgeTolerance) {
    detail::require_times(times, l.dim(), site0);
    SpreadResult res{times, {}, 0.0};
    DensityMatrix rho = basis_state(l.dim(), site0);
    real_t now = 0.0;
    RealVector last;
    for (const real_t t : times) {
        auto snaps = integrate(l, rho, t - now, {dt, static_cast<std::size_t>(-1)});
        rho = snaps.back().state;
        now = t;
        last = rho.matrix().diagonal().real();
        res.variances.push_back(position_variance(last));
    }
    detail::guard_edges(last, times.back(), edge_tol);
    res.exponent = detail::loglog_slope(res.times, res.variances);
    return res;
}

} // namespace qrank
