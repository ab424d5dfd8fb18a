#pragma once

// Quantum stochastic walk on a graph. The density matrix evolves under
//
//   d rho/dt = -i (1 - eps) [H, rho]
//              + eps sum_ij gamma_ij (L_ij rho L_ij^+ - 1/2 {L_ij^+ L_ij, rho})
//
// with jump operators L_ij = |i><j| and rates gamma_ij = G_ij, so population
// moves j -> i at the Google-matrix rate. At eps = 1 the diagonal follows
// the classical continuous-time walk exactly; at eps = 0 the flow is unitary.

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qrank/classical.hpp"
#include "qrank/common.hpp"
#include "qrank/graph.hpp"

namespace qrank {

struct DensityTolerances {
    real_t hermitian = 1e-12;
    real_t trace = 1e-10;
    real_t psd = 1e-10;
};

// Hermitian, positive semidefinite, unit-trace N x N matrix.
class DensityMatrix {
public:
    explicit DensityMatrix(const ComplexMatrix& m, const DensityTolerances& tol = {}) {
        if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("density matrix must be square and non-empty");
        if (!m.allFinite()) throw ValidationError("density matrix has non-finite entries");
        const real_t herm = max_abs(m - m.adjoint());
        if (herm >= tol.hermitian)
            throw ValidationError("density matrix is not Hermitian (deviation " + format_real(herm) + ")");
        rho_ = 0.5 * (m + m.adjoint());
        const real_t tr = rho_.trace().real();
        if (std::abs(tr - 1.0) >= tol.trace) throw ValidationError("density matrix trace is " + format_real(tr));
        const real_t lo = min_eigenvalue();
        if (lo < -tol.psd)
            throw ValidationError("density matrix has negative eigenvalue " + format_real(lo));
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return rho_; }

    RealVector eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
    real_t min_eigenvalue() const { return eigenvalues().minCoeff(); }
    real_t purity() const { return (rho_ * rho_).trace().real(); }

private:
    ComplexMatrix rho_;
};

// Maximally mixed state I/n.
inline DensityMatrix initial_state(std::size_t n) {
    if (n < 1) throw ValidationError("initial state needs n >= 1");
    const auto d = static_cast<Eigen::Index>(n);
    return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<real_t>(n));
}

inline DensityMatrix pure_state(const ComplexVector& psi) {
    const real_t norm = psi.norm();
    if (!(norm > 0.0)) throw ValidationError("state vector must be non-zero");
    const ComplexVector u = psi / norm;
    return DensityMatrix(u * u.adjoint());
}

inline DensityMatrix basis_state(std::size_t n, std::size_t k) {
    if (k >= n) throw ValidationError("basis index out of range");
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(n));
    psi(static_cast<Eigen::Index>(k)) = 1.0;
    return pure_state(psi);
}

inline DensityMatrix diagonal_state(const RankVector& p) {
    return DensityMatrix(p.values().cast<complex_t>().asDiagonal().toDenseMatrix());
}

//----------------------------------------------------------------------------
// Generator
//----------------------------------------------------------------------------

class Liouvillian {
public:
    Liouvillian(ComplexMatrix hamiltonian, RealMatrix rates, real_t epsilon)
        : h_(std::move(hamiltonian)), rates_(std::move(rates)), epsilon_(epsilon) {
        if (h_.rows() != h_.cols() || h_.rows() == 0) throw ValidationError("Hamiltonian must be square and non-empty");
        if (rates_.rows() != h_.rows() || rates_.cols() != h_.cols())
            throw ValidationError("rate matrix is " + std::to_string(rates_.rows()) + "x" +
                                  std::to_string(rates_.cols()) + ", Hamiltonian is " + std::to_string(h_.rows()) +
                                  "x" + std::to_string(h_.cols()));
        if (!h_.allFinite() || !rates_.allFinite()) throw ValidationError("non-finite generator entries");
        const real_t herm = max_abs(h_ - h_.adjoint());
        if (herm >= 1e-12) throw ValidationError("Hamiltonian is not Hermitian (deviation " + format_real(herm) + ")");
        h_ = 0.5 * (h_ + h_.adjoint());
        if (rates_.minCoeff() < 0.0) throw ValidationError("rates must be non-negative");
        if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0))
            throw ValidationError("epsilon = " + format_real(epsilon_) + " outside [0, 1]");
        decay_ = rates_.colwise().sum().transpose();
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(h_.rows()); }
    const ComplexMatrix& hamiltonian() const noexcept { return h_; }
    const RealMatrix& rates() const noexcept { return rates_; }
    real_t epsilon() const noexcept { return epsilon_; }
    // Total outgoing rate of each node, sum_i gamma_ij.
    const RealVector& decay() const noexcept { return decay_; }

private:
    ComplexMatrix h_;
    RealMatrix rates_;
    real_t epsilon_;
    RealVector decay_;
};

struct SymmetrizedGoogle {};
// Realized single-particle lattice matrix (see lattice.hpp).
struct LatticeSource {
    RealMatrix matrix;
};
struct CustomHamiltonian {
    ComplexMatrix matrix;
};
using HamiltonianSource = std::variant<SymmetrizedGoogle, LatticeSource, CustomHamiltonian>;

inline ComplexMatrix realize_hamiltonian(const HamiltonianSource& source, const GoogleMatrix& g) {
    const auto n = g.matrix().rows();
    ComplexMatrix h = std::visit(
        [&](const auto& s) -> ComplexMatrix {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SymmetrizedGoogle>) {
                const RealMatrix a = g.matrix() - RealMatrix::Identity(n, n);
                return (0.5 * (a + a.transpose())).cast<complex_t>();
            } else {
                return s.matrix.template cast<complex_t>();
            }
        },
        source);
    if (h.rows() != n || h.cols() != n)
        throw ValidationError("Hamiltonian is " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                              ", graph has " + std::to_string(n) + " nodes");
    return h;
}

inline Liouvillian build_liouvillian(const HamiltonianSource& source, const GoogleMatrix& g, real_t epsilon) {
    return Liouvillian(realize_hamiltonian(source, g), g.matrix(), epsilon);
}

// d rho/dt for a Hermitian rho. The dissipator collapses to
//   diag(gamma . diag(rho)) - 1/2 (decay_k + decay_l) rho_kl.
inline ComplexMatrix apply_generator(const Liouvillian& l, const ComplexMatrix& rho) {
    const auto n = static_cast<Eigen::Index>(l.dim());
    if (rho.rows() != n || rho.cols() != n)
        throw ValidationError("state is " + std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()) +
                              ", generator acts on " + std::to_string(n) + "x" + std::to_string(n));

    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    const real_t coherent = 1.0 - l.epsilon();
    if (coherent != 0.0) {
        // [H, rho] = H rho - (H rho)^+ for Hermitian H and rho.
        const ComplexMatrix hr = l.hamiltonian() * rho;
        out.noalias() = (-kI * coherent) * (hr - hr.adjoint());
    }
    const real_t eps = l.epsilon();
    if (eps != 0.0) {
        const ComplexVector gain = l.rates().cast<complex_t>() * rho.diagonal();
        const RealVector& decay = l.decay();
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < n; ++r) out(r, c) -= eps * 0.5 * (decay(r) + decay(c)) * rho(r, c);
        out.diagonal() += eps * gain;
    }
    return out;
}

inline ComplexMatrix apply_generator(const Liouvillian& l, const DensityMatrix& rho) {
    return apply_generator(l, rho.matrix());
}

//----------------------------------------------------------------------------
// Time integration
//----------------------------------------------------------------------------

inline constexpr real_t kDefaultDt = 0.01;
inline constexpr real_t kDefaultSteadyTol = 1e-9;
inline constexpr real_t kDefaultTMax = 1000.0;

// Bounds past which an integration run is declared unstable.
inline constexpr DensityTolerances kIntegrationTolerances{1e-12, 1e-8, 1e-6};

struct Snapshot {
    real_t time;
    DensityMatrix state;
};

struct IntegrateOptions {
    real_t dt = kDefaultDt;
    std::size_t snapshot_stride = 1; // store every k-th step (final state always stored)
};

namespace detail {

inline ComplexMatrix rk4_step(const Liouvillian& l, const ComplexMatrix& rho, const ComplexMatrix& k1, real_t h) {
    const ComplexMatrix k2 = apply_generator(l, rho + (0.5 * h) * k1);
    const ComplexMatrix k3 = apply_generator(l, rho + (0.5 * h) * k2);
    const ComplexMatrix k4 = apply_generator(l, rho + h * k3);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline DensityMatrix checked_state(const ComplexMatrix& rho, real_t t) {
    try {
        return DensityMatrix(rho, kIntegrationTolerances);
    } catch (const ValidationError& e) {
        throw NumericalInstabilityError("integration left the state space at t = " + format_real(t) + " (" +
                                        e.what() + "); use a smaller dt");
    }
}

} // namespace detail

// Fixed-step RK4. The final step is shortened so the last snapshot lands on
// t_final exactly.
inline std::vector<Snapshot> integrate(const Liouvillian& l, const DensityMatrix& rho0, real_t t_final,
                                       const IntegrateOptions& opt = {}) {
    if (rho0.dim() != l.dim()) throw ValidationError("initial state dimension does not match generator");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ValidationError("t_final must be finite and non-negative");
    if (!(opt.dt > 0.0)) throw ValidationError("dt must be positive");
    if (opt.snapshot_stride == 0) throw ValidationError("snapshot_stride must be positive");

    std::vector<Snapshot> out{{0.0, rho0}};
    ComplexMatrix rho = rho0.matrix();
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / opt.dt - 1e-9));
    for (std::size_t k = 0; k < steps; ++k) {
        const real_t t0 = static_cast<real_t>(k) * opt.dt;
        const bool last = k + 1 == steps;
        const real_t h = last ? t_final - t0 : opt.dt;
        rho = detail::rk4_step(l, rho, apply_generator(l, rho), h);
        if (last || (k + 1) % opt.snapshot_stride == 0) {
            const real_t t = last ? t_final : t0 + h;
            out.push_back({t, detail::checked_state(rho, t)});
        }
    }
    return out;
}

struct SteadyStateResult {
    DensityMatrix state;
    bool converged;
    real_t residual; // ||L rho||_inf at the returned state
    real_t time;
};

// Integrates until ||L rho||_inf < tol or t_max is reached.
inline SteadyStateResult steady_state_by_integration(const Liouvillian& l, const DensityMatrix& rho0,
                                                     real_t tol = kDefaultSteadyTol, real_t t_max = kDefaultTMax,
                                                     real_t dt = kDefaultDt) {
    if (rho0.dim() != l.dim()) throw ValidationError("initial state dimension does not match generator");
    if (!(tol > 0.0)) throw ValidationError("tol must be positive");
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(t_max >= 0.0)) throw ValidationError("t_max must be non-negative");

    constexpr std::size_t kCheckEvery = 1000;
    ComplexMatrix rho = rho0.matrix();
    std::size_t k = 0;
    real_t t = 0.0;
    for (;;) {
        const ComplexMatrix k1 = apply_generator(l, rho);
        const real_t residual = max_abs(k1);
        if (residual < tol || t >= t_max) {
            return {detail::checked_state(rho, t), residual < tol, residual, t};
        }
        const real_t h = std::min(dt, t_max - t);
        rho = detail::rk4_step(l, rho, k1, h);
        ++k;
        t = (t + h >= t_max) ? t_max : static_cast<real_t>(k) * dt;
        if (k % kCheckEvery == 0) (void)detail::checked_state(rho, t);
    }
}

// Real diagonal, clamped at zero and renormalized.
inline RankVector quantum_pagerank(const DensityMatrix& rho) {
    RealVector p = rho.matrix().diagonal().real();
    const real_t sum = p.sum();
    if (std::abs(sum - 1.0) > 1e-8) throw InvalidStateError("diagonal sums to " + format_real(sum));
    p = p.cwiseMax(0.0);
    p /= p.sum();
    return RankVector(std::move(p));
}

} // namespace qrank
