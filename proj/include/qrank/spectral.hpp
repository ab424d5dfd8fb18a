#pragma once

// Liouville-space form of the quantum-walk generator.
//
// Convention: column stacking, vec(rho)[k + l N] = rho(k, l), so that
// vec(A rho B) = (B^T kron A) vec(rho). Eigen's default column-major storage
// makes `reshaped()` exactly this map.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "qrank/common.hpp"
#include "qrank/quantum.hpp"

namespace qrank {

inline constexpr std::size_t kDefaultSizeCap = 64;
inline constexpr real_t kZeroEigenTol = 1e-9;

// Largest N for dense superoperator work; QRANK_SIZE_CAP overrides.
inline std::size_t superoperator_size_cap() {
    if (const char* env = std::getenv("QRANK_SIZE_CAP")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return kDefaultSizeCap;
}

inline ComplexVector vec(const ComplexMatrix& rho) { return rho.reshaped(); }

inline ComplexMatrix unvec(const ComplexVector& v, std::size_t n) {
    const auto d = static_cast<Eigen::Index>(n);
    if (v.size() != d * d) throw ValidationError("vector length is not N^2");
    return v.reshaped(d, d);
}

class SuperoperatorMatrix {
public:
    SuperoperatorMatrix(ComplexMatrix m, std::size_t source_dim) : m_(std::move(m)), n_(source_dim) {
        const auto d = static_cast<Eigen::Index>(n_ * n_);
        if (m_.rows() != d || m_.cols() != d) throw ValidationError("superoperator must be N^2 x N^2");
    }
    std::size_t source_dim() const noexcept { return n_; }
    const ComplexMatrix& matrix() const noexcept { return m_; }

    ComplexMatrix apply(const ComplexMatrix& rho) const { return unvec(m_ * vec(rho), n_); }

private:
    ComplexMatrix m_;
    std::size_t n_;
};

namespace detail {

// out += coef * (a kron b), skipping structural zeros.
inline void add_kron(ComplexMatrix& out, complex_t coef, const ComplexMatrix& a, const ComplexMatrix& b) {
    struct Entry {
        Eigen::Index r, c;
        complex_t v;
    };
    std::vector<Entry> nz;
    for (Eigen::Index c = 0; c < b.cols(); ++c)
        for (Eigen::Index r = 0; r < b.rows(); ++r)
            if (b(r, c) != complex_t{}) nz.push_back({r, c, b(r, c)});
    for (Eigen::Index ac = 0; ac < a.cols(); ++ac) {
        for (Eigen::Index ar = 0; ar < a.rows(); ++ar) {
            const complex_t av = a(ar, ac);
            if (av == complex_t{}) continue;
            for (const auto& e : nz) out(ar * b.rows() + e.r, ac * b.cols() + e.c) += coef * av * e.v;
        }
    }
}

} // namespace detail

// M = -i(1-eps)(I kron H - H^T kron I)
//     + eps sum_ij gamma_ij (conj(L) kron L - 1/2 I kron L^+L - 1/2 (L^+L)^T kron I)
inline SuperoperatorMatrix vectorize(const Liouvillian& l, std::size_t size_cap = superoperator_size_cap()) {
    const std::size_t n = l.dim();
    if (n > size_cap)
        throw SizeCapError("N = " + std::to_string(n) + " exceeds the superoperator cap of " +
                           std::to_string(size_cap) + "; use time integration instead");
    const auto d = static_cast<Eigen::Index>(n);
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    ComplexMatrix m = ComplexMatrix::Zero(d * d, d * d);

    const real_t coherent = 1.0 - l.epsilon();
    if (coherent != 0.0) {
        detail::add_kron(m, -kI * coherent, id, l.hamiltonian());
        detail::add_kron(m, kI * coherent, l.hamiltonian().transpose(), id);
    }
    const real_t eps = l.epsilon();
    if (eps != 0.0) {
        ComplexMatrix jump = ComplexMatrix::Zero(d, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                const real_t rate = l.rates()(i, j);
                if (rate == 0.0) continue;
                jump.setZero();
                jump(i, j) = 1.0;
                const ComplexMatrix jdj = jump.adjoint() * jump;
                detail::add_kron(m, eps * rate, jump.conjugate(), jump);
                detail::add_kron(m, -0.5 * eps * rate, id, jdj);
                detail::add_kron(m, -0.5 * eps * rate, jdj.transpose(), id);
            }
        }
    }
    return SuperoperatorMatrix(std::move(m), n);
}

//----------------------------------------------------------------------------
// Kernel and spectrum
//----------------------------------------------------------------------------

struct KernelBasis {
    ComplexMatrix right; // columns span ker(M)
    ComplexMatrix left;  // columns span ker(M^+)
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(right.cols()); }
};

inline KernelBasis kernel_basis(const SuperoperatorMatrix& m, real_t zero_tol = kZeroEigenTol) {
    Eigen::BDCSVD<ComplexMatrix> svd(m.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index k = 0;
    for (Eigen::Index i = sv.size(); i-- > 0;) {
        if (sv(i) < zero_tol)
            ++k;
        else
            break;
    }
    return {svd.matrixV().rightCols(k), svd.matrixU().rightCols(k)};
}

namespace detail {

inline std::optional<DensityMatrix> as_state(ComplexMatrix x, const DensityTolerances& tol) {
    const complex_t tr = x.trace();
    if (std::abs(tr) < 1e-9) return std::nullopt;
    x /= tr;
    x = 0.5 * (x + x.adjoint());
    try {
        return DensityMatrix(x, tol);
    } catch (const ValidationError&) {
        return std::nullopt;
    }
}

} // namespace detail

// Component of rho0 in ker(M) along the complementary spectral subspace,
// i.e. the long-time average of the evolution started at rho0.
inline ComplexMatrix kernel_projection(const KernelBasis& kb, const ComplexMatrix& rho0) {
    const ComplexMatrix overlap = kb.left.adjoint() * kb.right;
    const ComplexVector coeff = overlap.fullPivLu().solve(kb.left.adjoint() * vec(rho0));
    return unvec(kb.right * coeff, static_cast<std::size_t>(rho0.rows()));
}

struct SpectrumReport {
    std::vector<complex_t> eigenvalues; // sorted by descending real part
    real_t max_real_part = 0.0;
    std::size_t kernel_dimension = 0;
    real_t spectral_gap = 0.0; // 0 when no non-zero eigenvalue exists
    std::vector<DensityMatrix> steady_states;
};

struct SpectrumOptions {
    real_t zero_tol = kZeroEigenTol;
    real_t psd_tol = 1e-10;
};

// Steady states: for a unique kernel, the single normalized kernel state.
// Otherwise the state reached (on average) from I/N comes first, followed by
// every Hermitized kernel basis element that validates as a density matrix.
inline std::vector<DensityMatrix> kernel_states(const KernelBasis& kb, std::size_t n, real_t psd_tol = 1e-10) {
    const DensityTolerances tol{1e-12, 1e-10, psd_tol};
    std::vector<DensityMatrix> out;
    const auto d = static_cast<Eigen::Index>(n);
    if (kb.dimension() == 0) return out;
    if (kb.dimension() == 1) {
        if (auto s = detail::as_state(unvec(kb.right.col(0), n), tol)) out.push_back(*s);
        return out;
    }
    const ComplexMatrix mixed = ComplexMatrix::Identity(d, d) / static_cast<real_t>(n);
    if (auto s = detail::as_state(kernel_projection(kb, mixed), tol)) out.push_back(*s);
    for (Eigen::Index c = 0; c < kb.right.cols(); ++c) {
        const ComplexMatrix x = unvec(kb.right.col(c), n);
        for (const ComplexMatrix& part : {ComplexMatrix(0.5 * (x + x.adjoint())),
                                          ComplexMatrix((x - x.adjoint()) / (2.0 * kI))}) {
            if (auto s = detail::as_state(part, tol)) out.push_back(*s);
        }
    }
    return out;
}

inline SpectrumReport spectrum(const SuperoperatorMatrix& m, const SpectrumOptions& opt = {}) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(m.matrix(), false);
    if (es.info() != Eigen::Success) throw NumericalInstabilityError("eigensolver did not converge");

    SpectrumReport rep;
    const auto& ev = es.eigenvalues();
    rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](complex_t a, complex_t b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });

    rep.max_real_part = -std::numeric_limits<real_t>::infinity();
    bool any_zero = false;
    real_t nonzero_max = -std::numeric_limits<real_t>::infinity();
    for (const complex_t z : rep.eigenvalues) {
        rep.max_real_part = std::max(rep.max_real_part, z.real());
        if (std::abs(z) < opt.zero_tol)
            any_zero = true;
        else
            nonzero_max = std::max(nonzero_max, z.real());
    }
    if (!any_zero)
        throw StructuralError("no eigenvalue within " + format_real(opt.zero_tol) +
                              " of zero; a finite Lindblad generator always has a steady state");
    rep.spectral_gap = std::isfinite(nonzero_max) ? -nonzero_max : 0.0;

    const KernelBasis kb = kernel_basis(m, opt.zero_tol);
    rep.kernel_dimension = kb.dimension();
    if (rep.kernel_dimension == 0)
        throw StructuralError("zero eigenvalue found but the null space is numerically empty");
    rep.steady_states = kernel_states(kb, m.source_dim(), opt.psd_tol);
    if (rep.steady_states.empty()) throw StructuralError("no kernel element validates as a density matrix");
    return rep;
}

class NonUniqueSteadyStateError : public NonUniqueError {
public:
    NonUniqueSteadyStateError(std::size_t kernel_dimension, std::vector<DensityMatrix> states)
        : NonUniqueError(kernel_dimension,
                         "steady state is not unique: kernel dimension " + std::to_string(kernel_dimension)),
          states_(std::move(states)) {}
    const std::vector<DensityMatrix>& states() const noexcept { return states_; }

private:
    std::vector<DensityMatrix> states_;
};

inline DensityMatrix steady_state_by_kernel(const Liouvillian& l, std::size_t size_cap = superoperator_size_cap()) {
    const SuperoperatorMatrix m = vectorize(l, size_cap);
    const KernelBasis kb = kernel_basis(m);
    if (kb.dimension() == 0) throw StructuralError("generator has an empty kernel");
    if (kb.dimension() > 1) throw NonUniqueSteadyStateError(kb.dimension(), kernel_states(kb, l.dim()));
    auto states = kernel_states(kb, l.dim());
    if (states.empty()) throw StructuralError("kernel element does not validate as a density matrix");
    const real_t residual = max_abs(apply_generator(l, states.front()));
    if (residual >= 1e-8) throw StructuralError("kernel state residual " + format_real(residual) + " exceeds 1e-8");
    return states.front();
}

//----------------------------------------------------------------------------
// Matrix exponential: Pade approximation with scaling and squaring.
//----------------------------------------------------------------------------

namespace detail {

inline real_t norm1(const ComplexMatrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

inline ComplexMatrix pade_solve(const ComplexMatrix& u, const ComplexMatrix& v) {
    return (v - u).partialPivLu().solve(v + u);
}

template <std::size_t M>
ComplexMatrix pade_low(const ComplexMatrix& a, const std::array<real_t, M + 1>& b) {
    const auto n = a.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const ComplexMatrix a2 = a * a;
    ComplexMatrix power = id;
    ComplexMatrix odd = b[1] * id;
    ComplexMatrix even = b[0] * id;
    for (std::size_t k = 2; k <= M; k += 2) {
        power = power * a2;
        even += b[k] * power;
        if (k + 1 <= M) odd += b[k + 1] * power;
    }
    return pade_solve(a * odd, even);
}

inline ComplexMatrix pade13(const ComplexMatrix& a) {
    static constexpr std::array<real_t, 14> b{64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                              670442572800.0,      33522128640.0,       1323241920.0,
                                              40840800.0,          960960.0,            16380.0,
                                              182.0,               1.0};
    const auto n = a.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const ComplexMatrix a2 = a * a;
    const ComplexMatrix a4 = a2 * a2;
    const ComplexMatrix a6 = a4 * a2;
    const ComplexMatrix u =
        a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const ComplexMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return pade_solve(u, v);
}

} // namespace detail

// e^{m t}. Degree and scaling follow the standard backward-error bounds
// for double precision (degrees 3, 5, 7, 9, 13).
inline ComplexMatrix matrix_exponential(const ComplexMatrix& m, real_t t) {
    if (m.rows() != m.cols()) throw ValidationError("matrix exponential needs a square matrix");
    if (!m.allFinite() || !std::isfinite(t)) throw ValidationError("matrix exponential needs finite input");
    const ComplexMatrix a = m * t;
    const real_t nrm = detail::norm1(a);

    ComplexMatrix out;
    if (nrm <= 1.495585217958292e-2) {
        out = detail::pade_low<3>(a, {120.0, 60.0, 12.0, 1.0});
    } else if (nrm <= 2.539398330063230e-1) {
        out = detail::pade_low<5>(a, {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0});
    } else if (nrm <= 9.504178996162932e-1) {
        out = detail::pade_low<7>(a, {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0});
    } else if (nrm <= 2.097847961257068) {
        out = detail::pade_low<9>(a, {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0,
                                      110880.0, 3960.0, 90.0, 1.0});
    } else {
        const int s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / 5.371920351148152))));
        out = detail::pade13(a / std::ldexp(1.0, s));
        for (int i = 0; i < s; ++i) out = out * out;
    }
    if (!out.allFinite()) throw NumericalInstabilityError("matrix exponential overflowed");
    return out;
}

} // namespace qrank
