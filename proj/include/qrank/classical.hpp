#pragma once

// Classical PageRank: discrete power iteration, continuous-time diffusion
// dp/dt = (G - I)p, and a direct linear solve for the stationary vector.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "qrank/common.hpp"
#include "qrank/graph.hpp"

namespace qrank {

inline constexpr real_t kRankEntryTol = 1e-14;
inline constexpr real_t kRankSumTol = 1e-10;
inline constexpr real_t kTieTol = 1e-12;

// Probability vector over graph nodes.
class RankVector {
public:
    explicit RankVector(RealVector values) : v_(std::move(values)) {
        if (v_.size() == 0) throw ValidationError("rank vector must be non-empty");
        if (!v_.allFinite()) throw ValidationError("rank vector has non-finite entries");
        if (v_.minCoeff() < -kRankEntryTol)
            throw ValidationError("rank vector entry " + format_real(v_.minCoeff()) + " is negative");
        if (std::abs(v_.sum() - 1.0) > kRankSumTol)
            throw ValidationError("rank vector sums to " + format_real(v_.sum()));
    }

    static RankVector uniform(std::size_t n) {
        if (n == 0) throw ValidationError("rank vector must be non-empty");
        return RankVector(RealVector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<real_t>(n)));
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(v_.size()); }
    const RealVector& values() const noexcept { return v_; }
    real_t operator[](std::size_t i) const { return v_(static_cast<Eigen::Index>(i)); }

private:
    RealVector v_;
};

struct TracePoint {
    real_t at;       // iteration index or time
    real_t residual; // L1 norm
};

struct ConvergenceTrace {
    std::vector<TracePoint> iterates;
    bool converged = false;
    RankVector final;
    // |sum(p) - 1| of the unnormalized final vector.
    real_t sum_drift = 0.0;
};

namespace detail {

inline void require_dim(const GoogleMatrix& g, const RankVector& p) {
    if (g.dim() != p.dim())
        throw ValidationError("dimension mismatch: matrix is " + std::to_string(g.dim()) + ", vector is " +
                              std::to_string(p.dim()));
}

} // namespace detail

inline ConvergenceTrace power_iterate(const GoogleMatrix& g, const RankVector& p0, real_t tol = 1e-12,
                                      std::size_t max_iter = 10000) {
    detail::require_dim(g, p0);
    if (!(tol > 0.0)) throw ValidationError("tol must be positive");

    std::vector<TracePoint> iterates;
    RealVector p = p0.values();
    bool converged = false;
    for (std::size_t k = 0; k < max_iter; ++k) {
        RealVector next = g.matrix() * p;
        const real_t r = (next - p).lpNorm<1>();
        p = std::move(next);
        iterates.push_back({static_cast<real_t>(k + 1), r});
        if (r < tol) {
            converged = true;
            break;
        }
    }
    const real_t drift = std::abs(p.sum() - 1.0);
    return {std::move(iterates), converged, RankVector(p), drift};
}

// RK4 with fixed step dt; the last step is shortened to land on t.
// Residual recorded per step is ||(G - I)p||_1.
inline ConvergenceTrace continuous_evolve(const GoogleMatrix& g, const RankVector& p0, real_t t, real_t dt = 0.01,
                                          real_t tol = 1e-9) {
    detail::require_dim(g, p0);
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("t must be finite and non-negative");
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");

    const auto n = g.matrix().rows();
    const RealMatrix a = g.matrix() - RealMatrix::Identity(n, n);
    auto rhs = [&a](const RealVector& p) -> RealVector { return a * p; };

    RealVector p = p0.values();
    std::vector<TracePoint> iterates{{0.0, rhs(p).lpNorm<1>()}};
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
    for (std::size_t k = 0; k < steps; ++k) {
        const real_t t0 = static_cast<real_t>(k) * dt;
        const real_t h = (k + 1 == steps) ? t - t0 : dt;
        const RealVector k1 = rhs(p);
        const RealVector k2 = rhs(p + 0.5 * h * k1);
        const RealVector k3 = rhs(p + 0.5 * h * k2);
        const RealVector k4 = rhs(p + h * k3);
        p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        iterates.push_back({k + 1 == steps ? t : t0 + h, rhs(p).lpNorm<1>()});
    }
    const real_t drift = std::abs(p.sum() - 1.0);
    if (drift > 1e-9)
        throw NumericalInstabilityError("probability drift " + format_real(drift) + " exceeds 1e-9; reduce dt");
    const bool converged = iterates.back().residual < tol;
    return {std::move(iterates), converged, RankVector(p), drift};
}

// Solves (G - I)p = 0 with sum(p) = 1 by replacing the last row with ones.
inline RankVector stationary(const GoogleMatrix& g) {
    const auto n = g.matrix().rows();
    RealMatrix a = g.matrix() - RealMatrix::Identity(n, n);

    Eigen::FullPivLU<RealMatrix> lu(a);
    lu.setThreshold(1e-10);
    const auto kernel = static_cast<std::size_t>(n - lu.rank());
    if (kernel > 1)
        throw NonUniqueError(kernel, "stationary vector is not unique: kernel of G - I has dimension " +
                                         std::to_string(kernel));

    a.row(n - 1).setOnes();
    RealVector b = RealVector::Zero(n);
    b(n - 1) = 1.0;
    RealVector p = a.fullPivLu().solve(b);

    const real_t res = max_abs(g.matrix() * p - p);
    if (res >= 1e-10) throw StructuralError("stationary residual " + format_real(res) + " exceeds 1e-10");
    return RankVector(std::move(p));
}

struct RankEntry {
    std::size_t node;
    real_t score;
    std::size_t rank; // 1-based
};

// Descending score; scores within 1e-12 of the current maximum are ordered
// by node id ascending.
inline std::vector<RankEntry> rank_order(const RankVector& p) {
    const std::size_t n = p.dim();
    std::vector<bool> taken(n, false);
    std::vector<RankEntry> out;
    out.reserve(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        real_t best = -1.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!taken[i] && p[i] > best) best = p[i];
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i] && p[i] >= best - kTieTol) {
                pick = i;
                break;
            }
        }
        taken[pick] = true;
        out.push_back({pick, p[pick], pos + 1});
    }
    return out;
}

} // namespace qrank
