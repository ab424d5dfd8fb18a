#pragma once

// Test-only generators and reference oracles. Nothing in here calls the
// library code paths the oracles are used to check.

#include <cmath>
#include <random>
#include <set>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "qrank/qrank.hpp"

namespace qrank::testing {

// 0 -> 1 -> 2 -> 0 plus 3 -> 0.
inline WebGraph four_node_graph() { return WebGraph(4, {{0, 1}, {1, 2}, {2, 0}, {3, 0}}); }

inline WebGraph three_cycle() { return WebGraph(3, {{0, 1}, {1, 2}, {2, 0}}); }

inline WebGraph random_graph(std::mt19937_64& rng, std::size_t n, double p = 0.35) {
    std::bernoulli_distribution link(p);
    std::set<Edge> edges;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t)
            if (s != t && link(rng)) edges.emplace(s, t);
    return WebGraph(n, std::move(edges));
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    ComplexMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {d(rng), d(rng)};
    return 0.5 * (a + a.adjoint());
}

inline RealMatrix random_rates(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RealMatrix r(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) r(i, j) = u(rng);
    return r;
}

inline Liouvillian random_liouvillian(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return Liouvillian(random_hermitian(rng, n), random_rates(rng, n), u(rng));
}

inline ComplexMatrix random_density(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> d(0.0, 1.0);
    ComplexMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {d(rng), d(rng)};
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    return 0.5 * (rho + rho.adjoint());
}

inline RankVector random_rank(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    RealVector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = u(rng);
    return RankVector(v / v.sum());
}

// Stationary vector from the overdetermined system [G - I; 1^T] p = [0; 1],
// solved in the least-squares sense by Householder QR.
inline RealVector stationary_oracle(const RealMatrix& g) {
    const auto n = g.rows();
    RealMatrix a(n + 1, n);
    a.topRows(n) = g - RealMatrix::Identity(n, n);
    a.row(n).setOnes();
    RealVector b = RealVector::Zero(n + 1);
    b(n) = 1.0;
    return a.colPivHouseholderQr().solve(b);
}

// Literal Lindblad sum with explicit jump operators |i><j|.
inline ComplexMatrix lindblad_oracle(const ComplexMatrix& h, const RealMatrix& rates, double eps,
                                     const ComplexMatrix& rho) {
    const auto n = h.rows();
    ComplexMatrix out = complex_t(0.0, -(1.0 - eps)) * (h * rho - rho * h);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            ComplexMatrix l = ComplexMatrix::Zero(n, n);
            l(i, j) = 1.0;
            const ComplexMatrix ldl = l.adjoint() * l;
            out += eps * rates(i, j) * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
        }
    }
    return out;
}

inline double linf(const Eigen::Ref<const ComplexMatrix>& a, const Eigen::Ref<const ComplexMatrix>& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace qrank::testing
