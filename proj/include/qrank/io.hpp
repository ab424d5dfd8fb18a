#pragma once

// CSV and JSON renderings of ranks, traces, snapshots, spectra and lattice
// observables. CSV reals are written with 17 significant digits.

#include <ostream>
#include <vector>

#include <json.hpp>

#include "qrank/classical.hpp"
#include "qrank/common.hpp"
#include "qrank/lattice.hpp"
#include "qrank/quantum.hpp"
#include "qrank/spectral.hpp"

namespace qrank::io {

using json = nlohmann::ordered_json;

inline void write_rank_csv(std::ostream& os, const std::vector<RankEntry>& ranking) {
    os << "node,score,rank\n";
    for (const auto& e : ranking) os << e.node << ',' << format_real(e.score) << ',' << e.rank << '\n';
}

inline json rank_json(const std::vector<RankEntry>& ranking) {
    json arr = json::array();
    for (const auto& e : ranking) arr.push_back({{"node", e.node}, {"score", e.score}, {"rank", e.rank}});
    return arr;
}

inline void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace) {
    os << "step,residual\n";
    for (const auto& p : trace.iterates) os << format_real(p.at) << ',' << format_real(p.residual) << '\n';
}

inline constexpr real_t kSnapshotCutoff = 1e-14;

// Sparse: only entries with magnitude above 1e-14.
inline void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snaps) {
    os << "t,i,j,re,im\n";
    for (const auto& s : snaps) {
        const auto& m = s.state.matrix();
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (std::abs(m(i, j)) > kSnapshotCutoff)
                    os << format_real(s.time) << ',' << i << ',' << j << ',' << format_real(m(i, j).real()) << ','
                       << format_real(m(i, j).imag()) << '\n';
    }
}

inline json snapshots_json(const std::vector<Snapshot>& snaps) {
    json arr = json::array();
    for (const auto& s : snaps) {
        json entries = json::array();
        const auto& m = s.state.matrix();
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (std::abs(m(i, j)) > kSnapshotCutoff) entries.push_back({i, j, m(i, j).real(), m(i, j).imag()});
        arr.push_back({{"t", s.time}, {"entries", std::move(entries)}});
    }
    return arr;
}

inline json spectrum_json(const SpectrumReport& rep) {
    json ev = json::array();
    for (const complex_t z : rep.eigenvalues) ev.push_back({z.real(), z.imag()});
    return {{"eigenvalues", std::move(ev)},
            {"max_real_part", rep.max_real_part},
            {"max_real_part_ok", rep.max_real_part <= 1e-10},
            {"spectral_gap", rep.spectral_gap},
            {"kernel_dimension", rep.kernel_dimension}};
}

inline void write_eigenvalues_csv(std::ostream& os, const SpectrumReport& rep) {
    os << "re,im\n";
    for (const complex_t z : rep.eigenvalues) os << format_real(z.real()) << ',' << format_real(z.imag()) << '\n';
}

inline void write_distribution_csv(std::ostream& os, const RankVector& p) {
    os << "site,p\n";
    for (std::size_t q = 0; q < p.dim(); ++q) os << q << ',' << format_real(p[q]) << '\n';
}

inline void write_correlation_csv(std::ostream& os, const RealMatrix& gamma) {
    os << "q,r,gamma\n";
    for (Eigen::Index q = 0; q < gamma.rows(); ++q)
        for (Eigen::Index r = 0; r < gamma.cols(); ++r) os << q << ',' << r << ',' << format_real(gamma(q, r)) << '\n';
}

inline void write_spread_csv(std::ostream& os, const SpreadResult& s) {
    os << "t,variance\n";
    for (std::size_t k = 0; k < s.times.size(); ++k)
        os << format_real(s.times[k]) << ',' << format_real(s.variances[k]) << '\n';
}

inline json spread_json(const SpreadResult& s) {
    return {{"times", s.times}, {"variances", s.variances}, {"exponent", s.exponent}};
}

} // namespace qrank::io
