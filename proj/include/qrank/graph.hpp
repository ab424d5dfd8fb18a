#pragma once

// Directed web graphs and the matrices built from them: the hyperlink
// matrix, its dangling-node patch and the Google matrix. All matrices are
// column-stochastic: entry (i, j) is the probability of hopping j -> i.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qrank/common.hpp"

namespace qrank {

inline constexpr real_t kDefaultAlpha = 0.85;
inline constexpr real_t kColumnSumTol = 1e-12;

using Edge = std::pair<std::size_t, std::size_t>; // (source, target)

class WebGraph {
public:
    explicit WebGraph(std::size_t node_count, std::set<Edge> edges = {})
        : node_count_(node_count), edges_(std::move(edges)) {
        if (node_count_ == 0) throw ValidationError("graph must have at least one node");
        for (const auto& [s, t] : edges_) {
            if (s >= node_count_ || t >= node_count_) {
                throw ValidationError("edge (" + std::to_string(s) + ", " + std::to_string(t) +
                                      ") has an endpoint outside [0, " +
                                      std::to_string(node_count_) + ")");
            }
        }
    }

    std::size_t node_count() const noexcept { return node_count_; }
    const std::set<Edge>& edges() const noexcept { return edges_; }

    std::size_t out_degree(std::size_t node) const {
        return static_cast<std::size_t>(std::count_if(
            edges_.begin(), edges_.end(), [node](const Edge& e) { return e.first == node; }));
    }

    // Pages linking to `node`.
    std::vector<std::size_t> backlinks(std::size_t node) const {
        std::vector<std::size_t> out;
        for (const auto& [s, t] : edges_)
            if (t == node) out.push_back(s);
        return out;
    }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    void set_labels(std::vector<std::string> labels) {
        if (!labels.empty() && labels.size() != node_count_)
            throw ValidationError("label count does not match node count");
        labels_ = std::move(labels);
    }

    friend bool operator==(const WebGraph& a, const WebGraph& b) {
        return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
    }

private:
    std::size_t node_count_;
    std::set<Edge> edges_;
    std::vector<std::string> labels_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::size_t parse_node_id(std::string_view tok, std::size_t line) {
    if (!tok.empty() && tok.front() == '-') {
        long long v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec == std::errc{} && p == tok.data() + tok.size())
            throw ParseError(line, "negative node id '" + std::string(tok) + "'");
        throw ParseError(line, "malformed integer '" + std::string(tok) + "'");
    }
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError(line, "malformed integer '" + std::string(tok) + "'");
    return v;
}

} // namespace detail

// Grammar: '#' comment lines, blank lines, an optional leading "nodes N"
// header, then one "source target" pair per line.
inline WebGraph parse_edge_list(std::istream& in) {
    std::optional<std::size_t> declared;
    std::set<Edge> edges;
    std::size_t max_id = 0;
    bool any_edge = false;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto tok = detail::split_ws(line);
        if (tok[0] == "nodes") {
            if (tok.size() != 2) throw ParseError(line_no, "expected 'nodes N'");
            if (declared) throw ParseError(line_no, "duplicate 'nodes' header");
            if (any_edge) throw ParseError(line_no, "'nodes' header must precede edges");
            declared = detail::parse_node_id(tok[1], line_no);
            if (*declared == 0) throw ParseError(line_no, "node count must be positive");
            continue;
        }
        if (tok.size() != 2)
            throw ParseError(line_no, "expected 'source target', got '" + std::string(line) + "'");
        const auto s = detail::parse_node_id(tok[0], line_no);
        const auto t = detail::parse_node_id(tok[1], line_no);
        if (declared && (s >= *declared || t >= *declared)) {
            throw ValidationError("line " + std::to_string(line_no) + ": edge endpoint exceeds declared node count " +
                                  std::to_string(*declared));
        }
        edges.emplace(s, t);
        max_id = std::max({max_id, s, t});
        any_edge = true;
    }
    if (declared) return WebGraph(*declared, std::move(edges));
    if (!any_edge) throw ValidationError("edge list is empty and has no 'nodes' header");
    return WebGraph(max_id + 1, std::move(edges));
}

inline WebGraph parse_edge_list(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_edge_list(in);
}

inline void serialize_edge_list(std::ostream& os, const WebGraph& g) {
    os << "nodes " << g.node_count() << '\n';
    for (const auto& [s, t] : g.edges()) os << s << ' ' << t << '\n';
}

inline std::string serialize_edge_list(const WebGraph& g) {
    std::ostringstream os;
    serialize_edge_list(os, g);
    return os.str();
}

// H_ij = 1/outdeg(j) when j links to i; dangling columns stay zero.
inline RealMatrix hyperlink_matrix(const WebGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    std::vector<std::size_t> outdeg(g.node_count(), 0);
    for (const auto& e : g.edges()) ++outdeg[e.first];

    RealMatrix h = RealMatrix::Zero(n, n);
    for (const auto& [s, t] : g.edges())
        h(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = 1.0 / static_cast<real_t>(outdeg[s]);
    return h;
}

// Column-stochastic real matrix. Immutable after validation.
class StochasticMatrix {
public:
    explicit StochasticMatrix(RealMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw ValidationError("stochastic matrix must be square and non-empty");
        for (Eigen::Index j = 0; j < m_.cols(); ++j) {
            for (Eigen::Index i = 0; i < m_.rows(); ++i) {
                const real_t v = m_(i, j);
                if (!(v >= 0.0 && v <= 1.0))
                    throw ValidationError("stochastic matrix entry (" + std::to_string(i) + ", " +
                                          std::to_string(j) + ") = " + format_real(v) + " outside [0, 1]");
            }
            const real_t s = m_.col(j).sum();
            if (std::abs(s - 1.0) > kColumnSumTol)
                throw ValidationError("column " + std::to_string(j) + " sums to " + format_real(s));
        }
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const RealMatrix& matrix() const noexcept { return m_; }

private:
    RealMatrix m_;
};

// Replaces every zero column with the uniform column 1/N.
inline StochasticMatrix patch_dangling(const RealMatrix& h) {
    if (h.rows() != h.cols() || h.rows() == 0) throw ValidationError("hyperlink matrix must be square and non-empty");
    const auto n = h.rows();
    RealMatrix e = h;
    for (Eigen::Index j = 0; j < n; ++j) {
        const real_t s = h.col(j).sum();
        if (std::abs(s) <= kColumnSumTol && h.col(j).cwiseAbs().maxCoeff() <= kColumnSumTol) {
            e.col(j).setConstant(1.0 / static_cast<real_t>(n));
        } else if (std::abs(s - 1.0) > kColumnSumTol) {
            throw ValidationError("column " + std::to_string(j) + " sums to " + format_real(s) +
                                  ", expected 0 or 1");
        }
    }
    return StochasticMatrix(std::move(e));
}

class GoogleMatrix {
public:
    GoogleMatrix(StochasticMatrix g, real_t alpha) : g_(std::move(g)), alpha_(alpha) {}

    std::size_t dim() const noexcept { return g_.dim(); }
    real_t alpha() const noexcept { return alpha_; }
    const RealMatrix& matrix() const noexcept { return g_.matrix(); }
    const StochasticMatrix& stochastic() const noexcept { return g_; }

private:
    StochasticMatrix g_;
    real_t alpha_;
};

// G = alpha E + (1 - alpha)/N * ones.
inline GoogleMatrix google_matrix(const StochasticMatrix& e, real_t alpha = kDefaultAlpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha = " + format_real(alpha) + " outside [0, 1]");
    const auto n = static_cast<real_t>(e.dim());
    RealMatrix g = (alpha * e.matrix()).array() + (1.0 - alpha) / n;
    return GoogleMatrix(StochasticMatrix(std::move(g)), alpha);
}

inline GoogleMatrix google_matrix(const WebGraph& graph, real_t alpha = kDefaultAlpha) {
    return google_matrix(patch_dangling(hyperlink_matrix(graph)), alpha);
}

// Row-major CSV, 17 significant digits.
template <typename Derived>
void write_matrix_csv(std::ostream& os, const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_real(m(i, j));
        }
        os << '\n';
    }
}

} // namespace qrank
