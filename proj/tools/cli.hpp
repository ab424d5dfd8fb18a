#pragma once

// qrank command-line driver.
//
// Exit codes: 0 success, 1 internal/numerical failure, 2 parse or validation
// error, 3 non-convergence, 4 solver disagreement, 5 non-unique steady state,
// 6 superoperator size cap exceeded, 7 boundary contamination.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qrank/io.hpp"
#include "qrank/qrank.hpp"

namespace qrank::cli {

namespace fs = std::filesystem;
using json = io::json;

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInvalid = 2,
    kNotConverged = 3,
    kDisagreement = 4,
    kNonUnique = 5,
    kSizeCap = 6,
    kBoundary = 7,
};

inline constexpr real_t kSolverAgreementTol = 1e-5;

struct RunConfig {
    std::string graph;
    real_t alpha = kDefaultAlpha;
    std::vector<real_t> epsilons{0.5};
    std::string hamiltonian = "symmetrized";
    std::string solver = "integrate";
    real_t dt = kDefaultDt;
    real_t tol = kDefaultSteadyTol;
    real_t classical_tol = 1e-12;
    std::size_t max_iter = 10000;
    real_t t_max = kDefaultTMax;
    std::string out = ".";
    std::string format = "csv";
    std::uint64_t seed = 0;
    std::size_t snapshot_stride = 0;

    // lattice
    std::size_t sites = 41;
    std::vector<real_t> beta;
    std::vector<real_t> coupling;
    std::string boundary = "open";
    real_t z = 1.0;
    long site = -1;
    long site_b = -1;
    std::vector<real_t> times{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    std::string model = "unitary";
    real_t edge_tol = kEdgeTolerance;

    // fixtures
    std::size_t count = 25;
    std::size_t min_nodes = 2;
    std::size_t max_nodes = 8;
    real_t edge_prob = 0.3;
};

//----------------------------------------------------------------------------
// Helpers
//----------------------------------------------------------------------------

inline std::string join(const std::vector<real_t>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_real(v[k]);
    return s;
}

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Effective parameters of one command, embedded in every output file.
// The output directory is deliberately left out so runs into different
// directories stay byte-comparable.
inline ConfigEntries effective_config(const RunConfig& c, const std::string& command) {
    ConfigEntries e{{"command", command}};
    if (command == "rank-classical" || command == "rank-quantum" || command == "spectrum") {
        e.emplace_back("graph", c.graph);
        e.emplace_back("alpha", format_real(c.alpha));
    }
    if (command == "rank-classical") {
        e.emplace_back("classical-tol", format_real(c.classical_tol));
        e.emplace_back("max-iter", std::to_string(c.max_iter));
    }
    if (command == "rank-quantum" || command == "spectrum") {
        e.emplace_back("epsilon", join(c.epsilons));
        e.emplace_back("hamiltonian", c.hamiltonian);
    }
    if (command == "rank-quantum") {
        e.emplace_back("solver", c.solver);
        e.emplace_back("dt", format_real(c.dt));
        e.emplace_back("tol", format_real(c.tol));
        e.emplace_back("t-max", format_real(c.t_max));
        e.emplace_back("snapshot-stride", std::to_string(c.snapshot_stride));
    }
    if (command.rfind("lattice", 0) == 0 || command == "rank-quantum" || command == "spectrum") {
        e.emplace_back("beta", join(c.beta));
        e.emplace_back("coupling", join(c.coupling));
        e.emplace_back("boundary", c.boundary);
    }
    if (command.rfind("lattice", 0) == 0) {
        e.emplace_back("sites", std::to_string(c.sites));
        e.emplace_back("z", format_real(c.z));
        e.emplace_back("site", std::to_string(c.site));
        e.emplace_back("site-b", std::to_string(c.site_b));
        e.emplace_back("times", join(c.times));
        e.emplace_back("model", c.model);
        e.emplace_back("dt", format_real(c.dt));
        e.emplace_back("edge-tol", format_real(c.edge_tol));
    }
    if (command == "fixtures generate") {
        e.emplace_back("seed", std::to_string(c.seed));
        e.emplace_back("count", std::to_string(c.count));
        e.emplace_back("min-nodes", std::to_string(c.min_nodes));
        e.emplace_back("max-nodes", std::to_string(c.max_nodes));
        e.emplace_back("edge-prob", format_real(c.edge_prob));
    }
    e.emplace_back("format", c.format);
    return e;
}

inline std::string config_comment(const ConfigEntries& cfg) {
    std::string s;
    for (const auto& [k, v] : cfg) s += "# " + k + " = " + v + "\n";
    return s;
}

inline json config_json(const ConfigEntries& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg) j[k] = v;
    return j;
}

inline void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw Error("write to " + path.string() + " failed");
}

inline void write_json(const fs::path& path, const ConfigEntries& cfg, const std::string& key, json payload) {
    json doc = {{"config", config_json(cfg)}, {key, std::move(payload)}};
    write_text(path, doc.dump(2) + "\n");
}

inline WebGraph load_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read graph file '" + path + "'");
    return parse_edge_list(f);
}

inline RealMatrix load_matrix_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read matrix file '" + path + "'");
    std::vector<std::vector<real_t>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<real_t> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw ParseError(line_no, "malformed matrix entry '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    RealMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
            throw ValidationError("matrix file '" + path + "' is not square");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

inline Boundary parse_boundary(const std::string& s) {
    if (s == "open") return Boundary::open;
    if (s == "periodic") return Boundary::periodic;
    throw ValidationError("unknown boundary '" + s + "'");
}

inline LatticeHamiltonian make_lattice(const RunConfig& c, std::size_t sites) {
    const Boundary b = parse_boundary(c.boundary);
    const auto n = static_cast<Eigen::Index>(sites);
    RealVector beta = RealVector::Zero(n);
    if (!c.beta.empty()) beta = Eigen::Map<const RealVector>(c.beta.data(), static_cast<Eigen::Index>(c.beta.size()));
    const Eigen::Index links = b == Boundary::open ? n - 1 : n;
    RealVector coupling = RealVector::Ones(std::max<Eigen::Index>(links, 0));
    if (!c.coupling.empty())
        coupling = Eigen::Map<const RealVector>(c.coupling.data(), static_cast<Eigen::Index>(c.coupling.size()));
    if (beta.size() != n)
        throw ValidationError("beta has " + std::to_string(beta.size()) + " entries, lattice has " +
                              std::to_string(sites) + " sites");
    return tight_binding(std::move(beta), std::move(coupling), b);
}

inline HamiltonianSource make_source(const RunConfig& c, std::size_t n) {
    if (c.hamiltonian == "symmetrized") return SymmetrizedGoogle{};
    if (c.hamiltonian == "lattice") return as_source(make_lattice(c, n));
    const std::string prefix = "custom:";
    if (c.hamiltonian.rfind(prefix, 0) == 0)
        return CustomHamiltonian{load_matrix_csv(c.hamiltonian.substr(prefix.size())).cast<complex_t>()};
    throw ValidationError("unknown hamiltonian source '" + c.hamiltonian + "'");
}

inline void validate_common(const RunConfig& c) {
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
    for (const real_t e : c.epsilons)
        if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("epsilon must lie in [0, 1]");
    if (c.epsilons.empty()) throw ValidationError("at least one epsilon is required");
    if (!(c.dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(c.tol > 0.0) || !(c.classical_tol > 0.0)) throw ValidationError("tolerances must be positive");
    if (!(c.t_max >= 0.0)) throw ValidationError("t-max must be non-negative");
    if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json");
    if (c.solver != "integrate" && c.solver != "kernel" && c.solver != "both")
        throw ValidationError("solver must be integrate, kernel or both");
}

inline void write_ranks(const fs::path& dir, const ConfigEntries& cfg, const std::string& format,
                        const std::vector<RankEntry>& ranking) {
    if (format == "json") {
        write_json(dir / "rank.json", cfg, "ranking", io::rank_json(ranking));
    } else {
        std::ostringstream os;
        os << config_comment(cfg);
        io::write_rank_csv(os, ranking);
        write_text(dir / "rank.csv", os.str());
    }
}

//----------------------------------------------------------------------------
// Commands
//----------------------------------------------------------------------------

inline int cmd_rank_classical(const RunConfig& c) {
    validate_common(c);
    const auto cfg = effective_config(c, "rank-classical");
    const WebGraph g = load_graph(c.graph);
    const GoogleMatrix gm = google_matrix(g, c.alpha);
    const auto trace = power_iterate(gm, RankVector::uniform(g.node_count()), c.classical_tol, c.max_iter);

    const fs::path dir(c.out);
    write_ranks(dir, cfg, c.format, rank_order(trace.final));
    std::ostringstream os;
    os << config_comment(cfg);
    io::write_trace_csv(os, trace);
    write_text(dir / "trace.csv", os.str());
    if (!trace.converged) {
        std::cerr << "power iteration did not converge within " << c.max_iter << " iterations\n";
        return kNotConverged;
    }
    return kOk;
}

inline std::string sweep_dir_name(std::size_t k) {
    std::ostringstream os;
    os << "eps_" << std::setw(3) << std::setfill('0') << k;
    return os.str();
}

inline int cmd_rank_quantum(const RunConfig& c) {
    validate_common(c);
    const auto cfg = effective_config(c, "rank-quantum");
    const WebGraph g = load_graph(c.graph);
    const GoogleMatrix gm = google_matrix(g, c.alpha);
    const std::size_t n = g.node_count();
    const HamiltonianSource source = make_source(c, n);
    const std::size_t cap = superoperator_size_cap();
    if (c.solver != "integrate" && n > cap)
        throw SizeCapError("N = " + std::to_string(n) + " exceeds the superoperator cap of " + std::to_string(cap) +
                           "; use --solver integrate");

    const fs::path root(c.out);
    json manifest = json::array();
    int status = kOk;
    for (std::size_t k = 0; k < c.epsilons.size(); ++k) {
        const real_t eps = c.epsilons[k];
        const std::string sub = sweep_dir_name(k);
        const fs::path dir = root / sub;
        const Liouvillian l = build_liouvillian(source, gm, eps);
        const DensityMatrix rho0 = initial_state(n);

        json summary = {{"epsilon", eps}, {"solver", c.solver}};
        int entry_status = kOk;
        std::optional<DensityMatrix> state;

        std::optional<SteadyStateResult> by_integration;
        if (c.solver != "kernel") {
            by_integration = steady_state_by_integration(l, rho0, c.tol, c.t_max, c.dt);
            summary["integration_converged"] = by_integration->converged;
            summary["integration_time"] = by_integration->time;
            state = by_integration->state;
            if (!by_integration->converged) entry_status = kNotConverged;
            if (c.snapshot_stride > 0) {
                const auto snaps = integrate(l, rho0, by_integration->time, {c.dt, c.snapshot_stride});
                if (c.format == "json") {
                    write_json(dir / "snapshots.json", cfg, "snapshots", io::snapshots_json(snaps));
                } else {
                    std::ostringstream os;
                    os << config_comment(cfg);
                    io::write_snapshots_csv(os, snaps);
                    write_text(dir / "snapshots.csv", os.str());
                }
            }
        }
        if (c.solver != "integrate") {
            try {
                const DensityMatrix kstate = steady_state_by_kernel(l, cap);
                if (by_integration) {
                    const real_t diff = max_abs(kstate.matrix() - by_integration->state.matrix());
                    summary["solver_disagreement"] = diff;
                    if (diff > kSolverAgreementTol && entry_status == kOk) entry_status = kDisagreement;
                } else {
                    state = kstate;
                }
            } catch (const NonUniqueError& e) {
                summary["error"] = e.what();
                if (c.solver == "kernel" || entry_status == kOk) entry_status = kNonUnique;
            }
        }
        if (n <= cap) {
            const SpectrumReport rep = spectrum(vectorize(l, cap));
            summary["kernel_dimension"] = rep.kernel_dimension;
            summary["spectral_gap"] = rep.spectral_gap;
        } else {
            summary["kernel_dimension"] = nullptr;
            summary["spectral_gap"] = nullptr;
        }
        if (state) {
            summary["generator_residual"] = max_abs(apply_generator(l, *state));
            write_ranks(dir, cfg, c.format, rank_order(quantum_pagerank(*state)));
        }
        summary["exit_code"] = entry_status;
        write_json(dir / "summary.json", cfg, "summary", summary);

        manifest.push_back({{"epsilon", eps},
                            {"directory", sub},
                            {"rank_file", state ? sub + (c.format == "json" ? "/rank.json" : "/rank.csv") : ""},
                            {"summary_file", sub + "/summary.json"},
                            {"exit_code", entry_status}});
        if (status == kOk) status = entry_status;
        if (entry_status != kOk)
            std::cerr << "epsilon " << format_real(eps) << ": exit " << entry_status
                      << (summary.contains("error") ? " (" + summary["error"].get<std::string>() + ")" : "") << '\n';
    }
    write_json(root / "manifest.json", cfg, "entries", manifest);
    return status;
}

inline int cmd_spectrum(const RunConfig& c) {
    validate_common(c);
    const auto cfg = effective_config(c, "spectrum");
    const WebGraph g = load_graph(c.graph);
    const GoogleMatrix gm = google_matrix(g, c.alpha);
    const HamiltonianSource source = make_source(c, g.node_count());
    const std::size_t cap = superoperator_size_cap();

    json reports = json::array();
    std::string eig_csv = config_comment(cfg) + "epsilon,re,im\n";
    for (const real_t eps : c.epsilons) {
        const Liouvillian l = build_liouvillian(source, gm, eps);
        const SpectrumReport rep = spectrum(vectorize(l, cap));
        json r = io::spectrum_json(rep);
        r["epsilon"] = eps;
        reports.push_back(std::move(r));
        for (const complex_t z : rep.eigenvalues)
            eig_csv += format_real(eps) + "," + format_real(z.real()) + "," + format_real(z.imag()) + "\n";
    }
    const fs::path dir(c.out);
    write_json(dir / "spectrum.json", cfg, "spectra", reports);
    if (c.format == "csv") write_text(dir / "eigenvalues.csv", eig_csv);
    return kOk;
}

inline std::size_t resolve_site(long site, std::size_t n) {
    if (site < 0) return n / 2;
    return static_cast<std::size_t>(site);
}

inline int cmd_lattice(const RunConfig& c, const std::string& what) {
    if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json");
    const auto cfg = effective_config(c, "lattice " + what);
    const LatticeHamiltonian h = make_lattice(c, c.sites);
    const fs::path dir(c.out);
    const std::size_t a = resolve_site(c.site, c.sites);

    if (what == "dist") {
        const RankVector p = single_photon_distribution(propagator(h, c.z), a);
        if (c.format == "json") {
            write_json(dir / "distribution.json", cfg, "distribution",
                       std::vector<real_t>(p.values().begin(), p.values().end()));
        } else {
            std::ostringstream os;
            os << config_comment(cfg);
            io::write_distribution_csv(os, p);
            write_text(dir / "distribution.csv", os.str());
        }
        return kOk;
    }
    if (what == "corr") {
        const std::size_t b = c.site_b < 0 ? a : static_cast<std::size_t>(c.site_b);
        const RealMatrix gamma = two_photon_correlation(propagator(h, c.z), a, b);
        if (c.format == "json") {
            json rows = json::array();
            for (Eigen::Index q = 0; q < gamma.rows(); ++q) {
                const RealVector row = gamma.row(q).transpose();
                rows.push_back(std::vector<real_t>(row.begin(), row.end()));
            }
            write_json(dir / "correlation.json", cfg, "correlation", rows);
        } else {
            std::ostringstream os;
            os << config_comment(cfg);
            io::write_correlation_csv(os, gamma);
            write_text(dir / "correlation.csv", os.str());
        }
        return kOk;
    }
    if (what == "spread") {
        SpreadResult res;
        if (c.model == "unitary") {
            res = spread_exponent(h, a, c.times, c.edge_tol);
        } else if (c.model == "dissipative") {
            // Classical limit: eps = 1 walk along the chain's own links.
            const GoogleMatrix line = google_matrix(line_graph(c.sites), 1.0);
            const Liouvillian l = build_liouvillian(as_source(h), line, 1.0);
            res = spread_exponent(l, a, c.times, c.dt, c.edge_tol);
        } else {
            throw ValidationError("model must be unitary or dissipative");
        }
        std::ostringstream os;
        os << config_comment(cfg);
        io::write_spread_csv(os, res);
        write_text(dir / "spread.csv", os.str());
        write_json(dir / "spread.json", cfg, "spread", io::spread_json(res));
        return kOk;
    }
    throw ValidationError("unknown lattice command '" + what + "'");
}

inline WebGraph random_graph(std::mt19937_64& rng, std::size_t min_nodes, std::size_t max_nodes, real_t edge_prob) {
    std::uniform_int_distribution<std::size_t> size(min_nodes, max_nodes);
    std::bernoulli_distribution link(edge_prob);
    const std::size_t n = size(rng);
    std::set<Edge> edges;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t)
            if (s != t && link(rng)) edges.emplace(s, t);
    return WebGraph(n, std::move(edges));
}

// The 4-node reference graph used across the test suites.
inline WebGraph reference_graph() { return WebGraph(4, {{0, 1}, {1, 2}, {2, 0}, {3, 0}}); }

inline int cmd_fixtures(const RunConfig& c) {
    if (c.min_nodes < 1 || c.min_nodes > c.max_nodes) throw ValidationError("invalid node range");
    if (!(c.edge_prob >= 0.0 && c.edge_prob <= 1.0)) throw ValidationError("edge-prob must lie in [0, 1]");
    const auto cfg = effective_config(c, "fixtures generate");
    const fs::path dir(c.out);
    std::mt19937_64 rng(c.seed);
    for (std::size_t k = 0; k < c.count; ++k) {
        std::ostringstream name;
        name << "graph_" << std::setw(3) << std::setfill('0') << k << ".txt";
        write_text(dir / name.str(), config_comment(cfg) + serialize_edge_list(random_graph(rng, c.min_nodes,
                                                                                              c.max_nodes, c.edge_prob)));
    }
    write_text(dir / "reference_4node.txt", "# reference graph\n" + serialize_edge_list(reference_graph()));
    return kOk;
}

//----------------------------------------------------------------------------
// Config file: flat "key = value" lines; command-line flags win.
//----------------------------------------------------------------------------

inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(f, raw)) {
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value' in config file");
        out.emplace_back(std::string(detail::trim(line.substr(0, eq))), std::string(detail::trim(line.substr(eq + 1))));
    }
    return out;
}

inline void apply_config(CLI::App& sub, const std::vector<std::pair<std::string, std::string>>& entries) {
    for (const auto& [key, value] : entries) {
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (!opt) throw ValidationError("config key '" + key + "' is not an option of this command");
        if (opt->count() > 0) continue;
        opt->clear();
        if (opt->get_items_expected_max() > 1) {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) opt->add_result(std::string(detail::trim(item)));
        } else {
            opt->add_result(value);
        }
        opt->run_callback();
    }
}

inline int run(std::vector<std::string> args) {
    RunConfig c;
    std::string config_path;
    CLI::App app{"Classical and quantum PageRank simulator", "qrank"};
    app.require_subcommand(1);

    auto add_graph_opts = [&](CLI::App* s) {
        s->add_option("graph", c.graph, "Edge-list file")->required();
        s->add_option("--alpha", c.alpha, "Damping parameter");
        s->add_option("--format", c.format, "csv or json");
        s->add_option("--out", c.out, "Output directory");
        s->add_option("--config", config_path, "Flat key = value config file");
    };
    auto add_quantum_opts = [&](CLI::App* s) {
        s->add_option("--epsilon", c.epsilons, "Decoherence mixing (repeatable)")->delimiter(',');
        s->add_option("--hamiltonian", c.hamiltonian, "symmetrized | lattice | custom:<file>");
        s->add_option("--beta", c.beta, "Lattice propagation constants")->delimiter(',');
        s->add_option("--coupling", c.coupling, "Lattice couplings")->delimiter(',');
        s->add_option("--boundary", c.boundary, "open or periodic");
    };

    auto* classical = app.add_subcommand("rank-classical", "Classical PageRank by power iteration");
    add_graph_opts(classical);
    classical->add_option("--tol", c.classical_tol, "L1 convergence tolerance");
    classical->add_option("--max-iter", c.max_iter, "Iteration limit");

    auto* quantum = app.add_subcommand("rank-quantum", "Quantum PageRank from the stationary density matrix");
    add_graph_opts(quantum);
    add_quantum_opts(quantum);
    quantum->add_option("--solver", c.solver, "integrate | kernel | both");
    quantum->add_option("--dt", c.dt, "RK4 step");
    quantum->add_option("--tol", c.tol, "Stationarity tolerance on ||L rho||_inf");
    quantum->add_option("--t-max", c.t_max, "Integration horizon");
    quantum->add_option("--seed", c.seed, "Random seed (unused by deterministic solvers)");
    quantum->add_option("--snapshot-stride", c.snapshot_stride, "Write every k-th integration step (0 = off)");

    auto* spec = app.add_subcommand("spectrum", "Liouvillian spectrum and steady-state diagnostics");
    add_graph_opts(spec);
    add_quantum_opts(spec);

    auto* lattice = app.add_subcommand("lattice", "Waveguide lattice experiments");
    lattice->require_subcommand(1);
    std::string lattice_cmd;
    for (const std::string name : {"dist", "corr", "spread"}) {
        auto* s = lattice->add_subcommand(name, "lattice " + name);
        s->add_option("--sites", c.sites, "Number of waveguides");
        s->add_option("--beta", c.beta, "Propagation constants")->delimiter(',');
        s->add_option("--coupling", c.coupling, "Nearest-neighbour couplings")->delimiter(',');
        s->add_option("--boundary", c.boundary, "open or periodic");
        s->add_option("--z", c.z, "Propagation length");
        s->add_option("--site", c.site, "Input site (default: centre)");
        s->add_option("--site-b", c.site_b, "Second photon input site");
        s->add_option("--times", c.times, "Sample times for the spread fit")->delimiter(',');
        s->add_option("--model", c.model, "unitary or dissipative");
        s->add_option("--dt", c.dt, "RK4 step for the dissipative model");
        s->add_option("--edge-tol", c.edge_tol, "Boundary contamination threshold");
        s->add_option("--format", c.format, "csv or json");
        s->add_option("--out", c.out, "Output directory");
        s->add_option("--config", config_path, "Flat key = value config file");
        s->callback([&lattice_cmd, name] { lattice_cmd = name; });
    }

    auto* fixtures = app.add_subcommand("fixtures", "Random graph fixtures");
    fixtures->require_subcommand(1);
    auto* generate = fixtures->add_subcommand("generate", "Write random edge-list files");
    generate->add_option("--seed", c.seed, "RNG seed");
    generate->add_option("--count", c.count, "Number of graphs");
    generate->add_option("--min-nodes", c.min_nodes, "Smallest graph");
    generate->add_option("--max-nodes", c.max_nodes, "Largest graph");
    generate->add_option("--edge-prob", c.edge_prob, "Independent link probability");
    generate->add_option("--out", c.out, "Output directory");
    generate->add_option("--config", config_path, "Flat key = value config file");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        CLI::App* active = nullptr;
        for (CLI::App* s : {classical, quantum, spec, generate}) if (s->parsed()) active = s;
        if (lattice->parsed()) active = lattice->get_subcommand(lattice_cmd);
        if (!config_path.empty()) apply_config(*active, read_config_file(config_path));

        if (classical->parsed()) return cmd_rank_classical(c);
        if (quantum->parsed()) return cmd_rank_quantum(c);
        if (spec->parsed()) return cmd_spectrum(c);
        if (lattice->parsed()) return cmd_lattice(c, lattice_cmd);
        if (generate->parsed()) return cmd_fixtures(c);
        return kInvalid;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kInvalid;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kInvalid;
    } catch (const NonUniqueError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNonUnique;
    } catch (const SizeCapError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSizeCap;
    } catch (const BoundaryContaminationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBoundary;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return run(std::move(args));
}

} // namespace qrank::cli
