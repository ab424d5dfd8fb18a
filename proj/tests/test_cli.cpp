#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"

using namespace qrank;
namespace fs = std::filesystem;
namespace qt = qrank::testing;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root_ = fs::temp_directory_path() / (std::string("qrank_cli_") + info->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
        graph_ = write("four.txt", serialize_edge_list(qt::four_node_graph()));
    }
    void TearDown() override { fs::remove_all(root_); }

    std::string write(const std::string& name, const std::string& text) {
        const fs::path p = root_ / name;
        std::ofstream(p) << text;
        return p.string();
    }
    std::string dir(const std::string& name) const { return (root_ / name).string(); }

    fs::path root_;
    std::string graph_;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// node -> score from a rank.csv, skipping comment lines and the header row.
std::map<std::size_t, double> read_scores(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    std::map<std::size_t, double> out;
    bool header = true;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            EXPECT_EQ(line, "node,score,rank");
            header = false;
            continue;
        }
        std::stringstream ss(line);
        std::string node, score;
        std::getline(ss, node, ',');
        std::getline(ss, score, ',');
        out[std::stoul(node)] = std::stod(score);
    }
    return out;
}

int run(std::vector<std::string> args) { return cli::run(std::move(args)); }

} // namespace

TEST_F(CliTest, ClassicalRank) {
    ASSERT_EQ(run({"rank-classical", graph_, "--out", dir("c")}), cli::kOk);
    const auto s = read_scores(root_ / "c" / "rank.csv");
    ASSERT_EQ(s.size(), 4u);
    const RealVector want = qt::stationary_oracle(google_matrix(qt::four_node_graph(), 0.85).matrix());
    for (const auto& [node, score] : s) EXPECT_NEAR(score, want[static_cast<Eigen::Index>(node)], 1e-10);
    const std::string trace = slurp(root_ / "c" / "trace.csv");
    EXPECT_NE(trace.find("# command = rank-classical"), std::string::npos);
    EXPECT_NE(trace.find("step,residual"), std::string::npos);
}

TEST_F(CliTest, QuantumAtFullDecoherenceMatchesClassical) {
    ASSERT_EQ(run({"rank-classical", graph_, "--out", dir("c")}), cli::kOk);
    ASSERT_EQ(run({"rank-quantum", graph_, "--epsilon", "1", "--solver", "both", "--out", dir("q")}), cli::kOk);
    const auto c = read_scores(root_ / "c" / "rank.csv");
    const auto q = read_scores(root_ / "q" / "eps_000" / "rank.csv");
    ASSERT_EQ(c.size(), q.size());
    for (const auto& [node, score] : c) EXPECT_NEAR(q.at(node), score, 1e-8);
}

TEST_F(CliTest, SweepManifest) {
    ASSERT_EQ(run({"rank-quantum", graph_, "--epsilon", "0.2,0.5,0.8", "--format", "json", "--out", dir("s")}),
              cli::kOk);
    const auto m = nlohmann::json::parse(slurp(root_ / "s" / "manifest.json"));
    ASSERT_EQ(m["entries"].size(), 3u);
    EXPECT_EQ(m["config"]["epsilon"], "0.20000000000000001,0.5,0.80000000000000004");
    for (const auto& e : m["entries"]) {
        EXPECT_EQ(e["exit_code"], 0);
        EXPECT_TRUE(fs::exists(root_ / "s" / e["rank_file"].get<std::string>()));
        const auto summary = nlohmann::json::parse(slurp(root_ / "s" / e["summary_file"].get<std::string>()));
        EXPECT_EQ(summary["summary"]["kernel_dimension"], 1);
    }
}

TEST_F(CliTest, Deterministic) {
    const std::vector<std::string> common{"rank-quantum", graph_, "--epsilon", "0.3,0.9", "--solver", "both",
                                          "--snapshot-stride", "500"};
    auto a = common, b = common;
    a.insert(a.end(), {"--out", dir("a")});
    b.insert(b.end(), {"--out", dir("b")});
    ASSERT_EQ(run(a), cli::kOk);
    ASSERT_EQ(run(b), cli::kOk);
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root_ / "a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), root_ / "a");
        EXPECT_EQ(slurp(entry.path()), slurp(root_ / "b" / rel)) << rel;
        ++files;
    }
    EXPECT_GE(files, 7u);
}

TEST_F(CliTest, ParseAndValidationErrors) {
    EXPECT_EQ(run({"rank-classical", dir("missing.txt")}), cli::kInvalid);
    EXPECT_EQ(run({"rank-classical", write("bad.txt", "0 1\n1 x\n")}), cli::kInvalid);
    EXPECT_EQ(run({"rank-classical", graph_, "--alpha", "1.5"}), cli::kInvalid);
    EXPECT_EQ(run({"rank-quantum", graph_, "--solver", "magic"}), cli::kInvalid);
    EXPECT_EQ(run({"rank-quantum", graph_, "--hamiltonian", "nope"}), cli::kInvalid);
    EXPECT_EQ(run({"no-such-command"}), cli::kInvalid);
    EXPECT_EQ(run({"rank-classical", graph_, "--bogus"}), cli::kInvalid);
}

TEST_F(CliTest, NonConvergence) {
    EXPECT_EQ(run({"rank-classical", graph_, "--max-iter", "3", "--out", dir("c")}), cli::kNotConverged);
    EXPECT_TRUE(fs::exists(root_ / "c" / "trace.csv"));
    EXPECT_EQ(run({"rank-quantum", graph_, "--t-max", "0.5", "--out", dir("q")}), cli::kNotConverged);
}

TEST_F(CliTest, SolverDisagreement) {
    // A loose stationarity tolerance stops integration far from the kernel state.
    EXPECT_EQ(run({"rank-quantum", graph_, "--solver", "both", "--tol", "1e-2", "--out", dir("q")}),
              cli::kDisagreement);
    const auto s = nlohmann::json::parse(slurp(root_ / "q" / "eps_000" / "summary.json"));
    EXPECT_GT(s["summary"]["solver_disagreement"].get<double>(), 1e-5);
}

TEST_F(CliTest, NonUniqueAtZeroDecoherence) {
    EXPECT_EQ(run({"rank-quantum", graph_, "--epsilon", "0", "--solver", "kernel", "--out", dir("q")}),
              cli::kNonUnique);
    const auto s = nlohmann::json::parse(slurp(root_ / "q" / "eps_000" / "summary.json"));
    EXPECT_EQ(s["summary"]["kernel_dimension"], 4);
}

TEST_F(CliTest, SizeCap) {
    std::mt19937_64 rng(5);
    const std::string big = write("big.txt", serialize_edge_list(qt::random_graph(rng, 12)));
    ::setenv("QRANK_SIZE_CAP", "8", 1);
    EXPECT_EQ(run({"rank-quantum", big, "--solver", "kernel", "--out", dir("k")}), cli::kSizeCap);
    EXPECT_EQ(run({"spectrum", big, "--out", dir("s")}), cli::kSizeCap);
    // Integration alone is not capped.
    EXPECT_EQ(run({"rank-quantum", big, "--out", dir("i")}), cli::kOk);
    ::unsetenv("QRANK_SIZE_CAP");
}

TEST_F(CliTest, Spectrum) {
    ASSERT_EQ(run({"spectrum", graph_, "--epsilon", "0.5,1", "--out", dir("s")}), cli::kOk);
    const auto j = nlohmann::json::parse(slurp(root_ / "s" / "spectrum.json"));
    ASSERT_EQ(j["spectra"].size(), 2u);
    for (const auto& r : j["spectra"]) {
        EXPECT_TRUE(r["max_real_part_ok"].get<bool>());
        EXPECT_EQ(r["kernel_dimension"], 1);
        EXPECT_EQ(r["eigenvalues"].size(), 16u);
        EXPECT_GT(r["spectral_gap"].get<double>(), 0.0);
    }
    EXPECT_TRUE(fs::exists(root_ / "s" / "eigenvalues.csv"));
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
    const std::string cfg = write("run.cfg", "# sweep\nalpha = 0.5\nepsilon = 0.25, 0.75\nsolver = kernel\n");
    ASSERT_EQ(run({"rank-quantum", graph_, "--config", cfg, "--alpha", "0.9", "--out", dir("q")}), cli::kOk);
    const std::string rank = slurp(root_ / "q" / "eps_001" / "rank.csv");
    EXPECT_NE(rank.find("# alpha = 0.90000000000000002\n"), std::string::npos);
    EXPECT_NE(rank.find("# epsilon = 0.25,0.75\n"), std::string::npos);
    EXPECT_NE(rank.find("# solver = kernel\n"), std::string::npos);
    EXPECT_EQ(run({"rank-quantum", graph_, "--config", write("bad.cfg", "nonsense = 1\n")}), cli::kInvalid);
}

TEST_F(CliTest, LatticeCouplerAndHongOuMandel) {
    const std::string half = format_real(std::numbers::pi / 2), quarter = format_real(std::numbers::pi / 4);
    ASSERT_EQ(run({"lattice", "dist", "--sites", "2", "--site", "0", "--z", half, "--format", "json", "--out",
                   dir("d")}),
              cli::kOk);
    const auto d = nlohmann::json::parse(slurp(root_ / "d" / "distribution.json"));
    EXPECT_NEAR(d["distribution"][1].get<double>(), 1.0, 1e-10);
    ASSERT_EQ(run({"lattice", "corr", "--sites", "2", "--site", "0", "--site-b", "1", "--z", quarter, "--format",
                   "json", "--out", dir("c")}),
              cli::kOk);
    const auto c = nlohmann::json::parse(slurp(root_ / "c" / "correlation.json"));
    EXPECT_LT(c["correlation"][0][1].get<double>(), 1e-10);
}

TEST_F(CliTest, LatticeSpreadAndBoundary) {
    ASSERT_EQ(run({"lattice", "spread", "--out", dir("u")}), cli::kOk);
    ASSERT_EQ(run({"lattice", "spread", "--model", "dissipative", "--out", dir("d")}), cli::kOk);
    const auto u = nlohmann::json::parse(slurp(root_ / "u" / "spread.json"));
    const auto d = nlohmann::json::parse(slurp(root_ / "d" / "spread.json"));
    EXPECT_NEAR(u["spread"]["exponent"].get<double>(), 2.0, 0.1);
    EXPECT_NEAR(d["spread"]["exponent"].get<double>(), 1.0, 0.1);
    EXPECT_EQ(run({"lattice", "spread", "--sites", "5", "--times", "5,10,20,40", "--out", dir("b")}),
              cli::kBoundary);
}

TEST_F(CliTest, FixturesGenerate) {
    ASSERT_EQ(run({"fixtures", "generate", "--seed", "7", "--count", "5", "--out", dir("f")}), cli::kOk);
    ASSERT_EQ(run({"fixtures", "generate", "--seed", "7", "--count", "5", "--out", dir("g")}), cli::kOk);
    for (int k = 0; k < 5; ++k) {
        const std::string name = "graph_00" + std::to_string(k) + ".txt";
        const std::string text = slurp(root_ / "f" / name);
        EXPECT_EQ(text, slurp(root_ / "g" / name));
        const WebGraph g = parse_edge_list(text);
        EXPECT_GE(g.node_count(), 2u);
        EXPECT_LE(g.node_count(), 8u);
    }
    EXPECT_EQ(parse_edge_list(slurp(root_ / "f" / "reference_4node.txt")), qt::four_node_graph());
}

TEST_F(CliTest, BinaryExitStatus) {
    const std::string ok = std::string(QRANK_CLI_PATH) + " rank-classical " + graph_ + " --out " + dir("x") +
                           " > /dev/null 2>&1";
    EXPECT_EQ(WEXITSTATUS(std::system(ok.c_str())), 0);
    const std::string bad = std::string(QRANK_CLI_PATH) + " rank-classical " + dir("none") + " > /dev/null 2>&1";
    EXPECT_EQ(WEXITSTATUS(std::system(bad.c_str())), 2);
}
