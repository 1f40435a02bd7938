// End-to-end tests of the command-line surface: spec ingestion, exit codes,
// JSON/CSV shapes and seeded reproducibility. The binary path is injected by
// the build as SWSTAB_CLI_PATH.

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "swstab/mat2.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SWSTAB_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return res;
    while (fgets(buf.data(), buf.size(), pipe) != nullptr) res.output += buf.data();
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / "swstab_cli_test";
        fs::create_directories(dir_);
        write_spec("rot13.json",
                   R"({"family": "rotations", "a": 1, "b": 3, "beta": 2})");
        write_spec("rot12.json",
                   R"({"family": "rotations", "a": 1, "b": 2, "beta": 1})");
        write_spec("jordan2.json", R"({"family": "jordan", "b": 2, "beta": 2})");
        write_spec("matrices.json",
                   R"({"A0": [[-1, 4], [0.1, -1]], "A1": [[-1, 0.1], [4, -1]],
                       "lambda": 0.5, "beta": 2})");
        write_spec("nonhurwitz.json",
                   R"({"A0": [[1, 0], [0, -1]], "A1": [[-1, 0], [0, -1]],
                       "lambda": 0.5, "beta": 1})");
        write_spec("flat.json",
                   R"({"A0": [-1, 4, 0.1, -1], "A1": [-1, 0.1, 4, -1],
                       "lambda": 0.5, "beta": 2})");
        write_spec("garbage.json", "this is not json {");
    }

    void write_spec(const std::string& name, const std::string& text) {
        std::ofstream f(dir_ / name);
        f << text;
    }

    std::string spec(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

TEST_F(CliTest, CheckRotationsFamily) {
    const RunResult r = run_cli("check --spec " + spec("rot13.json"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json j = json::parse(r.output);
    EXPECT_TRUE(j.at("holds").get<bool>());
    EXPECT_NEAR(j.at("lhs").get<double>(), -7.1111, 1e-3);
    EXPECT_NEAR(j.at("rhs").get<double>(), -4.0, 1e-12);
    ASSERT_FALSE(j.at("lambda_window").is_null());
    EXPECT_LT(j.at("lambda_window")[0].get<double>(), 0.5);
    EXPECT_GT(j.at("lambda_window")[1].get<double>(), 0.5);
}

TEST_F(CliTest, FlatMatrixEncodingAccepted) {
    const RunResult nested = run_cli("check --spec " + spec("matrices.json"));
    const RunResult flat = run_cli("check --spec " + spec("flat.json"));
    ASSERT_EQ(nested.exit_code, 0);
    ASSERT_EQ(flat.exit_code, 0);
    EXPECT_EQ(nested.output, flat.output);
}

TEST_F(CliTest, NonHurwitzSpecNamesTheMatrix) {
    const RunResult r = run_cli("check --spec " + spec("nonhurwitz.json"));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("A0 not Hurwitz"), std::string::npos);
}

TEST_F(CliTest, UnknownCommandExits64) {
    EXPECT_EQ(run_cli("frobnicate").exit_code, 64);
}

TEST_F(CliTest, MissingSpecFileExits66) {
    EXPECT_EQ(run_cli("check --spec /nonexistent/nowhere.json").exit_code, 66);
}

TEST_F(CliTest, MalformedSpecExits66) {
    EXPECT_EQ(run_cli("check --spec " + spec("garbage.json")).exit_code, 66);
}

TEST_F(CliTest, ChiMcIsSeedReproducible) {
    const std::string args = "chi-mc --spec " + spec("rot13.json") +
                             " --seed 7 --horizon 500 --replicas 4";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    ASSERT_EQ(a.exit_code, 0) << a.output;
    EXPECT_EQ(a.output, b.output);
    // different seed, different digits
    const RunResult c = run_cli("chi-mc --spec " + spec("rot13.json") +
                                " --seed 8 --horizon 500 --replicas 4");
    EXPECT_NE(a.output, c.output);
}

TEST_F(CliTest, ChiExactReportsQuadratureValue) {
    const RunResult r = run_cli("chi-exact --spec " + spec("rot13.json") + " --beta 0");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json j = json::parse(r.output);
    EXPECT_NEAR(j.at("chi").get<double>(), -1.0, 1e-8);
    EXPECT_EQ(j.at("method").get<std::string>(), "quadrature");
}

TEST_F(CliTest, ChiExactRequiresFamilySpec) {
    const RunResult r = run_cli("chi-exact --spec " + spec("matrices.json"));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("family"), std::string::npos);
}

TEST_F(CliTest, BetaCReportsTransition) {
    const RunResult r = run_cli("beta-c --spec " + spec("jordan2.json"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json j = json::parse(r.output);
    EXPECT_GT(j.at("beta_c").get<double>(), 0.0);
    EXPECT_DOUBLE_EQ(j.at("chi_at_infinity").get<double>(), 1.0);
}

TEST_F(CliTest, BetaCWithoutTransitionExits2) {
    const RunResult r = run_cli("beta-c --spec " + spec("rot12.json"));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("no transition"), std::string::npos);
}

TEST_F(CliTest, ClassifyJordanReportsCaseE) {
    const RunResult r = run_cli("classify --spec " + spec("jordan2.json"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json j = json::parse(r.output);
    EXPECT_EQ(j.at("label").get<std::string>(), "e");
    EXPECT_EQ(j.at("verdict").get<std::string>(), "two-recurrent-classes");
    ASSERT_FALSE(j.at("invariant_interval").is_null());
    EXPECT_NEAR(j.at("invariant_interval")[0].get<double>(), 0.0, 1e-9);
    EXPECT_NEAR(j.at("invariant_interval")[1].get<double>(), swstab::kPi / 2.0, 1e-9);
}

TEST_F(CliTest, ExpmAtTimeZeroIsIdentity) {
    const RunResult r = run_cli("expm --spec " + spec("rot13.json") + " --time 0");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json j = json::parse(r.output);
    EXPECT_DOUBLE_EQ(j.at("exp")[0][0].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(j.at("exp")[0][1].get<double>(), 0.0);
}

TEST_F(CliTest, DensityCsvShape) {
    const RunResult r = run_cli("density --spec " + spec("jordan2.json") + " --grid-n 16");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    std::istringstream is(r.output);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line.rfind("# ", 0), 0u); // metadata comment first
    std::getline(is, line);
    EXPECT_EQ(line, "theta,weight_i0,weight_i1");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, 16);
}

TEST_F(CliTest, SweepCsvColumnsAndOutFile) {
    const std::string out = (dir_ / "sweep.csv").string();
    const RunResult r =
        run_cli("sweep --spec " + spec("jordan2.json") +
                " --beta-grid 0.5:2:3 --horizon 200 --replicas 2 --seed 3 --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    std::ifstream f(out);
    ASSERT_TRUE(f.good());
    std::string line;
    std::getline(f, line); // metadata
    EXPECT_EQ(line.rfind("# ", 0), 0u);
    EXPECT_NE(line.find("seed=3"), std::string::npos);
    std::getline(f, line);
    EXPECT_EQ(line, "beta,chi_exact,chi_mc,chi_mc_stderr");
    double prev = -1.0;
    int rows = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const double beta = std::stod(line.substr(0, line.find(',')));
        EXPECT_GT(beta, prev); // sorted by beta
        prev = beta;
        ++rows;
    }
    EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, SweepWithoutFamilyOmitsExactColumn) {
    const RunResult r = run_cli("sweep --spec " + spec("matrices.json") +
                                " --beta-grid 1:2:2 --horizon 100 --replicas 2");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("beta,chi_mc,chi_mc_stderr"), std::string::npos);
}

TEST_F(CliTest, ProductsJsonAndTrace) {
    const std::string out = (dir_ / "products.csv").string();
    const RunResult r = run_cli("products --spec " + spec("rot13.json") +
                                " --steps 500 --replicas 2 --seed 5 --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json j = json::parse(r.output);
    EXPECT_EQ(j.at("variant").get<std::string>(), "alternating");
    EXPECT_EQ(j.at("steps").get<int>(), 500);
    std::ifstream f(out);
    ASSERT_TRUE(f.good());
    std::string line;
    std::getline(f, line);
    EXPECT_EQ(line.rfind("# ", 0), 0u);
    std::getline(f, line);
    EXPECT_EQ(line, "k,estimate");
}

TEST_F(CliTest, ProductsIidVariant) {
    const RunResult r = run_cli("products --spec " + spec("rot13.json") +
                                " --steps 200 --replicas 2 --variant iid-halfsum");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json j = json::parse(r.output);
    EXPECT_EQ(j.at("variant").get<std::string>(), "iid-halfsum");
}

TEST_F(CliTest, CertificateJsonShape) {
    const RunResult r = run_cli("certificate --spec " + spec("rot13.json"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json j = json::parse(r.output);
    EXPECT_GT(j.at("rho").get<double>(), 0.0);
    EXPECT_GE(j.at("kappa0").get<double>(), 1.0);
    EXPECT_TRUE(j.at("beta1_finite").get<bool>());
    EXPECT_GT(j.at("beta1").get<double>(), 0.0);
}

} // namespace
