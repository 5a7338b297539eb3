#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gravnoise/cli.hpp"
#include "gravnoise/config.hpp"

using namespace gravnoise;
namespace fs = std::filesystem;

namespace {

const std::string config_dir = GRAVNOISE_CONFIG_DIR;

struct CliResult {
    int code;
    std::string out, err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Writes `text` into a fresh file under the test temp directory.
std::string temp_config(const std::string& name, const std::string& text) {
    const fs::path dir = fs::temp_directory_path() / "gravnoise_tests";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string config_field(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

}  // namespace

TEST(Config, ParsesTheShippedSamples) {
    for (const char* name : {"oscillator_benchmark.toml", "qubit_benchmark.toml", "hybrid_benchmark.toml",
                             "cq_oscillators.toml", "entropic_nonlocal_qubits.toml",
                             "entropic_local_oscillators.toml", "cq_scan_lisa.toml"}) {
        EXPECT_NO_THROW(load_config(config_dir + "/" + name)) << name;
    }
}

TEST(Config, ErrorsNameTheOffendingField) {
    EXPECT_EQ(config_field("[experiment]\narchitecture='qubits'\nm2=1.0\nd=1.0\ndelta_x=0.1\n"), "experiment.m1");
    EXPECT_EQ(config_field("[experiment]\narchitecture='qubits'\nm1='heavy'\n"), "experiment.m1");
    EXPECT_EQ(config_field("[experiment]\narchitecture='phonons'\n"), "experiment.architecture");
    EXPECT_EQ(config_field("[model]\nname='cq'\nD0=1.0\nD2=1.0\n"), "model.ell");
    EXPECT_EQ(config_field("[model]\nname='mond'\n"), "model.name");
    EXPECT_EQ(config_field("[model]\nname='graviton'\ncolour='blue'\n"), "model.colour");
    EXPECT_EQ(config_field("[output]\nformat='xml'\n"), "output.format");
    EXPECT_EQ(config_field("[evolve]\nn_max=1\n"), "evolve.n_max");
    EXPECT_EQ(config_field("[scan]\nn_d0=3\n"), "scan");
    EXPECT_EQ(config_field("seed=-4\n"), "seed");
    EXPECT_EQ(config_field("mystery=1\n"), "mystery");
}

TEST(Config, SyntaxErrorsReportTheLine) {
    try {
        parse_config("[model]\nname = \n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(Config, MissingFileIsAnIoError) {
    EXPECT_THROW(load_config("/nonexistent/gravnoise.toml"), IoError);
}

TEST(Config, NonlocalTemperatureDefaultsToTheConstraint) {
    const auto cfg = parse_config(
        "[model]\nname='entropic_nonlocal'\nlambda=1e-3\nell2=1e-6\nzeta=1.0\n"
        "[experiment]\narchitecture='qubits'\nm1=1e-14\nm2=1e-14\nd=1e-3\ndelta_x=1e-5\n");
    const auto K = build_kernel(*cfg.model, *cfg.experiment);
    EXPECT_EQ(K.model, "entropic_nonlocal");
    EXPECT_TRUE(K.flags.empty());
}

TEST(Config, ConstraintViolationIsAConfigError) {
    const auto cfg = parse_config(
        "[model]\nname='entropic_nonlocal'\nlambda=1e-3\nell2=1e-6\nzeta=1.0\nT=5.0\n"
        "[experiment]\narchitecture='qubits'\nm1=1e-14\nm2=1e-14\nd=1e-3\ndelta_x=1e-5\n");
    EXPECT_THROW(build_kernel(*cfg.model, *cfg.experiment), ConfigError);
}

TEST(Cli, MissingMassExitsWithConfigError) {
    const auto p = temp_config("no_m1.toml", "[model]\nname='graviton'\n[experiment]\narchitecture='qubits'\n"
                                             "m2=1e-17\nd=1e-3\ndelta_x=1e-4\n");
    const auto r = run_cli({"threshold", "-c", p});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("experiment.m1"), std::string::npos) << r.err;
}

TEST(Cli, ConflictingFormatFlagsAreRejected) {
    EXPECT_EQ(run_cli({"integrals", "--json", "--csv"}).code, 2);
    EXPECT_EQ(run_cli({"integrals", "--format", "json", "--csv"}).code, 2);
    EXPECT_EQ(run_cli({"integrals", "--format", "yaml"}).code, 2);
}

TEST(Cli, HelpAndVersionExitCleanly) {
    const auto h = run_cli({"--help"});
    EXPECT_EQ(h.code, 0);
    EXPECT_NE(h.out.find("scan"), std::string::npos);
    const auto v = run_cli({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find(version), std::string::npos);
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"threshold"}).code, 2);  // --config is required
}

TEST(Cli, IntegralsCommand) {
    const auto r = run_cli({"integrals"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["I_plus"].get<double>(), 1.17, 0.01);
    EXPECT_NEAR(j["I_minus"].get<double>(), 1.21, 0.01);
    EXPECT_EQ(j["provenance"]["command"], "integrals");
}

TEST(Cli, OscillatorThresholdCommand) {
    const auto r = run_cli({"threshold", "-c", config_dir + "/oscillator_benchmark.toml"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["threshold"]["sff_total_N2_per_Hz"].get<double>() / 2.8e-47, 1.0, 0.05);
    EXPECT_TRUE(j["provenance"]["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
}

TEST(Cli, CsvFormatCarriesProvenanceComments) {
    const auto r = run_cli({"threshold", "-c", config_dir + "/qubit_benchmark.toml", "--csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("# gravnoise ", 0), 0u);
    EXPECT_NE(r.out.find("\nkey,value\n"), std::string::npos);
    EXPECT_NE(r.out.find("threshold.benchmark_discrepancy,true"), std::string::npos);
}

TEST(Cli, GravitonQubitEvolutionSlopeIsTheCoupling) {
    const auto r = run_cli({"evolve", "-c", config_dir + "/qubit_benchmark.toml"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    const double coupling = j["rates"]["coupling"].get<double>();
    EXPECT_NEAR(j["negativity_rate_finite_difference"].get<double>() / coupling, 1.0, 1e-4);
    EXPECT_NEAR(j["negativity_rate"].get<double>() / coupling, 1.0, 1e-12);
}

TEST(Cli, ScanProducesAllFourLabels) {
    const auto p = temp_config("scan.toml", "[scan]\nn_d0=48\nn_d2=48\n");
    const auto r = run_cli({"scan", "-c", p});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* label : {"FORBIDDEN_TRADEOFF", "EXCLUDED_MEASURED", "EXCLUDED_AT_THRESHOLD", "OPEN"})
        EXPECT_NE(r.out.find(label), std::string::npos) << label;
    std::istringstream is(r.out);
    const auto g = parse_grid_csv(is);
    EXPECT_EQ(g.n_d0, 48);
    EXPECT_EQ(g.n_d2, 48);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
    const auto p = temp_config("scan_small.toml", "[scan]\nn_d0=20\nn_d2=20\n");
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"scan", "-c", p}, {"noise", "-c", config_dir + "/cq_oscillators.toml"},
          {"validate", "--seed", "11"}}) {
        const auto a = run_cli(args), b = run_cli(args);
        EXPECT_EQ(a.code, b.code);
        EXPECT_EQ(a.out, b.out) << args[0];
    }
}

TEST(Cli, OutputFileIsWritten) {
    const fs::path out = fs::temp_directory_path() / "gravnoise_tests" / "integrals.json";
    fs::remove(out);
    const auto r = run_cli({"integrals", "-o", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(out);
    EXPECT_NO_THROW(nlohmann::json::parse(in));
}

TEST(Cli, UnwritableOutputExitsWithIoError) {
    const auto r = run_cli({"integrals", "-o", "/nonexistent_dir/out.json"});
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("io"), std::string::npos);
}

TEST(Cli, MissingConfigFileExitsWithIoError) {
    EXPECT_EQ(run_cli({"threshold", "-c", "/nonexistent/cfg.toml"}).code, 4);
}

TEST(Cli, ValidateSuitePasses) {
    const auto r = run_cli({"validate"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(nlohmann::json::parse(r.out)["all_passed"].get<bool>());
}

TEST(Cli, HybridEvolveRuns) {
    const auto r = run_cli({"evolve", "-c", config_dir + "/hybrid_benchmark.toml"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NO_THROW(nlohmann::json::parse(r.out));
}
