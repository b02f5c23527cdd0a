#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "degdiff/runner.hpp"

using namespace degdiff;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = DEGDIFF_CONFIG_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / ("degdiff_" + std::string(info->test_suite_name()) + "_" + info->name() +
                                             "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

RunConfig parse(const std::string& text, const fs::path& base = {}) {
    return parse_config(parse_structured_text(text, "test.toml"), base);
}

/// Line number carried by the error thrown when parsing `text`; 0 for errors
/// without a source line (a missing key), kNoError when parsing succeeds.
constexpr std::size_t kNoError = static_cast<std::size_t>(-1);

std::size_t error_line(const std::string& text, std::string* message = nullptr) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        if (message) *message = e.what();
        return e.line();
    }
    return kNoError;
}

const std::string kSmall = R"(graph = { kind = "heaviside", e_c = 1.0 }
grid = { L = 2.0, n = 100 }
initial = { profile = "indicator", height = 1.5, a = -0.5, b = 0.5 }
time = { T = 0.05, steps = 8 }
snapshots = [0.0, 0.025, 0.05]
output = "small"

[particles]
N = 500
seed = 3
)";

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

}  // namespace

TEST(Config, ParsesAndAppliesDefaults) {
    const auto c = parse(kSmall);
    EXPECT_EQ(c.graph.kind, GraphSpec::Kind::heaviside);
    EXPECT_EQ(c.n, 100u);
    EXPECT_DOUBLE_EQ(c.L, 2.0);
    EXPECT_EQ(c.initial.profile, "indicator");
    EXPECT_EQ(c.steps, 8u);
    EXPECT_EQ(c.particles.mode, "coupled");
    EXPECT_EQ(c.particles.substeps, 1u);
    EXPECT_TRUE(c.particles.stratified);
    EXPECT_EQ(c.oracle, "auto");
    EXPECT_EQ(c.snapshots, (std::vector<double>{0.0, 0.025, 0.05}));

    const auto bare = parse("graph = { kind = \"linear\" }\n");
    EXPECT_EQ(bare.particles.mode, "off");
    EXPECT_EQ(bare.initial.profile, "gaussian");
    EXPECT_EQ(bare.n, 1000u);
}

TEST(Config, ShippedConfigsLoad) {
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(kConfigs)) {
        if (e.path().extension() != ".toml") continue;
        EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
        ++count;
    }
    EXPECT_GE(count, 5u);
}

TEST(Config, SyntaxErrorsCarryTheLine) {
    std::string msg;
    EXPECT_EQ(error_line("graph = { kind = \"linear\" }\n\ngrid = { L = }\n", &msg), 3u);
    EXPECT_NE(msg.find("test.toml:3:"), std::string::npos) << msg;
}

TEST(Config, UnknownKeysAreRejectedWithTheirLine) {
    std::string msg;
    EXPECT_EQ(error_line("graph = { kind = \"linear\" }\ngrid = { L = 1.0, nn = 10 }\n", &msg), 2u);
    EXPECT_NE(msg.find("unknown key"), std::string::npos) << msg;
    EXPECT_NE(msg.find("grid.nn"), std::string::npos) << msg;
    EXPECT_EQ(error_line("graph = { kind = \"linear\" }\n\n\nbogus = 1\n"), 4u);
}

TEST(Config, RejectsBadValues) {
    const std::string g = "graph = { kind = \"linear\" }\n";
    EXPECT_EQ(error_line(g + "grid = { n = 2 }\n"), 2u);
    EXPECT_EQ(error_line(g + "grid = { L = -1.0 }\n"), 2u);
    EXPECT_EQ(error_line(g + "time = { T = 0.0 }\n"), 2u);
    EXPECT_EQ(error_line(g + "time = { steps = 0 }\n"), 2u);
    EXPECT_EQ(error_line(g + "epsilon = [0.1, 0.2]\n"), 2u);
    EXPECT_EQ(error_line(g + "epsilon = [0.1, -0.05]\n"), 2u);
    EXPECT_EQ(error_line(g + "time = { T = 1.0 }\nsnapshots = [0.0, 2.0]\n"), 3u);
    EXPECT_EQ(error_line(g + "\n[particles]\nmode = \"bogus\"\n"), 4u);
    EXPECT_EQ(error_line(g + "\n[particles]\nseed = -1\n"), 4u);
    EXPECT_EQ(error_line(g + "\n[particles]\nbandwidth = 0.0\n"), 4u);
    EXPECT_EQ(error_line(g + "initial = { profile = \"indicator\", a = 1.0, b = 0.0 }\n"), 2u);
    EXPECT_EQ(error_line(g + "initial = { profile = \"csv\", path = \"missing.csv\" }\n"), 2u);
    EXPECT_EQ(error_line("graph = { kind = \"power\", m = 0.5 }\n"), 1u);
    EXPECT_EQ(error_line("graph = { kind = \"cubic\" }\n"), 1u);
    std::string msg;
    EXPECT_EQ(error_line("grid = { L = 1.0 }\n", &msg), 0u);
    EXPECT_NE(msg.find("missing graph"), std::string::npos) << msg;
}

TEST(Config, TableGraphAndCsvDatum) {
    TempDir tmp;
    const Grid grid(1.0, 10);
    std::ofstream(tmp.path() / "u0.csv") << field_csv(GridField(grid, 0.5));
    const auto c = parse(R"(graph = { kind = "table", points = [[0.0, 0.0], [1.0, 1.0], [1.0, 2.0], [3.0, 3.0]] }
grid = { L = 1.0, n = 10 }
initial = { profile = "csv", path = "u0.csv" }
)",
                         tmp.path());
    EXPECT_EQ(c.graph.kind, GraphSpec::Kind::table);
    EXPECT_EQ(initial_field(c), GridField(grid, 0.5));
}

TEST(Config, OracleResolution) {
    const auto heat = load_config((kConfigs / "heat.toml").string());
    EXPECT_EQ(resolve_oracle(heat, initial_field(heat)), "heat");
    const auto bb = load_config((kConfigs / "barenblatt.toml").string());
    EXPECT_EQ(resolve_oracle(bb, initial_field(bb)), "barenblatt");
    const auto sub = load_config((kConfigs / "subcritical.toml").string());
    EXPECT_EQ(resolve_oracle(sub, initial_field(sub)), "stationary");
    const auto bv = load_config((kConfigs / "heaviside_bv.toml").string());
    EXPECT_EQ(resolve_oracle(bv, initial_field(bv)), "none");
}

TEST(Runner, WritesTheArtifactTree) {
    TempDir tmp;
    RunOptions opt;
    opt.output_root = tmp.path();
    const auto out = run(parse(kSmall), opt);
    EXPECT_EQ(out.exit_code, kExitOk);
    EXPECT_EQ(out.directory, tmp.path() / "small");
    for (const char* f : {"summary.json", "manifest.json", "report.jsonl", "fields/t_0.000000.csv",
                          "fields/t_0.025000.csv", "fields/t_0.050000.csv", "ensemble/t_0.050000.csv"})
        EXPECT_TRUE(fs::exists(out.directory / f)) << f;

    const auto manifest = nlohmann::json::parse(slurp(out.directory / "manifest.json"));
    for (const auto& f : manifest["files"]) EXPECT_TRUE(fs::exists(out.directory / f.get<std::string>())) << f;
    EXPECT_EQ(manifest["snapshots"].size(), 3u);
    EXPECT_EQ(manifest["version"], kVersion);

    const auto summary = nlohmann::json::parse(slurp(out.directory / "summary.json"));
    EXPECT_EQ(summary["ok"], true);
    EXPECT_EQ(summary["steps_completed"], 8);
    EXPECT_TRUE(summary.contains("particles"));
    EXPECT_EQ(summary, nlohmann::json::parse(out.summary.dump()));

    const std::string fields = slurp(out.directory / "fields/t_0.050000.csv");
    EXPECT_EQ(fields.substr(0, fields.find('\n')), "x,u,eta,chi");
}

TEST(Runner, RerunIsByteIdentical) {
    TempDir a, b;
    RunOptions oa, ob;
    oa.output_root = a.path();
    ob.output_root = b.path();
    run(parse(kSmall), oa);
    run(parse(kSmall), ob);
    EXPECT_EQ(tree(a.path()), tree(b.path()));
}

TEST(Runner, SeedOverrideChangesOnlyTheEnsemble) {
    TempDir a, b;
    RunOptions oa, ob;
    oa.output_root = a.path();
    ob.output_root = b.path();
    ob.seed = 4;
    run(parse(kSmall), oa);
    run(parse(kSmall), ob);
    const auto ta = tree(a.path()), tb = tree(b.path());
    EXPECT_EQ(ta.at("small/fields/t_0.050000.csv"), tb.at("small/fields/t_0.050000.csv"));
    EXPECT_EQ(ta.at("small/report.jsonl"), tb.at("small/report.jsonl"));
    EXPECT_NE(ta.at("small/ensemble/t_0.050000.csv"), tb.at("small/ensemble/t_0.050000.csv"));
    EXPECT_EQ(nlohmann::json::parse(tb.at("small/manifest.json"))["config"]["particles"]["seed"], 4);
}

TEST(Runner, OutputRootFromEnvironment) {
    TempDir tmp;
    ::setenv(kOutputRootEnv, tmp.path().c_str(), 1);
    const auto out = run(parse(kSmall));
    ::unsetenv(kOutputRootEnv);
    EXPECT_EQ(out.directory, tmp.path() / "small");
    EXPECT_TRUE(fs::exists(tmp.path() / "small" / "summary.json"));
}

TEST(Runner, OracleBlockForHeat) {
    TempDir tmp;
    auto c = load_config((kConfigs / "heat.toml").string());
    c.n = 500;
    c.steps = 50;
    c.particles.mode = "off";
    RunOptions opt;
    opt.output_root = tmp.path();
    const auto out = run(c, opt);
    EXPECT_EQ(out.exit_code, kExitOk);
    EXPECT_EQ(out.summary["oracle"]["name"], "heat");
    EXPECT_LT(out.summary["oracle"]["final_l1"].get<double>(), 1e-2);
    EXPECT_EQ(out.summary["oracle"]["pass"], true);
    EXPECT_FALSE(out.summary.contains("particles"));
}

TEST(Diagnose, AcceptsARunAndRejectsTampering) {
    TempDir tmp;
    RunOptions opt;
    opt.output_root = tmp.path();
    const auto out = run(parse(kSmall), opt);
    const auto good = diagnose(out.directory);
    EXPECT_TRUE(good.ok());
    EXPECT_EQ(good.snapshots, 3u);
    EXPECT_LE(good.max_inclusion_defect, 1e-8);

    // scale u in one dump: mass is no longer conserved
    const fs::path f = out.directory / "fields/t_0.025000.csv";
    auto cols = detail::read_csv_columns(f, 4);
    std::string text = "x,u,eta,chi\n";
    for (std::size_t i = 0; i < cols[0].size(); ++i)
        text += format_double(cols[0][i]) + "," + format_double(1.1 * cols[1][i]) + "," + format_double(cols[2][i]) +
                "," + format_double(cols[3][i]) + "\n";
    std::ofstream(f, std::ios::trunc) << text;
    const auto bad = diagnose(out.directory);
    EXPECT_FALSE(bad.ok());
    EXPECT_THROW(diagnose(tmp.path() / "nowhere"), InvalidArgument);
}

TEST(Compare, HeatLadderIsFirstOrder) {
    auto c = load_config((kConfigs / "heat.toml").string());
    c.n = 500;
    c.steps = 50;
    const auto rows = compare(c, "heat", 2);
    ASSERT_FALSE(rows.empty());
    for (const auto& r : rows) {
        if (r.level == 0) {
            EXPECT_TRUE(std::isnan(r.l1_order));
            continue;
        }
        EXPECT_NEAR(r.l1_order, 1.0, 0.2) << "t=" << r.t;
    }
    EXPECT_THROW(compare(c, "heat", 0), InvalidArgument);
    const auto j = compare_row_json(rows.front());
    EXPECT_TRUE(j["l1_order"].is_null());
}

// CLI exit codes

namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string(DEGDIFF_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
    TempDir tmp;
    const auto cfg = tmp.path() / "small.toml";
    std::ofstream(cfg) << kSmall;
    const std::string root = " --output-root " + tmp.path().string();
    EXPECT_EQ(cli("--version"), 0);
    EXPECT_EQ(cli("run " + cfg.string() + root), 0);
    EXPECT_EQ(cli("diagnose " + (tmp.path() / "small").string()), 0);
    EXPECT_EQ(cli(""), 3);
    EXPECT_EQ(cli("run"), 3);
    EXPECT_EQ(cli("run " + (tmp.path() / "missing.toml").string()), 3);
    EXPECT_EQ(cli("compare " + cfg.string() + " --oracle bogus"), 3);

    const auto broken = tmp.path() / "broken.toml";
    std::ofstream(broken) << "graph = { kind = \"linear\" }\nunknown = 1\n";
    EXPECT_EQ(cli("run " + broken.string() + root), 3);

    // stretch u in a dump so diagnose sees a violated invariant
    const fs::path f = tmp.path() / "small/fields/t_0.050000.csv";
    auto cols = detail::read_csv_columns(f, 4);
    std::string text = "x,u,eta,chi\n";
    for (std::size_t i = 0; i < cols[0].size(); ++i)
        text += format_double(cols[0][i]) + "," + format_double(2.0 * cols[1][i]) + "," + format_double(cols[2][i]) +
                "," + format_double(cols[3][i]) + "\n";
    std::ofstream(f, std::ios::trunc) << text;
    EXPECT_EQ(cli("diagnose " + (tmp.path() / "small").string()), 1);
}
