#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef DISTLAB_CLI_PATH
#error "DISTLAB_CLI_PATH must point at the built binary"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(DISTLAB_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 512> buf;
    while (fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "distlab_cli_test";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("ot subcommand on single-atom files prints W2 = 5") {
    auto dir = scratch_dir();
    write_file(dir / "a.csv", "x1,x2\n0,0\n");
    write_file(dir / "b.csv", "x1,x2\n3,4\n");
    RunResult r = run_cli("ot --p 2 --ground euclidean " + (dir / "a.csv").string() + " " +
                          (dir / "b.csv").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output == "W2 = 5\n");

    RunResult l1 = run_cli("ot --p 1 --ground l1 " + (dir / "a.csv").string() + " " +
                           (dir / "b.csv").string());
    CHECK(l1.exit_code == 0);
    CHECK(l1.output == "W1 = 7\n");

    // Single-atom pairs have a forced plan, so the entropic path is exact.
    RunResult sk = run_cli("ot --method sinkhorn --epsilon 0.5 " + (dir / "a.csv").string() + " " +
                           (dir / "b.csv").string());
    CHECK(sk.exit_code == 0);
    CHECK(sk.output == "W2 = 5\n");
}

TEST_CASE("jsd subcommand on disjoint grids prints the ceiling") {
    auto dir = scratch_dir();
    write_file(dir / "p.grid", "# box=0:1;shape=4\n0.5\n0.5\n0\n0\n");
    write_file(dir / "q.grid", "# box=0:1;shape=4\n0\n0\n0.5\n0.5\n");
    RunResult r = run_cli("jsd " + (dir / "p.grid").string() + " " + (dir / "q.grid").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output == "JSD = 0.6931471805599453\n");
}

TEST_CASE("usage errors exit 2 with diagnostics") {
    CHECK(run_cli("ot --p 3 a.csv b.csv").exit_code == 2);
    CHECK(run_cli("unknown-subcommand").exit_code == 2);
    CHECK(run_cli("ot --bogus-flag a b").exit_code == 2);
    RunResult missing = run_cli("ot /nonexistent/a.csv /nonexistent/b.csv");
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("error:") != std::string::npos);
}

TEST_CASE("help text exists for every subcommand") {
    for (const char* sub : {"ot", "jsd", "mcs-sweep", "translate-density", "grad-audit", "toy-train"}) {
        RunResult r = run_cli(std::string(sub) + " --help");
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("Usage") != std::string::npos);
    }
}

TEST_CASE("mcs-sweep runs green, negative control exits 1 with a failed verdict row") {
    auto dir = scratch_dir();
    auto out_ok = dir / "mcs_ok";
    write_file(dir / "mcs.cfg", "[mcs_sweep]\nrho_grid = 0,0.25,0.5,0.75,1\nseed = 1\n");
    RunResult ok = run_cli("mcs-sweep --config " + (dir / "mcs.cfg").string() + " --out " +
                           out_ok.string() + " --svg");
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("[PASS]") != std::string::npos);
    CHECK(std::filesystem::exists(out_ok / "mcs_sweep_table.csv"));
    CHECK(std::filesystem::exists(out_ok / "mcs_sweep.svg"));

    auto out_bad = dir / "mcs_bad";
    write_file(dir / "mcs_bad.cfg",
               "[mcs_sweep]\nrho_grid = 0,0.25,0.5,0.75,1\nnegative_control = true\n");
    RunResult bad = run_cli("mcs-sweep --config " + (dir / "mcs_bad.cfg").string() + " --out " +
                            out_bad.string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("[FAIL]") != std::string::npos);
    std::ifstream verdicts(out_bad / "mcs_sweep_verdicts.csv");
    std::string all((std::istreambuf_iterator<char>(verdicts)), std::istreambuf_iterator<char>());
    CHECK(all.find("jsd_strictly_decreasing_in_rho,0") != std::string::npos);
}

TEST_CASE("remaining experiment subcommands dispatch and write reports") {
    auto dir = scratch_dir();
    write_file(dir / "small.cfg",
               "[translation_density]\n"
               "pairs = collinear_segments_2d\n"
               "deltas = 0.01\n"
               "offset_seeds = 1\n"
               "sample_count = 16\n"
               "[gradient_audit]\n"
               "ot_seeds = 1\n"
               "grid_draws = 1\n"
               "identity_draws = 1\n"
               "ot_sample_count = 12\n"
               "[toy_training]\n"
               "losses = w2sq\n"
               "seeds = 1\n"
               "iterations = 10\n"
               "sample_count = 16\n"
               "grid_cells = 256\n");
    for (const char* sub : {"translate-density", "grad-audit", "toy-train"}) {
        auto out = dir / (std::string("out_") + sub);
        RunResult r = run_cli(std::string(sub) + " --config " + (dir / "small.cfg").string() + " --out " +
                              out.string() + " --svg");
        INFO(sub, ": ", r.output);
        CHECK(r.exit_code == 0);
        int csvs = 0;
        for (const auto& entry : std::filesystem::directory_iterator(out))
            if (entry.path().extension() == ".csv") ++csvs;
        CHECK(csvs == 2);
    }
}

TEST_CASE("malformed config exits 2 with line diagnostics") {
    auto dir = scratch_dir();
    write_file(dir / "broken.cfg", "[mcs_sweep]\nrho_grid 0,1\n");
    RunResult r = run_cli("mcs-sweep --config " + (dir / "broken.cfg").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find(":2") != std::string::npos);
}

TEST_CASE("identical invocations produce identical outputs and exit codes") {
    auto dir = scratch_dir();
    write_file(dir / "det.cfg", "[mcs_sweep]\nrho_grid = 0,0.5,1\nemit_alpha_hat = true\nseed = 9\n");
    auto out1 = dir / "det1";
    auto out2 = dir / "det2";
    RunResult r1 = run_cli("mcs-sweep --config " + (dir / "det.cfg").string() + " --out " + out1.string());
    RunResult r2 = run_cli("mcs-sweep --config " + (dir / "det.cfg").string() + " --out " + out2.string());
    CHECK(r1.exit_code == r2.exit_code);
    // Stdout matches except for the line naming the (different) out dirs.
    auto strip_artifacts_line = [](std::string s) {
        auto at = s.find("artifacts in");
        return at == std::string::npos ? s : s.substr(0, at);
    };
    CHECK(strip_artifacts_line(r1.output) == strip_artifacts_line(r2.output));
    for (const char* name : {"mcs_sweep_table.csv", "mcs_sweep_verdicts.csv"}) {
        std::ifstream f1(out1 / name), f2(out2 / name);
        std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
        std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
        CHECK(s1 == s2);
    }
}

TEST_CASE("seed flag overrides the config seed") {
    auto dir = scratch_dir();
    write_file(dir / "seeded.cfg", "[mcs_sweep]\nrho_grid = 0,0.5,1\nemit_alpha_hat = true\nseed = 1\n");
    auto out_cfg = dir / "seed_cfg";
    auto out_flag = dir / "seed_flag";
    run_cli("mcs-sweep --config " + (dir / "seeded.cfg").string() + " --out " + out_cfg.string());
    run_cli("mcs-sweep --config " + (dir / "seeded.cfg").string() + " --seed 2 --out " + out_flag.string());
    std::ifstream f1(out_cfg / "mcs_sweep_table.csv"), f2(out_flag / "mcs_sweep_table.csv");
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 != s2); // alpha_hat sampling depends on the seed
}
