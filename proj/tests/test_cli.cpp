#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gridwave/cli.hpp"

using namespace gridwave;
namespace fs = std::filesystem;

namespace {

const fs::path kData = GRIDWAVE_DATA_DIR;

int cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"gridwave"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string case_dir(const char* name) { return (kData / "cases" / name).string(); }

fs::path out_dir(const char* name) {
    fs::path d = fs::temp_directory_path() / "gw_cli" / name;
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_CASE("exit codes separate usage errors from domain errors") {
    CHECK(cli({"validate", "--case", case_dir("smib")}) == 0);
    CHECK(cli({"validate", "--case", "/no/such/case"}) == 1);
    CHECK(cli({"frobnicate"}) == 2);
    CHECK(cli({"simulate", "--case", case_dir("smib")}) == 2);  // --out is required
    CHECK(cli({"simulate", "--case", case_dir("smib"), "--out", "/tmp/x", "--bogus"}) == 2);
}

TEST_CASE("powerflow writes the solution table") {
    fs::path out = out_dir("pf");
    CHECK(cli({"powerflow", "--case", case_dir("twobus"), "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "solution.csv"));
}

TEST_CASE("simulate writes trajectories and events") {
    fs::path out = out_dir("sim");
    CHECK(cli({"simulate", "--case", case_dir("smib"), "--out", out.string()}) == 0);
    for (const char* f : {"states.csv", "bus_voltages.csv", "frequencies.csv", "events.csv"})
        CHECK(fs::exists(out / f));
}

TEST_CASE("analysis subcommands produce their reports") {
    fs::path out = out_dir("modes");
    CHECK(cli({"modes", "--case", case_dir("smib"), "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "modes.csv"));
    CHECK(fs::exists(out / "mode_shapes.csv"));

    fs::path lin = out_dir("lin");
    CHECK(cli({"linearize", "--case", case_dir("smib"), "--out", lin.string()}) == 0);
    for (const char* f : {"a.csv", "b.csv", "c.csv", "d.csv"}) CHECK(fs::exists(lin / f));

    fs::path part = out_dir("part");
    CHECK(cli({"participation", "--case", case_dir("smib"), "--out", part.string()}) == 0);
    CHECK(fs::exists(part / "participation.csv"));

    fs::path freq = out_dir("freq");
    CHECK(cli({"freqresp", "--case", case_dir("smib"), "--out", freq.string()}) == 0);
    CHECK(fs::exists(freq / "bode.csv"));
    CHECK(fs::exists(freq / "margins.csv"));
}

TEST_CASE("pipeline emits a manifest tying the artifacts together") {
    fs::path out = out_dir("pipe");
    CHECK(cli({"pipeline", "--case", case_dir("smib"), "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "states.csv"));
    CHECK(fs::exists(out / "modes.csv"));
    CHECK(fs::exists(out / "bode.csv"));
}

TEST_CASE("option overrides reach the engine") {
    fs::path out = out_dir("short");
    CHECK(cli({"simulate", "--case", case_dir("smib"), "--out", out.string(), "--t-end", "0.5",
               "--dt", "0.005"}) == 0);
    std::ifstream states(out / "states.csv");
    int lines = 0;
    std::string line, last;
    while (std::getline(states, line)) {
        ++lines;
        if (!line.empty()) last = line;
    }
    // roughly 0.5 s / 5 ms rows (fault alignment adds a few) ending at 0.5
    CHECK(lines > 95);
    CHECK(lines < 115);
    CHECK(std::abs(std::stod(last.substr(0, last.find(','))) - 0.5) < 1e-9);
}
