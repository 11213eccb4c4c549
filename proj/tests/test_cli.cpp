#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "causalspace/enumerator.hpp"

namespace fs = std::filesystem;
using namespace causalspace;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("causalspace_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Runs the CLI with stdout captured; stderr is discarded. `env` is prefixed
// to the command line.
Result run(const std::string& args, const std::string& env = "CAUSALSPACE_STATE_DIR=") {
    fs::path out = scratch() / "stdout.txt";
    std::string cmd = env + " \"" CAUSALSPACE_BIN "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
    int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    return r;
}

std::string last_line(const std::string& s) {
    std::string t = s;
    while (!t.empty() && t.back() == '\n') t.pop_back();
    auto pos = t.rfind('\n');
    return pos == std::string::npos ? t : t.substr(pos + 1);
}

std::size_t count_matches(const std::string& s, const std::regex& re) {
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(s.begin(), s.end(), re), std::sregex_iterator()));
}

}  // namespace

TEST_CASE("enumerate prints the final summary") {
    auto r2 = run("enumerate --events 2");
    CHECK(r2.code == 0);
    CHECK(last_line(r2.out) == "Found 7 spaces in 3 equivalence classes.");
    auto r1 = run("enumerate -n 1");
    CHECK(r1.code == 0);
    CHECK(last_line(r1.out) == "Found 1 spaces in 1 equivalence classes.");
    auto r3 = run("enumerate -n 3");
    CHECK(r3.code == 0);
    CHECK(last_line(r3.out) == "Found 2644 spaces in 102 equivalence classes.");
    auto p3 = run("enumerate -n 3 --parallel");
    CHECK(p3.code == 0);
    CHECK(last_line(p3.out) == "Found 2644 spaces in 102 equivalence classes.");
    CHECK(run("enumerate -n 3 --quiet").out.empty());
}

TEST_CASE("enumerate writes representatives") {
    fs::path reps = scratch() / "reps.hsets";
    CHECK(run("enumerate -n 2 -q -o \"" + reps.string() + "\"").code == 0);
    auto sets = read_hsets(read_file_bytes(reps.string()));
    std::set<std::uint64_t> got;
    for (const auto& s : sets) got.insert(s.to_u64());
    CHECK(got == std::set<std::uint64_t>{1362, 1638, 278});
}

TEST_CASE("checkpoint and resume") {
    fs::path state = scratch() / "n2.state";
    fs::remove(state);
    CHECK(run("enumerate -n 2 -q --state \"" + state.string() + "\" --save-period 1").code == 0);
    REQUIRE(fs::exists(state));
    auto resumed = run("resume -n 2 --state \"" + state.string() + "\"");
    CHECK(resumed.code == 0);
    CHECK(last_line(resumed.out) == "Found 7 spaces in 3 equivalence classes.");

    // the checkpoint belongs to a 2-event search
    CHECK(run("resume -n 3 --state \"" + state.string() + "\"").code == 2);

    fs::path bad = scratch() / "corrupt.state";
    {
        std::ofstream f(bad, std::ios::binary);
        f << "not a checkpoint";
    }
    CHECK(run("resume -n 2 --state \"" + bad.string() + "\"").code == 3);
    CHECK(run("resume -n 2").code == 2);
}

TEST_CASE("state directory") {
    fs::path dir = scratch() / "statedir";
    fs::create_directories(dir);
    std::string env = "CAUSALSPACE_STATE_DIR=\"" + dir.string() + "\"";
    CHECK(run("enumerate -n 2 -q --save-period 1", env).code == 0);
    CHECK(fs::exists(dir / "search-2.state"));
    CHECK(fs::exists(dir / "classes-2.hsets"));
    auto c = run("classify -n 2 0 --format json", env);
    CHECK(c.code == 0);
    CHECK(nlohmann::json::parse(c.out)["class_id"] == 0);
}

TEST_CASE("hierarchy exports") {
    auto dot = run("hierarchy --format dot");
    CHECK(dot.code == 0);
    CHECK(dot.out.rfind("digraph hierarchy {", 0) == 0);
    CHECK(count_matches(dot.out, std::regex(R"(\n  \d+ \[label=)")) == 102);
    CHECK(count_matches(dot.out, std::regex(R"(\n  \d+ -> \d+;)")) > 101);
    auto js = run("hierarchy --format json");
    CHECK(js.code == 0);
    auto j = nlohmann::json::parse(js.out);
    CHECK(j.size() == 102);
    std::size_t total = 0;
    for (const auto& n : j) total += n["orbit_size"].get<std::size_t>();
    CHECK(total == 2644);
    CHECK(run("hierarchy --format xml").code == 2);
}

TEST_CASE("causaltope exports") {
    auto csv = run("causaltope 92 --format csv");
    CHECK(csv.code == 0);
    CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 48);
    auto text = run("causaltope 0");
    CHECK(text.out == "Space 0: 91 equations, 37 independent, dimension 26\n");
    auto js = nlohmann::json::parse(run("causaltope 101 --format json").out);
    CHECK(js["total_eqs"] == 35);
    CHECK(js["indep_eqs"] == 21);
    CHECK(js["dim"] == 42);
    auto pgm = run("causaltope 100 --format pgm");
    CHECK(pgm.out.rfind("P5\n64 35\n255\n", 0) == 0);
    CHECK(run("causaltope 0 --format png").code == 2);
    // a free-choice space that is not causally complete
    CHECK(run("causaltope \"[A/0, A/1, B/0, B/1]\"").code == 2);
}

TEST_CASE("orders export") {
    auto dot = run("orders -n 2 --format dot");
    CHECK(dot.code == 0);
    CHECK(count_matches(dot.out, std::regex(R"(\n  \d+ \[label=)")) == 4);
    auto js = nlohmann::json::parse(run("orders -n 3 --format json").out);
    CHECK(js.size() == 29);
}

TEST_CASE("classify") {
    auto c0 = run("classify 0 --format json");
    CHECK(c0.code == 0);
    auto j0 = nlohmann::json::parse(c0.out);
    CHECK(j0["class_size"] == 1);
    CHECK(j0["induced"] == true);
    CHECK(j0["dim"] == 26);
    CHECK(j0["is_minimum"] == true);

    auto j101 = nlohmann::json::parse(run("classify 101 --format json").out);
    CHECK(j101["is_maximum"] == true);
    CHECK(j101["order_definite"] == false);
    CHECK(j101["causal_functions"] == 16384);

    auto text = run("classify 17");
    CHECK(text.code == 0);
    CHECK(text.out.find("Space 17 (class of 48 spaces)") == 0);
    CHECK(text.out.find("not tight") != std::string::npos);

    // a space literal resolves to its class
    auto lit = nlohmann::json::parse(run("classify \"[A/0, A/1, B/0, B/1, C/0, C/1]\" --format json").out);
    CHECK(lit["class_id"] == 0);
    CHECK(run("classify 0 --format dot").code == 2);
    CHECK(run("classify \"[A/0, B/0]\"").code == 2);
    CHECK(run("enumerate -n 9").code == 2);
}

TEST_CASE("outputs are deterministic") {
    for (const char* args : {"hierarchy --format json", "hierarchy --format dot", "causaltope 61 --format csv",
                             "classify 33 --format json", "orders -n 3 --format json"}) {
        CAPTURE(args);
        auto a = run(args), b = run(args);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
    }
    fs::remove_all(scratch());
}
