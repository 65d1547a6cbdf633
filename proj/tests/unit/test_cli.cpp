#include "foehn/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
    setenv("FOEHN_LOG_LEVEL", "off", 1);
    args.insert(args.begin(), "foehn");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return foehn::run_cli(int(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("foehn_unit_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}) == 1);
    CHECK(run({"bogus"}) == 1);
    CHECK(run({"classify"}) == 1);
    CHECK(run({"classify", "--config", "/nonexistent/config.json"}) == 1);
    auto d = scratch("usage");
    CHECK(run({"synth", "--out", d.string(), "--years", "12", "--jobs", "0"}) == 1);
}

TEST_CASE("help exits with 0") { CHECK(run({"--help"}) == 0); }

TEST_CASE("data errors exit with 2") {
    auto d = scratch("data");
    std::ofstream(d / "config.json") << "{ not json";
    CHECK(run({"classify", "--config", (d / "config.json").string()}) == 2);
    std::ofstream(d / "empty.json") << "{}";
    CHECK(run({"classify", "--config", (d / "empty.json").string()}) == 2);
    CHECK(run({"report", "--out", (d / "nothing").string()}) == 2);
}

TEST_CASE("a missing upstream artifact names the producing command") {
    auto d = scratch("order");
    REQUIRE(run({"synth", "--out", d.string(), "--years", "12"}) == 0);
    CHECK(run({"aggregate", "--config", (d / "config.json").string()}) == 2);
    REQUIRE(run({"classify", "--config", (d / "config.json").string()}) == 0);
    CHECK(fs::exists(d / "out" / "labels_SYN_V.csv"));
    CHECK(run({"aggregate", "--config", (d / "config.json").string()}) == 0);
    CHECK(run({"reconstruct", "--config", (d / "config.json").string(), "--learner", "lasso", "--set", "direct"}) == 2);
    for (const auto& e : fs::recursive_directory_iterator(d)) CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
}
