#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "riccibench/blocks.hpp"
#include "riccibench/scenario.hpp"

using namespace rb;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) { return std::string(RB_SOURCE_DIR) + "/scenarios/" + name; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rb_scenario_" + name);
    fs::remove_all(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

const OutputFile* find_file(const ScenarioResult& r, const std::string& name) {
    for (const auto& f : r.files)
        if (f.name == name) return &f;
    return nullptr;
}

}  // namespace

TEST_CASE("wu g00 passes with a positive min margin") {
    const ScenarioResult r = run_scenario_file(scenario_path("wu_g00.json"));
    CHECK(r.status == kStatusPass);
    CHECK(r.report.at("command") == "wu-check");
    CHECK(r.report.at("min_margin").get<double>() > 0.0);
    CHECK(r.report.at("verdict") == "pass");
}

TEST_CASE("sw-table reproduces the generator matrix") {
    const ScenarioResult r = run_scenario(json{{"command", "sw-table"}});
    CHECK(r.status == kStatusPass);
    CHECK(r.report.at("values") == json::parse("[[1,0],[1,1]]"));
    CHECK(r.report.at("rank") == 2);
    CHECK(r.report.at("classes").at("W_2") == "1 + a + (a^3)*");
    REQUIRE(r.files.size() == 1);
    CHECK(r.files[0].name == "report.json");
}

TEST_CASE("schema violations are rejected before execution") {
    CHECK_THROWS_AS(run_scenario(json::array()), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "plot"}}), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "block"}}), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "block"}, {"block", "cone"}, {"colour", 1}}), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "block"}, {"block", "cone"}, {"params", {{"zz", 1}}}}), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "block"}, {"block", "nope"}}), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "sw-table"}, {"grid", 2}}), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "block"}, {"block", "cone"}, {"family", {{"t", 0.5}}}}), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "scan"}, {"block", "cone"}}), ScenarioError);
    CHECK_THROWS_AS(run_scenario(json{{"command", "refine"}, {"block", "handle2"}, {"box", json::object()}}),
                    ScenarioError);
    CHECK_THROWS_AS(run_scenario_file("/nonexistent/scenario.json"), ScenarioError);
}

TEST_CASE("failing block names the margin") {
    const ScenarioResult r =
        run_scenario(json{{"command", "block"}, {"block", "handle1"}, {"params", {{"lambda1", 0.3}, {"lambda2", 0.31}}}});
    CHECK(r.status == kStatusFail);
    CHECK(r.failure.find("margin ") != std::string::npos);
    const std::string verdict = r.report.at("verdict");
    CHECK(verdict.rfind("fail(", 0) == 0);
    CHECK(r.failure.find(verdict.substr(5, verdict.size() - 6)) != std::string::npos);
}

TEST_CASE("builder infeasibility is a verification failure") {
    const ScenarioResult r = run_scenario(json{{"command", "wu-check"}, {"variant", "blended"}, {"eps", 0.2}});
    CHECK(r.status == kStatusFail);
    CHECK(r.failure.find("infeasible") != std::string::npos);
}

TEST_CASE("plot data") {
    SUBCASE("handle1 sweeps") {
        const ScenarioResult r = run_scenario_file(scenario_path("handle1_default.json"));
        CHECK(r.status == kStatusPass);
        const OutputFile* cap = find_file(r, "handle1_cap_profile.csv");
        REQUIRE(cap != nullptr);
        const std::string header = cap->content.substr(0, cap->content.find('\n'));
        CHECK(header == "r,phi,phi''");
        CHECK(find_file(r, "handle1_cap_II.csv") != nullptr);
    }
    SUBCASE("empty report gives no files") {
        BlockReport empty;
        empty.block = "none";
        CHECK(emit_plot_data(empty).empty());
    }
    SUBCASE("cone family gives one csv per sample") {
        const ScenarioResult r = run_scenario_file(scenario_path("cone_family.json"));
        CHECK(r.status == kStatusPass);
        REQUIRE(r.report.at("reports").size() == 5);
        for (const char* t : {"0", "0.25", "0.5", "0.75", "1"}) {
            const OutputFile* f = find_file(r, std::string("cone_ricci_t=") + t + ".csv");
            REQUIRE_MESSAGE(f != nullptr, t);
            CHECK(f->content.find("Ric") != std::string::npos);
        }
    }
}

TEST_CASE("csv columns are sorted after the axis") {
    BlockReport r;
    Sweep s;
    s.name = "demo";
    s.axis_values = {0.0, 1.0};
    s.columns = {{"zeta", {1.0, 2.0}}, {"alpha", {3.0, 4.0}}};
    r.sweeps.push_back(s);
    const auto files = emit_plot_data(r, "p.", "_q");
    REQUIRE(files.size() == 1);
    CHECK(files[0].name == "p.demo_q.csv");
    CHECK(files[0].content.rfind("t,alpha,zeta\n", 0) == 0);
}

TEST_CASE("reports are byte-identical across runs") {
    for (const char* name : {"wu_blended.json", "refine_handle2.json", "theorem_pipeline.json"}) {
        const ScenarioResult a = run_scenario_file(scenario_path(name));
        const ScenarioResult b = run_scenario_file(scenario_path(name));
        REQUIRE(a.files.size() == b.files.size());
        for (std::size_t i = 0; i < a.files.size(); ++i) {
            CHECK(a.files[i].name == b.files[i].name);
            CHECK_MESSAGE(a.files[i].content == b.files[i].content, name << " " << a.files[i].name);
        }
    }
}

TEST_CASE("seeded randomized scan") {
    const json s = {{"command", "scan"},
                    {"block", "handle2"},
                    {"margins", {"II_radial_closed_form"}},
                    {"grid", 64},
                    {"budget", 4},
                    {"box", {{"axes", {{"a", {{"lo", 0.01}, {"hi", 0.5}, {"resolution", 40}}}}},
                             {"fixed", {{"lambda1", 0.2}, {"lambda2", 0.25}, {"b", 1.5}}}}}};
    const ScenarioResult a = run_scenario(s, {std::nullopt, 7});
    const ScenarioResult b = run_scenario(s, {std::nullopt, 7});
    const ScenarioResult c = run_scenario(s, {std::nullopt, 8});
    CHECK(a.files[0].content == b.files[0].content);
    CHECK(a.files[0].content != c.files[0].content);
    CHECK(a.report.at("certificate").at("sampling") == "random");
}

TEST_CASE("grid override order") {
    const json s = {{"command", "wu-check"}, {"grid", 64}};
    CHECK(run_scenario(s).report.at("grid") == 64);
    CHECK(run_scenario(s, {128, std::nullopt}).report.at("grid") == 128);
    CHECK(run_scenario(json{{"command", "wu-check"}}).report.at("grid") == kDefaultGrid);
}

TEST_CASE("command line exit statuses") {
    const fs::path out = scratch("cli");
    CHECK(run_cli("--scenario " + scenario_path("wu_g00.json") + " --grid 256 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "wu_ricci.csv"));
    CHECK(run_cli("--scenario " + scenario_path("sw_table.json") + " --json") == 0);
    CHECK(run_cli("--scenario " + scenario_path("wu_g00.json") + " --bogus") == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("--scenario " + scenario_path("wu_g00.json") + " --grid abc") == 2);

    const fs::path bad = fs::temp_directory_path() / "rb_scenario_malformed.json";
    std::ofstream(bad) << "{\"command\": \"block\", ";
    const fs::path none = scratch("malformed");
    CHECK(run_cli("--scenario " + bad.string() + " --out " + none.string()) == 2);
    CHECK_FALSE(fs::exists(none));

    const fs::path failing = fs::temp_directory_path() / "rb_scenario_failing.json";
    std::ofstream(failing) << R"({"command": "block", "block": "handle1", "params": {"lambda1": 0.3, "lambda2": 0.31}})";
    CHECK(run_cli("--scenario " + failing.string() + " --grid 256") == 1);
}
