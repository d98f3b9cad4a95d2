#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "cno/io.hpp"

using cno::io::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "cno_test_cli";

struct Result {
    int code;
    std::string out;
};

Result cli(const std::string& args) {
    fs::create_directories(kRoot);
    const auto log = kRoot / "stdout.txt";
    const std::string cmd = "CNO_OUTPUT_ROOT='" + kRoot.string() + "' '" CNO_CLI_PATH "' " + args + " > '" +
                            log.string() + "' 2> '" + (kRoot / "stderr.txt").string() + "'";
    const int raw = std::system(cmd.c_str());
    Result r{WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ""};
    if (fs::exists(log)) r.out = cno::io::read_file(log.string());
    return r;
}

std::string config(const std::string& name, json j) {
    fs::create_directories(kRoot);
    if (!j.contains("schema_version")) j["schema_version"] = 1;
    const auto p = kRoot / (name + ".json");
    cno::io::write_file(p.string(), j.dump());
    return p.string();
}

json read_json(const fs::path& p) { return json::parse(cno::io::read_file(p.string())); }

json toy_construct() {
    return {{"task", {{"kind", "recursive"}, {"T", 4}, {"G", "mean"}, {"n_paths", 48}, {"data_seed", 1}}},
            {"model", {{"hidden", {5}}, {"eps_A", 1.0}, {"seed", 3}, {"threads", 1}}},
            {"train", {{"epochs", 30}}}};
}

}  // namespace

TEST_CASE("budget table2 and table1 outputs") {
    fs::remove_all(kRoot);
    auto r = cli("budget -c " + config("t2", {{"table", "table2"}, {"P", 17}, {"Q", 4}, {"delta", 0.5}}) + " -o t2");
    REQUIRE(r.code == 0);
    const auto t2 = read_json(kRoot / "t2" / "budget.json");
    CHECK(t2["I"] == 16);
    CHECK(t2["width_bound"] == 348);
    const auto m = read_json(kRoot / "t2" / "run_manifest.json");
    CHECK(m["status"] == "ok");
    CHECK(m["exit_code"] == 0);
    CHECK(m["artifacts"].contains("budget.json"));

    r = cli("budget -c " + config("t1", {{"regularity", {{"kind", "holder"}, {"alpha", 1.0}}}, {"n_in", 1}}) + " -o t1");
    REQUIRE(r.code == 0);
    const auto t1 = read_json(kRoot / "t1" / "budget.json");
    CHECK(t1["C1"] == 81.0);
    CHECK(t1["C2"] == 20.0);
    CHECK(t1["table"] == "table1");
}

TEST_CASE("exit codes for bad configs and infeasible budgets") {
    CHECK(cli("budget -c " + config("unknown", {{"table", "table2"}, {"P", 17}, {"Q", 4}, {"delta", 0.5}, {"colour", 1}})).code == 2);
    CHECK(cli("budget -c " + config("schema", {{"schema_version", 7}, {"table", "table2"}})).code == 2);
    CHECK(cli("budget -c " + config("neg", {{"regularity", {{"kind", "holder"}, {"alpha", 2.0}}}})).code == 2);
    CHECK(cli("budget -c /nonexistent/cfg.json").code == 2);
    CHECK(cli("no-such-command").code == 2);

    const auto r = cli("budget -c " + config("big_t", {{"table", "table2"}, {"P", 17}, {"Q", 4}, {"delta", 0.5}, {"T", 17}}) + " -o big_t");
    CHECK(r.code == 3);
    CHECK(read_json(kRoot / "big_t" / "run_manifest.json")["error"]["best_achieved"] == 16.0);
    auto c = toy_construct();
    c["task"]["T"] = 20;
    c["model"]["Q"] = 2;
    c["model"]["delta"] = 0.5;
    CHECK(cli("construct -c " + config("toolong", c) + " -o toolong").code == 3);
    const auto m = read_json(kRoot / "toolong" / "run_manifest.json");
    CHECK(m["exit_code"] == 3);
    CHECK(m["error"]["type"] == "budget_infeasible");
}

TEST_CASE("construct, rerun, predict, audit and inspect") {
    const auto cfg = config("toy", toy_construct());
    REQUIRE(cli("construct -c " + cfg + " -o run_a").code == 0);
    REQUIRE(cli("construct -c " + cfg + " -o run_b").code == 0);
    const auto a = kRoot / "run_a" / "bundle";
    const auto b = kRoot / "run_b" / "bundle";
    CHECK(cno::io::sha256_hex(cno::io::read_file((a / "weave.bin").string())) ==
          cno::io::sha256_hex(cno::io::read_file((b / "weave.bin").string())));
    const auto report = read_json(kRoot / "run_a" / "report.json");
    CHECK(report["windows"].size() == 4);
    CHECK(report["any_shortfall"] == false);

    const json input{{"schema_version", 1}, {"paths", {{{0.1}, {0.5}, {0.9}, {0.2}}, {{0.0}, {0.0}, {0.0}, {0.0}}}}};
    cno::io::write_file((kRoot / "paths.json").string(), input.dump());
    REQUIRE(cli("predict -b " + a.string() + " -i " + (kRoot / "paths.json").string() + " -o pred").code == 0);
    const auto p = read_json(kRoot / "pred" / "predictions.json");
    CHECK(p["horizon"] == 4);
    CHECK(p["predictions"].size() == 2);
    CHECK(p["predictions"][0].size() == 4);
    CHECK(cli("predict -b " + a.string() + " -i " + (kRoot / "paths.json").string() + " --horizon 9 -o pred9").code == 2);

    REQUIRE(cli("audit -b " + a.string() + " --pairs 50 --seed 2 -o aud").code == 0);
    const auto au = read_json(kRoot / "aud" / "audit.json");
    CHECK(au["passed"] == 50);

    auto r = cli("inspect " + a.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("integrity   ok") != std::string::npos);
    r = cli("inspect --json " + a.string());
    CHECK(json::parse(r.out)["T"] == 4);

    auto bytes = cno::io::read_file((b / "weave.bin").string());
    bytes[bytes.size() / 3] ^= 0x04;
    cno::io::write_file((b / "weave.bin").string(), bytes);
    CHECK(cli("inspect " + b.string()).code == 5);
    CHECK(cli("audit -b " + b.string() + " -o aud_bad").code == 5);
}

TEST_CASE("a shortfall exits 4 and still writes the bundle") {
    auto c = toy_construct();
    c["model"]["eps_A"] = 1e-9;
    c["train"]["epochs"] = 1;
    CHECK(cli("construct -c " + config("short", c) + " -o short").code == 4);
    CHECK(fs::exists(kRoot / "short" / "bundle" / "weave.bin"));
    CHECK(read_json(kRoot / "short" / "run_manifest.json")["error"]["type"] == "shortfall");
}

TEST_CASE("weave-test writes the weave and its table") {
    REQUIRE(cli("weave-test -c " + config("wt", {{"T", 8}, {"P", 17}, {"Q", 4}, {"delta", 0.5}, {"seed", 1}}) + " -o wt").code == 0);
    const auto w = read_json(kRoot / "wt" / "weave_test.json");
    CHECK(w["max_relative_error"].get<double>() <= 1e-6);
    CHECK(w["min_separation"].get<double>() > 0.5);
    CHECK(w["table2"]["width"].get<std::size_t>() <= w["table2"]["width_bound"].get<std::size_t>());
    CHECK(fs::exists(kRoot / "wt" / "weave.bin"));
    fs::remove_all(kRoot);
}
