#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "itv/cli.hpp"

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "itv_audit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = itv::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("itv_cli_test_" + name)).string();
}

}  // namespace

TEST_CASE("example run succeeds and reports ITV") {
    const Run r = run({"example", "hiring_v2", "--run"});
    CHECK(r.code == itv::kExitOk);
    CHECK(r.out.find("ITV") != std::string::npos);
    CHECK(r.out.find("0.588") != std::string::npos);
}

TEST_CASE("json reports carry provenance") {
    const Run r = run({"--format", "json", "--seed", "17", "example", "degrees", "--run"});
    REQUIRE(r.code == itv::kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("kind") == "example");
    CHECK(j.at("provenance").at("seed") == 17);
    CHECK(j.at("provenance").at("tolerance") == 1e-9);
    CHECK(j.at("psie").at(0).at("psie").get<double>() == doctest::Approx(0.72).epsilon(1e-12));
}

TEST_CASE("emit, validate, criteria and audit a model file") {
    const std::string path = temp_path("music.json");
    REQUIRE(run({"example", "music", "--emit-model", path}).code == itv::kExitOk);
    const Run v = run({"validate", path});
    CHECK(v.code == itv::kExitOk);
    CHECK(v.out == "ok: 6 nodes, 6 edges\n");
    const Run c = run({"criteria", path, "--padmissible"});
    CHECK(c.code == itv::kExitOk);
    CHECK(c.out.find("Theorem 1: SATISFIED") != std::string::npos);
    const std::string report = temp_path("music_report.json");
    const Run a = run({"--format", "json", "audit", path, "--loss", "mse", "--out", report});
    CHECK(a.code == itv::kExitOk);
    std::ifstream in(report);
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("fairness").at("itv").get<double>() == doctest::Approx(0.0405).epsilon(1e-12));
    std::remove(path.c_str());
    std::remove(report.c_str());
}

TEST_CASE("experiment writes records and a summary line") {
    const std::string path = temp_path("exp.jsonl");
    const Run r = run({"--seed", "3", "experiment", "--samples", "5", "--out", path});
    CHECK(r.code == itv::kExitOk);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    nlohmann::json last;
    while (std::getline(in, line)) {
        last = nlohmann::json::parse(line);
        ++lines;
    }
    CHECK(lines == 6);
    CHECK(last.contains("summary"));
    std::remove(path.c_str());
}

TEST_CASE("input errors exit with code 2") {
    CHECK(run({"validate", temp_path("does_not_exist.json")}).code == itv::kExitInput);
    CHECK(run({"example", "nope", "--run"}).code == itv::kExitInput);
    CHECK(run({"example", "music"}).code == itv::kExitInput);
    CHECK(run({"frobnicate"}).code == itv::kExitInput);
    CHECK(run({"experiment", "--samples", "0"}).code == itv::kExitInput);

    const std::string path = temp_path("broken.json");
    {
        std::ofstream out(path);
        out << "{\n  \"format_version\": \"1\",\n  \"nodes\": [\n";
    }
    const Run r = run({"validate", path});
    CHECK(r.code == itv::kExitInput);
    CHECK(r.err.find(path + ":4:1:") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("capacity errors exit with code 3") {
    const Run r = run({"--capacity", "3", "example", "music", "--run"});
    CHECK(r.code == itv::kExitCapacity);
    CHECK(r.err.find("capacity") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
    CHECK(run({"--help"}).code == itv::kExitOk);
}
