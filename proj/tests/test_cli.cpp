#include "rfpca/cli.hpp"
#include "rfpca/models.hpp"
#include "rfpca/serialize.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rfpca;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / ("rfpca_cli_" + name); }

} // namespace

TEST_CASE("exit codes") {
    CHECK(run({}).code == 2);
    CHECK(run({"fpca", "--no-such-flag"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"spacings", "--mode", "sideways"}).code == 2);
    const Run bad = run({"spacings", "--mode", "recurrence", "--a", "0.1", "--b", "0.5"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("a <= b^2/8") != std::string::npos);
    CHECK(run({"fpca", "--in", temp("missing.csv").string()}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("recurrence mode") {
    const Run r = run({"spacings", "--mode", "recurrence", "--a", "0.01", "--b", "0.4", "--iters", "100"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["ok"].get<bool>());
    CHECK(j["max_y"].get<double>() <= 0.02);
}

TEST_CASE("fpca on a generated model") {
    const Run r = run({"fpca", "--n", "3", "--N", "20000", "--sigma", "0.5", "--seed", "4", "--baseline"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["command"] == "fpca");
    CHECK(j.contains("max_error"));
    CHECK(j["max_error"].get<double>() < 0.3);
    CHECK(j["sigma_rule"] == "flag");
    CHECK(j["baseline"].contains("max_error"));
    CHECK(j["tree"]["children"].size() == 2);
    CHECK(matrix_from_json(j["basis"]).cols() == 3);
    CHECK(j["config"]["seed"] == "4");
}

TEST_CASE("gen then fpca --in, CSV and binary agree") {
    const auto csv = temp("gen.csv");
    const auto bin = temp("gen.bin");
    REQUIRE(run({"gen", "--n", "3", "--N", "5000", "--seed", "2", "--out", csv.string()}).code == 0);
    REQUIRE(run({"gen", "--n", "3", "--N", "5000", "--seed", "2", "--out", bin.string()}).code == 0);
    const SampleSet a = read_samples(csv);
    const SampleSet b = read_samples(bin);
    CHECK(a.data() == b.data());
    CHECK(a.size() == 5000);

    const Run fa = run({"fpca", "--in", csv.string(), "--sigma", "0.5"});
    const Run fb = run({"fpca", "--in", bin.string(), "--sigma", "0.5"});
    REQUIRE(fa.code == 0);
    REQUIRE(fb.code == 0);
    CHECK(Json::parse(fa.out)["basis"] == Json::parse(fb.out)["basis"]);
    CHECK(!Json::parse(fa.out).contains("max_error"));
    std::filesystem::remove(csv);
    std::filesystem::remove(bin);
}

TEST_CASE("config files and precedence") {
    const auto cfg = temp("run.cfg");
    {
        std::ofstream f(cfg);
        f << "# comment\nmode = recurrence\na = 0.001\nb = 0.5\niters = 7\n";
    }
    const Run r = run({"spacings", "--config", cfg.string(), "--a", "0.002"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["config"]["a"].get<std::string>() == "0.002");
    CHECK(j["config"]["iters"].get<std::string>() == "7");
    CHECK(j["bound"].get<double>() == 0.004);

    // a JSON artifact replays its own config
    const auto artifact = temp("artifact.json");
    {
        std::ofstream f(artifact);
        f << r.out;
    }
    const Run again = run({"spacings", "--config", artifact.string()});
    REQUIRE(again.code == 0);
    CHECK(Json::parse(again.out) == j);

    // as does a CSV artifact
    const Run table = run({"spacings", "--n", "10", "--trials", "20", "--seed", "3"});
    REQUIRE(table.code == 0);
    CHECK(table.out.rfind("# config: command=spacings", 0) == 0);
    const auto csv = temp("table.csv");
    {
        std::ofstream f(csv);
        f << table.out;
    }
    CHECK(run({"spacings", "--config", csv.string()}).out == table.out);
    std::filesystem::remove(cfg);
    std::filesystem::remove(artifact);
    std::filesystem::remove(csv);
}

TEST_CASE("inspect") {
    const Run r = run({"inspect", "--n", "2", "--N", "20000", "--u", "0.3,-0.2", "--mixing", "identity"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["stats"].contains("sigma_u"));
    CHECK(j["spectral_error_real"].get<double>() < 0.1);
    CHECK(run({"inspect", "--n", "2", "--u", "0.3"}).code == 1);
}

TEST_CASE("tensor synthetic and round trip") {
    const auto path = temp("t.bin");
    const Run r = run({"tensor", "--n", "5", "--synthetic", "--seed", "3", "--tensor-out", path.string()});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["max_error"].get<double>() < 1e-8);
    const Run back = run({"tensor", "--tensor-in", path.string(), "--seed", "3"});
    REQUIRE(back.code == 0);
    CHECK(Json::parse(back.out)["basis"] == j["basis"]);
    std::filesystem::remove(path);
}

TEST_CASE("sweep and spacing modes produce tables") {
    const Run s = run({"sweep", "--n-values", "3", "--N-values", "3000", "--seeds", "1", "--algorithms", "rfpca,tensor"});
    REQUIRE(s.code == 0);
    CHECK(s.out.find("algorithm,n,N,seed,max_error,wall_ms,status") != std::string::npos);
    const Run c = run({"spacings", "--mode", "cubic", "--n-values", "64,128,256", "--trials", "20", "--format", "json"});
    REQUIRE(c.code == 0);
    CHECK(Json::parse(c.out).contains("loglog_slope"));
}
