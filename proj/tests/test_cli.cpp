#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using txflow::cli::run;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("txflow_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
    int code;
    std::string out, err;
};

Result call(std::vector<std::string> args) {
    args.insert(args.begin(), "txflow");
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

const std::string kPaperTx =
    "tx_id,timestamp,inputs,outputs\n"
    "TX1,2019-09-01T10:00:00Z,a1;a2,a123:0.5;a1:0.25\n"
    "TX2,2019-09-02T10:00:00Z,a1;a3,a45:1.0;a3:0.1\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("cluster reports user counts") {
    TempDir dir;
    write(dir / "tx.csv", kPaperTx);
    const auto r = call({"cluster", "--input", dir / "tx.csv", "--out", dir / "out"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"type_a_users\": 1") != std::string::npos);
    CHECK(r.out.find("\"type_b_users\": 2") != std::string::npos);
    CHECK(fs::exists(dir.path / "out" / "clustering.csv"));
    CHECK(fs::exists(dir.path / "out" / "rank_size.csv"));
}

TEST_CASE("empty input gives empty outputs") {
    TempDir dir;
    write(dir / "empty.csv", "");
    const auto r = call({"cluster", "--input", dir / "empty.csv", "--out", dir / "out"});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir.path / "out" / "clustering.csv"));
}

TEST_CASE("strict mode fails on a corrupt row") {
    TempDir dir;
    write(dir / "bad.csv", kPaperTx + "TX3,not-a-time,a1,a2:1\n");
    const auto strict = call({"cluster", "--input", dir / "bad.csv", "--out", dir / "out", "--strict"});
    CHECK(strict.code == 1);
    CHECK(strict.err.find("line 4") != std::string::npos);
    const auto lenient = call({"cluster", "--input", dir / "bad.csv", "--out", dir / "out2"});
    CHECK(lenient.code == 0);
    CHECK(lenient.err.find("line 4") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(call({}).code == 2);
    CHECK(call({"frobnicate"}).code == 2);
    CHECK(call({"cluster"}).code == 2);
    CHECK(call({"--help"}).code == 0);
    TempDir dir;
    CHECK(call({"cluster", "--input", dir / "missing.csv"}).code == 1);
}

TEST_CASE("config file supplies defaults and flags override it") {
    TempDir dir;
    write(dir / "tx.csv", kPaperTx);
    write(dir / "run.ini", "[cluster]\ninput=" + (dir / "tx.csv") + "\nout=" + (dir / "from_config") + "\n");
    CHECK(call({"--config", dir / "run.ini", "cluster"}).code == 0);
    CHECK(fs::exists(dir.path / "from_config" / "clustering.csv"));
    CHECK(call({"--config", dir / "run.ini", "cluster", "--out", dir / "flag"}).code == 0);
    CHECK(fs::exists(dir.path / "flag" / "clustering.csv"));
}

TEST_CASE("select-k on a matrix") {
    TempDir dir;
    CHECK(call({"synth", "--kind", "lda", "--out", dir / "lda", "--docs", "20", "--vocab", "15", "--k", "3",
                "--doc-length", "200", "--seed", "3"})
              .code == 0);
    const auto counts = dir / "lda/counts.csv";
    REQUIRE(fs::exists(counts));
    const auto one = call({"select-k", "--input", counts, "--out", dir / "sel", "--k-range", "4", "--runs", "2"});
    CHECK(one.code == 0);
    CHECK(slurp(dir.path / "sel" / "select_k.json").find("\"consensus_k\": 4") != std::string::npos);
    CHECK(call({"select-k", "--input", counts, "--out", dir / "sel2", "--k-range", "2..40"}).code == 2);
    CHECK(call({"nmf", "--input", counts, "--out", dir / "nmf", "--k", "3"}).code == 0);
    CHECK(fs::exists(dir.path / "nmf" / "components.csv"));
}

TEST_CASE("analyze is reproducible") {
    TempDir dir;
    const std::string input = std::string(TXFLOW_TEST_DATA) + "/two_month_records.csv";
    for (const char* out : {"a", "b"})
        REQUIRE(call({"analyze", "--input", input, "--out", dir / out, "--from", "2019-01", "--to", "2019-02", "--k",
                      "3", "--seed", "5"})
                    .code == 0);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir.path / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto twin = dir.path / "b" / fs::relative(e.path(), dir.path / "a");
        CHECK(slurp(e.path()) == slurp(twin));
    }
    CHECK(files > 20);
    CHECK(fs::exists(dir.path / "a" / "transitions_2019-01_2019-02.csv"));
    CHECK(fs::is_directory(dir.path / "a" / "2019-01"));
    CHECK(fs::is_directory(dir.path / "a" / "2019-02"));
}

TEST_CASE("analyze isolates an empty period") {
    TempDir dir;
    const std::string input = std::string(TXFLOW_TEST_DATA) + "/two_month_records.csv";
    const auto r = call({"analyze", "--input", input, "--out", dir / "out", "--from", "2019-01", "--to", "2019-03",
                         "--k", "3"});
    CHECK(r.code == 0);
    CHECK(r.err.find("2019-03") != std::string::npos);
    CHECK(fs::is_directory(dir.path / "out" / "2019-03"));
}

}
