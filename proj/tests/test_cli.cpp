// Integration tests driving the installed CLI binary (path via GLYCAST_BIN).

#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("GLYCAST_BIN");
    REQUIRE_MESSAGE(b != nullptr, "GLYCAST_BIN not set");
    return b;
}

int run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE_MESSAGE(f.good(), "missing file: " << p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("glycast_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string operator/(const std::string& sub) const {
        return (path / sub).string();
    }
};

} // namespace

TEST_CASE("cli: simulate writes per-patient CSVs and a manifest; reruns match") {
    TempDir tmp;
    const std::string out = tmp / "data";
    CHECK(run("simulate -n 2 --days 2 --seed 5 --out " + out) == 0);
    CHECK(fs::exists(out + "/p01.csv"));
    CHECK(fs::exists(out + "/p02.csv"));
    CHECK(fs::exists(out + "/manifest.json"));
    const std::string first = slurp(out + "/p01.csv");
    CHECK(first.rfind("patient_id,timestamp,variable,value,unit", 0) == 0);

    const std::string out2 = tmp / "data2";
    CHECK(run("simulate -n 2 --days 2 --seed 5 --out " + out2) == 0);
    CHECK(slurp(out2 + "/p01.csv") == first);

    const std::string out3 = tmp / "data3";
    CHECK(run("simulate -n 2 --days 2 --seed 6 --out " + out3) == 0);
    CHECK(slurp(out3 + "/p01.csv") != first);
}

TEST_CASE("cli: single tiny patient") {
    TempDir tmp;
    CHECK(run("simulate -n 1 --days 1 --seed 3 --out " + (tmp / "d")) == 0);
    CHECK(fs::exists(tmp / "d/p01.csv"));
    CHECK(!fs::exists(tmp / "d/p02.csv"));
}

TEST_CASE("cli: evaluate restricted grid, byte-identical reruns, report") {
    TempDir tmp;
    REQUIRE(run("simulate -n 2 --days 14 --seed 9 --out " + (tmp / "d")) == 0);
    {
        std::ofstream cfg(tmp / "eval.cfg");
        cfg << "eval.models = persistence, ridge\n"
               "eval.steps_s = 900\n"
               "eval.history_hours = 3\n"
               "eval.horizon_minutes = 15,30\n";
    }
    const std::string args = "evaluate --data " + (tmp / "d") + " --config " +
                             (tmp / "eval.cfg") + " --seed 4 --workers 2 --out ";
    CHECK(run(args + (tmp / "ev")) == 0);
    const std::string csv = slurp(tmp / "ev/eval.csv");
    // 2 models x 1 step x 1 history x 2 horizons x 2 patients.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 8);
    CHECK(csv.find("p01,persistence,900,3,15,") != std::string::npos);

    CHECK(run(args + (tmp / "ev2")) == 0);
    CHECK(slurp(tmp / "ev2/eval.csv") == csv);
    CHECK(slurp(tmp / "ev2/eval.jsonl") == slurp(tmp / "ev/eval.jsonl"));

    CHECK(run("report --results " + (tmp / "ev") + " --out " + (tmp / "rep")) == 0);
    CHECK(fs::exists(tmp / "rep/summary.csv"));
    CHECK(fs::exists(tmp / "rep/summary.txt"));
    CHECK(fs::exists(tmp / "rep/long.csv"));
    const std::string summary = slurp(tmp / "rep/summary.csv");
    CHECK(summary.find("persistence,900,3,15") != std::string::npos);
}

TEST_CASE("cli: select writes rankings with influence_minutes") {
    TempDir tmp;
    REQUIRE(run("simulate -n 1 --days 14 --seed 2 --out " + (tmp / "d")) == 0);
    {
        std::ofstream cfg(tmp / "sel.cfg");
        cfg << "select.resamples = 20\n"
               "select.max_rows = 400\n"
               "select.max_lag.glucose = 6\n"
               "select.max_lag.iob = 4\n"
               "select.max_lag.cob = 4\n"
               "select.max_lag.eob = 2\n"
               "select.max_lag.insulin_bolus = 4\n"
               "select.max_lag.carbs = 4\n"
               "select.max_lag.exercise = 2\n"
               "select.max_lag.heart_rate = 2\n"
               "select.max_lag.sleep = 2\n"
               "select.max_lag.schedule = 2\n";
    }
    CHECK(run("select --data " + (tmp / "d") + " --config " + (tmp / "sel.cfg") +
              " --seed 8 --workers 2 --out " + (tmp / "sel")) == 0);
    const std::string ranking = slurp(tmp / "sel/ranking_onboard.csv");
    CHECK(ranking.rfind("variable,rank,influence_minutes", 0) == 0);
    CHECK(ranking.find("glucose") != std::string::npos);
    CHECK(fs::exists(tmp / "sel/ranking_raw.csv"));
    CHECK(fs::exists(tmp / "sel/steps_onboard.jsonl"));
    CHECK(fs::exists(tmp / "sel/per_patient/p01_onboard.csv"));

    CHECK(run("select --data " + (tmp / "d") + " --config " + (tmp / "sel.cfg") +
              " --seed 8 --pooled-only --out " + (tmp / "sel2")) == 0);
    CHECK(!fs::exists(tmp / "sel2/per_patient"));
    CHECK(slurp(tmp / "sel2/ranking_onboard.csv") == ranking);
}

TEST_CASE("cli: train saves a loadable model file") {
    TempDir tmp;
    REQUIRE(run("simulate -n 1 --days 14 --seed 2 --out " + (tmp / "d")) == 0);
    CHECK(run("train --data " + (tmp / "d") + " --model ridge --step 900"
              " --history 3 --horizon 15 --seed 1 --model-out " +
              (tmp / "m.json")) == 0);
    const std::string doc = slurp(tmp / "m.json");
    CHECK(doc.find("\"kind\": \"ridge\"") != std::string::npos);
    CHECK(doc.find("\"format_version\": 1") != std::string::npos);
}

TEST_CASE("cli: bench emits rows for requested sizes") {
    TempDir tmp;
    REQUIRE(run("simulate -n 1 --days 14 --seed 2 --out " + (tmp / "d")) == 0);
    {
        std::ofstream cfg(tmp / "bench.cfg");
        cfg << "bench.repetitions = 3\nbench.warmup = 1\n";
    }
    CHECK(run("bench --data " + (tmp / "d") + " --config " + (tmp / "bench.cfg") +
              " --models persistence,ridge --train-sizes 200,400 --seed 1 --out " +
              (tmp / "b")) == 0);
    const std::string csv = slurp(tmp / "b/bench.csv");
    CHECK(csv.find("persistence,200,") != std::string::npos);
    CHECK(csv.find("ridge,400,") != std::string::npos);
}

TEST_CASE("cli: failure modes exit 2") {
    TempDir tmp;
    CHECK(run("--definitely-not-a-flag") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("evaluate --data " + (tmp / "missing") + " --out " + (tmp / "o")) == 2);
    REQUIRE(run("simulate -n 1 --days 14 --seed 1 --out " + (tmp / "d")) == 0);
    {
        std::ofstream cfg(tmp / "bad.cfg");
        cfg << "mystery.knob = 1\n";
    }
    CHECK(run("evaluate --data " + (tmp / "d") + " --config " + (tmp / "bad.cfg") +
              " --out " + (tmp / "o2")) == 2);
    // Unwritable output directory.
    CHECK(run("simulate -n 1 --days 1 --seed 1 --out /proc/nope") == 2);
    // Empty data directory.
    fs::create_directories(tmp / "empty");
    CHECK(run("select --data " + (tmp / "empty") + " --out " + (tmp / "o3")) == 2);
}

TEST_CASE("cli: help for every subcommand") {
    for (const char* sub : {"simulate", "select", "train", "evaluate", "bench",
                            "report"}) {
        CHECK(run(std::string(sub) + " --help") == 0);
    }
    CHECK(run("--help") == 0);
    CHECK(run("--version") == 0);
}
