#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "jmvd");
    std::ostringstream out, err;
    const int code = jmvd::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("jmvd_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

const std::string tri = jmvd::test::data_path("triangular_2x2.json");

}  // namespace

TEST_CASE("cli: loop around the triangular rank loss") {
    const fs::path dir = scratch("loop");
    const Run r = run({"loop", "--family", tri, "--loop", jmvd::test::data_path("circle_r1.json"), "--out", dir});
    CHECK(r.code == 0);
    CHECK(r.out.find("sum     +3.1416") != std::string::npos);
    CHECK(r.out.find("RANK_LOSS_INSIDE") != std::string::npos);
    const json report = read_json(dir / "report.json");
    CHECK(report.at("classification") == "RANK_LOSS_INSIDE");
    CHECK(report.at("beta").size() == 2);
    CHECK(fs::exists(dir / "trace.csv"));
    CHECK(fs::exists(dir / "trace.bin"));

    const Run v = run({"loop", "--family", tri, "--loop", jmvd::test::data_path("circle_r1.json"), "--gauge", "vmvd",
                       "--out", dir});
    CHECK(v.code == 0);
    CHECK(v.out.find("sum     +0.0000") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
    const fs::path dir = scratch("codes");
    CHECK(run({"loop", "--family", "missing.json", "--box", "-1,1,-1,1", "--out", dir}).code == 2);
    CHECK(run({"loop", "--family", tri, "--box", "1,-1,-1,1", "--out", dir}).code == 2);
    CHECK(run({"loop", "--family", tri, "--box", "-1,1,-1,1", "--gauge", "both", "--out", dir}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    // The rectangle's lower edge passes through the rank-loss point.
    const Run through = run({"loop", "--family", tri, "--box", "-1,1,0,1", "--out", dir});
    CHECK(through.code == 3);
    CHECK(through.err.find("last good t") != std::string::npos);
    const Run budget = run({"detect", "--family", jmvd::test::data_path("affine_4x4.json"), "--box", "-1,1,-1,1",
                            "--max-cells", "3", "--out", dir});
    CHECK(budget.code == 4);
    CHECK(read_json(dir / "detection.json").at("budget_exhausted") == true);
}

TEST_CASE("cli: scan, detect and verify") {
    const fs::path dir = scratch("pipeline");
    const std::string fam = jmvd::test::data_path("affine_4x4.json");
    const Run s = run({"scan", "--family", fam, "--box", "-1,1,-1,1", "--resolution", "21", "--out", dir});
    CHECK(s.code == 0);
    std::ifstream csv(dir / "surface.csv");
    std::string line;
    int rows = -1;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 441);
    CHECK(fs::exists(dir / "scan_summary.json"));

    const Run d = run({"detect", "--family", fam, "--box", "-1,1,-1,1", "--out", dir});
    CHECK(d.code == 0);
    CHECK(d.out.rfind("1 point\n", 0) == 0);

    const Run v = run({"verify", "--family", fam, "--detection", (dir / "detection.json").string(), "--out", dir});
    CHECK(v.code == 0);
    CHECK(v.out.find("verification passed") != std::string::npos);
    CHECK(fs::exists(dir / "diagnostics.json"));

    const Run sq = run({"verify", "--family", jmvd::test::data_path("squared_2x2.json"), "--point", "0,0", "--out", dir});
    CHECK(sq.code == 0);
    CHECK(sq.out.find("NON-GENERIC") != std::string::npos);
}
