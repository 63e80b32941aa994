#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace paneitz;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("paneitz_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("fnv1a reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("coefficients table") {
    const auto r = invoke({"coefficients", "--n", "5", "--sc", "20"});
    CHECK(r.code == 0);
    CHECK(r.out.find("5.5") != std::string::npos);
    CHECK(r.out.find("6.5625") != std::string::npos);
    CHECK(r.out.find("105/16") != std::string::npos);
    CHECK(invoke({"coefficients", "--n", "4", "--sc", "20"}).code == 2);
    CHECK(invoke({"coefficients", "--n", "5"}).code == 2);
}

TEST_CASE("validation errors exit 2") {
    const auto q1 = invoke({"solve", "--einstein", "20", "--q", "1"});
    CHECK(q1.code == 2);
    CHECK(q1.err.find("requires q > 1") != std::string::npos);
    CHECK(invoke({"bogus"}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"solve", "--einstein", "20", "--alpha", "1", "--beta", "1"}).code == 2);
    CHECK(invoke({"solve", "--alpha", "1"}).code == 2);
    CHECK(invoke({"solve", "--einstein", "20", "--N", "8"}).code == 2);
    CHECK(invoke({"solve", "--einstein", "20", "--profile", "no_such_profile"}).code == 2);

    const auto dir = scratch("badcfg");
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.json") << R"({"q": 1.0, "einstein": 20})";
    const auto from_file = invoke({"solve", "--config", (dir / "cfg.json").string()});
    CHECK(from_file.code == 2);
    CHECK(from_file.err.find("requires q > 1") != std::string::npos);
    std::ofstream(dir / "typo.json") << R"({"qq": 3})";
    CHECK(invoke({"solve", "--config", (dir / "typo.json").string()}).code == 2);
}

TEST_CASE("solve writes a converged record with headers") {
    const auto dir = scratch("solve");
    const auto r = invoke({"solve", "--profile", "sphere_point", "--n", "5", "--einstein", "20", "--q", "3", "--N", "800",
                           "--out", dir.string()});
    CHECK(r.code == 0);
    const auto j = Json::parse(slurp(dir / "solve_record.json"));
    CHECK(j["header"]["tool_version"] == tool_version());
    CHECK(j["header"]["config_hash"].get<std::string>().size() == 16);
    const auto& rec = j["record"];
    CHECK(rec["residual"].get<double>() < 1e-8);
    CHECK(rec["N"] == 800);
    CHECK(rec["u"].size() == 800);
    CHECK(rec["profile"] == "sphere_point");
    const auto back = record_from_json(rec);
    CHECK(back.u.size() == 800);
    CHECK(back.I_value == rec["I"].get<double>());

    const auto csv = slurp(dir / "solve_profile.csv");
    CHECK(csv.rfind("# config_hash=", 0) == 0);
    CHECK(csv.find("# tool_version=") != std::string::npos);
    CHECK(csv.find("\nt,u\n") != std::string::npos);
}

TEST_CASE("config file, flag override and PANEITZ_LAB_OUT") {
    const auto dir = scratch("config");
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.json") << R"({"s": 6, "q": 2.0, "gamma_count": 3, "R_max": 50, "out": "ignored"})";
    const auto env_dir = dir / "from_env";
    ::setenv("PANEITZ_LAB_OUT", env_dir.string().c_str(), 1);
    auto r = invoke({"blowup", "--config", (dir / "cfg.json").string(), "--gamma-count", "4"});
    CHECK(r.code == 0);
    const auto csv = slurp(env_dir / "blowup_sweep.csv");
    // 2 header lines + column line + 4 shots
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

    const auto flag_dir = dir / "from_flag";
    r = invoke({"blowup", "--config", (dir / "cfg.json").string(), "--out", flag_dir.string()});
    ::unsetenv("PANEITZ_LAB_OUT");
    CHECK(r.code == 0);
    CHECK(fs::exists(flag_dir / "blowup_sweep.csv"));
}

TEST_CASE("profiles command") {
    const auto r = invoke({"profiles", "--n", "8", "--k", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("sphere_subsphere") != std::string::npos);

    const auto dir = scratch("profiles");
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "tab.csv");
        csv << "t,logA\n";
        csv.precision(17);
        for (int i = 1; i < 400; ++i) {
            const double t = M_PI * i / 400;
            csv << t << ',' << 4 * std::log(std::sin(t)) << '\n';
        }
    }
    const auto tab = invoke({"profiles", "--profile", (dir / "tab.csv").string(), "--n", "5", "--D",
                             std::to_string(M_PI), "--export", "--out", dir.string()});
    CHECK(tab.code == 0);
    const auto j = Json::parse(slurp(dir / "profile_tab.json"));
    CHECK(j["profile"]["n"] == 5);
    CHECK(j["profile"]["samples"].size() > 10);
}

TEST_CASE("byte-identical blowup output") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    CHECK(invoke({"blowup", "--gamma-count", "10", "--out", a.string()}).code == 0);
    CHECK(invoke({"blowup", "--gamma-count", "10", "--jobs", "3", "--out", b.string()}).code == 0);
    CHECK(slurp(a / "blowup_sweep.csv") == slurp(b / "blowup_sweep.csv"));
}

TEST_CASE("probe-embedding") {
    const auto r = invoke({"probe-embedding", "--einstein", "20", "--N", "200", "--trials", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("lower bound") != std::string::npos);
}
