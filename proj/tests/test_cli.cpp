#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mcrd_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int rdcli(const std::string& args) {
    const std::string cmd = std::string(RDCLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    const fs::path path = dir / "config.json";
    std::ofstream(path) << body;
    return path;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    return json::parse(in);
}

const char* kSmall = R"({
  "params": {"D": 0.002, "tau": 2.0, "alpha1": 1.0, "alpha2": 1.0},
  "grid": {"dim": 1, "n": [64]},
  "stepper": {"dt": 0.1, "t_end": 20.0, "output_every": 10},
  "initial": {"z_bar": 2.0},
  "stationary": {"guess": "dynamics", "relax_t_end": 2000.0},
  "spectrum": {"s_count": 5, "j_max": 3},
  "sweep": {"D": [0.002, 1.0], "relax_t_end": 10.0},
  "limit": {"lambda_hat": 2.0}
})";

}  // namespace

TEST_CASE("every mode runs on a small configuration") {
    const fs::path dir = scratch("modes");
    const fs::path cfg = write_config(dir, kSmall);
    for (const std::string mode : {"simulate", "stationary", "spectrum", "sweep", "limit-tau1"}) {
        CAPTURE(mode);
        CHECK(rdcli(mode + " --config " + cfg.string() + " --out " + (dir / mode).string()) == 0);
        CHECK(fs::exists(dir / mode / "manifest.json"));
    }
    CHECK(fs::exists(dir / "spectrum" / "spectrum.json"));
    CHECK(fs::exists(dir / "spectrum" / "mu_curves.csv"));
    CHECK(fs::exists(dir / "spectrum" / "spectrum.svg"));
    CHECK(fs::exists(dir / "sweep" / "sweep.csv"));
    CHECK(fs::exists(dir / "limit-tau1" / "limit_fields.csv"));
    const json spectrum = read_json(dir / "spectrum" / "spectrum.json");
    for (const char* key : {"eigs_A", "eigs_L", "morse_A", "morse_L", "realness_violations", "mu_samples"})
        CHECK(spectrum.contains(key));
}

TEST_CASE("no-plots and seed flags") {
    const fs::path dir = scratch("flags");
    const fs::path cfg = write_config(dir, kSmall);
    CHECK(rdcli("simulate --config " + cfg.string() + " --out " + (dir / "a").string() + " --no-plots --seed 7") == 0);
    CHECK_FALSE(fs::exists(dir / "a" / "profile.svg"));
    CHECK(read_json(dir / "a" / "manifest.json")["config"]["seed"] == 7);
    CHECK(rdcli("simulate --config " + cfg.string() + " --out " + (dir / "b").string() + " --no-plots --seed 7") == 0);
    const json a = read_json(dir / "a" / "manifest.json");
    const json b = read_json(dir / "b" / "manifest.json");
    CHECK(a["csv_digests"] == b["csv_digests"]);
    CHECK(rdcli("simulate --config " + cfg.string() + " --out " + (dir / "c").string() + " --no-plots --seed 8") == 0);
    CHECK(read_json(dir / "c" / "manifest.json")["csv_digests"] != a["csv_digests"]);
}

TEST_CASE("configuration errors exit with status 2") {
    const fs::path dir = scratch("config_errors");
    const fs::path bad = write_config(dir, R"({"params": {"D": -0.25}})");
    CHECK(rdcli("simulate --config " + bad.string() + " --out " + dir.string()) == 2);
    const json err = read_json(dir / "error.json");
    CHECK(err["status"] == 2);
    CHECK(err["kind"] == "config");
    CHECK(err["message"].get<std::string>().find("params.D") != std::string::npos);

    CHECK(rdcli("simulate --config " + (dir / "missing.json").string() + " --out " + dir.string()) == 2);
    CHECK(rdcli("wander --config " + bad.string()) == 2);
    CHECK(rdcli("simulate") == 2);
    setenv("RDCLI_WORKERS", "many", 1);
    CHECK(rdcli("sweep --config " + write_config(dir, kSmall).string() + " --out " + dir.string()) == 2);
    unsetenv("RDCLI_WORKERS");
}

TEST_CASE("solver failures exit with status 3") {
    const fs::path dir = scratch("solver_errors");
    const fs::path cfg = write_config(dir, R"({
      "params": {"D": 0.002, "tau": 2.0},
      "grid": {"n": [32]},
      "initial": {"lambda": -1.0},
      "spectrum": {"state": "homogeneous"}
    })");
    CHECK(rdcli("spectrum --config " + cfg.string() + " --out " + dir.string()) == 3);
    CHECK(read_json(dir / "error.json")["kind"] == "solver");
}

TEST_CASE("failed verification exits with status 4") {
    const fs::path dir = scratch("verify");
    const fs::path cfg = write_config(dir, R"({"verify": {"n": 32}})");
    const int code = rdcli("verify --config " + cfg.string() + " --out " + dir.string());
    const json manifest = read_json(dir / "manifest.json");
    CHECK(code == (manifest["all_passed"].get<bool>() ? 0 : 4));
    CHECK(fs::exists(dir / "acceptance.csv"));
}
