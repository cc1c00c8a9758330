#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sonolab/errors.hpp"
#include "sonolab/io.hpp"
#include "sonolab/runner.hpp"

using namespace sonolab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path work_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "sonolab_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

struct SpawnResult {
  int code = -1;
  std::string out;
  std::string err;
};

SpawnResult spawn_cli(const std::string& args, const std::string& tag) {
  const char* cli = std::getenv("SONOLAB_CLI");
  REQUIRE(cli != nullptr);
  const fs::path out_f = work_root() / (tag + ".out");
  const fs::path err_f = work_root() / (tag + ".err");
  const std::string cmd = std::string("\"") + cli + "\" " + args + " > " +
                          out_f.string() + " 2> " + err_f.string();
  const int rc = std::system(cmd.c_str());
  SpawnResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = io::read_text(out_f);
  r.err = io::read_text(err_f);
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("number formatting round-trips doubles") {
  CHECK(io::format_number(0.5) == "0.5");
  CHECK(io::format_number(1.0) == "1");
  CHECK(io::format_number(-3.0) == "-3");
  for (double v : {1.0 / 3.0, 6.02214076e23, -2.5e-8, 0.1 + 0.2, 1e300}) {
    CHECK(std::stod(io::format_number(v)) == v);
  }
}

TEST_CASE("csv table enforces the column count") {
  io::CsvTable t;
  t.header = {"a", "b"};
  t.add_row({"1", "2"});
  CHECK(t.render() == "a,b\n1,2\n");
  CHECK_THROWS_AS(t.add_row({"only"}), IoError);
  CHECK_THROWS_AS(t.add_row({"1", "2", "3"}), IoError);
}

TEST_CASE("atomic text files write, read back, and hash") {
  const fs::path p = work_root() / "abc.txt";
  io::write_text_atomic(p, "abc");
  CHECK(io::read_text(p) == "abc");
  CHECK(io::sha256_file(p) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  io::write_text_atomic(p, "second version");
  CHECK(io::read_text(p) == "second version");
  // No stray temporary may survive the rename.
  for (const auto& e : fs::directory_iterator(work_root())) {
    CHECK(e.path().extension() != ".tmp");
  }

  CHECK_THROWS_AS((void)io::read_text(work_root() / "missing.txt"), IoError);
  CHECK_THROWS_AS((void)io::sha256_file(work_root() / "missing.txt"), IoError);
}

TEST_CASE("manifest checksums its outputs and rejects missing ones") {
  const fs::path dir = work_root() / "manifest_case";
  fs::create_directories(dir);
  io::write_text_atomic(dir / "data.csv", "x\n1\n");

  io::RunManifest m;
  m.command = "probe";
  m.seed = 9;
  m.parameters = {{"k", 1}};
  m.annotations = {{"unit", "none"}};
  m.outputs = {{"data.csv", ""}};
  io::write_manifest(dir, m);

  const json j = json::parse(io::read_text(dir / "manifest.json"));
  CHECK(j.at("tool") == "sonolab");
  CHECK(j.at("command") == "probe");
  CHECK(j.at("seed") == 9);
  CHECK(j.at("parameters").at("k") == 1);
  REQUIRE(j.at("outputs").size() == 1);
  CHECK(j.at("outputs")[0].at("file") == "data.csv");
  CHECK(j.at("outputs")[0].at("sha256") == io::sha256_file(dir / "data.csv"));
  const std::string created = j.at("created_utc");
  CHECK(created.size() == 20);
  CHECK(created.back() == 'Z');

  io::RunManifest bad = m;
  bad.outputs = {{"missing.csv", ""}};
  CHECK_THROWS_AS(io::write_manifest(dir, bad), IoError);
}

TEST_CASE("request resolution layers defaults, file, then flags") {
  const json file = {{"subcommand", "bell"},
                     {"seed", 7},
                     {"trials", 500},
                     {"output_dir", "from_file"}};
  const json flags = {{"trials", 800}};

  const run::RunRequest r1 = run::resolve_run("bell", file, flags, nullptr, nullptr);
  CHECK(r1.params.at("trials") == 800);
  CHECK(r1.seed == 7);
  CHECK(r1.out_dir == fs::path("from_file"));
  CHECK(r1.params.at("model") == "shared_phase");

  const run::RunRequest r2 = run::resolve_run("bell", file, json::object(),
                                              json(42), json("flag_dir"));
  CHECK(r2.seed == 42);
  CHECK(r2.out_dir == fs::path("flag_dir"));
  CHECK(r2.params.at("trials") == 500);

  const run::RunRequest r3 =
      run::resolve_run("bell", nullptr, json::object(), nullptr, nullptr);
  CHECK(r3.seed == 0);
  CHECK(r3.out_dir == fs::path("runs") / "bell");
  CHECK(r3.params == run::default_params("bell"));

  CHECK_THROWS_AS(run::resolve_run("bell", json{{"bogus", 1}}, json::object(),
                                   nullptr, nullptr),
                  ConfigError);
  CHECK_THROWS_AS(run::resolve_run("bell", json{{"subcommand", "kuramoto"}},
                                   json::object(), nullptr, nullptr),
                  ConfigError);
  CHECK_THROWS_AS(run::resolve_run("bell", json::array(), json::object(),
                                   nullptr, nullptr),
                  ConfigError);
}

TEST_CASE("cli usage lists every subcommand") {
  const SpawnResult r = spawn_cli("--help", "help");
  CHECK(r.code == 0);
  for (const char* name :
       {"field-scan", "pilot-wave", "kuramoto", "bell", "audit"}) {
    CHECK(r.out.find(name) != std::string::npos);
  }
}

TEST_CASE("field scan run produces verifiable outputs") {
  const fs::path dir = work_root() / "scan_a";
  const SpawnResult r = spawn_cli(
      "field-scan --seed 1 --count 21 --out " + dir.string(), "scan_a");
  CHECK(r.code == 0);
  CHECK(r.out.find("run complete:") != std::string::npos);

  const std::string csv = io::read_text(dir / "scan.csv");
  const auto rows = lines_of(csv);
  REQUIRE(rows.size() == 22);
  CHECK(rows[0] == "r,xi_re,xi_im,xi_abs,chi_far,rel_dev");

  // Recompute the checksum independently of the writer.
  const json man = json::parse(io::read_text(dir / "manifest.json"));
  bool found = false;
  for (const auto& e : man.at("outputs")) {
    if (e.at("file") == "scan.csv") {
      CHECK(e.at("sha256") == io::sha256_file(dir / "scan.csv"));
      found = true;
    }
  }
  CHECK(found);
  CHECK(man.at("command") == "field-scan");
  CHECK(man.at("seed") == 1);
}

TEST_CASE("identical seed and config reproduce identical bytes") {
  const fs::path d1 = work_root() / "rep_1";
  const fs::path d2 = work_root() / "rep_2";
  CHECK(spawn_cli("bell --seed 4 --trials 2000 --out " + d1.string(), "rep1")
            .code == 0);
  CHECK(spawn_cli("bell --seed 4 --trials 2000 --out " + d2.string(), "rep2")
            .code == 0);
  CHECK(io::read_text(d1 / "chsh.csv") == io::read_text(d2 / "chsh.csv"));

  const fs::path d3 = work_root() / "rep_3";
  CHECK(spawn_cli("bell --seed 5 --trials 2000 --out " + d3.string(), "rep3")
            .code == 0);
  CHECK(io::read_text(d1 / "chsh.csv") != io::read_text(d3 / "chsh.csv"));
}

TEST_CASE("config file drives a run and flags override its seed") {
  const fs::path cfg = work_root() / "bell_cfg.json";
  io::write_text_atomic(
      cfg, json{{"subcommand", "bell"}, {"seed", 7}, {"trials", 1500}}.dump());

  const fs::path d1 = work_root() / "cfg_run1";
  const SpawnResult r1 = spawn_cli(
      "bell --config " + cfg.string() + " --out " + d1.string(), "cfg1");
  CHECK(r1.code == 0);
  json man = json::parse(io::read_text(d1 / "manifest.json"));
  CHECK(man.at("seed") == 7);
  CHECK(man.at("parameters").at("trials") == 1500);
  CHECK(man.at("parameters").at("model") == "shared_phase");
  const auto rows = lines_of(io::read_text(d1 / "chsh.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "setting_pair,E,stderr");

  const fs::path d2 = work_root() / "cfg_run2";
  const SpawnResult r2 = spawn_cli(
      "bell --config " + cfg.string() + " --seed 42 --out " + d2.string(),
      "cfg2");
  CHECK(r2.code == 0);
  man = json::parse(io::read_text(d2 / "manifest.json"));
  CHECK(man.at("seed") == 42);
}

TEST_CASE("unknown config keys abort with a config error") {
  const fs::path cfg = work_root() / "bad_cfg.json";
  io::write_text_atomic(cfg,
                        json{{"subcommand", "bell"}, {"bogus", 1}}.dump());
  const SpawnResult r = spawn_cli(
      "bell --config " + cfg.string() + " --out " +
          (work_root() / "bad_run").string(),
      "badkey");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown key \"bogus\"") != std::string::npos);
}

TEST_CASE("out-of-range sweep angles abort with a config error") {
  const SpawnResult r = spawn_cli(
      "kuramoto --angles [200] --trials 10 --out " +
          (work_root() / "angle_run").string(),
      "angles");
  CHECK(r.code == 2);
  CHECK(r.err.find("angles") != std::string::npos);
}

TEST_CASE("unwritable output location maps to a runtime failure") {
  const SpawnResult r =
      spawn_cli("bell --trials 200 --out /dev/null/sub", "unwritable");
  CHECK(r.code == 3);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("trajectory run emits paths and a histogram") {
  const fs::path dir = work_root() / "traj_run";
  const SpawnResult r = spawn_cli(
      "pilot-wave --scenario plane_wave --trials 50 --seed 2 --out " +
          dir.string(),
      "traj");
  CHECK(r.code == 0);
  const auto traj_rows = lines_of(io::read_text(dir / "trajectories.csv"));
  CHECK(traj_rows[0] == "traj_id,t,x");
  const auto hist_rows = lines_of(io::read_text(dir / "histogram.csv"));
  CHECK(hist_rows[0] == "bin_center,count,psi2");
  const json man = json::parse(io::read_text(dir / "manifest.json"));
  CHECK(man.at("parameters").at("trajectories") == 50);
}

TEST_CASE("audit run reports every preset") {
  const char* presets = std::getenv("SONOLAB_PRESETS");
  REQUIRE(presets != nullptr);
  const fs::path dir = work_root() / "audit_run";
  const SpawnResult r = spawn_cli(
      std::string("audit --presets_dir ") + presets + " --out " + dir.string(),
      "audit");
  CHECK(r.code == 0);

  int reports = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("audit_", 0) == 0) {
      ++reports;
      const json rep = json::parse(io::read_text(e.path()));
      CHECK(rep.contains("classification"));
      CHECK(rep.contains("detector_separation_m"));
    }
  }
  CHECK(reports == 4);
}
