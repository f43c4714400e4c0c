#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string err_path = (dir / "dgs_cli_test.err").string();
  const std::string cmd = std::string(DGS_CLI_PATH) + " " + args + " 2>" + err_path;
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

std::string fixture(const std::string& name) { return std::string(DGS_FIXTURE_DIR) + "/" + name; }

}  // namespace

TEST_CASE("sample output is deterministic and independent of thread count") {
  const std::string base = "sample " + fixture("reference_m2.json") + " --seed 5 --trials 16";
  const auto a = run(base + " --parallel 1");
  const auto b = run(base + " --parallel 4");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  auto ja = nlohmann::json::parse(a.out);
  auto jb = nlohmann::json::parse(b.out);
  CHECK(ja.at("schema_version") == 1);
  ja["config"].erase("parallel");
  jb["config"].erase("parallel");
  CHECK(ja == jb);
  CHECK(run(base + " --parallel 1").out == a.out);
  CHECK(run("sample " + fixture("reference_m2.json") + " --seed 6 --trials 16").out != a.out);
}

TEST_CASE("missing instance gives a config error and no stdout") {
  const auto r = run("sample /nonexistent/instance.json");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  const auto err = nlohmann::json::parse(r.err);
  CHECK(err.at("error").at("kind") == "MissingInput");
}

TEST_CASE("failed runs leave no output file") {
  const auto path = (std::filesystem::temp_directory_path() / "dgs_cli_partial.json").string();
  std::filesystem::remove(path);
  const auto r = run("sample " + fixture("reference_m2.json") + " --nu 2 --out " + path);
  CHECK(r.code == 2);
  CHECK_FALSE(std::filesystem::exists(path));

  const auto ok = run("sample " + fixture("reference_m2.json") + " --out " + path);
  CHECK(ok.code == 0);
  CHECK(ok.out.empty());
  CHECK(nlohmann::json::parse(slurp(path)).contains("config"));
  std::filesystem::remove(path);
}

TEST_CASE("estimate reproduces the cost tables as CSV") {
  const auto r = run("estimate " + fixture("cost_tables.json") + " --format csv");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# {", 0) == 0);
  CHECK(r.out.find("146") != std::string::npos);
  CHECK(r.out.find("312") != std::string::npos);
}

TEST_CASE("mass table and SIS solver") {
  const auto m = run("mass " + fixture("reference_m2.json") + " --table");
  REQUIRE(m.code == 0);
  CHECK(nlohmann::json::parse(m.out).dump().find("1.07837") != std::string::npos);

  const auto s = run("solve-sis " + fixture("sis_toy.json") + " --mode quantum --trials 3");
  REQUIRE(s.code == 0);
  CHECK(s.out.find("\"x\"") != std::string::npos);
}

TEST_CASE("unknown options are config errors") {
  CHECK(run("sample " + fixture("reference_m2.json") + " --format xml").code == 2);
  CHECK(run("verify").code == 2);
}
