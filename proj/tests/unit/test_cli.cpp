#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/output.hpp"
#include "cli/run_config.hpp"

using namespace hyl::cli;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hyl_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "hyl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Value of `column` in the first data row of a CSV document.
std::string cell(const std::string& csv, const std::string& column, std::size_t row = 0) {
  const auto ls = lines(csv);
  const auto header = split(ls.at(1));
  const auto values = split(ls.at(2 + row));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) return values.at(i);
  }
  FAIL("no column " << column);
  return {};
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value) {
      setenv("HYL_THREADS", value, 1);
    } else {
      unsetenv("HYL_THREADS");
    }
  }
  ~EnvGuard() { unsetenv("HYL_THREADS"); }
};

}  // namespace

TEST_CASE("grid parsing") {
  const Grid g = parse_grid("0.5:1.5:3");
  CHECK(g.values() == std::vector<double>{0.5, 1.0, 1.5});
  CHECK(parse_grid("2:2:1").values() == std::vector<double>{2.0});
  CHECK(parse_grid(format_grid(parse_grid("0.1:0.7:7"))).values() == parse_grid("0.1:0.7:7").values());
  for (const char* bad : {"1:2", "1:2:0", "2:1:3", "a:2:3", "1:2:3.5", "1:inf:4", "1:2:1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_grid(bad), ConfigError);
  }
}

TEST_CASE("kappa parsing") {
  CHECK(parse_kappa("inf").is_infinite());
  CHECK(parse_kappa("0").is_zero());
  CHECK(parse_kappa("0.25").value() == 0.25);
  CHECK_THROWS_AS(parse_kappa("-1"), ConfigError);
  CHECK_THROWS_AS(parse_kappa("big"), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(hyl::kInfinity, 12) == "inf");
  CHECK(format_number(-hyl::kInfinity, 12) == "-inf");
  CHECK(format_number(0.1, 6) == "0.1");
  CHECK(format_number(1.0 / 3.0, 8) == "0.33333333");
  CHECK(format_cell(Cell{}, 12).empty());
  CHECK(format_cell(Cell{std::string("coexistence")}, 12) == "coexistence");
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("configuration errors exit with 2") {
  const auto out = temp_file("cfg.csv").string();
  CHECK(run({"transitions", "--d", "3", "--beta", "1", "--bogus", "--out", out}) == kExitConfig);
  CHECK(run({"transitions", "--d", "3", "--out", out}) == kExitConfig);
  CHECK(run({"transitions", "--d", "3", "--beta", "1", "--a", "0.5", "--b", "0.5", "--out", out}) == kExitConfig);
  CHECK(run({"pressure", "--d", "3", "--beta", "1", "--mu", "0", "--mu-grid", "0:1:3", "--out", out}) == kExitConfig);
  CHECK(run({"pressure", "--d", "3", "--beta", "1", "--mu", "0", "--precision", "3", "--out", out}) == kExitConfig);
  CHECK(run({"simulate", "--d", "3", "--beta", "1", "--mu", "0", "--out", out}) == kExitConfig);
  CHECK(run({"bose", "--n", "1", "--u", "0", "--format", "xml", "--out", out}) == kExitConfig);
}

TEST_CASE("numeric failures exit with 3, partial failures with 4") {
  const auto out = temp_file("num.csv");
  CHECK(run({"bose", "--n", "1", "--u", "0", "--out", out.string()}) == kExitNumeric);
  CHECK(run({"bose", "--n", "1", "--u", "-0.1,0", "--out", out.string()}) == kExitPartial);
  const std::string csv = slurp(out);
  CHECK(cell(csv, "error", 0).empty());
  CHECK_FALSE(cell(csv, "error", 1).empty());
  CHECK(run({"bose", "--n", "1.5,2.5", "--u", "-0.1,0", "--out", out.string()}) == kExitOk);
}

TEST_CASE("CSV layout and provenance footer") {
  const auto out = temp_file("layout.csv");
  REQUIRE(run({"pressure", "--d", "3", "--beta", "1", "--mu-grid", "0:0.1:5", "--out", out.string()}) == kExitOk);
  const std::string csv = slurp(out);
  const auto ls = lines(csv);
  CHECK(ls[0] == "schema=1");
  CHECK(split(ls[1])[0] == "beta");
  std::string body;
  std::string hash;
  std::size_t data_rows = 0;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (ls[i].rfind("#", 0) == 0) {
      if (ls[i].rfind("# content_hash=", 0) == 0) hash = ls[i].substr(15);
      continue;
    }
    body += ls[i] + "\n";
    if (i >= 2) ++data_rows;
  }
  CHECK(data_rows == 5);
  CHECK(hash == git_blob_hash(body));
  CHECK(csv.find("# params=") != std::string::npos);
}

TEST_CASE("literal inf and coexistence cells") {
  const auto out = temp_file("lit.csv");
  REQUIRE(run({"transitions", "--d", "1", "--beta", "1", "--out", out.string()}) == kExitOk);
  CHECK(cell(slurp(out), "mu_c") == "inf");

  REQUIRE(run({"transitions", "--d", "3", "--beta", "1", "--precision", "17", "--out", out.string()}) == kExitOk);
  const std::string mu_star = cell(slurp(out), "mu_star");
  REQUIRE(run({"phase-diagram", "--d", "3", "--beta", "1", "--mu", mu_star, "--out", out.string()}) == kExitOk);
  const std::string csv = slurp(out);
  CHECK(cell(csv, "label") == "coexistence");
  CHECK(cell(csv, "rho") == "coexistence");
}

TEST_CASE("kappa = inf is written and read back as a literal") {
  const auto out = temp_file("kinf.json");
  REQUIRE(run({"pressure", "--d", "3", "--beta", "1", "--mu", "0.1", "--kappa", "inf", "--format", "json", "--out",
               out.string()}) == kExitOk);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["config"]["kappa"] == "inf");
  CHECK(load_config_file(out.string()).kappa.is_infinite());
}

TEST_CASE("JSON output round-trips as a run configuration") {
  const auto first = temp_file("rt1.json");
  const auto second = temp_file("rt2.json");
  REQUIRE(run({"pressure", "--d", "3", "--beta-grid", "0.5:1.5:3", "--mu-grid", "-0.1:0.2:4", "--kappa", "0.1",
               "--b", "0.3", "--format", "json", "--precision", "14", "--out", first.string()}) == kExitOk);
  const auto j1 = nlohmann::json::parse(slurp(first));
  CHECK(j1["schema"] == 1);
  const RunConfig cfg = load_config_file(first.string());
  CHECK(to_json(cfg) == j1["config"]);
  REQUIRE(run({"--config", first.string(), "--out", second.string()}) == kExitOk);
  const auto j2 = nlohmann::json::parse(slurp(second));
  CHECK(j2["rows"] == j1["rows"]);
  CHECK(j2["config"] == j1["config"]);
  CHECK(j2["provenance"]["content_hash"] == j1["provenance"]["content_hash"]);
}

TEST_CASE("output is deterministic") {
  const auto a = temp_file("det_a.csv");
  const auto b = temp_file("det_b.csv");
  const std::vector<std::string> args = {"simulate", "--d", "3", "--beta", "1", "--mu", "0.1", "--volumes", "4,8",
                                         "--steps", "40000", "--burn-in", "2000", "--ti-nodes", "0", "--seed", "9"};
  auto with_out = [&](const fs::path& p) {
    auto v = args;
    v.push_back("--out");
    v.push_back(p.string());
    return v;
  };
  REQUIRE(run(with_out(a)) == kExitOk);
  REQUIRE(run(with_out(b)) == kExitOk);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("HYL_THREADS caps the thread count") {
  const auto out = temp_file("thr.csv").string();
  const std::vector<std::string> args = {"phase-diagram", "--d", "3", "--beta-grid", "0.5:2:4", "--mu-grid",
                                         "-0.1:0.2:7", "--out", out};
  std::string reference;
  {
    EnvGuard env(nullptr);
    REQUIRE(run(args) == kExitOk);
    reference = slurp(out);
  }
  {
    EnvGuard env("1");
    CHECK(thread_cap() == 1);
    REQUIRE(run(args) == kExitOk);
    CHECK(slurp(out) == reference);
  }
  for (const char* bad : {"0", "-2", "two"}) {
    EnvGuard env(bad);
    CHECK_THROWS_AS(thread_cap(), ConfigError);
    CHECK(run(args) == kExitConfig);
  }
}

TEST_CASE("config file command must match") {
  const auto out = temp_file("cmd.json");
  REQUIRE(run({"transitions", "--d", "3", "--beta", "1", "--format", "json", "--out", out.string()}) == kExitOk);
  CHECK(run({"pressure", "--config", out.string(), "--out", temp_file("x.csv").string()}) == kExitConfig);
  CHECK(run({"--config", temp_file("missing.json").string()}) == kExitConfig);
}
