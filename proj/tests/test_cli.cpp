#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "simdyn/cli/runner.hpp"

using namespace simdyn;
using namespace simdyn::cli;
namespace fs = std::filesystem;

namespace {

RunRequest request(const std::string& sub, const std::string& text, unsigned threads = 1) {
  RunRequest r;
  r.subcommand = sub;
  r.config = Config::parse(text, "test.ini");
  r.threads = threads;
  return r;
}

std::string file_of(const RunOutput& out, const std::string& name) {
  for (const auto& f : out.files) {
    if (f.name == name) return f.content;
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("simdyn_test_" + name);
  fs::remove_all(p);
  return p;
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_path(const std::string& name) { return std::string(SIMDYN_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(ConfigParse, ValuesAndComments) {
  const auto c = Config::parse("# header\n[model]\ndegrees = [2, 3]  # pair\npotential = \"cos:1\"\nresolution = 256\n");
  EXPECT_EQ(c.get_int_list("model", "degrees"), (std::vector<int>{2, 3}));
  EXPECT_EQ(c.get_string("model", "potential", std::string()), "cos:1");
  EXPECT_EQ(c.get_count("model", "resolution", 0), 256u);
  EXPECT_FALSE(c.has("model", "tol"));
}

TEST(ConfigParse, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    try {
      Config::parse(text, "x.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("[model]\ndegrees = [2]\nbogus = 1\n").find("x.ini:3"), std::string::npos);
  EXPECT_NE(message("[model]\n[nowhere]\n").find("x.ini:2"), std::string::npos);
  EXPECT_NE(message("degrees = [2]\n").find("x.ini:1"), std::string::npos);
  EXPECT_NE(message("[model]\ndegrees [2]\n").find("x.ini:2"), std::string::npos);
  EXPECT_NE(message("[model\n").find("x.ini:1"), std::string::npos);
}

TEST(ConfigParse, OverridesAndHash) {
  auto c = Config::parse("[model]\ndegrees = [2, 3]\n");
  const auto h0 = c.hash();
  EXPECT_EQ(h0.size(), 16u);
  c.set("model.resolution=128");
  EXPECT_EQ(c.get_count("model", "resolution", 0), 128u);
  EXPECT_NE(c.hash(), h0);
  EXPECT_THROW(c.set("resolution=128"), ConfigError);
  EXPECT_THROW(c.set("model.unknown=1"), ConfigError);
  // Hash depends on content, not on layout.
  EXPECT_EQ(Config::parse("[model]\n degrees=[2, 3]\n\n# c\n").hash(), Config::parse("[model]\ndegrees = [2, 3]").hash());
}

TEST(Runner, PressureOfZeroPotential) {
  const auto out = execute(request("pressure", "[model]\ndegrees = [2, 3]\nresolution = 256\n"));
  EXPECT_NEAR(out.summary["pressure"].get<double>(), std::log(5.0), 1e-10);
  EXPECT_FALSE(file_of(out, "series.csv").empty());
  EXPECT_TRUE(file_of(out, "plot.csv").empty());
}

TEST(Runner, CountSingleStep) {
  const auto out = execute(request("count", "[model]\ndegrees = [2, 3]\n[count]\nwindow = [-1, 1]\n"));
  ASSERT_EQ(out.summary["results"].size(), 1u);
  EXPECT_EQ(out.summary["results"][0]["count"].get<std::uint64_t>(), 3u);
}

TEST(Runner, CountSeriesWithSkew) {
  const auto out = execute(request("count", "[model]\ndegrees = [2, 3]\n[count]\nn_min = 1\nn_max = 5\nskew = true\n"));
  std::uint64_t p5 = 1, p2 = 1;
  for (const auto& row : out.summary["results"]) {
    p5 *= 5;
    p2 *= 2;
    EXPECT_EQ(row["count"].get<std::uint64_t>(), p5 - p2);
    EXPECT_TRUE(row["skew_matches"].get<bool>());
  }
}

TEST(Runner, ErrorsMapToExitCodes) {
  auto code = [](const std::string& sub, const std::string& text) {
    try {
      execute(request(sub, text));
    } catch (const std::exception& e) {
      return exit_code_for(e);
    }
    return static_cast<int>(kOk);
  };
  EXPECT_EQ(code("count", "[model]\ndegrees = [2, 3]\n[count]\nwindow = [1, -1]\n"), kConfig);
  EXPECT_EQ(code("pressure", "[model]\ndegrees = [1]\n"), kConfig);
  EXPECT_EQ(code("pressure", "[model]\ndegrees = [2]\nresolution = 3\n"), kConfig);
  EXPECT_EQ(code("pressure", "[model]\ndegrees = [2]\npotential = \"nonsense\"\n"), kConfig);
  EXPECT_EQ(code("nope", "[model]\ndegrees = [2]\n"), kConfig);
  EXPECT_EQ(code("count", "[model]\ndegrees = [2, 3]\n[count]\nn_min = 12\nn_max = 12\n"), kBudget);
  EXPECT_EQ(code("kappa", "[model]\ndegrees = [2, 3]\nresolution = 64\n[kappa]\nf = \"const:1\"\n"), kHypothesis);
}

TEST(Runner, ConfigErrorsPointAtTheKey) {
  try {
    execute(request("count", "[model]\ndegrees = [2, 3]\n\n[count]\nwindow = [1, -1]\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("test.ini:5"), std::string::npos) << e.what();
  }
}

TEST(Runner, FailedRunWritesNothing) {
  const auto dir = scratch("fail");
  std::ostringstream err;
  const int rc = run(request("count", "[model]\ndegrees = [2, 3]\n[count]\nwindow = [1, -1]\n"), dir, err);
  EXPECT_EQ(rc, kConfig);
  EXPECT_FALSE(fs::exists(dir));
  EXPECT_FALSE(err.str().empty());
}

TEST(Runner, SuccessfulRunWritesArtifacts) {
  const auto dir = scratch("ok");
  std::ostringstream err;
  auto req = request("count", "[model]\ndegrees = [2, 3]\n[count]\nn_max = 3\nn_min = 1\n");
  req.emit_plot_data = true;
  ASSERT_EQ(run(req, dir, err), kOk) << err.str();
  for (const char* name : {"summary.json", "series.csv", "plot.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  std::ifstream in(dir / "series.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find(req.config.hash()), std::string::npos);
  fs::remove_all(dir);
}

TEST(Runner, DeterministicAcrossThreadCounts) {
  const std::string text = "[model]\ndegrees = [2, 3]\n[run]\nseed = 5\n[clt]\ng = \"centered\"\nn = 200\n"
                           "samples = 1000\npolicy = \"bernoulli\"\nbernoulli = [0.5, 0.5]\n";
  auto r1 = request("clt", text, 1);
  r1.emit_plot_data = true;
  auto r4 = r1;
  r4.threads = 4;
  auto r8 = r1;
  r8.threads = 8;
  const auto a = execute(r1), b = execute(r4), c = execute(r8);
  ASSERT_EQ(a.files.size(), 3u);
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    EXPECT_EQ(a.files[i].content, b.files[i].content) << a.files[i].name;
    EXPECT_EQ(a.files[i].content, c.files[i].content) << a.files[i].name;
  }
}

TEST(Runner, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(SIMDYN_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(Config::load(entry.path().string())) << entry.path();
  }
}

TEST(Executable, ExitCodes) {
  const std::string exe = SIMDYN_CLI_PATH;
  const auto dir = scratch("exe");
  EXPECT_EQ(shell(exe + " pressure --config " + config_path("pressure.ini") + " --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_EQ(shell(exe + " pressure --config " + config_path("pressure.ini") + " --out " + dir.string() +
                  " --set model.degrees=[1]"),
            kConfig);
  EXPECT_EQ(shell(exe + " count --config " + config_path("count.ini") + " --out " + dir.string() +
                  " --set count.n_max=12"),
            kBudget);
  EXPECT_EQ(shell(exe + " pressure --config /nonexistent.ini --out " + dir.string()), kConfig);
  EXPECT_EQ(shell(exe + " frobnicate"), kConfig);
  fs::remove_all(dir);
}
