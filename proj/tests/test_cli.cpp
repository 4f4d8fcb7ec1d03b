#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "hallsim/commands.hpp"
#include "hallsim/config.hpp"
#include "hallsim/error.hpp"

using namespace hallsim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hallsim_cli_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Run run_cli(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  std::string cmd = std::string("\"") + HALLSIM_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out), slurp(err)};
}

std::string config(const std::string& name) { return std::string(HALLSIM_CONFIG_DIR) + "/" + name + ".conf"; }

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config grammar") {
  auto c = Config::parse_string(
      "# heading\n"
      "geometry.kind = cylinder   # trailing\n"
      "\n"
      "  geometry.R=8\n"
      "window.list = 1, 0.5 ,0.25\n"
      "flag.on = yes\n"
      "flag.off = 0\n");
  CHECK(c.get_string("geometry.kind") == "cylinder");
  CHECK(c.get_double("geometry.R") == 8.0);
  CHECK(c.get_int("geometry.R") == 8);
  CHECK(c.get_doubles("window.list", {}) == std::vector<double>{1.0, 0.5, 0.25});
  CHECK(c.get_bool("flag.on", false));
  CHECK_FALSE(c.get_bool("flag.off", true));
  CHECK(c.get_double("missing.key", 3.5) == 3.5);
  CHECK(c.get_string("missing.key", "x") == "x");
  CHECK_FALSE(c.has("missing.key"));
}

TEST_CASE("config errors name the key") {
  auto key_of = [](const std::string& text) {
    try {
      Config::parse_string(text);
    } catch (const ConfigError& e) {
      return e.key() + "|" + e.what();
    }
    return std::string("none");
  };
  CHECK(key_of("a.b = 1\na.b = 2\n").find("duplicate key") != std::string::npos);
  CHECK(key_of("a.b = 1\na.b = 2\n").rfind("a.b|", 0) == 0);
  CHECK(key_of("just words\n").find("expected 'key = value'") != std::string::npos);
  CHECK(key_of("bad key = 1\n").find("malformed key") != std::string::npos);
  CHECK(key_of(".lead = 1\n").find("malformed key") != std::string::npos);

  auto c = Config::parse_string("grid.n = 12.5\ngrid.lo = abc\nflag.x = maybe\nlist.x = 1,,2\n");
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("none");
  };
  CHECK(code([&] { c.get_int("grid.n"); }) == "grid.n");
  CHECK(code([&] { c.get_double("grid.lo"); }) == "grid.lo");
  CHECK(code([&] { c.get_bool("flag.x", true); }) == "flag.x");
  CHECK(code([&] { c.get_doubles("list.x", {}); }) == "list.x");
  CHECK(code([&] { c.get_double("grid.hi"); }) == "grid.hi");
  CHECK_THROWS_AS(c.set("no spaces allowed", "1"), ConfigError);
}

TEST_CASE("unused keys are rejected") {
  auto c = Config::parse_string("a.x = 1\na.y = 2\n");
  c.get_int("a.x");
  try {
    c.reject_unused();
    FAIL("unused key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "a.y");
    CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
  }
  c.get_int("a.y");
  CHECK_NOTHROW(c.reject_unused());
}

TEST_CASE("canonical text and hash ignore order and comments") {
  auto a = Config::parse_string("b.y = 2\na.x = 1\n");
  auto b = Config::parse_string("# c\na.x = 1   \n\nb.y=2\n");
  CHECK(a.canonical() == "a.x = 1\nb.y = 2\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != Config::parse_string("a.x = 1\nb.y = 3\n").hash());
  // FNV-1a 64 reference vectors
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("1,2,5-8") == std::vector<std::uint64_t>{1, 2, 5, 6, 7, 8});
  CHECK(parse_seed_list(" 3 ") == std::vector<std::uint64_t>{3});
  CHECK(parse_seed_list("4-4") == std::vector<std::uint64_t>{4});
  CHECK_THROWS_AS(parse_seed_list("8-5"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("x"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
}

TEST_CASE("commands validate before computing") {
  const auto& names = command_names();
  for (const char* n : {"bands", "flow", "current", "hall", "mourre", "resolvent", "decay", "disorder", "constants"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());

  auto c = Config::parse_string("units.B = 1\n");
  try {
    run_command("bands", c, {});
    FAIL("missing geometry accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "geometry.kind");
    CHECK(exit_code_for(e) == 2);
  }
  CHECK_THROWS_AS(run_command("nonsense", c, {}), ConfigError);
  CHECK(exit_code_for(Error(ErrorCode::NonConvergence, "x")) == 3);
}

TEST_CASE("missing key exits with code 2 and names the key") {
  auto dir = scratch("missing");
  std::ofstream(dir / "in.conf") << "units.B = 1\n";
  auto r = run_cli("bands -c \"" + (dir / "in.conf").string() + "\" -o \"" + dir.string() + "\"", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("geometry.kind") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "bands.csv"));
}

TEST_CASE("unknown override and bad values exit with code 2") {
  auto dir = scratch("unknown");
  auto r = run_cli("bands -c \"" + config("bands_dirichlet") + "\" --set bogus.key=1 -o \"" + dir.string() + "\"", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("bogus.key") != std::string::npos);
  r = run_cli("bands -c \"" + config("bands_dirichlet") + "\" --set units.B=abc -o \"" + dir.string() + "\"", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("units.B") != std::string::npos);
  r = run_cli("bands -c \"" + (dir / "absent.conf").string() + "\" -o \"" + dir.string() + "\"", dir);
  CHECK(r.code == 2);
}

TEST_CASE("solver failure exits with code 3") {
  auto dir = scratch("failure");
  auto r = run_cli("decay -c \"" + config("decay_corbino") + "\" --set decay.a=15.5 -o \"" + dir.string() + "\"", dir);
  CHECK(r.code == 3);
  CHECK(r.err.find("InsufficientDecayRange") != std::string::npos);
}

TEST_CASE("repeated runs are byte identical") {
  for (const char* name : {"bands_cylinder", "resolvent", "disorder", "mourre_strong"}) {
    std::string n(name), cmd = n.substr(0, n.find('_'));
    auto a = scratch(n + "_a"), b = scratch(n + "_b");
    REQUIRE(run_cli(cmd + " -c \"" + config(n) + "\" -o \"" + a.string() + "\"", a).code == 0);
    REQUIRE(run_cli(cmd + " -c \"" + config(n) + "\" -j 4 -o \"" + b.string() + "\"", b).code == 0);
    for (const auto& e : fs::directory_iterator(a)) {
      auto f = e.path().filename();
      if (f == "stdout.txt" || f == "stderr.txt") continue;
      INFO(n << "/" << f.string());
      CHECK(slurp(e.path()) == slurp(b / f));
    }
  }
}

TEST_CASE("outputs match the golden files") {
  for (const char* name : {"bands", "constants", "resolvent", "disorder"}) {
    fs::path golden = fs::path(HALLSIM_GOLDEN_DIR) / name;
    auto dir = scratch(std::string("golden_") + name);
    auto r = run_cli(std::string(name) + " -c \"" + (golden / "input.conf").string() + "\" -o \"" + dir.string() + "\"", dir);
    REQUIRE(r.code == 0);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(golden)) {
      auto f = e.path().filename();
      if (f == "input.conf") continue;
      INFO(name << "/" << f.string());
      REQUIRE(fs::exists(dir / f));
      CHECK(slurp(dir / f) == slurp(e.path()));
      CHECK(r.out.find(f.string()) != std::string::npos);
      ++compared;
    }
    CHECK(compared > 0);
  }
}

TEST_CASE("every json carries a schema id and the config hash") {
  auto dir = scratch("schema");
  for (const char* name : {"bands_dirichlet", "constants", "resolvent", "decay_corbino", "mourre"}) {
    std::string n(name), cmd = n.substr(0, n.find('_'));
    REQUIRE(run_cli(cmd + " -c \"" + config(n) + "\" -o \"" + dir.string() + "\"", dir).code == 0);
    auto j = load_json(dir / (cmd + ".json"));
    CHECK(j["schema"] == "hallsim." + cmd + "/1");
    std::ostringstream hex;
    hex << std::hex << Config::load(config(n)).hash();
    std::string h = hex.str();
    CHECK(j["config_hash"] == std::string(16 - h.size(), '0') + h);
  }
}

TEST_CASE("dirichlet bands approach the Landau levels deep in the bulk") {
  auto dir = scratch("bands");
  REQUIRE(run_cli("bands -c \"" + config("bands_dirichlet") + "\" -o \"" + dir.string() + "\"", dir).code == 0);
  std::istringstream csv(slurp(dir / "bands.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "kappa,band,energy,residual,guiding_center");
  std::vector<double> last(3);
  double kappa_max = -1e300;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string k, n, e;
    std::getline(row, k, ',');
    std::getline(row, n, ',');
    std::getline(row, e, ',');
    double kv = std::stod(k);
    if (kv >= kappa_max) {
      kappa_max = kv;
      last[std::stoi(n)] = std::stod(e);
    }
  }
  CHECK(last[0] == doctest::Approx(1.0).epsilon(1e-3).scale(0.0));
  CHECK(last[1] == doctest::Approx(3.0).epsilon(1e-3).scale(0.0));
  CHECK(last[2] == doctest::Approx(5.0).epsilon(1e-3).scale(0.0));
}

TEST_CASE("hall command reports the first plateau") {
  auto dir = scratch("hall");
  REQUIRE(run_cli("hall -c \"" + config("hall_nu1") + "\" -j 4 -o \"" + dir.string() + "\"", dir).code == 0);
  auto j = load_json(dir / "hall.json");
  CHECK(j["nu_estimate"].get<double>() == 1.0);
  CHECK(std::abs(j["sigma"].get<double>() - 1.0) < 0.05);
}

TEST_CASE("constants scaling slopes") {
  auto dir = scratch("constants");
  REQUIRE(run_cli("constants -c \"" + config("constants") + "\" -o \"" + dir.string() + "\"", dir).code == 0);
  auto s = load_json(dir / "constants.json")["scaling"];
  CHECK(s["slope_C1"].get<double>() == doctest::Approx(1.0).epsilon(0.2).scale(0.0));
  CHECK(s["slope_C2"].get<double>() == doctest::Approx(-3.0).epsilon(0.2 / 3).scale(0.0));
  CHECK(s["slope_C3"].get<double>() == doctest::Approx(-1.0).epsilon(0.2).scale(0.0));
  CHECK(s["slope_alpha_tilde"].get<double>() == doctest::Approx(3.0).epsilon(0.1).scale(0.0));
}

TEST_CASE("disorder above threshold is a result, not a failure") {
  auto dir = scratch("strong");
  auto r = run_cli("mourre -c \"" + config("mourre_strong") + "\" -o \"" + dir.string() + "\"", dir);
  CHECK(r.code == 0);
  auto j = load_json(dir / "mourre.json");
  CHECK(j["pass"] == false);
  CHECK_FALSE(j["warnings"].empty());
}

TEST_CASE("seed flag overrides the config seeds") {
  auto dir = scratch("seeds");
  REQUIRE(run_cli("disorder -c \"" + config("disorder") + "\" --seeds 2,4-5 -o \"" + dir.string() + "\"", dir).code == 0);
  auto j = load_json(dir / "disorder.json");
  REQUIRE(j["seeds"].size() == 3);
  CHECK(j["seeds"][0]["seed"] == 2);
  CHECK(j["seeds"][2]["seed"] == 5);
}

}  // TEST_SUITE
