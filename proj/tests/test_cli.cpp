#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "meanfield/cli.hpp"
#include "meanfield/config.hpp"
#include "meanfield/error.hpp"
#include "meanfield/report.hpp"

using namespace meanfield;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "meanfield_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

fs::path config_file(const std::string& name) { return fs::path(MEANFIELD_CONFIG_DIR) / name; }

int run_quiet(const CliOptions& o, std::string* captured = nullptr) {
  std::ostringstream out;
  const int code = run(o, out);
  if (captured) *captured = out.str();
  return code;
}

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::parse(
      "# comment\n"
      "[params]\n"
      "rho = \"5*pi\"\n"
      "; another comment\n"
      "rho_prime = -1.5   \n"
      "\n"
      "[sweep]\n"
      "warm_start = true\n"
      "lambdas = 8, 16, 2^5\n");
  CHECK(c.get_double("params", "rho", 0.0) == doctest::Approx(5.0 * std::numbers::pi));
  CHECK(c.require_double("params", "rho_prime") == -1.5);
  CHECK(c.get_bool("sweep", "warm_start", false));
  CHECK(c.get_list("sweep", "lambdas", {}) == std::vector<double>{8.0, 16.0, 32.0});
  CHECK(c.get_int("solver", "max_iters", 77) == 77);
  CHECK(c.get_string("params", "missing", "x") == "x");
  CHECK(c.has("params", "rho"));
  CHECK_FALSE(c.has("params", "zzz"));
  CHECK(c.find("params", "rho") == std::optional<std::string>("5*pi"));
  CHECK_THROWS_AS(c.require_string("params", "zzz"), ConfigError);
}

TEST_CASE("config errors name the line") {
  auto message = [](const std::string& text) {
    try {
      Config::parse(text, "cfg.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[a]\nkey value\n").find("cfg.ini:2") != std::string::npos);
  CHECK(message("key = 1\n").find("cfg.ini:1") != std::string::npos);
  CHECK(message("[a]\nk = 1\nk = 2\n").find("cfg.ini:3") != std::string::npos);
  CHECK(message("[a\n").find("cfg.ini:1") != std::string::npos);
  CHECK_FALSE(message("[a]\nk = 1\n").size());
}

TEST_CASE("typed getters reject bad values") {
  const Config c = Config::parse("[s]\nn = 2.5\nb = maybe\nx = \"x + 1\"\nbad = 1 +\n");
  CHECK_THROWS_AS(c.get_int("s", "n", 0), ConfigError);
  CHECK_THROWS_AS(c.get_bool("s", "b", false), ConfigError);
  CHECK_THROWS_AS(c.get_double("s", "x", 0.0), ConfigError);
  CHECK_THROWS_AS(c.get_double("s", "bad", 0.0), ConfigError);
  CHECK(parse_constant("2*pi", "value") == doctest::Approx(2.0 * std::numbers::pi));
  CHECK_THROWS_AS(parse_constant("r", "value"), ConfigError);
  CHECK(split_list(" a, b ,,c ", ',') == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("overrides and canonical echo") {
  Config c = Config::parse("[b]\nz = 1\ny = \"two words\"\n[a]\nk = 3\n");
  c.apply_override("b.z=5");
  c.apply_override("new.key = 7");
  CHECK(c.get_int("b", "z", 0) == 5);
  CHECK(c.get_int("new", "key", 0) == 7);
  CHECK_THROWS_AS(c.apply_override("nodot=1"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("a.k"), ConfigError);
  const std::string echo = c.canonical_echo();
  CHECK(echo.find("[a]") < echo.find("[b]"));
  CHECK(echo.find("y = \"two words\"") < echo.find("z = \"5\""));
  const Config back = Config::parse(echo);
  CHECK(back.sections() == c.sections());
  CHECK(back.canonical_echo() == echo);
  CHECK(back.content_hash() == c.content_hash());
  c.erase("new", "key");
  CHECK_FALSE(c.has("new", "key"));
}

TEST_CASE("git blob hash") {
  // `printf 'hello\n' | git hash-object --stdin`
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("csv helpers") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);

  const fs::path dir = scratch("csv");
  CsvWriter w(dir / "t.csv", {"a", "b"});
  w.row({"1", "x,y"});
  CHECK_THROWS(w.row({"only one"}));
  w.close();
  CHECK(slurp(dir / "t.csv") == "a,b\n1,\"x,y\"\n");
  CHECK_THROWS_AS(write_text_file(dir / "missing" / "deep" / "f.txt", "x"), IoError);
}

TEST_CASE("history csv has a header and one row per iterate") {
  SolveReport r;
  r.grad_norm_history = {1.0, 0.5, 0.1};
  r.energy_history = {3.0, 2.0, 1.5};
  r.step_history = {1.0, 0.5};
  const fs::path dir = scratch("history");
  write_history_csv(r, dir / "h.csv");
  std::istringstream in(slurp(dir / "h.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "iteration,grad_norm,energy,step");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("diverging colormap") {
  CHECK(diverging_color(0).r == 59);
  CHECK(diverging_color(0).b == 192);
  CHECK(diverging_color(255).r == 180);
  CHECK(diverging_color(255).g == 4);
  const Rgb mid = diverging_color(128);
  CHECK(std::abs(mid.r - 221) <= 2);
  CHECK(color_index(0.0, 0.0, 1.0) == 0);
  CHECK(color_index(1.0, 0.0, 1.0) == 255);
  CHECK(color_index(0.5, 0.0, 1.0) == 128);
  CHECK(color_index(7.0, 2.0, 2.0) == 128);
  CHECK(color_index(-5.0, 0.0, 1.0) == 0);
}

TEST_CASE("svg heatmap") {
  const SurfaceMesh mesh = build_disk_mesh({16, 64});
  const auto flat = heatmap_indices(mesh, Field::Constant(mesh.num_vertices(), 2.0));
  CHECK(std::set<int>(flat.begin(), flat.end()).size() == 1);

  Field bump(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point p = mesh.vertices()[v];
    bump[v] = -((p.x - 0.3) * (p.x - 0.3) + p.y * p.y);
  }
  const auto idx = heatmap_indices(mesh, bump);
  const auto top = std::max_element(idx.begin(), idx.end()) - idx.begin();
  const auto& t = mesh.triangles()[top];
  double cx = 0, cy = 0;
  for (int k = 0; k < 3; ++k) {
    cx += mesh.vertices()[t[k]].x / 3.0;
    cy += mesh.vertices()[t[k]].y / 3.0;
  }
  CHECK(std::hypot(cx - 0.3, cy) < 2.0 * mesh.max_edge_length());

  const fs::path dir = scratch("svg");
  write_svg_heatmap(mesh, bump, dir / "a.svg");
  write_svg_heatmap(mesh, bump, dir / "b.svg");
  CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
  CHECK(slurp(dir / "a.svg").rfind("<svg", 0) != std::string::npos);
  CHECK_THROWS_AS(write_svg_heatmap(mesh, Field::Zero(3), dir / "c.svg"), FieldError);
}

TEST_CASE("solve on the constant-solution config") {
  const fs::path out = scratch("solve");
  CliOptions o{"solve", config_file("solve_constant.ini"), out, std::nullopt, {}, std::nullopt};
  REQUIRE(run_quiet(o) == 0);
  const Json report = read_json(out / "report.json");
  CHECK(report["tool"] == "meanfield-lab");
  CHECK(report["subcommand"] == "solve");
  CHECK(report["result"]["solve"]["converged"] == true);
  CHECK(report["result"]["solve"]["residual"].get<double>() <= 1e-8);
  CHECK(fs::exists(out / "history.csv"));
  CHECK(fs::exists(out / "config.echo.ini"));
  CHECK(fs::exists(out / "timing.json"));
  CHECK(slurp(out / "report.json").find("wall") == std::string::npos);
}

TEST_CASE("echoed config reproduces the payload") {
  const fs::path first = scratch("echo1");
  const fs::path second = scratch("echo2");
  CliOptions o{"solve", config_file("solve_coercive.ini"), first, 42, {"solver.max_iters=400"}, 2};
  REQUIRE(run_quiet(o) == 0);
  CliOptions again{"solve", first / "config.echo.ini", second, std::nullopt, {}, std::nullopt};
  REQUIRE(run_quiet(again) == 0);
  const Json a = read_json(first / "report.json");
  const Json b = read_json(second / "report.json");
  CHECK(a["result"].dump() == b["result"].dump());
  CHECK(a["config_hash"] == b["config_hash"]);
  CHECK(a["seed"] == 42);
}

TEST_CASE("classify grid") {
  const fs::path out = scratch("classify");
  const fs::path cfg = out / "c.ini";
  write_text_file(cfg, "[classify]\npoints = \"pi, 0; 5*pi, 0; 4*pi, -2*pi\"\n");
  CliOptions o{"classify", cfg, out / "run", std::nullopt, {}, std::nullopt};
  REQUIRE(run_quiet(o) == 0);
  std::istringstream in(slurp(out / "run" / "classify.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "rho,rho_prime,N,M,region,existence,on_critical_set");
  CHECK(lines[1].find(",0,0,coercive,minimizer,false") != std::string::npos);
  CHECK(lines[2].find(",1,2,unbounded_below,minmax_any_surface,false") != std::string::npos);
  CHECK(lines[3].find(",open_endpoint,unknown,true") != std::string::npos);
}

TEST_CASE("config errors exit with status 2") {
  std::string printed;
  CliOptions missing{"solve", "/nonexistent/file.ini", scratch("missing"), std::nullopt, {}, std::nullopt};
  CHECK(run_quiet(missing, &printed) == 2);
  const Json err = Json::parse(printed);
  CHECK(err["error"]["kind"] == "config");
  CHECK(err["error"]["path"] == "/nonexistent/file.ini");

  const fs::path dir = scratch("badkey");
  write_text_file(dir / "c.ini", "[params]\nrho = 1\nrhoo = 2\n");
  CliOptions typo{"solve", dir / "c.ini", dir / "out", std::nullopt, {}, std::nullopt};
  CHECK(run_quiet(typo, &printed) == 2);
  CHECK(printed.find("rhoo") != std::string::npos);

  CliOptions unknown{"explode", dir / "c.ini", dir / "out", std::nullopt, {}, std::nullopt};
  CHECK(run_quiet(unknown) == 2);

  CliOptions bad_override{"solve", config_file("solve_constant.ini"), dir / "o2", std::nullopt, {"nodot"}, std::nullopt};
  CHECK(run_quiet(bad_override) == 2);
}

TEST_CASE("module errors exit with status 1") {
  const fs::path dir = scratch("moderr");
  write_text_file(dir / "c.ini", "[domain]\nkind = disk\nn_radial = 8\nn_angular = 32\n[potentials]\nK = \"x\"\n");
  std::string printed;
  CliOptions o{"solve", dir / "c.ini", dir / "out", std::nullopt, {}, std::nullopt};
  CHECK(run_quiet(o, &printed) == 1);
  CHECK(Json::parse(printed)["error"]["kind"] == "expr");
}

TEST_CASE("argv parsing") {
  const fs::path out = scratch("argv");
  std::string cfg = config_file("classify.ini").string();
  std::string outs = out.string();
  std::vector<std::string> args{"meanfield-lab", "classify", "--config", cfg, "--out", outs, "--seed", "3"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  CHECK(run_cli(static_cast<int>(argv.size()), argv.data(), sink) == 0);
  CHECK(read_json(out / "report.json")["seed"] == 3);

  std::vector<std::string> bad{"meanfield-lab", "solve", "--bogus"};
  std::vector<char*> bad_argv;
  for (auto& a : bad) bad_argv.push_back(a.data());
  CHECK(run_cli(static_cast<int>(bad_argv.size()), bad_argv.data(), sink) == 2);
}
