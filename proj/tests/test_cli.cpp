#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "modquad/cli.hpp"
#include "modquad/errors.hpp"

using namespace modquad;

namespace {

const char* const kF10 =
    "x1+x2+x3+x4+x5+x6+x7+x8+x9+x10 + 5*x1*x10+5*x2*x9+5*x3*x8+5*x4*x7+5*x5*x6 mod 6";

ExperimentManifest manifest(std::string command, Json parameters, unsigned workers = 1) {
  ExperimentManifest m;
  m.command = std::move(command);
  m.parameters = std::move(parameters);
  m.workers = workers;
  return m;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "modquad");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json last_json_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return Json::parse(last);
}

}  // namespace

TEST_CASE("manifest round trip") {
  ExperimentManifest m = manifest("search-or", Json{{"n", 2}, {"modulus", 2}}, 3);
  m.seed = 99;
  m.budgets = Json{{"search", 1000}};
  m.output_path = "out.json";
  m.dry_run = true;
  CHECK(manifest_from_json(to_json(m)) == m);
  CHECK(manifest_from_json(Json::parse(to_json(m).dump())) == m);
}

TEST_CASE("budgets") {
  ExperimentManifest m = manifest("eval", Json::object());
  m.budgets = Json{{"samples", 5}};
  const Json b = resolve_budgets(m);
  CHECK(b.at("samples") == 5);
  CHECK(b.at("diagonals") == default_budgets().at("diagonals"));
  m.budgets = Json{{"no_such_budget", 5}};
  CHECK_THROWS_AS(resolve_budgets(m), PreconditionError);
}

TEST_CASE("check-or on f10") {
  const RunReport r = run(manifest("check-or", Json{{"poly", kF10}}));
  CHECK(r.results.at("result") == true);
  CHECK(r.results.at("records").size() == 1);
  CHECK(r.versions.contains("modquad"));
  CHECK(r.timings.contains("seconds"));
}

TEST_CASE("davenport of Z2 x Z2") {
  const RunReport r = run(manifest("davenport", Json{{"shape", Json::array({2, 2})}}));
  CHECK(r.results.at("value") == 2);
  CHECK(r.results.at("witness").size() == 2);
  CHECK(r.results.at("within_bound") == true);
}

TEST_CASE("identity sweep") {
  ExperimentManifest m = manifest("identities", Json{{"count", 100}});
  m.seed = 42;
  const RunReport r = run(m);
  CHECK(r.results.at("polynomials") == 100);
  CHECK(r.results.at("max_residual_ct").get<double>() < 1e-9);
  CHECK(r.results.at("max_residual_split").get<double>() < 1e-9);
}

TEST_CASE("results are deterministic and independent of worker count") {
  const std::vector<std::pair<std::string, Json>> cases = {
      {"identities", Json{{"count", 30}, {"max_n", 8}}},
      {"histogram", Json{{"poly", kF10}}},
      {"rigidity", Json{{"matrix", Json{{"m", 4}, {"rows", 3}, {"cols", 3}, {"entries", {0, 1, 0, 1, 0, 2, 0, 2, 0}}}}}},
      {"search-or", Json{{"n", 3}, {"modulus", 3}, {"mode", "count"}}},
      {"mvf", Json{{"poly", "x1 + x2 + x1*x2 mod 2"}}},
      {"dichotomy-experiment", Json{{"count", 10}, {"n", 6}, {"modulus", 3}}},
  };
  for (const auto& [cmd, params] : cases) {
    CAPTURE(cmd);
    ExperimentManifest m = manifest(cmd, params, 1);
    m.seed = 7;
    const Json a = run(m).results;
    const Json b = run(m).results;
    m.workers = 3;
    const Json c = run(m).results;
    CHECK(a == b);
    CHECK(a == c);
  }
}

TEST_CASE("every subcommand supports a dry run") {
  const std::vector<std::pair<std::string, Json>> cases = {
      {"eval", Json{{"poly", kF10}, {"point", "1000000000"}}},
      {"histogram", Json{{"poly", kF10}}},
      {"check-or", Json{{"poly", kF10}}},
      {"expsum", Json{{"poly", kF10}, {"j", 1}}},
      {"identities", Json{{"poly", kF10}}},
      {"weyl", Json{{"poly", kF10}}},
      {"rank", Json{{"poly", kF10}}},
      {"brank", Json{{"poly", kF10}}},
      {"rigidity", Json{{"matrix", Json{{"m", 2}, {"rows", 1}, {"cols", 1}, {"entries", {1}}}}}},
      {"davenport", Json{{"shape", "2,2"}}},
      {"solve-linear", Json::parse(R"({"system": {"n": 2, "constraints": [{"q": 2, "v": [1, 1]}]}, "modulus": 2})")},
      {"search-or", Json{{"n", 2}, {"modulus", 2}}},
      {"mvf", Json{{"poly", kF10}}},
      {"ramsey", Json{{"poly", kF10}}},
      {"dichotomy-experiment", Json{{"count", 5}}},
  };
  CHECK(cases.size() == subcommands().size());
  for (const auto& [cmd, params] : cases) {
    CAPTURE(cmd);
    ExperimentManifest m = manifest(cmd, params);
    m.dry_run = true;
    const RunReport r = run(m);
    CHECK(r.results.at("dry_run") == true);
  }
}

TEST_CASE("command line front end") {
  SUBCASE("check-or prints records and a report") {
    const auto r = cli({"check-or", "--poly", kF10});
    CHECK(r.code == 0);
    const Json report = last_json_line(r.out);
    CHECK(report.at("results").at("result") == true);
  }
  SUBCASE("search-or finds the n = 2 representation") {
    const auto r = cli({"search-or", "--n", "2", "--modulus", "2", "--mode", "count"});
    CHECK(r.code == 0);
    CHECK(last_json_line(r.out).at("results").at("count").get<int>() >= 1);
  }
  SUBCASE("usage errors exit with 1") {
    CHECK(cli({"no-such-command"}).code == 1);
    CHECK(cli({"check-or", "--bogus"}).code == 1);
    CHECK(cli({"check-or", "--poly", "x1 + mod 2"}).code == 1);
  }
  SUBCASE("budget errors exit with 2") {
    CHECK(cli({"histogram", "--poly", kF10, "--budget-histogram-max-n", "4"}).code == 2);
  }
  SUBCASE("precondition errors exit with 3") {
    CHECK(cli({"mvf", "--poly", "x1 + x2 mod 2"}).code == 3);
    CHECK(cli({"check-or", "--poly", kF10, "--modulus", "5"}).code == 3);
  }
  SUBCASE("json-out and manifest replay") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto report_path = (dir / "modquad_cli_report.json").string();
    REQUIRE(cli({"davenport", "--shape", "2,4", "--json-out", report_path}).code == 0);
    std::ifstream in(report_path);
    const Json report = Json::parse(in);
    CHECK(report.at("results").at("value") == 4);

    const auto manifest_path = (dir / "modquad_cli_manifest.json").string();
    std::ofstream(manifest_path) << report.at("manifest").dump();
    const auto replay = cli({"run", manifest_path});
    CHECK(replay.code == 0);
    CHECK(last_json_line(replay.out).at("results") == report.at("results"));
    const auto from_report = cli({"run", report_path});
    CHECK(from_report.code == 0);
    CHECK(last_json_line(from_report.out).at("results") == report.at("results"));
    std::remove(report_path.c_str());
    std::remove(manifest_path.c_str());
  }
}
