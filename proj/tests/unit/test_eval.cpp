#include <cmath>
#include <fstream>
#include <sstream>

#include "arena/agents/scripted.hpp"
#include "arena/errors.hpp"
#include "arena/eval/evaluation.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace arena;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

EvalReport sample_report() {
  std::vector<EpisodeStats> eps = {
      {7, Outcome::Win, 120, 0.5, 6, 3},
      {8, Outcome::Loss, 300, -1.25, 2, 0},
      {9, Outcome::Timeout, 1000, 0.1 + 0.2, 2, 1},
  };
  return summarize("agent", "Rule Based", 7, eps);
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("rates of a mirrored rule-based match partition to 100%") {
  ScriptedPolicy a(ScriptedVariant::RuleBased), b(ScriptedVariant::RuleBased);
  const EvalReport r = run_match(a, b, 100, GameConfig{}, 4000);
  CHECK(r.episodes == 100);
  CHECK(r.win_rate + r.loss_rate + r.timeout_rate == doctest::Approx(100.0).epsilon(1e-12));
  for (const auto& e : r.per_episode) {
    CHECK(e.length >= 1);
    CHECK(e.length <= GameConfig{}.max_steps);
  }
}

TEST_CASE("two agents that never act time out every episode") {
  ConstantPolicy stay(0, "Stay"), stay2(0, "Stay");
  const EvalReport r = run_match(stay, stay2, 5, GameConfig{}, 10);
  CHECK(r.timeout_rate == 100.0);
  CHECK(r.mean_length == 1000.0);
  CHECK(r.shots == 0);
  CHECK(r.accuracy == 0.0);
}

TEST_CASE("accuracy is hits over shots") {
  const EvalReport r = summarize("a", "b", 0, {{0, Outcome::Win, 10, 0.0, 10, 4}});
  CHECK(r.accuracy == 0.4);
  const EvalReport none = summarize("a", "b", 0, {{0, Outcome::Timeout, 10, 0.0, 0, 0}});
  CHECK(none.accuracy == 0.0);
}

TEST_CASE("summary statistics match a direct computation") {
  const EvalReport r = sample_report();
  CHECK(r.win_rate == doctest::Approx(100.0 / 3));
  CHECK(r.loss_rate == doctest::Approx(100.0 / 3));
  CHECK(r.timeout_rate == doctest::Approx(100.0 / 3));
  CHECK(r.mean_length == doctest::Approx(1420.0 / 3));
  const double rewards[] = {0.5, -1.25, 0.1 + 0.2};
  double mean = 0.0;
  for (double x : rewards) mean += x / 3;
  double var = 0.0;
  for (double x : rewards) var += (x - mean) * (x - mean) / 3;
  CHECK(r.mean_reward == doctest::Approx(mean));
  CHECK(r.reward_variance == doctest::Approx(var));
  CHECK(r.shots == 10);
  CHECK(r.hits == 4);
}

TEST_CASE("run_match rejects an empty episode count") {
  ConstantPolicy a(0), b(0);
  CHECK_THROWS_AS(run_match(a, b, 0, GameConfig{}, 1), std::invalid_argument);
}

TEST_CASE("stability is the population variance of window win rates") {
  const std::vector<double> constant = {0.4, 0.4, 0.4};
  CHECK(stability(constant) == 0.0);
  const std::vector<double> two = {0.0, 1.0};
  CHECK(stability(two) == 0.25);
  const std::vector<double> one = {0.5};
  CHECK_THROWS_AS(stability(one), std::invalid_argument);
  CHECK_THROWS_AS(stability(std::span<const double>{}), std::invalid_argument);
}

TEST_CASE("windowed win rates use complete windows only") {
  const std::vector<Outcome> o = {Outcome::Win,  Outcome::Loss, Outcome::Win,     Outcome::Win,
                                  Outcome::Loss, Outcome::Loss, Outcome::Timeout};
  const auto w = windowed_win_rates(o, 2);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 0.0);
  CHECK(windowed_win_rates(o, 8).empty());
  CHECK_THROWS_AS(windowed_win_rates(o, 0), std::invalid_argument);
}

TEST_CASE("single report exports one header and one data row") {
  const std::vector<EvalReport> reports = {sample_report()};
  const auto lines = lines_of(export_reports(reports, ExportFormat::Table));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].rfind("Enemy Type,Win Rate (%),Avg Episode Length (steps)", 0) == 0);
  CHECK(lines[1].rfind("Rule Based,", 0) == 0);
  CHECK(lines_of(export_reports(reports, ExportFormat::Records)).size() == 1);
  CHECK_THROWS_AS(export_reports(std::span<const EvalReport>{}, ExportFormat::Table),
                  std::invalid_argument);
}

TEST_CASE("export then parse preserves report values") {
  const std::vector<EvalReport> reports = {sample_report()};
  const auto table = parse_reports(export_reports(reports, ExportFormat::Table), ExportFormat::Table);
  REQUIRE(table.size() == 1);
  CHECK(table[0].same_summary(reports[0]));
  CHECK(table[0].per_episode.empty());
  const auto records =
      parse_reports(export_reports(reports, ExportFormat::Records), ExportFormat::Records);
  REQUIRE(records.size() == 1);
  CHECK(records[0] == reports[0]);
}

TEST_CASE("malformed exports name the offending line") {
  const std::vector<EvalReport> reports = {sample_report()};
  std::string table = export_reports(reports, ExportFormat::Table);
  table += "Random,not-a-number\n";
  try {
    parse_reports(table, ExportFormat::Table, "t.csv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("t.csv:3:") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_reports("{oops\n", ExportFormat::Records), IoError);
}

TEST_CASE("three-opponent evaluation has the standard table shape") {
  ScriptedPolicy agent(ScriptedVariant::RuleBased);
  ScriptedPolicy rb(ScriptedVariant::RuleBased), rb2(ScriptedVariant::RuleBased2),
      rnd(ScriptedVariant::Random);
  std::vector<EvalReport> reports;
  for (Policy* opp : {static_cast<Policy*>(&rb), static_cast<Policy*>(&rb2),
                      static_cast<Policy*>(&rnd)}) {
    reports.push_back(run_match(agent, *opp, 3, GameConfig{}, 200));
  }
  const std::string text = export_reports(reports, ExportFormat::Table);
  const auto lines = lines_of(text);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1].rfind("Rule Based,", 0) == 0);
  CHECK(lines[2].rfind("Rule Based 2,", 0) == 0);
  CHECK(lines[3].rfind("Random,", 0) == 0);
  CHECK(export_reports(reports, ExportFormat::Table) == text);
}

TEST_CASE("same policies and seeds give identical reports") {
  ScriptedPolicy a(ScriptedVariant::Random), b(ScriptedVariant::RuleBased2);
  const EvalReport r1 = run_match(a, b, 10, GameConfig{}, 77);
  const EvalReport r2 = run_match(a, b, 10, GameConfig{}, 77);
  CHECK(r1 == r2);
  const std::vector<EvalReport> one = {r1}, two = {r2};
  CHECK(export_reports(one, ExportFormat::Records) == export_reports(two, ExportFormat::Records));
}

TEST_CASE("write_reports produces the exported bytes") {
  const auto dir = arena::testing::temp_dir("eval");
  const std::vector<EvalReport> reports = {sample_report()};
  write_reports(dir / "r.csv", reports, ExportFormat::Table);
  std::ifstream in(dir / "r.csv", std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == export_reports(reports, ExportFormat::Table));
  CHECK(parse_export_format("csv") == ExportFormat::Table);
  CHECK(parse_export_format("jsonl") == ExportFormat::Records);
  CHECK_THROWS_AS(parse_export_format("xml"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
