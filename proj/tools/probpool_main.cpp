// probpool command-line front end: dataset generation, online evaluation,
// pairwise sign tests, and a plain-text score table.
//
// Exit codes: 0 success, 2 usage error, 1 runtime failure. stdout carries
// data, stderr carries diagnostics. Every command that writes files also
// writes a manifest-<command>.json capturing its flags for replay.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "probpool/probpool.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double parse_flag_double(const std::string& s, const std::string& what) {
  try {
    return probpool::io::parse_double(s, what.c_str(), 0);
  } catch (const probpool::ParseError& e) {
    throw probpool::UsageError(e.what());
  }
}

void write_manifest(const fs::path& dir, const std::string& command, const json& flags) {
  json manifest;
  manifest["command"] = command;
  manifest["version"] = probpool::kVersion;
  manifest["flags"] = flags;
  probpool::io::write_file_atomic(dir / ("manifest-" + command + ".json"),
                                  manifest.dump(2) + "\n");
}

struct GenFlags {
  int experts = 0;
  int games = 0;
  int seasons = 1;
  double sigma_lo = 0.05;
  double sigma_hi = 0.4;
  double missing = 0.0;
  std::uint64_t seed = 0;
  std::string law = "uniform";
  std::string out;
};

void cmd_gen(const GenFlags& f) {
  probpool::GeneratorConfig cfg;
  cfg.n_experts = f.experts;
  cfg.n_games = f.games;
  cfg.n_seasons = f.seasons;
  cfg.sigma_lo = f.sigma_lo;
  cfg.sigma_hi = f.sigma_hi;
  cfg.missing_rate = f.missing;
  cfg.seed = f.seed;
  if (f.law == "uniform") {
    cfg.law = probpool::TrueProbLaw::kUniform;
  } else if (f.law.rfind("beta:", 0) == 0) {
    const auto parts = probpool::io::split(f.law, ':');
    if (parts.size() != 3) throw probpool::UsageError("--law beta needs 'beta:<a>:<b>'");
    cfg.law = probpool::TrueProbLaw::kBeta;
    cfg.beta_a = parse_flag_double(parts[1], "--law beta a");
    cfg.beta_b = parse_flag_double(parts[2], "--law beta b");
  } else {
    throw probpool::UsageError("--law must be 'uniform' or 'beta:<a>:<b>', got '" + f.law + "'");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw probpool::UsageError(e.what());
  }

  const probpool::SyntheticData data = probpool::generate(cfg);
  probpool::save_dataset(data.dataset, f.out);
  probpool::save_sigmas(data.dataset.roster, data.expert_sigma, fs::path(f.out) / "sigmas.csv");
  if (data.remask_rounds > 0) {
    std::cerr << "note: redrew the missing mask for " << data.remask_rounds
              << " game(s) so every game keeps at least one expert\n";
  }
  write_manifest(f.out, "gen",
                 json{{"experts", f.experts},
                      {"games", f.games},
                      {"seasons", f.seasons},
                      {"sigma-lo", f.sigma_lo},
                      {"sigma-hi", f.sigma_hi},
                      {"missing", f.missing},
                      {"law", f.law},
                      {"seed", f.seed},
                      {"out", f.out}});
}

void cmd_run(const std::string& data_dir, const std::string& algos, const std::string& out_dir) {
  const fs::path dir(data_dir);
  const fs::path truths = dir / "truths.csv";
  const probpool::Dataset ds =
      probpool::load_dataset(dir / "predictions.csv", dir / "outcomes.csv",
                             fs::exists(truths) ? truths : fs::path{});

  std::vector<std::unique_ptr<probpool::Aggregator>> aggs;
  std::set<std::string> names;
  for (const std::string& spec : probpool::io::split(algos, ',')) {
    if (spec.empty()) throw probpool::UsageError("--algos contains an empty specifier");
    if (!names.insert(spec).second) {
      throw probpool::UsageError("duplicate aggregator '" + spec + "' in --algos");
    }
    aggs.push_back(probpool::make_aggregator(spec, ds.num_experts()));
  }

  const probpool::EvalReport report = probpool::run_online(ds, aggs);
  fs::create_directories(out_dir);
  probpool::io::write_file_atomic(fs::path(out_dir) / "results.csv",
                                  probpool::results_csv(report));
  probpool::io::write_file_atomic(fs::path(out_dir) / "summary.csv",
                                  probpool::summary_csv(report));
  write_manifest(out_dir, "run", json{{"data", data_dir}, {"algos", algos}, {"out", out_dir}});
}

struct ResultsTable {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<int, int>>> keys;
  std::map<std::string, std::vector<double>> scores;
};

ResultsTable load_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw probpool::ParseError(path.string() + ": empty file", 1);
  ResultsTable table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = probpool::io::split(line, ',');
    if (f.size() != 5) {
      throw probpool::ParseError(path.string() + ": expected 5 fields", lineno);
    }
    if (!table.scores.count(f[0])) table.order.push_back(f[0]);
    table.keys[f[0]].emplace_back(probpool::io::parse_int(f[1], "season", lineno),
                                  probpool::io::parse_int(f[2], "game_id", lineno));
    table.scores[f[0]].push_back(probpool::io::parse_double(f[4], "prob_score", lineno));
  }
  return table;
}

std::pair<std::string, std::string> resolve_pair(const std::string& pair,
                                                 const ResultsTable& table) {
  std::vector<std::pair<std::string, std::string>> matches;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    if (pair[i] != ':') continue;
    const std::string a = pair.substr(0, i);
    const std::string b = pair.substr(i + 1);
    if (table.scores.count(a) && table.scores.count(b)) matches.emplace_back(a, b);
  }
  if (matches.size() == 1) return matches.front();
  std::string known = "aggregators in the results file:";
  for (const std::string& name : table.order) known += " " + name;
  if (matches.empty()) {
    throw probpool::UsageError("cannot resolve pair '" + pair +
                               "' (need '<a>:<b>' with both sides present); " + known);
  }
  throw probpool::UsageError("pair '" + pair + "' is ambiguous; " + known);
}

void cmd_compare(const std::string& results_path, const std::string& pairs,
                 std::string out_dir) {
  const ResultsTable table = load_results(results_path);
  if (out_dir.empty()) {
    out_dir = fs::path(results_path).parent_path().string();
    if (out_dir.empty()) out_dir = ".";
  }
  std::vector<probpool::SignTestRow> rows;
  for (const std::string& pair : probpool::io::split(pairs, ',')) {
    if (pair.empty()) throw probpool::UsageError("--pairs contains an empty pair");
    const auto [a, b] = resolve_pair(pair, table);
    if (table.keys.at(a) != table.keys.at(b)) {
      throw std::runtime_error("aggregators '" + a + "' and '" + b +
                               "' cover different games; cannot pair their scores");
    }
    rows.push_back(
        probpool::SignTestRow{a, b, probpool::sign_test(table.scores.at(a), table.scores.at(b))});
    if (rows.back().result.all_ties) {
      std::cerr << "warning: '" << pair << "' has no untied games; p-value reported as 1\n";
    }
  }
  fs::create_directories(out_dir);
  probpool::io::write_file_atomic(fs::path(out_dir) / "signtest.csv",
                                  probpool::signtest_csv(rows));
  write_manifest(out_dir, "compare",
                 json{{"results", results_path}, {"pairs", pairs}, {"out", out_dir}});
}

void cmd_report(const std::string& summary_path) {
  std::ifstream in(summary_path);
  if (!in) throw std::runtime_error("cannot open " + summary_path);
  std::string line;
  if (!std::getline(in, line)) {
    throw probpool::ParseError(summary_path + ": empty file", 1);
  }
  std::vector<std::string> aggs;
  std::vector<int> seasons;
  std::map<std::pair<int, std::string>, std::string> cell;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = probpool::io::split(line, ',');
    if (f.size() != 5) throw probpool::ParseError(summary_path + ": expected 5 fields", lineno);
    const int season = probpool::io::parse_int(f[1], "season", lineno);
    if (std::find(aggs.begin(), aggs.end(), f[0]) == aggs.end()) aggs.push_back(f[0]);
    if (std::find(seasons.begin(), seasons.end(), season) == seasons.end()) {
      seasons.push_back(season);
    }
    cell[{season, f[0]}] = f[2];
  }
  std::sort(seasons.begin(), seasons.end());

  // season rows, aggregator columns in input order
  std::vector<std::size_t> width{6};  // "season"
  for (const std::string& a : aggs) width.push_back(a.size());
  for (int s : seasons) {
    width[0] = std::max(width[0], std::to_string(s).size());
    for (std::size_t j = 0; j < aggs.size(); ++j) {
      auto it = cell.find({s, aggs[j]});
      if (it != cell.end()) width[j + 1] = std::max(width[j + 1], it->second.size());
    }
  }
  const auto pad = [](const std::string& s, std::size_t w) {
    return std::string(w - s.size(), ' ') + s;
  };
  std::string out = pad("season", width[0]);
  for (std::size_t j = 0; j < aggs.size(); ++j) out += "  " + pad(aggs[j], width[j + 1]);
  out += "\n";
  for (int s : seasons) {
    out += pad(std::to_string(s), width[0]);
    for (std::size_t j = 0; j < aggs.size(); ++j) {
      auto it = cell.find({s, aggs[j]});
      out += "  " + pad(it == cell.end() ? "-" : it->second, width[j + 1]);
    }
    out += "\n";
  }
  std::cout << out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probpool: aggregate expert probability forecasts and score them online"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from an INI file (one [subcommand] section)");

  GenFlags gf;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->fallthrough();
  gen->add_option("--experts", gf.experts, "Number of experts")->required();
  gen->add_option("--games", gf.games, "Games per season")->required();
  gen->add_option("--seasons", gf.seasons, "Number of seasons")->capture_default_str();
  gen->add_option("--sigma-lo", gf.sigma_lo, "Lower bound of expert sigma")->capture_default_str();
  gen->add_option("--sigma-hi", gf.sigma_hi, "Upper bound of expert sigma")->capture_default_str();
  gen->add_option("--missing", gf.missing, "Per-prediction missing probability")->capture_default_str();
  gen->add_option("--seed", gf.seed, "Random seed")->capture_default_str();
  gen->add_option("--law", gf.law, "True-probability law: uniform | beta:<a>:<b>")->capture_default_str();
  gen->add_option("--out", gf.out, "Output directory")->required();

  std::string run_data, run_algos = probpool::kDefaultAlgos, run_out;
  CLI::App* run = app.add_subcommand("run", "Evaluate aggregators online on a dataset");
  run->fallthrough();
  run->add_option("--data", run_data, "Dataset directory (predictions.csv, outcomes.csv)")
      ->required();
  run->add_option("--algos", run_algos, "Comma-separated aggregator specifiers")->capture_default_str();
  run->add_option("--out", run_out, "Output directory")->required();

  std::string cmp_results, cmp_pairs, cmp_out;
  CLI::App* compare = app.add_subcommand("compare", "Pairwise sign tests on per-game scores");
  compare->fallthrough();
  compare->add_option("--results", cmp_results, "results.csv from 'run'")->required();
  compare->add_option("--pairs", cmp_pairs, "Comma-separated '<a>:<b>' pairs")->required();
  compare->add_option("--out", cmp_out, "Output directory (default: alongside results)");

  std::string rep_summary;
  CLI::App* report = app.add_subcommand("report", "Print a season-by-aggregator score table");
  report->fallthrough();
  report->add_option("--summary", rep_summary, "summary.csv from 'run'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) cmd_gen(gf);
    if (*run) cmd_run(run_data, run_algos, run_out);
    if (*compare) cmd_compare(cmp_results, cmp_pairs, cmp_out);
    if (*report) cmd_report(rep_summary);
    return 0;
  } catch (const probpool::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
