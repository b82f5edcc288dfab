#pragma once

// Synthetic dataset generation under the Gaussian-expert model, and CSV
// serialization. File formats:
//   predictions.csv  season,game_id,expert_id,prob
//   outcomes.csv     season,game_id,outcome
//   truths.csv       season,game_id,true_prob        (synthetic only)
//   sigmas.csv       expert_id,sigma                 (synthetic only)
// UTF-8, LF line endings, probabilities as 6-digit fixed point.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "probpool/core.hpp"
#include "probpool/io.hpp"
#include "probpool/rng.hpp"

namespace probpool {

enum class TrueProbLaw { kUniform, kBeta };

struct GeneratorConfig {
  int n_experts = 0;
  int n_games = 0;  // per season
  int n_seasons = 1;
  double sigma_lo = 0.05;
  double sigma_hi = 0.4;
  double missing_rate = 0.0;
  TrueProbLaw law = TrueProbLaw::kUniform;
  double beta_a = 2.0;
  double beta_b = 2.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_experts < 1) throw std::invalid_argument("generator: need at least one expert");
    if (n_games < 1) throw std::invalid_argument("generator: need at least one game");
    if (n_seasons < 1) throw std::invalid_argument("generator: need at least one season");
    if (!(sigma_lo > 0.0 && sigma_lo <= sigma_hi)) {
      throw std::invalid_argument("generator: need 0 < sigma_lo <= sigma_hi");
    }
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
      throw std::invalid_argument("generator: missing rate must lie in [0,1)");
    }
    if (law == TrueProbLaw::kBeta && !(beta_a > 0.0 && beta_b > 0.0)) {
      throw std::invalid_argument("generator: beta law parameters must be positive");
    }
  }
};

struct SyntheticData {
  Dataset dataset;
  std::vector<double> expert_sigma;  // hidden truth, aligned with roster
  int remask_rounds = 0;             // games whose missing mask had to be redrawn
};

namespace detail {

inline std::string expert_id(int index, int n_experts) {
  int width = 1;
  for (int v = n_experts; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(index + 1);
  return "e" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace detail

// Stream layout (frozen): per-season game streams draw the true probability
// and outcome; per-expert streams draw sigma, one noise normal per game
// (always consumed, so masks never shift noise), and the missing mask.
// Adding experts therefore never perturbs games or other experts' noise.
inline SyntheticData generate(const GeneratorConfig& cfg) {
  cfg.validate();
  const rng::Stream root(cfg.seed);
  const int n = cfg.n_experts;

  SyntheticData out;
  out.expert_sigma.resize(n);
  std::vector<rng::Stream> noise, mask;
  noise.reserve(n);
  mask.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.dataset.roster.push_back(detail::expert_id(i, n));
    out.expert_sigma[i] = root.fork('S').fork(i).next_uniform(cfg.sigma_lo, cfg.sigma_hi);
    noise.push_back(root.fork('N').fork(i));
    mask.push_back(root.fork('M').fork(i));
  }

  std::vector<char> missing(n);
  for (int season = 1; season <= cfg.n_seasons; ++season) {
    rng::Stream games = root.fork('G').fork(season);
    for (int g = 1; g <= cfg.n_games; ++g) {
      const double p = cfg.law == TrueProbLaw::kUniform ? games.next_unit()
                                                        : games.next_beta(cfg.beta_a, cfg.beta_b);
      const int y = games.next_bernoulli(p) ? 1 : 0;

      PredictionRow row;
      std::vector<double> pred(n);
      for (int i = 0; i < n; ++i) {
        pred[i] = std::clamp(p + out.expert_sigma[i] * noise[i].next_normal(), 0.0, 1.0);
      }
      bool redrawn = false;
      for (;;) {
        bool all_missing = true;
        for (int i = 0; i < n; ++i) {
          missing[i] = mask[i].next_bernoulli(cfg.missing_rate) ? 1 : 0;
          all_missing = all_missing && missing[i];
        }
        if (!all_missing) break;
        redrawn = true;
      }
      if (redrawn) ++out.remask_rounds;
      for (int i = 0; i < n; ++i) {
        if (!missing[i]) row.set(i, pred[i]);
      }

      out.dataset.games.push_back(Game{season, g, y, p});
      out.dataset.predictions.push_back(std::move(row));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization.

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string preds = "season,game_id,expert_id,prob\n";
  std::string outcomes = "season,game_id,outcome\n";
  std::string truths = "season,game_id,true_prob\n";
  bool any_truth = false;
  for (std::size_t t = 0; t < ds.games.size(); ++t) {
    const Game& g = ds.games[t];
    const std::string key = std::to_string(g.season) + "," + std::to_string(g.game_id) + ",";
    if (!g.outcome) {
      throw std::invalid_argument("save_dataset: game without an outcome");
    }
    outcomes += key + std::to_string(*g.outcome) + "\n";
    if (g.true_prob) {
      any_truth = true;
      truths += key + io::format_prob(*g.true_prob) + "\n";
    }
    for (const auto& e : ds.predictions[t].entries()) {
      preds += key + ds.roster[e.expert] + "," + io::format_prob(e.prob) + "\n";
    }
  }
  io::write_file_atomic(dir / "predictions.csv", preds);
  io::write_file_atomic(dir / "outcomes.csv", outcomes);
  if (any_truth) io::write_file_atomic(dir / "truths.csv", truths);
}

inline void save_sigmas(const std::vector<std::string>& roster, std::span<const double> sigma,
                        const std::filesystem::path& path) {
  std::string body = "expert_id,sigma\n";
  for (std::size_t i = 0; i < roster.size(); ++i) {
    body += roster[i] + "," + io::format_prob(sigma[i]) + "\n";
  }
  io::write_file_atomic(path, body);
}

namespace detail {

struct CsvFile {
  explicit CsvFile(const std::filesystem::path& path, const std::string& header)
      : name(path.string()), in(path) {
    if (!in) throw std::runtime_error("cannot open " + name);
    std::string first;
    if (!std::getline(in, first)) throw ParseError(name + ": empty file", 1);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != header) {
      throw ParseError(name + ": expected header '" + header + "', got '" + first + "'", 1);
    }
    line = 1;
  }

  bool next(std::vector<std::string>& fields, std::size_t n_fields) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      if (raw.empty()) continue;
      fields = io::split(raw, ',');
      if (fields.size() != n_fields) {
        throw ParseError(name + ": expected " + std::to_string(n_fields) + " fields, got " +
                             std::to_string(fields.size()),
                         line);
      }
      return true;
    }
    return false;
  }

  std::string name;
  std::ifstream in;
  int line = 0;
};

}  // namespace detail

// Loads a dataset from its CSV files; pass a truths path only when the file
// exists. Games are reordered chronologically by (season, game_id); the
// roster is the lexicographically sorted union of expert ids.
inline Dataset load_dataset(const std::filesystem::path& predictions_path,
                            const std::filesystem::path& outcomes_path,
                            const std::filesystem::path& truths_path = {}) {
  Dataset ds;
  std::map<std::pair<int, int>, int> game_index;

  {
    detail::CsvFile file(outcomes_path, "season,game_id,outcome");
    std::vector<std::string> f;
    while (file.next(f, 3)) {
      const int season = io::parse_int(f[0], "season", file.line);
      const int game = io::parse_int(f[1], "game_id", file.line);
      const int y = io::parse_int(f[2], "outcome", file.line);
      if (y != 0 && y != 1) throw ParseError(file.name + ": outcome not in {0,1}", file.line);
      if (!game_index.emplace(std::pair{season, game}, 0).second) {
        throw ParseError(file.name + ": duplicate game (" + f[0] + "," + f[1] + ")", file.line);
      }
      ds.games.push_back(Game{season, game, y, std::nullopt});
    }
  }
  std::sort(ds.games.begin(), ds.games.end(), [](const Game& a, const Game& b) {
    return std::pair{a.season, a.game_id} < std::pair{b.season, b.game_id};
  });
  for (std::size_t t = 0; t < ds.games.size(); ++t) {
    game_index[{ds.games[t].season, ds.games[t].game_id}] = static_cast<int>(t);
  }

  struct RawPrediction {
    int game;
    std::string expert;
    double prob;
  };
  std::vector<RawPrediction> raw;
  std::map<std::string, int> experts;
  std::set<std::pair<int, std::string>> seen;
  {
    detail::CsvFile file(predictions_path, "season,game_id,expert_id,prob");
    std::vector<std::string> f;
    while (file.next(f, 4)) {
      const int season = io::parse_int(f[0], "season", file.line);
      const int game = io::parse_int(f[1], "game_id", file.line);
      if (f[2].empty()) throw ParseError(file.name + ": empty expert_id", file.line);
      const double prob = io::parse_double(f[3], "prob", file.line);
      if (!(prob >= 0.0 && prob <= 1.0)) {
        throw ParseError(file.name + ": probability " + f[3] + " out of [0,1]", file.line);
      }
      auto it = game_index.find({season, game});
      if (it == game_index.end()) {
        throw ParseError(
            file.name + ": prediction references unknown game (" + f[0] + "," + f[1] + ")",
            file.line);
      }
      if (!seen.insert({it->second, f[2]}).second) {
        throw ParseError(file.name + ": duplicate prediction for game (" + f[0] + "," + f[1] +
                             ") expert " + f[2],
                         file.line);
      }
      experts.emplace(f[2], 0);
      raw.push_back(RawPrediction{it->second, f[2], prob});
    }
  }
  for (auto& [id, index] : experts) {
    index = static_cast<int>(ds.roster.size());
    ds.roster.push_back(id);
  }
  ds.predictions.resize(ds.games.size());
  for (const RawPrediction& r : raw) {
    ds.predictions[r.game].set(experts[r.expert], r.prob);
  }

  if (!truths_path.empty()) {
    detail::CsvFile file(truths_path, "season,game_id,true_prob");
    std::vector<std::string> f;
    while (file.next(f, 3)) {
      const int season = io::parse_int(f[0], "season", file.line);
      const int game = io::parse_int(f[1], "game_id", file.line);
      const double p = io::parse_double(f[2], "true_prob", file.line);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ParseError(file.name + ": probability " + f[2] + " out of [0,1]", file.line);
      }
      auto it = game_index.find({season, game});
      if (it == game_index.end()) {
        throw ParseError(file.name + ": truth references unknown game", file.line);
      }
      ds.games[it->second].true_prob = p;
    }
  }
  return ds;
}

}  // namespace probpool
