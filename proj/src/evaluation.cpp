#include "densereg/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "densereg/transforms.hpp"

namespace densereg {

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

double to_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError("invalid number '" + tok + "'", line);
  return v;
}

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

LandmarkPairs parse_landmarks(const std::string& text) {
  LandmarkPairs out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto cols = split_csv(line);
    if (cols.size() != 4) throw ParseError("landmark row needs 4 columns fx,fy,mx,my", lineno);
    out.push_back({{to_double(cols[0], lineno), to_double(cols[1], lineno)},
                   {to_double(cols[2], lineno), to_double(cols[3], lineno)}});
  }
  return out;
}

LandmarkPairs read_landmarks(const std::string& path) { return parse_landmarks(slurp(path)); }

void write_landmarks(const LandmarkPairs& lm, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& p : lm)
    os << fmt(p.fixed.x) << ',' << fmt(p.fixed.y) << ',' << fmt(p.moving.x) << ',' << fmt(p.moving.y) << '\n';
  if (!os) throw IoError("failed writing '" + path + "'");
}

double mean_landmark_error(const TransformChain& chain, const LandmarkPairs& lm) {
  if (lm.empty()) throw ContractError("mean_landmark_error: no landmarks");
  double sum = 0.0;
  for (const auto& p : lm) sum += distance(apply_chain(chain, p.fixed), p.moving);
  return sum / static_cast<double>(lm.size());
}

double registration_accuracy(std::span<const PairOutcome> outcomes, double threshold) {
  if (outcomes.empty()) throw ContractError("registration_accuracy: no pairs");
  const auto hits = std::count_if(outcomes.begin(), outcomes.end(),
                                  [&](const PairOutcome& o) { return o && *o < threshold; });
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

double auc(std::span<const PairOutcome> outcomes, int auc_threshold) {
  if (auc_threshold < 1) throw ContractError("auc: T_AUC must be >= 1");
  if (outcomes.empty()) throw ContractError("auc: no pairs");
  // integer hit count, one division: the mean of the per-threshold ratios
  // with a single rounding
  long long hits = 0;
  for (int t = 1; t <= auc_threshold; ++t)
    hits += std::count_if(outcomes.begin(), outcomes.end(), [&](const PairOutcome& o) { return o && *o < t; });
  return static_cast<double>(hits) / (static_cast<double>(auc_threshold) * static_cast<double>(outcomes.size()));
}

double success_rate(std::span<const PairOutcome> outcomes, double threshold) {
  if (!(threshold > 0.0)) throw ContractError("success_rate: T_SR must be > 0");
  if (outcomes.empty()) throw ContractError("success_rate: no pairs");
  const auto hits = std::count_if(outcomes.begin(), outcomes.end(),
                                  [&](const PairOutcome& o) { return o && *o <= threshold; });
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::istringstream is(slurp(path));
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).string();
  };
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto cols = split_csv(line);
    if (!header) {
      if (cols.size() < 4 || cols[0] != "pair_id" || cols[1] != "fixed_path" || cols[2] != "moving_path" ||
          cols[3] != "landmarks_path")
        throw ParseError("manifest header must be pair_id,fixed_path,moving_path,landmarks_path[,category]", lineno);
      header = true;
      continue;
    }
    if (cols.size() != 4 && cols.size() != 5) throw ParseError("manifest row needs 4 or 5 columns", lineno);
    out.push_back({cols[0], resolve(cols[1]), resolve(cols[2]), resolve(cols[3]), cols.size() == 5 ? cols[4] : ""});
  }
  if (!header) throw ParseError("manifest is missing its header", lineno + 1);
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "pair_id,fixed_path,moving_path,landmarks_path,category\n";
  for (const auto& e : entries)
    os << e.pair_id << ',' << e.fixed_path << ',' << e.moving_path << ',' << e.landmarks_path << ',' << e.category
       << '\n';
  if (!os) throw IoError("failed writing '" + path + "'");
}

MetricSummary summarize(std::span<const PairEvaluation> pairs, const EvaluationThresholds& thresholds) {
  thresholds.validate();
  MetricSummary s;
  s.pairs = pairs.size();
  if (pairs.empty()) return s;
  std::vector<PairOutcome> outcomes;
  double sum_success = 0.0, sum_registered = 0.0;
  for (const auto& p : pairs) {
    outcomes.push_back(p.mle);
    if (!p.mle) continue;
    ++s.registered;
    sum_registered += *p.mle;
    if (*p.mle <= thresholds.success_threshold()) {
      ++s.successes;
      sum_success += *p.mle;
    }
  }
  s.auc = auc(outcomes, thresholds.auc_threshold);
  s.success_rate = success_rate(outcomes, thresholds.success_threshold());
  if (s.successes) s.mean_mle = sum_success / s.successes;
  if (s.registered) s.mean_mle_registered = sum_registered / s.registered;
  return s;
}

DatasetReport evaluate_dataset(std::vector<PairEvaluation> pairs, const EvaluationThresholds& thresholds) {
  if (pairs.empty()) throw ContractError("evaluate_dataset: no pairs");
  DatasetReport r;
  r.thresholds = thresholds;
  r.pairs = std::move(pairs);
  r.overall = summarize(r.pairs, thresholds);
  std::map<std::string, std::vector<PairEvaluation>> by_cat;
  for (const auto& p : r.pairs)
    if (!p.category.empty()) by_cat[p.category].push_back(p);
  for (const auto& [cat, ps] : by_cat) r.categories[cat] = summarize(ps, thresholds);
  double total = 0.0, worst = 0.0;
  std::size_t timed = 0;
  for (const auto& p : r.pairs)
    if (p.seconds) {
      total += *p.seconds;
      worst = std::max(worst, *p.seconds);
      ++timed;
    }
  if (timed) {
    r.mean_seconds = total / timed;
    r.max_seconds = worst;
  }
  return r;
}

DatasetReport evaluate_results_dir(const std::vector<ManifestEntry>& manifest, const std::string& results_dir,
                                   const EvaluationThresholds& thresholds) {
  std::set<std::string> ids;
  for (const auto& e : manifest)
    if (!ids.insert(e.pair_id).second) throw ContractError("manifest lists pair '" + e.pair_id + "' twice");
  if (fs::is_directory(results_dir)) {
    const std::string suffix = ".transform.txt";
    for (const auto& entry : fs::directory_iterator(results_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() > suffix.size() && name.ends_with(suffix) &&
          !ids.count(name.substr(0, name.size() - suffix.size())))
        throw ContractError("result '" + name + "' has no manifest row");
    }
  } else {
    throw IoError("results directory '" + results_dir + "' does not exist");
  }

  std::vector<PairEvaluation> pairs;
  for (const auto& e : manifest) {
    PairEvaluation pe{e.pair_id, e.category, std::nullopt, std::nullopt, ""};
    const fs::path transform = fs::path(results_dir) / (e.pair_id + ".transform.txt");
    const fs::path diag = fs::path(results_dir) / (e.pair_id + ".diagnostics.json");
    if (fs::exists(diag)) {
      const auto j = nlohmann::json::parse(slurp(diag.string()), nullptr, false);
      if (!j.is_discarded() && j.contains("seconds") && j["seconds"].is_number()) pe.seconds = j["seconds"].get<double>();
    }
    if (!fs::exists(transform)) {
      pe.note = "no transform (registration failed or result missing)";
    } else {
      try {
        pe.mle = mean_landmark_error(read_chain_file(transform.string()), read_landmarks(e.landmarks_path));
      } catch (const PointAtInfinity&) {
        pe.note = "transform maps a landmark to infinity";
      }
    }
    pairs.push_back(std::move(pe));
  }
  return evaluate_dataset(std::move(pairs), thresholds);
}

namespace {

nlohmann::json to_json(const MetricSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"pairs", s.pairs},
          {"registered", s.registered},
          {"successes", s.successes},
          {"auc", s.auc},
          {"success_rate", s.success_rate},
          {"mean_mle", opt(s.mean_mle)},
          {"mean_mle_registered", opt(s.mean_mle_registered)}};
}

}  // namespace

nlohmann::json to_json(const DatasetReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : report.pairs)
    pairs.push_back({{"pair_id", p.pair_id},
                     {"category", p.category},
                     {"mle", p.mle ? nlohmann::json(*p.mle) : nlohmann::json(nullptr)},
                     {"seconds", p.seconds ? nlohmann::json(*p.seconds) : nlohmann::json(nullptr)},
                     {"note", p.note}});
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [k, v] : report.categories) cats[k] = to_json(v);
  return {{"t_auc", report.thresholds.auc_threshold},
          {"t_sr", report.thresholds.success_threshold()},
          {"overall", to_json(report.overall)},
          {"categories", cats},
          {"mean_seconds", report.mean_seconds ? nlohmann::json(*report.mean_seconds) : nlohmann::json(nullptr)},
          {"max_seconds", report.max_seconds ? nlohmann::json(*report.max_seconds) : nlohmann::json(nullptr)},
          {"pairs", pairs}};
}

std::string format_table(const DatasetReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %6s %8s %10s %10s\n", "subset", "pairs", "AUC", "MLE", "success");
  os << line;
  auto row = [&](const std::string& name, const MetricSummary& s) {
    std::snprintf(line, sizeof line, "%-12s %6zu %8.3f %10s %9.2f%%\n", name.c_str(), s.pairs, s.auc,
                  s.mean_mle ? fmt(*s.mean_mle, "%.2f").c_str() : "-", 100.0 * s.success_rate);
    os << line;
  };
  row("overall", report.overall);
  for (const auto& [k, v] : report.categories) row(k, v);
  std::snprintf(line, sizeof line, "T_AUC = %d, T_SR = %.1f\n", report.thresholds.auc_threshold,
                report.thresholds.success_threshold());
  os << line;
  for (const auto& p : report.pairs)
    if (!p.note.empty()) os << "  " << p.pair_id << ": " << p.note << '\n';
  return os.str();
}

}  // namespace densereg
