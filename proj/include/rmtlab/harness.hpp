// SPDX-License-Identifier: MIT
//
// harness.hpp -- experiment orchestration: per-trial pipeline (sample ->
// profile -> predict -> solve -> match), the emergence / count-scaling /
// phase-diagram experiments, flat key=value configuration, JSON records, and
// reproducibility manifests.
//
// Trial t of an experiment with master seed s uses seed s + 1000003 * t, so
// records are reproducible individually without replaying the whole run.

#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "graph.hpp"
#include "operators.hpp"
#include "predict.hpp"
#include "spectrum.hpp"
#include "theory.hpp"

namespace rmtlab {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  double gamma = 9.0;
  double b = 5.0;
  int m = 1000;
  int trials = 20;
  std::uint64_t seed = 1;
  WeightDistribution weights = WeightDistribution::none;
  int dense_limit = 2500;
  double gap_mult = 1.0;    // outlier window: bulk edge +/- gap_mult * xi^(1/4)
  double pass_frac = 0.8;   // fraction of trials required by verify-style gates
  std::string out_dir = "out";

  // Planted heavy column (0 disables); used by `sample --plant-alpha`.
  double plant_alpha = 0.0;
  int plant_target = 0;
};

// Flat key=value lines; '#' starts a comment; blank lines ignored.
// Recognized keys: gamma, b, m, trials, seed, weights, dense_limit,
// tol.gap_mult, tol.pass_frac, out_dir.
inline ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // Trim.
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b2 = s.find_last_not_of(" \t");
      return (a == std::string::npos) ? std::string() : s.substr(a, b2 - a + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string val = strip(line.substr(eq + 1));
    try {
      if (key == "gamma") {
        cfg.gamma = std::stod(val);
      } else if (key == "b") {
        cfg.b = std::stod(val);
      } else if (key == "m") {
        cfg.m = std::stoi(val);
      } else if (key == "trials") {
        cfg.trials = std::stoi(val);
      } else if (key == "seed") {
        cfg.seed = std::stoull(val);
      } else if (key == "weights") {
        cfg.weights = weight_from_name(val);
      } else if (key == "dense_limit") {
        cfg.dense_limit = std::stoi(val);
      } else if (key == "tol.gap_mult") {
        cfg.gap_mult = std::stod(val);
      } else if (key == "tol.pass_frac") {
        cfg.pass_frac = std::stod(val);
      } else if (key == "out_dir") {
        cfg.out_dir = val;
      } else {
        throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config: " + path);
  return parse_config(is);
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  // Model.
  double gamma = 0.0, b = 0.0, q = 0.0, d = 0.0, p = 0.0;
  int n = 0, m = 0, N = 0;
  std::string weights;
  bool connected = false;
  double max_alpha1 = 0.0, max_alpha2 = 0.0;
  // Spectrum.
  bool dense = false;
  bool converged = true;
  double sigma_max = kNaN, sigma_min = kNaN;
  // Prediction and matching.
  double xi = 0.0, window_right = 0.0, window_left = 0.0;
  double bulk_left = 0.0, bulk_right = 0.0;
  int predicted_r1 = 0, predicted_r2 = 0, predicted_l2 = 0;
  int observed_right = 0, observed_left = 0;
  double max_right_err = kNaN, max_left_err = kNaN;
  double top_right_err = kNaN;  // rank-1 gap |sigma_1 - Lambda_1|, if predicted
  double plant_alpha_actual = kNaN;  // planted column's realized alpha
  double elapsed_ms = 0.0;
};

inline std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return master + 1000003ULL * static_cast<std::uint64_t>(trial);
}

// One full pipeline pass.  Counts "observed" outliers as singular values
// beyond the bulk edges by at least gap_mult * xi^(1/4); the left count is
// only meaningful at q > 1 and stays 0 otherwise.
inline TrialRecord run_trial(const ExperimentConfig& cfg, int trial) {
  const auto t0 = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = trial_seed(cfg.seed, trial);
  const ModelParams params = make_params(cfg.gamma, cfg.b, cfg.m, cfg.weights);
  rec.gamma = params.gamma;
  rec.b = params.b;
  rec.q = params.q;
  rec.d = params.d;
  rec.p = params.p;
  rec.n = params.n;
  rec.m = params.m;
  rec.N = params.N;
  rec.weights = weight_name(params.weights);

  BipartiteGraph g = sample_graph(params, rec.seed);
  if (cfg.plant_alpha > 0.0)
    g = plant_heavy_column(g, params, cfg.plant_alpha, cfg.plant_target, rec.seed);
  rec.connected = is_connected(g);
  const DegreeProfile prof = degree_profile(g, params);
  rec.max_alpha1 = prof.max_alpha1;
  rec.max_alpha2 = prof.max_alpha2;
  if (cfg.plant_alpha > 0.0) rec.plant_alpha_actual = prof.alpha2[cfg.plant_target];

  const PredictedOutliers pred = predict_outliers(prof, params, graph_hash(g));
  rec.xi = pred.xi;
  rec.window_right = pred.window_right;
  rec.window_left = pred.window_left;
  rec.bulk_left = pred.bulk_left;
  rec.bulk_right = pred.bulk_right;
  rec.predicted_r1 = pred.r1_count;
  rec.predicted_r2 = pred.r2_count;
  rec.predicted_l2 = pred.l2_count;

  const CenteredOperator op = build_operator(g, params);
  SolveOptions sopt;
  sopt.dense_limit = cfg.dense_limit;
  const SpectralReport rep = singular_values(op, sopt);
  rec.dense = rep.dense;
  rec.converged = rep.converged;
  rec.sigma_max = rep.largest();
  rec.sigma_min = rep.smallest();

  const MatchReport match = match_outliers(pred, rep);
  if (!match.right.empty()) {
    rec.max_right_err = match.max_right_err;
    rec.top_right_err = match.right.front().abs_err;
  }
  if (!match.left.empty()) rec.max_left_err = match.max_left_err;

  // Observed counts by the windowed definition.
  const double gap = cfg.gap_mult * pred.xi_quarter;
  const double right_cut = pred.bulk_right + gap;
  const double left_cut = pred.bulk_left - gap;
  for (double s : rep.sigma) {
    if (s >= right_cut) ++rec.observed_right;
  }
  if (pred.left_defined) {
    if (rep.dense) {
      for (double s : rep.sigma)
        if (s <= left_cut) ++rec.observed_left;
    } else {
      for (double s : rep.sigma_bottom)
        if (s <= left_cut) ++rec.observed_left;
    }
  }
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return rec;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct EmergenceResult {
  std::vector<TrialRecord> records;
  double frac_right_present = 0.0;  // trials with >= 1 observed right outlier
  double frac_left_present = 0.0;
  double mean_observed_right = 0.0;
  double mean_observed_left = 0.0;
  double median_sigma_max = kNaN;
  double median_sigma_min = kNaN;
};

inline EmergenceResult emergence_experiment(const ExperimentConfig& cfg) {
  EmergenceResult res;
  std::vector<double> smax, smin;
  for (int t = 0; t < cfg.trials; ++t) {
    const TrialRecord rec = run_trial(cfg, t);
    if (rec.observed_right >= 1) res.frac_right_present += 1.0;
    if (rec.observed_left >= 1) res.frac_left_present += 1.0;
    res.mean_observed_right += rec.observed_right;
    res.mean_observed_left += rec.observed_left;
    smax.push_back(rec.sigma_max);
    smin.push_back(rec.sigma_min);
    res.records.push_back(rec);
  }
  const double inv = 1.0 / std::max(1, cfg.trials);
  res.frac_right_present *= inv;
  res.frac_left_present *= inv;
  res.mean_observed_right *= inv;
  res.mean_observed_left *= inv;
  res.median_sigma_max = median(smax);
  res.median_sigma_min = median(smin);
  return res;
}

struct CountScalingPoint {
  int m = 0, N = 0;
  double mean_r2 = 0.0;      // mean predicted |R2| over trials
  double expected_count = 0.0;  // first-order theory m N^(-b/r2*)
};

struct CountScalingResult {
  std::vector<CountScalingPoint> points;
  double slope = kNaN;           // of ln(mean |R2| + 1) against ln N
  double predicted_slope = kNaN; // 1 - b / r2*
};

// Counts are degree-driven only (no spectra), so this scales to N = 1e5
// comfortably.  The m values map to N = (1 + floor(gamma)) m at integer
// gamma; the slope comes from least squares on (ln N, ln(mean+1)).
inline CountScalingResult count_scaling_experiment(const ExperimentConfig& cfg,
                                                   const std::vector<int>& m_values) {
  if (m_values.size() < 2)
    throw DomainError("count_scaling_experiment: need at least two sizes");
  CountScalingResult res;
  std::vector<double> lx, ly;
  for (int m : m_values) {
    ExperimentConfig c = cfg;
    c.m = m;
    const ModelParams params = make_params(c.gamma, c.b, c.m, c.weights);
    CountScalingPoint pt;
    pt.m = m;
    pt.N = params.N;
    for (int t = 0; t < cfg.trials; ++t) {
      const std::uint64_t seed = trial_seed(cfg.seed, t) ^ (0x5bd1e995u + m);
      const BipartiteGraph g = sample_graph(params, seed);
      const DegreeProfile prof = degree_profile(g, params);
      const PredictedOutliers pred = predict_outliers(prof, params, graph_hash(g));
      pt.mean_r2 += pred.r2_count;
    }
    pt.mean_r2 /= std::max(1, cfg.trials);
    pt.expected_count = expected_outlier_count(cfg.b, params.q, params.N, m,
                                               OutlierFamily::right_v2);
    lx.push_back(std::log(static_cast<double>(pt.N)));
    ly.push_back(std::log(pt.mean_r2 + 1.0));
    res.points.push_back(pt);
  }
  res.slope = least_squares_slope(lx, ly);
  const Thresholds th = thresholds(std::pow(cfg.gamma, 0.25));
  res.predicted_slope = 1.0 - cfg.b / th.r2_star;
  return res;
}

struct PhaseDiagramRow {
  double b = 0.0, gamma = 0.0, q = 0.0;
  RightRegion right;
  LeftRegion left;
  bool connectivity = false, ihara_bass = false;
  double expected_r2 = 0.0, expected_r1 = 0.0, expected_l2 = 0.0;
};

inline const char* right_region_name(RightRegion r) {
  switch (r) {
    case RightRegion::no_right_outliers: return "no-right-outliers";
    case RightRegion::v2_right_outliers: return "V2-right-outliers";
    case RightRegion::v1_and_v2_right_outliers: return "V1-and-V2-right-outliers";
  }
  return "?";
}

inline const char* left_region_name(LeftRegion l) {
  switch (l) {
    case LeftRegion::no_left_outliers: return "no-left-outliers";
    case LeftRegion::v2_left_outliers: return "V2-left-outliers";
    case LeftRegion::undetermined_below_assumptions: return "undetermined-below-assumptions";
    case LeftRegion::disconnected_regime: return "disconnected-regime";
  }
  return "?";
}

// Theory-only sweep over a (b, gamma) grid at the configured m.
inline std::vector<PhaseDiagramRow> phase_diagram(const ExperimentConfig& cfg,
                                                  const std::vector<double>& b_grid,
                                                  const std::vector<double>& gamma_grid) {
  std::vector<PhaseDiagramRow> rows;
  for (double gamma : gamma_grid) {
    for (double b : b_grid) {
      const ModelParams params = make_params(gamma, b, cfg.m, cfg.weights);
      PhaseDiagramRow row;
      row.b = b;
      row.gamma = gamma;
      row.q = params.q;
      const RegimeLabel lbl = classify_regime(b, params.q);
      row.right = lbl.right_region;
      row.left = lbl.left_region;
      const AssumptionFlags flags = assumptions_check(b, params.q);
      row.connectivity = flags.connectivity;
      row.ihara_bass = flags.ihara_bass;
      row.expected_r2 = expected_outlier_count(b, params.q, params.N, params.m,
                                               OutlierFamily::right_v2);
      row.expected_r1 = expected_outlier_count(b, params.q, params.N, params.m,
                                               OutlierFamily::right_v1);
      row.expected_l2 = expected_outlier_count(b, params.q, params.N, params.m,
                                               OutlierFamily::left_v2);
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// JSON records, CSV tables, manifests
// ---------------------------------------------------------------------------

// NaN is not representable in JSON; encode it as null.
inline nlohmann::json json_number(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

inline nlohmann::json trial_to_json(const TrialRecord& r) {
  nlohmann::json j;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["gamma"] = r.gamma;
  j["b"] = r.b;
  j["q"] = r.q;
  j["d"] = r.d;
  j["p"] = r.p;
  j["n"] = r.n;
  j["m"] = r.m;
  j["N"] = r.N;
  j["weights"] = r.weights;
  j["connected"] = r.connected;
  j["max_alpha1"] = r.max_alpha1;
  j["max_alpha2"] = r.max_alpha2;
  j["dense"] = r.dense;
  j["converged"] = r.converged;
  j["sigma_max"] = json_number(r.sigma_max);
  j["sigma_min"] = json_number(r.sigma_min);
  j["xi"] = r.xi;
  j["bulk_left"] = r.bulk_left;
  j["bulk_right"] = r.bulk_right;
  j["window_left"] = r.window_left;
  j["window_right"] = r.window_right;
  j["predicted_r1"] = r.predicted_r1;
  j["predicted_r2"] = r.predicted_r2;
  j["predicted_l2"] = r.predicted_l2;
  j["observed_right"] = r.observed_right;
  j["observed_left"] = r.observed_left;
  j["max_right_err"] = json_number(r.max_right_err);
  j["max_left_err"] = json_number(r.max_left_err);
  j["top_right_err"] = json_number(r.top_right_err);
  j["plant_alpha_actual"] = json_number(r.plant_alpha_actual);
  j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["gamma"] = cfg.gamma;
  j["b"] = cfg.b;
  j["m"] = cfg.m;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["weights"] = weight_name(cfg.weights);
  j["dense_limit"] = cfg.dense_limit;
  j["tol.gap_mult"] = cfg.gap_mult;
  j["tol.pass_frac"] = cfg.pass_frac;
  j["out_dir"] = cfg.out_dir;
  if (cfg.plant_alpha > 0.0) {
    j["plant_alpha"] = cfg.plant_alpha;
    j["plant_target"] = cfg.plant_target;
  }
  return j;
}

// Reproducibility manifest: what ran, with which configuration, when.
inline nlohmann::json make_manifest(const std::string& command,
                                    const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_to_json(cfg);
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tmv{};
  gmtime_r(&now, &tmv);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tmv);
  j["timestamp_utc"] = buf;
  j["tool"] = "rmtlab";
  j["version"] = "1.0.0";
  return j;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  os << j.dump(2) << '\n';
}

inline std::string emergence_csv(const EmergenceResult& res) {
  std::ostringstream os;
  os << "trial,seed,sigma_max,sigma_min,predicted_r1,predicted_r2,predicted_l2,"
        "observed_right,observed_left,connected\n";
  for (const TrialRecord& r : res.records) {
    os << r.trial << ',' << r.seed << ',' << r.sigma_max << ',' << r.sigma_min
       << ',' << r.predicted_r1 << ',' << r.predicted_r2 << ',' << r.predicted_l2
       << ',' << r.observed_right << ',' << r.observed_left << ','
       << (r.connected ? 1 : 0) << '\n';
  }
  return os.str();
}

inline std::string count_scaling_csv(const CountScalingResult& res) {
  std::ostringstream os;
  os << "m,N,mean_r2,expected_count\n";
  for (const CountScalingPoint& pt : res.points)
    os << pt.m << ',' << pt.N << ',' << pt.mean_r2 << ',' << pt.expected_count << '\n';
  return os.str();
}

inline std::string phase_diagram_csv(const std::vector<PhaseDiagramRow>& rows) {
  std::ostringstream os;
  os << "gamma,b,q,right_region,left_region,connectivity,ihara_bass,"
        "expected_r2,expected_r1,expected_l2\n";
  for (const PhaseDiagramRow& r : rows)
    os << r.gamma << ',' << r.b << ',' << r.q << ',' << right_region_name(r.right)
       << ',' << left_region_name(r.left) << ',' << (r.connectivity ? 1 : 0) << ','
       << (r.ihara_bass ? 1 : 0) << ',' << r.expected_r2 << ',' << r.expected_r1
       << ',' << r.expected_l2 << '\n';
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  os << text;
}

}  // namespace rmtlab
