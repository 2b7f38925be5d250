// SPDX-License-Identifier: MIT
//
// rmtlab.cpp -- command-line front end for the rmtlab library.
//
// Subcommands: thresholds, sample, spectrum, predict, emergence,
// count-scaling, phase-diagram, prune, verify {tridiag|ihara-bass|loewner|
// pruned}.  Every run resolves a flat key=value config file (overridable by
// flags), writes its outputs into `out_dir`, and drops a reproducibility
// manifest (command line, resolved config, timestamp, tool version) next to
// them.  The verify subcommands gate on `tol.pass_frac` and exit nonzero
// when the gate fails; everything else exits nonzero only on errors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "rmtlab/harness.hpp"
#include "rmtlab/localtree.hpp"
#include "rmtlab/nonbacktracking.hpp"
#include "rmtlab/pruning.hpp"

using namespace rmtlab;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing: config resolution, manifests, small parsers
// ---------------------------------------------------------------------------

// Options every subcommand shares.  Values act as overrides on top of the
// config file; only flags the user actually passed are applied.
struct CommonOpts {
  std::string config_path;
  double gamma = 0.0, b = 0.0, gap_mult = 0.0, pass_frac = 0.0;
  int m = 0, trials = 0, dense_limit = 0;
  std::uint64_t seed = 0;
  std::string weights, out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "flat key=value config file");
  cmd->add_option("--gamma", o.gamma, "aspect ratio n/m (>= 1)");
  cmd->add_option("--b", o.b, "sparsity multiplier: d = b ln N");
  cmd->add_option("--m", o.m, "number of V2 vertices (columns)");
  cmd->add_option("--trials", o.trials, "number of independent trials");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--weights", o.weights, "edge weights: none|rademacher|uniform_sym");
  cmd->add_option("--dense-limit", o.dense_limit, "largest m solved densely");
  cmd->add_option("--gap-mult", o.gap_mult, "outlier window multiplier on xi^(1/4)");
  cmd->add_option("--pass-frac", o.pass_frac, "fraction of trials a verify gate needs");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
}

ExperimentConfig resolve(const CLI::App* cmd, const CommonOpts& o) {
  ExperimentConfig cfg;
  if (cmd->count("--config")) cfg = parse_config_file(o.config_path);
  if (cmd->count("--gamma")) cfg.gamma = o.gamma;
  if (cmd->count("--b")) cfg.b = o.b;
  if (cmd->count("--m")) cfg.m = o.m;
  if (cmd->count("--trials")) cfg.trials = o.trials;
  if (cmd->count("--seed")) cfg.seed = o.seed;
  if (cmd->count("--weights")) cfg.weights = weight_from_name(o.weights);
  if (cmd->count("--dense-limit")) cfg.dense_limit = o.dense_limit;
  if (cmd->count("--gap-mult")) cfg.gap_mult = o.gap_mult;
  if (cmd->count("--pass-frac")) cfg.pass_frac = o.pass_frac;
  if (cmd->count("--out-dir")) cfg.out_dir = o.out_dir;
  return cfg;
}

// Create out_dir and write the manifest for this run.
void emit_manifest(const std::string& cmdline, const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  write_json_file(cfg.out_dir + "/manifest.json", make_manifest(cmdline, cfg));
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return cfg.out_dir + "/" + name;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::invalid_argument&) {
      throw ParseError("bad number in list: '" + tok + "'");
    }
  }
  if (out.empty()) throw ParseError("empty list: '" + s + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double x : parse_double_list(s)) out.push_back(static_cast<int>(x));
  return out;
}

const char* side_name(Side s) { return s == Side::v1 ? "V1" : "V2"; }

// ModelParams for a graph loaded from a file: dimensions come from the file,
// the sparsity scale from the configured b.
ModelParams params_for_graph(const BipartiteGraph& g, const ExperimentConfig& cfg) {
  if (g.m < 2 || g.n < 2) throw DomainError("graph too small: need n, m >= 2");
  ModelParams P;
  P.gamma = static_cast<double>(g.n) / g.m;
  P.b = cfg.b;
  P.m = g.m;
  P.n = g.n;
  P.N = g.n + g.m;
  P.q = std::pow(P.gamma, 0.25);
  P.d = cfg.b * std::log(static_cast<double>(P.N));
  P.p = P.d / std::sqrt(static_cast<double>(g.n) * g.m);
  P.weights = cfg.weights;
  return P;
}

// ---------------------------------------------------------------------------
// Minimal SVG output (histogram bars, log-log scatter with a fitted line)
// ---------------------------------------------------------------------------

constexpr int kSvgW = 640, kSvgH = 360, kSvgMargin = 46;

double svg_x(double v, double lo, double hi) {
  return kSvgMargin + (v - lo) / (hi - lo) * (kSvgW - 2 * kSvgMargin);
}

double svg_y(double v, double lo, double hi) {
  return kSvgH - kSvgMargin - (v - lo) / (hi - lo) * (kSvgH - 2 * kSvgMargin);
}

void svg_open(std::ostringstream& os) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgW
     << "\" height=\"" << kSvgH << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void svg_axes(std::ostringstream& os, double xlo, double xhi, double ylo, double yhi,
              const std::string& xlabel, const std::string& ylabel) {
  os << "<line x1=\"" << kSvgMargin << "\" y1=\"" << kSvgH - kSvgMargin << "\" x2=\""
     << kSvgW - kSvgMargin << "\" y2=\"" << kSvgH - kSvgMargin
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kSvgMargin << "\" y1=\"" << kSvgMargin << "\" x2=\""
     << kSvgMargin << "\" y2=\"" << kSvgH - kSvgMargin << "\" stroke=\"black\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", xlo);
  os << "<text x=\"" << kSvgMargin << "\" y=\"" << kSvgH - kSvgMargin + 16
     << "\" text-anchor=\"middle\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", xhi);
  os << "<text x=\"" << kSvgW - kSvgMargin << "\" y=\"" << kSvgH - kSvgMargin + 16
     << "\" text-anchor=\"middle\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", yhi);
  os << "<text x=\"" << kSvgMargin - 6 << "\" y=\"" << kSvgMargin + 4
     << "\" text-anchor=\"end\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", ylo);
  os << "<text x=\"" << kSvgMargin - 6 << "\" y=\"" << kSvgH - kSvgMargin
     << "\" text-anchor=\"end\">" << buf << "</text>\n"
     << "<text x=\"" << kSvgW / 2 << "\" y=\"" << kSvgH - 8
     << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
     << "<text x=\"14\" y=\"" << kSvgH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << kSvgH / 2 << ")\">" << ylabel << "</text>\n";
}

struct HistSeries {
  std::vector<double> values;
  std::string color;
  std::string label;
};

// Side-by-side histogram of one or two series with optional vertical marks
// (used for the bulk edges).
void write_svg_histogram(const std::string& path, const std::vector<HistSeries>& series,
                         const std::vector<double>& marks, const std::string& xlabel) {
  double lo = 1e300, hi = -1e300;
  for (const HistSeries& s : series)
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  for (double v : marks) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  constexpr int kBins = 24;
  std::vector<std::vector<int>> counts(series.size(), std::vector<int>(kBins, 0));
  int peak = 1;
  for (std::size_t k = 0; k < series.size(); ++k)
    for (double v : series[k].values) {
      int bin = static_cast<int>((v - lo) / (hi - lo) * kBins);
      bin = std::clamp(bin, 0, kBins - 1);
      peak = std::max(peak, ++counts[k][bin]);
    }

  std::ostringstream os;
  svg_open(os);
  svg_axes(os, lo, hi, 0.0, peak, xlabel, "count");
  const double w = (kSvgW - 2.0 * kSvgMargin) / kBins;
  for (std::size_t k = 0; k < series.size(); ++k) {
    for (int bin = 0; bin < kBins; ++bin) {
      if (counts[k][bin] == 0) continue;
      const double x = kSvgMargin + bin * w;
      const double y = svg_y(counts[k][bin], 0.0, peak);
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w * 0.92
         << "\" height=\"" << (kSvgH - kSvgMargin - y) << "\" fill=\"" << series[k].color
         << "\" fill-opacity=\"0.55\"/>\n";
    }
    os << "<text x=\"" << kSvgW - kSvgMargin << "\" y=\"" << kSvgMargin + 14 * (k + 1)
       << "\" text-anchor=\"end\" fill=\"" << series[k].color << "\">" << series[k].label
       << "</text>\n";
  }
  for (double v : marks)
    os << "<line x1=\"" << svg_x(v, lo, hi) << "\" y1=\"" << kSvgMargin << "\" x2=\""
       << svg_x(v, lo, hi) << "\" y2=\"" << kSvgH - kSvgMargin
       << "\" stroke=\"crimson\" stroke-dasharray=\"4 3\"/>\n";
  os << "</svg>\n";
  write_text_file(path, os.str());
}

// Scatter plus a least-squares line (used for the count-scaling fit).
void write_svg_scatter(const std::string& path, const std::vector<double>& xs,
                       const std::vector<double>& ys, double slope,
                       const std::string& xlabel, const std::string& ylabel) {
  double xlo = *std::min_element(xs.begin(), xs.end());
  double xhi = *std::max_element(xs.begin(), xs.end());
  double ylo = *std::min_element(ys.begin(), ys.end());
  double yhi = *std::max_element(ys.begin(), ys.end());
  if (!(xlo < xhi)) xhi = xlo + 1.0;
  if (!(ylo < yhi)) yhi = ylo + 1.0;
  const double ypad = 0.08 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  // Line through the centroid with the fitted slope.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();

  std::ostringstream os;
  svg_open(os);
  svg_axes(os, xlo, xhi, ylo, yhi, xlabel, ylabel);
  if (std::isfinite(slope)) {
    const double y1 = my + slope * (xlo - mx), y2 = my + slope * (xhi - mx);
    os << "<line x1=\"" << svg_x(xlo, xlo, xhi) << "\" y1=\"" << svg_y(y1, ylo, yhi)
       << "\" x2=\"" << svg_x(xhi, xlo, xhi) << "\" y2=\"" << svg_y(y2, ylo, yhi)
       << "\" stroke=\"steelblue\"/>\n";
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    os << "<circle cx=\"" << svg_x(xs[i], xlo, xhi) << "\" cy=\"" << svg_y(ys[i], ylo, yhi)
       << "\" r=\"4\" fill=\"crimson\"/>\n";
  os << "</svg>\n";
  write_text_file(path, os.str());
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int run_thresholds(const ExperimentConfig& cfg, double q_flag, bool q_given) {
  const double q = q_given ? q_flag : std::pow(cfg.gamma, 0.25);
  const Thresholds t = thresholds(q);
  json j;
  j["q"] = t.q;
  j["gamma"] = std::pow(q, 4.0);
  j["r2_star"] = t.r2_star;
  j["r1_star"] = t.r1_star;
  j["l2_star"] = t.l2_star ? json(*t.l2_star) : json(nullptr);
  j["connectivity_bound"] = t.connectivity_bound;
  j["ihara_bass_bound"] = t.ihara_bass_bound ? json(*t.ihara_bass_bound) : json(nullptr);
  j["critical_q_star"] = critical_q_star();
  write_json_file(out_path(cfg, "thresholds.json"), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_sample(const ExperimentConfig& cfg, int trial, const std::string& out_file) {
  const ModelParams params = make_params(cfg.gamma, cfg.b, cfg.m, cfg.weights);
  const std::uint64_t seed = trial_seed(cfg.seed, trial);
  BipartiteGraph g = sample_graph(params, seed);
  if (cfg.plant_alpha > 0.0)
    g = plant_heavy_column(g, params, cfg.plant_alpha, cfg.plant_target, seed);
  const std::string path = out_file.empty() ? out_path(cfg, "graph.txt") : out_file;
  write_graph_file(path, g);

  const DegreeProfile prof = degree_profile(g, params);
  json j;
  j["path"] = path;
  j["seed"] = seed;
  j["n"] = g.n;
  j["m"] = g.m;
  j["N"] = g.n + g.m;
  j["edges"] = g.num_edges();
  j["weighted"] = g.weighted;
  j["connected"] = is_connected(g);
  j["max_alpha1"] = prof.max_alpha1;
  j["max_alpha2"] = prof.max_alpha2;
  if (cfg.plant_alpha > 0.0) {
    j["plant_alpha"] = cfg.plant_alpha;
    j["plant_target"] = cfg.plant_target;
    j["plant_alpha_actual"] = prof.alpha2[cfg.plant_target];
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

// Load --graph if given, else sample trial `trial` inline.  Returns the
// graph, its params, and a JSON source tag.
struct GraphInput {
  BipartiteGraph graph;
  ModelParams params;
  json source;
};

GraphInput load_or_sample(const ExperimentConfig& cfg, const std::string& graph_file,
                          int trial) {
  GraphInput in;
  if (!graph_file.empty()) {
    in.graph = read_graph_file(graph_file);
    in.params = params_for_graph(in.graph, cfg);
    in.source = json{{"file", graph_file}, {"b", cfg.b}};
  } else {
    in.params = make_params(cfg.gamma, cfg.b, cfg.m, cfg.weights);
    const std::uint64_t seed = trial_seed(cfg.seed, trial);
    in.graph = sample_graph(in.params, seed);
    in.source = json{{"sampled", true}, {"seed", seed}, {"trial", trial}};
  }
  return in;
}

int run_spectrum(const ExperimentConfig& cfg, const std::string& graph_file, int trial) {
  const GraphInput in = load_or_sample(cfg, graph_file, trial);
  const CenteredOperator op = build_operator(in.graph, in.params);
  SolveOptions so;
  so.dense_limit = cfg.dense_limit;
  const SpectralReport rep = singular_values(op, so);
  const PredictedOutliers pred =
      predict_outliers(degree_profile(in.graph, in.params), in.params, graph_hash(in.graph));

  // Observed outliers: resolved singular values beyond the two windows.
  std::vector<double> out_right, out_left;
  for (double s : rep.sigma)
    if (s >= pred.window_right) out_right.push_back(s);
  if (pred.left_defined) {
    const std::vector<double>& low = rep.dense ? rep.sigma : rep.sigma_bottom;
    for (double s : low)
      if (s <= pred.window_left) out_left.push_back(s);
  }
  std::sort(out_left.begin(), out_left.end());

  // Consecutive gaps of the resolved (descending) top block.
  std::vector<double> gaps;
  for (std::size_t i = 0; i + 1 < rep.sigma.size(); ++i)
    gaps.push_back(rep.sigma[i] - rep.sigma[i + 1]);

  // Kolmogorov-Smirnov distance of the empirical law against the MP-type
  // bulk law; needs the full spectrum, so dense path only.
  json ks = nullptr;
  if (rep.dense && !rep.sigma.empty()) {
    std::vector<double> asc(rep.sigma.rbegin(), rep.sigma.rend());
    const double M = static_cast<double>(asc.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < asc.size(); ++i) {
      const double F = mp_cdf(asc[i], in.params.q);
      worst = std::max(worst, std::abs(F - (i + 1) / M));
      worst = std::max(worst, std::abs(F - i / M));
    }
    ks = worst;
  }

  json j;
  j["source"] = in.source;
  j["params"] = {{"gamma", in.params.gamma}, {"b", in.params.b}, {"m", in.params.m},
                 {"n", in.params.n},         {"N", in.params.N}, {"q", in.params.q},
                 {"d", in.params.d},         {"p", in.params.p},
                 {"weights", weight_name(in.params.weights)}};
  j["dense"] = rep.dense;
  j["converged"] = rep.converged;
  j["sigma"] = rep.sigma;
  if (!rep.dense) j["sigma_bottom"] = rep.sigma_bottom;
  j["bulk"] = {{"left", pred.bulk_left}, {"right", pred.bulk_right}};
  j["windows"] = {{"left", pred.left_defined ? json(pred.window_left) : json(nullptr)},
                  {"right", pred.window_right}};
  j["outliers"] = {{"right", out_right},
                   {"left", out_left},
                   {"observed_right", static_cast<int>(out_right.size())},
                   {"observed_left", static_cast<int>(out_left.size())}};
  j["gaps"] = gaps;
  j["ks"] = ks;
  write_json_file(out_path(cfg, "spectrum.json"), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

json outlier_list_json(const std::vector<OutlierVertex>& list) {
  json arr = json::array();
  for (const OutlierVertex& v : list)
    arr.push_back({{"side", side_name(v.side)},
                   {"index", v.index},
                   {"alpha", v.alpha},
                   {"location", v.location}});
  return arr;
}

int run_predict(const ExperimentConfig& cfg, const std::string& graph_file, int trial) {
  const GraphInput in = load_or_sample(cfg, graph_file, trial);
  const DegreeProfile prof = degree_profile(in.graph, in.params);
  const PredictedOutliers pred = predict_outliers(prof, in.params, graph_hash(in.graph));

  json j;
  j["source"] = in.source;
  j["q"] = pred.q;
  j["d"] = pred.d;
  j["xi"] = pred.xi;
  j["xi_quarter"] = pred.xi_quarter;
  j["bulk"] = {{"left", pred.bulk_left}, {"right", pred.bulk_right}};
  j["windows"] = {{"left", pred.left_defined ? json(pred.window_left) : json(nullptr)},
                  {"right", pred.window_right}};
  j["left_defined"] = pred.left_defined;
  j["r1_count"] = pred.r1_count;
  j["r2_count"] = pred.r2_count;
  j["l2_count"] = pred.l2_count;
  j["right"] = outlier_list_json(pred.right);
  j["left"] = outlier_list_json(pred.left);
  write_json_file(out_path(cfg, "predict.json"), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_emergence(const ExperimentConfig& cfg, bool svg) {
  const EmergenceResult res = emergence_experiment(cfg);
  write_text_file(out_path(cfg, "emergence.csv"), emergence_csv(res));

  json j;
  j["config"] = config_to_json(cfg);
  j["frac_right_present"] = res.frac_right_present;
  j["frac_left_present"] = res.frac_left_present;
  j["mean_observed_right"] = res.mean_observed_right;
  j["mean_observed_left"] = res.mean_observed_left;
  j["median_sigma_max"] = json_number(res.median_sigma_max);
  j["median_sigma_min"] = json_number(res.median_sigma_min);
  json recs = json::array();
  for (const TrialRecord& r : res.records) recs.push_back(trial_to_json(r));
  j["records"] = recs;
  write_json_file(out_path(cfg, "emergence.json"), j);

  // Histogram of the per-trial extremes (bin edges + counts) as CSV, with
  // the bulk edges marked in the optional SVG.
  std::vector<double> smax, smin;
  for (const TrialRecord& r : res.records) {
    if (std::isfinite(r.sigma_max)) smax.push_back(r.sigma_max);
    if (std::isfinite(r.sigma_min)) smin.push_back(r.sigma_min);
  }
  double lo = 1e300, hi = -1e300;
  for (double v : smax) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (double v : smin) { lo = std::min(lo, v); hi = std::max(hi, v); }
  if (!(lo < hi)) { lo -= 0.5; hi += 0.5; }
  constexpr int kBins = 24;
  std::vector<int> cmax(kBins, 0), cmin(kBins, 0);
  auto bin_of = [&](double v) {
    return std::clamp(static_cast<int>((v - lo) / (hi - lo) * kBins), 0, kBins - 1);
  };
  for (double v : smax) ++cmax[bin_of(v)];
  for (double v : smin) ++cmin[bin_of(v)];
  std::ostringstream hist;
  hist << "bin_lo,bin_hi,count_sigma_max,count_sigma_min\n";
  for (int k = 0; k < kBins; ++k)
    hist << lo + (hi - lo) * k / kBins << ',' << lo + (hi - lo) * (k + 1) / kBins << ','
         << cmax[k] << ',' << cmin[k] << '\n';
  write_text_file(out_path(cfg, "emergence_hist.csv"), hist.str());

  if (svg && !res.records.empty()) {
    const TrialRecord& r0 = res.records.front();
    write_svg_histogram(out_path(cfg, "emergence.svg"),
                        {{smax, "steelblue", "sigma_max"}, {smin, "darkorange", "sigma_min"}},
                        {r0.bulk_left, r0.bulk_right}, "singular value");
  }

  std::cout << "emergence: gamma=" << cfg.gamma << " b=" << cfg.b << " m=" << cfg.m
            << " trials=" << cfg.trials << "\n"
            << "  frac right present = " << res.frac_right_present << "\n"
            << "  frac left present  = " << res.frac_left_present << "\n"
            << "  median sigma_max   = " << res.median_sigma_max << "\n"
            << "  median sigma_min   = " << res.median_sigma_min << "\n"
            << "  wrote " << out_path(cfg, "emergence.{csv,json}") << "\n";
  return 0;
}

int run_count_scaling(const ExperimentConfig& cfg, const std::string& sizes, bool svg) {
  const std::vector<int> m_values = parse_int_list(sizes);
  const CountScalingResult res = count_scaling_experiment(cfg, m_values);
  write_text_file(out_path(cfg, "count_scaling.csv"), count_scaling_csv(res));

  json j;
  j["config"] = config_to_json(cfg);
  json pts = json::array();
  for (const CountScalingPoint& pt : res.points)
    pts.push_back({{"m", pt.m}, {"N", pt.N}, {"mean_r2", pt.mean_r2},
                   {"expected_count", pt.expected_count}});
  j["points"] = pts;
  j["slope"] = json_number(res.slope);
  j["predicted_slope"] = json_number(res.predicted_slope);
  write_json_file(out_path(cfg, "count_scaling.json"), j);

  if (svg) {
    std::vector<double> xs, ys;
    for (const CountScalingPoint& pt : res.points) {
      xs.push_back(std::log(static_cast<double>(pt.N)));
      ys.push_back(std::log(pt.mean_r2 + 1.0));
    }
    write_svg_scatter(out_path(cfg, "count_scaling.svg"), xs, ys, res.slope,
                      "ln N", "ln(mean |R2| + 1)");
  }

  std::cout << "count scaling: b=" << cfg.b << " trials=" << cfg.trials << "\n"
            << "  fitted slope    = " << res.slope << "\n"
            << "  predicted slope = " << res.predicted_slope << "\n"
            << "  wrote " << out_path(cfg, "count_scaling.{csv,json}") << "\n";
  return 0;
}

int run_phase_diagram(const ExperimentConfig& cfg, const std::string& b_grid,
                      const std::string& gamma_grid) {
  const std::vector<double> bs = parse_double_list(b_grid);
  const std::vector<double> gs = parse_double_list(gamma_grid);
  const std::vector<PhaseDiagramRow> rows = phase_diagram(cfg, bs, gs);
  write_text_file(out_path(cfg, "phase_diagram.csv"), phase_diagram_csv(rows));

  json j;
  j["config"] = config_to_json(cfg);
  json arr = json::array();
  for (const PhaseDiagramRow& r : rows)
    arr.push_back({{"gamma", r.gamma},
                   {"b", r.b},
                   {"q", r.q},
                   {"right_region", right_region_name(r.right)},
                   {"left_region", left_region_name(r.left)},
                   {"connectivity", r.connectivity},
                   {"ihara_bass", r.ihara_bass},
                   {"expected_r2", r.expected_r2},
                   {"expected_r1", r.expected_r1},
                   {"expected_l2", r.expected_l2}});
  j["rows"] = arr;
  write_json_file(out_path(cfg, "phase_diagram.json"), j);

  std::cout << "phase diagram: " << rows.size() << " grid points ("
            << gs.size() << " gamma x " << bs.size() << " b), wrote "
            << out_path(cfg, "phase_diagram.{csv,json}") << "\n";
  return 0;
}

json property_json(const PropertyResult& p) {
  return json{{"ok", p.ok},
              {"checked", p.checked},
              {"failures", p.failures},
              {"worst", json_number(p.worst)},
              {"note", p.note}};
}

json verification_json(const PruningVerification& v) {
  return json{{"separation", property_json(v.separation)},
              {"tree_balls", property_json(v.tree_balls)},
              {"incidence", property_json(v.incidence)},
              {"layer_containment", property_json(v.layer_containment)},
              {"removed_degree", property_json(v.removed_degree)},
              {"layer_loss", property_json(v.layer_loss)},
              {"C", v.C},
              {"all_ok", v.all_ok()}};
}

int run_prune(const ExperimentConfig& cfg, const std::string& graph_file, int trial,
              double C) {
  const GraphInput in = load_or_sample(cfg, graph_file, trial);
  const PrunedGraph pr = prune(in.graph, in.params);
  write_graph_file(out_path(cfg, "pruned_graph.txt"), pr.graph);

  std::ostringstream removed;
  removed << "eid,u,v,stage,anchor\n";
  for (const RemovedEdge& e : pr.removed)
    removed << e.eid << ',' << e.u << ',' << e.v << ',' << e.stage << ',' << e.anchor
            << '\n';
  write_text_file(out_path(cfg, "removed_edges.csv"), removed.str());

  const PruningVerification ver = verify_pruned(in.graph, pr, in.params, C);
  json j;
  j["source"] = in.source;
  j["tau"] = {{"tau1", pr.special.tau.tau1},
              {"tau2_plus", pr.special.tau.tau2_plus},
              {"tau2_minus", pr.special.tau.tau2_minus}};
  j["r_star"] = {{"raw", pr.r_star.raw},
                 {"effective", pr.r_star.effective},
                 {"clamped", pr.r_star.clamped}};
  j["special"] = {{"v1_high", pr.special.v1_high},
                  {"v2_high", pr.special.v2_high},
                  {"v2_low", pr.special.v2_low},
                  {"total", static_cast<int>(pr.special.global.size())}};
  j["removed_edges"] = static_cast<int>(pr.removed.size());
  j["verification"] = verification_json(ver);
  write_json_file(out_path(cfg, "prune.json"), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

// verify tridiag: CSV of (alpha, q, r, extreme eigenvalue, Lambda, gap) rows;
// the gate needs the gap at the largest radius to be within tol for every
// alpha.  Alphas on the lower branch compare the smallest positive
// eigenvalue, upper-branch alphas the top one.
int run_verify_tridiag(const ExperimentConfig& cfg, double q_flag, bool q_given,
                       const std::string& alphas, const std::string& radii, double tol) {
  const double q = q_given ? q_flag : std::pow(cfg.gamma, 0.25);
  const std::vector<double> as = parse_double_list(alphas);
  const std::vector<int> rs = parse_int_list(radii);

  std::ostringstream csv;
  csv << "alpha,q,r,extreme,lambda,gap\n";
  bool pass = true;
  for (double a : as) {
    const double loc = lambda_q(a, q);  // throws DomainError inside the band
    const bool lower = a <= q * q - 1.0;
    double final_gap = kNaN;
    for (int r : rs) {
      const TridiagExtremes ex = tridiag_extreme_eigs(build_tridiagonal(a, q, Side::v2, r));
      const double extreme = lower ? ex.smallest_positive : ex.top;
      const double gap = std::abs(extreme - loc);
      csv << a << ',' << q << ',' << r << ',' << extreme << ',' << loc << ',' << gap
          << '\n';
      final_gap = gap;
    }
    if (!(final_gap <= tol)) pass = false;
  }
  write_text_file(out_path(cfg, "verify_tridiag.csv"), csv.str());
  std::cout << csv.str() << "verify tridiag: " << (pass ? "PASS" : "FAIL")
            << " (gap at largest radius <= " << tol << " for every alpha)\n";
  return pass ? 0 : 1;
}

// verify ihara-bass: on sampled instances, the positive-definiteness onset
// theta* must not exceed the non-backtracking spectral radius by more than a
// small slack (the onset is an accurate radius estimate, never a gross
// overestimate; poles of the reduced blocks can pin it slightly above rho).
int run_verify_ihara_bass(const ExperimentConfig& cfg) {
  constexpr double kSlack = 1e-4;
  const ModelParams params = make_params(cfg.gamma, cfg.b, cfg.m, cfg.weights);
  json trials = json::array();
  int ok = 0;
  double worst_margin = 1e300, max_theta = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = trial_seed(cfg.seed, t);
    const BipartiteGraph g = sample_graph(params, seed);
    const CenteredOperator op = build_operator(g, params);
    const NbOperator nb = nb_build(op);
    // Exact rho from the dense B when it fits; power iteration at scale.
    double rho = 0.0;
    bool rho_exact = true;
    try {
      const Eigen::MatrixXd B = nb_dense(nb);
      const Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(B, false);
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        rho = std::max(rho, std::abs(es.eigenvalues()(i)));
    } catch (const PreconditionFailed&) {
      const NbRadius rad = nb_spectral_radius(nb);
      rho = rad.rho;
      rho_exact = false;
    }
    double theta = 0.0;
    try {
      theta = theta_star(op).theta;
    } catch (const BracketError&) {
      theta = 0.0;  // PD down to the probe floor: radius bound is zero
    }
    const double margin = rho - theta;  // >= -slack required
    const bool pass = theta <= rho + kSlack;
    if (pass) ++ok;
    worst_margin = std::min(worst_margin, margin);
    max_theta = std::max(max_theta, theta);
    trials.push_back({{"trial", t},
                      {"seed", seed},
                      {"rho", rho},
                      {"rho_route", rho_exact ? "dense" : "power"},
                      {"theta_star", theta},
                      {"margin", margin},
                      {"pass", pass}});
  }
  const double frac = cfg.trials > 0 ? static_cast<double>(ok) / cfg.trials : 0.0;
  const bool pass = frac >= cfg.pass_frac;
  json j;
  j["config"] = config_to_json(cfg);
  j["trials"] = trials;
  j["margin"] = worst_margin;  // worst rho - theta* over trials
  j["bound"] = max_theta;
  j["frac_pass"] = frac;
  j["pass"] = pass;
  write_json_file(out_path(cfg, "verify_ihara_bass.json"), j);
  std::cout << j.dump(2) << '\n';
  return pass ? 0 : 1;
}

// verify loewner: both sandwich inequalities, per trial, at constant C.
int run_verify_loewner(const ExperimentConfig& cfg, double C) {
  const ModelParams params = make_params(cfg.gamma, cfg.b, cfg.m, cfg.weights);
  json trials = json::array();
  int ok = 0;
  double worst_upper = -1e300, worst_lower = 1e300;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = trial_seed(cfg.seed, t);
    const BipartiteGraph g = sample_graph(params, seed);
    const CenteredOperator op = build_operator(g, params);
    const DegreeProfile prof = degree_profile(g, params);
    const LoewnerReport up = loewner_upper_check(op, prof, C);
    json lower_json;
    bool trial_ok = up.ok;
    try {
      const LoewnerReport lo = loewner_lower_check(op, prof, C);
      trial_ok = trial_ok && lo.ok;
      worst_lower = std::min(worst_lower, lo.margin + lo.bound);
      lower_json = {{"margin", lo.margin}, {"bound", lo.bound}, {"pass", lo.ok}};
    } catch (const PreconditionFailed& e) {
      trial_ok = false;
      lower_json = {{"error", e.what()}};
    }
    worst_upper = std::max(worst_upper, up.margin - up.bound);
    if (trial_ok) ++ok;
    trials.push_back({{"trial", t},
                      {"seed", seed},
                      {"upper", {{"margin", up.margin}, {"bound", up.bound}, {"pass", up.ok}}},
                      {"lower", lower_json},
                      {"pass", trial_ok}});
  }
  const double frac = cfg.trials > 0 ? static_cast<double>(ok) / cfg.trials : 0.0;
  const bool pass = frac >= cfg.pass_frac;
  json j;
  j["config"] = config_to_json(cfg);
  j["C"] = C;
  j["trials"] = trials;
  j["margin"] = {{"upper_worst_excess", worst_upper}, {"lower_worst_headroom", worst_lower}};
  j["bound"] = {{"upper", "C d^(-3/2) (Delta + d)"}, {"lower", "-C d^(-1/2)"}};
  j["frac_pass"] = frac;
  j["pass"] = pass;
  write_json_file(out_path(cfg, "verify_loewner.json"), j);
  std::cout << j.dump(2) << '\n';
  return pass ? 0 : 1;
}

// verify pruned: structural properties must hold in every trial, the two
// C-bounded properties in at least pass_frac of them.
int run_verify_pruned(const ExperimentConfig& cfg, const std::string& graph_file,
                      double C) {
  json trials = json::array();
  int structural_ok = 0, bounds_ok = 0;
  const int total = graph_file.empty() ? cfg.trials : 1;
  for (int t = 0; t < total; ++t) {
    const GraphInput in = load_or_sample(cfg, graph_file, t);
    const PrunedGraph pr = prune(in.graph, in.params);
    const PruningVerification ver = verify_pruned(in.graph, pr, in.params, C);
    const bool structural = ver.separation.ok && ver.tree_balls.ok && ver.incidence.ok &&
                            ver.layer_containment.ok;
    const bool bounds = ver.removed_degree.ok && ver.layer_loss.ok;
    if (structural) ++structural_ok;
    if (bounds) ++bounds_ok;
    trials.push_back({{"trial", t},
                      {"source", in.source},
                      {"specials", static_cast<int>(pr.special.global.size())},
                      {"removed_edges", static_cast<int>(pr.removed.size())},
                      {"verification", verification_json(ver)}});
  }
  const double bounds_frac = total > 0 ? static_cast<double>(bounds_ok) / total : 0.0;
  const bool pass = structural_ok == total && bounds_frac >= cfg.pass_frac;
  json j;
  j["config"] = config_to_json(cfg);
  j["C"] = C;
  j["trials"] = trials;
  j["structural_ok"] = structural_ok;
  j["bounds_frac"] = bounds_frac;
  j["pass"] = pass;
  write_json_file(out_path(cfg, "verify_pruned.json"), j);
  std::cout << j.dump(2) << '\n';
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmtlab: extreme singular values of sparse random bipartite graphs"};
  app.require_subcommand(1);

  std::string cmdline;
  for (int i = 0; i < argc; ++i) {
    if (i) cmdline += ' ';
    cmdline += argv[i];
  }

  // thresholds
  CommonOpts o_thr;
  double thr_q = 0.0;
  CLI::App* c_thr = app.add_subcommand("thresholds", "closed-form emergence thresholds");
  add_common(c_thr, o_thr);
  c_thr->add_option("--q", thr_q, "aspect parameter q (overrides gamma^(1/4))");

  // sample
  CommonOpts o_sam;
  int sam_trial = 0;
  std::string sam_out;
  double sam_plant_alpha = 0.0;
  int sam_plant_target = 0;
  CLI::App* c_sam = app.add_subcommand("sample", "sample one graph and serialize it");
  add_common(c_sam, o_sam);
  c_sam->add_option("--trial", sam_trial, "trial index (seed = master + 1000003 * trial)");
  c_sam->add_option("--out", sam_out, "graph file path (default <out_dir>/graph.txt)");
  c_sam->add_option("--plant-alpha", sam_plant_alpha,
                    "plant a heavy column with this normalized degree");
  c_sam->add_option("--plant-target", sam_plant_target, "column to replant (default 0)");

  // spectrum
  CommonOpts o_spe;
  std::string spe_graph;
  int spe_trial = 0;
  CLI::App* c_spe = app.add_subcommand("spectrum", "singular values and observed outliers");
  add_common(c_spe, o_spe);
  c_spe->add_option("--graph", spe_graph, "serialized graph file (default: sample inline)");
  c_spe->add_option("--trial", spe_trial, "trial index when sampling inline");

  // predict
  CommonOpts o_pre;
  std::string pre_graph;
  int pre_trial = 0;
  CLI::App* c_pre = app.add_subcommand("predict", "degree-driven outlier predictions");
  add_common(c_pre, o_pre);
  c_pre->add_option("--graph", pre_graph, "serialized graph file (default: sample inline)");
  c_pre->add_option("--trial", pre_trial, "trial index when sampling inline");

  // emergence
  CommonOpts o_eme;
  bool eme_svg = false;
  CLI::App* c_eme = app.add_subcommand("emergence", "outlier fractions over trials");
  add_common(c_eme, o_eme);
  c_eme->add_flag("--svg", eme_svg, "also write a histogram SVG");

  // count-scaling
  CommonOpts o_cnt;
  std::string cnt_sizes = "100,1000,10000";
  bool cnt_svg = false;
  CLI::App* c_cnt = app.add_subcommand("count-scaling", "outlier-count slope against N");
  add_common(c_cnt, o_cnt);
  c_cnt->add_option("--sizes", cnt_sizes, "comma list of m values");
  c_cnt->add_flag("--svg", cnt_svg, "also write a log-log scatter SVG");

  // phase-diagram
  CommonOpts o_pha;
  std::string pha_b = "0.5,1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6,6.5,7,7.5,8";
  std::string pha_g = "1,2,4,9,16";
  CLI::App* c_pha = app.add_subcommand("phase-diagram", "theory-only regime sweep");
  add_common(c_pha, o_pha);
  c_pha->add_option("--b-grid", pha_b, "comma list of b values");
  c_pha->add_option("--gamma-grid", pha_g, "comma list of gamma values");

  // prune
  CommonOpts o_pru;
  std::string pru_graph;
  int pru_trial = 0;
  double pru_C = 10.0;
  CLI::App* c_pru = app.add_subcommand("prune", "two-stage pruning around special vertices");
  add_common(c_pru, o_pru);
  c_pru->add_option("--graph", pru_graph, "serialized graph file (default: sample inline)");
  c_pru->add_option("--trial", pru_trial, "trial index when sampling inline");
  c_pru->add_option("--C", pru_C, "constant in the bounded verification properties");

  // verify {tridiag|ihara-bass|loewner|pruned}
  CLI::App* c_ver = app.add_subcommand("verify", "quantitative consistency gates");
  c_ver->require_subcommand(1);

  CommonOpts o_vtr;
  double vtr_q = 0.0, vtr_tol = 1e-6;
  std::string vtr_alphas = "0.5,1,5,8,12";
  std::string vtr_radii = "10,20,40,60";
  CLI::App* c_vtr = c_ver->add_subcommand("tridiag", "tridiagonal model against Lambda");
  add_common(c_vtr, o_vtr);
  c_vtr->add_option("--q", vtr_q, "aspect parameter q (overrides gamma^(1/4))");
  c_vtr->add_option("--alphas", vtr_alphas, "comma list of normalized degrees");
  c_vtr->add_option("--radii", vtr_radii, "comma list of truncation radii");
  c_vtr->add_option("--tol", vtr_tol, "gap tolerance at the largest radius");

  CommonOpts o_vib;
  CLI::App* c_vib = c_ver->add_subcommand("ihara-bass", "theta* bounds the NB radius");
  add_common(c_vib, o_vib);

  CommonOpts o_vlo;
  double vlo_C = 10.0;
  CLI::App* c_vlo = c_ver->add_subcommand("loewner", "two-sided sandwich margins");
  add_common(c_vlo, o_vlo);
  c_vlo->add_option("--C", vlo_C, "constant in both bounds");

  CommonOpts o_vpr;
  std::string vpr_graph;
  double vpr_C = 10.0;
  CLI::App* c_vpr = c_ver->add_subcommand("pruned", "pruned-graph properties");
  add_common(c_vpr, o_vpr);
  c_vpr->add_option("--graph", vpr_graph, "serialized graph file (default: sample per trial)");
  c_vpr->add_option("--C", vpr_C, "constant in the bounded properties");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_thr->parsed()) {
      const ExperimentConfig cfg = resolve(c_thr, o_thr);
      emit_manifest(cmdline, cfg);
      return run_thresholds(cfg, thr_q, c_thr->count("--q") > 0);
    }
    if (c_sam->parsed()) {
      ExperimentConfig cfg = resolve(c_sam, o_sam);
      if (c_sam->count("--plant-alpha")) cfg.plant_alpha = sam_plant_alpha;
      if (c_sam->count("--plant-target")) cfg.plant_target = sam_plant_target;
      emit_manifest(cmdline, cfg);
      return run_sample(cfg, sam_trial, sam_out);
    }
    if (c_spe->parsed()) {
      const ExperimentConfig cfg = resolve(c_spe, o_spe);
      emit_manifest(cmdline, cfg);
      return run_spectrum(cfg, spe_graph, spe_trial);
    }
    if (c_pre->parsed()) {
      const ExperimentConfig cfg = resolve(c_pre, o_pre);
      emit_manifest(cmdline, cfg);
      return run_predict(cfg, pre_graph, pre_trial);
    }
    if (c_eme->parsed()) {
      const ExperimentConfig cfg = resolve(c_eme, o_eme);
      emit_manifest(cmdline, cfg);
      return run_emergence(cfg, eme_svg);
    }
    if (c_cnt->parsed()) {
      const ExperimentConfig cfg = resolve(c_cnt, o_cnt);
      emit_manifest(cmdline, cfg);
      return run_count_scaling(cfg, cnt_sizes, cnt_svg);
    }
    if (c_pha->parsed()) {
      const ExperimentConfig cfg = resolve(c_pha, o_pha);
      emit_manifest(cmdline, cfg);
      return run_phase_diagram(cfg, pha_b, pha_g);
    }
    if (c_pru->parsed()) {
      const ExperimentConfig cfg = resolve(c_pru, o_pru);
      emit_manifest(cmdline, cfg);
      return run_prune(cfg, pru_graph, pru_trial, pru_C);
    }
    if (c_ver->parsed()) {
      if (c_vtr->parsed()) {
        const ExperimentConfig cfg = resolve(c_vtr, o_vtr);
        emit_manifest(cmdline, cfg);
        return run_verify_tridiag(cfg, vtr_q, c_vtr->count("--q") > 0, vtr_alphas,
                                  vtr_radii, vtr_tol);
      }
      if (c_vib->parsed()) {
        const ExperimentConfig cfg = resolve(c_vib, o_vib);
        emit_manifest(cmdline, cfg);
        return run_verify_ihara_bass(cfg);
      }
      if (c_vlo->parsed()) {
        const ExperimentConfig cfg = resolve(c_vlo, o_vlo);
        emit_manifest(cmdline, cfg);
        return run_verify_loewner(cfg, vlo_C);
      }
      if (c_vpr->parsed()) {
        const ExperimentConfig cfg = resolve(c_vpr, o_vpr);
        emit_manifest(cmdline, cfg);
        return run_verify_pruned(cfg, vpr_graph, vpr_C);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "rmtlab: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
