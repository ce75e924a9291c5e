#pragma once

// Batch orchestration behind the command-line tool: simulate data, fit the
// univariate or bivariate model, extract region summaries, and report chain
// diagnostics. Every run writes a manifest that is itself a valid config
// file for an identical re-run.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "xqr/io.hpp"
#include "xqr/regions.hpp"
#include "xqr/samplers.hpp"
#include "xqr/testbeds.hpp"

namespace xqr {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string mode;  // simulate | fit-uni | fit-biv | regions | diagnostics
  std::string data;
  std::string draws;  // regions, diagnostics
  std::string out_dir = "out";

  // simulate
  std::string testbed = "frechet";
  int n = 1500;

  std::uint64_t seed = 1;
  double level = 0.90;  // censoring level
  std::string prior = "A";
  double nb_mean = 3.2, nb_variance = 4.48;
  double p0_lo = 0.0, p0_hi = 0.1, p1_lo = 0.0, p1_hi = 0.1;
  long iterations = 50000, burn_in = 30000;
  double pi_star = 0.234, tau0 = 1.0;
  std::string gain = "polynomial";
  double gain_exponent = 0.6;
  bool paper_exact_c = false;

  std::vector<double> probabilities{1.0 / 750, 1.0 / 1500, 1.0 / 3000};
  double credibility = 0.90;           // region bands
  double quantile_credibility = 0.95;  // univariate quantile intervals
  int grid_size = 199;
  long thin = 5;
  std::string nu_convention = "radius-weighted";

  std::string y1 = "y1", y2 = "y2", covariate;
  bool regression = false;               // quadratic location in the covariate
  std::optional<double> covariate_value;  // location used for quantiles/regions
  bool check_invariants = true;

  void validate() const;
  // Canonical key = value text, also accepted as a config file.
  std::string to_ini() const;
  std::uint64_t hash() const;
};

inline void RunConfig::validate() const {
  static const std::vector<std::string> modes{"simulate", "fit-uni", "fit-biv", "regions", "diagnostics"};
  if (std::find(modes.begin(), modes.end(), mode) == modes.end())
    throw std::invalid_argument("mode must be one of simulate, fit-uni, fit-biv, regions, diagnostics");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("censoring level must lie in (0, 1)");
  if (mode != "simulate" && mode != "diagnostics" && data.empty()) throw std::invalid_argument("a data file is required");
  if ((mode == "regions" || mode == "diagnostics") && draws.empty())
    throw std::invalid_argument("a draws file is required");
  if (iterations < 1 || burn_in < 0 || burn_in >= iterations)
    throw std::invalid_argument("burn-in must satisfy 0 <= burn-in < iterations");
  if (n < 1) throw std::invalid_argument("n must be positive");
  for (double p : probabilities)
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probabilities must lie in (0, 1)");
  if (!(credibility > 0.0 && credibility < 1.0) || !(quantile_credibility > 0.0 && quantile_credibility < 1.0))
    throw std::invalid_argument("credibility levels must lie in (0, 1)");
  if (grid_size < 2) throw std::invalid_argument("grid size must be at least 2");
  if (thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (regression && covariate.empty()) throw std::invalid_argument("regression needs a covariate column");
  parse_marginal_prior(prior);
  parse_nu_convention(nu_convention);
  parse_adaptation_gain(gain);
}

inline std::string RunConfig::to_ini() const {
  std::ostringstream os;
  auto kv = [&](const char* k, const auto& v) { os << k << " = " << v << '\n'; };
  auto quoted = [&](const char* k, const std::string& v) { os << k << " = \"" << v << "\"\n"; };
  auto num = [&](const char* k, double v) { os << k << " = " << format_double(v) << '\n'; };
  quoted("mode", mode);
  quoted("data", data);
  quoted("draws", draws);
  quoted("out-dir", out_dir);
  quoted("testbed", testbed);
  kv("n", n);
  kv("seed", seed);
  num("level", level);
  quoted("prior", prior);
  num("nb-mean", nb_mean);
  num("nb-variance", nb_variance);
  num("p0-lo", p0_lo);
  num("p0-hi", p0_hi);
  num("p1-lo", p1_lo);
  num("p1-hi", p1_hi);
  kv("iterations", iterations);
  kv("burn-in", burn_in);
  num("pi-star", pi_star);
  num("tau0", tau0);
  quoted("gain", gain);
  num("gain-exponent", gain_exponent);
  kv("paper-exact-c", paper_exact_c ? "true" : "false");
  os << "probabilities = [";
  for (std::size_t i = 0; i < probabilities.size(); ++i) os << (i ? ", " : "") << format_double(probabilities[i]);
  os << "]\n";
  num("credibility", credibility);
  num("quantile-credibility", quantile_credibility);
  kv("grid-size", grid_size);
  kv("thin", thin);
  quoted("nu-convention", nu_convention);
  quoted("y1", y1);
  quoted("y2", y2);
  quoted("covariate", covariate);
  kv("regression", regression ? "true" : "false");
  if (covariate_value) num("covariate-value", *covariate_value);
  kv("check-invariants", check_invariants ? "true" : "false");
  return os.str();
}

// 64-bit FNV-1a of the canonical config text.
inline std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : to_ini()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "': " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  std::vector<std::string> failed_checks;
};

namespace detail {

// Tracks written files so that a failed run can remove its partial outputs.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / name;
    files_.push_back(path.string());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    fill(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
  }

  void remove_all() noexcept {
    for (const auto& f : files_) {
      std::error_code ec;
      std::filesystem::remove(f, ec);
    }
    files_.clear();
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const InvariantError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

using json = nlohmann::ordered_json;

inline json interval_json(const Interval& i) {
  return json{{"mean", i.mean}, {"sd", i.sd}, {"lo", i.lo}, {"hi", i.hi}, {"level", i.level}};
}

inline DependencePrior dependence_prior(const RunConfig& c) {
  return {c.nb_mean, c.nb_variance, c.p0_lo, c.p0_hi, c.p1_lo, c.p1_hi};
}

inline ChainConfig chain_config(const RunConfig& c) {
  ChainConfig cfg;
  cfg.iterations = c.iterations;
  cfg.burn_in = c.burn_in;
  cfg.seed = c.seed;
  cfg.prior = parse_marginal_prior(c.prior);
  cfg.regression = c.regression;
  cfg.adaptation.target_accept = c.pi_star;
  cfg.adaptation.tau0 = c.tau0;
  cfg.adaptation.gain = parse_adaptation_gain(c.gain);
  cfg.adaptation.gain_exponent = c.gain_exponent;
  cfg.dependence.prior = dependence_prior(c);
  cfg.dependence.paper_exact_c = c.paper_exact_c;
  return cfg;
}

inline CsvSchema schema(const RunConfig& c, bool bivariate) {
  CsvSchema s;
  s.y1 = c.y1;
  s.y2 = c.y2;
  s.covariate = c.covariate;
  s.bivariate = bivariate;
  return s;
}

inline Dataset load_data(const RunConfig& c, bool bivariate, RunResult& result) {
  auto d = load_csv(c.data, schema(c, bivariate));
  if (!d.dropped_rows.empty()) {
    std::ostringstream msg;
    msg << "dropped " << d.dropped_rows.size() << " row(s) with missing values:";
    for (auto r : d.dropped_rows) msg << ' ' << r;
    result.warnings.push_back(msg.str());
  }
  return d;
}

inline json margin_summary(std::span<const MarginalModel> draws, long burn_in, bool regression, double level) {
  std::vector<double> b0, b1, b2, s, g;
  for (std::size_t i = static_cast<std::size_t>(burn_in); i < draws.size(); ++i) {
    b0.push_back(draws[i].beta0);
    b1.push_back(draws[i].beta1);
    b2.push_back(draws[i].beta2);
    s.push_back(draws[i].sigma);
    g.push_back(draws[i].gamma);
  }
  json j;
  if (regression) {
    j["beta0"] = interval_json(summarize_values(b0, level));
    j["beta1"] = interval_json(summarize_values(b1, level));
    j["beta2"] = interval_json(summarize_values(b2, level));
  } else {
    j["mu"] = interval_json(summarize_values(b0, level));
  }
  j["sigma"] = interval_json(summarize_values(s, level));
  j["gamma"] = interval_json(summarize_values(g, level));
  return j;
}

inline json quantiles_json(const std::vector<QuantileSummary>& qs) {
  json arr = json::array();
  for (const auto& q : qs) {
    json j{{"p", q.p}, {"quantile", interval_json(q.value)}};
    if (!std::isnan(q.log_value.mean)) j["log_quantile"] = interval_json(q.log_value);
    j["interpolation"] = q.interpolation;
    arr.push_back(j);
  }
  return arr;
}

// Acceptance summary of one block: retained window and windows of 5000.
inline json acceptance_json(const std::vector<double>& accept_prob, const std::vector<double>& tau,
                            long burn_in, double pi_star) {
  const long m = static_cast<long>(accept_prob.size());
  json windows = json::array();
  for (long a = 0; a < m; a += 5000) windows.push_back(mean_of(accept_prob, a, a + 5000));
  std::vector<double> log_tau;
  for (double t : tau) log_tau.push_back(std::log(t));
  const double last = mean_of(log_tau, m - 10000, m);
  const double prev = mean_of(log_tau, m - 20000, m - 10000);
  return json{{"retained", mean_of(accept_prob, burn_in, m)},
              {"target", pi_star},
              {"windows_of_5000", windows},
              {"tau_final", tau.empty() ? kNaN : tau.back()},
              {"log_tau_mean_last_10000", last},
              {"log_tau_mean_previous_10000", prev}};
}

inline std::string file_stem_for(std::size_t index) { return "region_" + std::to_string(index + 1) + ".csv"; }

inline void write_manifest(OutputSet& out, const RunConfig& c) {
  out.write("manifest.ini", [&](std::ostream& os) {
    os << "# xqr " << kVersion << "\n";
    os << "# config-hash = " << std::hex << std::setw(16) << std::setfill('0') << c.hash() << std::dec
       << std::setfill(' ') << "\n";
    os << "# eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
       << "\n";
    os << "# boost = " << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.'
       << BOOST_VERSION % 100 << "\n";
    os << c.to_ini();
  });
}

inline void write_json(OutputSet& out, const std::string& name, const json& j) {
  out.write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline RegionSummaryConfig region_config(const RunConfig& c) {
  RegionSummaryConfig rc;
  rc.probabilities = c.probabilities;
  rc.level = c.credibility;
  rc.thin = c.thin;
  rc.w_grid = default_w_grid(c.grid_size);
  rc.convention = parse_nu_convention(c.nu_convention);
  rc.covariate = c.covariate_value;
  return rc;
}

// Band ordering and nesting of the mean curves in decreasing p.
inline void check_regions(const RegionSummary& s, std::vector<std::string>& failed) {
  auto ordered = [](const RegionCurve& c) {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (!(c.lo[i].x <= c.hi[i].x && c.lo[i].y <= c.hi[i].y)) return false;
    return true;
  };
  for (const auto& r : s.regions)
    if (!ordered(r)) failed.push_back("band ordering for p = " + format_double(r.p));
  std::vector<const RegionCurve*> by_p;
  for (const auto& r : s.regions) by_p.push_back(&r);
  std::sort(by_p.begin(), by_p.end(), [](auto a, auto b) { return a->p > b->p; });
  for (std::size_t j = 1; j < by_p.size(); ++j)
    for (std::size_t i = 0; i < by_p[j]->size(); ++i)
      if (by_p[j]->mean[i].x < by_p[j - 1]->mean[i].x || by_p[j]->mean[i].y < by_p[j - 1]->mean[i].y) {
        failed.push_back("region nesting between p = " + format_double(by_p[j - 1]->p) + " and p = " +
                         format_double(by_p[j]->p));
        break;
      }
}

inline void check_draws(const BivariateChain& chain, std::vector<std::string>& failed) {
  for (long i = 0; i < chain.size(); ++i) {
    const auto& e = chain.draws[i].eta;
    if (static_cast<int>(e.eta.size()) != e.kappa || !validate_eta(e, 1e-8)) {
      failed.push_back("invalid dependence coefficients at iteration " + std::to_string(i + 1));
      return;
    }
  }
}

inline json kappa_table(const BivariateChain& chain) {
  std::map<int, long> counts;
  for (long i = chain.burn_in; i < chain.size(); ++i) ++counts[chain.draws[i].eta.kappa];
  const double total = static_cast<double>(chain.size() - chain.burn_in);
  json t = json::array();
  for (auto [k, c] : counts) t.push_back(json{{"kappa", k}, {"count", c}, {"probability", c / total}});
  return t;
}

inline json regions_json(const RegionSummary& s, std::size_t first_file_index = 0) {
  json files = json::array();
  for (std::size_t j = 0; j < s.regions.size(); ++j)
    files.push_back(json{{"p", s.regions[j].p}, {"file", file_stem_for(first_file_index + j)}});
  return json{{"draws_used", s.draws_used},
              {"nu_S", interval_json(s.nu)},
              {"kappa", interval_json(s.kappa)},
              {"p0", interval_json(s.p0)},
              {"p1", interval_json(s.p1)},
              {"bands", "pointwise per coordinate"},
              {"region_files", files}};
}

inline void write_region_outputs(OutputSet& out, const RegionSummary& s, double level) {
  out.write("inverse_q_star.csv", [&](std::ostream& os) { write_band_csv(os, s.inverse_q_star, level); });
  out.write("basic_set.csv", [&](std::ostream& os) { write_region_csv(os, s.basic_set); });
  for (std::size_t j = 0; j < s.regions.size(); ++j)
    out.write(file_stem_for(j), [&](std::ostream& os) { write_region_csv(os, s.regions[j]); });
}

inline void run_simulate(const RunConfig& c, OutputSet& out, RunResult&) {
  const auto spec = stage("simulate", [&] { return TestbedSpec::of(parse_testbed(c.testbed)); });
  Rng rng(c.seed);
  Dataset d;
  stage("simulate", [&] {
    if (spec.bivariate()) {
      auto [a, b] = sample_bivariate(spec, c.n, rng);
      d.y1 = std::move(a);
      d.y2 = std::move(b);
    } else {
      d.y1 = sample_univariate(spec, c.n, rng);
    }
  });
  CsvSchema s;
  s.y1 = c.y1;
  s.y2 = c.y2;
  stage("write", [&] {
    out.write("data.csv", [&](std::ostream& os) { write_dataset_csv(os, d, s); });
    write_manifest(out, c);
  });
}

inline void run_fit_uni(const RunConfig& c, OutputSet& out, RunResult& result) {
  const auto d = stage("load", [&] { return load_data(c, false, result); });
  const auto sample = stage("threshold", [&] { return make_censored_sample(d.y1, c.level, d.covariate); });
  const auto cfg = chain_config(c);
  Rng rng(c.seed);
  const auto chain = stage("sample", [&] {
    auto ch = run_univariate_chain(sample, cfg, rng);
    ch.burn_in = c.burn_in;
    return ch;
  });
  const auto quantiles = stage("summarize", [&] {
    QuantileSummaryConfig qc;
    qc.level = c.quantile_credibility;
    qc.covariate = c.covariate_value;
    return summarize_posterior_quantiles(chain, c.probabilities, qc);
  });
  for (const auto& q : quantiles)
    if (q.interpolation)
      result.warnings.push_back("p = " + format_double(q.p) + " is not below k/n; the quantile is an interpolation");
  const double acc = chain.acceptance_rate(c.burn_in, c.iterations);
  if (std::abs(acc - c.pi_star) > 0.03)
    result.warnings.push_back("retained acceptance rate " + format_double(acc) + " is outside target +/- 0.03");

  json summary;
  summary["mode"] = c.mode;
  summary["n"] = sample.n();
  summary["k"] = sample.k;
  summary["threshold"] = sample.threshold;
  summary["margin"] = margin_summary(chain.draws, c.burn_in, c.regression, c.quantile_credibility);
  summary["quantiles"] = quantiles_json(quantiles);
  summary["acceptance"] = acceptance_json(chain.accept_prob, chain.tau, c.burn_in, c.pi_star);
  summary["warnings"] = result.warnings;

  stage("write", [&] {
    out.write("draws.csv", [&](std::ostream& os) { write_univariate_draws(os, chain); });
    out.write("quantile_histograms.csv", [&](std::ostream& os) { write_histograms_csv(os, quantiles, "1"); });
    write_json(out, "summary.json", summary);
    write_manifest(out, c);
  });
}

inline void run_fit_biv(const RunConfig& c, OutputSet& out, RunResult& result) {
  const auto d = stage("load", [&] { return load_data(c, true, result); });
  const auto sample = stage("threshold", [&] { return make_bivariate_sample(d.y1, d.y2, c.level, d.covariate); });
  const auto cfg = chain_config(c);
  Rng rng(c.seed);
  const auto chain = stage("sample", [&] { return run_bivariate_chain(sample, cfg, rng); });
  const auto regions = stage("regions", [&] { return summarize_posterior_regions(chain, region_config(c)); });

  std::vector<MarginalModel> m1, m2;
  for (const auto& dr : chain.draws) {
    m1.push_back(dr.theta1);
    m2.push_back(dr.theta2);
  }
  QuantileSummaryConfig qc;
  qc.level = c.quantile_credibility;
  qc.covariate = c.covariate_value;
  const auto q1 = stage("summarize", [&] {
    return summarize_posterior_quantiles(m1, c.burn_in, sample.k1, sample.n(), c.probabilities, qc);
  });
  const auto q2 = stage("summarize", [&] {
    return summarize_posterior_quantiles(m2, c.burn_in, sample.k2, sample.n(), c.probabilities, qc);
  });
  for (const auto& [name, ap] : {std::pair{"margin 1", &chain.accept_prob1}, std::pair{"margin 2", &chain.accept_prob2}}) {
    const double acc = mean_of(*ap, c.burn_in, c.iterations);
    if (std::abs(acc - c.pi_star) > 0.03)
      result.warnings.push_back(std::string(name) + " retained acceptance rate " + format_double(acc) +
                                " is outside target +/- 0.03");
  }
  if (c.check_invariants) {
    check_draws(chain, result.failed_checks);
    check_regions(regions, result.failed_checks);
  }
  long dep_acc = 0;
  for (long i = c.burn_in; i < chain.size(); ++i) dep_acc += chain.accepted_dep[i];

  json summary;
  summary["mode"] = c.mode;
  summary["n"] = sample.n();
  summary["k"] = {sample.k1, sample.k2};
  summary["threshold"] = {sample.t1, sample.t2};
  summary["margin1"] = margin_summary(m1, c.burn_in, c.regression, c.quantile_credibility);
  summary["margin2"] = margin_summary(m2, c.burn_in, c.regression, c.quantile_credibility);
  summary["quantiles1"] = quantiles_json(q1);
  summary["quantiles2"] = quantiles_json(q2);
  summary["acceptance1"] = acceptance_json(chain.accept_prob1, chain.tau1, c.burn_in, c.pi_star);
  summary["acceptance2"] = acceptance_json(chain.accept_prob2, chain.tau2, c.burn_in, c.pi_star);
  summary["dependence_move_acceptance"] =
      static_cast<double>(dep_acc) / static_cast<double>(chain.size() - c.burn_in);
  summary["kappa_posterior"] = kappa_table(chain);
  summary["regions"] = regions_json(regions);
  summary["nu_convention"] = c.nu_convention;
  summary["warnings"] = result.warnings;
  summary["failed_checks"] = result.failed_checks;

  stage("write", [&] {
    out.write("draws.csv", [&](std::ostream& os) { write_bivariate_draws(os, chain); });
    write_region_outputs(out, regions, c.credibility);
    out.write("quantile_histograms.csv", [&](std::ostream& os) {
      write_histograms_csv(os, q1, "1");
      std::ostringstream rest;
      write_histograms_csv(rest, q2, "2");
      const auto text = rest.str();
      os << text.substr(text.find('\n') + 1);
    });
    write_json(out, "summary.json", summary);
    write_manifest(out, c);
  });
}

inline void run_regions(const RunConfig& c, OutputSet& out, RunResult& result) {
  const auto d = stage("load", [&] { return load_data(c, true, result); });
  const auto sample = stage("threshold", [&] { return make_bivariate_sample(d.y1, d.y2, c.level, d.covariate); });
  auto chain = stage("load", [&] {
    std::ifstream in(c.draws);
    if (!in) throw std::runtime_error("cannot open '" + c.draws + "'");
    return read_bivariate_draws(in, c.draws);
  });
  chain.k1 = sample.k1;
  chain.k2 = sample.k2;
  chain.n = sample.n();
  chain.burn_in = c.burn_in;
  if (chain.burn_in >= chain.size())
    throw StageError("regions", "burn-in exceeds the number of draws");
  const auto regions = stage("regions", [&] { return summarize_posterior_regions(chain, region_config(c)); });
  if (c.check_invariants) {
    check_draws(chain, result.failed_checks);
    check_regions(regions, result.failed_checks);
  }
  json summary{{"mode", c.mode}, {"regions", regions_json(regions)}, {"warnings", result.warnings},
               {"failed_checks", result.failed_checks}};
  stage("write", [&] {
    write_region_outputs(out, regions, c.credibility);
    write_json(out, "summary.json", summary);
    write_manifest(out, c);
  });
}

// Batch-means Monte Carlo standard error of the mean (40 batches).
inline double batch_means_se(std::span<const double> x) {
  const std::size_t batches = 40;
  const std::size_t len = x.size() / batches;
  if (len < 2) return kNaN;
  double total = 0.0;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += x[b * len + i];
    means[b] = s / len;
    total += means[b];
  }
  const double grand = total / batches;
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / (batches - 1.0) / batches);
}

inline void run_diagnostics(const RunConfig& c, OutputSet& out, RunResult&) {
  std::ifstream in(c.draws);
  if (!in) throw StageError("load", "cannot open '" + c.draws + "'");
  std::string header;
  std::getline(in, header);
  in.seekg(0);
  json diag;
  diag["mode"] = c.mode;
  auto param_json = [&](const std::vector<double>& v) {
    std::span<const double> kept(v.data() + c.burn_in, v.size() - c.burn_in);
    double s = 0.0;
    for (double x : kept) s += x;
    return json{{"mean", s / kept.size()}, {"mcse", batch_means_se(kept)}};
  };
  auto margin_params = [&](const std::vector<MarginalModel>& m) {
    std::vector<double> b0, s, g;
    for (const auto& x : m) {
      b0.push_back(x.beta0);
      s.push_back(x.sigma);
      g.push_back(x.gamma);
    }
    return json{{"beta0", param_json(b0)}, {"sigma", param_json(s)}, {"gamma", param_json(g)}};
  };
  if (header.find("kappa") != std::string::npos) {
    auto chain = stage("load", [&] { return read_bivariate_draws(in, c.draws); });
    chain.burn_in = c.burn_in;
    if (c.burn_in >= chain.size()) throw StageError("diagnostics", "burn-in exceeds the number of draws");
    std::vector<MarginalModel> m1, m2;
    for (const auto& d : chain.draws) {
      m1.push_back(d.theta1);
      m2.push_back(d.theta2);
    }
    diag["iterations"] = chain.size();
    diag["acceptance1"] = acceptance_json(chain.accept_prob1, chain.tau1, c.burn_in, c.pi_star);
    diag["acceptance2"] = acceptance_json(chain.accept_prob2, chain.tau2, c.burn_in, c.pi_star);
    diag["margin1"] = margin_params(m1);
    diag["margin2"] = margin_params(m2);
    diag["kappa_posterior"] = kappa_table(chain);
  } else {
    auto chain = stage("load", [&] { return read_univariate_draws(in, c.draws); });
    if (c.burn_in >= chain.size()) throw StageError("diagnostics", "burn-in exceeds the number of draws");
    diag["iterations"] = chain.size();
    diag["acceptance"] = acceptance_json(chain.accept_prob, chain.tau, c.burn_in, c.pi_star);
    diag["margin"] = margin_params(chain.draws);
  }
  stage("write", [&] {
    write_json(out, "diagnostics.json", diag);
    write_manifest(out, c);
  });
}

}  // namespace detail

// Runs one mode. On a module error the partial outputs are removed and a
// StageError naming the failing stage is thrown. Failed invariant checks
// leave the outputs in place and are reported in the result.
inline RunResult run(const RunConfig& c) {
  detail::stage("config", [&] { c.validate(); });
  detail::OutputSet out(c.out_dir);
  RunResult result;
  try {
    if (c.mode == "simulate") detail::run_simulate(c, out, result);
    else if (c.mode == "fit-uni") detail::run_fit_uni(c, out, result);
    else if (c.mode == "fit-biv") detail::run_fit_biv(c, out, result);
    else if (c.mode == "regions") detail::run_regions(c, out, result);
    else detail::run_diagnostics(c, out, result);
  } catch (...) {
    out.remove_all();
    throw;
  }
  result.files = out.files();
  return result;
}

}  // namespace xqr
