#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qpkdv/config.hpp"
#include "qpkdv/diophantine.hpp"
#include "qpkdv/restriction_norms.hpp"

#ifndef QPKDV_VERSION
#define QPKDV_VERSION "dev"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qpkdv;

namespace {

enum Exit { kOk = 0, kValidateFail = 1, kConfig = 2, kNumerical = 3, kDivergence = 4 };

class Run {
 public:
  Run(std::string command, const Config& cfg, fs::path out) : command_(std::move(command)), cfg_(cfg), out_(std::move(out)) {
    fs::create_directories(out_);
    start_ = std::chrono::steady_clock::now();
  }

  std::ostream& open(const std::string& name, bool with_header = true) {
    const fs::path p = out_ / name;
    files_.push_back(p);
    streams_.push_back(std::make_unique<std::ofstream>(p));
    if (!*streams_.back()) throw Error("cannot write '" + p.string() + "'");
    if (with_header) header(*streams_.back());
    return *streams_.back();
  }

  void header(std::ostream& os) const {
    os << "# qpkdv " << QPKDV_VERSION << ' ' << command_ << '\n';
    for (const auto& [k, v] : cfg_.echo()) os << "# " << k << " = " << v << '\n';
  }

  json& summary() { return summary_; }

  void commit(int code) {
    close();
    write_manifest(code == kOk ? "ok" : "completed with exit code " + std::to_string(code), code);
  }

  void abort(const std::string& why, int code) {
    close();
    for (const auto& p : files_) fs::remove(p);
    files_.clear();
    summary_["error"] = why;
    write_manifest("aborted", code);
  }

 private:
  void close() {
    for (auto& s : streams_) s->close();
    streams_.clear();
  }

  void write_manifest(const std::string& status, int code) {
    json m;
    m["command"] = command_;
    m["version"] = QPKDV_VERSION;
    m["status"] = status;
    m["exit_code"] = code;
    json c = json::object();
    for (const auto& [k, v] : cfg_.echo()) c[k] = v;
    m["config"] = c;
    json outs = json::array();
    for (const auto& p : files_) outs.push_back(p.filename().string());
    m["outputs"] = outs;
    m["summary"] = summary_;
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream(out_ / "manifest.json") << m.dump(2) << '\n';
  }

  std::string command_;
  const Config& cfg_;
  fs::path out_;
  std::vector<fs::path> files_;
  std::vector<std::unique_ptr<std::ofstream>> streams_;
  json summary_ = json::object();
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------

std::shared_ptr<const FrequencyVector> read_alpha(const Config& cfg) {
  return std::make_shared<const FrequencyVector>(cfg.strings("alpha", std::vector<std::string>{"1", "sqrt(2)"}));
}

std::vector<double> read_sigma(const Config& cfg, std::size_t n, double fallback) {
  auto s = cfg.reals("sigma", std::vector<double>(n, fallback));
  if (s.size() != n)
    throw ConfigError("key 'sigma': expected " + std::to_string(n) + " entries to match alpha, got " + std::to_string(s.size()));
  return s;
}

std::string index_text(const MultiIndex& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t j = 0; j < k.size(); ++j) os << (j ? "," : "") << k[j];
  os << ')';
  return os.str();
}

/// Initial datum from data.kind = random | zero | snapshot.
CoefficientField read_data(const Config& cfg, std::shared_ptr<const FrequencyVector>& alpha, int& box) {
  const std::string kind = cfg.string("data.kind", "random");
  if (kind == "zero") return CoefficientField(alpha);
  if (kind == "snapshot") {
    const std::string path = cfg.string("data.path");
    std::ifstream in(path);
    if (!in) throw ConfigError("key 'data.path': cannot open snapshot '" + path + "'");
    auto snap = read_snapshot(in);
    alpha = snap.field.alpha_ptr();
    if (!cfg.has("box")) box = snap.box_bound;
    return snap.field;
  }
  if (kind != "random") throw ConfigError("key 'data.kind': expected random, zero or snapshot, got '" + kind + "'");
  const double gamma = cfg.real("data.gamma", 3.0);
  const double target = cfg.real("data.gnorm", 0.1);
  const bool real = cfg.boolean("data.real", true);
  const std::uint64_t seed = cfg.u64("seed", 1);
  const TruncationBox tb(*alpha, box);
  auto f = random_field(alpha, tb, seed, bracket_decay(gamma), real);
  const double g = gnorm(f, WeightProfile(std::vector<double>(alpha->dimension(), 0.0), 0.0));
  if (target <= 0.0 || g == 0.0) return CoefficientField(alpha);
  return f.scaled(target / g);
}

// ---------------------------------------------------------------------------

int cmd_validate(const Config& cfg, Run& run) {
  const auto alpha = read_alpha(cfg);
  const std::size_t n = alpha->dimension();
  const auto sigma = read_sigma(cfg, n, 0.3);
  const int box = cfg.integer("box", 8);
  const int depth = cfg.integer("diophantine.depth", 40);
  cfg.check_consumed();

  bool ok = true;
  auto& os = run.open("validate.txt", false);
  auto say = [&](const std::string& line) {
    std::cout << line << '\n';
    os << line << '\n';
  };
  json& s = run.summary();

  const auto A = check_assumption_A(sigma);
  ok = ok && A.holds;
  say(std::string("assumption (A): ") + (A.holds ? "pass" : "FAIL: " + A.violated));
  s["assumption_A"] = A.holds;
  if (!A.holds) s["assumption_A_violated"] = A.violated;

  double total = 0.0;
  for (double x : sigma) total += x;
  if (n >= 2) {
    json verts = json::array();
    std::ostringstream line;
    line << "Lambda_s vertices (s = " << format_double(total) << "):";
    for (const auto& v : lambda_s_vertices(total, static_cast<int>(n))) {
      line << " (";
      for (std::size_t j = 0; j < v.size(); ++j) line << (j ? ", " : "") << format_double(v[j]);
      line << ')';
      verts.push_back(v);
    }
    say(line.str());
    s["lambda_s_vertices"] = verts;
  }

  try {
    const TruncationBox tb(*alpha, box);
    const auto gap = min_frequency_gap(*alpha, tb);
    say("min_frequency_gap (M = " + std::to_string(box) + "): " + to_decimal(gap.gap, 20) + " at k = " + index_text(gap.index));
    s["min_frequency_gap"] = to_decimal(gap.gap, 20);
    s["min_frequency_gap_index"] = index_text(gap.index);
  } catch (const RationalDependenceError& e) {
    ok = false;
    say(std::string("rational dependence: FAIL, witness k = ") + index_text(e.witness()));
    s["rational_dependence_witness"] = index_text(e.witness());
  }

  json pairs = json::array();
  const auto& dec = alpha->decimals();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const WideReal mu = parse_wide(dec[i]) / parse_wide(dec[j]);
      const auto cf = continued_fraction(mu, depth);
      std::string verdict;
      json p{{"i", i + 1}, {"j", j + 1}};
      if (cf.rational) {
        verdict = "rational";
        p["rational"] = true;
      } else {
        try {
          const auto est = rho_estimate(cf);
          verdict = "rho_hat = " + format_double(est.rho_hat) + " (estimate), K_hat = " + format_double(est.K_hat);
          p["rho_hat"] = est.rho_hat;
          p["K_hat"] = est.K_hat;
        } catch (const DomainError& e) {
          verdict = std::string("no estimate: ") + e.what();
        }
      }
      say("alpha_" + std::to_string(i + 1) + "/alpha_" + std::to_string(j + 1) + ": " + verdict);
      pairs.push_back(p);
    }
  s["pairs"] = pairs;
  s["pass"] = ok;
  say(ok ? "validate: pass" : "validate: FAIL");
  return ok ? kOk : kValidateFail;
}

int cmd_simulate(const Config& cfg, Run& run) {
  auto alpha = read_alpha(cfg);
  IntegratorConfig ic;
  ic.box = cfg.integer("box", 8);
  auto f = read_data(cfg, alpha, ic.box);
  ic.dt = cfg.real("dt", 1e-3);
  ic.T = cfg.real("T", 1.0);
  ic.scheme = parse_scheme(cfg.string("scheme", "exponential-RK4"));
  ic.record_every = cfg.integer("record_every", 10);
  ic.nonlinear = cfg.boolean("nonlinear", true);
  ic.backward = cfg.boolean("backward", false);
  cfg.check_consumed();
  if (!(ic.dt > 0.0 && ic.T > 0.0 && ic.dt <= ic.T)) throw ConfigError("need 0 < dt <= T");

  const auto traj = integrate(f, ic);
  write_trajectory_csv(run.open("trajectory.csv"), traj);
  write_diagnostics_csv(run.open("diagnostics.csv"), traj);
  write_snapshot(run.open("final.snap", false), traj.state(traj.size() - 1), ic.box);
  const auto c = conservation_report(traj);
  run.summary() = {{"g00_drift", c.g00_drift},        {"symmetry_drift", c.symmetry_drift},
                   {"leakage_total", c.leakage_total}, {"leakage_max", c.leakage_max},
                   {"zero_mode_mass", c.zero_mode_mass}, {"phase_step", traj.phase_step()}};
  std::cout << "simulate: " << traj.size() << " stored states, G^{0,0} drift " << format_double(c.g00_drift) << '\n';
  return kOk;
}

int cmd_picard(const Config& cfg, Run& run) {
  auto alpha = read_alpha(cfg);
  PicardConfig pc;
  pc.box = cfg.integer("box", 8);
  auto f = read_data(cfg, alpha, pc.box);
  const auto sigma = read_sigma(cfg, alpha->dimension(), 0.3);
  pc.profile = WeightProfile(sigma, -0.5);
  const double theta = cfg.real("picard.theta", 0.1);
  if (!(theta > 0.0 && theta < 0.125)) throw ConfigError("key 'picard.theta': need 0 < theta < 1/8");
  const double c = cfg.real("picard.c", 1.0);
  pc.dt = cfg.real("dt", 1e-3);
  pc.m_max = cfg.integer("picard.m_max", 20);
  pc.tol = cfg.real("picard.tol", 1e-12);
  const double r = gnorm(f, pc.profile);
  if (cfg.has("picard.T")) {
    pc.T = cfg.real("picard.T");
  } else {
    pc.T = r > 0.0 ? existence_time(r, theta, c) : c;
    cfg.real("picard.T", pc.T);
  }
  cfg.check_consumed();
  if (!(pc.T > 0.0 && pc.dt > 0.0 && pc.dt <= pc.T)) throw ConfigError("need 0 < dt <= picard.T");

  const auto res = picard_iterate(f, pc);
  auto& os = run.open("picard.csv");
  os << "iteration,norm,difference,ratio\n";
  const auto& rep = res.report;
  for (std::size_t m = 0; m < rep.norms.size(); ++m) {
    os << m << ',' << format_double(rep.norms[m]) << ',';
    if (m >= 1 && m - 1 < rep.differences.size()) os << format_double(rep.differences[m - 1]);
    os << ',';
    if (m >= 2 && m - 2 < rep.ratios.size()) os << format_double(rep.ratios[m - 2]);
    os << '\n';
  }
  write_snapshot(run.open("final.snap", false), res.trajectory.state(res.trajectory.size() - 1), pc.box);
  const double worst = rep.ratios.empty() ? 0.0 : *std::max_element(rep.ratios.begin(), rep.ratios.end());
  run.summary() = {{"r", r},          {"T", pc.T},
                   {"iterations", rep.iterations}, {"converged", rep.converged},
                   {"diverged", rep.diverged},     {"max_ratio", worst}};
  std::cout << "picard: r = " << format_double(r) << ", T = " << format_double(pc.T) << ", " << rep.iterations
            << " iterations, max ratio " << format_double(worst)
            << (rep.converged ? ", converged" : rep.diverged ? ", DIVERGED" : ", not converged") << '\n';
  return rep.diverged ? kDivergence : kOk;
}

Ensemble read_ensemble(const Config& cfg) {
  Ensemble e;
  e.seed = cfg.u64("seed", 1);
  e.box = cfg.integer("box", 8);
  e.size = cfg.integer("probe.size", 200);
  e.modes_per_field = cfg.integer("probe.modes_per_field", 3);
  e.gammas = cfg.reals("probe.gammas", std::vector<double>{1.0, 2.0});
  e.modulation_spread = cfg.real("probe.spread", 0.0);
  e.adversarial = cfg.boolean("probe.adversarial", true);
  if (e.size < 1) throw ConfigError("key 'probe.size': must be positive");
  return e;
}

int cmd_probe(const Config& cfg, Run& run) {
  const auto alpha = read_alpha(cfg);
  const auto sigma = read_sigma(cfg, alpha->dimension(), 0.3);
  const std::string kind = cfg.string("probe.kind", "bilinear");
  const auto Ts = cfg.reals("probe.T", std::vector<double>{0.5, 0.25, 0.125, 0.0625});
  const Ensemble ens = read_ensemble(cfg);
  ProbeOptions opt;
  opt.length = static_cast<std::size_t>(cfg.integer("probe.length", 128));
  opt.min_half_width = cfg.real("probe.min_half_width", opt.min_half_width);
  opt.threads = cfg.integer("threads", 1);
  ProbeResult res;
  if (kind == "bilinear") {
    const auto which = parse_inequality(cfg.string("probe.inequality", "E41"));
    const double b = cfg.real("probe.b", 0.4);
    cfg.check_consumed();
    res = bilinear_probe(alpha, sigma, b, Ts, ens, which, opt);
  } else if (kind == "localization") {
    const double a = cfg.real("a", -0.5);
    const double eps = cfg.real("probe.eps", 0.2);
    const double epsp = cfg.real("probe.epsp", 0.1);
    cfg.check_consumed();
    res = time_localization_probe(alpha, WeightProfile(sigma, a), eps, epsp, Ts, ens, opt);
  } else {
    throw ConfigError("key 'probe.kind': expected bilinear or localization, got '" + kind + "'");
  }
  write_probe_csv(run.open("probe.csv"), res);
  run.open("probe_summary.json", false) << probe_summary_json(res) << '\n';
  run.summary() = json::parse(probe_summary_json(res));
  std::cout << "probe: " << res.records.size() << " records, slope " << format_double(res.slope) << " +- "
            << format_double(res.slope_stderr) << '\n';
  return kOk;
}

int cmd_inflate(const Config& cfg, Run& run) {
  const int depth = cfg.integer("inflate.depth", 12);
  const double t = cfg.real("inflate.t", 0.5);
  const int n_first = cfg.integer("inflate.n_first", 0);
  const int n_last = cfg.integer("inflate.n_last", 5);
  const bool unit = cfg.boolean("inflate.unit_weight", false);
  const auto sigma = read_sigma(cfg, 2, 0.0);
  const double a = cfg.real("a", 0.0);
  InflationSetup setup;
  if (cfg.has("inflate.mu") || !cfg.has("alpha")) {
    setup = inflation_setup(parse_continued_fraction(cfg.string("inflate.mu", "liouville"), depth));
    if (cfg.has("alpha")) {
      const auto al = cfg.strings("alpha");
      if (al.size() != 2) throw ConfigError("key 'alpha': inflate needs N = 2");
      const WideReal mu = parse_wide(al[0]) / parse_wide(al[1]);
      if (mp::abs(mu - setup.cf.mu) > WideReal(1e-30))
        throw ConfigError("keys 'alpha' and 'inflate.mu' disagree beyond 1e-30");
      setup = inflation_setup(al[0], al[1], depth);
    }
  } else {
    const auto al = cfg.strings("alpha");
    if (al.size() != 2) throw ConfigError("key 'alpha': inflate needs N = 2");
    setup = inflation_setup(al[0], al[1], depth);
  }
  cfg.check_consumed();
  if (!(t != 0.0 && std::abs(t) <= 1.0)) throw ConfigError("key 'inflate.t': need 0 < |t| <= 1");

  const WeightProfile prof(sigma, a);
  const auto rep = inflation_report(setup, prof, t, n_first, n_last, unit);
  write_inflation_csv(run.open("inflation.csv"), rep);
  std::ostringstream thr;
  thr << std::setprecision(4) << rep.threshold;
  std::cout << "inflation threshold: a > " << thr.str() << " (rho_hat = " << format_double(rep.rho_hat) << ")\n";
  std::cout << "growth of R_n over n = " << n_first << ".." << n_last << ": " << format_double(rep.growth)
            << (rep.monotone_growth ? " (monotone)" : "") << '\n';
  if (!rep.lower_hypothesis) std::cout << "note: min sigma + a >= -2 does not hold\n";
  run.summary() = {{"threshold", rep.threshold},
                   {"rho_hat", rep.rho_hat},
                   {"growth", rep.growth},
                   {"monotone_growth", rep.monotone_growth},
                   {"lower_hypothesis", rep.lower_hypothesis}};
  return kOk;
}

int cmd_diophantine(const Config& cfg, Run& run) {
  const int depth = cfg.integer("diophantine.depth", 40);
  ContinuedFraction cf;
  if (cfg.has("diophantine.mu") || !cfg.has("alpha")) {
    cf = parse_continued_fraction(cfg.string("diophantine.mu", "golden"), depth);
  } else {
    const auto al = cfg.strings("alpha");
    if (al.size() < 2) throw ConfigError("key 'alpha': need at least two components");
    cf = continued_fraction(parse_wide(al[0]) / parse_wide(al[1]), depth);
  }
  cfg.check_consumed();
  const auto conv = convergents(cf);
  auto& os = run.open("convergents.csv");
  os << "n,a_n,p_n,q_n,gap\n";
  for (const auto& c : conv)
    os << c.n << ',' << cf.quotients[static_cast<std::size_t>(c.n)] << ',' << c.p << ',' << c.q << ','
       << to_decimal(approximation_gap(cf, c), 20) << '\n';
  json& s = run.summary();
  s["depth"] = cf.depth();
  s["rational"] = cf.rational;
  s["truncated"] = cf.truncated;
  std::cout << "continued fraction: " << cf.depth() << " quotients" << (cf.rational ? " (rational)" : "")
            << (cf.truncated ? " (stopped: precision exhausted)" : "") << '\n';
  if (distinct_convergents(cf).size() >= 4) {
    const auto est = rho_estimate(cf);
    auto& ts = run.open("type.csv");
    ts << "j,q_j,rho_j,K_j\n";
    const auto d = distinct_convergents(cf);
    for (std::size_t i = 0; i < est.rho.size(); ++i)
      ts << est.index[i] << ',' << d[static_cast<std::size_t>(est.index[i])].q << ',' << format_double(est.rho[i]) << ','
         << format_double(est.K[i]) << '\n';
    s["rho_hat"] = est.rho_hat;
    s["K_hat"] = est.K_hat;
    std::cout << "rho_hat = " << format_double(est.rho_hat) << " (estimate), K_hat = " << format_double(est.K_hat) << '\n';
  }
  return kOk;
}

int cmd_norms(const Config& cfg, Run& run) {
  const std::string path = cfg.string("norms.snapshot");
  std::ifstream in(path);
  if (!in) throw ConfigError("key 'norms.snapshot': cannot open '" + path + "'");
  const auto snap = read_snapshot(in);
  const auto& f = snap.field;
  const std::size_t n = f.dimension();
  const auto sigma = read_sigma(cfg, n, 0.3);
  const double a = cfg.real("a", -0.5);
  const auto bs = cfg.reals("norms.b", std::vector<double>{0.5});
  const double T = cfg.real("norms.T", 0.5);
  const auto length = static_cast<std::size_t>(cfg.integer("norms.length", 128));
  const double min_hw = cfg.real("norms.min_half_width", 6.283185307179586);
  cfg.check_consumed();
  if (!(T > 0.0)) throw ConfigError("key 'norms.T': must be positive");
  if (length < 4 || !std::has_single_bit(length)) throw ConfigError("key 'norms.length': need a power of two >= 4");

  const WeightProfile prof(sigma, a);
  auto& os = run.open("norms.csv");
  os << "quantity,b,value\n";
  const double g = gnorm(f, prof);
  const double g00 = gnorm(f, WeightProfile(std::vector<double>(n, 0.0), 0.0));
  os << "gnorm,," << format_double(g) << '\n';
  os << "gnorm00,," << format_double(g00) << '\n';
  if (snap.box_bound > 0) os << "leakage,," << format_double(leakage(f, TruncationBox(f.alpha(), snap.box_bound))) << '\n';
  json& s = run.summary();
  s["gnorm"] = g;
  s["gnorm00"] = g00;
  if (!f.empty()) {
    const double h = 4.0 * T / static_cast<double>(length);
    const double hw = std::max(2.0 * T, min_hw);
    const std::size_t L = std::bit_ceil(static_cast<std::size_t>(std::ceil(2.0 * hw / h)));
    const auto u = SpaceTimeField::windowed_free(f, TimeWindow(0.5 * T), 0.5 * h * static_cast<double>(L), L);
    const auto table = time_transform(u);
    for (double b : bs) {
      const double x = xnorm(table, prof, b), y = ynorm(table, prof, b);
      os << "X," << format_double(b) << ',' << format_double(x) << '\n';
      os << "Y," << format_double(b) << ',' << format_double(y) << '\n';
      s["X_b" + format_double(b)] = x;
      s["Y_b" + format_double(b)] = y;
    }
    const double z = znorm(table, prof);
    os << "Z,," << format_double(z) << '\n';
    s["Z"] = z;
  }
  std::cout << "norms: gnorm = " << format_double(g) << ", gnorm00 = " << format_double(g00) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpkdv: quasi-periodic KdV experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = ".";
  std::vector<std::string> defines;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "Config file (key = value)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Random seed (overrides config key 'seed')");
  app.add_option("--threads", threads, "Worker threads (overrides config key 'threads')");
  app.add_option("-D,--set", defines, "Override a config key: -D key=value");
  app.set_version_flag("--version", std::string(QPKDV_VERSION));

  const std::vector<std::pair<std::string, std::function<int(const Config&, Run&)>>> commands{
      {"validate", cmd_validate}, {"simulate", cmd_simulate},       {"picard", cmd_picard}, {"probe", cmd_probe},
      {"inflate", cmd_inflate},   {"diophantine", cmd_diophantine}, {"norms", cmd_norms}};
  const std::map<std::string, std::string> help{
      {"validate", "Check assumption (A), rational dependence and Diophantine type of alpha"},
      {"simulate", "Integrate the truncated system"},
      {"picard", "Picard iteration of the Duhamel map"},
      {"probe", "Bilinear or time-localization ratio probes"},
      {"inflate", "Second-iterate inflation along convergents"},
      {"diophantine", "Continued fraction, convergents and type estimate"},
      {"norms", "Norm table for a stored snapshot"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }

  std::string command;
  std::function<int(const Config&, Run&)> fn;
  for (const auto& [name, f] : commands)
    if (app.got_subcommand(name)) {
      command = name;
      fn = f;
    }

  Config cfg;
  try {
    if (!config_path.empty()) cfg = Config::from_file(config_path);
    for (const auto& d : defines) {
      const auto eq = d.find('=');
      if (eq == std::string::npos) throw ConfigError("-D expects key=value, got '" + d + "'");
      cfg.set(d.substr(0, eq), d.substr(eq + 1));
    }
    if (seed) cfg.set("seed", std::to_string(*seed));
    if (threads) cfg.set("threads", std::to_string(*threads));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  std::unique_ptr<Run> run;
  try {
    run = std::make_unique<Run>(command, cfg, out_dir);
    const int code = fn(cfg, *run);
    run->commit(code);
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    if (run) run->abort(e.what(), kConfig);
    return kConfig;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    if (run) run->abort(e.what(), kNumerical);
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    if (run) run->abort(e.what(), kConfig);
    return kConfig;
  } catch (const DimensionError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    if (run) run->abort(e.what(), kConfig);
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (run) run->abort(e.what(), 1);
    return 1;
  }
}
