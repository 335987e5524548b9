#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbcrb/asymptotics.hpp"
#include "sbcrb/design.hpp"
#include "sbcrb/errors.hpp"
#include "sbcrb/exact_crb.hpp"
#include "sbcrb/montecarlo.hpp"
#include "sbcrb/rng.hpp"

namespace sbcrb::cli {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "M",     "K",      "L",           "N",     "P",       "Ps",      "sigma_v2",       "snr_db",
      "c",     "alpha",  "beta",        "gamma", "regime",  "trials",  "seed",           "data",
      "bound", "em_iters", "nodes",     "large_scale", "r_inner", "r_outer", "inner_fraction", "h_r",
      "shadow_db"};
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError(key, "expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError(key, "expected an integer, got '" + s + "'");
  return v;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- config

void Config::assign(const std::string& key, const std::string& raw, const std::string& where) {
  if (key.empty()) throw ConfigError("<key>", "empty key in " + where);
  if (!known_keys().count(key)) throw ConfigError(key, "unknown parameter in " + where);
  std::vector<std::string> vals;
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') throw ConfigError(key, "unterminated grid in " + where);
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError(key, "empty grid entry in " + where);
      vals.push_back(item);
    }
    if (vals.empty()) throw ConfigError(key, "grid must not be empty");
  } else {
    if (raw.empty()) throw ConfigError(key, "missing value in " + where);
    vals.push_back(raw);
  }
  values_[key] = std::move(vals);
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError("<syntax>", "expected key = value at " + where);
    cfg.assign(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse(in, path);
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set", "expected key=value, got '" + assignment + "'");
  assign(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--set");
}

const std::vector<std::string>* Config::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::vector<double> Config::doubles(const std::string& key, std::vector<double> fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& s : *v) out.push_back(to_double(key, s));
  return out;
}

std::vector<long long> Config::ints(const std::string& key, std::vector<long long> fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<long long> out;
  for (const auto& s : *v) out.push_back(to_int(key, s));
  return out;
}

double Config::scalar(const std::string& key, double fallback) const {
  const auto v = doubles(key, {fallback});
  if (v.size() != 1) throw ConfigError(key, "expected a single value, not a grid");
  return v[0];
}

long long Config::integer(const std::string& key, long long fallback) const {
  const auto v = ints(key, {fallback});
  if (v.size() != 1) throw ConfigError(key, "expected a single value, not a grid");
  return v[0];
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (v->size() != 1) throw ConfigError(key, "expected a single value, not a grid");
  return v->front();
}

// ---------------------------------------------------------------- output

namespace {

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) return fmt_double(v);
        else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          return q + "\"";
        }
      },
      c);
}

}  // namespace

void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& t) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) obj[t.columns[i]] = nullptr;
            else obj[t.columns[i]] = v;
          },
          row[i]);
    }
    arr.push_back(std::move(obj));
  }
  out << arr.dump(2) << '\n';
}

// ---------------------------------------------------------------- commands

namespace {

struct Ctx {
  const Config& cfg;
  std::uint64_t seed;
  long long trials;
};

int as_dim(const std::string& key, long long v) {
  if (v <= 0 || v > 1'000'000) throw ConfigError(key, "must be a positive integer, got " + std::to_string(v));
  return static_cast<int>(v);
}

std::vector<double> noise_grid(const Config& cfg, double default_snr_db) {
  if (cfg.has("snr_db") && cfg.has("sigma_v2")) throw ConfigError("snr_db", "set either snr_db or sigma_v2, not both");
  std::vector<double> s2;
  if (cfg.has("sigma_v2")) {
    s2 = cfg.doubles("sigma_v2", {});
  } else {
    for (double db : cfg.doubles("snr_db", {default_snr_db})) {
      if (!std::isfinite(db)) throw ConfigError("snr_db", "must be finite");
      s2.push_back(snr_db_to_noise_variance(db));
    }
  }
  for (double v : s2)
    if (!(std::isfinite(v) && v > 0.0))
      throw ConfigError(cfg.has("sigma_v2") ? "sigma_v2" : "snr_db", "noise variance must be positive (infinite SNR is not allowed)");
  return s2;
}

std::vector<double> positive_grid(const Config& cfg, const std::string& key, std::vector<double> fallback) {
  auto v = cfg.doubles(key, std::move(fallback));
  for (double x : v)
    if (!(std::isfinite(x) && x > 0.0)) throw ConfigError(key, "must be positive and finite");
  return v;
}

void check_dims(const SystemDims& d) {
  try {
    validate_dims(d);
  } catch (const DimensionError& e) {
    std::string field = "M,K,L,N";
    switch (e.violation()) {
      case DimensionViolation::PilotsBelowUsers: field = "L"; break;
      case DimensionViolation::PilotsExceedBlock: field = "L"; break;
      case DimensionViolation::AntennasBelowUsers: field = "K"; break;
      case DimensionViolation::NonPositive: break;
    }
    throw ConfigError(field, e.what());
  }
}

std::string point_text(const std::vector<std::pair<std::string, double>>& kv) {
  std::string s = "(";
  for (std::size_t i = 0; i < kv.size(); ++i) s += (i ? ", " : "") + kv[i].first + "=" + fmt_double(kv[i].second);
  return s + ")";
}

template <class F>
auto at_point(const std::vector<std::pair<std::string, double>>& kv, F&& f) {
  try {
    return f();
  } catch (const sbcrb::Error& e) {
    throw GridPointError("numerical failure at grid point " + point_text(kv) + ": " + e.what());
  }
}

DataKind data_kind(const Config& cfg, const std::string& fallback) {
  const std::string s = cfg.text("data", fallback);
  if (s == "qpsk") return DataKind::Qpsk;
  if (s == "gaussian") return DataKind::Gaussian;
  throw ConfigError("data", "expected qpsk or gaussian, got '" + s + "'");
}

struct DimsPowers {
  SystemDims d;
  PowerConfig p;
};

std::vector<DimsPowers> dims_power_grid(const Config& cfg) {
  std::vector<DimsPowers> out;
  const auto Ms = cfg.ints("M", {512}), Ks = cfg.ints("K", {32}), Ls = cfg.ints("L", {64}), Ns = cfg.ints("N", {1024});
  const auto Ps = positive_grid(cfg, "P", {1.0}), Pss = positive_grid(cfg, "Ps", {1.0});
  const auto s2s = noise_grid(cfg, 10.0);
  for (auto M : Ms)
    for (auto K : Ks)
      for (auto L : Ls)
        for (auto N : Ns) {
          const SystemDims d{as_dim("M", M), as_dim("K", K), as_dim("L", L), as_dim("N", N)};
          check_dims(d);
          for (double P : Ps)
            for (double Psv : Pss)
              for (double s2 : s2s) out.push_back({d, {P, Psv, s2}});
        }
  return out;
}

Table cmd_crb_exact(const Ctx& ctx, bool stochastic) {
  Table t;
  t.columns = {"method", "M", "K", "L", "N", "P", "Ps", "sigma_v2", "trials", "value", "std_error"};
  const auto grid = dims_power_grid(ctx.cfg);
  const DataKind kind = data_kind(ctx.cfg, "qpsk");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& [d, p] = grid[g];
    const std::uint64_t seed = derive_seed(ctx.seed, g, Stream::Geometry);
    const auto kv = std::vector<std::pair<std::string, double>>{
        {"M", d.M}, {"K", d.K}, {"L", d.L}, {"N", d.N}, {"P", p.P}, {"Ps", p.Ps}, {"sigma_v2", p.sigma_v2}};
    const auto samples = at_point(kv, [&] {
      return stochastic ? sample_stoch_crb(d, p, static_cast<std::size_t>(ctx.trials), seed)
                        : sample_det_crb(d, p, kind, static_cast<std::size_t>(ctx.trials), seed);
    });
    const SampleStats st = sample_stats(samples);
    t.rows.push_back({std::string(stochastic ? "stoch_closed" : "det_exact"), (long long)d.M, (long long)d.K,
                      (long long)d.L, (long long)d.N, p.P, p.Ps, p.sigma_v2, ctx.trials, st.mean,
                      ctx.trials > 1 ? Cell(st.std_error) : Cell()});
  }
  return t;
}

enum class Regime { Proportional, FixedL, ScaledL };

Regime regime_of(const Config& cfg) {
  const std::string r = cfg.text("regime", "proportional");
  if (r == "proportional") return Regime::Proportional;
  if (r == "fixed_L") return Regime::FixedL;
  if (r == "scaled_L") return Regime::ScaledL;
  throw ConfigError("regime", "expected proportional, fixed_L or scaled_L, got '" + r + "'");
}

RVector profile(const Ctx& ctx, int K, std::size_t g) {
  const std::string kind = ctx.cfg.text("large_scale", "unit");
  if (kind == "unit") return RVector::Ones(K);
  if (kind == "threeslope") {
    GeometryConfig geo;
    geo.r_inner = ctx.cfg.scalar("r_inner", geo.r_inner);
    geo.r_outer = ctx.cfg.scalar("r_outer", geo.r_outer);
    geo.inner_fraction = ctx.cfg.scalar("inner_fraction", geo.inner_fraction);
    geo.h_r = ctx.cfg.scalar("h_r", geo.h_r);
    geo.shadow_db = ctx.cfg.scalar("shadow_db", geo.shadow_db);
    try {
      validate_geometry(geo);
    } catch (const sbcrb::Error& e) {
      throw ConfigError("r_inner,r_outer", e.what());
    }
    return gen_large_scale_threeslope(K, geo, derive_seed(ctx.seed, g, Stream::LargeScale));
  }
  throw ConfigError("large_scale", "expected unit or threeslope, got '" + kind + "'");
}

Table cmd_crb_asym(const Ctx& ctx, bool stochastic) {
  Table t;
  t.columns = {"method", "regime", "c", "alpha", "beta", "K", "L", "P", "Ps", "sigma_v2", "value"};
  const Regime regime = regime_of(ctx.cfg);
  const auto cs = ctx.cfg.doubles("c", {0.5}), as = positive_grid(ctx.cfg, "alpha", {0.5}),
             bs = ctx.cfg.doubles("beta", {0.5});
  const auto Ks = ctx.cfg.ints("K", {8}), Ls = ctx.cfg.ints("L", {12});
  const auto Ps = positive_grid(ctx.cfg, "P", {1.0}), Pss = positive_grid(ctx.cfg, "Ps", {1.0});
  const auto s2s = noise_grid(ctx.cfg, 0.0);
  const int nodes = static_cast<int>(ctx.cfg.integer("nodes", kMpDefaultNodes));
  if (nodes < 2) throw ConfigError("nodes", "quadrature needs at least 2 nodes");
  const std::string method = stochastic ? "stoch_asym" : "det_asym";
  const char* rname = regime == Regime::Proportional ? "proportional" : regime == Regime::FixedL ? "fixed_L" : "scaled_L";

  // validate everything before evaluating anything
  for (double c : cs)
    if (regime == Regime::Proportional && !(c > 0.0 && c < 1.0)) throw ConfigError("c", "must lie in (0, 1)");
  for (double b : bs)
    if (regime != Regime::FixedL && !(b > 0.0 && b <= 1.0)) throw ConfigError("beta", "must lie in (0, 1]");
  if (regime == Regime::FixedL)
    for (auto K : Ks)
      for (auto L : Ls) {
        as_dim("K", K);
        as_dim("L", L);
        if (L < K)
          throw ConfigError("L", "pilot count L below user count K: the Fisher matrix is singular, need L >= K");
      }
  if (regime == Regime::ScaledL)
    for (auto K : Ks) as_dim("K", K);

  std::size_t g = 0;
  for (double P : Ps)
    for (double Psv : Pss)
      for (double s2 : s2s) {
        const PowerConfig p{P, Psv, s2};
        if (regime == Regime::Proportional) {
          for (double c : cs)
            for (double a : as)
              for (double b : bs) {
                const auto kv = std::vector<std::pair<std::string, double>>{
                    {"c", c}, {"alpha", a}, {"beta", b}, {"P", P}, {"Ps", Psv}, {"sigma_v2", s2}};
                const double v = at_point(kv, [&] {
                  return stochastic ? stoch_crb_asymptotic_mp({c, a, b}, p, nodes).value
                                    : det_crb_asymptotic({c, a, b}, p).value;
                });
                t.rows.push_back({method, std::string(rname), c, a, b, Cell(), Cell(), P, Psv, s2, v});
              }
        } else if (regime == Regime::FixedL) {
          for (double a : as)
            for (auto K : Ks)
              for (auto L : Ls) {
                Regime2Params q{Regime2Case::FixedPilots, a, 0.0, static_cast<int>(K), static_cast<int>(L)};
                const auto kv = std::vector<std::pair<std::string, double>>{
                    {"alpha", a}, {"K", double(K)}, {"L", double(L)}, {"P", P}, {"Ps", Psv}, {"sigma_v2", s2}};
                const double v = at_point(kv, [&] {
                  return stochastic ? stoch_crb_regime2(profile(ctx, static_cast<int>(K), g++), q, p).value
                                    : det_crb_regime2(q, p).value;
                });
                t.rows.push_back({method, std::string(rname), Cell(), a, Cell(), K, L, P, Psv, s2, v});
              }
        } else {
          for (double a : as)
            for (double b : bs)
              for (auto K : Ks) {
                Regime2Params q{Regime2Case::ScaledPilots, a, b, static_cast<int>(K), 0};
                const auto kv = std::vector<std::pair<std::string, double>>{
                    {"alpha", a}, {"beta", b}, {"K", double(K)}, {"P", P}, {"Ps", Psv}, {"sigma_v2", s2}};
                const double v = at_point(kv, [&] {
                  return stochastic ? stoch_crb_regime2(profile(ctx, static_cast<int>(K), g++), q, p).value
                                    : det_crb_regime2(q, p).value;
                });
                t.rows.push_back({method, std::string(rname), Cell(), a, b,
                                  stochastic ? Cell(K) : Cell(), Cell(), P, Psv, s2, v});
              }
        }
      }
  return t;
}

Table cmd_ncae(const Ctx& ctx) {
  Table t;
  t.columns = {"bound", "N", "M", "K", "L", "c", "alpha", "beta", "P", "Ps", "sigma_v2", "trials",
               "crb_asym", "crb_mean", "ncae"};
  const auto Ns = ctx.cfg.ints("N", {128, 512, 1024});
  const auto cs = ctx.cfg.doubles("c", {0.5}), as = positive_grid(ctx.cfg, "alpha", {0.5}),
             bs = ctx.cfg.doubles("beta", {0.25});
  const auto Ps = positive_grid(ctx.cfg, "P", {1.0}), Pss = positive_grid(ctx.cfg, "Ps", {1.0});
  const auto s2s = noise_grid(ctx.cfg, 10.0);
  const std::string bound = ctx.cfg.text("bound", "both");
  if (bound != "det" && bound != "stoch" && bound != "both") throw ConfigError("bound", "expected det, stoch or both");
  const DataKind kind = data_kind(ctx.cfg, "qpsk");
  if (ctx.trials < 30) std::cerr << "warning: fewer than 30 trials, NCAE estimates will be noisy\n";

  struct Point {
    SystemDims d;
    AsymptoticRatios r;
    PowerConfig p;
  };
  std::vector<Point> pts;
  for (double c : cs)
    for (double a : as)
      for (double b : bs)
        for (double P : Ps)
          for (double Psv : Pss)
            for (double s2 : s2s)
              for (auto N : Ns) {
                const int n = as_dim("N", N);
                if (!(c > 0.0 && c < 1.0)) throw ConfigError("c", "must lie in (0, 1)");
                if (!(b > 0.0 && b <= 1.0)) throw ConfigError("beta", "must lie in (0, 1]");
                const long long M = std::llround(a * n);
                const long long K = std::llround(c * static_cast<double>(M));
                const long long L = std::llround(b * n);
                if (M <= 0 || K <= 0 || L <= 0)
                  throw ConfigError("N", "block length " + std::to_string(n) + " too small for the given ratios");
                const SystemDims d{static_cast<int>(M), static_cast<int>(K), static_cast<int>(L), n};
                check_dims(d);
                pts.push_back({d, {c, a, b}, {P, Psv, s2}});
              }

  for (std::size_t g = 0; g < pts.size(); ++g) {
    const auto& [d, r, p] = pts[g];
    const auto kv = std::vector<std::pair<std::string, double>>{
        {"N", d.N}, {"c", r.c}, {"alpha", r.alpha}, {"beta", r.beta}, {"sigma_v2", p.sigma_v2}};
    // the ratios actually realized by the integer dimensions
    const AsymptoticRatios rr = derive_ratios(d);
    auto emit = [&](const std::string& name, const std::vector<double>& s, double asym) {
      t.rows.push_back({name, (long long)d.N, (long long)d.M, (long long)d.K, (long long)d.L, rr.c, rr.alpha, rr.beta,
                        p.P, p.Ps, p.sigma_v2, ctx.trials, asym, sample_stats(s).mean, ncae(s, asym)});
    };
    if (bound != "stoch") {
      const std::uint64_t seed = derive_seed(ctx.seed, 2 * g, Stream::Data);
      at_point(kv, [&] {
        const auto s = sample_det_crb(d, p, kind, static_cast<std::size_t>(ctx.trials), seed);
        emit("det", s, det_crb_asymptotic(rr, p).value);
        return 0;
      });
    }
    if (bound != "det") {
      const std::uint64_t seed = derive_seed(ctx.seed, 2 * g + 1, Stream::Channel);
      at_point(kv, [&] {
        const auto s = sample_stoch_crb(d, p, static_cast<std::size_t>(ctx.trials), seed);
        emit("stoch", s, stoch_crb_asymptotic_mp(rr, p).value);
        return 0;
      });
    }
  }
  return t;
}

Table cmd_mse_sweep(const Ctx& ctx) {
  Table t;
  t.columns = {"snr_db", "sigma_v2", "M", "K", "L", "N", "P", "Ps", "trials", "training_mse", "training_se",
               "em_mse", "em_se", "det_crb", "stoch_crb"};
  const DataKind kind = data_kind(ctx.cfg, "gaussian");
  const int em_iters = static_cast<int>(ctx.cfg.integer("em_iters", 20));
  if (em_iters < 0) throw ConfigError("em_iters", "must be nonnegative");
  if (ctx.cfg.has("sigma_v2")) throw ConfigError("sigma_v2", "mse-sweep is driven by snr_db");
  const auto snrs = ctx.cfg.doubles("snr_db", {0, 5, 10, 15, 20});
  noise_grid(ctx.cfg, 10.0);  // validation only
  Config base = ctx.cfg;
  base.set("snr_db=0");
  const auto grid = dims_power_grid(base);

  std::size_t g = 0;
  for (const auto& dp : grid)
    for (double snr : snrs) {
      const SystemDims d = dp.d;
      const PowerConfig p{dp.p.P, dp.p.Ps, snr_db_to_noise_variance(snr)};
      const auto kv = std::vector<std::pair<std::string, double>>{
          {"snr_db", snr}, {"M", d.M}, {"K", d.K}, {"L", d.L}, {"N", d.N}};
      const std::uint64_t master = derive_seed(ctx.seed, g++, Stream::Geometry);
      std::vector<MseTrial> res(static_cast<std::size_t>(ctx.trials));
      at_point(kv, [&] {
        parallel_for(res.size(), [&](std::size_t i) { res[i] = run_mse_trial(d, p, kind, em_iters, master, i); });
        return 0;
      });
      std::vector<double> tr, em, dc, sc;
      for (const auto& r : res) {
        tr.push_back(r.training_mse);
        em.push_back(r.em_mse);
        dc.push_back(r.det_crb);
        sc.push_back(r.stoch_crb);
      }
      const auto ts = sample_stats(tr), es = sample_stats(em);
      t.rows.push_back({snr, p.sigma_v2, (long long)d.M, (long long)d.K, (long long)d.L, (long long)d.N, p.P, p.Ps,
                        ctx.trials, ts.mean, ts.std_error, em_iters > 0 ? Cell(es.mean) : Cell(),
                        em_iters > 0 ? Cell(es.std_error) : Cell(), sample_stats(dc).mean, sample_stats(sc).mean});
    }
  return t;
}

Table cmd_pilot_budget(const Ctx& ctx) {
  Table t;
  t.columns = {"snr_db", "sigma_v2", "gamma", "M", "K", "N", "P", "Ps",
               "L_training", "L_semiblind_det", "L_semiblind_stoch", "status"};
  const int M = as_dim("M", ctx.cfg.integer("M", 512));
  const int K = as_dim("K", ctx.cfg.integer("K", 256));
  const int N = as_dim("N", ctx.cfg.integer("N", 1024));
  check_dims({M, K, K, N});
  const double P = ctx.cfg.scalar("P", 1.0), Ps = ctx.cfg.scalar("Ps", 1.0);
  if (!(P > 0.0 && std::isfinite(P))) throw ConfigError("P", "must be positive and finite");
  if (!(Ps > 0.0 && std::isfinite(Ps))) throw ConfigError("Ps", "must be positive and finite");
  if (ctx.cfg.has("sigma_v2")) throw ConfigError("sigma_v2", "pilot-budget is driven by snr_db");
  const auto snrs = ctx.cfg.doubles("snr_db", {5, 10});
  noise_grid(ctx.cfg, 10.0);
  const auto gammas = positive_grid(ctx.cfg, "gamma", {0.02, 0.05, 0.1, 0.2, 0.5});

  const ChannelRealization ch = gen_channel_iid(M, K, derive_seed(ctx.seed, 0, Stream::Channel));
  for (double snr : snrs)
    for (double gam : gammas) {
      const PowerConfig p{P, Ps, snr_db_to_noise_variance(snr)};
      std::vector<Cell> Ls;
      std::string missing;
      const std::pair<PilotScheme, const char*> schemes[] = {{PilotScheme::Training, "training"},
                                                             {PilotScheme::SemiblindDet, "semiblind_det"},
                                                             {PilotScheme::SemiblindStoch, "semiblind_stoch"}};
      for (auto [s, name] : schemes) {
        try {
          const auto sol = required_pilots(gam, M, K, N, p, s, ch.spectrum());
          Ls.emplace_back(static_cast<long long>(sol.value));
        } catch (const Infeasible&) {
          Ls.emplace_back();
          missing += (missing.empty() ? "" : ";") + std::string(name);
        } catch (const sbcrb::Error& e) {
          throw GridPointError("numerical failure at grid point " +
                               point_text({{"snr_db", snr}, {"gamma", gam}}) + ": " + e.what());
        }
      }
      t.rows.push_back({snr, p.sigma_v2, gam, (long long)M, (long long)K, (long long)N, P, Ps, Ls[0], Ls[1], Ls[2],
                        missing.empty() ? std::string("ok") : "infeasible:" + missing});
    }
  return t;
}

}  // namespace

Table run(const RunRequest& req) {
  long long trials = req.trials ? *req.trials : req.config.integer("trials", -1);
  const bool needs_many = req.command == "ncae" || req.command == "mse-sweep";
  if (trials == -1) trials = needs_many ? 100 : 1;
  if (trials < 1) throw ConfigError("trials", "must be at least 1");
  std::uint64_t seed = 1;
  if (req.seed) seed = *req.seed;
  else if (req.config.has("seed")) {
    const long long s = req.config.integer("seed", 1);
    if (s < 0) throw ConfigError("seed", "must be nonnegative");
    seed = static_cast<std::uint64_t>(s);
  }
  const Ctx ctx{req.config, seed, trials};
  if (req.command == "crb") {
    if (req.subcommand == "det-exact") return cmd_crb_exact(ctx, false);
    if (req.subcommand == "stoch-exact") return cmd_crb_exact(ctx, true);
    if (req.subcommand == "det-asym") return cmd_crb_asym(ctx, false);
    if (req.subcommand == "stoch-asym") return cmd_crb_asym(ctx, true);
    throw ConfigError("command", "unknown crb subcommand '" + req.subcommand + "'");
  }
  if (req.command == "ncae") return cmd_ncae(ctx);
  if (req.command == "mse-sweep") return cmd_mse_sweep(ctx);
  if (req.command == "pilot-budget") return cmd_pilot_budget(ctx);
  throw ConfigError("command", "unknown command '" + req.command + "'");
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Cramer-Rao bounds for semi-blind massive MIMO channel estimation"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<long long> trials;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--seed", seed, "master seed for every random draw");
    sub->add_option("--trials", trials, "Monte-Carlo trials per grid point");
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", overrides, "override a parameter, e.g. --set 'N=[128,1024]'");
  };

  auto* crb = app.add_subcommand("crb", "evaluate a bound on a parameter grid");
  crb->require_subcommand(1);
  for (const char* k : {"det-exact", "det-asym", "stoch-exact", "stoch-asym"})
    add_common(crb->add_subcommand(k, std::string("bound: ") + k));
  auto* ncae_cmd = app.add_subcommand("ncae", "normalized approximation error of the asymptotic bounds");
  add_common(ncae_cmd);
  auto* mse_cmd = app.add_subcommand("mse-sweep", "estimator MSE against both bounds over SNR");
  add_common(mse_cmd);
  auto* pb_cmd = app.add_subcommand("pilot-budget", "pilots needed to reach a target bound");
  add_common(pb_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunRequest req;
  if (crb->parsed()) {
    req.command = "crb";
    req.subcommand = crb->get_subcommands().front()->get_name();
  } else if (ncae_cmd->parsed()) {
    req.command = "ncae";
  } else if (mse_cmd->parsed()) {
    req.command = "mse-sweep";
  } else {
    req.command = "pilot-budget";
  }
  req.seed = seed;
  req.trials = trials;

  Table table;
  try {
    if (!config_path.empty()) req.config = Config::load(config_path);
    for (const auto& o : overrides) req.config.set(o);
    table = run(req);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const GridPointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const sbcrb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "config error: out: cannot write '" << out_path << "'\n";
      return 2;
    }
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  if (format == "json") write_json(os, table);
  else write_csv(os, table);
  std::cerr << table.rows.size() << " rows\n";
  return 0;
}

}  // namespace sbcrb::cli
