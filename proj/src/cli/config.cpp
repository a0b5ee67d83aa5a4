#include "thermolab/cli/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "thermolab/errors.hpp"

namespace thermolab::cli {

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  template <class T>
  bool get(const YAML::Node& node, const char* key, T& out, const std::string& where) {
    const YAML::Node v = node[key];
    if (!v) return false;
    try {
      out = v.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      errors_.push_back(fmt::format("{}.{}: cannot read value", where, key));
      return false;
    }
  }

  void only_keys(const YAML::Node& node, const std::set<std::string>& keys, const std::string& where) {
    if (!node) return;
    if (!node.IsMap()) {
      errors_.push_back(fmt::format("{}: expected a mapping", where));
      return;
    }
    for (const auto& kv : node) {
      const auto k = kv.first.as<std::string>();
      if (!keys.count(k)) errors_.push_back(fmt::format("{}: unknown key '{}'", where, k));
    }
  }

  void fail(std::string msg) { errors_.push_back(std::move(msg)); }
  bool ok() const { return errors_.empty(); }

 private:
  std::vector<std::string>& errors_;
};

std::string canonical_scalar(const std::string& s) {
  if (!s.empty()) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size() && errno == 0 && std::isfinite(v)) return fmt::format("{:.17g}", v);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string canonical(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      std::vector<std::pair<std::string, std::string>> items;
      for (const auto& kv : n) items.emplace_back(kv.first.as<std::string>(), canonical(kv.second));
      std::sort(items.begin(), items.end());
      std::string out = "{";
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += canonical_scalar(items[i].first) + ":" + items[i].second;
      }
      return out + "}";
    }
    case YAML::NodeType::Sequence: {
      std::string out = "[";
      for (std::size_t i = 0; i < n.size(); ++i) {
        if (i) out += ",";
        out += canonical(n[i]);
      }
      return out + "]";
    }
    case YAML::NodeType::Scalar:
      return canonical_scalar(n.Scalar());
    default:
      return "null";
  }
}

void apply_override(YAML::Node& root, const std::string& path, const std::string& value) {
  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string k; std::getline(ss, k, '.');) {
    if (k.empty()) throw ConfigError(fmt::format("bad override key '{}'", path));
    keys.push_back(k);
  }
  if (keys.empty()) throw ConfigError("empty override key");
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!cur[keys[i]] || !cur[keys[i]].IsMap()) cur[keys[i]] = YAML::Node(YAML::NodeType::Map);
    cur.reset(cur[keys[i]]);
  }
  cur[keys.back()] = YAML::Load(value);
}

std::optional<SubshiftModel> read_model(Reader& r, const YAML::Node& node) {
  r.only_keys(node, {"alphabet", "matrix", "preset", "theta"}, "model");
  double theta = 0.5;
  r.get(node, "theta", theta, "model");
  bool ok = true;
  if (!(theta > 0.0 && theta < 1.0)) {
    r.fail("theta must lie in (0,1)");
    ok = false;
  }
  std::string preset;
  int alphabet = 2;
  std::vector<std::vector<int>> A;
  if (node && node["matrix"]) {
    if (!r.get(node, "matrix", A, "model")) return std::nullopt;
    for (const auto& row : A)
      if (row.size() != A.size()) {
        r.fail("matrix not square");
        return std::nullopt;
      }
    for (const auto& row : A)
      for (int v : row)
        if (v != 0 && v != 1) {
          r.fail("matrix entries must be 0 or 1");
          return std::nullopt;
        }
    alphabet = static_cast<int>(A.size());
  } else if (node && r.get(node, "preset", preset, "model")) {
    if (preset == "golden_mean") {
      A = {{1, 1}, {1, 0}};
      alphabet = 2;
    } else if (preset == "full_shift") {
      r.get(node, "alphabet", alphabet, "model");
      A.assign(static_cast<std::size_t>(std::max(alphabet, 0)), std::vector<int>(std::max(alphabet, 0), 1));
    } else {
      r.fail(fmt::format("model.preset: unknown preset '{}'", preset));
      return std::nullopt;
    }
  } else {
    if (node) r.get(node, "alphabet", alphabet, "model");
    A.assign(static_cast<std::size_t>(std::max(alphabet, 0)), std::vector<int>(std::max(alphabet, 0), 1));
  }
  if (!ok) return std::nullopt;
  try {
    return SubshiftModel(alphabet, A, theta);
  } catch (const std::exception& e) {
    r.fail(e.what());
    return std::nullopt;
  }
}

std::optional<PotentialSpec> read_potential(Reader& r, const YAML::Node& node, const SubshiftModel& model,
                                            const std::string& where, const PotentialSpec& fallback) {
  if (!node) return fallback;
  if (node.IsScalar()) {
    double c = 0.0;
    try {
      c = node.as<double>();
    } catch (const YAML::Exception&) {
      r.fail(fmt::format("{}: expected a number or a mapping", where));
      return std::nullopt;
    }
    return PotentialSpec::constant(model, c);
  }
  r.only_keys(node, {"kind", "value", "values", "depth", "c", "weights", "ratio"}, where);
  std::string kind = "constant";
  r.get(node, "kind", kind, where);
  try {
    if (kind == "constant") {
      double c = 0.0;
      r.get(node, "value", c, where);
      return PotentialSpec::constant(model, c);
    }
    if (kind == "per_symbol") {
      std::vector<double> v;
      if (!r.get(node, "values", v, where)) {
        r.fail(fmt::format("{}: per_symbol needs values", where));
        return std::nullopt;
      }
      if (static_cast<int>(v.size()) != model.alphabet_size()) {
        r.fail(fmt::format("{}: expected {} values, got {}", where, model.alphabet_size(), v.size()));
        return std::nullopt;
      }
      return PotentialSpec::per_symbol(model, std::move(v));
    }
    if (kind == "table") {
      int depth = 1;
      std::vector<double> v;
      r.get(node, "depth", depth, where);
      if (depth < 1) {
        r.fail(fmt::format("{}: depth must be at least 1", where));
        return std::nullopt;
      }
      if (!r.get(node, "values", v, where)) {
        r.fail(fmt::format("{}: table needs values", where));
        return std::nullopt;
      }
      auto space = WordSpace::make(model, depth);
      if (v.size() != space->size()) {
        r.fail(fmt::format("{}: expected {} values for depth {}, got {}", where, space->size(), depth, v.size()));
        return std::nullopt;
      }
      return PotentialSpec::table(RealFunction(space, std::move(v)));
    }
    if (kind == "series") {
      double c = 0.0;
      std::vector<double> w, rho;
      r.get(node, "c", c, where);
      if (!r.get(node, "weights", w, where)) {
        r.fail(fmt::format("{}: series needs weights", where));
        return std::nullopt;
      }
      if (static_cast<int>(w.size()) != model.alphabet_size()) {
        r.fail(fmt::format("{}: expected {} weights, got {}", where, model.alphabet_size(), w.size()));
        return std::nullopt;
      }
      const YAML::Node rn = node["ratio"];
      if (!rn) {
        r.fail(fmt::format("{}: series needs ratio", where));
        return std::nullopt;
      }
      if (rn.IsSequence())
        r.get(node, "ratio", rho, where);
      else
        rho = {rn.as<double>()};
      return PotentialSpec::series(c, std::move(w), std::move(rho));
    }
    r.fail(fmt::format("{}: unknown kind '{}'", where, kind));
  } catch (const YAML::Exception&) {
    r.fail(fmt::format("{}: malformed entry", where));
  } catch (const std::exception& e) {
    r.fail(fmt::format("{}: {}", where, e.what()));
  }
  return std::nullopt;
}

void read_observable(Reader& r, const YAML::Node& node, ObservableConfig& out, const std::string& where) {
  if (!node) return;
  r.only_keys(node, {"cylinder", "breaks", "coeffs", "profile"}, where);
  r.get(node, "cylinder", out.cylinder, where);
  if (node["profile"]) {
    std::vector<double> p;
    if (r.get(node, "profile", p, where)) {
      out.breaks = {0.0};
      out.coeffs = {p};
    }
  } else {
    r.get(node, "breaks", out.breaks, where);
    r.get(node, "coeffs", out.coeffs, where);
  }
  try {
    PiecewisePolynomial(out.breaks, out.coeffs);
  } catch (const std::exception& e) {
    r.fail(fmt::format("{}: {}", where, e.what()));
  }
}

}  // namespace

Observable ObservableConfig::build(const SubshiftModel& model) const {
  PiecewisePolynomial profile(breaks, coeffs);
  if (cylinder.empty()) return height_observable(model, profile);
  Observable obs = cylinder_indicator(model, Word(cylinder));
  obs.profile = profile;
  return obs;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

RunConfig parse_config_text(const std::string& text, const Overrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config is not valid structured text: {}", e.what()));
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config must be a mapping");
  for (const auto& [k, v] : overrides) {
    try {
      apply_override(root, k, v);
    } catch (const YAML::Exception& e) {
      throw ConfigError(fmt::format("override {}={}: {}", k, v, e.what()));
    }
  }

  std::vector<std::string> errors;
  Reader r(errors);
  RunConfig cfg;
  r.only_keys(root,
              {"model", "potential", "roof", "depth", "a", "a_max", "b", "dolgopyat", "normalize", "gibbs", "scan",
               "contraction", "iterate", "correlate", "decay", "orbits", "zeta", "poc", "output", "threads"},
              "config");

  const auto model = read_model(r, root["model"]);
  cfg.model = model ? *model : SubshiftModel::full_shift(2, 0.5);
  // without a valid model, checks that depend on it are run against a placeholder and their messages dropped
  std::vector<std::string> dropped;
  Reader placeholder(dropped);
  Reader& mr = model ? r : placeholder;
  const auto roof_node = root["roof"];
  const bool roof_constant = !roof_node || roof_node.IsScalar() ||
                             (roof_node.IsMap() && roof_node["kind"].as<std::string>("constant") == "constant");
  Reader& rr = model || roof_constant ? r : placeholder;

  const auto f = read_potential(mr, root["potential"], cfg.model, "potential", PotentialSpec::constant(cfg.model, 0.0));
  const auto tau = read_potential(rr, roof_node, cfg.model, "roof", PotentialSpec::constant(cfg.model, 1.0));
  if (f) cfg.f = *f;
  if (tau) cfg.tau = *tau;

  r.get(root, "depth", cfg.depth, "config");
  if (cfg.depth < 1 || cfg.depth > 24) r.fail("depth must lie in [1, 24]");
  r.get(root, "a", cfg.a, "config");
  r.get(root, "a_max", cfg.a_max, "config");
  if (!(cfg.a_max > 0.0)) r.fail("a_max must be positive");
  if (std::abs(cfg.a) > cfg.a_max) r.fail("|a| must not exceed a_max");
  r.get(root, "b", cfg.b, "config");

  if (tau && cfg.depth >= 1 && cfg.depth <= 24) {
    try {
      double lo = 0.0;
      if (cfg.tau.is_table()) {
        lo = min_value(cfg.tau.as_table());
      } else {
        const auto& s = cfg.tau.as_series();
        lo = s.c + series_tail_range(cfg.model, s, -1).first;
      }
      if (!(lo > 0.0)) rr.fail("roof must be >= tau0 > 0");
    } catch (const std::exception& e) {
      rr.fail(fmt::format("roof: {}", e.what()));
    }
  }

  if (const auto d = root["dolgopyat"]) {
    r.only_keys(d, {"N", "epsilon1", "mu0", "E", "l0", "a0", "b0", "q1", "samples", "epsilon3"}, "dolgopyat");
    auto& p = cfg.dolgopyat;
    r.get(d, "N", p.N, "dolgopyat");
    r.get(d, "epsilon1", p.epsilon1, "dolgopyat");
    r.get(d, "mu0", p.mu0, "dolgopyat");
    r.get(d, "E", p.E, "dolgopyat");
    r.get(d, "l0", p.l0, "dolgopyat");
    r.get(d, "a0", p.a0, "dolgopyat");
    r.get(d, "b0", p.b0, "dolgopyat");
    r.get(d, "q1", p.q1, "dolgopyat");
    r.get(d, "samples", p.samples, "dolgopyat");
    r.get(d, "epsilon3", p.epsilon3, "dolgopyat");
  }
  {
    const auto& p = cfg.dolgopyat;
    if (p.N < 1) r.fail("dolgopyat.N must be positive");
    if (!(p.epsilon1 > 0.0)) r.fail("dolgopyat.epsilon1 must be positive");
    if (!(p.mu0 > 0.0 && p.mu0 <= 0.5)) r.fail("dolgopyat.mu0 must lie in (0, 1/2]");
    if (!(p.E > 1.0)) r.fail("dolgopyat.E must exceed 1");
    if (p.l0 < 1) r.fail("dolgopyat.l0 must be positive");
    if (!(p.a0 > 0.0)) r.fail("dolgopyat.a0 must be positive");
    if (p.b0 < 0.0) r.fail("dolgopyat.b0 must be nonnegative");
    if (p.q1 < 1) r.fail("dolgopyat.q1 must be positive");
    if (p.samples < 2) r.fail("dolgopyat.samples must be at least 2");
  }

  if (const auto n = root["normalize"]) {
    r.only_keys(n, {"a"}, "normalize");
    r.get(n, "a", cfg.normalize_a, "normalize");
  }
  if (const auto g = root["gibbs"]) {
    r.only_keys(g, {"max_length"}, "gibbs");
    r.get(g, "max_length", cfg.gibbs_max_length, "gibbs");
  }
  if (cfg.gibbs_max_length < 1 || cfg.gibbs_max_length > 20) r.fail("gibbs.max_length must lie in [1, 20]");

  if (const auto s = root["scan"]) {
    r.only_keys(s, {"bmin", "bmax", "steps", "m"}, "scan");
    r.get(s, "bmin", cfg.scan_bmin, "scan");
    r.get(s, "bmax", cfg.scan_bmax, "scan");
    r.get(s, "steps", cfg.scan_steps, "scan");
    r.get(s, "m", cfg.scan_m, "scan");
  }
  if (cfg.scan_steps < 1) r.fail("scan.steps must be positive");
  if (cfg.scan_m < 1) r.fail("scan.m must be positive");
  if (cfg.scan_bmax < cfg.scan_bmin) r.fail("scan.bmax must not be below scan.bmin");

  if (const auto c = root["contraction"]) {
    r.only_keys(c, {"m"}, "contraction");
    r.get(c, "m", cfg.contraction_m, "contraction");
  }
  if (cfg.contraction_m < 1) r.fail("contraction.m must be positive");
  if (const auto it = root["iterate"]) {
    r.only_keys(it, {"steps"}, "iterate");
    r.get(it, "steps", cfg.iterate_steps, "iterate");
  }
  if (cfg.iterate_steps < 1) r.fail("iterate.steps must be positive");

  if (const auto c = root["correlate"]) {
    r.only_keys(c, {"tmin", "tmax", "dt", "samples", "seed", "max_depth", "max_words", "chunks", "monte_carlo", "A", "B"},
                "correlate");
    r.get(c, "tmin", cfg.corr_tmin, "correlate");
    r.get(c, "tmax", cfg.corr_tmax, "correlate");
    r.get(c, "dt", cfg.corr_dt, "correlate");
    r.get(c, "samples", cfg.corr.samples, "correlate");
    r.get(c, "seed", cfg.corr.seed, "correlate");
    r.get(c, "max_depth", cfg.corr.max_depth, "correlate");
    r.get(c, "max_words", cfg.corr.max_words, "correlate");
    r.get(c, "chunks", cfg.corr.chunks, "correlate");
    r.get(c, "monte_carlo", cfg.corr.force_monte_carlo, "correlate");
    read_observable(mr, c["A"], cfg.obs_a, "correlate.A");
    read_observable(mr, c["B"], cfg.obs_b, "correlate.B");
  }
  if (!(cfg.corr_dt > 0.0)) r.fail("correlate.dt must be positive");
  if (cfg.corr_tmin < 0.0 || cfg.corr_tmax < cfg.corr_tmin) r.fail("correlate needs 0 <= tmin <= tmax");
  if (cfg.corr.samples < 2) r.fail("correlate.samples must be at least 2");
  if (cfg.corr.chunks < 1) r.fail("correlate.chunks must be positive");
  for (const auto* o : {&cfg.obs_a, &cfg.obs_b})
    if (!o->cylinder.empty() && !is_admissible(cfg.model, Word(o->cylinder)))
      mr.fail("correlate observable cylinder is not admissible");

  if (const auto d = root["decay"]) {
    r.only_keys(d, {"floor", "noise_sigmas"}, "decay");
    r.get(d, "floor", cfg.decay_floor, "decay");
    r.get(d, "noise_sigmas", cfg.decay_noise_sigmas, "decay");
  }
  if (!(cfg.decay_floor > 0.0)) r.fail("decay.floor must be positive");
  if (cfg.decay_noise_sigmas < 0.0) r.fail("decay.noise_sigmas must be nonnegative");

  if (const auto o = root["orbits"]) {
    r.only_keys(o, {"n_max", "ceiling"}, "orbits");
    r.get(o, "n_max", cfg.orbits_n_max, "orbits");
    r.get(o, "ceiling", cfg.orbit_ceiling, "orbits");
  }
  if (cfg.orbits_n_max < 1) r.fail("orbits.n_max must be positive");

  if (const auto z = root["zeta"]) {
    r.only_keys(z, {"s", "n_max", "orbit_n_max", "modes"}, "zeta");
    if (const auto s = z["s"]) {
      cfg.zeta_s.clear();
      if (!s.IsSequence()) r.fail("zeta.s must be a list");
      else
        for (const auto& e : s) {
          try {
            if (e.IsSequence() && e.size() == 2)
              cfg.zeta_s.emplace_back(e[0].as<double>(), e[1].as<double>());
            else
              cfg.zeta_s.emplace_back(e.as<double>(), 0.0);
          } catch (const YAML::Exception&) {
            r.fail("zeta.s entries must be numbers or [re, im] pairs");
          }
        }
    }
    r.get(z, "n_max", cfg.zeta_n_max, "zeta");
    r.get(z, "orbit_n_max", cfg.zeta_orbit_n_max, "zeta");
    r.get(z, "modes", cfg.zeta_modes, "zeta");
  }
  if (cfg.zeta_n_max < 1) r.fail("zeta.n_max must be positive");
  if (cfg.zeta_orbit_n_max < 1) r.fail("zeta.orbit_n_max must be positive");
  for (const auto& m : cfg.zeta_modes) {
    try {
      parse_zeta_mode(m);
    } catch (const std::exception& e) {
      r.fail(fmt::format("zeta.modes: {}", e.what()));
    }
  }

  if (const auto p = root["poc"]) {
    r.only_keys(p, {"lambda_min", "lambda_max", "lambda_step", "n_max"}, "poc");
    r.get(p, "lambda_min", cfg.poc_lambda_min, "poc");
    r.get(p, "lambda_max", cfg.poc_lambda_max, "poc");
    r.get(p, "lambda_step", cfg.poc_lambda_step, "poc");
    r.get(p, "n_max", cfg.poc_n_max, "poc");
  }
  if (!(cfg.poc_lambda_step > 0.0)) r.fail("poc.lambda_step must be positive");
  if (!(cfg.poc_lambda_min > 0.0) || cfg.poc_lambda_max < cfg.poc_lambda_min)
    r.fail("poc needs 0 < lambda_min <= lambda_max");

  if (const auto o = root["output"]) {
    r.only_keys(o, {"dir"}, "output");
    r.get(o, "dir", cfg.out_dir, "output");
  }
  if (root["threads"]) {
    int th = 0;
    if (r.get(root, "threads", th, "config")) {
      if (th < 1) r.fail("threads must be positive");
      else cfg.threads = static_cast<unsigned>(th);
    }
  }

  if (!r.ok()) throw ConfigError(errors);
  cfg.canonical = canonical(root);
  cfg.hash = sha256_hex(cfg.canonical);
  return cfg;
}

RunConfig parse_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

}  // namespace thermolab::cli
