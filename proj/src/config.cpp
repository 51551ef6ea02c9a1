#include "bifurcate/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <set>

namespace bifurcate {

namespace {

std::string located(const std::string& source, int line, int column, const std::string& message) {
  std::string s = source.empty() ? "config" : source;
  if (line > 0) s += ":" + std::to_string(line) + ":" + std::to_string(column);
  return s + ": " + message;
}

const std::set<std::string> kCommands = {"check-hypotheses", "continue", "fold-curve", "dsigma-curve",
                                         "czero-branch",     "diagram",  "verify",     "count"};

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
    const YAML::Mark m = at.Mark();
    if (m.is_null()) throw ConfigError(message, 0, 0, source_);
    throw ConfigError(message, m.line + 1, m.column + 1, source_);
  }

  void expect_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) fail(n, what + " must be a mapping");
  }

  void only_keys(const YAML::Node& n, const std::string& block, const std::set<std::string>& allowed) const {
    for (auto it = n.begin(); it != n.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!allowed.contains(key)) fail(it->first, "unknown key '" + key + "' in " + block);
    }
  }

  std::string text(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, key + " must be a scalar");
    return n.Scalar();
  }

  Real real(const YAML::Node& n, const std::string& key) const {
    const std::string s = text(n, key);
    errno = 0;
    char* end = nullptr;
    const Real v = std::strtold(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
      fail(n, key + " must be a finite number, got '" + s + "'");
    }
    return v;
  }

  long long integer(const YAML::Node& n, const std::string& key) const {
    const std::string s = text(n, key);
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) fail(n, key + " must be an integer, got '" + s + "'");
    return v;
  }

  bool boolean(const YAML::Node& n, const std::string& key) const {
    const std::string s = text(n, key);
    if (s == "true") return true;
    if (s == "false") return false;
    fail(n, key + " must be true or false, got '" + s + "'");
  }

  Real positive(const YAML::Node& n, const std::string& key) const {
    const Real v = real(n, key);
    if (!(v > 0)) fail(n, key + " must be positive");
    return v;
  }

  AExpr a_expr(const YAML::Node& n, const std::string& key) const {
    try {
      return parse_a_expression(text(n, key));
    } catch (const DomainError& e) {
      fail(n, key + ": " + e.what());
    }
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, int column, const std::string& source)
    : Error(located(source, line, column, message)), message_(message), line_(line), column_(column) {}

AExpr parse_a_expression(const std::string& text) {
  AExpr e;
  e.text = text;
  if (text == "window") {
    e.base = AExpr::Base::Window;
    return e;
  }
  std::string rest = text;
  static const std::pair<const char*, AExpr::Base> names[] = {
      {"lambda1", AExpr::Base::Lambda1}, {"lambda2", AExpr::Base::Lambda2}, {"lambda3", AExpr::Base::Lambda3}};
  for (const auto& [name, base] : names) {
    if (text.rfind(name, 0) == 0) {
      e.base = base;
      rest = text.substr(std::string(name).size());
      if (rest.empty()) return e;
      if (rest[0] != '+' && rest[0] != '-') throw DomainError("expected '+' or '-' after " + std::string(name));
      break;
    }
  }
  errno = 0;
  char* end = nullptr;
  const Real v = std::strtold(rest.c_str(), &end);
  if (rest.empty() || end != rest.c_str() + rest.size() || errno == ERANGE || !std::isfinite(v)) {
    throw DomainError("cannot read a = '" + text + "' (number, lambda1, lambda2, lambda3, lambdaN+x or window)");
  }
  e.offset = v;
  return e;
}

Real resolve_a(const AExpr& e, const Problem& pb, Real chart_halfwidth) {
  switch (e.base) {
    case AExpr::Base::Number: return e.offset;
    case AExpr::Base::Lambda1: return pb.lambda1() + e.offset;
    case AExpr::Base::Lambda2: return pb.lambda2() + e.offset;
    case AExpr::Base::Lambda3: return pb.lambda3() + e.offset;
    case AExpr::Base::Window: return pb.lambda2() + Real(0.5) * numerical_delta(pb, chart_halfwidth);
  }
  return e.offset;
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

Problem RunConfig::problem() const { return Problem(build_grid(n_interior, length), nonlinearity, harvest); }

CountOptions RunConfig::count_options() const {
  CountOptions o;
  o.n_starts = n_starts;
  o.seed = seed;
  o.dedup_threshold = dedup_threshold;
  o.newton.tolerance = tolerance;
  return o;
}

DiagramOptions RunConfig::diagram_options() const {
  DiagramOptions o;
  o.c_min = c_min;
  o.c_max = c_max;
  o.chart_halfwidth = chart_halfwidth;
  o.chart_step = chart_step;
  o.continuation.tolerance = tolerance;
  o.continuation.max_step = max_step;
  return o;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1, source);
  }
  const Reader rd(source);
  if (!root.IsDefined() || root.IsNull()) throw ConfigError("empty configuration", 0, 0, source);
  rd.expect_map(root, "the document");
  rd.only_keys(root, "the document", {"schema", "grid", "model", "run", "output"});
  if (!root["schema"]) throw ConfigError("missing schema (expected " + std::string(kConfigSchema) + ")", 1, 1, source);
  if (const std::string s = rd.text(root["schema"], "schema"); s != kConfigSchema) {
    rd.fail(root["schema"], "unsupported schema '" + s + "' (expected " + kConfigSchema + ")");
  }

  RunConfig cfg;
  if (const YAML::Node g = root["grid"]) {
    rd.expect_map(g, "grid");
    rd.only_keys(g, "grid", {"n_interior", "length"});
    if (g["n_interior"]) {
      const long long n = rd.integer(g["n_interior"], "n_interior");
      if (n < 3 || n > 200000) rd.fail(g["n_interior"], "n_interior must be in [3, 200000]");
      cfg.n_interior = static_cast<int>(n);
    }
    if (g["length"]) cfg.length = rd.positive(g["length"], "length");
  }

  if (const YAML::Node m = root["model"]) {
    rd.expect_map(m, "model");
    rd.only_keys(m, "model", {"M", "p", "harvest", "scale"});
    if (m["M"]) {
      cfg.nonlinearity.threshold = rd.real(m["M"], "M");
      if (cfg.nonlinearity.threshold < 0) rd.fail(m["M"], "M must be nonnegative");
    }
    if (m["p"]) {
      const long long p = rd.integer(m["p"], "p");
      if (p < 3 || p > 64) rd.fail(m["p"], "p must be an integer in [3, 64]");
      cfg.nonlinearity.exponent = static_cast<int>(p);
    }
    if (m["harvest"]) {
      try {
        cfg.harvest.profile = parse_harvest_profile(rd.text(m["harvest"], "harvest"));
      } catch (const ModelError& e) {
        rd.fail(m["harvest"], e.what());
      }
    }
    if (m["scale"]) cfg.harvest.scale = rd.positive(m["scale"], "scale");
  }

  if (const YAML::Node r = root["run"]) {
    rd.expect_map(r, "run");
    rd.only_keys(r, "run",
                 {"command", "a", "c", "c_min", "c_max", "regime", "n_starts", "seed", "tolerance", "dedup_threshold",
                  "chart_halfwidth", "chart_step", "max_step", "direction", "stop_at_fold", "a_values", "t_values",
                  "branch", "sign"});
    if (r["command"]) {
      const std::string c = rd.text(r["command"], "command");
      if (!kCommands.contains(c)) rd.fail(r["command"], "unknown command '" + c + "'");
      cfg.command = c;
    }
    if (r["a"]) cfg.a = rd.a_expr(r["a"], "a");
    if (r["c"]) cfg.c = rd.real(r["c"], "c");
    if (r["c_min"]) cfg.c_min = rd.real(r["c_min"], "c_min");
    if (r["c_max"]) cfg.c_max = rd.real(r["c_max"], "c_max");
    if (!(cfg.c_min < cfg.c_max)) rd.fail(r["c_min"] ? r["c_min"] : r["c_max"], "c_min must be below c_max");
    if (r["regime"]) {
      try {
        cfg.regime = parse_regime(rd.text(r["regime"], "regime"));
      } catch (const DomainError& e) {
        rd.fail(r["regime"], e.what());
      }
    }
    if (r["n_starts"]) {
      const long long n = rd.integer(r["n_starts"], "n_starts");
      if (n < 1 || n > 1000000) rd.fail(r["n_starts"], "n_starts must be in [1, 1000000]");
      cfg.n_starts = static_cast<int>(n);
    }
    if (r["seed"]) {
      const long long s = rd.integer(r["seed"], "seed");
      if (s < 0) rd.fail(r["seed"], "seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (r["tolerance"]) cfg.tolerance = rd.positive(r["tolerance"], "tolerance");
    if (r["dedup_threshold"]) cfg.dedup_threshold = rd.positive(r["dedup_threshold"], "dedup_threshold");
    if (r["chart_halfwidth"]) cfg.chart_halfwidth = rd.positive(r["chart_halfwidth"], "chart_halfwidth");
    if (r["chart_step"]) cfg.chart_step = rd.positive(r["chart_step"], "chart_step");
    if (r["max_step"]) cfg.max_step = rd.positive(r["max_step"], "max_step");
    if (r["direction"]) {
      const long long d = rd.integer(r["direction"], "direction");
      if (d < -1 || d > 1) rd.fail(r["direction"], "direction must be -1, 0 or 1");
      cfg.direction = static_cast<int>(d);
    }
    if (r["stop_at_fold"]) cfg.stop_at_fold = rd.boolean(r["stop_at_fold"], "stop_at_fold");
    if (const YAML::Node av = r["a_values"]) {
      if (!av.IsSequence() || av.size() == 0) rd.fail(av, "a_values must be a nonempty list");
      for (const auto& x : av) cfg.a_values.push_back(rd.a_expr(x, "a_values"));
    }
    if (const YAML::Node tv = r["t_values"]) {
      if (!tv.IsSequence() || tv.size() == 0) rd.fail(tv, "t_values must be a nonempty list");
      for (const auto& x : tv) cfg.t_values.push_back(rd.real(x, "t_values"));
      if (!std::is_sorted(cfg.t_values.begin(), cfg.t_values.end())) rd.fail(tv, "t_values must be ascending");
    }
    if (r["branch"]) {
      const std::string b = rd.text(r["branch"], "branch");
      if (b == "dagger") {
        cfg.czero = CZeroBranch::Dagger;
      } else if (b == "ddagger") {
        cfg.czero = CZeroBranch::DoubleDagger;
      } else {
        rd.fail(r["branch"], "branch must be dagger or ddagger");
      }
    }
    if (r["sign"]) {
      const long long s = rd.integer(r["sign"], "sign");
      if (s != 1 && s != -1) rd.fail(r["sign"], "sign must be 1 or -1");
      cfg.czero_sign = static_cast<int>(s);
    }
  }

  if (const YAML::Node o = root["output"]) {
    rd.expect_map(o, "output");
    rd.only_keys(o, "output", {"directory", "formats", "axis"});
    if (o["directory"]) cfg.directory = rd.text(o["directory"], "directory");
    if (const YAML::Node f = o["formats"]) {
      if (!f.IsSequence()) rd.fail(f, "formats must be a list");
      cfg.formats.clear();
      for (const auto& x : f) {
        const std::string s = rd.text(x, "formats");
        if (s != "json" && s != "csv" && s != "svg") rd.fail(x, "unknown format '" + s + "' (json, csv, svg)");
        cfg.formats.push_back(s);
      }
    }
    if (o["axis"]) {
      try {
        cfg.axis = io::parse_axis(rd.text(o["axis"], "axis"));
      } catch (const DomainError& e) {
        rd.fail(o["axis"], e.what());
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    throw ConfigError(e.what(), 0, 0, path.string());
  }
  return parse_config(text, path.string());
}

io::Json config_echo(const RunConfig& cfg) {
  auto d = [](Real x) { return static_cast<double>(x); };
  io::Json j;
  j["schema"] = kConfigSchema;
  j["grid"] = {{"n_interior", cfg.n_interior}, {"length", d(cfg.length)}};
  j["model"] = {{"M", d(cfg.nonlinearity.threshold)},
                {"p", cfg.nonlinearity.exponent},
                {"harvest", to_string(cfg.harvest.profile)},
                {"scale", d(cfg.harvest.scale)}};
  io::Json r;
  r["command"] = cfg.command ? io::Json(*cfg.command) : io::Json(nullptr);
  r["a"] = cfg.a ? io::Json(cfg.a->text) : io::Json(nullptr);
  r["c"] = d(cfg.c);
  r["c_min"] = d(cfg.c_min);
  r["c_max"] = d(cfg.c_max);
  r["regime"] = cfg.regime ? io::Json(to_string(*cfg.regime)) : io::Json(nullptr);
  r["n_starts"] = cfg.n_starts;
  r["seed"] = cfg.seed;
  r["tolerance"] = d(cfg.tolerance);
  r["dedup_threshold"] = d(cfg.dedup_threshold);
  r["chart_halfwidth"] = d(cfg.chart_halfwidth);
  r["chart_step"] = d(cfg.chart_step);
  r["max_step"] = d(cfg.max_step);
  r["direction"] = cfg.direction;
  r["stop_at_fold"] = cfg.stop_at_fold;
  io::Json av = io::Json::array();
  for (const auto& a : cfg.a_values) av.push_back(a.text);
  r["a_values"] = std::move(av);
  io::Json tv = io::Json::array();
  for (Real t : cfg.t_values) tv.push_back(d(t));
  r["t_values"] = std::move(tv);
  r["branch"] = cfg.czero == CZeroBranch::Dagger ? "dagger" : "ddagger";
  r["sign"] = cfg.czero_sign;
  j["run"] = std::move(r);
  j["output"] = {{"directory", cfg.directory.generic_string()},
                 {"formats", cfg.formats},
                 {"axis", cfg.axis == io::Axis::UMax ? "u_max" : "t_proj"}};
  return j;
}

}  // namespace bifurcate
