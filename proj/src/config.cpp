#include "rieszmix/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rieszmix/errors.hpp"

namespace rieszmix {

ConfigError::ConfigError(const std::string& message, std::string field, int line, int column)
    : std::runtime_error([&] {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
        if (!field.empty()) out += field + ": ";
        return out + message;
      }()),
      field_(std::move(field)),
      line_(line),
      column_(column) {}

std::string_view to_string(Suite suite) {
  switch (suite) {
    case Suite::lattice_axioms: return "lattice-axioms";
    case Suite::filtration: return "filtration";
    case Suite::independence: return "independence";
    case Suite::mixingale: return "mixingale";
    case Suite::martingale_bound: return "martingale-bound";
    case Suite::wlln: return "wlln";
  }
  return "?";
}

std::optional<Suite> parse_suite(std::string_view name) {
  for (Suite s : kAllSuites)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::string_view to_string(BackendChoice choice) {
  switch (choice) {
    case BackendChoice::automatic: return "auto";
    case BackendChoice::exhaustive: return "exhaustive";
    case BackendChoice::monte_carlo: return "monte-carlo";
  }
  return "?";
}

std::optional<BackendChoice> parse_backend(std::string_view name) {
  for (auto c : {BackendChoice::automatic, BackendChoice::exhaustive, BackendChoice::monte_carlo})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

std::optional<std::string> suggest(std::string_view key, const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_distance = 3;
  for (const auto& c : candidates) {
    std::vector<std::size_t> row(c.size() + 1);
    for (std::size_t j = 0; j <= c.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= key.size(); ++i) {
      std::size_t diag = row[0];
      row[0] = i;
      for (std::size_t j = 1; j <= c.size(); ++j) {
        const std::size_t up = row[j];
        row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (key[i - 1] == c[j - 1] ? 0u : 1u)});
        diag = up;
      }
    }
    if (row[c.size()] < best_distance) {
      best_distance = row[c.size()];
      best = c;
    }
  }
  return best;
}

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& message) {
  const YAML::Mark mark = node.Mark();
  const bool known = mark.line >= 0 && !node.IsNull();
  throw ConfigError(message, field, known ? mark.line + 1 : 0, known ? mark.column + 1 : 0);
}

void require_map(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) fail(node, field, "expected a mapping");
}

void reject_unknown(const YAML::Node& map, const std::string& prefix, const std::vector<std::string>& allowed) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    std::string message = "unknown key '" + key + "'";
    if (auto s = suggest(key, allowed)) message += "; did you mean '" + *s + "'?";
    fail(kv.first, prefix + key, message);
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    fail(node, field, "cannot convert '" + node.Scalar() + "'");
  }
}

template <class T>
std::vector<T> sequence(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) fail(node, field, "expected a list");
  std::vector<T> out;
  for (std::size_t k = 0; k < node.size(); ++k)
    out.push_back(scalar<T>(node[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

template <class T>
std::vector<T> increasing_grid(const YAML::Node& node, const std::string& field) {
  auto grid = sequence<T>(node, field);
  if (grid.empty()) fail(node, field, "grid must be nonempty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > T{0})) fail(node, field, "grid entries must be positive");
    if (k > 0 && !(grid[k] > grid[k - 1])) fail(node, field, "grid must be strictly increasing");
  }
  return grid;
}

void parse_process(const YAML::Node& node, ExperimentConfig& cfg) {
  require_map(node, "process");
  reject_unknown(node, "process.",
                 {"kind", "horizon", "theta", "innovations", "memory", "bound", "centered", "seed"});
  ProcessSpec& p = cfg.process;
  if (!node["kind"]) fail(node, "process.kind", "missing required key");
  const auto kind_name = scalar<std::string>(node["kind"], "process.kind");
  const auto kind = parse_process_kind(kind_name);
  if (!kind) {
    std::vector<std::string> names;
    for (auto k : {ProcessKind::independent, ProcessKind::moving_average, ProcessKind::martingale_difference,
                   ProcessKind::custom})
      names.emplace_back(to_string(k));
    std::string message = "unknown process kind '" + kind_name + "'";
    if (auto s = suggest(kind_name, names)) message += "; did you mean '" + *s + "'?";
    fail(node["kind"], "process.kind", message);
  }
  p.kind = *kind;
  if (!node["horizon"]) fail(node, "process.horizon", "missing required key");
  p.horizon = scalar<int>(node["horizon"], "process.horizon");
  if (p.horizon < 1) fail(node["horizon"], "process.horizon", "must be at least 1");
  if (node["theta"]) p.theta = sequence<double>(node["theta"], "process.theta");
  if (const auto inn = node["innovations"]) {
    require_map(inn, "process.innovations");
    reject_unknown(inn, "process.innovations.", {"values", "probs"});
    if (!inn["values"] || !inn["probs"]) fail(inn, "process.innovations", "needs both values and probs");
    p.innovations.values = sequence<double>(inn["values"], "process.innovations.values");
    p.innovations.probs = sequence<double>(inn["probs"], "process.innovations.probs");
  }
  if (node["memory"]) p.memory = scalar<int>(node["memory"], "process.memory");
  if (node["bound"]) p.bound = scalar<double>(node["bound"], "process.bound");
  if (node["centered"]) p.centered = scalar<bool>(node["centered"], "process.centered");
  if (node["seed"]) {
    p.seed = scalar<std::uint64_t>(node["seed"], "process.seed");
    cfg.process_seed_given = true;
  }
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    fail(node, "process", e.what());
  }
}

void parse_certificate(const YAML::Node& node, CertificateDirective& c) {
  if (node.IsScalar()) {
    const auto mode = scalar<std::string>(node, "certificate");
    if (mode != "minimal" && mode != "t-abs") fail(node, "certificate", "expected 'minimal', 't-abs' or a mapping");
    c.mode = mode == "minimal" ? CertificateMode::minimal : CertificateMode::t_abs;
    return;
  }
  require_map(node, "certificate");
  reject_unknown(node, "certificate.", {"mode", "c", "phi", "phi_tail_zero", "epsilon"});
  if (node["mode"]) {
    const auto mode = scalar<std::string>(node["mode"], "certificate.mode");
    if (mode == "minimal")
      c.mode = CertificateMode::minimal;
    else if (mode == "given")
      c.mode = CertificateMode::given;
    else if (mode == "t-abs")
      c.mode = CertificateMode::t_abs;
    else
      fail(node["mode"], "certificate.mode", "expected minimal, given or t-abs");
  } else if (node["phi"]) {
    c.mode = CertificateMode::given;
  }
  if (node["c"]) {
    if (c.mode == CertificateMode::t_abs) fail(node["c"], "certificate.c", "t-abs sets c_i = T|f_i|");
    c.c_scale = scalar<double>(node["c"], "certificate.c");
    if (!(c.c_scale >= 0.0)) fail(node["c"], "certificate.c", "must be nonnegative");
  }
  if (node["phi"]) {
    if (c.mode != CertificateMode::given) fail(node["phi"], "certificate.phi", "only valid with mode given");
    c.phi = sequence<double>(node["phi"], "certificate.phi");
    for (double v : c.phi)
      if (!(v >= 0.0)) fail(node["phi"], "certificate.phi", "entries must be nonnegative");
  } else if (c.mode == CertificateMode::given) {
    fail(node, "certificate.phi", "mode given requires phi");
  }
  if (node["phi_tail_zero"]) c.phi_tail_zero = scalar<bool>(node["phi_tail_zero"], "certificate.phi_tail_zero");
  if (node["epsilon"]) {
    c.epsilon = scalar<double>(node["epsilon"], "certificate.epsilon");
    if (!(c.epsilon > 0.0)) fail(node["epsilon"], "certificate.epsilon", "must be positive");
  }
}

void parse_schedule(const YAML::Node& node, Schedule& s, bool& n_grid_given) {
  require_map(node, "schedule");
  reject_unknown(node, "schedule.", {"n_grid", "M_grid", "B_grid"});
  if (node["n_grid"]) {
    s.n_grid = increasing_grid<int>(node["n_grid"], "schedule.n_grid");
    n_grid_given = true;
  }
  if (node["M_grid"]) s.lag_grid = increasing_grid<int>(node["M_grid"], "schedule.M_grid");
  if (node["B_grid"]) s.bound_grid = increasing_grid<double>(node["B_grid"], "schedule.B_grid");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, {}, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping", {}, 1, 1);
  reject_unknown(root, "", {"id", "process", "certificate", "schedule", "backend", "paths", "trials", "seed",
                            "output", "checks", "decay_threshold"});

  ExperimentConfig cfg;
  if (root["id"]) cfg.id = scalar<std::string>(root["id"], "id");
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (!root["process"]) throw ConfigError("missing required section", "process");
  parse_process(root["process"], cfg);
  if (!cfg.process_seed_given) cfg.process.seed = cfg.seed;
  if (root["certificate"]) parse_certificate(root["certificate"], cfg.certificate);

  bool n_grid_given = false;
  if (root["schedule"]) parse_schedule(root["schedule"], cfg.schedule, n_grid_given);
  if (!n_grid_given) {
    std::vector<int> grid;
    for (int n : cfg.schedule.n_grid)
      if (n <= cfg.process.horizon) grid.push_back(n);
    if (grid.empty()) grid.push_back(cfg.process.horizon);
    cfg.schedule.n_grid = grid;
  } else if (cfg.schedule.n_grid.back() > cfg.process.horizon) {
    fail(root["schedule"]["n_grid"], "schedule.n_grid", "largest n exceeds process.horizon");
  }
  if (cfg.certificate.mode == CertificateMode::given && !cfg.certificate.phi_tail_zero &&
      static_cast<int>(cfg.certificate.phi.size()) < cfg.schedule.lag_grid.back() + 1)
    fail(root["certificate"], "certificate.phi", "must list Phi_1..Phi_{max M + 1} unless phi_tail_zero is set");

  if (root["backend"]) {
    const auto name = scalar<std::string>(root["backend"], "backend");
    const auto b = parse_backend(name);
    if (!b) fail(root["backend"], "backend", "expected auto, exhaustive or monte-carlo");
    cfg.backend = *b;
  }
  if (root["paths"]) {
    const auto paths = scalar<long long>(root["paths"], "paths");
    if (paths < 0) fail(root["paths"], "paths", "must be nonnegative");
    cfg.paths = static_cast<std::size_t>(paths);
  }
  if (root["trials"]) {
    cfg.trials = scalar<int>(root["trials"], "trials");
    if (cfg.trials < 1) fail(root["trials"], "trials", "must be at least 1");
  }
  if (root["output"]) cfg.output = scalar<std::string>(root["output"], "output");
  if (root["checks"]) {
    const auto names = sequence<std::string>(root["checks"], "checks");
    if (names.empty()) fail(root["checks"], "checks", "list must be nonempty");
    std::vector<std::string> known;
    for (Suite s : kAllSuites) known.emplace_back(to_string(s));
    cfg.checks.clear();
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto s = parse_suite(names[k]);
      if (!s) {
        std::string message = "unknown suite '" + names[k] + "'";
        if (auto hint = suggest(names[k], known)) message += "; did you mean '" + *hint + "'?";
        fail(root["checks"][k], "checks", message);
      }
      if (std::find(cfg.checks.begin(), cfg.checks.end(), *s) == cfg.checks.end()) cfg.checks.push_back(*s);
    }
  }
  if (root["decay_threshold"]) {
    const double t = scalar<double>(root["decay_threshold"], "decay_threshold");
    if (!(t > 0.0)) fail(root["decay_threshold"], "decay_threshold", "must be positive");
    cfg.decay_threshold = t;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string echo_config(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << cfg.id;
  out << YAML::Key << "process" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(cfg.process.kind));
  out << YAML::Key << "horizon" << YAML::Value << cfg.process.horizon;
  out << YAML::Key << "theta" << YAML::Value << YAML::Flow << cfg.process.theta;
  out << YAML::Key << "innovations" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "values" << YAML::Value << cfg.process.innovations.values;
  out << YAML::Key << "probs" << YAML::Value << cfg.process.innovations.probs;
  out << YAML::EndMap;
  out << YAML::Key << "memory" << YAML::Value << cfg.process.memory;
  out << YAML::Key << "bound" << YAML::Value << cfg.process.bound;
  out << YAML::Key << "centered" << YAML::Value << cfg.process.centered;
  out << YAML::Key << "seed" << YAML::Value << cfg.process.seed;
  out << YAML::EndMap;
  out << YAML::Key << "certificate" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(cfg.certificate.mode));
  if (cfg.certificate.mode != CertificateMode::t_abs)
    out << YAML::Key << "c" << YAML::Value << cfg.certificate.c_scale;
  if (cfg.certificate.mode == CertificateMode::given) {
    out << YAML::Key << "phi" << YAML::Value << YAML::Flow << cfg.certificate.phi;
    out << YAML::Key << "phi_tail_zero" << YAML::Value << cfg.certificate.phi_tail_zero;
  }
  out << YAML::Key << "epsilon" << YAML::Value << cfg.certificate.epsilon;
  out << YAML::EndMap;
  out << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_grid" << YAML::Value << YAML::Flow << cfg.schedule.n_grid;
  out << YAML::Key << "M_grid" << YAML::Value << YAML::Flow << cfg.schedule.lag_grid;
  out << YAML::Key << "B_grid" << YAML::Value << YAML::Flow << cfg.schedule.bound_grid;
  out << YAML::EndMap;
  out << YAML::Key << "backend" << YAML::Value << std::string(to_string(cfg.backend));
  out << YAML::Key << "paths" << YAML::Value << cfg.paths;
  out << YAML::Key << "trials" << YAML::Value << cfg.trials;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "output" << YAML::Value << cfg.output;
  std::vector<std::string> checks;
  for (Suite s : cfg.checks) checks.emplace_back(to_string(s));
  out << YAML::Key << "checks" << YAML::Value << YAML::Flow << checks;
  if (cfg.decay_threshold) out << YAML::Key << "decay_threshold" << YAML::Value << *cfg.decay_threshold;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace rieszmix
