#include "fifd/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fifd {

namespace {

const std::vector<std::string> kGridKeys = {"d", "s", "t_horizon", "sigma", "df", "k", "delta"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_as(std::string_view key, std::string_view value) {
  T v{};
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ConfigError("bad value for '" + std::string(key) + "': '" + std::string(value) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("bad boolean for '" + std::string(key) + "': '" + std::string(value) + "'");
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.emplace_back(trim(cur));
  for (const auto& item : out) {
    if (item.empty()) throw ConfigError("empty item in list '" + std::string(text) + "'");
  }
  return out;
}

bool is_grid_key(std::string_view key) {
  for (const auto& k : kGridKeys) {
    if (k == key) return true;
  }
  return false;
}

void set_grid_axis(ExperimentConfig& cfg, std::string_view key, std::string_view values) {
  if (!is_grid_key(key)) throw ConfigError("'" + std::string(key) + "' cannot be a grid axis");
  GridAxis axis{std::string(key), split_list(values)};
  if (axis.values.empty()) throw ConfigError("grid axis '" + axis.key + "' has no values");
  SimConfig probe = cfg.base;
  for (const auto& v : axis.values) set_key(probe, key, v);
  for (auto& a : cfg.grid) {
    if (a.key == axis.key) {
      a = std::move(axis);
      return;
    }
  }
  cfg.grid.push_back(std::move(axis));
}

}  // namespace

void set_key(SimConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "d") {
    c.d = parse_as<Index>(key, value);
  } else if (key == "s") {
    c.s = parse_as<std::size_t>(key, value);
  } else if (key == "t_horizon") {
    c.t_horizon = parse_as<long>(key, value);
  } else if (key == "delta") {
    c.delta = parse_as<double>(key, value);
  } else if (key == "sigma") {
    c.sigma = parse_as<double>(key, value);
  } else if (key == "L") {
    c.L = parse_as<double>(key, value);
  } else if (key == "noise") {
    if (value == "gaussian") {
      c.noise.kind = NoiseKind::gaussian;
    } else if (value == "student_t") {
      c.noise.kind = NoiseKind::student_t;
    } else {
      throw ConfigError("noise must be gaussian or student_t");
    }
  } else if (key == "df") {
    c.noise.df = parse_as<double>(key, value);
  } else if (key == "noise_scale_by_sigma") {
    c.noise.scale_by_sigma = parse_bool(key, value);
  } else if (key == "design") {
    if (value == "gaussian_normalized") {
      c.design = Design::gaussian_normalized;
    } else if (value == "basis_uniform") {
      c.design = Design::basis_uniform;
    } else {
      throw ConfigError("design must be gaussian_normalized or basis_uniform");
    }
  } else if (key == "schedule") {
    if (value == "fifd") {
      c.schedule.kind = Schedule::Kind::fifd;
    } else if (value == "add_k_delete_1") {
      c.schedule.kind = Schedule::Kind::add_k_delete_1;
    } else {
      throw ConfigError("schedule must be fifd or add_k_delete_1");
    }
  } else if (key == "k") {
    c.schedule.k = parse_as<int>(key, value);
  } else if (key == "algorithms") {
    c.algorithms.clear();
    for (const auto& a : split_list(value)) c.algorithms.push_back(AlgorithmSpec::parse(a));
  } else if (key == "runs") {
    c.runs = parse_as<int>(key, value);
  } else if (key == "base_seed") {
    c.base_seed = parse_as<std::uint64_t>(key, value);
  } else if (key == "redraw_truth") {
    c.redraw_truth = parse_bool(key, value);
  } else if (key == "theta_inf_norm") {
    if (value == "truth") {
      c.theta_inf_norm.reset();
    } else {
      c.theta_inf_norm = parse_as<double>(key, value);
    }
  } else if (key == "rank_tol") {
    c.gram.rank_tol = parse_as<double>(key, value);
  } else if (key == "downdate_tol") {
    c.gram.downdate_tol = parse_as<double>(key, value);
  } else if (key == "refresh_interval") {
    c.gram.refresh_interval = parse_as<int>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_experiment(std::string_view text) {
  ExperimentConfig cfg;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  std::vector<std::pair<std::string, std::string>> grid_lines;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (section.empty()) {
      set_key(cfg.base, key, value);
    } else if (section == "grid") {
      grid_lines.emplace_back(key, value);
    }
  }
  for (const auto& [k, v] : grid_lines) set_grid_axis(cfg, k, v);
  validate(cfg.base);
  for (const auto& cell : expand_grid(cfg)) validate(cell.config);
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str());
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override must be key=value: '" + std::string(assignment) + "'");
  }
  const std::string_view key = trim(assignment.substr(0, eq));
  const std::string_view value = trim(assignment.substr(eq + 1));
  if (key.starts_with("grid.")) {
    set_grid_axis(cfg, key.substr(5), value);
  } else {
    set_key(cfg.base, key, value);
  }
}

std::vector<std::pair<std::string, std::string>> to_key_values(const SimConfig& c) {
  std::string algs;
  for (const auto& a : c.algorithms) algs += (algs.empty() ? "" : ", ") + a.name();
  return {
      {"d", std::to_string(c.d)},
      {"s", std::to_string(c.s)},
      {"t_horizon", std::to_string(c.t_horizon)},
      {"delta", num(c.delta)},
      {"sigma", num(c.sigma)},
      {"L", num(c.L)},
      {"noise", c.noise.kind == NoiseKind::gaussian ? "gaussian" : "student_t"},
      {"df", num(c.noise.df)},
      {"noise_scale_by_sigma", c.noise.scale_by_sigma ? "true" : "false"},
      {"design", c.design == Design::gaussian_normalized ? "gaussian_normalized" : "basis_uniform"},
      {"schedule", c.schedule.kind == Schedule::Kind::fifd ? "fifd" : "add_k_delete_1"},
      {"k", std::to_string(c.schedule.k)},
      {"algorithms", algs},
      {"runs", std::to_string(c.runs)},
      {"base_seed", std::to_string(c.base_seed)},
      {"redraw_truth", c.redraw_truth ? "true" : "false"},
      {"theta_inf_norm", c.theta_inf_norm ? num(*c.theta_inf_norm) : "truth"},
      {"rank_tol", num(c.gram.rank_tol)},
      {"downdate_tol", num(c.gram.downdate_tol)},
      {"refresh_interval", std::to_string(c.gram.refresh_interval)},
  };
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg.base)) out += k + " = " + v + "\n";
  if (!cfg.grid.empty()) {
    out += "\n[grid]\n";
    for (const auto& axis : cfg.grid) {
      std::string vals;
      for (const auto& v : axis.values) vals += (vals.empty() ? "" : ", ") + v;
      out += axis.key + " = " + vals + "\n";
    }
  }
  return out;
}

std::vector<GridCell> expand_grid(const ExperimentConfig& cfg) {
  std::vector<GridCell> cells{GridCell{"", cfg.base}};
  for (const auto& axis : cfg.grid) {
    std::vector<GridCell> next;
    for (const auto& cell : cells) {
      for (const auto& v : axis.values) {
        GridCell c = cell;
        set_key(c.config, axis.key, v);
        c.id += (c.id.empty() ? "" : "_") + axis.key + v;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  if (cfg.grid.empty()) cells.front().id = "base";
  return cells;
}

}  // namespace fifd
