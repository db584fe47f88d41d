#include "mvfill/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mvfill/errors.hpp"

namespace mvfill {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("invalid value '" + value + "' for " + key);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number<std::size_t>("k", item));
  }
  if (out.empty()) throw ConfigError("k list is empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 1) throw ConfigError("k values must be >= 1");
    if (i > 0 && out[i] <= out[i - 1]) {
      throw ConfigError("k list must be strictly increasing");
    }
  }
  return out;
}

void apply_setting(RunConfig& c, const std::string& key,
                   const std::string& value, const std::filesystem::path& base) {
  auto& s = c.settings;
  auto& t = s.train;
  if (key == "embeddings_v0") {
    c.embeddings[0] = resolve(base, value);
  } else if (key == "embeddings_v1") {
    c.embeddings[1] = resolve(base, value);
  } else if (key == "scores_v0") {
    c.scores[0] = resolve(base, value);
  } else if (key == "scores_v1") {
    c.scores[1] = resolve(base, value);
  } else if (key == "out") {
    c.out_dir = resolve(base, value);
  } else if (key == "seed") {
    s.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "epochs") {
    t.epochs = parse_number<int>(key, value);
  } else if (key == "gamma") {
    t.gamma = parse_real(key, value);
  } else if (key == "learning_rate") {
    t.learning_rate = parse_real(key, value);
  } else if (key == "adam_beta1") {
    t.adam_beta1 = parse_real(key, value);
  } else if (key == "adam_beta2") {
    t.adam_beta2 = parse_real(key, value);
  } else if (key == "batch_per_epoch") {
    t.batch_per_epoch = parse_number<int>(key, value);
  } else if (key == "d_out") {
    t.d_out = parse_number<std::uint32_t>(key, value);
  } else if (key == "k") {
    s.k_list = parse_k_list(value);
  } else if (key == "primary_k") {
    s.primary_k = parse_number<std::size_t>(key, value);
  } else if (key == "missing_view") {
    const auto v = parse_number<unsigned>(key, value);
    if (v > 1) throw ConfigError("missing_view must be 0 or 1");
    s.missing_view = ViewId{static_cast<std::uint16_t>(v)};
  } else if (key == "fully_paired") {
    s.fully_paired = parse_bool(key, value);
  } else if (key == "f1_average") {
    if (value == "macro") {
      s.f1_average = F1Average::kMacro;
    } else if (value == "micro") {
      s.f1_average = F1Average::kMicro;
    } else {
      throw ConfigError("f1_average must be 'macro' or 'micro'");
    }
  } else if (key == "jobs") {
    c.jobs = parse_number<int>(key, value);
    if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  } else if (key == "fold") {
    const int f = parse_number<int>(key, value);
    if (f < 0 || f >= kNumFolds) throw ConfigError("fold must be in [0, 4]");
    c.fold = f;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  RunConfig config;
  const auto base = path.parent_path();
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    try {
      apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                    base);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return config;
}

std::string to_text(const RunConfig& c) {
  const auto& s = c.settings;
  const auto& t = s.train;
  std::ostringstream out;
  out << "embeddings_v0 = " << c.embeddings[0].string() << '\n'
      << "embeddings_v1 = " << c.embeddings[1].string() << '\n'
      << "scores_v0 = " << c.scores[0].string() << '\n'
      << "scores_v1 = " << c.scores[1].string() << '\n'
      << "out = " << c.out_dir.string() << '\n'
      << "seed = " << s.seed << '\n'
      << "epochs = " << t.epochs << '\n'
      << "gamma = " << real_text(t.gamma) << '\n'
      << "learning_rate = " << real_text(t.learning_rate) << '\n'
      << "adam_beta1 = " << real_text(t.adam_beta1) << '\n'
      << "adam_beta2 = " << real_text(t.adam_beta2) << '\n'
      << "batch_per_epoch = " << t.batch_per_epoch << '\n'
      << "d_out = " << t.d_out << '\n'
      << "k = ";
  for (std::size_t i = 0; i < s.k_list.size(); ++i) {
    out << (i ? "," : "") << s.k_list[i];
  }
  out << '\n'
      << "primary_k = " << s.primary_k << '\n'
      << "missing_view = " << s.missing_view.tag << '\n'
      << "fully_paired = " << (s.fully_paired ? "true" : "false") << '\n'
      << "f1_average = " << (s.f1_average == F1Average::kMacro ? "macro" : "micro")
      << '\n'
      << "jobs = " << c.jobs << '\n';
  if (c.fold) out << "fold = " << *c.fold << '\n';
  return out.str();
}

void check_inputs_exist(const RunConfig& c, bool need_scores) {
  auto check = [](const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("no ") + what + " file configured");
    if (!std::filesystem::exists(p)) {
      throw ConfigError(std::string(what) + " file not found: " + p.string());
    }
  };
  check(c.embeddings[0], "embeddings_v0");
  check(c.embeddings[1], "embeddings_v1");
  if (need_scores) {
    check(c.scores[0], "scores_v0");
    check(c.scores[1], "scores_v1");
  }
}

}  // namespace mvfill
