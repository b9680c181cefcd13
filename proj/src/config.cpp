#include "groundattn/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "groundattn/error.hpp"

namespace groundattn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view key, std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(key) + ": '" + std::string(text) + "' is not an integer");
  }
  return value;
}

double parse_double(std::string_view key, std::string_view text) {
  std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(key) + ": '" + s + "' is not a number");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw Error(ErrorCode::kInvalidArgument, std::string(key) + ": '" + std::string(text) + "' is not a boolean");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<int> parse_resolution_list(std::string_view text) {
  std::vector<int> out;
  text = trim(text);
  if (text == "all") return out;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string_view item = trim(text.substr(0, comma));
    int r = parse_int("resolutions", item);
    if (r <= 0) throw Error(ErrorCode::kInvalidArgument, "resolutions must be positive");
    out.push_back(r);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty resolution list");
  return out;
}

std::string format_resolution_list(const std::vector<int>& resolutions) {
  if (resolutions.empty()) return "all";
  std::string out;
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(resolutions[i]);
  }
  return out;
}

void apply_setting(GroundingConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  PipelineConfig& p = config.pipeline;
  if (key == "k") {
    p.evolve.k = parse_int(key, value);
  } else if (key == "tau") {
    p.evolve.tau = parse_double(key, value);
  } else if (key == "alpha") {
    p.evolve.alpha = parse_double(key, value);
  } else if (key == "gamma") {
    p.interaction.gamma = parse_double(key, value);
  } else if (key == "anchor_count") {
    p.interaction.anchor_count = parse_int(key, value);
  } else if (key == "strategy") {
    p.interaction.strategy = parse_strategy(value);
  } else if (key == "similarity_axis") {
    p.interaction.similarity_axis = parse_similarity_axis(value);
  } else if (key == "stage_order") {
    p.order = parse_stage_order(value);
  } else if (key == "seed_source") {
    p.evolve.seed_source = parse_seed_source(value);
  } else if (key == "box_mode") {
    config.box_mode = parse_box_mode(value);
  } else if (key == "evolve") {
    p.use_evolve = parse_bool(key, value);
  } else if (key == "resolutions") {
    p.resolutions = parse_resolution_list(value);
  } else if (key == "target_resolution") {
    p.target_resolution = parse_int(key, value);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown setting '" + std::string(key) + "'");
  }
}

void apply_config_file(GroundingConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open config file " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, path.filename().string() + ":" + std::to_string(number) +
                                                   ": expected key = value");
    }
    apply_setting(config, view.substr(0, eq), view.substr(eq + 1));
  }
}

std::string describe(const GroundingConfig& config) {
  const PipelineConfig& p = config.pipeline;
  std::ostringstream out;
  out << "strategy = " << to_string(p.interaction.strategy) << "\n"
      << "similarity_axis = " << to_string(p.interaction.similarity_axis) << "\n"
      << "gamma = " << format_double(p.interaction.gamma) << "\n"
      << "anchor_count = " << p.interaction.anchor_count << "\n"
      << "k = " << p.evolve.k << "\n"
      << "tau = " << format_double(p.evolve.tau) << "\n"
      << "alpha = " << format_double(p.evolve.alpha) << "\n"
      << "seed_source = " << to_string(p.evolve.seed_source) << "\n"
      << "stage_order = " << to_string(p.order) << "\n"
      << "evolve = " << (p.use_evolve ? "true" : "false") << "\n"
      << "resolutions = " << format_resolution_list(p.resolutions) << "\n"
      << "target_resolution = " << p.target_resolution << "\n"
      << "box_mode = " << to_string(config.box_mode) << "\n";
  return out.str();
}

}  // namespace groundattn
