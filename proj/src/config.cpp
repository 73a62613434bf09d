#include "unisort/config.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace unisort {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path,
                                                     const std::set<std::string>& allowed_keys) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value at " + path + ":" +
                                  std::to_string(lineno));
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!allowed_keys.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' at " + path + ":" +
                                  std::to_string(lineno));
    out[key] = value;
  }
  return out;
}

const std::set<std::string>& train_config_keys() {
  static const std::set<std::string> keys = {
      "n",    "d",       "k",     "tau",        "mode",      "epochs", "lr",
      "samples", "seed", "noise", "out",        "count",     "hidden", "candidates",
      "embed_dim", "taus"};
  return keys;
}

std::string format_g17(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t next = csv.find(',', pos);
    if (next == std::string::npos) next = csv.size();
    const std::string item = trim(csv.substr(pos, next - pos));
    if (!item.empty()) {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument("bad number in list: " + item);
      out.push_back(v);
    }
    pos = next + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

}  // namespace unisort
