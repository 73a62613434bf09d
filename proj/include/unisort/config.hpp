#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace unisort {

// Flat key=value config file: one pair per line, '#' comments, blank lines
// ignored. Unknown keys are rejected.
std::map<std::string, std::string> parse_config_file(const std::string& path,
                                                     const std::set<std::string>& allowed_keys);

// Keys understood by the train and variance-sweep subcommands.
const std::set<std::string>& train_config_keys();

// Doubles rendered with 17 significant digits so output bytes round-trip.
std::string format_g17(double value);

std::vector<double> parse_double_list(const std::string& csv);

}  // namespace unisort
