#pragma once

#include <string>
#include <vector>

namespace maskrl::exp {

// Minimal CSV support for the experiment outputs. Writes are atomic (temp
// file + rename) and deterministic: identical inputs produce identical bytes,
// so reruns are diffable. Doubles use the shortest round-trip form.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const Table& table);
Table read_csv(const std::string& path);

void ensure_dir(const std::string& path);

}  // namespace maskrl::exp
