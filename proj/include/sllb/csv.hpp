#pragma once

#include <string>
#include <vector>

#include "sllb/landscape.hpp"
#include "sllb/train.hpp"

namespace sllb {

// All CSV output: LF line endings, one header row, floats at 17 significant
// digits (round-trippable). Writes are atomic (temp file + rename).

std::string profile_csv(const LossProfile& profile);
void write_profile_csv(const std::string& path, const LossProfile& profile);
LossProfile read_profile_csv(const std::string& path);

std::string history_csv(const std::vector<HistoryRow>& history);
void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history);
std::vector<HistoryRow> read_history_csv(const std::string& path);

// Generic numeric table (all cells f64) for traces, sweeps and summaries.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string table_csv(const CsvTable& table);
void write_table_csv(const std::string& path, const CsvTable& table);
CsvTable read_table_csv(const std::string& path);

}  // namespace sllb
