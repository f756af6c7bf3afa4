#include "sllb/csv.hpp"

#include <cstdlib>
#include <limits>

#include "sllb/error.hpp"
#include "sllb/util.hpp"

namespace sllb {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_cell(const std::string& cell, const std::string& path, size_t line_no) {
  if (cell == "nan" || cell == "-nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw ValidationError(path + ":" + std::to_string(line_no) + ": cannot parse \"" + cell +
                          "\" as a number");
  }
  return v;
}

// Splits file content into lines; requires LF endings and a final newline.
std::vector<std::string> lines_of(const std::string& content, const std::string& path) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : content) {
    if (c == '\r') throw ValidationError(path + ": CR line endings not supported");
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

std::string profile_csv(const LossProfile& profile) {
  std::string out = "t,total,cross_entropy,l2_term,accuracy\n";
  for (const auto& p : profile.points) {
    out += format_f64(p.t) + ',' + format_f64(p.loss.total) + ',' +
           format_f64(p.loss.cross_entropy) + ',' + format_f64(p.loss.l2_term) + ',' +
           format_f64(p.loss.accuracy) + '\n';
  }
  return out;
}

void write_profile_csv(const std::string& path, const LossProfile& profile) {
  write_file_atomic(path, profile_csv(profile));
}

LossProfile read_profile_csv(const std::string& path) {
  auto lines = lines_of(read_file(path), path);
  if (lines.empty() || lines[0] != "t,total,cross_entropy,l2_term,accuracy") {
    throw ValidationError(path + ": missing profile CSV header");
  }
  LossProfile profile;
  for (size_t i = 1; i < lines.size(); ++i) {
    auto cells = split_line(lines[i]);
    if (cells.size() != 5) {
      throw ValidationError(path + ":" + std::to_string(i + 1) + ": expected 5 cells, got " +
                            std::to_string(cells.size()));
    }
    ProfilePoint p;
    p.t = parse_cell(cells[0], path, i + 1);
    p.loss.total = parse_cell(cells[1], path, i + 1);
    p.loss.cross_entropy = parse_cell(cells[2], path, i + 1);
    p.loss.l2_term = parse_cell(cells[3], path, i + 1);
    p.loss.accuracy = parse_cell(cells[4], path, i + 1);
    profile.points.push_back(p);
  }
  return profile;
}

std::string history_csv(const std::vector<HistoryRow>& history) {
  std::string out = "step,total,cross_entropy,l2_term,accuracy,eval_accuracy\n";
  for (const auto& r : history) {
    out += std::to_string(r.step) + ',' + format_f64(r.train.total) + ',' +
           format_f64(r.train.cross_entropy) + ',' + format_f64(r.train.l2_term) + ',' +
           format_f64(r.train.accuracy) + ',' + format_f64(r.eval_accuracy) + '\n';
  }
  return out;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history) {
  write_file_atomic(path, history_csv(history));
}

std::vector<HistoryRow> read_history_csv(const std::string& path) {
  auto lines = lines_of(read_file(path), path);
  if (lines.empty() || lines[0] != "step,total,cross_entropy,l2_term,accuracy,eval_accuracy") {
    throw ValidationError(path + ": missing history CSV header");
  }
  std::vector<HistoryRow> history;
  for (size_t i = 1; i < lines.size(); ++i) {
    auto cells = split_line(lines[i]);
    if (cells.size() != 6) {
      throw ValidationError(path + ":" + std::to_string(i + 1) + ": expected 6 cells, got " +
                            std::to_string(cells.size()));
    }
    HistoryRow r;
    r.step = static_cast<int64_t>(parse_cell(cells[0], path, i + 1));
    r.train.total = parse_cell(cells[1], path, i + 1);
    r.train.cross_entropy = parse_cell(cells[2], path, i + 1);
    r.train.l2_term = parse_cell(cells[3], path, i + 1);
    r.train.accuracy = parse_cell(cells[4], path, i + 1);
    r.eval_accuracy = parse_cell(cells[5], path, i + 1);
    history.push_back(r);
  }
  return history;
}

std::string table_csv(const CsvTable& table) {
  std::string out;
  for (size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw ValidationError("table_csv: row width " + std::to_string(row.size()) +
                            " != header width " + std::to_string(table.header.size()));
    }
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_f64(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_table_csv(const std::string& path, const CsvTable& table) {
  write_file_atomic(path, table_csv(table));
}

CsvTable read_table_csv(const std::string& path) {
  auto lines = lines_of(read_file(path), path);
  if (lines.empty()) throw ValidationError(path + ": empty CSV");
  CsvTable table;
  table.header = split_line(lines[0]);
  for (size_t i = 1; i < lines.size(); ++i) {
    auto cells = split_line(lines[i]);
    if (cells.size() != table.header.size()) {
      throw ValidationError(path + ":" + std::to_string(i + 1) + ": expected " +
                            std::to_string(table.header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c, path, i + 1));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace sllb
