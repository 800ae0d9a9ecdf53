#pragma once

// RunRecord <-> CSV.  Header row, one row per sample, then a trailing
// "# status=<label> time=<t>" comment line.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hks/errors.hpp"
#include "hks/integrator.hpp"

namespace hks {

class RecordFormatError : public Error {
 public:
  using Error::Error;
};

/// Shortest round-trippable text for a double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline void write_run_record_csv(std::ostream& os, const RunRecord& rec) {
  std::vector<std::string> cols = standard_columns();
  for (const auto& [name, _] : rec.monitored) {
    if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
  }
  os << "t";
  for (const auto& c : cols) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    os << format_double(rec.times[i]);
    for (const auto& c : cols) {
      auto it = rec.monitored.find(c);
      os << ',' << (it == rec.monitored.end() ? std::string("nan") : format_double(it->second.at(i)));
    }
    os << '\n';
  }
  os << "# status=" << rec.status.label() << " time=" << format_double(rec.status.time) << '\n';
}

inline void write_run_record_csv(const std::filesystem::path& path, const RunRecord& rec) {
  std::ofstream os(path);
  if (!os) throw RecordFormatError("cannot open " + path.string() + " for writing");
  write_run_record_csv(os, rec);
}

inline RunRecord read_run_record_csv(std::istream& is) {
  RunRecord rec;
  std::string line;
  if (!std::getline(is, line)) throw RecordFormatError("record csv: empty input");
  const auto header = split(line, ',');
  if (header.empty() || header.front() != "t") throw RecordFormatError("record csv: header must start with 't'");
  bool have_status = false;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# status=", 0) == 0) {
      std::istringstream ss(line.substr(2));
      std::string status_tok, time_tok;
      ss >> status_tok >> time_tok;
      const std::string label = status_tok.substr(std::string("status=").size());
      if (label == "completed") rec.status.kind = RunStatus::Kind::completed;
      else if (label == "blowup") rec.status.kind = RunStatus::Kind::blow_up;
      else if (label == "step_underflow") rec.status.kind = RunStatus::Kind::step_underflow;
      else throw RecordFormatError("record csv: unknown status '" + label + "'");
      if (time_tok.rfind("time=", 0) != 0) throw RecordFormatError("record csv: status line lacks time");
      rec.status.time = std::stod(time_tok.substr(5));
      have_status = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw RecordFormatError("record csv: line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
    }
    try {
      rec.times.push_back(std::stod(cells[0]));
      for (std::size_t c = 1; c < cells.size(); ++c) rec.monitored[header[c]].push_back(std::stod(cells[c]));
    } catch (const std::exception&) {
      throw RecordFormatError("record csv: bad number on line " + std::to_string(line_no));
    }
  }
  if (!have_status) throw RecordFormatError("record csv: missing status line");
  return rec;
}

inline RunRecord read_run_record_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw RecordFormatError("cannot open " + path.string());
  return read_run_record_csv(is);
}

}  // namespace hks
