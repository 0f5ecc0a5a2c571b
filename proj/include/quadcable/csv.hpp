#pragma once
#include <string>
#include <vector>

#include "quadcable/controller.hpp"
#include "quadcable/state.hpp"

namespace quadcable {

struct LogRow {
  double t = 0.0;
  FullState s;  // l, ldot ignored unless the log is full
  ControlInput u;
  Vec3 ex = Vec3::Zero(), eR = Vec3::Zero();
  double V = 0.0;
};

struct RunLog {
  bool full = false;
  std::vector<LogRow> rows;
};

std::vector<std::string> csv_header(bool full);
// throws std::runtime_error naming the path on I/O failure
void export_csv(const RunLog& log, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  // -1 when absent
};
CsvTable read_csv(const std::string& path);

}  // namespace quadcable
