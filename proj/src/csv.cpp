#include "quadcable/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace quadcable {

std::vector<std::string> csv_header(bool full) {
  std::vector<std::string> h{"t"};
  const char* ax[] = {"x", "y", "z"};
  auto v3 = [&](const std::string& base) {
    for (const char* a : ax) h.push_back(base + "_" + a);
  };
  auto m9 = [&](const std::string& base) {
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) h.push_back(base + "_" + std::to_string(i) + std::to_string(j));
  };
  v3("xL");
  v3("vL");
  m9("RL");
  v3("OmL");
  for (int j = 1; j <= kCables; ++j) {
    v3("q" + std::to_string(j));
    v3("w" + std::to_string(j));
    if (full) {
      h.push_back("l" + std::to_string(j));
      h.push_back("ldot" + std::to_string(j));
    }
  }
  for (int j = 1; j <= kCables; ++j) {
    const std::string n = std::to_string(j);
    m9("R" + n);
    v3("Om" + n);
    v3("u" + n);
    v3("M" + n);
  }
  v3("ex");
  v3("eR");
  h.push_back("V");
  return h;
}

namespace {

void put(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, ",%.17g", v);
  line += buf;
}
void put(std::string& line, const Vec3& v) {
  for (int i = 0; i < 3; ++i) put(line, v(i));
}
void put(std::string& line, const Mat3& m) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) put(line, m(i, j));
}

}  // namespace

void export_csv(const RunLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  const auto h = csv_header(log.full);
  for (size_t i = 0; i < h.size(); ++i) f << (i ? "," : "") << h[i];
  f << "\n";
  std::string line;
  for (const auto& r : log.rows) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", r.t);
    line = buf;
    put(line, r.s.xL);
    put(line, r.s.vL);
    put(line, r.s.RL);
    put(line, r.s.OmL);
    for (int j = 0; j < kCables; ++j) {
      put(line, r.s.q[j]);
      put(line, r.s.w[j]);
      if (log.full) {
        put(line, r.s.l[j]);
        put(line, r.s.ldot[j]);
      }
    }
    for (int j = 0; j < kCables; ++j) {
      put(line, r.s.R[j]);
      put(line, r.s.Om[j]);
      put(line, r.u.u[j]);
      put(line, r.u.M[j]);
    }
    put(line, r.ex);
    put(line, r.eR);
    put(line, r.V);
    f << line << "\n";
  }
  f.flush();
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  CsvTable t;
  std::string line, cell;
  if (!std::getline(f, line)) return t;
  std::istringstream hs(line);
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(t.header.size());
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.header.size())
      throw std::runtime_error("'" + path + "': ragged row " + std::to_string(t.rows.size() + 1));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace quadcable
