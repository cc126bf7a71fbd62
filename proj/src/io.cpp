#include "nlwave/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nlwave {

namespace {

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

// Shortest round-trip formatting for doubles keeps the CSV byte-reproducible.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

NullFormTensor<double> load_tensor(const std::string& path) {
  std::ifstream in = open_in(path);
  NullFormTensor<double> t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    int a, b, m, n;
    double value;
    if (!(ss >> a >> b >> m >> n >> value))
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 'a b m n value'");
    if (a < 0 || a > 2 || b < 0 || b > 2 || m < 0 || m > 2 || n < 0 || n > 2)
      throw IoError(path + ":" + std::to_string(lineno) + ": indices must be in {0,1,2}");
    if (!std::isfinite(value))
      throw IoError(path + ":" + std::to_string(lineno) + ": value must be finite");
    t(a, b, m, n) = value;
  }
  t.symmetric_flag = t.symmetries_hold();
  return t;
}

void save_tensor(const NullFormTensor<double>& t, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "# nonzero entries: a b m n value\n";
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
          if (t(a, b, m, n) != 0.0)
            out << a << ' ' << b << ' ' << m << ' ' << n << ' '
                << format_double(t(a, b, m, n)) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

QuasiNullForm<double> load_quasi(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::vector<std::string> content;
  while (std::getline(in, line))
    if (!is_comment_or_blank(line)) content.push_back(line);
  if (content.size() != 4)
    throw IoError(path + ": expected a line 'A: a0 a1 a2' and three rows of m");

  QuasiNullForm<double> q;
  {
    std::string head = content[0];
    auto colon = head.find(':');
    if (colon == std::string::npos || head.substr(0, colon) != "A")
      throw IoError(path + ":1: expected 'A: a0 a1 a2'");
    std::istringstream ss(head.substr(colon + 1));
    if (!(ss >> q.a(0) >> q.a(1) >> q.a(2)))
      throw IoError(path + ":1: expected three components after 'A:'");
  }
  for (int r = 0; r < 3; ++r) {
    std::istringstream ss(content[1 + r]);
    if (!(ss >> q.m(r, 0) >> q.m(r, 1) >> q.m(r, 2)))
      throw IoError(path + ": row " + std::to_string(r + 1) + " of m needs three values");
  }
  if (!q.m_symmetric(1e-12 * std::max(1.0, q.m.cwiseAbs().maxCoeff())))
    throw IoError(path + ": m must be symmetric");
  return q;
}

void save_quasi(const QuasiNullForm<double>& q, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "A: " << format_double(q.a(0)) << ' ' << format_double(q.a(1)) << ' '
      << format_double(q.a(2)) << '\n';
  for (int r = 0; r < 3; ++r)
    out << format_double(q.m(r, 0)) << ' ' << format_double(q.m(r, 1)) << ' '
        << format_double(q.m(r, 2)) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

namespace {

PeriodicGrid<double> parse_field_header(std::istream& in, const std::string& path,
                                        double* t_out) {
  std::string header;
  if (!std::getline(in, header)) throw IoError(path + ": missing header line");
  std::istringstream ss(header);
  double t = 0.0;
  int n = 0;
  double L = 0.0;
  if (t_out) {
    if (!(ss >> t >> n >> L)) throw IoError(path + ": header must be 't n L'");
    *t_out = t;
  } else {
    if (!(ss >> n >> L)) throw IoError(path + ": header must be 'n L'");
  }
  try {
    return PeriodicGrid<double>(n, L);
  } catch (const std::invalid_argument& e) {
    throw IoError(path + ": " + e.what());
  }
}

Array2<double> read_array_csv(std::istream& in, const PeriodicGrid<double>& g,
                              const std::string& path) {
  Array2<double> values(g.n, g.n);
  std::string line;
  for (int i = 0; i < g.n; ++i) {
    if (!std::getline(in, line)) throw IoError(path + ": truncated field data");
    std::istringstream ss(line);
    std::string cell;
    for (int j = 0; j < g.n; ++j) {
      if (!std::getline(ss, cell, ',')) throw IoError(path + ": short row");
      values(i, j) = std::strtod(cell.c_str(), nullptr);
    }
  }
  return values;
}

void write_array_csv(std::ostream& out, const Array2<double>& values) {
  for (int i = 0; i < values.rows(); ++i) {
    for (int j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
}

Array2<double> read_array_binary(std::istream& in, const PeriodicGrid<double>& g,
                                 const std::string& path) {
  Array2<double> values(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    std::vector<double> row(g.n);
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(sizeof(double) * g.n));
    if (!in) throw IoError(path + ": truncated binary field data");
    for (int j = 0; j < g.n; ++j) values(i, j) = row[j];
  }
  return values;
}

void write_array_binary(std::ostream& out, const Array2<double>& values) {
  for (int i = 0; i < values.rows(); ++i) {
    std::vector<double> row(size_t(values.cols()));
    for (int j = 0; j < values.cols(); ++j) row[size_t(j)] = values(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(sizeof(double) * row.size()));
  }
}

}  // namespace

GridField<double> load_field(const std::string& path, FieldFormat format) {
  std::ifstream in = open_in(path, format == FieldFormat::Binary);
  PeriodicGrid<double> g = parse_field_header(in, path, nullptr);
  Array2<double> values = format == FieldFormat::Csv ? read_array_csv(in, g, path)
                                                     : read_array_binary(in, g, path);
  return GridField<double>(g, std::move(values));
}

void save_field(const GridField<double>& f, const std::string& path, FieldFormat format) {
  std::ofstream out = open_out(path, format == FieldFormat::Binary);
  out << f.grid.n << ' ' << format_double(f.grid.half_width) << '\n';
  if (format == FieldFormat::Csv)
    write_array_csv(out, f.values);
  else
    write_array_binary(out, f.values);
  if (!out) throw IoError("write failed: " + path);
}

WaveState<double> load_checkpoint(const std::string& path, FieldFormat format) {
  std::ifstream in = open_in(path, format == FieldFormat::Binary);
  double t = 0.0;
  PeriodicGrid<double> g = parse_field_header(in, path, &t);
  Array2<double> u = format == FieldFormat::Csv ? read_array_csv(in, g, path)
                                                : read_array_binary(in, g, path);
  Array2<double> ut = format == FieldFormat::Csv ? read_array_csv(in, g, path)
                                                 : read_array_binary(in, g, path);
  return WaveState<double>(t, GridField<double>(g, std::move(u)),
                           GridField<double>(g, std::move(ut)));
}

void save_checkpoint(const WaveState<double>& s, const std::string& path,
                     FieldFormat format) {
  std::ofstream out = open_out(path, format == FieldFormat::Binary);
  out << format_double(s.t) << ' ' << s.u.grid.n << ' '
      << format_double(s.u.grid.half_width) << '\n';
  if (format == FieldFormat::Csv) {
    write_array_csv(out, s.u.values);
    write_array_csv(out, s.ut.values);
  } else {
    write_array_binary(out, s.u.values);
    write_array_binary(out, s.ut.values);
  }
  if (!out) throw IoError("write failed: " + path);
}

const char* const kReportCsvHeader =
    "t,E1,E2,ghost_E,ghost_G,ks_ratio,good_deriv_ratio,lemma31_ratio,picard_max_iters";

void write_report_csv(const std::vector<EnergyReport<double>>& rows,
                      const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("write_report_csv: empty run log");
  std::ofstream out = open_out(path);
  out << kReportCsvHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.e1) << ',' << format_double(r.e2)
        << ',' << format_double(r.ghost_e) << ',' << format_double(r.ghost_g) << ','
        << format_double(r.ks) << ',' << format_double(r.good_deriv) << ','
        << format_double(r.lemma31) << ',' << r.picard_max_iters << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<EnergyReport<double>> read_report_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty report file");
  if (line != kReportCsvHeader) throw IoError(path + ": unexpected report header");
  std::vector<EnergyReport<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 9 columns");
    EnergyReport<double> r;
    r.t = std::strtod(cells[0].c_str(), nullptr);
    r.e1 = std::strtod(cells[1].c_str(), nullptr);
    r.e2 = std::strtod(cells[2].c_str(), nullptr);
    r.ghost_e = std::strtod(cells[3].c_str(), nullptr);
    r.ghost_g = std::strtod(cells[4].c_str(), nullptr);
    r.ks = std::strtod(cells[5].c_str(), nullptr);
    r.good_deriv = std::strtod(cells[6].c_str(), nullptr);
    r.lemma31 = std::strtod(cells[7].c_str(), nullptr);
    r.picard_max_iters = int(std::strtol(cells[8].c_str(), nullptr, 10));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace nlwave
