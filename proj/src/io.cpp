#include "lagsol/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "lagsol/errors.hpp"

namespace lagsol::io {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << fmt(values[i]);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ',';
    out << names[i];
  }
  out << '\n';
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  for (const auto& field : split(line, ',')) {
    std::size_t b = field.find_first_not_of(" \t");
    std::size_t e = field.find_last_not_of(" \t");
    if (b == std::string::npos) throw ValidationError("empty numeric field in '" + line + "'");
    const std::string f = field.substr(b, e - b + 1);
    double v = 0.0;
    auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
      throw ValidationError("not a number: '" + f + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> indexed(const std::string& stem, std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= n; ++j) names.push_back(stem + "_" + std::to_string(j));
  return names;
}

std::vector<std::string> mesh_header(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= n; ++j) {
    names.push_back("Re z" + std::to_string(j));
    names.push_back("Im z" + std::to_string(j));
  }
  names.push_back("s_or_y");
  names.push_back("theta");
  return names;
}

void write_mesh_csv(std::ostream& out, const std::vector<MeshVertex>& vertices) {
  const std::size_t n = vertices.empty() ? 0 : vertices.front().z.size();
  write_header(out, mesh_header(n));
  std::vector<double> row;
  for (const auto& v : vertices) {
    row.clear();
    for (const auto& z : v.z) {
      row.push_back(z.real());
      row.push_back(z.imag());
    }
    row.push_back(v.param);
    row.push_back(v.theta);
    write_row(out, row);
  }
}

std::vector<MeshVertex> read_mesh_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("mesh file is empty");
  const auto header = split(line, ',');
  if (header.size() < 4 || header.size() % 2 != 0 || header[header.size() - 2] != "s_or_y" ||
      header.back() != "theta") {
    throw ValidationError("mesh header not recognized: '" + line + "'");
  }
  const std::size_t n = (header.size() - 2) / 2;
  std::vector<MeshVertex> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    try {
      row = parse_row(line);
    } catch (const ValidationError& e) {
      throw ValidationError("mesh line " + std::to_string(lineno) + ": " + e.what());
    }
    if (row.size() != header.size()) {
      throw ValidationError("mesh line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields");
    }
    MeshVertex v;
    for (std::size_t j = 0; j < n; ++j) v.z.emplace_back(row[2 * j], row[2 * j + 1]);
    v.param = row[2 * n];
    v.theta = row[2 * n + 1];
    out.push_back(std::move(v));
  }
  return out;
}

void write_ply(std::ostream& out, const std::vector<MeshVertex>& vertices,
               const std::vector<std::vector<double>>* projection) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "property double theta\nend_header\n";
  for (const auto& v : vertices) {
    std::vector<double> flat;
    for (const auto& z : v.z) {
      flat.push_back(z.real());
      flat.push_back(z.imag());
    }
    double p[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      if (projection) {
        const auto& rowk = (*projection)[k];
        for (std::size_t i = 0; i < flat.size() && i < rowk.size(); ++i) p[k] += rowk[i] * flat[i];
      } else if (static_cast<std::size_t>(k) < flat.size()) {
        p[k] = flat[k];
      }
    }
    out << fmt(p[0]) << ' ' << fmt(p[1]) << ' ' << fmt(p[2]) << ' ' << fmt(v.theta) << '\n';
  }
}

}  // namespace lagsol::io
