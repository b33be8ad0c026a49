#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace lagsol::io {

// Round-trippable, locale-independent formatting ("%.17g").
std::string fmt(double v);

// Writes one comma-separated row followed by '\n'.
void write_row(std::ostream& out, const std::vector<double>& values);
void write_header(std::ostream& out, const std::vector<std::string>& names);

// Parses a comma-separated numeric row; throws ValidationError on junk.
std::vector<double> parse_row(const std::string& line);
std::vector<std::string> split(const std::string& line, char sep);

// Header names with a 1-based suffix, e.g. indexed("phi", 3) -> phi_1..phi_3.
std::vector<std::string> indexed(const std::string& stem, std::size_t n);

// Mesh CSV header: Re z1,Im z1,...,Re zn,Im zn,s_or_y,theta.
std::vector<std::string> mesh_header(std::size_t n);

struct MeshVertex {
  std::vector<std::complex<double>> z;
  double param = 0.0;
  double theta = 0.0;
};

void write_mesh_csv(std::ostream& out, const std::vector<MeshVertex>& vertices);
std::vector<MeshVertex> read_mesh_csv(std::istream& in);

// ASCII PLY vertex cloud.  With `projection` (3 rows of 2n reals acting on
// (Re z1, Im z1, ...)) vertices are mapped to R^3; otherwise the first three
// real coordinates are written (zero-padded).
void write_ply(std::ostream& out, const std::vector<MeshVertex>& vertices,
               const std::vector<std::vector<double>>* projection = nullptr);

}  // namespace lagsol::io
