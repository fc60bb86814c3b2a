#include "surfield/mesh.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace surfield {

namespace {

constexpr double kPi = std::numbers::pi;

SparseMatrix prolongation_from_triplets(int fine_n, int coarse_n,
                                        std::vector<Eigen::Triplet<double>>& trips) {
  SparseMatrix P(fine_n, coarse_n);
  P.setFromTriplets(trips.begin(), trips.end());
  P.makeCompressed();
  return P;
}

}  // namespace

SurfaceMesh generate_circle(int level) {
  if (level < 1) {
    throw UnsupportedRefinement("generate_circle: level must be >= 1, got " +
                                std::to_string(level));
  }
  if (level > 29) {
    throw UnsupportedRefinement("generate_circle: level " + std::to_string(level) +
                                " exceeds the supported range");
  }
  const int n = 1 << (level + 1);
  SurfaceMesh mesh;
  mesh.dim = 1;
  mesh.kind = SurfaceKind::UnitCircle;
  mesh.level = level;
  mesh.vertices.resize(n, 2);
  mesh.simplices.resize(n, 2);
  for (int j = 0; j < n; ++j) {
    const double angle = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
    mesh.vertices(j, 0) = std::cos(angle);
    mesh.vertices(j, 1) = std::sin(angle);
    mesh.simplices(j, 0) = j;
    mesh.simplices(j, 1) = (j + 1) % n;
  }
  return mesh;
}

namespace {

SurfaceMesh base_icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<std::array<double, 3>> coords;
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      coords.push_back({0.0, s1, s2 * phi});
      coords.push_back({s1, s2 * phi, 0.0});
      coords.push_back({s1 * phi, 0.0, s2});
    }
  }
  std::sort(coords.begin(), coords.end());
  SurfaceMesh mesh;
  mesh.dim = 2;
  mesh.kind = SurfaceKind::UnitSphere;
  mesh.level = 0;
  mesh.vertices.resize(12, 3);
  for (int i = 0; i < 12; ++i) {
    Eigen::RowVector3d v(coords[i][0], coords[i][1], coords[i][2]);
    mesh.vertices.row(i) = v / v.norm();
  }
  // Adjacency by distance: icosahedron edges are the unique shortest pairs.
  MatrixXd d2 = MatrixXd::Constant(12, 12, 9.0);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      if (i != j) d2(i, j) = (mesh.vertices.row(i) - mesh.vertices.row(j)).squaredNorm();
    }
  }
  const double cutoff = d2.minCoeff() * 1.2;
  std::vector<std::array<int, 3>> faces;
  for (int i = 0; i < 12; ++i) {
    for (int j = i + 1; j < 12; ++j) {
      if (d2(i, j) >= cutoff) continue;
      for (int k = j + 1; k < 12; ++k) {
        if (d2(j, k) < cutoff && d2(i, k) < cutoff) {
          const Eigen::RowVector3d a = mesh.vertices.row(i);
          const Eigen::RowVector3d b = mesh.vertices.row(j);
          const Eigen::RowVector3d c = mesh.vertices.row(k);
          const Eigen::RowVector3d normal = (b - a).cross(c - a);
          const Eigen::RowVector3d centroid = (a + b + c) / 3.0;
          if (normal.dot(centroid) > 0.0) {
            faces.push_back({i, j, k});
          } else {
            faces.push_back({i, k, j});
          }
        }
      }
    }
  }
  mesh.simplices.resize(static_cast<int>(faces.size()), 3);
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    mesh.simplices(f, 0) = faces[f][0];
    mesh.simplices(f, 1) = faces[f][1];
    mesh.simplices(f, 2) = faces[f][2];
  }
  return mesh;
}

std::pair<SurfaceMesh, Prolongation> subdivide_triangles(const SurfaceMesh& mesh) {
  const int coarse_n = mesh.n_vertices();
  // Edge keys in sorted (min, max) order define midpoint numbering.
  std::map<std::pair<int, int>, int> midpoint_index;
  for (int f = 0; f < mesh.n_simplices(); ++f) {
    const int i = mesh.simplices(f, 0);
    const int j = mesh.simplices(f, 1);
    const int k = mesh.simplices(f, 2);
    midpoint_index[{std::min(i, j), std::max(i, j)}] = -1;
    midpoint_index[{std::min(j, k), std::max(j, k)}] = -1;
    midpoint_index[{std::min(i, k), std::max(i, k)}] = -1;
  }
  int next = coarse_n;
  for (auto& entry : midpoint_index) entry.second = next++;

  SurfaceMesh fine;
  fine.dim = 2;
  fine.kind = SurfaceKind::UnitSphere;
  if (mesh.level) fine.level = *mesh.level + 1;
  fine.vertices.resize(next, 3);
  fine.vertices.topRows(coarse_n) = mesh.vertices;
  for (const auto& [edge, idx] : midpoint_index) {
    Eigen::RowVector3d mid =
        0.5 * (mesh.vertices.row(edge.first) + mesh.vertices.row(edge.second));
    fine.vertices.row(idx) = mid / mid.norm();
  }
  fine.simplices.resize(4 * mesh.n_simplices(), 3);
  auto mid_of = [&](int a, int b) {
    return midpoint_index.at({std::min(a, b), std::max(a, b)});
  };
  for (int f = 0; f < mesh.n_simplices(); ++f) {
    const int i = mesh.simplices(f, 0);
    const int j = mesh.simplices(f, 1);
    const int k = mesh.simplices(f, 2);
    const int mij = mid_of(i, j);
    const int mjk = mid_of(j, k);
    const int mik = mid_of(i, k);
    fine.simplices.row(4 * f + 0) << i, mij, mik;
    fine.simplices.row(4 * f + 1) << j, mjk, mij;
    fine.simplices.row(4 * f + 2) << k, mik, mjk;
    fine.simplices.row(4 * f + 3) << mij, mjk, mik;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(coarse_n) + 2 * midpoint_index.size());
  for (int i = 0; i < coarse_n; ++i) trips.emplace_back(i, i, 1.0);
  for (const auto& [edge, idx] : midpoint_index) {
    trips.emplace_back(idx, edge.first, 0.5);
    trips.emplace_back(idx, edge.second, 0.5);
  }
  Prolongation P;
  P.coarse_n = coarse_n;
  P.fine_n = next;
  P.matrix = prolongation_from_triplets(next, coarse_n, trips);
  return {std::move(fine), std::move(P)};
}

std::pair<SurfaceMesh, Prolongation> refine_circle(const SurfaceMesh& mesh,
                                                   bool project_to_circle) {
  const int coarse_n = mesh.n_vertices();
  const int fine_n = 2 * coarse_n;
  SurfaceMesh fine;
  fine.dim = 1;
  if (project_to_circle) {
    fine = generate_circle(*mesh.level + 1);
  } else {
    fine.kind = SurfaceKind::Generic;
    fine.vertices.resize(fine_n, 2);
    fine.simplices.resize(fine_n, 2);
    for (int j = 0; j < coarse_n; ++j) {
      fine.vertices.row(2 * j) = mesh.vertices.row(j);
      fine.vertices.row(2 * j + 1) =
          0.5 * (mesh.vertices.row(j) + mesh.vertices.row((j + 1) % coarse_n));
    }
    for (int j = 0; j < fine_n; ++j) {
      fine.simplices(j, 0) = j;
      fine.simplices(j, 1) = (j + 1) % fine_n;
    }
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(fine_n) + coarse_n);
  for (int j = 0; j < coarse_n; ++j) {
    trips.emplace_back(2 * j, j, 1.0);
    trips.emplace_back(2 * j + 1, j, 0.5);
    trips.emplace_back(2 * j + 1, (j + 1) % coarse_n, 0.5);
  }
  Prolongation P;
  P.coarse_n = coarse_n;
  P.fine_n = fine_n;
  P.matrix = prolongation_from_triplets(fine_n, coarse_n, trips);
  return {std::move(fine), std::move(P)};
}

}  // namespace

SurfaceMesh generate_icosphere(int level) {
  if (level < 0) {
    throw UnsupportedRefinement("generate_icosphere: level must be >= 0, got " +
                                std::to_string(level));
  }
  if (level > 12) {
    throw UnsupportedRefinement("generate_icosphere: level " + std::to_string(level) +
                                " exceeds the supported range");
  }
  SurfaceMesh mesh = base_icosahedron();
  for (int k = 0; k < level; ++k) {
    mesh = subdivide_triangles(mesh).first;
  }
  return mesh;
}

std::pair<SurfaceMesh, Prolongation> refine(const SurfaceMesh& mesh) {
  if (mesh.kind == SurfaceKind::UnitCircle) {
    if (!mesh.level) {
      throw UnsupportedRefinement("refine: circle mesh is missing its level tag");
    }
    return refine_circle(mesh, /*project_to_circle=*/true);
  }
  if (mesh.kind == SurfaceKind::UnitSphere) {
    return subdivide_triangles(mesh);
  }
  throw UnsupportedRefinement("refine: only UnitCircle and UnitSphere meshes refine");
}

std::pair<SurfaceMesh, Prolongation> refine_flat_midpoint(const SurfaceMesh& mesh) {
  if (mesh.dim != 1) {
    throw UnsupportedRefinement("refine_flat_midpoint: only d=1 meshes are supported");
  }
  return refine_circle(mesh, /*project_to_circle=*/false);
}

double mesh_size(const SurfaceMesh& mesh) {
  double h = 0.0;
  if (mesh.dim == 1) {
    for (int t = 0; t < mesh.n_simplices(); ++t) {
      const double len = (mesh.vertices.row(mesh.simplices(t, 1)) -
                          mesh.vertices.row(mesh.simplices(t, 0)))
                             .norm();
      h = std::max(h, 0.5 * len);
    }
  } else {
    for (int t = 0; t < mesh.n_simplices(); ++t) {
      const Eigen::RowVector3d p0 = mesh.vertices.row(mesh.simplices(t, 0));
      const Eigen::RowVector3d p1 = mesh.vertices.row(mesh.simplices(t, 1));
      const Eigen::RowVector3d p2 = mesh.vertices.row(mesh.simplices(t, 2));
      const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
      const double perimeter = (p1 - p0).norm() + (p2 - p1).norm() + (p0 - p2).norm();
      h = std::max(h, 2.0 * area / perimeter);
    }
  }
  return h;
}

VectorXd closest_point(SurfaceKind kind, const VectorXd& x) {
  if (kind == SurfaceKind::Generic) return x;
  const double norm = x.norm();
  if (norm < 1e-14) {
    throw DegeneratePoint("closest_point: the origin has no nearest surface point");
  }
  return x / norm;
}

VectorXd simplex_normal(const SurfaceMesh& mesh, int t) {
  if (t < 0 || t >= mesh.n_simplices()) {
    throw DimensionMismatch("simplex_normal: simplex index out of range");
  }
  if (mesh.dim == 1) {
    const Eigen::RowVector2d p0 = mesh.vertices.row(mesh.simplices(t, 0));
    const Eigen::RowVector2d p1 = mesh.vertices.row(mesh.simplices(t, 1));
    Eigen::RowVector2d tangent = p1 - p0;
    const double len = tangent.norm();
    if (len == 0.0) throw DegeneratePoint("simplex_normal: zero-length segment");
    tangent /= len;
    VectorXd n(2);
    n << tangent.y(), -tangent.x();
    return n;
  }
  const Eigen::RowVector3d p0 = mesh.vertices.row(mesh.simplices(t, 0));
  const Eigen::RowVector3d p1 = mesh.vertices.row(mesh.simplices(t, 1));
  const Eigen::RowVector3d p2 = mesh.vertices.row(mesh.simplices(t, 2));
  Eigen::RowVector3d cross = (p1 - p0).cross(p2 - p0);
  const double len = cross.norm();
  if (len == 0.0) throw DegeneratePoint("simplex_normal: degenerate triangle");
  return VectorXd(cross.transpose() / len);
}

void validate_mesh(const SurfaceMesh& mesh) {
  if (mesh.dim != 1 && mesh.dim != 2) {
    throw DimensionMismatch("validate_mesh: dim must be 1 or 2");
  }
  if (mesh.vertices.cols() != mesh.ambient_dim() ||
      mesh.simplices.cols() != mesh.dim + 1) {
    throw DimensionMismatch("validate_mesh: vertex/simplex column counts do not match dim");
  }
  const int n = mesh.n_vertices();
  for (int t = 0; t < mesh.n_simplices(); ++t) {
    for (int v = 0; v <= mesh.dim; ++v) {
      const int idx = mesh.simplices(t, v);
      if (idx < 0 || idx >= n) {
        throw DimensionMismatch("validate_mesh: simplex " + std::to_string(t) +
                                " references vertex " + std::to_string(idx));
      }
    }
    simplex_normal(mesh, t);  // throws DegeneratePoint on degenerate simplices
  }
  // Closedness: every (d-1)-face must belong to exactly two simplices.
  if (mesh.dim == 1) {
    std::vector<int> count(static_cast<size_t>(n), 0);
    for (int t = 0; t < mesh.n_simplices(); ++t) {
      ++count[static_cast<size_t>(mesh.simplices(t, 0))];
      ++count[static_cast<size_t>(mesh.simplices(t, 1))];
    }
    for (int v = 0; v < n; ++v) {
      if (count[static_cast<size_t>(v)] != 2) {
        throw NonClosedSurface("validate_mesh: vertex " + std::to_string(v) +
                               " belongs to " + std::to_string(count[static_cast<size_t>(v)]) +
                               " segments (expected 2)");
      }
    }
  } else {
    std::map<std::pair<int, int>, int> edge_count;
    for (int t = 0; t < mesh.n_simplices(); ++t) {
      const int i = mesh.simplices(t, 0);
      const int j = mesh.simplices(t, 1);
      const int k = mesh.simplices(t, 2);
      ++edge_count[{std::min(i, j), std::max(i, j)}];
      ++edge_count[{std::min(j, k), std::max(j, k)}];
      ++edge_count[{std::min(i, k), std::max(i, k)}];
    }
    for (const auto& [edge, c] : edge_count) {
      if (c != 2) {
        throw NonClosedSurface("validate_mesh: edge (" + std::to_string(edge.first) +
                               ", " + std::to_string(edge.second) + ") belongs to " +
                               std::to_string(c) + " triangles (expected 2)");
      }
    }
  }
  if (mesh.kind != SurfaceKind::Generic) {
    for (int v = 0; v < n; ++v) {
      if (std::abs(mesh.vertices.row(v).norm() - 1.0) > 1e-12) {
        throw DegeneratePoint("validate_mesh: vertex " + std::to_string(v) +
                              " is not on the unit surface");
      }
    }
  }
}

namespace {

// Reads the next line that carries content (skipping blanks and '#' comments);
// returns false at end of file.
bool next_content_line(std::istream& in, std::string& line, int& line_number) {
  while (std::getline(in, line)) {
    ++line_number;
    const auto pos = line.find('#');
    if (pos != std::string::npos) line.erase(pos);
    bool blank = true;
    for (const char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    }
    if (!blank) return true;
  }
  return false;
}

[[noreturn]] void parse_fail(const std::string& path, int line_number,
                             const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line_number) + ": " + what);
}

}  // namespace

SurfaceMesh load_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string line;
  int line_number = 0;
  if (!next_content_line(in, line, line_number)) {
    parse_fail(path, line_number, "empty file");
  }
  long nv = 0, nf = 0, ne = 0;
  {
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    if (token == "OFF") {
      if (!(ss >> nv)) {
        if (!next_content_line(in, line, line_number)) {
          parse_fail(path, line_number, "missing vertex/face counts");
        }
        std::istringstream counts(line);
        if (!(counts >> nv >> nf >> ne)) {
          parse_fail(path, line_number, "expected 'n_vertices n_faces n_edges'");
        }
      } else if (!(ss >> nf >> ne)) {
        parse_fail(path, line_number, "expected 'n_vertices n_faces n_edges'");
      }
    } else {
      std::istringstream counts(line);
      if (!(counts >> nv >> nf >> ne)) {
        parse_fail(path, line_number, "expected 'OFF' or 'n_vertices n_faces n_edges'");
      }
    }
  }
  if (nv <= 0 || nf <= 0) {
    parse_fail(path, line_number, "vertex and face counts must be positive");
  }
  SurfaceMesh mesh;
  mesh.dim = 2;
  mesh.kind = SurfaceKind::Generic;
  mesh.vertices.resize(nv, 3);
  for (long v = 0; v < nv; ++v) {
    if (!next_content_line(in, line, line_number)) {
      parse_fail(path, line_number, "unexpected end of file inside the vertex list");
    }
    std::istringstream ss(line);
    double x = 0, y = 0, z = 0;
    if (!(ss >> x >> y >> z)) {
      parse_fail(path, line_number, "expected three vertex coordinates");
    }
    mesh.vertices(v, 0) = x;
    mesh.vertices(v, 1) = y;
    mesh.vertices(v, 2) = z;
  }
  mesh.simplices.resize(nf, 3);
  for (long f = 0; f < nf; ++f) {
    if (!next_content_line(in, line, line_number)) {
      parse_fail(path, line_number, "unexpected end of file inside the face list");
    }
    std::istringstream ss(line);
    long arity = 0;
    if (!(ss >> arity)) parse_fail(path, line_number, "expected a face vertex count");
    if (arity != 3) {
      parse_fail(path, line_number,
                 "only triangular faces are supported (got arity " +
                     std::to_string(arity) + ")");
    }
    long i = 0, j = 0, k = 0;
    if (!(ss >> i >> j >> k)) {
      parse_fail(path, line_number, "expected three vertex indices");
    }
    for (long idx : {i, j, k}) {
      if (idx < 0 || idx >= nv) {
        parse_fail(path, line_number, "vertex index " + std::to_string(idx) +
                                          " out of range [0, " + std::to_string(nv) + ")");
      }
    }
    mesh.simplices(f, 0) = static_cast<int>(i);
    mesh.simplices(f, 1) = static_cast<int>(j);
    mesh.simplices(f, 2) = static_cast<int>(k);
  }
  validate_mesh(mesh);  // rejects open surfaces, naming an offending edge
  return mesh;
}

void write_off(const std::string& path, const SurfaceMesh& mesh) {
  if (mesh.dim != 2) {
    throw DimensionMismatch("write_off: only d=2 meshes can be written as OFF");
  }
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out.precision(17);
  out << "OFF\n" << mesh.n_vertices() << ' ' << mesh.n_simplices() << " 0\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    out << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' ' << mesh.vertices(v, 2)
        << '\n';
  }
  for (int f = 0; f < mesh.n_simplices(); ++f) {
    out << "3 " << mesh.simplices(f, 0) << ' ' << mesh.simplices(f, 1) << ' '
        << mesh.simplices(f, 2) << '\n';
  }
  if (!out) throw ParseError(path + ": write failed");
}

void write_ply(const std::string& path, const SurfaceMesh& mesh,
               const VectorXd& nodal_values) {
  if (nodal_values.size() != mesh.n_vertices()) {
    throw DimensionMismatch("write_ply: one value per vertex required");
  }
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out.precision(17);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.n_vertices() << '\n';
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "property double value\n";
  out << "element face " << mesh.n_simplices() << '\n';
  out << "property list uchar int vertex_indices\n";
  out << "end_header\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const double z = mesh.dim == 1 ? 0.0 : mesh.vertices(v, 2);
    out << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' ' << z << ' '
        << nodal_values[v] << '\n';
  }
  const int arity = mesh.dim + 1;
  for (int f = 0; f < mesh.n_simplices(); ++f) {
    out << arity;
    for (int v = 0; v < arity; ++v) out << ' ' << mesh.simplices(f, v);
    out << '\n';
  }
  if (!out) throw ParseError(path + ": write failed");
}

}  // namespace surfield
