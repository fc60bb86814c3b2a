// Polyhedral approximations of closed hypersurfaces: circle polygons in R²
// and icosphere triangulations in R³, with the nested refinement structure
// needed to project noise across levels, plus OFF/PLY file exchange.
#pragma once

#include "surfield/core.hpp"

#include <optional>
#include <string>
#include <utility>

namespace surfield {

enum class SurfaceKind { UnitCircle, UnitSphere, Generic };

/// Closed polyhedral d-surface embedded in R^{d+1}: segments of a polygon
/// (d=1) or triangles (d=2). Vertices of UnitCircle/UnitSphere meshes lie on
/// the surface to machine precision.
struct SurfaceMesh {
  int dim = 1;                    // intrinsic dimension d
  MatrixXd vertices;              // n_vertices × (d+1)
  Eigen::MatrixXi simplices;      // n_simplices × (d+1)
  std::optional<int> level;       // refinement level when generated
  SurfaceKind kind = SurfaceKind::Generic;

  int n_vertices() const { return static_cast<int>(vertices.rows()); }
  int n_simplices() const { return static_cast<int>(simplices.rows()); }
  int ambient_dim() const { return dim + 1; }
};

/// Nodal interpolation of coarse hat-function coefficients onto the fine
/// vertex set. Rows are unit rows at inherited vertices and (1/2, 1/2) at
/// edge midpoints, so each row sums to one.
struct Prolongation {
  int coarse_n = 0;
  int fine_n = 0;
  SparseMatrix matrix;  // fine_n × coarse_n
};

/// Regular 2^{k+1}-gon inscribed in the unit circle; nominal mesh size
/// π·2^{-k}, measured in-ball size sin(π·2^{-(k+1)}). Requires k >= 1.
SurfaceMesh generate_circle(int level);

/// Icosahedron subdivided k times; each step splits triangles in four via
/// radially projected edge midpoints. 10·4^k + 2 vertices, 20·4^k faces.
SurfaceMesh generate_icosphere(int level);

/// Next refinement level plus the prolongation onto it. Only UnitCircle and
/// UnitSphere meshes are refinable; every coarse vertex reappears in the fine
/// mesh with identical coordinates (icosphere vertices keep their indices,
/// circle vertex j becomes fine vertex 2j so angular order stays consecutive).
std::pair<SurfaceMesh, Prolongation> refine(const SurfaceMesh& mesh);

/// Chord-midpoint refinement WITHOUT radial projection (d=1 only): the fine
/// polygon lives on the same chords, so the coarse FE space is exactly a
/// subspace of the fine one. Used for nested-space diagnostics; result kind
/// is Generic.
std::pair<SurfaceMesh, Prolongation> refine_flat_midpoint(const SurfaceMesh& mesh);

/// Largest simplex in-ball radius: half the longest segment (d=1) or the
/// largest triangle inradius 2·Area/perimeter (d=2).
double mesh_size(const SurfaceMesh& mesh);

/// Closest surface point: x/|x| for the unit circle/sphere, identity for
/// Generic meshes. Throws DegeneratePoint at the origin.
VectorXd closest_point(SurfaceKind kind, const VectorXd& x);

/// Outward unit normal of simplex t of the mesh (d=1: right-hand rotation of
/// the segment tangent; d=2: normalized cross product, oriented outward for
/// generated meshes).
VectorXd simplex_normal(const SurfaceMesh& mesh, int t);

/// Structural validation: non-degenerate simplices, closed surface (every
/// (d-1)-face shared by exactly two simplices), vertices on the surface for
/// UnitCircle/UnitSphere kinds. Throws on violation.
void validate_mesh(const SurfaceMesh& mesh);

/// ASCII OFF loader (triangular faces, closed surfaces only). Parse errors
/// carry line numbers; open surfaces are rejected naming an offending edge.
SurfaceMesh load_off(const std::string& path);

/// ASCII OFF writer (d=2), used for round-trip checks.
void write_off(const std::string& path, const SurfaceMesh& mesh);

/// ASCII PLY writer with one scalar value per vertex (x, y, z, value) and the
/// simplex list as faces; d=1 meshes are written with z = 0 and 2-vertex faces.
void write_ply(const std::string& path, const SurfaceMesh& mesh,
               const VectorXd& nodal_values);

}  // namespace surfield
