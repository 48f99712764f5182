#pragma once

#include "kindex/common.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kindex {

enum class AmbientKind { Euclidean3, Sphere3, FlatTorus3 };

std::string_view to_string(AmbientKind kind);
/// Accepts "euclidean3", "sphere3", "flattorus3".
AmbientKind parse_ambient_kind(std::string_view name);
/// Number of chart coordinates: 4 for Sphere3, 3 otherwise.
int chart_dimension(AmbientKind kind);

/// Undirected edge. `shift` is the lattice translation applied to the head
/// (`v1`) when walking from `v0`; always zero outside the flat torus.
struct Edge {
  int v0 = 0;
  int v1 = 0;
  Shift shift = Shift::Zero();
  std::array<int, 2> faces{-1, -1};
};

/// Closed, oriented, manifold triangle mesh. Connectivity is built eagerly by
/// `Mesh::build`, which also validates; a constructed Mesh is never invalid
/// and never mutated.
class Mesh {
 public:
  using Face = std::array<int, 3>;
  /// Shifts of the three halfedges (corner k -> corner k+1) of one face.
  using FaceShifts = std::array<Shift, 3>;

  /// Throws ValidationError listing every violated invariant.
  static Mesh build(AmbientKind ambient, std::vector<Vec4> positions, std::vector<Face> faces,
                    std::vector<FaceShifts> halfedge_shifts = {},
                    Mat3 lattice = Mat3::Identity());

  /// Same checks as `build`, returning the violations instead of throwing.
  static std::vector<std::string> check(AmbientKind ambient, const std::vector<Vec4>& positions,
                                        const std::vector<Face>& faces,
                                        const std::vector<FaceShifts>& halfedge_shifts,
                                        const Mat3& lattice);

  AmbientKind ambient() const { return ambient_; }
  const Mat3& lattice() const { return lattice_; }

  int num_vertices() const { return static_cast<int>(positions_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }

  const std::vector<Vec4>& positions() const { return positions_; }
  const Vec4& position(int v) const { return positions_[v]; }
  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(int f) const { return faces_[f]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }

  const Shift& halfedge_shift(int f, int corner) const { return shifts_[f][corner]; }
  bool has_shifts() const { return has_shifts_; }

  /// Edge index of halfedge (corner k -> k+1) of face f.
  int face_edge(int f, int corner) const { return face_edges_[f][corner]; }
  /// +1 when the face traverses its edge from v0 to v1, -1 otherwise.
  int face_edge_sign(int f, int corner) const { return face_edge_signs_[f][corner]; }

  /// Faces incident to vertex v, in increasing index order.
  std::span<const int> vertex_faces(int v) const {
    return {vertex_face_list_.data() + vertex_face_offsets_[v],
            vertex_face_list_.data() + vertex_face_offsets_[v + 1]};
  }

  /// Vertex positions of face f lifted into one chart (shifts applied).
  std::array<Vec4, 3> chart_positions(int f) const;

 private:
  Mesh() = default;

  AmbientKind ambient_ = AmbientKind::Euclidean3;
  Mat3 lattice_ = Mat3::Identity();
  std::vector<Vec4> positions_;
  std::vector<Face> faces_;
  std::vector<FaceShifts> shifts_;
  bool has_shifts_ = false;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<std::array<int, 3>> face_edge_signs_;
  std::vector<int> vertex_face_offsets_;
  std::vector<int> vertex_face_list_;
};

struct TopologyReport {
  int num_vertices = 0;
  int num_edges = 0;
  int num_faces = 0;
  int euler_characteristic = 0;
  int genus = 0;
  bool is_valid = true;
  std::vector<std::string> violations;

  /// First Betti number, 2g.
  int betti1() const { return 2 * genus; }
};

/// Throws GeometryError when 2 - chi is odd.
TopologyReport topology(const Mesh& mesh);

// ---- file I/O (OFF / OBJ with ambient, lattice and shift comment extensions)

struct MeshFile {
  Mesh mesh;
  /// Ambient declared by a `# ambient` comment, if any.
  std::optional<AmbientKind> declared_ambient;
};

/// Reads OFF (`OFF` or `4OFF`) or OBJ. When `ambient` is empty the file's
/// `# ambient` declaration is used, falling back to euclidean3.
MeshFile read_mesh(const std::filesystem::path& path, std::optional<AmbientKind> ambient = {});
Mesh load_mesh(const std::filesystem::path& path, std::optional<AmbientKind> ambient = {});
Mesh parse_off(std::string_view text, std::optional<AmbientKind> ambient = {});
Mesh parse_obj(std::string_view text, std::optional<AmbientKind> ambient = {});

/// Extended OFF with 17 significant digits per coordinate.
std::string format_off(const Mesh& mesh);
void write_off(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace kindex
