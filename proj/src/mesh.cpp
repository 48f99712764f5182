#include "kindex/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace kindex {

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error([&] {
        std::string msg = "mesh validation failed";
        for (const auto& v : violations) msg += "; " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::string_view to_string(AmbientKind kind) {
  switch (kind) {
    case AmbientKind::Euclidean3: return "euclidean3";
    case AmbientKind::Sphere3: return "sphere3";
    case AmbientKind::FlatTorus3: return "flattorus3";
  }
  return "unknown";
}

AmbientKind parse_ambient_kind(std::string_view name) {
  if (name == "euclidean3") return AmbientKind::Euclidean3;
  if (name == "sphere3") return AmbientKind::Sphere3;
  if (name == "flattorus3") return AmbientKind::FlatTorus3;
  throw ParseError("unknown ambient '" + std::string(name) + "'");
}

int chart_dimension(AmbientKind kind) { return kind == AmbientKind::Sphere3 ? 4 : 3; }

namespace {

constexpr double kDegenerateAreaFraction = 1e-12;
constexpr double kSphereNormTolerance = 1e-12;

// Edges are keyed by (min vertex, max vertex, shift from min to max); two
// edges between the same vertex pair with different shifts are distinct.
using EdgeKey = std::tuple<int, int, int, int, int>;

struct HalfedgeRef {
  int face;
  int corner;
  int direction;  // +1 traverses min -> max
};

EdgeKey make_key(int a, int b, const Shift& s, int& direction) {
  if (a < b) {
    direction = 1;
    return {a, b, s[0], s[1], s[2]};
  }
  direction = -1;
  return {b, a, -s[0], -s[1], -s[2]};
}

std::array<Vec4, 3> lift(const std::vector<Vec4>& positions, const Mesh::Face& face,
                         const Mesh::FaceShifts* shifts, const Mat3& lattice) {
  std::array<Vec4, 3> p{positions[face[0]], positions[face[1]], positions[face[2]]};
  if (shifts != nullptr) {
    Vec3 t1 = lattice * (*shifts)[0].cast<double>();
    Vec3 t2 = lattice * ((*shifts)[0] + (*shifts)[1]).cast<double>();
    p[1].head<3>() += t1;
    p[2].head<3>() += t2;
  }
  return p;
}

double triangle_area(const std::array<Vec4, 3>& p) {
  const Vec4 a = p[1] - p[0];
  const Vec4 b = p[2] - p[0];
  const double aa = a.squaredNorm(), bb = b.squaredNorm(), ab = a.dot(b);
  return 0.5 * std::sqrt(std::max(0.0, aa * bb - ab * ab));
}

struct Connectivity {
  std::vector<std::string> violations;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> face_edges;
  std::vector<std::array<int, 3>> face_signs;
};

Connectivity analyze(AmbientKind ambient, const std::vector<Vec4>& positions,
                     const std::vector<Mesh::Face>& faces,
                     const std::vector<Mesh::FaceShifts>& shifts, const Mat3& lattice) {
  Connectivity out;
  auto& violations = out.violations;
  std::set<std::string> seen;
  auto report = [&](const std::string& kind, const std::string& detail) {
    if (seen.insert(kind).second) violations.push_back(kind + " " + detail);
  };

  const int nv = static_cast<int>(positions.size());
  const int nf = static_cast<int>(faces.size());
  if (nv == 0 || nf == 0) {
    violations.push_back("empty mesh");
    return out;
  }
  if (!shifts.empty() && static_cast<int>(shifts.size()) != nf) {
    violations.push_back("shift table size does not match face count");
    return out;
  }
  const bool torus = ambient == AmbientKind::FlatTorus3;
  if (torus && std::abs(lattice.determinant()) < 1e-14) {
    violations.push_back("lattice is singular");
  }
  if (!torus) {
    for (const auto& fs : shifts)
      for (const auto& s : fs)
        if (!s.isZero()) {
          violations.push_back("lattice shifts given for a non-torus ambient");
          return out;
        }
  }

  for (int v = 0; v < nv; ++v) {
    const Vec4& p = positions[v];
    if (!p.allFinite()) report("non-finite vertex", "(vertex " + std::to_string(v) + ")");
    if (ambient == AmbientKind::Sphere3 && std::abs(p.norm() - 1.0) > kSphereNormTolerance)
      report("off-sphere vertex", "(vertex " + std::to_string(v) + ")");
    if (ambient != AmbientKind::Sphere3 && p[3] != 0.0)
      report("vertex has a fourth coordinate", "(vertex " + std::to_string(v) + ")");
  }

  bool indices_ok = true;
  for (int f = 0; f < nf; ++f) {
    const auto& fc = faces[f];
    for (int k = 0; k < 3; ++k)
      if (fc[k] < 0 || fc[k] >= nv) {
        report("face index out of range", "(face " + std::to_string(f) + ")");
        indices_ok = false;
      }
    if (fc[0] == fc[1] || fc[1] == fc[2] || fc[0] == fc[2]) {
      report("degenerate face", "(repeated vertex in face " + std::to_string(f) + ")");
      indices_ok = false;
    }
    if (torus && !shifts.empty() && !(shifts[f][0] + shifts[f][1] + shifts[f][2]).isZero())
      report("face shifts do not close", "(face " + std::to_string(f) + ")");
  }
  if (!indices_ok) return out;

  std::vector<int> used(nv, 0);
  for (const auto& fc : faces)
    for (int k : fc) used[k] = 1;
  for (int v = 0; v < nv; ++v)
    if (!used[v]) report("isolated vertex", "(vertex " + std::to_string(v) + ")");

  std::vector<double> areas(nf);
  for (int f = 0; f < nf; ++f)
    areas[f] = triangle_area(lift(positions, faces[f], shifts.empty() ? nullptr : &shifts[f], lattice));
  const double mean_area = std::accumulate(areas.begin(), areas.end(), 0.0) / nf;
  for (int f = 0; f < nf; ++f)
    if (!(areas[f] > kDegenerateAreaFraction * mean_area))
      report("degenerate face", "(zero area, face " + std::to_string(f) + ")");

  std::map<EdgeKey, std::vector<HalfedgeRef>> halfedges;
  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = faces[f][k];
      const int b = faces[f][(k + 1) % 3];
      const Shift s = shifts.empty() ? Shift::Zero() : shifts[f][k];
      int dir = 0;
      halfedges[make_key(a, b, s, dir)].push_back({f, k, dir});
    }
  }

  std::map<std::pair<int, int>, int> unmatched_per_pair;
  for (const auto& [key, refs] : halfedges) {
    const auto [a, b, s0, s1, s2] = key;
    const std::string tag = "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
    if (refs.size() == 1) {
      ++unmatched_per_pair[{a, b}];
    } else if (refs.size() > 2) {
      report("non-manifold edge", tag);
    } else if (refs[0].direction == refs[1].direction) {
      report("inconsistent orientation", tag);
    }
  }
  for (const auto& [pair, count] : unmatched_per_pair) {
    const std::string tag = "(" + std::to_string(pair.first) + ", " + std::to_string(pair.second) + ")";
    if (torus && count >= 2)
      report("mismatched shifts", tag);
    else
      report("open boundary", tag);
  }
  if (!violations.empty()) return out;

  out.face_edges.assign(nf, {-1, -1, -1});
  out.face_signs.assign(nf, {0, 0, 0});
  out.edges.reserve(halfedges.size());
  for (const auto& [key, refs] : halfedges) {
    const auto [a, b, s0, s1, s2] = key;
    Edge e;
    e.v0 = a;
    e.v1 = b;
    e.shift = Shift(s0, s1, s2);
    const int index = static_cast<int>(out.edges.size());
    for (int i = 0; i < 2; ++i) {
      e.faces[i] = refs[i].face;
      out.face_edges[refs[i].face][refs[i].corner] = index;
      out.face_signs[refs[i].face][refs[i].corner] = refs[i].direction;
    }
    out.edges.push_back(e);
  }
  return out;
}

}  // namespace

std::vector<std::string> Mesh::check(AmbientKind ambient, const std::vector<Vec4>& positions,
                                     const std::vector<Face>& faces,
                                     const std::vector<FaceShifts>& halfedge_shifts,
                                     const Mat3& lattice) {
  return analyze(ambient, positions, faces, halfedge_shifts, lattice).violations;
}

Mesh Mesh::build(AmbientKind ambient, std::vector<Vec4> positions, std::vector<Face> faces,
                 std::vector<FaceShifts> halfedge_shifts, Mat3 lattice) {
  auto conn = analyze(ambient, positions, faces, halfedge_shifts, lattice);
  if (!conn.violations.empty()) throw ValidationError(std::move(conn.violations));

  Mesh m;
  m.ambient_ = ambient;
  m.lattice_ = ambient == AmbientKind::FlatTorus3 ? lattice : Mat3::Identity();
  m.has_shifts_ = std::any_of(halfedge_shifts.begin(), halfedge_shifts.end(), [](const FaceShifts& fs) {
    return !fs[0].isZero() || !fs[1].isZero() || !fs[2].isZero();
  });
  if (halfedge_shifts.empty()) halfedge_shifts.assign(faces.size(), {Shift::Zero(), Shift::Zero(), Shift::Zero()});
  m.positions_ = std::move(positions);
  m.faces_ = std::move(faces);
  m.shifts_ = std::move(halfedge_shifts);
  m.edges_ = std::move(conn.edges);
  m.face_edges_ = std::move(conn.face_edges);
  m.face_edge_signs_ = std::move(conn.face_signs);

  const int nv = m.num_vertices();
  m.vertex_face_offsets_.assign(nv + 1, 0);
  for (const auto& fc : m.faces_)
    for (int v : fc) ++m.vertex_face_offsets_[v + 1];
  std::partial_sum(m.vertex_face_offsets_.begin(), m.vertex_face_offsets_.end(),
                   m.vertex_face_offsets_.begin());
  m.vertex_face_list_.resize(m.vertex_face_offsets_.back());
  std::vector<int> cursor(m.vertex_face_offsets_.begin(), m.vertex_face_offsets_.end() - 1);
  for (int f = 0; f < m.num_faces(); ++f)
    for (int v : m.faces_[f]) m.vertex_face_list_[cursor[v]++] = f;
  return m;
}

std::array<Vec4, 3> Mesh::chart_positions(int f) const {
  return lift(positions_, faces_[f], has_shifts_ ? &shifts_[f] : nullptr, lattice_);
}

TopologyReport topology(const Mesh& mesh) {
  TopologyReport r;
  r.num_vertices = mesh.num_vertices();
  r.num_edges = mesh.num_edges();
  r.num_faces = mesh.num_faces();
  r.euler_characteristic = r.num_vertices - r.num_edges + r.num_faces;
  const int twice_genus = 2 - r.euler_characteristic;
  if (twice_genus % 2 != 0 || twice_genus < 0) {
    throw GeometryError("Euler characteristic " + std::to_string(r.euler_characteristic) +
                        " is not that of a closed orientable surface");
  }
  r.genus = twice_genus / 2;
  return r;
}

}  // namespace kindex
