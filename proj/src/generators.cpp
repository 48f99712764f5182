#include "kindex/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

namespace kindex {

Vector SpectralOracle::values(int m) const {
  Vector out(m);
  int k = 0;
  for (const auto& [value, mult] : levels)
    for (int i = 0; i < mult && k < m; ++i) out[k++] = value;
  if (k < m) throw PreconditionError("oracle lists fewer than " + std::to_string(m) + " eigenvalues");
  return out;
}

int SpectralOracle::count_below(double threshold) const {
  int n = 0;
  for (const auto& [value, mult] : levels)
    if (value < threshold) n += mult;
  return n;
}

int SpectralOracle::count_within(double tol) const {
  int n = 0;
  for (const auto& [value, mult] : levels)
    if (std::abs(value) <= tol) n += mult;
  return n;
}

double SpectralOracle::min_nonzero_abs() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& level : levels)
    if (std::abs(level.first) > 1e-12) best = std::min(best, std::abs(level.first));
  return best;
}

namespace {

// Groups values equal to relative 1e-9 into levels.
SpectralOracle group_levels(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  SpectralOracle o;
  for (double v : values) {
    if (!o.levels.empty() && std::abs(v - o.levels.back().first) <= 1e-9 * std::max(1.0, std::abs(v)))
      ++o.levels.back().second;
    else
      o.levels.emplace_back(v, 1);
  }
  return o;
}

SpectralOracle spherical_oracle(double scale, int first_l) {
  SpectralOracle o;
  for (int l = first_l; l <= 60; ++l) o.levels.emplace_back((l * (l + 1) - 2) * scale, 2 * l + 1);
  return o;
}

Vec4 embed(const Vec3& p) { return {p[0], p[1], p[2], 0.0}; }

// Grid vertex index with wrap-around; faces use the lower-left diagonal split.
std::vector<Mesh::Face> grid_faces(int nu, int nv) {
  std::vector<Mesh::Face> faces;
  faces.reserve(2 * static_cast<std::size_t>(nu) * nv);
  auto id = [nv](int i, int j) { return i * nv + j; };
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const int a = id(i, j), b = id((i + 1) % nu, j), c = id((i + 1) % nu, (j + 1) % nv), d = id(i, (j + 1) % nv);
      faces.push_back({a, b, d});
      faces.push_back({b, c, d});
    }
  }
  return faces;
}

GeneratorOutput finish(std::string name, Mesh mesh, AmbientSpace ambient, std::optional<AnalyticSurface> analytic,
                       std::optional<SpectralOracle> oracle, std::optional<SpectralOracle> cmc_oracle,
                       bool approximate) {
  SurfaceGeometry geom = shape_operator(mesh, ambient, analytic ? &*analytic : nullptr);
  return GeneratorOutput{std::move(name), std::move(mesh),       ambient,    std::move(analytic),
                         std::move(geom), std::move(oracle), std::move(cmc_oracle), approximate};
}

// +1 when `normal` agrees with the orientation of the first face.
double orientation_sign(const Mesh& mesh, const AmbientSpace& ambient, const std::function<Vec4(const Vec4&)>& normal) {
  const auto frames = face_frames(mesh, ambient);
  return frames.front().normal.dot(normal(frames.front().base)) >= 0.0 ? 1.0 : -1.0;
}

}  // namespace

void icosphere(int subdiv, std::vector<Vec3>& vertices, std::vector<Mesh::Face>& faces) {
  if (subdiv < 0) throw PreconditionError("subdiv must be nonnegative");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
              {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : vertices) v.normalize();
  faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
           {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
           {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdiv; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      vertices.push_back((vertices[a] + vertices[b]).normalized());
      const int id = static_cast<int>(vertices.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Mesh::Face> next;
    next.reserve(4 * faces.size());
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
}

GeneratorOutput clifford_torus(int nu, int nv) {
  if (nu < 3 || nv < 3) throw PreconditionError("nu and nv must be at least 3");
  const double pi = std::numbers::pi;
  std::vector<Vec4> positions;
  positions.reserve(static_cast<std::size_t>(nu) * nv);
  for (int i = 0; i < nu; ++i) {
    const double u = 2.0 * pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double v = 2.0 * pi * j / nv;
      positions.emplace_back(Vec4(std::cos(u), std::sin(u), std::cos(v), std::sin(v)) / std::sqrt(2.0));
    }
  }
  Mesh mesh = Mesh::build(AmbientKind::Sphere3, std::move(positions), grid_faces(nu, nv));
  const AmbientSpace ambient = AmbientSpace::sphere();

  auto raw_normal = [](const Vec4& p) { return Vec4(p[0], p[1], -p[2], -p[3]).normalized(); };
  const double s = orientation_sign(mesh, ambient, raw_normal);
  AnalyticSurface analytic;
  analytic.normal = [s, raw_normal](const Vec4& p) { return Vec4(s * raw_normal(p)); };
  analytic.shape_form = [s](const Vec4& p) {
    const Vec4 tu = Vec4(-p[1], p[0], 0.0, 0.0).normalized();
    const Vec4 tv = Vec4(0.0, 0.0, -p[3], p[2]).normalized();
    return Mat4(-s * tu * tu.transpose() + s * tv * tv.transpose());
  };

  std::vector<double> values;
  const int r = 24;
  for (int m1 = -r; m1 <= r; ++m1)
    for (int m2 = -r; m2 <= r; ++m2)
      if (m1 * m1 + m2 * m2 <= r * r) values.push_back(2.0 * (m1 * m1 + m2 * m2) - 4.0);
  return finish("clifford", std::move(mesh), ambient, std::move(analytic), group_levels(std::move(values)),
                std::nullopt, false);
}

GeneratorOutput equatorial_sphere(int subdiv) {
  if (subdiv < 1) throw PreconditionError("subdiv must be at least 1");
  std::vector<Vec3> vertices;
  std::vector<Mesh::Face> faces;
  icosphere(subdiv, vertices, faces);
  std::vector<Vec4> positions;
  positions.reserve(vertices.size());
  for (const auto& v : vertices) positions.push_back(embed(v));
  Mesh mesh = Mesh::build(AmbientKind::Sphere3, std::move(positions), std::move(faces));
  const AmbientSpace ambient = AmbientSpace::sphere();
  const double s = orientation_sign(mesh, ambient, [](const Vec4&) { return Vec4(0, 0, 0, 1); });
  AnalyticSurface analytic;
  analytic.normal = [s](const Vec4&) { return Vec4(0, 0, 0, s); };
  analytic.shape_form = [](const Vec4&) { return Mat4(Mat4::Zero()); };
  return finish("equatorial-sphere", std::move(mesh), ambient, std::move(analytic), spherical_oracle(1.0, 0),
                std::nullopt, false);
}

GeneratorOutput flat_torus_surface(const Mat3& lattice, int normal_axis, int n) {
  if (n < 3) throw PreconditionError("n must be at least 3");
  if (normal_axis < 0 || normal_axis > 2) throw PreconditionError("normal axis must be 0, 1 or 2");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j && lattice(i, j) != 0.0) throw PreconditionError("lattice must be diagonal");
  const AmbientSpace ambient = AmbientSpace::flat_torus(lattice);
  const int a = normal_axis, b = (a + 1) % 3, c = (a + 2) % 3;
  const double lb = std::abs(lattice(b, b)), lc = std::abs(lattice(c, c));

  std::vector<Vec4> positions;
  positions.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec4 p = Vec4::Zero();
      p[b] = lattice(b, b) * i / n;
      p[c] = lattice(c, c) * j / n;
      positions.push_back(p);
    }
  }
  std::vector<Mesh::Face> faces = grid_faces(n, n);
  std::vector<Mesh::FaceShifts> shifts;
  shifts.reserve(faces.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Corner offsets (di, dj) of the two triangles; a corner wraps when i + di == n.
      const std::array<std::array<int, 2>, 3> lower{{{0, 0}, {1, 0}, {0, 1}}};
      const std::array<std::array<int, 2>, 3> upper{{{1, 0}, {1, 1}, {0, 1}}};
      for (const auto& tri : {lower, upper}) {
        Mesh::FaceShifts fs;
        for (int k = 0; k < 3; ++k) {
          const auto& p = tri[k];
          const auto& q = tri[(k + 1) % 3];
          Shift sh = Shift::Zero();
          sh[b] = (i + q[0] >= n) - (i + p[0] >= n);
          sh[c] = (j + q[1] >= n) - (j + p[1] >= n);
          fs[k] = sh;
        }
        shifts.push_back(fs);
      }
    }
  }
  Mesh mesh = Mesh::build(AmbientKind::FlatTorus3, std::move(positions), std::move(faces), std::move(shifts), lattice);

  Vec4 axis = Vec4::Zero();
  axis[a] = 1.0;
  const double s = orientation_sign(mesh, ambient, [axis](const Vec4&) { return axis; });
  AnalyticSurface analytic;
  analytic.normal = [axis, s](const Vec4&) { return Vec4(s * axis); };
  analytic.shape_form = [](const Vec4&) { return Mat4(Mat4::Zero()); };

  const double hb = lb / n, hc = lc / n;
  const double pi = std::numbers::pi;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n) * n);
  for (int k1 = 0; k1 < n; ++k1) {
    for (int k2 = 0; k2 < n; ++k2) {
      const double s1 = std::sin(pi * k1 / n), s2 = std::sin(pi * k2 / n);
      values.push_back(4.0 / (hb * hb) * s1 * s1 + 4.0 / (hc * hc) * s2 * s2);
    }
  }
  return finish("flat-torus", std::move(mesh), ambient, std::move(analytic), group_levels(std::move(values)),
                std::nullopt, false);
}

GeneratorOutput round_sphere(double r, int subdiv) {
  if (!(r > 0.0)) throw PreconditionError("radius must be positive");
  if (subdiv < 1) throw PreconditionError("subdiv must be at least 1");
  std::vector<Vec3> vertices;
  std::vector<Mesh::Face> faces;
  icosphere(subdiv, vertices, faces);
  std::vector<Vec4> positions;
  positions.reserve(vertices.size());
  for (const auto& v : vertices) positions.push_back(embed(r * v));
  // Orient outward.
  const auto& f0 = faces.front();
  const Vec3 n0 = (vertices[f0[1]] - vertices[f0[0]]).cross(vertices[f0[2]] - vertices[f0[0]]);
  if (n0.dot(vertices[f0[0]]) < 0.0)
    for (auto& f : faces) std::swap(f[1], f[2]);
  Mesh mesh = Mesh::build(AmbientKind::Euclidean3, std::move(positions), std::move(faces));
  AnalyticSurface analytic;
  analytic.normal = [](const Vec4& p) { return Vec4(Vec4(p[0], p[1], p[2], 0.0).normalized()); };
  analytic.shape_form = [r](const Vec4&) {
    Mat4 b = Mat4::Zero();
    b.topLeftCorner<3, 3>() = -Mat3::Identity() / r;
    return b;
  };
  return finish("round-sphere", std::move(mesh), AmbientSpace::euclidean(), std::move(analytic),
                spherical_oracle(1.0 / (r * r), 0), spherical_oracle(1.0 / (r * r), 1), false);
}

namespace {

constexpr int kSchwarzRelaxIterations = 20;

double schwarz_level(const Vec3& x) {
  const double t = 2.0 * std::numbers::pi;
  return std::cos(t * x[0]) + std::cos(t * x[1]) + std::cos(t * x[2]);
}

Vec3 schwarz_gradient(const Vec3& x) {
  const double t = 2.0 * std::numbers::pi;
  return -t * Vec3(std::sin(t * x[0]), std::sin(t * x[1]), std::sin(t * x[2]));
}

Vec3 project_to_level_set(Vec3 x) {
  for (int i = 0; i < 4; ++i) {
    const Vec3 g = schwarz_gradient(x);
    x -= schwarz_level(x) / g.squaredNorm() * g;
  }
  return x;
}

// Tangential area-weighted centroid smoothing followed by projection back
// onto the level set. Connectivity and corner cells are unchanged.
void relax_on_level_set(std::vector<Vec4>& positions, const std::vector<Mesh::Face>& faces,
                        const std::vector<std::array<Eigen::Vector3i, 3>>& cells, int iterations) {
  const std::size_t nv = positions.size();
  std::vector<Vec3> step(nv);
  std::vector<double> weight(nv);
  for (int it = 0; it < iterations; ++it) {
    std::fill(step.begin(), step.end(), Vec3::Zero());
    std::fill(weight.begin(), weight.end(), 0.0);
    for (std::size_t f = 0; f < faces.size(); ++f) {
      std::array<Vec3, 3> u;
      for (int k = 0; k < 3; ++k) u[k] = positions[faces[f][k]].head<3>() + cells[f][k].cast<double>();
      const double area = 0.5 * (u[1] - u[0]).cross(u[2] - u[0]).norm();
      const Vec3 centroid = (u[0] + u[1] + u[2]) / 3.0;
      for (int k = 0; k < 3; ++k) {
        step[faces[f][k]] += area * (centroid - u[k]);
        weight[faces[f][k]] += area;
      }
    }
    for (std::size_t v = 0; v < nv; ++v) {
      const Vec3 x = positions[v].head<3>();
      const Vec3 n = schwarz_gradient(x).normalized();
      Vec3 d = step[v] / weight[v];
      d -= d.dot(n) * n;
      positions[v].head<3>() = project_to_level_set(x + d);
    }
  }
}

}  // namespace

GeneratorOutput schwarz_p(int resolution) {
  if (resolution < 16) throw PreconditionError("resolution ≥ 16 required");
  const int n = resolution;
  // A generic offset keeps every grid node off the level set.
  const Vec3 offset(0.1234, 0.3571, 0.2719);
  auto node_index = [n](const Eigen::Vector3i& i) {
    return ((i[0] % n) * n + (i[1] % n)) * n + (i[2] % n);
  };
  auto node_position = [n, &offset](const Eigen::Vector3i& i) { return Vec3((i.cast<double>() + offset) / n); };

  std::vector<double> level(static_cast<std::size_t>(n) * n * n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        const Eigen::Vector3i i(x, y, z);
        level[node_index(i)] = schwarz_level(node_position(i));
      }

  struct Crossing {
    int vertex;
    Eigen::Vector3i floor;
  };
  std::unordered_map<long long, Crossing> crossings;
  std::vector<Vec4> positions;

  // Surface vertex on the grid edge from node `lo` (wrapped) along offset d in {0,1}^3.
  auto crossing = [&](const Eigen::Vector3i& lo, const Eigen::Vector3i& d) -> const Crossing& {
    const Eigen::Vector3i wrapped(lo[0] % n, lo[1] % n, lo[2] % n);
    const long long key = static_cast<long long>(node_index(wrapped)) * 8 + (d[0] * 4 + d[1] * 2 + d[2]);
    auto it = crossings.find(key);
    if (it != crossings.end()) return it->second;
    const double fa = level[node_index(wrapped)];
    const double fb = level[node_index(wrapped + d)];
    const double t = fa / (fa - fb);
    const Vec3 x = node_position(wrapped) + t * d.cast<double>() / n;
    Crossing c;
    c.floor = Eigen::Vector3i(static_cast<int>(std::floor(x[0])), static_cast<int>(std::floor(x[1])),
                              static_cast<int>(std::floor(x[2])));
    const Vec3 canonical = x - c.floor.cast<double>();
    positions.push_back(embed(canonical));
    c.vertex = static_cast<int>(positions.size()) - 1;
    return crossings.emplace(key, c).first->second;
  };

  std::vector<Mesh::Face> faces;
  // Integer cell of each face corner, relative to the stored vertex position.
  std::vector<std::array<Eigen::Vector3i, 3>> corner_cells;
  const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        const Eigen::Vector3i cube(x, y, z);
        for (const auto& perm : perms) {
          std::array<Eigen::Vector3i, 4> tet;
          tet[0] = cube;
          for (int k = 0; k < 3; ++k) {
            tet[k + 1] = tet[k];
            tet[k + 1][perm[k]] += 1;
          }
          std::array<double, 4> f;
          std::array<Vec3, 4> p;
          for (int k = 0; k < 4; ++k) {
            f[k] = level[node_index(tet[k])];
            p[k] = (tet[k].cast<double>() + offset) / n;
          }
          std::vector<int> pos, neg;
          for (int k = 0; k < 4; ++k) (f[k] > 0.0 ? pos : neg).push_back(k);
          if (pos.empty() || neg.empty()) continue;

          // Gradient of the linear interpolant, pointing into the positive side.
          Mat3 dp;
          Vec3 df;
          for (int k = 0; k < 3; ++k) {
            dp.row(k) = (p[k + 1] - p[0]).transpose();
            df[k] = f[k + 1] - f[0];
          }
          const Vec3 grad = dp.colPivHouseholderQr().solve(df);

          // Surface point on tet edge (a, b), unwrapped relative to this cube.
          struct Corner {
            int vertex;
            Vec3 unwrapped;
            Eigen::Vector3i offset;
          };
          auto corner = [&](int a, int b) {
            if (tet[b][0] < tet[a][0] || tet[b][1] < tet[a][1] || tet[b][2] < tet[a][2]) std::swap(a, b);
            const Eigen::Vector3i d = tet[b] - tet[a];
            const Crossing& c = crossing(tet[a], d);
            const Eigen::Vector3i wrap(tet[a][0] / n, tet[a][1] / n, tet[a][2] / n);
            Corner out;
            out.vertex = c.vertex;
            out.offset = wrap + c.floor;
            out.unwrapped = positions[c.vertex].head<3>() + out.offset.cast<double>();
            return out;
          };
          auto emit = [&](Corner a, Corner b, Corner c) {
            if ((b.unwrapped - a.unwrapped).cross(c.unwrapped - a.unwrapped).dot(grad) < 0.0) std::swap(b, c);
            faces.push_back({a.vertex, b.vertex, c.vertex});
            corner_cells.push_back({a.offset, b.offset, c.offset});
          };
          if (pos.size() == 1 || neg.size() == 1) {
            const auto& lone = pos.size() == 1 ? pos : neg;
            const auto& rest = pos.size() == 1 ? neg : pos;
            emit(corner(lone[0], rest[0]), corner(lone[0], rest[1]), corner(lone[0], rest[2]));
          } else {
            // Quad p0-n0, p0-n1, p1-n1, p1-n0 in cyclic order.
            const Corner q0 = corner(pos[0], neg[0]), q1 = corner(pos[0], neg[1]);
            const Corner q2 = corner(pos[1], neg[1]), q3 = corner(pos[1], neg[0]);
            emit(q0, q1, q2);
            emit(q0, q2, q3);
          }
        }
      }

  relax_on_level_set(positions, faces, corner_cells, kSchwarzRelaxIterations);

  std::vector<Mesh::FaceShifts> shifts(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) shifts[f][k] = corner_cells[f][(k + 1) % 3] - corner_cells[f][k];
  Mesh mesh = Mesh::build(AmbientKind::FlatTorus3, std::move(positions), std::move(faces), std::move(shifts),
                          Mat3::Identity());
  const TopologyReport topo = topology(mesh);
  if (topo.genus != 3)
    throw GeometryError("marching tetrahedra produced genus " + std::to_string(topo.genus) + ", expected 3");
  return finish("schwarz-p", std::move(mesh), AmbientSpace::flat_torus(Mat3::Identity()), std::nullopt, std::nullopt,
                std::nullopt, true);
}

}  // namespace kindex
