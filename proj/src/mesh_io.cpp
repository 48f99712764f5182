#include "kindex/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace kindex {

namespace {

struct Extensions {
  std::optional<AmbientKind> ambient;
  std::optional<Mat3> lattice;
  std::map<std::pair<int, int>, Shift> shifts;
};

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad number '" + s + "'");
  }
}

long to_long(const std::string& s) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw ParseError("bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad integer '" + s + "'");
  }
}

// Handles `# ambient`, `# lattice`, `# shift`; other comments are ignored.
void parse_extension(std::string_view comment, Extensions& ext) {
  const auto tok = split_ws(comment.substr(1));
  if (tok.empty()) return;
  if (tok[0] == "ambient" && tok.size() == 2) {
    ext.ambient = parse_ambient_kind(tok[1]);
  } else if (tok[0] == "lattice") {
    if (tok.size() != 10) throw ParseError("lattice line needs 9 numbers");
    Mat3 L;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) L(r, c) = to_double(tok[1 + 3 * r + c]);
    ext.lattice = L;
  } else if (tok[0] == "shift") {
    if (tok.size() != 6) throw ParseError("shift line needs <from> <to> <s1> <s2> <s3>");
    const int a = static_cast<int>(to_long(tok[1]));
    const int b = static_cast<int>(to_long(tok[2]));
    const Shift s(static_cast<int>(to_long(tok[3])), static_cast<int>(to_long(tok[4])),
                  static_cast<int>(to_long(tok[5])));
    if (auto it = ext.shifts.find({b, a}); it != ext.shifts.end() && it->second != -s)
      throw ValidationError({"mismatched shifts (" + std::to_string(a) + ", " + std::to_string(b) + ")"});
    ext.shifts[{a, b}] = s;
  }
}

Mesh assemble(std::vector<Vec4> positions, std::vector<Mesh::Face> faces, int coord_dim,
              const Extensions& ext, std::optional<AmbientKind> requested) {
  const AmbientKind ambient = requested.value_or(ext.ambient.value_or(AmbientKind::Euclidean3));
  if (chart_dimension(ambient) != coord_dim) {
    throw ParseError("vertex coordinate dimension " + std::to_string(coord_dim) +
                     " does not match ambient " + std::string(to_string(ambient)));
  }
  std::vector<Mesh::FaceShifts> shifts;
  if (!ext.shifts.empty()) {
    if (ambient != AmbientKind::FlatTorus3) throw ParseError("shift lines require ambient flattorus3");
    shifts.resize(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
      for (int k = 0; k < 3; ++k) {
        const int a = faces[f][k], b = faces[f][(k + 1) % 3];
        Shift s = Shift::Zero();
        if (auto it = ext.shifts.find({a, b}); it != ext.shifts.end())
          s = it->second;
        else if (auto jt = ext.shifts.find({b, a}); jt != ext.shifts.end())
          s = -jt->second;
        shifts[f][k] = s;
      }
    }
  }
  return Mesh::build(ambient, std::move(positions), std::move(faces), std::move(shifts),
                     ext.lattice.value_or(Mat3::Identity()));
}

}  // namespace

Mesh parse_off(std::string_view text, std::optional<AmbientKind> ambient) {
  Extensions ext;
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      parse_extension(std::string_view(line).substr(hash), ext);
      line.resize(hash);
    }
    for (auto& t : split_ws(line)) tokens.push_back(std::move(t));
  }

  std::size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) throw ParseError("unexpected end of OFF data");
    return tokens[pos++];
  };
  const std::string header = next();
  int dim = 0;
  if (header == "OFF") dim = 3;
  else if (header == "4OFF") dim = 4;
  else throw ParseError("missing OFF header");

  const long nv = to_long(next());
  const long nf = to_long(next());
  to_long(next());  // edge count, informational
  if (nv < 0 || nf < 0) throw ParseError("negative element count");

  std::vector<Vec4> positions(nv, Vec4::Zero());
  for (long v = 0; v < nv; ++v)
    for (int c = 0; c < dim; ++c) positions[v][c] = to_double(next());
  std::vector<Mesh::Face> faces(nf);
  for (long f = 0; f < nf; ++f) {
    if (to_long(next()) != 3) throw ParseError("only triangle faces are supported");
    for (int k = 0; k < 3; ++k) faces[f][k] = static_cast<int>(to_long(next()));
  }
  if (pos != tokens.size()) throw ParseError("trailing data after OFF faces");
  return assemble(std::move(positions), std::move(faces), dim, ext, ambient);
}

Mesh parse_obj(std::string_view text, std::optional<AmbientKind> ambient) {
  Extensions ext;
  std::vector<Vec4> positions;
  std::vector<Mesh::Face> faces;
  int dim = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      parse_extension(std::string_view(line).substr(hash), ext);
      line.resize(hash);
    }
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      const int n = static_cast<int>(tok.size()) - 1;
      if (n != 3 && n != 4) throw ParseError("vertex record needs 3 or 4 coordinates");
      if (dim != 0 && dim != n) throw ParseError("mixed vertex coordinate dimensions");
      dim = n;
      Vec4 p = Vec4::Zero();
      for (int c = 0; c < n; ++c) p[c] = to_double(tok[1 + c]);
      positions.push_back(p);
    } else if (tok[0] == "f") {
      if (tok.size() != 4) throw ParseError("only triangle faces are supported");
      Mesh::Face fc{};
      for (int k = 0; k < 3; ++k) {
        const std::string idx = tok[1 + k].substr(0, tok[1 + k].find('/'));
        long i = to_long(idx);
        i = i < 0 ? static_cast<long>(positions.size()) + i : i - 1;
        fc[k] = static_cast<int>(i);
      }
      faces.push_back(fc);
    }
  }
  if (dim == 0) throw ParseError("OBJ has no vertices");
  return assemble(std::move(positions), std::move(faces), dim, ext, ambient);
}

MeshFile read_mesh(const std::filesystem::path& path, std::optional<AmbientKind> ambient) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::optional<AmbientKind> declared;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const auto hash = line.find('#');
      if (hash == std::string::npos) continue;
      const auto tok = split_ws(std::string_view(line).substr(hash + 1));
      if (tok.size() == 2 && tok[0] == "ambient") declared = parse_ambient_kind(tok[1]);
    }
  }

  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (ext == ".obj") return {parse_obj(text, ambient), declared};
  return {parse_off(text, ambient), declared};
}

Mesh load_mesh(const std::filesystem::path& path, std::optional<AmbientKind> ambient) {
  return read_mesh(path, ambient).mesh;
}

std::string format_off(const Mesh& mesh) {
  const int dim = chart_dimension(mesh.ambient());
  std::string out;
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
  };

  out += dim == 4 ? "4OFF\n" : "OFF\n";
  out += "# ambient ";
  out += to_string(mesh.ambient());
  out += "\n";
  if (mesh.ambient() == AmbientKind::FlatTorus3) {
    out += "# lattice";
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        out += ' ';
        num(mesh.lattice()(r, c));
      }
    out += "\n";
    std::map<std::pair<int, int>, Shift> written;
    for (const auto& e : mesh.edges()) {
      auto [it, inserted] = written.emplace(std::make_pair(e.v0, e.v1), e.shift);
      if (!inserted && it->second != e.shift)
        throw Error("two edges between vertices " + std::to_string(e.v0) + " and " +
                    std::to_string(e.v1) + " carry different shifts; not representable in OFF");
      if (!inserted || e.shift.isZero()) continue;
      out += "# shift " + std::to_string(e.v0) + " " + std::to_string(e.v1) + " " +
             std::to_string(e.shift[0]) + " " + std::to_string(e.shift[1]) + " " +
             std::to_string(e.shift[2]) + "\n";
    }
  }
  out += std::to_string(mesh.num_vertices()) + " " + std::to_string(mesh.num_faces()) + " " +
         std::to_string(mesh.num_edges()) + "\n";
  for (const auto& p : mesh.positions()) {
    for (int c = 0; c < dim; ++c) {
      if (c) out += ' ';
      num(p[c]);
    }
    out += '\n';
  }
  for (const auto& f : mesh.faces())
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
  return out;
}

void write_off(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << format_off(mesh);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace kindex
