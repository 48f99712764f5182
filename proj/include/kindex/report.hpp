#pragma once

#include "kindex/ambient.hpp"
#include "kindex/generators.hpp"
#include "kindex/geometry.hpp"
#include "kindex/mesh.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace kindex {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kExitPass = 0,
  kExitFail = 1,
  kExitUsage = 2,
  kExitInsufficient = 3,
  kExitError = 4,
};

struct GeneratorSpec {
  /// clifford | equatorial-sphere | flat-torus | round-sphere | schwarz-p
  std::string name;
  int nu = 32;
  int nv = 32;
  int subdiv = 4;
  int n = 32;
  int normal_axis = 2;
  Vec3 lattice_diagonal = Vec3::Ones();
  double radius = 1.0;
  int resolution = 32;
};

/// Throws PreconditionError for an unknown name or out-of-range parameters.
GeneratorOutput run_generator(const GeneratorSpec& spec);
Json generator_parameters(const GeneratorSpec& spec);

/// A surface ready for analysis together with a description of where it came from.
struct AnalysisInput {
  Json description;
  Mesh mesh;
  AmbientSpace ambient;
  SurfaceGeometry geometry;
  std::optional<SpectralOracle> oracle;
  std::optional<SpectralOracle> cmc_oracle;
  bool approximate = false;
};

AnalysisInput input_from_generator(const GeneratorSpec& spec);
/// Geometry is estimated from the mesh.
AnalysisInput input_from_file(const std::filesystem::path& path, std::optional<AmbientKind> ambient = {});

struct AnalysisOptions {
  int eigs = 20;
  std::optional<double> tol_zero;
  double harmonic_tol = 1e-8;
  bool cmc = false;
  std::optional<int> force_k;
  bool timestamp = true;
  double lemma2_tol = 0.1;
  std::optional<double> minimality_tol;
};

struct RunResult {
  Json report;
  /// Fixed header: spectrum,k,eigenvalue,residual,oracle
  std::string spectrum_csv;
  std::string headline;
  int exit_code = kExitPass;
};

/// Full pipeline: topology, geometry, spectrum, harmonic basis, frame
/// identities, certificate and the bound check.
RunResult analyze(const AnalysisInput& input, const AnalysisOptions& options);

/// Certificate only; the spectrum is computed just far enough for the
/// moment constraints.
RunResult certify(const AnalysisInput& input, const AnalysisOptions& options);

/// "Ind+Null = n ≥ ⌈g/3⌉ = m: PASS" (or the mean-zero variant with `cmc`).
std::string bound_line(bool cmc, int count, int genus);

/// Writes the harmonic basis of the input as <prefix>_edges.csv and <prefix>_faces.csv.
void write_harmonic_csv(const AnalysisInput& input, double harmonic_tol, const std::filesystem::path& prefix);

}  // namespace kindex
