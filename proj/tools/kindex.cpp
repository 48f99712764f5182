// kindex: Morse index and nullity of closed minimal surfaces, with the
// harmonic-field certificate for Ind + Null >= ceil(g / 3).

#include "kindex/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace kindex;

void add_generator_options(CLI::App* cmd, GeneratorSpec& spec) {
  cmd->add_option("--nu", spec.nu, "clifford: grid size in u")->capture_default_str();
  cmd->add_option("--nv", spec.nv, "clifford: grid size in v")->capture_default_str();
  cmd->add_option("--subdiv", spec.subdiv, "sphere generators: icosphere subdivisions")->capture_default_str();
  cmd->add_option("--n", spec.n, "flat-torus: grid size")->capture_default_str();
  cmd->add_option("--normal-axis", spec.normal_axis, "flat-torus: normal axis 0, 1 or 2")->capture_default_str();
  cmd->add_option("--radius", spec.radius, "round-sphere: radius")->capture_default_str();
  cmd->add_option("--resolution", spec.resolution, "schwarz-p: grid resolution")->capture_default_str();
  cmd->add_option_function<std::vector<double>>(
         "--lattice",
         [&spec](const std::vector<double>& v) { spec.lattice_diagonal = Vec3(v[0], v[1], v[2]); },
         "flat-torus: diagonal of the lattice")
      ->expected(3);
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morse index, nullity and Killing-frame certificates for closed minimal surfaces"};
  app.require_subcommand(1);

  GeneratorSpec gen;
  std::string out_path;
  auto* generate = app.add_subcommand("generate", "Write a generated surface as extended OFF");
  generate->add_option("name", gen.name, "clifford | equatorial-sphere | flat-torus | round-sphere | schwarz-p")
      ->required();
  generate->add_option("-o,--output", out_path, "output path (default: stdout)");
  add_generator_options(generate, gen);

  AnalysisOptions opts;
  std::string input_path, ambient_name, json_path, csv_path, harmonic_csv;
  bool no_timestamp = false;
  GeneratorSpec agen;
  auto add_analysis = [&](CLI::App* cmd) {
    cmd->add_option("input", input_path, "OFF or OBJ mesh");
    cmd->add_option("--generator", agen.name, "analyze a generated surface instead of a file");
    add_generator_options(cmd, agen);
    cmd->add_option("--ambient", ambient_name, "euclidean3 | sphere3 | flattorus3 (overrides the file)");
    cmd->add_option("--eigs", opts.eigs, "eigenpairs to compute (doubled while truncated)")->capture_default_str();
    cmd->add_option_function<double>("--tol-zero", [&](double v) { opts.tol_zero = v; },
                                     "zero band for eigenvalue counts");
    cmd->add_option("--harmonic-tol", opts.harmonic_tol, "closed/co-closed residual tolerance")->capture_default_str();
    cmd->add_option("--lemma2-tol", opts.lemma2_tol, "largest accepted integral identity mismatch")->capture_default_str();
    cmd->add_option_function<double>("--minimality-tol", [&](double v) { opts.minimality_tol = v; },
                                     "largest |H| (or H spread) accepted");
    cmd->add_flag("--cmc", opts.cmc, "mean-zero spectrum and the constant mean curvature bound");
    cmd->add_option_function<int>("--force-k", [&](int k) { opts.force_k = k; }, "diagnostic: override k");
    cmd->add_option("--json", json_path, "write the JSON report ('-' for stdout)");
    cmd->add_option("--csv", csv_path, "write the spectrum as CSV");
    cmd->add_option("--harmonic-csv", harmonic_csv, "write the harmonic basis to PREFIX_edges.csv and PREFIX_faces.csv");
    cmd->add_flag("--no-timestamp", no_timestamp, "omit the timestamp for byte-identical reports");
  };
  auto* analyze_cmd = app.add_subcommand("analyze", "Spectrum, harmonic basis, identities and certificate");
  add_analysis(analyze_cmd);
  auto* certify_cmd = app.add_subcommand("certify", "Certificate only");
  add_analysis(certify_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      const GeneratorOutput g = run_generator(gen);
      const std::string text = format_off(g.mesh);
      write_text(out_path.empty() ? "-" : out_path, text);
      if (!out_path.empty())
        std::cerr << g.name << ": " << g.mesh.num_vertices() << " vertices, " << g.mesh.num_faces() << " faces\n";
      return kExitPass;
    }

    std::optional<AnalysisInput> input;
    if (!agen.name.empty() && !input_path.empty()) throw PreconditionError("give either an input file or --generator");
    if (!agen.name.empty()) {
      if (!ambient_name.empty()) throw PreconditionError("--ambient applies to file input only");
      input = input_from_generator(agen);
    } else if (!input_path.empty()) {
      std::optional<AmbientKind> ambient;
      if (!ambient_name.empty()) {
        try {
          ambient = parse_ambient_kind(ambient_name);
        } catch (const Error& e) {
          throw PreconditionError(e.what());
        }
      }
      input = input_from_file(input_path, ambient);
    } else {
      throw PreconditionError("an input file or --generator is required");
    }
    opts.timestamp = !no_timestamp;
    if (opts.eigs < 1) throw PreconditionError("--eigs must be positive");

    const RunResult r = analyze_cmd->parsed() ? analyze(*input, opts) : certify(*input, opts);
    if (!json_path.empty()) write_text(json_path, r.report.dump(2) + "\n");
    if (!csv_path.empty() && !r.spectrum_csv.empty()) write_text(csv_path, r.spectrum_csv);
    if (!harmonic_csv.empty()) write_harmonic_csv(*input, opts.harmonic_tol, harmonic_csv);
    if (json_path != "-") {
      const auto& rep = r.report;
      const auto& t = rep["topology"];
      std::cout << "V=" << t["vertices"] << " E=" << t["edges"] << " F=" << t["faces"] << " chi="
                << t["euler_characteristic"] << " genus=" << t["genus"] << "\n";
      if (rep.contains("spectrum") && rep["spectrum"].contains("index"))
        std::cout << "index=" << rep["spectrum"]["index"] << " nullity=" << rep["spectrum"]["nullity"]
                  << " tol_zero=" << rep["spectrum"]["tol_zero"] << "\n";
      if (rep.contains("cmc_spectrum"))
        std::cout << "mean-zero index=" << rep["cmc_spectrum"]["index"]
                  << " nullity=" << rep["cmc_spectrum"]["nullity"] << "\n";
      if (rep.contains("certificate") && rep["certificate"].contains("verdict") && r.headline.rfind("certificate:", 0) != 0)
        std::cout << "certificate: " << rep["certificate"]["verdict"].get<std::string>() << "\n";
      std::cout << r.headline << "\n";
    }
    return r.exit_code;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResolutionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const ValidationError& e) {
    std::cerr << "error: invalid mesh\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
