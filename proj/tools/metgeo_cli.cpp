// metgeo: distances, bounds and convergence diagnostics for semimetric
// fields on the discretized flat torus.  See README.md for the file formats
// and the CSV columns each subcommand emits.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "metgeo/convergence.hpp"
#include "metgeo/distances.hpp"
#include "metgeo/field_io.hpp"
#include "metgeo/torus_examples.hpp"

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ThetaArgs {
  std::string file_a, file_b, mask_path;
  int budget = 0;
};

int run_theta(const ThetaArgs& args) {
  const metgeo::SemimetricField a = metgeo::read_field(args.file_a);
  const metgeo::SemimetricField b = metgeo::read_field(args.file_b);
  std::optional<metgeo::CellMask> region;
  if (!args.mask_path.empty()) region = metgeo::read_mask(args.mask_path, a.n_cells());

  metgeo::ThetaOptions opts = metgeo::ThetaOptions::field_budget();
  if (args.budget > 0) {
    opts = metgeo::ThetaOptions::standard();
    opts.max_iterations = args.budget;
  }
  const metgeo::ThetaFieldResult r = metgeo::theta_Y(a, b, region, opts);

  double lo = 0.0, hi = 0.0, sum = 0.0;
  std::size_t counted = 0;
  for (double t : r.cell_theta) {
    if (t == 0.0) continue;  // cells outside the region or coincident
    if (counted == 0) lo = hi = t;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
    sum += t;
    ++counted;
  }
  std::cout << "theta_Y," << fmt(r.value) << "\n";
  std::cout << "cells_in_region," << r.cells_in_region << "\n";
  std::cout << "boundary_routed," << r.boundary_routed << "\n";
  std::cout << "cell_theta_min," << fmt(counted ? lo : 0.0) << "\n";
  std::cout << "cell_theta_mean," << fmt(counted ? sum / counted : 0.0) << "\n";
  std::cout << "cell_theta_max," << fmt(counted ? hi : 0.0) << "\n";
  std::cout << "converged," << (r.all_converged ? 1 : 0) << "\n";
  return r.all_converged ? 0 : 3;
}

struct DBoundsArgs {
  std::string file_a, file_b;
  int budget = 0;
};

int run_dbounds(const DBoundsArgs& args) {
  const metgeo::SemimetricField a = metgeo::read_field(args.file_a);
  const metgeo::SemimetricField b = metgeo::read_field(args.file_b);
  metgeo::DBoundOptions opts;
  if (args.budget > 0) opts.max_iterations = args.budget;
  const metgeo::DBoundResult r = metgeo::d_bounds(a, b, opts);
  std::cout << "lower," << fmt(r.lower) << "\n";
  std::cout << "upper," << fmt(r.upper) << "\n";
  std::cout << "gap," << fmt(r.gap()) << "\n";
  std::cout << "lower_volume," << fmt(r.lower_volume) << "\n";
  std::cout << "lower_eq32," << fmt(r.lower_eq32) << "\n";
  std::cout << "upper_candidate," << r.upper_candidate << "\n";
  std::cout << "iterations," << r.iterations << "\n";
  std::cout << "witness_nodes," << r.witness.nodes.size() << "\n";
  std::cout << "converged," << (r.converged ? 1 : 0) << "\n";
  return r.converged ? 0 : 3;
}

struct ClassifyArgs {
  std::string manifest_path, limit_path;
  std::vector<double> eps_grid;
  double tol_meas = -1.0, tol_vol = -1.0;
};

int run_classify(const ClassifyArgs& args) {
  const metgeo::SequenceManifest manifest = metgeo::read_manifest(args.manifest_path);
  metgeo::MetricSequence seq;
  for (const std::string& term : manifest.terms) seq.terms.push_back(metgeo::read_field(term));
  if (!args.limit_path.empty()) {
    seq.limit_candidate = metgeo::read_field(args.limit_path);
  } else if (manifest.limit) {
    seq.limit_candidate = metgeo::read_field(*manifest.limit);
  }

  metgeo::ClassifyOptions opts;
  if (!args.eps_grid.empty()) opts.eps_grid = args.eps_grid;
  opts.tol_meas = args.tol_meas;
  opts.tol_vol = args.tol_vol;
  const metgeo::ConvergenceReport rep = metgeo::classify_d_convergence(seq, opts);

  std::cout << "term";
  for (double eps : rep.eps_grid) std::cout << ",in_measure_eps_" << fmt(eps);
  std::cout << ",uniform_measure,l1_density";
  if (!rep.theta_gaps.empty()) std::cout << ",theta";
  std::cout << "\n";
  for (std::size_t k = 0; k < seq.terms.size(); ++k) {
    std::cout << k;
    for (double gap : rep.in_measure_gaps[k]) std::cout << "," << fmt(gap);
    std::cout << "," << fmt(rep.uniform_measure_gaps[k]) << "," << fmt(rep.l1_density_gaps[k]);
    if (!rep.theta_gaps.empty()) std::cout << "," << fmt(rep.theta_gaps[k]);
    std::cout << "\n";
  }
  std::cout << "tol_meas," << fmt(rep.tol_meas) << "\n";
  std::cout << "tol_vol," << fmt(rep.tol_vol) << "\n";
  std::cout << "verdict," << metgeo::verdict_name(rep.verdict) << "\n";
  std::cout << "rationale," << rep.rationale << "\n";
  return 0;
}

struct Example1Args {
  std::string probe, out_path;
  std::vector<int> ks{2, 4, 8};
  int res = 256;
};

int run_example1(const Example1Args& args) {
  const metgeo::ProbeResult r = metgeo::example1_probe(args.probe, args.ks, args.res);
  std::ostringstream csv;
  csv << "k," << r.quantity << "\n";
  for (std::size_t i = 0; i < r.ks.size(); ++i)
    csv << r.ks[i] << "," << fmt(r.values[i]) << "\n";
  csv << "flat," << fmt(r.flat_value) << "\n";
  csv << "diverging," << (r.diverging ? 1 : 0) << "\n";
  if (args.out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(args.out_path);
    if (!out) throw metgeo::IoError("cannot write '" + args.out_path + "'");
    out << csv.str();
  }
  return 0;
}

struct GenArgs {
  std::string kind, out_path;
  int res = 64;
  int k = 4;
  double scale = 1.0;
  unsigned long long seed = 0;
  std::string format = "text";
};

int run_gen(const GenArgs& args) {
  metgeo::DomainPtr dom = metgeo::make_grid(2, {args.res, args.res});
  std::optional<metgeo::SemimetricField> field;
  if (args.kind == "flat") {
    metgeo::SymTensor a(2);
    a[0] = args.scale;
    a[1] = 0.0;
    a[2] = args.scale;
    field = metgeo::SemimetricField::constant(dom, a);
  } else if (args.kind == "zero") {
    field = metgeo::SemimetricField::zero(dom);
  } else if (args.kind == "cusp") {
    field = metgeo::cusp_metric(dom, args.k);
  } else if (args.kind == "inj") {
    field = metgeo::inj_metric(dom, args.k);
  } else if (args.kind == "random") {
    // Random amenable field: per cell R(phi) diag(l0, l1) R(phi)^T with
    // eigenvalues in [1/2, 2].
    std::mt19937_64 rng(args.seed);
    std::uniform_real_distribution<double> angle(0.0, 3.141592653589793);
    std::uniform_real_distribution<double> eig(0.5, 2.0);
    field = metgeo::SemimetricField::build(dom, [&](int, int, double, double) {
      const double phi = angle(rng), l0 = eig(rng), l1 = eig(rng);
      const double c = std::cos(phi), s = std::sin(phi);
      metgeo::SymTensor a(2);
      a[0] = c * c * l0 + s * s * l1;
      a[1] = c * s * (l0 - l1);
      a[2] = s * s * l0 + c * c * l1;
      return a;
    });
  } else {
    throw metgeo::InvalidArgumentError("gen: unknown kind '" + args.kind +
                                       "' (flat, zero, cusp, inj, random)");
  }
  const metgeo::FileFormat format =
      args.format == "binary" ? metgeo::FileFormat::binary : metgeo::FileFormat::text;
  metgeo::write_field(*field, args.out_path, format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distances and convergence diagnostics for metric fields on the flat torus"};
  app.require_subcommand(1);

  ThetaArgs theta_args;
  CLI::App* theta = app.add_subcommand("theta", "Theta_Y between two field files");
  theta->add_option("fileA", theta_args.file_a, "first field file")->required();
  theta->add_option("fileB", theta_args.file_b, "second field file")->required();
  theta->add_option("--mask", theta_args.mask_path, "region mask file (JSON 0/1 array)");
  theta->add_option("--budget", theta_args.budget,
                    "per-cell refinement iterations (0 = fast candidate estimates)");

  DBoundsArgs dbounds_args;
  CLI::App* dbounds = app.add_subcommand("dbounds", "two-sided bounds on the L2 distance d");
  dbounds->add_option("fileA", dbounds_args.file_a, "first field file")->required();
  dbounds->add_option("fileB", dbounds_args.file_b, "second field file")->required();
  dbounds->add_option("--budget", dbounds_args.budget, "optimizer iterations per stage");

  ClassifyArgs classify_args;
  CLI::App* classify = app.add_subcommand("classify", "Theorem-1 convergence classifier");
  classify->add_option("manifest", classify_args.manifest_path,
                       "sequence manifest (JSON {\"terms\": [...], \"limit\": ...})")
      ->required();
  classify->add_option("limit", classify_args.limit_path,
                       "limit field file (overrides the manifest's limit)");
  classify->add_option("--eps-grid", classify_args.eps_grid, "in-measure eps grid")
      ->delimiter(',');
  classify->add_option("--tol-meas", classify_args.tol_meas,
                       "in-measure tolerance (default 1e-2 * mu_g(M))");
  classify->add_option("--tol-vol", classify_args.tol_vol,
                       "volume-gap tolerance (default 1e-2 * mu_g(M))");

  Example1Args example1_args;
  CLI::App* example1 = app.add_subcommand("example1", "degenerating-family probes (CSV)");
  example1
      ->add_option("probe", example1_args.probe,
                   "one of: curvature, distance, diameter, injectivity")
      ->required();
  example1->add_option("--k", example1_args.ks, "family indices")->delimiter(',');
  example1->add_option("--res", example1_args.res, "grid resolution per axis");
  example1->add_option("--out", example1_args.out_path, "write CSV here instead of stdout");

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate a field file");
  gen->add_option("kind", gen_args.kind, "flat, zero, cusp, inj, random")->required();
  gen->add_option("--out", gen_args.out_path, "output path")->required();
  gen->add_option("--res", gen_args.res, "grid resolution per axis");
  gen->add_option("--k", gen_args.k, "family index for cusp/inj");
  gen->add_option("--scale", gen_args.scale, "scale factor for flat");
  gen->add_option("--seed", gen_args.seed, "RNG seed for random");
  gen->add_option("--format", gen_args.format, "text or binary")
      ->check(CLI::IsMember({"text", "binary"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are input errors
  }

  try {
    if (theta->parsed()) return run_theta(theta_args);
    if (dbounds->parsed()) return run_dbounds(dbounds_args);
    if (classify->parsed()) return run_classify(classify_args);
    if (example1->parsed()) return run_example1(example1_args);
    if (gen->parsed()) return run_gen(gen_args);
  } catch (const metgeo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
