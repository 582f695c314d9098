// Command-line front end: one subcommand per pipeline, JSON reports on stdout or --out.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htype/reports.hpp"

namespace {

using htype::io::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string group_file;
  std::string out;
  std::string csv;
  std::vector<std::string> points;
  std::string field = "gaussian:base=1,amp=0.5,width=1";
  int k = 1;
  int mult = 1;
  int samples = 100;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int calib_fields = 10;
  int grid = 16;
  double period = 1.0;
  int max_iters = 2000;
  double rel_tol = 1e-10;
  int order = 2;
  std::optional<double> c;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw htype::InvalidArgument("cannot write '" + path + "'");
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<htype::GroupPoint> points_or_samples(const Options& o, const htype::HTypeGroup& g) {
  std::vector<htype::GroupPoint> pts;
  for (const auto& s : o.points) pts.push_back(htype::io::parse_point(s, g.n2(), g.k()));
  if (pts.empty()) pts = htype::sample_points(g, o.samples, o.seed);
  return pts;
}

json points_config(const Options& o) {
  json a = json::array();
  for (const auto& p : o.points) a.push_back(p);
  return a;
}

int emit(const json& report, const Options& o) {
  write_text(o.out, dump(report));
  return report.at("pass").get<bool>() ? kExitPass : kExitFail;
}

int run(const std::string& command, const Options& o) {
  using namespace htype;
  if (command == "gen") {
    const CliffordModule m = build_generators(o.k, o.mult);
    json config{{"k", o.k}, {"mult", o.mult}, {"out", o.out}};
    if (o.out.empty() || o.out == "-") {
      std::cout << dump(io::group_to_json(m));
      return verify_clifford(m).pass ? kExitPass : kExitFail;
    }
    write_text(o.out, dump(io::group_to_json(m)));
    const json r = reports::report_verify(config, m, o.tol, o.seed);
    std::cout << dump(r);
    return r.at("pass").get<bool>() ? kExitPass : kExitFail;
  }

  const CliffordModule m = io::read_module(o.group_file);
  json config{{"group_file", o.group_file}, {"seed", o.seed}};
  if (command == "verify") {
    config["tol"] = o.tol;
    return emit(reports::report_verify(config, m, o.tol, o.seed), o);
  }
  if (command == "iwasawa") return emit(reports::report_iwasawa(config, m), o);
  if (command == "projectors") return emit(reports::report_projectors(config, m), o);

  const HTypeGroup g = HTypeGroup::from_module(m);
  config["samples"] = o.samples;
  if (command == "solution-check") return emit(reports::report_solution_check(config, g, o.samples, o.seed), o);
  if (command == "invert") {
    config["points"] = points_config(o);
    return emit(reports::report_invert(config, g, points_or_samples(o, g)), o);
  }
  if (command == "leakage") {
    config["points"] = points_config(o);
    std::vector<GroupPoint> extra;
    for (const auto& s : o.points) extra.push_back(io::parse_point(s, g.n2(), g.k()));
    return emit(reports::report_leakage(config, g, o.samples, o.seed, extra), o);
  }
  if (command == "sphere-check") return emit(reports::report_sphere_check(config, g, o.samples, o.seed), o);
  if (command == "curvature") {
    config["field"] = o.field;
    config["points"] = points_config(o);
    config["calibration_fields"] = o.calib_fields;
    const ScalarField u = io::parse_field(o.field, g, [&] { return calibrate_profile(g).c_g; });
    std::vector<GroupPoint> pts;
    for (const auto& s : o.points) pts.push_back(io::parse_point(s, g.n2(), g.k()));
    if (pts.empty()) pts = sample_points(g, std::min(o.samples, 20), o.seed);
    return emit(reports::report_curvature(config, g, u, pts, o.calib_fields, o.seed), o);
  }
  if (command == "yamabe") {
    YamabeOptions opt;
    opt.max_iters = o.max_iters;
    opt.tol = o.rel_tol;
    config["grid"] = o.grid;
    config["periods"] = o.period;
    config["max_iters"] = o.max_iters;
    config["tol"] = o.rel_tol;
    config["order"] = o.order;
    double c = 0.0;
    std::string source;
    if (o.c) {
      c = *o.c;
      source = "option";
    } else {
      const ConnectionEngine engine(g);
      c = calibrate_conformal_constant(engine, reports::calibration_fields(g, 4, o.seed), sample_points(g, 3, o.seed)).c;
      source = "calibrated";
    }
    config["C"] = o.c ? json(*o.c) : json(nullptr);
    const reports::YamabeRun run = reports::report_yamabe(config, g, o.grid, o.period, opt, o.seed, c, source, o.order);
    std::string csv_path = o.csv;
    if (csv_path.empty() && !o.out.empty() && o.out != "-") {
      csv_path = o.out;
      const auto dot = csv_path.rfind('.');
      csv_path = (dot == std::string::npos ? csv_path : csv_path.substr(0, dot)) + ".csv";
    }
    if (!csv_path.empty()) write_text(csv_path, run.csv);
    return emit(run.report, o);
  }
  throw CLI::ValidationError("unknown subcommand '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Groups of Heisenberg type: construction, identities, connection, curvature, Yamabe quotients"};
  app.set_version_flag("--version", std::string(htype::reports::kToolVersion));
  app.require_subcommand(1);
  Options o;

  auto group_cmd = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("group", o.group_file, "Group file (module JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Report path (default stdout)");
    sub->add_option("--seed", o.seed, "Random seed");
    return sub;
  };

  CLI::App* gen = app.add_subcommand("gen", "Build a Clifford module and write it as a group file");
  gen->add_option("--k", o.k, "Center dimension")->required()->check(CLI::PositiveNumber);
  gen->add_option("--mult", o.mult, "Multiplicity")->check(CLI::PositiveNumber);
  gen->add_option("--out", o.out, "Group file path (default stdout)");

  group_cmd("verify", "Check the Clifford relations")->add_option("--tol", o.tol, "Residual tolerance");
  group_cmd("iwasawa", "Classify Iwasawa type");
  group_cmd("solution-check", "Calibrate the extremal profile and check the critical equation")
      ->add_option("--samples", o.samples, "Quasi-random sample count");
  for (const char* name : {"invert", "leakage"}) {
    CLI::App* sub = group_cmd(name, std::string(name) == "invert" ? "Spherical inversion" : "Horizontal leakage of the inversion");
    sub->add_option("--point", o.points, "Point 'x1,..,x2n;t1,..,tk' (repeatable)");
    sub->add_option("--samples", o.samples, "Quasi-random sample count");
  }
  group_cmd("sphere-check", "Chart transition of the Iwasawa sphere")->add_option("--samples", o.samples, "Sample count");
  group_cmd("projectors", "Sigma and Xi projectors");
  CLI::App* curv = group_cmd("curvature", "Scalar curvature of u^{4/(Q-2)} g and the conformal formula");
  curv->add_option("--field", o.field, "Field u (constant, gaussian, poly, exppoly, random, gv, product)");
  curv->add_option("--point", o.points, "Point 'x1,..,x2n;t1,..,tk' (repeatable)");
  curv->add_option("--samples", o.samples, "Sample count when no point is given (capped at 20)");
  curv->add_option("--calib-fields", o.calib_fields, "Random fields used to calibrate C")->check(CLI::PositiveNumber);
  CLI::App* yam = group_cmd("yamabe", "Minimize the Yamabe quotient on the flat coordinate torus");
  yam->add_option("--grid", o.grid, "Resolution per coordinate")->check(CLI::PositiveNumber);
  yam->add_option("--periods", o.period, "Period per coordinate")->check(CLI::PositiveNumber);
  yam->add_option("--max-iters", o.max_iters, "Iteration cap")->check(CLI::NonNegativeNumber);
  yam->add_option("--tol", o.rel_tol, "Relative decrease over 20 steps that stops the run");
  yam->add_option("--order", o.order, "Stencil order (2 or 4)")->check(CLI::IsMember({2, 4}));
  yam->add_option("--C", o.c, "Conformal constant (default: calibrated)");
  yam->add_option("--csv", o.csv, "Convergence log path (default: --out with .csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const htype::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const htype::InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const htype::Error& e) {
    json r = htype::reports::envelope(command, json{{"group_file", o.group_file}});
    r["error"] = e.what();
    r["pass"] = false;
    write_text(o.out, dump(r));
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
