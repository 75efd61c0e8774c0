#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "polygreen/reporting.hpp"

using namespace polygreen;

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::config_invalid:
    case ErrorCode::spec_mismatch:
    case ErrorCode::dimension_out_of_range:
    case ErrorCode::invalid_parity:
      return 2;
    default:
      return 1;
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_invalid, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::config_invalid, "config parse error: " + std::string(e.what()));
  }
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::io_failure, "write failed for '" + path + "'");
}

struct CommonOpts {
  std::string config_path;
  int count = -1;
  long seed = -1;
  std::string out_dir;
};

RunConfig make_config(const CommonOpts& opts) {
  json j = load_json_file(opts.config_path);
  if (opts.count > 0) j["samples"]["count"] = opts.count;
  if (opts.seed >= 0) j["samples"]["seed"] = double(opts.seed);
  if (!opts.out_dir.empty()) j["output_dir"] = opts.out_dir;
  return parse_run_config(j);
}

VerificationRun make_run(const RunConfig& cfg, bool regular) {
  VerificationRun run;
  run.domain = cfg.domain;
  run.params = cfg.dimension_params();
  run.grid_levels = cfg.grid_levels;
  run.plan = cfg.plan;
  run.specs = cfg.bounds.empty()
                  ? admissible_bound_specs(run.params, regular, 1)
                  : cfg.bounds;
  run.lhs = cfg.lhs;
  run.exclusion_factor = cfg.exclusion_factor;
  run.y_cluster = cfg.y_cluster;
  run.backend = cfg.backend;
  return run;
}

int run_verify(const CommonOpts& opts, bool regular) {
  RunConfig cfg = make_config(opts);
  VerificationRun run = make_run(cfg, regular);
  for (const auto& s : run.specs)
    if (bound_target_is_regular(s.target) != regular)
      throw Error(ErrorCode::config_invalid,
                  std::string("bounds: expected ") +
                      (regular ? "regular-part" : "Green-function") + " targets");
  auto reports = regular ? verify_regular_part(run) : verify_green_estimates(run);

  json extra;
  if (run.lhs == LhsSource::solver) {
    double h = run.grid_levels.front();
    auto sym = verify_symmetry_and_sign(run.domain, run.params, h, 4,
                                        run.plan.seed + 1, run.backend);
    extra["symmetry"] = {{"max_asymmetry_rel", sym.max_asymmetry_rel},
                         {"min_green_value", sym.min_green_value},
                         {"symmetric", sym.symmetric}};
  }
  auto files = write_reports(reports, cfg.output_dir, cfg.raw, extra);
  bool pass = true;
  for (const auto& r : reports) pass = pass && r.refinement_stable && r.all_finite();
  if (extra.contains("symmetry")) pass = pass && extra["symmetry"]["symmetric"].get<bool>();
  for (const auto& r : reports)
    std::cerr << (r.refinement_stable && r.all_finite() ? "[pass] " : "[FAIL] ")
              << r.spec.label()
              << " sup_ratio=" << format_g17(r.estimated_constant) << "\n";
  return pass ? 0 : 1;
}

int run_counterexample(int m, int n, int kmin, int kmax, std::vector<double> energy_levels,
                       const std::string& out) {
  CounterexampleReport rep = verify_counterexample(m, n, kmin, kmax, energy_levels);
  json j = counterexample_report_to_json(rep);
  if (!out.empty()) write_json(j, out + "/counterexample.json");
  bool energy_ok = true;
  for (size_t i = 1; i < rep.energy_levels.size(); ++i) {
    double q = rep.energy_levels[i] / rep.energy_levels[i - 1];
    energy_ok = energy_ok && q > 0.5 && q < 2.0;
  }
  std::cerr << (rep.bounded_check ? "[pass] " : "[FAIL] ")
            << "critical-gradient bounded (variation "
            << format_g17(rep.grad_lambda_variation) << ")\n"
            << (rep.unbounded_check ? "[pass] " : "[FAIL] ")
            << "next-order growth exponent " << format_g17(rep.grad_plus1_exponent)
            << "\n"
            << (rep.gap_check ? "[pass] " : "[FAIL] ") << "directional gap "
            << format_g17(rep.directional_gap) << "\n"
            << (rep.support_check ? "[pass] " : "[FAIL] ")
            << "source supported in the annulus\n";
  if (!rep.energy_levels.empty())
    std::cerr << (energy_ok ? "[pass] " : "[FAIL] ") << "energy grid-stable\n";
  return (rep.bounded_check && rep.unbounded_check && rep.gap_check &&
          rep.support_check && energy_ok)
             ? 0
             : 1;
}

int run_decay(const CommonOpts& opts) {
  RunConfig cfg = make_config(opts);
  DimensionParams params = cfg.dimension_params();
  CounterRng rng(cfg.plan.seed, 13);
  Point anchor = cfg.domain->sample_interior(rng);
  Point Q = exterior_point_near_boundary(*cfg.domain, anchor, cfg.exterior_offset);
  json summary;
  summary["version"] = kVersion;
  summary["config"] = cfg.raw;
  bool pass = true;
  const int lam = params.lambda;
  if (cfg.decay_mode == "interior" || cfg.decay_mode == "both") {
    DecayReport rep = verify_interior_decay(cfg.domain, params, Q, cfg.decay_R,
                                            cfg.grid_levels, cfg.backend);
    bool ok = rep.stable && rep.weight_selfcheck_error <= 1e-12 &&
              rep.shell_exponent >= lam - 0.3;
    summary["interior"] = decay_report_to_json(rep);
    summary["interior"]["pass"] = ok;
    std::cerr << (ok ? "[pass] " : "[FAIL] ") << "interior decay (shell exponent "
              << format_g17(rep.shell_exponent) << ")\n";
    pass = pass && ok;
  }
  if (cfg.decay_mode == "infinity" || cfg.decay_mode == "both") {
    DecayReport rep = verify_decay_at_infinity(cfg.domain, params, Q, cfg.decay_r,
                                               cfg.grid_levels, cfg.backend);
    // the estimate is one-sided: the measured decay may only be at least as
    // fast as predicted (clamped boundary decay usually dominates)
    double predicted = -(lam + params.n - 2.0 * params.m);
    bool ok = rep.stable && rep.fitted_far_exponent <= predicted + 0.3;
    summary["infinity"] = decay_report_to_json(rep);
    summary["infinity"]["pass"] = ok;
    std::cerr << (ok ? "[pass] " : "[FAIL] ") << "far-field decay (fitted exponent "
              << format_g17(rep.fitted_far_exponent) << ")\n";
    pass = pass && ok;
  }
  summary["pass"] = pass;
  write_json(summary, cfg.output_dir + "/decay.json");
  return pass ? 0 : 1;
}

int run_dirichlet(const CommonOpts& opts) {
  RunConfig cfg = make_config(opts);
  DimensionParams params = cfg.dimension_params();
  CounterRng rng(cfg.plan.seed, 19);
  auto bump_term = [&](int order_cap) {
    Point c = cfg.domain->sample_interior(rng);
    double rho = 0.6 * cfg.domain->distance_to_boundary(c);
    int ord = int(rng.next_below(uint64_t(order_cap + 1)));
    DataTerm t;
    t.alpha = MultiIndex::unit(params.n, int(rng.next_below(uint64_t(params.n))), ord);
    t.f = [c, rho](const Point& x) {
      double s = dist(x, c) / rho;
      if (s >= 1.0) return 0.0;
      double w = 1.0 - s * s;
      return w * w * w * w * w * w;
    };
    return t;
  };
  json sets = json::array();
  bool pass = true;
  for (int set = 0; set < 3; ++set) {
    std::vector<DataTerm> data;
    data.push_back(bump_term(0));  // always one plain term
    if (params.lambda >= 1 && set >= 1) data.push_back(bump_term(std::min(params.lambda, 1)));
    DirichletBoundReport rep =
        verify_dirichlet_bound(cfg.domain, params, data, cfg.grid_levels, cfg.backend);
    bool finite = true;
    for (double v : rep.sup_ratio) finite = finite && std::isfinite(v) && v > 0;
    bool ok = rep.stable && finite && rep.linearity_drift <= 1e-9;
    json js = dirichlet_report_to_json(rep);
    js["pass"] = ok;
    sets.push_back(js);
    std::cerr << (ok ? "[pass] " : "[FAIL] ") << "data set " << set
              << " sup ratio=" << format_g17(rep.sup_ratio.back())
              << " linearity drift=" << format_g17(rep.linearity_drift) << "\n";
    pass = pass && ok;
  }
  json summary;
  summary["version"] = kVersion;
  summary["config"] = cfg.raw;
  summary["sets"] = sets;
  summary["pass"] = pass;
  write_json(summary, cfg.output_dir + "/dirichlet.json");
  return pass ? 0 : 1;
}

int run_hardy(const CommonOpts& opts) {
  RunConfig cfg = make_config(opts);
  HardyReport rep =
      verify_hardy(cfg.domain, cfg.m, cfg.hardy_trials, cfg.plan.seed, cfg.grid_levels);
  json summary;
  summary["version"] = kVersion;
  summary["config"] = cfg.raw;
  summary["hardy"] = hardy_report_to_json(rep);
  bool pass = rep.stable;
  for (double v : rep.max_ratio) pass = pass && std::isfinite(v) && v > 0;
  summary["pass"] = pass;
  write_json(summary, cfg.output_dir + "/hardy.json");
  std::cerr << (pass ? "[pass] " : "[FAIL] ") << "Hardy max ratio "
            << format_g17(rep.max_ratio.back()) << "\n";
  return pass ? 0 : 1;
}

int run_green_dump(const CommonOpts& opts) {
  RunConfig cfg = make_config(opts);
  if (cfg.grid_levels.empty())
    throw Error(ErrorCode::config_invalid, "grid_levels: need one level");
  if (cfg.source_point.size() != size_t(cfg.n))
    throw Error(ErrorCode::config_invalid, "source_point: expected n coordinates");
  DimensionParams params = cfg.dimension_params();
  auto grid = GridSpec::make(cfg.domain, cfg.grid_levels.front());
  DiscreteOperator op = assemble_operator(grid, cfg.m, cfg.backend);
  Point y(cfg.n);
  for (int d = 0; d < cfg.n; ++d) y[d] = cfg.source_point[d];
  GreenColumn col = discrete_green(op, y);
  DiscreteField s = regular_part(col, params, cfg.domain->diameter());
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  dump_field(col.field, cfg.output_dir + "/green.bin");
  dump_field(s, cfg.output_dir + "/regular.bin");
  csv_slice(col.field, cfg.output_dir + "/green_slice.csv");
  csv_slice(s, cfg.output_dir + "/regular_slice.csv");
  json summary;
  summary["version"] = kVersion;
  summary["config"] = cfg.raw;
  summary["snap_distance"] = col.snap_distance;
  summary["source"] = std::vector<double>(
      {col.y[0], col.y[1], cfg.n == 3 ? col.y[2] : 0.0});
  write_json(summary, cfg.output_dir + "/green.json");
  return 0;
}

int run_fundsol(int m, int n, double diam, double r_single, double rmin, double rmax,
                int count, const std::string& alpha_str, const std::string& out_path) {
  DimensionParams params = DimensionParams::make(m, n);
  MultiIndex alpha = MultiIndex::zero(n);
  if (!alpha_str.empty()) {
    std::stringstream ss(alpha_str);
    std::string tok;
    int d = 0;
    while (std::getline(ss, tok, ',') && d < n) alpha.comps[d++] = std::stoi(tok);
  }
  std::vector<double> rs;
  if (r_single > 0)
    rs.push_back(r_single);
  else {
    if (rmin <= 0 || rmax <= rmin || count < 2)
      throw Error(ErrorCode::config_invalid, "need --r or valid --rmin/--rmax/--count");
    for (int k = 0; k < count; ++k)
      rs.push_back(rmin + (rmax - rmin) * k / (count - 1));
  }
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw Error(ErrorCode::io_failure, "cannot open '" + out_path + "'");
    os = &file;
  }
  bool with_deriv = alpha.order() > 0;
  *os << (with_deriv ? "r,value,derivative\n" : "r,value\n");
  for (double r : rs) {
    Point x(n);
    x[0] = r;
    std::string line = format_g17(r) + "," + format_g17(gamma_eval(params, x, diam));
    if (with_deriv)
      line += "," + format_g17(gamma_derivative(params, alpha, MultiIndex::zero(n), x, diam));
    *os << line << "\n";
  }
  return 0;
}

int run_merge(const std::vector<std::string>& inputs, const std::string& out) {
  json merged;
  merged["version"] = kVersion;
  json runs = json::array();
  bool pass = true;
  for (const auto& dir : inputs) {
    for (const char* name : {"summary.json", "decay.json", "dirichlet.json",
                             "hardy.json", "counterexample.json"}) {
      std::string path = dir + "/" + name;
      std::ifstream in(path);
      if (!in) continue;
      json j;
      try {
        in >> j;
      } catch (const std::exception&) {
        throw Error(ErrorCode::io_failure, "unreadable report '" + path + "'");
      }
      json entry;
      entry["source"] = path;
      entry["report"] = j;
      runs.push_back(entry);
      if (j.contains("pass")) pass = pass && j["pass"].get<bool>();
    }
  }
  if (runs.empty())
    throw Error(ErrorCode::config_invalid, "no reports found in the given directories");
  merged["runs"] = runs;
  merged["pass"] = pass;
  write_json(merged, out);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polygreen: polyharmonic Green function estimates at desk scale"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--count", opts.count, "override samples.count");
    cmd->add_option("--seed", opts.seed, "override samples.seed");
    cmd->add_option("--out", opts.out_dir, "override output_dir");
  };

  auto* c_vg = app.add_subcommand("verify-green", "Green-function estimate checks");
  add_common(c_vg);
  auto* c_vr = app.add_subcommand("verify-regular", "regular-part estimate checks");
  add_common(c_vr);
  auto* c_decay = app.add_subcommand("decay", "interior and far-field decay checks");
  add_common(c_decay);
  auto* c_db = app.add_subcommand("dirichlet-bound", "Dirichlet data-to-gradient bound");
  add_common(c_db);
  auto* c_hardy = app.add_subcommand("hardy", "Hardy inequality sampling");
  add_common(c_hardy);
  auto* c_green = app.add_subcommand("green", "compute and dump G_h and its regular part");
  add_common(c_green);

  int ce_m = 2, ce_n = 3, kmin = 2, kmax = 12;
  std::vector<double> ce_energy;
  std::string ce_out;
  auto* c_ce = app.add_subcommand("counterexample", "sharpness construction checks");
  c_ce->add_option("--m", ce_m, "operator order")->required();
  c_ce->add_option("--n", ce_n, "dimension (odd)")->required();
  c_ce->add_option("--kmin", kmin, "smallest dyadic shell exponent");
  c_ce->add_option("--kmax", kmax, "largest dyadic shell exponent");
  c_ce->add_option("--energy-levels", ce_energy, "grid levels for the energy check")
      ->delimiter(',');
  c_ce->add_option("--out", ce_out, "output directory");

  int fs_m = 1, fs_n = 3, fs_count = 0;
  double fs_diam = 2.0, fs_r = -1, fs_rmin = -1, fs_rmax = -1;
  std::string fs_alpha, fs_out;
  auto* c_fs = app.add_subcommand("fundsol", "fundamental solution along a ray");
  c_fs->add_option("--m", fs_m)->required();
  c_fs->add_option("--n", fs_n)->required();
  c_fs->add_option("--diam", fs_diam, "log base for even dimensions");
  c_fs->add_option("--r", fs_r, "single radius");
  c_fs->add_option("--rmin", fs_rmin);
  c_fs->add_option("--rmax", fs_rmax);
  c_fs->add_option("--count", fs_count);
  c_fs->add_option("--alpha", fs_alpha, "derivative multi-index, comma separated");
  c_fs->add_option("--out", fs_out, "CSV path (default stdout)");

  std::vector<std::string> merge_inputs;
  std::string merge_out = "merged.json";
  auto* c_rep = app.add_subcommand("report", "merge run outputs into one summary");
  c_rep->add_option("dirs", merge_inputs, "report directories")->required();
  c_rep->add_option("--out", merge_out, "merged summary path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_vg->parsed()) return run_verify(opts, false);
    if (c_vr->parsed()) return run_verify(opts, true);
    if (c_decay->parsed()) return run_decay(opts);
    if (c_db->parsed()) return run_dirichlet(opts);
    if (c_hardy->parsed()) return run_hardy(opts);
    if (c_green->parsed()) return run_green_dump(opts);
    if (c_ce->parsed()) return run_counterexample(ce_m, ce_n, kmin, kmax, ce_energy, ce_out);
    if (c_fs->parsed())
      return run_fundsol(fs_m, fs_n, fs_diam, fs_r, fs_rmin, fs_rmax, fs_count, fs_alpha,
                         fs_out);
    if (c_rep->parsed()) return run_merge(merge_inputs, merge_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
