#include "polygreen/reporting.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace polygreen {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json domain_to_json(const Domain& d) {
  json j;
  j["kind"] = domain_kind_name(d.kind());
  j["dim"] = d.dim();
  const auto& p = d.params();
  switch (d.kind()) {
    case DomainKind::unit_ball: break;
    case DomainKind::punctured_ball: j["epsilon"] = p[0]; break;
    case DomainKind::annulus:
      j["r_in"] = p[0];
      j["r_out"] = p[1];
      break;
    case DomainKind::ellipse:
      j["a"] = p[0];
      j["b"] = p[1];
      break;
    case DomainKind::rectangle: j["sides"] = p; break;
    case DomainKind::l_shape:
      j["a"] = p[0];
      j["b"] = p[1];
      break;
  }
  return j;
}

namespace {

double need_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number())
    throw Error(ErrorCode::config_invalid, path + "." + key + ": expected a number");
  return j[key].get<double>();
}

}  // namespace

std::shared_ptr<const Domain> domain_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw Error(ErrorCode::config_invalid, "domain: expected an object with 'kind'");
  DomainKind kind = domain_kind_from_name(j["kind"].get<std::string>());
  int dim = j.value("dim", 2);
  switch (kind) {
    case DomainKind::unit_ball:
      return std::make_shared<Domain>(Domain::unit_ball(dim));
    case DomainKind::punctured_ball:
      return std::make_shared<Domain>(
          Domain::punctured_ball(dim, j.value("epsilon", 0.0)));
    case DomainKind::annulus:
      return std::make_shared<Domain>(Domain::annulus(
          dim, need_number(j, "r_in", "domain"), need_number(j, "r_out", "domain")));
    case DomainKind::ellipse:
      return std::make_shared<Domain>(
          Domain::ellipse(need_number(j, "a", "domain"), need_number(j, "b", "domain")));
    case DomainKind::rectangle: {
      if (!j.contains("sides") || !j["sides"].is_array())
        throw Error(ErrorCode::config_invalid, "domain.sides: expected an array");
      return std::make_shared<Domain>(
          Domain::rectangle(j["sides"].get<std::vector<double>>()));
    }
    case DomainKind::l_shape:
      return std::make_shared<Domain>(
          Domain::l_shape(need_number(j, "a", "domain"), need_number(j, "b", "domain")));
  }
  throw Error(ErrorCode::config_invalid, "domain.kind: unknown kind");
}

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  cfg.raw = j;
  if (!j.is_object())
    throw Error(ErrorCode::config_invalid, "config: expected a JSON object");
  if (!j.contains("domain"))
    throw Error(ErrorCode::config_invalid, "domain: missing");
  cfg.domain = domain_from_json(j["domain"]);
  cfg.m = int(need_number(j, "m", "config"));
  cfg.n = int(need_number(j, "n", "config"));
  if (cfg.m < 1) throw Error(ErrorCode::config_invalid, "m: must be >= 1");
  try {
    lambda_order(cfg.m, cfg.n);
  } catch (const Error& e) {
    throw Error(ErrorCode::config_invalid, std::string("n: ") + e.what());
  }
  if (cfg.n != cfg.domain->dim())
    throw Error(ErrorCode::config_invalid, "n: does not match domain.dim");

  if (j.contains("grid_levels")) {
    if (!j["grid_levels"].is_array())
      throw Error(ErrorCode::config_invalid, "grid_levels: expected an array");
    cfg.grid_levels = j["grid_levels"].get<std::vector<double>>();
    for (size_t i = 0; i < cfg.grid_levels.size(); ++i)
      if (cfg.grid_levels[i] <= 0)
        throw Error(ErrorCode::config_invalid,
                    "grid_levels[" + std::to_string(i) + "]: must be positive");
  }
  if (j.contains("samples")) {
    const json& s = j["samples"];
    cfg.plan.count = int(s.value("count", 100.0));
    cfg.plan.seed = uint64_t(s.value("seed", 0.0));
    cfg.plan.min_sep = s.value("min_sep", 0.0);
    if (cfg.plan.count < 1)
      throw Error(ErrorCode::config_invalid, "samples.count: must be >= 1");
    if (cfg.plan.min_sep < 0)
      throw Error(ErrorCode::config_invalid, "samples.min_sep: must be >= 0");
  }
  if (j.contains("classifier_n")) {
    double N = need_number(j, "classifier_n", "config");
    try {
      cfg.plan.classifier = RegionClassifier::make(N);
    } catch (const Error& e) {
      throw Error(ErrorCode::config_invalid, std::string("classifier_n: ") + e.what());
    }
  }
  DimensionParams params = cfg.dimension_params();
  if (j.contains("bounds")) {
    if (!j["bounds"].is_array())
      throw Error(ErrorCode::config_invalid, "bounds: expected an array");
    int idx = 0;
    for (const json& b : j["bounds"]) {
      BoundSpec spec;
      spec.target = bound_target_from_name(b.value("target", ""));
      spec.i = int(b.value("i", 0.0));
      spec.j = int(b.value("j", 0.0));
      try {
        spec.validate(params);
      } catch (const Error& e) {
        throw Error(ErrorCode::config_invalid,
                    "bounds[" + std::to_string(idx) + "]: " + e.what());
      }
      cfg.bounds.push_back(spec);
      ++idx;
    }
  }
  if (j.contains("lhs_source"))
    cfg.lhs = lhs_source_from_name(j["lhs_source"].get<std::string>());
  cfg.exclusion_factor = j.value("exclusion_factor", 8.0);
  cfg.y_cluster = int(j.value("y_cluster", 0.0));
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.backend = DiscreteOperator::Backend::automatic;
  if (j.contains("backend")) {
    std::string b = j["backend"].get<std::string>();
    if (b == "direct")
      cfg.backend = DiscreteOperator::Backend::direct;
    else if (b == "multigrid")
      cfg.backend = DiscreteOperator::Backend::multigrid;
    else if (b != "automatic")
      throw Error(ErrorCode::config_invalid,
                  "backend: expected automatic|direct|multigrid");
  }
  if (j.contains("decay")) {
    const json& d = j["decay"];
    cfg.decay_R = d.value("R", 0.2);
    cfg.decay_r = d.value("r", 0.3);
    cfg.exterior_offset = d.value("offset", 1e-3);
    cfg.decay_mode = d.value("mode", std::string("both"));
    if (cfg.decay_mode != "interior" && cfg.decay_mode != "infinity" &&
        cfg.decay_mode != "both")
      throw Error(ErrorCode::config_invalid, "decay.mode: interior|infinity|both");
  }
  if (j.contains("hardy")) cfg.hardy_trials = int(j["hardy"].value("trials", 50.0));
  if (j.contains("source_point"))
    cfg.source_point = j["source_point"].get<std::vector<double>>();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_invalid, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::config_invalid, "config parse error: " + std::string(e.what()));
  }
  return parse_run_config(j);
}

namespace {

void write_csv(const EstimateReport& rep, size_t level, const std::string& path, int dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
  std::string header;
  for (int d = 0; d < dim; ++d) header += "x" + std::to_string(d) + ",";
  for (int d = 0; d < dim; ++d) header += "y" + std::to_string(d) + ",";
  header += "d_x,d_y,sep,region,lhs,rhs,ratio\n";
  out << header;
  for (const auto& r : rep.level_records[level]) {
    std::string line;
    for (int d = 0; d < dim; ++d) line += format_g17(r.x[d]) + ",";
    for (int d = 0; d < dim; ++d) line += format_g17(r.y[d]) + ",";
    line += format_g17(r.d_x) + "," + format_g17(r.d_y) + "," + format_g17(r.sep) + "," +
            region_case_name(r.region) + "," + format_g17(r.lhs) + "," +
            format_g17(r.rhs) + "," + format_g17(r.ratio) + "\n";
    out << line;
  }
  if (!out) throw Error(ErrorCode::io_failure, "write failed for '" + path + "'");
}

}  // namespace

json estimate_report_to_json(const EstimateReport& rep) {
  json j;
  j["target"] = bound_target_name(rep.spec.target);
  j["i"] = rep.spec.i;
  j["j"] = rep.spec.j;
  j["refinement_stable"] = rep.refinement_stable;
  j["estimated_constant"] = rep.estimated_constant;
  j["all_finite"] = rep.all_finite();
  json levels = json::array();
  for (const auto& st : rep.levels) {
    json l;
    l["h"] = st.h;
    l["sup_ratio_overall"] = st.sup_overall;
    l["records"] = st.total;
    json by_region;
    const char* names[3] = {"I", "II", "III"};
    for (int c = 0; c < 3; ++c) {
      json rc;
      rc["count"] = st.count[c];
      rc["sup_ratio"] = st.sup_ratio[c];
      by_region[names[c]] = rc;
    }
    l["regions"] = by_region;
    levels.push_back(l);
  }
  j["levels"] = levels;
  return j;
}

std::vector<std::string> write_reports(const std::vector<EstimateReport>& reports,
                                       const std::string& dir, const json& config_echo,
                                       const json& extra) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::string> files;
  int dim = config_echo.contains("domain") ? config_echo["domain"].value("dim", 2) : 2;
  json summary;
  summary["version"] = kVersion;
  summary["config"] = config_echo;
  if (!extra.is_null() && !extra.empty()) summary["extra"] = extra;
  json specs = json::array();
  bool pass = true;
  for (const auto& rep : reports) {
    for (size_t l = 0; l < rep.level_records.size(); ++l) {
      std::string path = dir + "/" + rep.spec.label() + "_L" + std::to_string(l) + ".csv";
      write_csv(rep, l, path, dim);
      files.push_back(path);
    }
    specs.push_back(estimate_report_to_json(rep));
    pass = pass && rep.refinement_stable && rep.all_finite();
  }
  summary["specs"] = specs;
  summary["pass"] = pass;
  std::string spath = dir + "/summary.json";
  std::ofstream out(spath, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + spath + "'");
  out << summary.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::io_failure, "write failed for '" + spath + "'");
  files.push_back(spath);
  return files;
}

json counterexample_report_to_json(const CounterexampleReport& rep) {
  json j;
  j["m"] = rep.m;
  j["n"] = rep.n;
  j["lambda"] = rep.lambda;
  j["kappa"] = rep.kappa;
  j["shell_radii"] = rep.shell_radii;
  j["sup_grad_lambda"] = rep.sup_grad_lambda;
  j["sup_grad_lambda_plus1"] = rep.sup_grad_lambda_plus1;
  j["grad_lambda_variation"] = rep.grad_lambda_variation;
  j["grad_plus1_exponent"] = rep.grad_plus1_exponent;
  j["directional_gap"] = rep.directional_gap;
  j["residual_inside_plateau"] = rep.residual_inside_plateau;
  j["source_outside_annulus"] = rep.source_outside_annulus;
  j["source_sup_annulus"] = rep.source_sup_annulus;
  j["energy_levels"] = rep.energy_levels;
  j["bounded_check"] = rep.bounded_check;
  j["unbounded_check"] = rep.unbounded_check;
  j["gap_check"] = rep.gap_check;
  j["support_check"] = rep.support_check;
  return j;
}

json decay_report_to_json(const DecayReport& rep) {
  json j;
  j["grid_levels"] = rep.grid_levels;
  j["c_pointwise"] = rep.c_pointwise;
  j["c_sphere"] = rep.c_sphere;
  j["weight_selfcheck_error"] = rep.weight_selfcheck_error;
  j["shell_exponent"] = rep.shell_exponent;
  j["fitted_far_exponent"] = rep.fitted_far_exponent;
  j["stable"] = rep.stable;
  j["notes"] = rep.notes;
  return j;
}

json dirichlet_report_to_json(const DirichletBoundReport& rep) {
  json j;
  j["grid_levels"] = rep.grid_levels;
  j["sup_ratio"] = rep.sup_ratio;
  j["lp_constant"] = rep.lp_constant;
  j["linearity_drift"] = rep.linearity_drift;
  j["stable"] = rep.stable;
  return j;
}

json hardy_report_to_json(const HardyReport& rep) {
  json j;
  j["grid_levels"] = rep.grid_levels;
  j["max_ratio"] = rep.max_ratio;
  j["stable"] = rep.stable;
  return j;
}

}  // namespace polygreen
