#pragma once

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "walshgraph/walshgraph.hpp"

namespace walshgraph::cli {

// =============================================================================
// Command line
// =============================================================================
//
// Subcommands: contract, simulate, verify {renewal, laplace, convergence,
// martingale}, report. Exit codes: 0 when the command (and any checks it
// runs) succeeded, 1 when a verification check failed, 2 for usage, schema,
// or validation errors. Output files go to --out-dir, which defaults to the
// WALSHGRAPH_OUT environment variable, then to the working directory.

namespace detail {

inline std::vector<Real> parse_real_list(const std::string& text, const char* what) {
  std::vector<Real> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw Error(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw Error(std::string(what) + ": empty list");
  return out;
}

/// "vertex:3" or "edge:2:0.75".
inline Position parse_position(const std::string& text) {
  std::stringstream ss(text);
  std::string kind, a, b;
  std::getline(ss, kind, ':');
  if (kind == "vertex") {
    std::getline(ss, a);
    return Position::at_vertex(std::stoi(a));
  }
  if (kind == "edge") {
    std::getline(ss, a, ':');
    std::getline(ss, b);
    return Position::on_edge(std::stoi(a), std::stod(b));
  }
  throw Error("position must be 'vertex:ID' or 'edge:ID:COORD', got '" + text + "'");
}

inline std::string output_path(const std::string& out_dir, const std::string& name) {
  if (name.empty() || name.front() == '/') return name;
  if (out_dir.empty() || out_dir == ".") return name;
  return out_dir + "/" + name;
}

inline void emit(const std::string& out_dir, const std::string& file, const std::string& text) {
  if (file.empty() || file == "-")
    std::cout << text;
  else
    write_text_file(output_path(out_dir, file), text);
}

}  // namespace detail

struct CommonOptions {
  std::string out_dir;
  std::uint64_t seed = kDefaultSeed;
};

// -----------------------------------------------------------------------------
// contract
// -----------------------------------------------------------------------------

inline int cmd_contract(const std::string& graph_file, const std::string& out,
                        const CommonOptions& common) {
  const GraphFamily family = parse_graph(read_text_file(graph_file));
  const ContractedGraph contracted = contract(family);
  detail::emit(common.out_dir, out, contraction_report_json(contracted).dump(2) + "\n");
  return 0;
}

// -----------------------------------------------------------------------------
// simulate
// -----------------------------------------------------------------------------

struct SimulateOptions {
  std::string graph_file;
  Real eps = 1.0;
  std::string x0 = "";
  Real horizon = 1.0;
  SimConfig config;
  std::size_t n = 1;
  std::string summary_file;
  std::string trajectory_file;  // CSV; empty = do not write paths
};

inline int cmd_simulate(const SimulateOptions& opt, const CommonOptions& common) {
  const GraphFamily family = parse_graph(read_text_file(opt.graph_file));
  const MetricGraph graph = instantiate(family, opt.eps);
  const Position x0 =
      opt.x0.empty() ? Position::at_vertex(family.vertices.front()) : detail::parse_position(opt.x0);
  SimConfig cfg = opt.config;
  cfg.seed = common.seed;
  const Ensemble ens = batch(graph, x0, opt.horizon, cfg, opt.n);

  // Endpoint summary: occupation per edge, coordinate moments per edge.
  std::map<EdgeId, std::size_t> counts;
  std::map<EdgeId, Real> sum, sum_sq;
  std::size_t at_vertex = 0;
  for (const Trajectory& tr : ens.trajectories) {
    const Position& p = tr.positions.back();
    if (p.is_vertex()) {
      ++at_vertex;
    } else {
      ++counts[p.edge];
      sum[p.edge] += p.coordinate;
      sum_sq[p.edge] += p.coordinate * p.coordinate;
    }
  }
  nlohmann::json summary;
  summary["graph"] = opt.graph_file;
  summary["eps"] = opt.eps;
  summary["horizon"] = opt.horizon;
  summary["n"] = opt.n;
  summary["dt"] = cfg.dt;
  summary["seed"] = cfg.seed;
  summary["vertex_fraction"] = Real(at_vertex) / Real(opt.n);
  summary["edges"] = nlohmann::json::array();
  for (const auto& [edge, c] : counts) {
    nlohmann::json je;
    je["edge"] = edge;
    je["fraction"] = Real(c) / Real(opt.n);
    const Real mean = sum[edge] / Real(c);
    je["coordinate_mean"] = mean;
    je["coordinate_var"] = sum_sq[edge] / Real(c) - mean * mean;
    summary["edges"].push_back(std::move(je));
  }
  detail::emit(common.out_dir, opt.summary_file, summary.dump(2) + "\n");

  if (!opt.trajectory_file.empty()) {
    std::ostringstream csv;
    csv << "trajectory,time,kind,id,coordinate\n";
    for (std::size_t i = 0; i < ens.trajectories.size(); ++i) {
      const Trajectory& tr = ens.trajectories[i];
      for (std::size_t j = 0; j < tr.times.size(); ++j) {
        const Position& p = tr.positions[j];
        csv << i << ',' << format_real(tr.times[j]) << ',';
        if (p.is_vertex())
          csv << "vertex," << p.vertex << ",0";
        else
          csv << "edge," << p.edge << ',' << format_real(p.coordinate);
        csv << '\n';
      }
    }
    write_text_file(detail::output_path(common.out_dir, opt.trajectory_file), csv.str());
  }
  return 0;
}

// -----------------------------------------------------------------------------
// verify renewal
// -----------------------------------------------------------------------------

struct RenewalOptions {
  std::string graph_file;
  std::vector<Real> lambdas{0.5, 1.0, 2.0};
  std::vector<Real> eps{1e-2, 1e-3, 1e-4, 1e-5};
  VertexId source = -1;  // -1: first vertex owning a ray
  EdgeId ray = -1;
  Real min_order = 0.9;
  std::string csv_file;
};

inline int cmd_verify_renewal(const RenewalOptions& opt, const CommonOptions& common) {
  const GraphFamily family = parse_graph(read_text_file(opt.graph_file));
  VertexId source = opt.source;
  EdgeId ray = opt.ray;
  if (ray < 0) {
    for (const Edge& e : family.edges)
      if (e.is_ray() && (source < 0 || e.origin == source)) {
        ray = e.id;
        source = e.origin;
        break;
      }
    if (ray < 0) throw Error("verify renewal: the graph has no ray to observe");
  }
  if (source < 0) source = family.edge(ray).origin;

  std::vector<RenewalRow> rows;
  bool pass = true;
  for (Real lambda : opt.lambdas) {
    const Real limit = renewal_limit(family, source, ray, lambda);
    std::vector<Real> worst_errors;
    for (Real eps : opt.eps) {
      const RenewalSystem sys = renewal_build(family, eps, lambda, source, ray);
      const std::vector<Real> u = renewal_solve(sys);
      Real worst = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        RenewalRow row;
        row.eps = eps;
        row.lambda = lambda;
        row.vertex = sys.vertices[i];
        row.u = u[i];
        row.limit = limit;
        row.abs_error = std::abs(u[i] - limit);
        worst = std::max(worst, row.abs_error);
        rows.push_back(row);
      }
      worst_errors.push_back(worst);
    }
    for (std::size_t i = 1; i < worst_errors.size(); ++i)
      if (!(worst_errors[i] < worst_errors[i - 1])) pass = false;
    if (worst_errors.size() >= 2 && worst_errors.back() > 1e-14) {
      if (fit_log_log_slope(opt.eps, worst_errors) < opt.min_order) pass = false;
    }
  }
  detail::emit(common.out_dir, opt.csv_file, renewal_csv(rows));
  return pass ? 0 : 1;
}

// -----------------------------------------------------------------------------
// verify laplace
// -----------------------------------------------------------------------------

struct LaplaceOptions {
  std::vector<Real> weights{1.0};
  std::vector<Real> marks{1.0};
  Real lambda = 1.0;
  std::size_t n = 100000;
  SimConfig config;
  std::string json_file;
};

inline int cmd_verify_laplace(const LaplaceOptions& opt, const CommonOptions& common) {
  StarGraph star{opt.weights, opt.marks};
  SimConfig cfg = opt.config;
  cfg.seed = common.seed;
  const LaplaceMcRecord rec = laplace_mc_check(star, opt.lambda, opt.n, cfg);
  detail::emit(common.out_dir, opt.json_file, to_json(rec).dump(2) + "\n");
  return rec.pass ? 0 : 1;
}

// -----------------------------------------------------------------------------
// verify convergence
// -----------------------------------------------------------------------------

struct ConvergenceOptions {
  std::string graph_file;
  std::vector<Real> eps{0.25, 1.0 / 16.0, 1.0 / 64.0};
  std::vector<Real> times{1.0};
  Real horizon = 1.0;
  std::size_t n = 10000;
  SimConfig config;
  std::string x0;
  bool closed_form = false;
  std::string json_file;
};

inline int cmd_verify_convergence(const ConvergenceOptions& opt, const CommonOptions& common) {
  ExperimentSpec spec;
  spec.family = parse_graph(read_text_file(opt.graph_file));
  spec.eps_schedule = opt.eps;
  spec.horizon = opt.horizon;
  spec.observation_times = opt.times;
  spec.ensemble_size = opt.n;
  spec.seed = common.seed;
  spec.sim = opt.config;
  spec.sim.seed = common.seed;
  spec.reference = opt.closed_form ? ExperimentSpec::Reference::ClosedForm
                                   : ExperimentSpec::Reference::SimulatedLimit;
  spec.start = opt.x0.empty() ? Position::at_vertex(spec.family.vertices.front())
                              : detail::parse_position(opt.x0);
  const StatReport report = convergence_study(spec);
  detail::emit(common.out_dir, opt.json_file, to_json(report).dump(2) + "\n");
  return report.pass ? 0 : 1;
}

// -----------------------------------------------------------------------------
// verify martingale
// -----------------------------------------------------------------------------

struct MartingaleOptions {
  std::string graph_file;
  std::vector<Real> slopes;  // empty: automatic zero-flux slopes
  Real horizon = 1.0;
  std::size_t n = 100000;
  SimConfig config;
  std::string json_file;
};

inline int cmd_verify_martingale(const MartingaleOptions& opt, const CommonOptions& common) {
  GraphFamily family = parse_graph(read_text_file(opt.graph_file));
  if (family.vertices.size() > 1) family = contract(family).quotient;
  if (family.vertices.size() != 1)
    throw Error("verify martingale: the graph must be (or contract to) a single-vertex star");
  const MetricGraph graph = instantiate(family, 1.0);
  const VertexId center = family.vertices.front();
  const VertexStar vs = star_of(graph, center);
  const std::size_t rays = vs.star.ray_count();

  std::vector<Real> slopes = opt.slopes;
  if (slopes.empty()) {
    // Zero-flux slopes: 1 on every ray except the last, balanced there.
    slopes.assign(rays, 1.0);
    if (rays > 1) {
      Real acc = 0.0;
      for (std::size_t r = 0; r + 1 < rays; ++r) acc += vs.star.weights[r];
      if (!(vs.star.weights.back() > 0.0))
        throw Error("verify martingale: last ray needs positive weight for automatic slopes");
      slopes.back() = -acc / vs.star.weights.back();
    } else {
      slopes[0] = 0.0;
    }
  }
  if (slopes.size() != rays) throw Error("verify martingale: need one slope per ray");

  SimConfig cfg = opt.config;
  cfg.seed = common.seed;
  const TestFunction zero_flux = TestFunction::linear(slopes);
  const MartingaleRecord main_record =
      martingale_test(graph, Position::at_vertex(center), opt.horizon, cfg, opt.n, zero_flux);

  // Negative control: identity on every ray has flux 1 and must be flagged.
  SimConfig control_cfg = cfg;
  control_cfg.seed = cfg.seed + 1;
  const MartingaleRecord control = martingale_test(
      graph, Position::at_vertex(center), opt.horizon, control_cfg, opt.n,
      TestFunction::linear(std::vector<Real>(rays, 1.0)));

  nlohmann::json j;
  j["zero_flux"] = to_json(main_record);
  j["negative_control"] = to_json(control);
  const bool pass = !main_record.flagged && control.flagged;
  j["pass"] = pass;
  detail::emit(common.out_dir, opt.json_file, j.dump(2) + "\n");
  return pass ? 0 : 1;
}

// -----------------------------------------------------------------------------
// report
// -----------------------------------------------------------------------------

inline int cmd_report(const std::string& csv_file, const std::string& out,
                      const CommonOptions& common) {
  const auto rows = parse_renewal_csv(read_text_file(csv_file));
  const std::string svg = renewal_error_svg(rows);
  detail::emit(common.out_dir, out.empty() ? "renewal_error.svg" : out, svg);
  return 0;
}

// -----------------------------------------------------------------------------
// entry point
// -----------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args) {
  CLI::App app{"Diffusions on metric graphs: knot contraction, closed-form transforms,\n"
               "simulation, and verification suites."};
  app.require_subcommand(1);

  CommonOptions common;
  if (const char* env = std::getenv("WALSHGRAPH_OUT")) common.out_dir = env;
  app.add_option("--out-dir", common.out_dir, "Directory for output files");
  app.add_option("--seed", common.seed, "Master RNG seed (fixed default keeps runs reproducible)");

  // contract
  auto* contract_cmd = app.add_subcommand("contract", "Contract knots and report limiting weights");
  std::string contract_graph, contract_out;
  contract_cmd->add_option("graph", contract_graph, "Graph-spec JSON file")->required();
  contract_cmd->add_option("-o,--output", contract_out, "Report file (default: stdout)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate trajectories and summary statistics");
  SimulateOptions sim_opt;
  sim_cmd->add_option("graph", sim_opt.graph_file, "Graph-spec JSON file")->required();
  sim_cmd->add_option("--eps", sim_opt.eps, "Contraction scale (default 1)");
  sim_cmd->add_option("--x0", sim_opt.x0, "Start position: vertex:ID or edge:ID:COORD");
  sim_cmd->add_option("-T,--horizon", sim_opt.horizon, "Time horizon");
  sim_cmd->add_option("--dt", sim_opt.config.dt, "Base step");
  sim_cmd->add_option("--record-dt", sim_opt.config.record_dt, "Trajectory grid spacing");
  sim_cmd->add_option("-N,--trajectories", sim_opt.n, "Ensemble size");
  sim_cmd->add_option("--summary", sim_opt.summary_file, "Summary JSON file (default stdout)");
  sim_cmd->add_option("--paths", sim_opt.trajectory_file, "Optional trajectory CSV file");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Verification suites");
  verify_cmd->require_subcommand(1);

  auto* renewal_cmd = verify_cmd->add_subcommand(
      "renewal", "Deterministic renewal-system convergence to the contraction limit");
  RenewalOptions renewal_opt;
  std::string renewal_lambdas, renewal_eps;
  renewal_cmd->add_option("graph", renewal_opt.graph_file, "Graph-spec JSON file")->required();
  renewal_cmd->add_option("--lambda", renewal_lambdas, "Comma-separated lambda list");
  renewal_cmd->add_option("--eps", renewal_eps, "Comma-separated scale list (decreasing)");
  renewal_cmd->add_option("--source", renewal_opt.source, "Start vertex (default: ray origin)");
  renewal_cmd->add_option("--ray", renewal_opt.ray, "Observed ray edge id (default: first ray)");
  renewal_cmd->add_option("--min-order", renewal_opt.min_order, "Required log-log slope");
  renewal_cmd->add_option("--csv", renewal_opt.csv_file, "CSV output (default stdout)");

  auto* laplace_cmd =
      verify_cmd->add_subcommand("laplace", "Monte Carlo cross-check of first-passage transforms");
  LaplaceOptions laplace_opt;
  std::string laplace_weights, laplace_marks;
  laplace_cmd->add_option("--weights", laplace_weights, "Ray weights, comma separated");
  laplace_cmd->add_option("--marks", laplace_marks, "Mark distances on the first rays");
  laplace_cmd->add_option("--lambda", laplace_opt.lambda, "Transform parameter");
  laplace_cmd->add_option("-N,--trajectories", laplace_opt.n, "Sample size");
  laplace_cmd->add_option("--dt", laplace_opt.config.dt, "Base step");
  laplace_cmd->add_option("--json", laplace_opt.json_file, "JSON output (default stdout)");

  auto* conv_cmd = verify_cmd->add_subcommand(
      "convergence", "Occupation and marginal convergence across a scale schedule");
  ConvergenceOptions conv_opt;
  std::string conv_eps, conv_times;
  conv_cmd->add_option("graph", conv_opt.graph_file, "Graph-spec JSON file")->required();
  conv_cmd->add_option("--eps", conv_eps, "Comma-separated scale schedule (decreasing)");
  conv_cmd->add_option("--times", conv_times, "Observation times");
  conv_cmd->add_option("-T,--horizon", conv_opt.horizon, "Time horizon");
  conv_cmd->add_option("-N,--trajectories", conv_opt.n, "Ensemble size");
  conv_cmd->add_option("--dt", conv_opt.config.dt, "Base step");
  conv_cmd->add_option("--x0", conv_opt.x0, "Start position (default: first vertex)");
  conv_cmd->add_flag("--closed-form", conv_opt.closed_form,
                     "Compare against the half-normal closed form");
  conv_cmd->add_option("--json", conv_opt.json_file, "JSON output (default stdout)");

  auto* mart_cmd =
      verify_cmd->add_subcommand("martingale", "Martingale statistic with negative control");
  MartingaleOptions mart_opt;
  std::string mart_slopes;
  mart_cmd->add_option("graph", mart_opt.graph_file, "Star graph (or one that contracts to one)")
      ->required();
  mart_cmd->add_option("--slopes", mart_slopes, "Per-ray slopes of the linear test function");
  mart_cmd->add_option("-T,--horizon", mart_opt.horizon, "Time horizon");
  mart_cmd->add_option("-N,--trajectories", mart_opt.n, "Ensemble size");
  mart_cmd->add_option("--dt", mart_opt.config.dt, "Base step");
  mart_cmd->add_option("--json", mart_opt.json_file, "JSON output (default stdout)");

  // report
  auto* report_cmd = app.add_subcommand("report", "Render an error-vs-scale SVG from a renewal CSV");
  std::string report_csv, report_out;
  report_cmd->add_option("csv", report_csv, "CSV produced by 'verify renewal'")->required();
  report_cmd->add_option("-o,--output", report_out, "SVG file (default renewal_error.svg)");

  std::vector<std::string> argv_storage;
  argv_storage.push_back("walshgraph");
  for (const std::string& a : args) argv_storage.push_back(a);
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*contract_cmd) return cmd_contract(contract_graph, contract_out, common);
    if (*sim_cmd) {
      sim_opt.config.seed = common.seed;
      return cmd_simulate(sim_opt, common);
    }
    if (*renewal_cmd) {
      if (!renewal_lambdas.empty())
        renewal_opt.lambdas = detail::parse_real_list(renewal_lambdas, "--lambda");
      if (!renewal_eps.empty()) renewal_opt.eps = detail::parse_real_list(renewal_eps, "--eps");
      return cmd_verify_renewal(renewal_opt, common);
    }
    if (*laplace_cmd) {
      if (!laplace_weights.empty())
        laplace_opt.weights = detail::parse_real_list(laplace_weights, "--weights");
      if (!laplace_marks.empty())
        laplace_opt.marks = detail::parse_real_list(laplace_marks, "--marks");
      return cmd_verify_laplace(laplace_opt, common);
    }
    if (*conv_cmd) {
      if (!conv_eps.empty()) conv_opt.eps = detail::parse_real_list(conv_eps, "--eps");
      if (!conv_times.empty()) conv_opt.times = detail::parse_real_list(conv_times, "--times");
      return cmd_verify_convergence(conv_opt, common);
    }
    if (*mart_cmd) {
      if (!mart_slopes.empty())
        mart_opt.slopes = detail::parse_real_list(mart_slopes, "--slopes");
      return cmd_verify_martingale(mart_opt, common);
    }
    if (*report_cmd) return cmd_report(report_csv, report_out, common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace walshgraph::cli
