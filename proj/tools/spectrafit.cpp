#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"

#include "spectrafit/error.hpp"
#include "spectrafit/fit.hpp"
#include "spectrafit/lse.hpp"
#include "spectrafit/metrics.hpp"
#include "spectrafit/modelselect.hpp"
#include "spectrafit/render.hpp"
#include "spectrafit/serialize.hpp"
#include "spectrafit/stats.hpp"

#ifndef SPECTRAFIT_VERSION
#define SPECTRAFIT_VERSION "dev"
#endif

using namespace spectrafit;

namespace {

struct Run {
  std::string command;
  Json config = Json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void output(const std::string& path, const std::string& text) {
    write_text(path, text);
    outputs.push_back(path);
  }
  void output(const std::string& path, const Json& j) { output(path, j.dump(2) + "\n"); }

  // One manifest per run, next to the first artifact.
  void finish() const {
    if (outputs.empty()) return;
    Json m;
    m["schema"] = kSchemaVersion;
    m["command"] = command;
    m["config"] = config;
    m["seeds"] = seeds;
    m["versions"] = {{"spectrafit", SPECTRAFIT_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                   "." + std::to_string(EIGEN_MINOR_VERSION)}};
    m["outputs"] = outputs;
    m["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(outputs.front() + ".manifest.json", m.dump(2) + "\n");
  }
};

[[noreturn]] void fail(int code, const std::string& kind, const std::string& message,
                       std::optional<double> residual = std::nullopt) {
  Json e{{"error", kind}, {"message", message}, {"exit_code", code}};
  if (residual) e["residual"] = *residual;
  std::cerr << e.dump() << std::endl;
  std::exit(code);
}

double parse_p(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInfinity;
  try {
    std::size_t used = 0;
    const double p = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return p;
  } catch (const std::exception&) {
    throw ValidationError("--p must be a number >= 1 or 'inf', got '" + s + "'");
  }
}

QuadratureSpec quadrature_for(int d, int nodes, std::uint64_t seed) {
  QuadratureSpec q = QuadratureSpec::defaults(d);
  q.seed = seed;
  if (nodes <= 0) return q;
  q.nodes = nodes;
  if (d == 2) {
    q.kind = QuadratureKind::Grid;
  } else if (d == 3 && icosphere_level(nodes) >= 0) {
    q.kind = QuadratureKind::Icosphere;
  } else {
    q.kind = QuadratureKind::MonteCarlo;
  }
  return q;
}

InitSpec parse_init(const std::string& s, double scale) {
  if (s == "default") return RandomDefaultInit{};
  if (s == "gaussian") return RandomGaussianInit{scale};
  if (s == "sphere") return RandomSphereInit{scale};
  return ExplicitInit{read_model(s).map()};
}

struct FitFlags {
  int starts = 1;
  std::uint64_t seed = 0;
  std::optional<double> gamma;
  int max_iter = 500;
  double tol_obj = 1e-10;
  double tol_map = 1e-8;
  std::string init = "default";
  double init_scale = 0.0;

  void add(CLI::App* app) {
    app->add_option("--starts", starts, "independent random starts")->capture_default_str();
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_option("--gamma", gamma, "Tikhonov weight (default 1e-6 mean(y^2))");
    app->add_option("--max-iter", max_iter)->capture_default_str();
    app->add_option("--tol-obj", tol_obj)->capture_default_str();
    app->add_option("--tol-map", tol_map)->capture_default_str();
    app->add_option("--init", init, "default | gaussian | sphere | path to a model JSON")->capture_default_str();
    app->add_option("--init-scale", init_scale, "scale/radius for gaussian or sphere init (0 = data RMS)");
  }
  FitConfig config() const {
    FitConfig c;
    c.gamma = gamma;
    c.max_iter = max_iter;
    c.tol_obj = tol_obj;
    c.tol_map = tol_map;
    c.starts = starts;
    c.init = parse_init(init, init_scale);
    c.seed = seed;
    c.validate();
    return c;
  }
  Json echo() const {
    Json j{{"starts", starts}, {"seed", seed}, {"max_iter", max_iter}, {"tol_obj", tol_obj},
           {"tol_map", tol_map}, {"init", init}, {"init_scale", init_scale}};
    j["gamma"] = gamma ? Json(*gamma) : Json(nullptr);
    return j;
  }
};

void apply_thread_cap() {
  const char* env = std::getenv("SPECTRAFIT_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ValidationError("SPECTRAFIT_THREADS must be a positive integer, got '" + std::string(env) + "'");
  omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex set regression from support-function measurements"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPECTRAFIT_VERSION);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "sample noisy support-function measurements of a shape");
  std::string synth_shape, synth_out;
  int synth_n = 100;
  double synth_sigma = 0.0;
  std::uint64_t synth_seed = 0;
  synth_cmd->add_option("--shape", synth_shape, "l1ball:d | l2ball:d | linfball:d | gon:q | racetrack | upillow | threediscs | mesh:path")->required();
  synth_cmd->add_option("--n", synth_n)->capture_default_str();
  synth_cmd->add_option("--sigma", synth_sigma)->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "CSV path (stdout if omitted)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit A(C) to measurements by alternating minimization");
  std::string fit_lift, fit_data, fit_out, fit_runs;
  FitFlags fit_flags;
  fit_cmd->add_option("--lift", fit_lift, "simplex:q | spectraplex:p | blocks:p1,p2,...")->required();
  fit_cmd->add_option("--data", fit_data, "measurement CSV")->required();
  fit_cmd->add_option("--out", fit_out, "model JSON path (stdout if omitted)");
  fit_cmd->add_option("--runs", fit_runs, "optional JSON with every start's model");
  fit_flags.add(fit_cmd);

  // lse
  auto* lse_cmd = app.add_subcommand("lse", "least-squares estimate over all convex sets");
  std::string lse_data, lse_out, lse_off;
  QPConfig qp;
  lse_cmd->add_option("--data", lse_data)->required();
  lse_cmd->add_option("--out", lse_out, "JSON path (stdout if omitted)");
  lse_cmd->add_option("--off", lse_off, "OFF mesh of the vertices (d = 3)");
  lse_cmd->add_option("--max-iter", qp.max_iter)->capture_default_str();
  lse_cmd->add_option("--eps", qp.eps_abs, "absolute and relative KKT tolerance")->capture_default_str();

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "cross-validate the lift dimension");
  std::string cv_data, cv_out, cv_csv;
  std::vector<std::string> cv_lifts;
  int cv_partitions = 50;
  double cv_slack = 0.05;
  FitFlags cv_flags;
  cv_cmd->add_option("--data", cv_data)->required();
  cv_cmd->add_option("--lifts", cv_lifts, "candidate lifts")->required()->expected(1, -1);
  cv_cmd->add_option("--partitions", cv_partitions)->capture_default_str();
  cv_cmd->add_option("--slack", cv_slack, "knee rule slack")->capture_default_str();
  cv_cmd->add_option("--out", cv_out, "JSON path (stdout if omitted)");
  cv_cmd->add_option("--csv", cv_csv, "two-column curve CSV");
  cv_flags.add(cv_cmd);

  // stats-cov
  auto* cov_cmd = app.add_subcommand("stats-cov", "Monte-Carlo vertex covariance against the asymptotic theory");
  std::string cov_shape = "gon:5", cov_out, cov_csv;
  CovarianceConfig cov;
  bool cov_random_init = false;
  FitFlags cov_flags;
  cov_cmd->add_option("--shape", cov_shape)->capture_default_str();
  cov_cmd->add_option("--n", cov.n)->capture_default_str();
  cov_cmd->add_option("--sigma", cov.sigma)->capture_default_str();
  cov_cmd->add_option("--trials", cov.trials)->capture_default_str();
  cov_cmd->add_option("--gamma-samples", cov.gamma_samples)->capture_default_str();
  cov_cmd->add_flag("--random-init", cov_random_init, "start fits from --init instead of the true map");
  cov_cmd->add_option("--out", cov_out, "JSON path (stdout if omitted)");
  cov_cmd->add_option("--csv", cov_csv, "per-trial aligned deviations");
  cov_flags.add(cov_cmd);

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "rho_p distance between two models or shapes");
  std::string met_a, met_b, met_p = "2";
  int met_nodes = 0;
  std::uint64_t met_seed = 0;
  met_cmd->add_option("--a", met_a, "model JSON or shape:<spec>")->required();
  met_cmd->add_option("--b", met_b, "model JSON or shape:<spec>")->required();
  met_cmd->add_option("--p", met_p, "exponent >= 1 or inf")->capture_default_str();
  met_cmd->add_option("--nodes", met_nodes, "quadrature nodes (default per dimension)");
  met_cmd->add_option("--seed", met_seed, "seed for Monte-Carlo quadrature")->capture_default_str();

  // render
  auto* ren_cmd = app.add_subcommand("render", "SVG (d = 2) or OBJ (d = 3) of a model");
  std::string ren_model, ren_format = "svg", ren_out, ren_reference;
  int ren_nodes = 0;
  int ren_ellipses_q = 0;
  double ren_ellipse_scale = 0.05;
  ren_cmd->add_option("--model", ren_model, "model JSON or shape:<spec>")->required();
  ren_cmd->add_option("--format", ren_format)->check(CLI::IsMember({"svg", "obj"}))->capture_default_str();
  ren_cmd->add_option("--out", ren_out)->required();
  ren_cmd->add_option("--nodes", ren_nodes, "directions sampled (default 720 for SVG, 2562 for OBJ)");
  ren_cmd->add_option("--reference", ren_reference, "model JSON or shape:<spec> drawn dashed (SVG)");
  ren_cmd->add_option("--qgon-ellipses", ren_ellipses_q, "overlay q-gon covariance ellipses");
  ren_cmd->add_option("--ellipse-scale", ren_ellipse_scale)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    fail(2, "usage", e.what());
  }

  auto load_body = [](const std::string& s) {
    if (s.rfind("shape:", 0) == 0) {
      const ShapeSpec shape = ShapeSpec::parse(s.substr(6));
      auto r = shape_realization(shape);
      if (!r) throw ValidationError("shape " + shape.to_string() + " has no lifted realization");
      return *r;
    }
    return read_model(s);
  };

  Run run;
  try {
    apply_thread_cap();
    if (*synth_cmd) {
      run.command = "synth";
      run.config = {{"shape", synth_shape}, {"n", synth_n}, {"sigma", synth_sigma}, {"seed", synth_seed}};
      run.seeds = {synth_seed};
      const Dataset ds = synth(ShapeSpec::parse(synth_shape), synth_n, NoiseSpec{synth_sigma}, synth_seed);
      if (synth_out.empty()) std::cout << to_csv(ds);
      else run.output(synth_out, to_csv(ds));
    } else if (*fit_cmd) {
      run.command = "fit";
      run.config = fit_flags.echo();
      run.config["lift"] = fit_lift;
      run.config["data"] = fit_data;
      run.seeds = {fit_flags.seed};
      const Dataset ds = read_csv(fit_data);
      const LiftSpec lift = LiftSpec::parse(fit_lift);
      const FitReport rep = fit_all(ds, lift, fit_flags.config());
      const Json model = model_to_json(rep.best.estimate, &rep.best);
      if (fit_out.empty()) std::cout << model.dump(2) << "\n";
      else run.output(fit_out, model);
      if (!fit_runs.empty()) {
        Json runs = Json::array();
        for (const auto& r : rep.runs) runs.push_back(model_to_json(r.estimate, &r));
        run.output(fit_runs, Json{{"schema", kSchemaVersion}, {"kind", "runs"}, {"runs", runs}});
      }
    } else if (*lse_cmd) {
      run.command = "lse";
      qp.eps_rel = qp.eps_abs;
      run.config = {{"data", lse_data}, {"max_iter", qp.max_iter}, {"eps", qp.eps_abs}};
      const Dataset ds = read_csv(lse_data);
      const LsePolytope poly = fit_lse(ds, qp);
      const Json j = lse_to_json(poly);
      if (lse_out.empty()) std::cout << j.dump(2) << "\n";
      else run.output(lse_out, j);
      if (!lse_off.empty()) run.output(lse_off, points_to_off(poly.dedup_vertices));
    } else if (*cv_cmd) {
      run.command = "cv";
      run.config = cv_flags.echo();
      run.config["data"] = cv_data;
      run.config["lifts"] = cv_lifts;
      run.config["partitions"] = cv_partitions;
      run.config["slack"] = cv_slack;
      run.seeds = {cv_flags.seed};
      const Dataset ds = read_csv(cv_data);
      std::vector<LiftSpec> lifts;
      for (const auto& s : cv_lifts) lifts.push_back(LiftSpec::parse(s));
      const CvCurve curve = cross_validate(ds, lifts, cv_partitions, cv_flags.config(), cv_flags.seed);
      Json j = cv_to_json(curve);
      j["knee"] = select_knee(curve, cv_slack).to_string();
      j["slack"] = cv_slack;
      if (cv_out.empty()) std::cout << j.dump(2) << "\n";
      else run.output(cv_out, j);
      if (!cv_csv.empty()) run.output(cv_csv, cv_to_csv(curve));
    } else if (*cov_cmd) {
      run.command = "stats-cov";
      cov.shape = ShapeSpec::parse(cov_shape);
      cov.seed = cov_flags.seed;
      cov.fit = cov_flags.config();
      cov.init_at_truth = !cov_random_init;
      run.config = cov_flags.echo();
      run.config.update({{"shape", cov_shape}, {"n", cov.n}, {"sigma", cov.sigma}, {"trials", cov.trials},
                         {"gamma_samples", cov.gamma_samples}, {"init_at_truth", cov.init_at_truth}});
      run.seeds = {cov.seed};
      const CovarianceReport rep = mc_vertex_covariance(cov);
      const Json j = covariance_to_json(rep);
      if (cov_out.empty()) std::cout << j.dump(2) << "\n";
      else run.output(cov_out, j);
      if (!cov_csv.empty()) run.output(cov_csv, deviations_to_csv(rep));
    } else if (*met_cmd) {
      const SetEstimate a = load_body(met_a);
      const SetEstimate b = load_body(met_b);
      if (a.dim() != b.dim()) throw ValidationError("metrics: dimensions differ");
      const double p = parse_p(met_p);
      std::cout.precision(17);
      std::cout << rho_p(a, b, p, quadrature_for(a.dim(), met_nodes, met_seed)) << "\n";
    } else if (*ren_cmd) {
      run.command = "render";
      run.config = {{"model", ren_model}, {"format", ren_format}, {"nodes", ren_nodes}, {"reference", ren_reference},
                    {"qgon_ellipses", ren_ellipses_q}, {"ellipse_scale", ren_ellipse_scale}};
      const SetEstimate est = load_body(ren_model);
      if (ren_format == "svg") {
        SvgOptions opts;
        if (ren_nodes > 0) opts.nodes = ren_nodes;
        if (!ren_reference.empty()) opts.reference = load_body(ren_reference);
        if (ren_ellipses_q > 0) opts.ellipses = qgon_ellipses(ren_ellipses_q, ren_ellipse_scale);
        run.output(ren_out, render_svg(est, opts));
      } else {
        run.output(ren_out, render_obj(est, ren_nodes > 0 ? ren_nodes : 2562));
      }
    }
    run.finish();
  } catch (const ValidationError& e) {
    fail(2, "validation", e.what());
  } catch (const NumericalError& e) {
    fail(3, "numerical", e.what(), e.residual());
  } catch (const std::exception& e) {
    fail(3, "numerical", e.what());
  }
  return 0;
}
