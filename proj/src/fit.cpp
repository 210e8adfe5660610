#include "spectrafit/fit.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "spectrafit/error.hpp"
#include "spectrafit/random.hpp"

namespace spectrafit {

using kernels::Assignment;
using kernels::Exec;

void FitConfig::validate() const {
  if (gamma && !(*gamma >= 0.0)) throw ValidationError("gamma must be >= 0");
  if (max_iter < 0) throw ValidationError("max_iter must be >= 0");
  if (!(tol_obj > 0.0) || !(tol_map > 0.0)) throw ValidationError("tolerances must be positive");
  if (starts < 1) throw ValidationError("starts must be >= 1");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::ObjectiveTolerance: return "objective_tolerance";
    case StopReason::MapTolerance: return "map_tolerance";
    case StopReason::MaxIterations: return "max_iterations";
  }
  return {};
}

double objective(const SetEstimate& est, const Dataset& ds) {
  if (ds.size() == 0) throw ValidationError("objective of an empty dataset");
  Assignment asg;
  kernels::assign(est.lift(), est.map(), ds, asg, Exec::Parallel);
  return kernels::mean_squared_residual(asg.values, ds.y);
}

LinearMap gradient(const SetEstimate& est, const Dataset& ds) {
  Assignment asg;
  kernels::assign(est.lift(), est.map(), ds, asg, Exec::Parallel);
  return LinearMap(kernels::gradient(est.lift(), ds, asg, Exec::Parallel));
}

double default_gamma(const Dataset& ds) {
  const double g = 1e-6 * ds.y.squaredNorm() / std::max(1, ds.size());
  return g > 0.0 ? g : 1e-12;
}

LinearMap initial_map(const LiftSpec& lift, const Dataset& ds, const FitConfig& cfg) {
  if (const auto* ex = std::get_if<ExplicitInit>(&cfg.init)) {
    if (ex->map.dim() != ds.dim() || ex->map.lifted_dim() != lift.lifted_dim())
      throw ValidationError("explicit initialization has the wrong shape for " + lift.to_string());
    return ex->map;
  }
  const double rms = std::sqrt(ds.y.squaredNorm() / std::max(1, ds.size()));
  const int d = ds.dim();
  Rng rng(cfg.seed, 1);

  const bool sphere = std::holds_alternative<RandomSphereInit>(cfg.init) ||
                      (std::holds_alternative<RandomDefaultInit>(cfg.init) &&
                       lift.kind() == LiftSpec::Kind::Simplex);
  if (sphere) {
    if (lift.kind() != LiftSpec::Kind::Simplex)
      throw ValidationError("sphere initialization applies to simplex lifts only");
    const auto* rs = std::get_if<RandomSphereInit>(&cfg.init);
    double radius = rs ? rs->radius : 0.0;
    if (radius <= 0.0) radius = rms > 0.0 ? rms : 1.0;
    Eigen::MatrixXd cols(d, lift.lifted_dim());
    for (int j = 0; j < lift.lifted_dim(); ++j) cols.col(j) = radius * rng.direction(d);
    return LinearMap(std::move(cols));
  }

  const auto* rg = std::get_if<RandomGaussianInit>(&cfg.init);
  double scale = rg ? rg->scale : 0.0;
  if (scale <= 0.0) {
    const int order = lift.kind() == LiftSpec::Kind::Simplex ? lift.num_blocks() : lift.order();
    scale = rms > 0.0 ? rms / std::sqrt(static_cast<double>(order)) : 1.0;
  }
  Eigen::MatrixXd coeffs(d, lift.lifted_dim());
  for (int k = 0; k < d; ++k) {
    for (int b = 0; b < lift.num_blocks(); ++b) {
      const int p = lift.block_size(b);
      Eigen::MatrixXd m(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) m(i, j) = m(j, i) = scale * rng.normal();
      coeffs.row(k).segment(lift.block_offset(b), lift.block_dim(b)) = svec(m).transpose();
    }
  }
  return LinearMap(std::move(coeffs));
}

LinearMap ridge_update(const LiftSpec& lift, const Dataset& ds, const Assignment& asg,
                       const LinearMap& prev, double gamma) {
  const kernels::NormalEquations ne = kernels::normal_equations(lift, ds, asg, Exec::Parallel);
  const int d = ds.dim();
  Eigen::MatrixXd coeffs = prev.coeffs();
  for (int b = 0; b < lift.num_blocks(); ++b) {
    const int m = lift.block_dim(b);
    Eigen::MatrixXd blk = prev.coeffs().middleCols(lift.block_offset(b), m);
    const Eigen::Map<const Eigen::VectorXd> a_prev(blk.data(), d * m);

    Eigen::MatrixXd gram = ne.gram[static_cast<std::size_t>(b)];
    gram.diagonal().array() += gamma;
    const Eigen::VectorXd rhs = ne.rhs[static_cast<std::size_t>(b)] + gamma * a_prev;

    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    const bool singular = llt.info() != Eigen::Success || (gamma == 0.0 && llt.rcond() < 1e-12);
    if (singular)
      throw NumericalError("least-squares step is singular" +
                               std::string(gamma == 0.0 ? "; use gamma > 0" : ""),
                           gamma == 0.0 ? llt.rcond() : 0.0);
    const Eigen::VectorXd sol = llt.solve(rhs);
    coeffs.middleCols(lift.block_offset(b), m) = Eigen::Map<const Eigen::MatrixXd>(sol.data(), d, m);
  }
  return LinearMap(std::move(coeffs));
}

FitResult fit_once(const Dataset& ds, const LiftSpec& lift, const FitConfig& cfg) {
  cfg.validate();
  ds.validate();
  const double gamma = cfg.gamma.value_or(default_gamma(ds));

  LinearMap current = initial_map(lift, ds, cfg);
  LinearMap best = current;
  double best_obj = std::numeric_limits<double>::infinity();

  FitResult res{SetEstimate(lift, current), 0.0, {}, 0, 0, StopReason::MaxIterations, cfg.seed, gamma};
  Assignment asg;

  auto evaluate = [&] {
    kernels::assign(lift, current, ds, asg, Exec::Parallel);
    const double obj = kernels::mean_squared_residual(asg.values, ds.y);
    res.trace.push_back(obj);
    if (obj < best_obj) {
      best_obj = obj;
      best = current;
    }
    return obj;
  };

  double obj = evaluate();
  for (;;) {
    if (res.iterations >= cfg.max_iter) {
      res.stop = StopReason::MaxIterations;
      break;
    }
    LinearMap next = ridge_update(lift, ds, asg, current, gamma);
    const double step = (next.coeffs() - current.coeffs()).norm();
    current = std::move(next);
    ++res.iterations;
    const double prev_obj = obj;
    obj = evaluate();
    if (step <= cfg.tol_map * std::max(1.0, current.coeffs().norm())) {
      res.stop = StopReason::MapTolerance;
      break;
    }
    if (std::abs(prev_obj - obj) <= cfg.tol_obj * prev_obj) {
      res.stop = StopReason::ObjectiveTolerance;
      break;
    }
  }
  res.estimate = SetEstimate(lift, best);
  res.objective = best_obj;
  return res;
}

FitReport fit_all(const Dataset& ds, const LiftSpec& lift, const FitConfig& cfg, Exec exec) {
  cfg.validate();
  ds.validate();
  const int starts = cfg.starts;
  std::vector<std::optional<FitResult>> runs(static_cast<std::size_t>(starts));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(starts));

  auto run = [&](int s) {
    FitConfig one = cfg;
    one.starts = 1;
    one.seed = cfg.seed + static_cast<std::uint64_t>(s);
    try {
      auto r = fit_once(ds, lift, one);
      r.start_index = s;
      runs[static_cast<std::size_t>(s)] = std::move(r);
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < starts; ++s) run(s);
  } else {
    for (int s = 0; s < starts; ++s) run(s);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  FitReport report{*runs.front(), {}};
  report.runs.reserve(runs.size());
  for (auto& r : runs) {
    if (r->objective < report.best.objective) report.best = *r;
    report.runs.push_back(std::move(*r));
  }
  return report;
}

FitResult fit(const Dataset& ds, const LiftSpec& lift, const FitConfig& cfg) {
  return fit_all(ds, lift, cfg).best;
}

}  // namespace spectrafit
