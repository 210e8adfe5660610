#include "spectrafit/kernels.hpp"

#include <algorithm>
#include <exception>

#include "spectrafit/error.hpp"

namespace spectrafit::kernels {

namespace {

int max_block(const LiftSpec& lift) {
  int m = 1;
  for (int b = 0; b < lift.num_blocks(); ++b) m = std::max(m, lift.block_size(b));
  return m;
}

// svec(g g^T) for the generator stored in column i.
Eigen::VectorXd lifted_generator(const LiftSpec& lift, const Assignment& asg, int i) {
  const int b = asg.block[static_cast<std::size_t>(i)];
  const int p = lift.block_size(b);
  const Eigen::VectorXd g = asg.generators.col(i).head(p);
  return svec(g * g.transpose());
}

void assign_one(const LiftSpec& lift, const LinearMap& map, const Dataset& ds, Assignment& out, int i) {
  const SupportPoint sp = lift_support_point(lift, map.adjoint(ds.u.col(i)));
  out.values[i] = sp.value;
  out.block[static_cast<std::size_t>(i)] = sp.block;
  out.generators.col(i).setZero();
  out.generators.col(i).head(sp.generator.size()) = sp.generator;
}

void prepare(const LiftSpec& lift, const Dataset& ds, Assignment& out) {
  const int n = ds.size();
  out.values.resize(n);
  out.block.assign(static_cast<std::size_t>(n), 0);
  out.generators.resize(max_block(lift), n);
}

int chunk_count(int n) { return std::clamp(n / kMinChunk, 1, kChunks); }

std::pair<int, int> chunk_range(int chunk, int chunks, int n) {
  const long lo = static_cast<long>(n) * chunk / chunks;
  const long hi = static_cast<long>(n) * (chunk + 1) / chunks;
  return {static_cast<int>(lo), static_cast<int>(hi)};
}

void add_gradient_term(const LiftSpec& lift, const Dataset& ds, const Assignment& asg, int i,
                       Eigen::MatrixXd& g) {
  const int b = asg.block[static_cast<std::size_t>(i)];
  const double r = asg.values[i] - ds.y[i];
  g.middleCols(lift.block_offset(b), lift.block_dim(b)).noalias() +=
      (r * ds.u.col(i)) * lifted_generator(lift, asg, i).transpose();
}

void add_normal_term(const LiftSpec& lift, const Dataset& ds, const Assignment& asg, int i,
                     NormalEquations& ne) {
  const int b = asg.block[static_cast<std::size_t>(i)];
  const Eigen::VectorXd e = lifted_generator(lift, asg, i);
  const Eigen::VectorXd u = ds.u.col(i);
  const int d = ds.dim();
  const int m = static_cast<int>(e.size());
  // phi = vec(u e^T) column-major; phi phi^T = (e e^T) kron (u u^T).
  Eigen::VectorXd phi(d * m);
  for (int c = 0; c < m; ++c) phi.segment(c * d, d) = e[c] * u;
  ne.gram[static_cast<std::size_t>(b)].selfadjointView<Eigen::Lower>().rankUpdate(phi);
  ne.rhs[static_cast<std::size_t>(b)].noalias() += ds.y[i] * phi;
}

NormalEquations empty_normal_equations(const LiftSpec& lift, int d) {
  NormalEquations ne;
  for (int b = 0; b < lift.num_blocks(); ++b) {
    const int k = d * lift.block_dim(b);
    ne.gram.push_back(Eigen::MatrixXd::Zero(k, k));
    ne.rhs.push_back(Eigen::VectorXd::Zero(k));
  }
  return ne;
}

void symmetrize(NormalEquations& ne) {
  for (auto& g : ne.gram) g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
}

}  // namespace

void assign(const LiftSpec& lift, const LinearMap& map, const Dataset& ds, Assignment& out, Exec exec) {
  if (map.lifted_dim() != lift.lifted_dim() || map.dim() != ds.dim())
    throw ValidationError("assign: map, lift and dataset dimensions disagree");
  prepare(lift, ds, out);
  const int n = ds.size();
  if (exec == Exec::Serial) {
    for (int i = 0; i < n; ++i) assign_one(lift, map, ds, out, i);
    return;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      assign_one(lift, map, ds, out, i);
    } catch (...) {
#pragma omp critical(spectrafit_assign_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double mean_squared_residual(const Eigen::VectorXd& values, const Eigen::VectorXd& y) {
  if (y.size() == 0) throw ValidationError("objective of an empty dataset");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double r = y[i] - values[i];
    acc += r * r;
  }
  return acc / static_cast<double>(y.size());
}

Eigen::MatrixXd gradient(const LiftSpec& lift, const Dataset& ds, const Assignment& asg, Exec exec) {
  const int n = ds.size();
  const double scale = 2.0 / n;
  if (exec == Exec::Serial) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(ds.dim(), lift.lifted_dim());
    for (int i = 0; i < n; ++i) add_gradient_term(lift, ds, asg, i, g);
    return scale * g;
  }
  const int chunks = chunk_count(n);
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(chunks),
                                       Eigen::MatrixXd::Zero(ds.dim(), lift.lifted_dim()));
#pragma omp parallel for schedule(static)
  for (int c = 0; c < chunks; ++c) {
    const auto [lo, hi] = chunk_range(c, chunks, n);
    for (int i = lo; i < hi; ++i) add_gradient_term(lift, ds, asg, i, partial[static_cast<std::size_t>(c)]);
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(ds.dim(), lift.lifted_dim());
  for (const auto& p : partial) g += p;
  return scale * g;
}

NormalEquations normal_equations(const LiftSpec& lift, const Dataset& ds, const Assignment& asg, Exec exec) {
  const int n = ds.size();
  if (exec == Exec::Serial) {
    NormalEquations ne = empty_normal_equations(lift, ds.dim());
    for (int i = 0; i < n; ++i) add_normal_term(lift, ds, asg, i, ne);
    symmetrize(ne);
    return ne;
  }
  const int chunks = chunk_count(n);
  std::vector<NormalEquations> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (int c = 0; c < chunks; ++c) {
    auto& ne = partial[static_cast<std::size_t>(c)];
    ne = empty_normal_equations(lift, ds.dim());
    const auto [lo, hi] = chunk_range(c, chunks, n);
    for (int i = lo; i < hi; ++i) add_normal_term(lift, ds, asg, i, ne);
  }
  NormalEquations total = std::move(partial.front());
  for (std::size_t c = 1; c < partial.size(); ++c) {
    for (std::size_t b = 0; b < total.gram.size(); ++b) {
      total.gram[b] += partial[c].gram[b];
      total.rhs[b] += partial[c].rhs[b];
    }
  }
  symmetrize(total);
  return total;
}

}  // namespace spectrafit::kernels
