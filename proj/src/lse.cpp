#include "spectrafit/lse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "spectrafit/error.hpp"
#include "spectrafit/hull.hpp"

namespace spectrafit {

namespace {

// Constraint rows are indexed by ordered pairs (i, j), i != j, and stored
// as an n x n matrix whose entry (j, i) holds row (i, j):
//   (A x)_(i,j) = <u_j, x_i> - <u_j, x_j>.
// Diagonal entries are unused and kept at zero.
class PairOperator {
 public:
  explicit PairOperator(const Eigen::MatrixXd& u) : u_(u) {}

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd w = u_.transpose() * x;  // w(j, i) = <u_j, x_i>
    const Eigen::VectorXd self = w.diagonal();
    w.colwise() -= self;
    w.diagonal().setZero();
    return w;
  }

  Eigen::MatrixXd adjoint(const Eigen::MatrixXd& lam) const {
    // x_i collects sum_j lam(j, i) u_j; x_j loses u_j * sum_i lam(j, i).
    Eigen::MatrixXd out = u_ * lam;
    const Eigen::VectorXd rows = lam.rowwise().sum();
    out -= u_ * rows.asDiagonal();
    return out;
  }

  /// A^T A as a dense (nd) x (nd) matrix, block (i, k) of size d x d.
  Eigen::MatrixXd gram() const {
    const auto d = u_.rows(), n = u_.cols();
    const Eigen::MatrixXd s = u_ * u_.transpose();
    Eigen::MatrixXd g(n * d, n * d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::MatrixXd ui = u_.col(i) * u_.col(i).transpose();
      for (Eigen::Index k = 0; k < n; ++k) {
        if (i == k) {
          g.block(i * d, i * d, d, d) = s + static_cast<double>(n - 2) * ui;
        } else {
          g.block(i * d, k * d, d, d) = -(ui + u_.col(k) * u_.col(k).transpose());
        }
      }
    }
    return g;
  }

 private:
  const Eigen::MatrixXd& u_;
};

double inf_norm(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Greedy farthest-point net: representatives at mutual distance > radius
// covering every input point within radius.
std::vector<Eigen::VectorXd> farthest_point_net(const Eigen::MatrixXd& pts, double radius) {
  const auto n = pts.cols();
  std::vector<Eigen::VectorXd> net;
  if (n == 0) return net;
  Eigen::Index first = 0;
  pts.colwise().norm().maxCoeff(&first);
  net.push_back(pts.col(first));
  Eigen::VectorXd dist = (pts.colwise() - pts.col(first)).colwise().norm().transpose();
  for (;;) {
    Eigen::Index far = 0;
    const double dmax = dist.maxCoeff(&far);
    if (dmax <= radius) break;
    net.push_back(pts.col(far));
    dist = dist.cwiseMin((pts.colwise() - pts.col(far)).colwise().norm().transpose());
  }
  return net;
}

struct PolishResult {
  Eigen::MatrixXd x;
  double r_prim = 0.0;
  double r_dual = 0.0;
  bool ok = false;
};

constexpr int kMaxPolishRounds = 2000;

using ActiveSet = std::vector<std::pair<Eigen::Index, Eigen::Index>>;  // (i, j) rows

// Equality-constrained solve on an active set, as in OSQP's solution
// polishing. The quasidefinite system [P + dI, B^T; B, -dI] is reduced to
// its Schur complement and iteratively refined against the unregularized
// KKT system [P, B^T; B, 0]. Starting from the current iterate keeps the
// directions the active set leaves free (the minimizer is not unique) where
// they were.
void solve_active(const Eigen::MatrixXd& u, const Eigen::MatrixXd& q, const Eigen::MatrixXd& p_dense,
                  const ActiveSet& active, Eigen::MatrixXd& x, Eigen::VectorXd& nu, bool& ok) {
  const auto d = u.rows(), n = u.cols();
  Eigen::MatrixXd btb = Eigen::MatrixXd::Zero(n * d, n * d);
  for (const auto& [i, j] : active) {
    const Eigen::MatrixXd uu = u.col(j) * u.col(j).transpose();
    btb.block(i * d, i * d, d, d) += uu;
    btb.block(j * d, j * d, d, d) += uu;
    btb.block(i * d, j * d, d, d) -= uu;
    btb.block(j * d, i * d, d, d) -= uu;
  }
  // The Schur complement has condition number ~ |B|^2 / delta^2; delta is
  // raised until the factorization succeeds and refinement makes up for it.
  double delta = 1e-6;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (ok = false; !ok && delta <= 1e-2; delta *= 10.0) {
    Eigen::MatrixXd k = p_dense + btb / delta;
    k.diagonal().array() += delta;
    llt.compute(k);
    ok = llt.info() == Eigen::Success;
    if (ok) break;
  }
  if (!ok) return;
  const auto m = static_cast<Eigen::Index>(active.size());
  auto b_apply = [&](const Eigen::MatrixXd& v) {
    Eigen::VectorXd out(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto [i, j] = active[static_cast<std::size_t>(r)];
      out[r] = u.col(j).dot(v.col(i) - v.col(j));
    }
    return out;
  };
  auto bt_apply = [&](const Eigen::VectorXd& w) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, n);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto [i, j] = active[static_cast<std::size_t>(r)];
      out.col(i) += w[r] * u.col(j);
      out.col(j) -= w[r] * u.col(j);
    }
    return out;
  };
  auto p_apply = [&](const Eigen::MatrixXd& v) {
    Eigen::MatrixXd out(d, n);
    for (Eigen::Index i = 0; i < n; ++i) out.col(i) = 2.0 * u.col(i) * u.col(i).dot(v.col(i));
    return out;
  };

  for (int step = 0; step < 60; ++step) {
    const Eigen::MatrixXd r1 = -q - p_apply(x) - bt_apply(nu);
    const Eigen::VectorXd r2 = -b_apply(x);
    Eigen::MatrixXd rhs = r1 + bt_apply(r2) / delta;
    Eigen::Map<Eigen::VectorXd> rhs_vec(rhs.data(), rhs.size());
    Eigen::VectorXd dx_vec = llt.solve(rhs_vec);
    const Eigen::Map<const Eigen::MatrixXd> dx(dx_vec.data(), d, n);
    const Eigen::VectorXd dnu = (b_apply(dx) - r2) / delta;
    x += dx;
    nu += dnu;
    if (std::max(inf_norm(dx), m ? dnu.cwiseAbs().maxCoeff() : 0.0) <= 1e-14 * (1.0 + inf_norm(x))) break;
  }
}

// Lawson-Hanson nonnegative least squares: argmin |m l - b| over l >= 0.
// Stops once no column's gradient exceeds `tol`. `start` seeds the passive
// set: its least-squares solution is pruned of nonpositive entries until it
// is feasible, after which the usual iteration takes over.
Eigen::VectorXd nnls(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, double tol, int max_iter,
                     std::vector<char> passive) {
  const auto cols = m.cols();
  Eigen::VectorXd l = Eigen::VectorXd::Zero(cols);
  // Columns of m carry 2d nonzeros each, so the passive least-squares
  // problems are solved by sparse QR.
  auto solve_passive = [&] {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < cols; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd mp(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) mp.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
    const Eigen::VectorXd sp = mp.colPivHouseholderQr().solve(b);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(cols);
    for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[static_cast<Eigen::Index>(k)];
    return s;
  };
  while (std::find(passive.begin(), passive.end(), 1) != passive.end()) {
    const Eigen::VectorXd s = solve_passive();
    bool pruned = false;
    for (Eigen::Index j = 0; j < cols; ++j)
      if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
        passive[static_cast<std::size_t>(j)] = 0;
        pruned = true;
      }
    if (!pruned) {
      l = s;
      break;
    }
  }
  for (int outer = 0; outer < max_iter; ++outer) {
    const Eigen::VectorXd w = m.transpose() * (b - m * l);
    Eigen::Index t = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best) {
        best = w[j];
        t = j;
      }
    if (t < 0) break;
    passive[static_cast<std::size_t>(t)] = 1;
    for (int inner = 0; inner < 3 * static_cast<int>(cols) + 10; ++inner) {
      const Eigen::VectorXd s = solve_passive();
      double alpha = 1.0;
      bool clipped = false;
      for (Eigen::Index j = 0; j < cols; ++j)
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
          alpha = std::min(alpha, l[j] / (l[j] - s[j]));
          clipped = true;
        }
      if (!clipped) {
        l = s;
        break;
      }
      l += alpha * (s - l);
      for (Eigen::Index j = 0; j < cols; ++j)
        if (passive[static_cast<std::size_t>(j)] && l[j] <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = 0;
          l[j] = 0.0;
        }
    }
  }
  return l;
}

// Primal active-set method from the witness polish of the ADMM iterate,
// with the ADMM active guess as the first working set. Steps toward the
// equality-constrained minimizer stop at the first blocking row. At a
// working-set minimizer, nonnegative multipliers (the rows are degenerate,
// so the equality multipliers are not unique) either certify optimality or
// leave a residual that is a feasible descent direction.
PolishResult polish(const Eigen::MatrixXd& u, const Eigen::MatrixXd& q, const Eigen::MatrixXd& p_dense,
                    const Eigen::MatrixXd& x_admm, const Eigen::MatrixXd& lam, const Eigen::MatrixXd& z, double rho,
                    const PairOperator& op, const QPConfig& cfg, int max_rounds) {
  const auto d = u.rows(), n = u.cols();
  Eigen::MatrixXd x(d, n);
  {
    const Eigen::MatrixXd w = u.transpose() * x_admm;
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::Index arg = 0;
      w.row(j).maxCoeff(&arg);
      x.col(j) = x_admm.col(arg);
    }
  }
  const double scale = std::max(1.0, inf_norm(x));
  const double tight = 1e-13 * scale;
  std::vector<char> in(static_cast<std::size_t>(n * n), 0);
  {
    const Eigen::MatrixXd ax = op.apply(x);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && (ax(j, i) >= -tight || lam(j, i) + rho * z(j, i) > 0.0)) in[static_cast<std::size_t>(j + i * n)] = 1;
  }
  auto gradient = [&](const Eigen::MatrixXd& v) {
    Eigen::MatrixXd g(d, n);
    for (Eigen::Index i = 0; i < n; ++i) g.col(i) = 2.0 * u.col(i) * u.col(i).dot(v.col(i)) + q.col(i);
    return g;
  };

  // Multipliers of the last stationary point seed the next NNLS solve.
  Eigen::MatrixXd support = Eigen::MatrixXd::Zero(n, n);
  bool have_support = false;

  PolishResult res;
  for (int round = 0; round < max_rounds; ++round) {
    ActiveSet active;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (in[static_cast<std::size_t>(j + i * n)]) active.emplace_back(i, j);
    Eigen::MatrixXd xw = x;
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(active.size()));
    bool ok = false;
    solve_active(u, q, p_dense, active, xw, nu, ok);
    if (!ok) return res;
    const Eigen::MatrixXd step = xw - x;
    const Eigen::MatrixXd g = gradient(x);
    // Directional decrease of the quadratic along the step.
    const double gain = -(g.cwiseProduct(step)).sum();
    if (inf_norm(step) > 1e-12 * scale && gain > 1e-16 * scale * scale) {
      const Eigen::MatrixXd ax = op.apply(x), ap = op.apply(step);
      double alpha = 1.0;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i == j || in[static_cast<std::size_t>(j + i * n)] || ap(j, i) <= 0.0) continue;
          alpha = std::min(alpha, std::max(0.0, -ax(j, i)) / ap(j, i));
        }
      x += alpha * step;
      if (alpha < 1.0) {
        // Every row the step runs into joins at once; degenerate vertices
        // would otherwise cost one zero-length step per row.
        const Eigen::MatrixXd ax_new = op.apply(x);
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && !in[static_cast<std::size_t>(j + i * n)] && ap(j, i) > 0.0 && ax_new(j, i) >= -tight)
              in[static_cast<std::size_t>(j + i * n)] = 1;
      }
      continue;
    }
    // Stationary on the working set: nonnegative multipliers over every
    // tight row.
    {
      const Eigen::MatrixXd ax = op.apply(x);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          if (i != j && !in[static_cast<std::size_t>(j + i * n)] && ax(j, i) >= -tight) {
            in[static_cast<std::size_t>(j + i * n)] = 1;
            active.emplace_back(i, j);
          }
    }
    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd bt = Eigen::MatrixXd::Zero(d * n, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto [i, j] = active[static_cast<std::size_t>(r)];
      bt.block(i * d, r, d, 1) += u.col(j);
      bt.block(j * d, r, d, 1) -= u.col(j);
    }
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(), g.size());
    const double flat = 1e-13 * std::max(1.0, inf_norm(g));
    std::vector<char> seed(static_cast<std::size_t>(m));
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto [i, j] = active[static_cast<std::size_t>(r)];
      seed[static_cast<std::size_t>(r)] = have_support ? support(j, i) > 0.0 : r < nu.size() && nu[r] > 0.0;
    }
    const Eigen::VectorXd nu_w = nnls(bt, -gv, flat, 10 * static_cast<int>(m) + 100, std::move(seed));
    Eigen::MatrixXd mult = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto [i, j] = active[static_cast<std::size_t>(r)];
      mult(j, i) = nu_w[r];
    }
    support = mult;
    have_support = true;
    const Eigen::MatrixXd ax = op.apply(x), atl = op.adjoint(mult), px = g - q;
    res.r_prim = std::max(0.0, ax.maxCoeff());
    res.r_dual = inf_norm(g + atl);
    const double prim_tol = cfg.eps_abs + cfg.eps_rel * inf_norm(ax);
    const double dual_tol = cfg.eps_abs + cfg.eps_rel * std::max({inf_norm(px), inf_norm(atl), inf_norm(q)});
    res.x = x;
    res.ok = res.r_prim <= prim_tol && res.r_dual <= dual_tol;
    if (res.ok) return res;
    // Descend along the multiplier residual. Rows with positive multipliers
    // stay tight; rows it pulls strictly inside leave the working set.
    Eigen::MatrixXd dir = -(g + atl);
    const Eigen::MatrixXd adir = op.apply(dir);
    double curv = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) curv += 2.0 * std::pow(u.col(i).dot(dir.col(i)), 2);
    double alpha = curv > 0.0 ? dir.squaredNorm() / curv : std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && adir(j, i) > 10.0 * flat && !(mult(j, i) > 0.0))
          alpha = std::min(alpha, std::max(0.0, -ax(j, i)) / adir(j, i));
    if (!std::isfinite(alpha)) return res;
    x += alpha * dir;
    const Eigen::MatrixXd ax_new = op.apply(x);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) in[static_cast<std::size_t>(j + i * n)] = mult(j, i) > 0.0 || ax_new(j, i) >= -tight;
  }
  return res;
}

}  // namespace

LsePolytope fit_lse(const Dataset& ds, const QPConfig& cfg) {
  ds.validate();
  const int n = ds.size();
  const int d = ds.dim();
  const Eigen::MatrixXd& u = ds.u;
  const PairOperator op(u);

  // 1/2 x^T P x + q^T x with P = 2 blockdiag(u_i u_i^T), q_i = -2 y_i u_i.
  auto apply_p = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(d, n);
    for (int i = 0; i < n; ++i) out.col(i) = 2.0 * u.col(i) * u.col(i).dot(x.col(i));
    return out;
  };
  Eigen::MatrixXd q(d, n);
  for (int i = 0; i < n; ++i) q.col(i) = -2.0 * ds.y[i] * u.col(i);

  Eigen::MatrixXd p_dense = Eigen::MatrixXd::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i) p_dense.block(i * d, i * d, d, d) = 2.0 * u.col(i) * u.col(i).transpose();
  const Eigen::MatrixXd ata = op.gram();

  double rho = cfg.rho;
  Eigen::LLT<Eigen::MatrixXd> kkt;
  auto factor = [&] {
    Eigen::MatrixXd k = p_dense + rho * ata;
    k.diagonal().array() += cfg.sigma;
    kkt.compute(k);
    if (kkt.info() != Eigen::Success) throw NumericalError("LSE: KKT factorization failed");
  };
  factor();

  Eigen::MatrixXd x(d, n);
  for (int i = 0; i < n; ++i) x.col(i) = ds.y[i] * u.col(i);
  Eigen::MatrixXd z = op.apply(x).cwiseMin(0.0);
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(n, n);

  LsePolytope out;
  double polish_gate = 1e-3;
  int next_polish = 0;
  int adapts_left = cfg.max_rho_updates;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Eigen::MatrixXd rhs = cfg.sigma * x - q + op.adjoint(rho * z - lam);
    Eigen::Map<Eigen::VectorXd> rhs_vec(rhs.data(), rhs.size());
    Eigen::VectorXd xt_vec = kkt.solve(rhs_vec);
    const Eigen::Map<const Eigen::MatrixXd> xt(xt_vec.data(), d, n);
    const Eigen::MatrixXd zt = op.apply(xt);

    x = cfg.alpha * xt + (1.0 - cfg.alpha) * x;
    const Eigen::MatrixXd zr = cfg.alpha * zt + (1.0 - cfg.alpha) * z;
    Eigen::MatrixXd z_next = (zr + lam / rho).cwiseMin(0.0);
    z_next.diagonal().setZero();
    lam += rho * (zr - z_next);
    lam.diagonal().setZero();
    z = std::move(z_next);
    out.iterations = it;

    const bool check = it % cfg.check_every == 0 || it == cfg.max_iter;
    const bool adapt = it % cfg.adapt_every == 0;
    if (!check && !adapt) continue;

    const Eigen::MatrixXd ax = op.apply(x);
    const Eigen::MatrixXd px = apply_p(x);
    const Eigen::MatrixXd atl = op.adjoint(lam);
    const double r_prim = inf_norm(ax - z);
    const double r_dual = inf_norm(px + q + atl);
    const double prim_scale = std::max(inf_norm(ax), inf_norm(z));
    const double dual_scale = std::max({inf_norm(px), inf_norm(atl), inf_norm(q)});
    out.primal_residual = r_prim;
    out.dual_residual = r_dual;
    if (r_prim <= cfg.eps_abs + cfg.eps_rel * prim_scale && r_dual <= cfg.eps_abs + cfg.eps_rel * dual_scale) {
      out.certified = true;
      break;
    }
    const double rel = std::max(r_prim / std::max(prim_scale, 1.0), r_dual / std::max(dual_scale, 1.0));
    if (cfg.polish && (rel <= polish_gate || it == cfg.max_iter) && it >= next_polish) {
      auto pol = polish(u, q, p_dense, x, lam, z, rho, op, cfg, kMaxPolishRounds);
      if (pol.ok) {
        x = std::move(pol.x);
        out.primal_residual = pol.r_prim;
        out.dual_residual = pol.r_dual;
        out.certified = true;
        break;
      }
      next_polish = it + cfg.polish_every;
      polish_gate = std::max(rel, 1e-12) / 3.0;
    }
    if (adapt && adapts_left > 0) {
      const double num = r_prim / std::max(prim_scale, 1e-300);
      const double den = r_dual / std::max(dual_scale, 1e-300);
      if (num > 0.0 && den > 0.0) {
        const double proposal = std::clamp(rho * std::sqrt(num / den), 1e-6, 1e6);
        if (proposal > 5.0 * rho || proposal < 0.2 * rho) {
          rho = proposal;
          --adapts_left;
          factor();
        }
      }
    }
  }

  // Polish onto a consistent witness set.
  const Eigen::MatrixXd w = u.transpose() * x;  // w(j, i) = <u_j, x_i>
  out.points.resize(d, n);
  out.fitted.resize(n);
  for (int j = 0; j < n; ++j) {
    Eigen::Index arg = 0;
    out.fitted[j] = w.row(j).maxCoeff(&arg);
    out.points.col(j) = x.col(arg);
  }
  out.objective = (ds.y - out.fitted).squaredNorm() / n;

  double scale = std::max(1e-12, out.points.colwise().norm().maxCoeff());
  const auto net = farthest_point_net(out.points, cfg.dedup_rel * scale);
  out.dedup_vertices = net;
  if ((d == 2 || d == 3) && static_cast<int>(net.size()) > d) {
    try {
      const auto keep = hull_vertex_indices(net, 0.0);
      out.dedup_vertices.clear();
      for (int k : keep) out.dedup_vertices.push_back(net[static_cast<std::size_t>(k)]);
    } catch (const DegenerateHullError&) {
      // Lower-dimensional witness sets keep the full net.
    }
  }
  return out;
}

double lse_support(const LsePolytope& poly, const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (poly.dedup_vertices.empty()) throw ValidationError("LSE polytope has no vertices");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : poly.dedup_vertices) {
    if (v.size() != u.size()) throw ValidationError("lse_support: dimension mismatch");
    best = std::max(best, v.dot(u));
  }
  return best;
}

double max_consistency_violation(const LsePolytope& poly, const Dataset& ds) {
  const Eigen::MatrixXd w = ds.u.transpose() * poly.points;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < w.rows(); ++j) worst = std::max(worst, (w.row(j).array() - w(j, j)).maxCoeff());
  return worst;
}

}  // namespace spectrafit
