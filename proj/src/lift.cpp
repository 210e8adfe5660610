#include "spectrafit/lift.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "spectrafit/error.hpp"
#include "spectrafit/sym_eigen.hpp"

namespace spectrafit {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

int parse_positive(std::string_view s, std::string_view context) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 1)
    throw ValidationError("invalid " + std::string(context) + " size '" + std::string(s) + "'");
  return v;
}

// First nonzero entry positive.
void normalize_sign(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-14) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

LiftSpec::LiftSpec(Kind kind, std::vector<int> sizes) : kind_(kind), sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw ValidationError("lift needs at least one block");
  offsets_.reserve(sizes_.size());
  for (int p : sizes_) {
    if (p < 1) throw ValidationError("lift block sizes must be positive");
    offsets_.push_back(lifted_dim_);
    lifted_dim_ += p * (p + 1) / 2;
  }
}

LiftSpec LiftSpec::simplex(int q) {
  if (q < 1) throw ValidationError("simplex dimension must be positive");
  return LiftSpec(Kind::Simplex, std::vector<int>(static_cast<std::size_t>(q), 1));
}

LiftSpec LiftSpec::spectraplex(int p) {
  if (p < 1) throw ValidationError("spectraplex order must be positive");
  return LiftSpec(Kind::Spectraplex, {p});
}

LiftSpec LiftSpec::blocks(std::vector<int> sizes) {
  return LiftSpec(Kind::BlockSpectraplex, std::move(sizes));
}

LiftSpec LiftSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ValidationError("lift must look like simplex:q, spectraplex:p or blocks:p1,p2,..");
  const auto name = text.substr(0, colon);
  const auto arg = text.substr(colon + 1);
  if (name == "simplex") return simplex(parse_positive(arg, "simplex"));
  if (name == "spectraplex") return spectraplex(parse_positive(arg, "spectraplex"));
  if (name == "blocks") {
    std::vector<int> sizes;
    std::size_t start = 0;
    while (start <= arg.size()) {
      const auto comma = arg.find(',', start);
      const auto piece = arg.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start);
      sizes.push_back(parse_positive(piece, "block"));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return blocks(std::move(sizes));
  }
  throw ValidationError("unknown lift '" + std::string(name) + "'");
}

std::string LiftSpec::to_string() const {
  switch (kind_) {
    case Kind::Simplex:
      return "simplex:" + std::to_string(sizes_.size());
    case Kind::Spectraplex:
      return "spectraplex:" + std::to_string(sizes_[0]);
    case Kind::BlockSpectraplex: {
      std::string s = "blocks:";
      for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(sizes_[i]);
      }
      return s;
    }
  }
  return {};
}

int LiftSpec::order() const { return std::accumulate(sizes_.begin(), sizes_.end(), 0); }

int svec_dim(int p) { return p * (p + 1) / 2; }

Eigen::VectorXd svec(const Eigen::MatrixXd& x) {
  const int p = static_cast<int>(x.rows());
  Eigen::VectorXd v(svec_dim(p));
  int k = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) v[k++] = (i == j) ? x(i, i) : kSqrt2 * x(i, j);
  return v;
}

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int p) {
  if (v.size() != svec_dim(p)) throw ValidationError("smat: length does not match order");
  Eigen::MatrixXd x(p, p);
  int k = 0;
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      const double e = (i == j) ? v[k] : v[k] / kSqrt2;
      x(i, j) = x(j, i) = e;
      ++k;
    }
  }
  return x;
}

SupportPoint lift_support_point(const LiftSpec& lift, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != lift.lifted_dim())
    throw ValidationError("lift_support: vector has length " + std::to_string(z.size()) +
                          ", lift expects " + std::to_string(lift.lifted_dim()));
  SupportPoint best;
  if (lift.kind() == LiftSpec::Kind::Simplex) {
    Eigen::Index idx = 0;
    best.value = z.maxCoeff(&idx);  // first occurrence on ties
    best.block = static_cast<int>(idx);
    best.generator = Eigen::VectorXd::Ones(1);
    return best;
  }

  bool have = false;
  for (int b = 0; b < lift.num_blocks(); ++b) {
    const int p = lift.block_size(b);
    const auto seg = z.segment(lift.block_offset(b), lift.block_dim(b));
    if (p == 1) {
      if (!have || seg[0] > best.value + kTauEig) {
        best.value = seg[0];
        best.block = b;
        best.generator = Eigen::VectorXd::Ones(1);
        have = true;
      }
      continue;
    }
    const SymEigen eig = jacobi_eigen(smat(seg, p));
    Eigen::Index top = 0;
    const double lmax = eig.values.maxCoeff();
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
      if (eig.values[k] >= lmax - kTauEig) {
        top = k;
        break;
      }
    }
    if (!have || lmax > best.value + kTauEig) {
      best.value = lmax;
      best.block = b;
      best.generator = eig.vectors.col(top);
      normalize_sign(best.generator);
      have = true;
    }
  }
  return best;
}

Eigen::VectorXd lift_point(const LiftSpec& lift, const SupportPoint& sp) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(lift.lifted_dim());
  x.segment(lift.block_offset(sp.block), lift.block_dim(sp.block)) =
      svec(sp.generator * sp.generator.transpose());
  return x;
}

LiftSupport lift_support(const LiftSpec& lift, const Eigen::Ref<const Eigen::VectorXd>& z) {
  const SupportPoint sp = lift_support_point(lift, z);
  return {sp.value, lift_point(lift, sp)};
}

bool is_lift_point(const LiftSpec& lift, const Eigen::Ref<const Eigen::VectorXd>& x,
                   double tau_psd, double tau_sum) {
  if (x.size() != lift.lifted_dim()) return false;
  double trace = 0.0;
  for (int b = 0; b < lift.num_blocks(); ++b) {
    const int p = lift.block_size(b);
    const Eigen::MatrixXd m = smat(x.segment(lift.block_offset(b), lift.block_dim(b)), p);
    trace += m.trace();
    if (p == 1) {
      if (m(0, 0) < -tau_psd) return false;
    } else if (jacobi_eigen(m).values.minCoeff() < -tau_psd) {
      return false;
    }
  }
  return std::abs(trace - 1.0) <= tau_sum;
}

}  // namespace spectrafit
