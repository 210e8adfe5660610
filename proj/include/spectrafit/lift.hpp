#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace spectrafit {

/// Eigenvalues within this distance of the block-wise maximum count as ties.
inline constexpr double kTauEig = 1e-10;

/// The fixed convex set C whose linear images form the model family.
///
/// Lifted vectors use the scaled half-vectorization of each symmetric block
/// (upper triangle, row-major, off-diagonals times sqrt(2)), concatenated
/// over blocks, so the Euclidean inner product of two lifted vectors equals
/// the trace inner product of the matrices they encode. A simplex is stored
/// as q blocks of size one.
class LiftSpec {
 public:
  enum class Kind { Simplex, Spectraplex, BlockSpectraplex };

  static LiftSpec simplex(int q);
  static LiftSpec spectraplex(int p);
  static LiftSpec blocks(std::vector<int> sizes);

  /// Parses "simplex:6", "spectraplex:3" or "blocks:1,1,2".
  static LiftSpec parse(std::string_view text);
  std::string to_string() const;

  Kind kind() const { return kind_; }
  int lifted_dim() const { return lifted_dim_; }
  int num_blocks() const { return static_cast<int>(sizes_.size()); }
  int block_size(int b) const { return sizes_[b]; }
  int block_offset(int b) const { return offsets_[b]; }
  int block_dim(int b) const { return sizes_[b] * (sizes_[b] + 1) / 2; }
  /// q for the simplex, p for the spectraplex, sum of block sizes otherwise.
  int order() const;

  bool operator==(const LiftSpec& o) const { return kind_ == o.kind_ && sizes_ == o.sizes_; }

 private:
  LiftSpec(Kind kind, std::vector<int> sizes);

  Kind kind_;
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int lifted_dim_ = 0;
};

int svec_dim(int p);
Eigen::VectorXd svec(const Eigen::MatrixXd& x);
Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int p);

/// Rank-one maximizer of a linear functional over C: v v^T placed in block
/// `block` (for the simplex, v = [1] and block is the vertex index).
struct SupportPoint {
  double value = 0.0;
  int block = 0;
  Eigen::VectorXd generator;
};

/// Support value h_C(z) and the deterministic maximizer e_C(z).
SupportPoint lift_support_point(const LiftSpec& lift, const Eigen::Ref<const Eigen::VectorXd>& z);

/// Expands a support point into its lifted-space coordinates.
Eigen::VectorXd lift_point(const LiftSpec& lift, const SupportPoint& sp);

struct LiftSupport {
  double value = 0.0;
  Eigen::VectorXd maximizer;
};

LiftSupport lift_support(const LiftSpec& lift, const Eigen::Ref<const Eigen::VectorXd>& z);

/// Membership test for C: PSD blocks (nonnegative entries for the simplex)
/// with total trace one.
bool is_lift_point(const LiftSpec& lift, const Eigen::Ref<const Eigen::VectorXd>& x,
                   double tau_psd = 1e-9, double tau_sum = 1e-9);

}  // namespace spectrafit
