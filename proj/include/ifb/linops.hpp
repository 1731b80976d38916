#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <memory>
#include <random>

namespace ifb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Standard normal vector drawn from a seeded generator.
Vec gaussian_vec(Index n, std::mt19937& gen);

/// A bounded linear map between flat real vectors.
///
/// Cheap to copy (payload is shared and immutable). Structural kinds allow
/// exact fast paths (diagonal solves, entrywise preconditioner sums) while
/// matrix-free maps only expose apply/adjoint callbacks.
class LinearMap {
 public:
  enum class Kind { Scaled, Diagonal, Dense, Sparse, Block2x2, MatrixFree };
  using ApplyFn = std::function<Vec(const Vec&)>;

  static LinearMap identity(Index n);
  static LinearMap scaled(Index n, double s);
  static LinearMap zero(Index rows, Index cols);
  static LinearMap diagonal(Vec d);
  static LinearMap dense(Mat a);
  static LinearMap sparse(SpMat a);
  static LinearMap block2x2(LinearMap a11, LinearMap a12, LinearMap a21,
                            LinearMap a22);
  static LinearMap matrix_free(Index rows, Index cols, ApplyFn apply,
                               ApplyFn adjoint);
  /// Stacks [top; bottom]. Keeps a sparse representation when both parts are
  /// sparse so entrywise preconditioning stays available.
  static LinearMap vstack(const LinearMap& top, const LinearMap& bottom);

  Kind kind() const;
  Index rows() const;
  Index cols() const;

  Vec apply(const Vec& x) const;
  Vec adjoint_apply(const Vec& y) const;

  /// True when individual entries K_ij are accessible (everything except
  /// MatrixFree and blocks containing MatrixFree parts).
  bool has_entries() const;
  Mat to_dense() const;

  /// Column sums of |K_ij|^p with the convention 0^0 = 0.
  Vec abs_pow_col_sums(double p) const;
  Vec abs_pow_row_sums(double p) const;

  const Vec& diag() const;   // Diagonal kind only
  double scale() const;      // Scaled kind only
  const SpMat& sparse_ref() const;  // Sparse kind only
  const LinearMap& block(int i, int j) const;  // Block2x2 kind only

 private:
  struct Impl;
  explicit LinearMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// a + c*b, preserving diagonal structure when both operands have it.
LinearMap add_scaled(const LinearMap& a, double c, const LinearMap& b);

/// Probabilistic self-adjointness check: |<Kx,y> - <x,Ky>| against a
/// relative tolerance over seeded random probes.
bool is_self_adjoint(const LinearMap& m, double tol = 1e-10, int probes = 8,
                     unsigned seed = 12345);

/// A self-adjoint positive definite map together with a solver for it and a
/// cached smallest-eigenvalue estimate.
class Metric {
 public:
  /// Verifies self-adjointness probabilistically and computes the PD margin;
  /// throws std::invalid_argument if either fails.
  explicit Metric(LinearMap map);
  /// Same checks but trusts the supplied margin instead of running an
  /// eigensolve (used for large block metrics certified via block_pd_check).
  Metric(LinearMap map, double known_margin);

  static Metric identity(Index n);

  Index dim() const { return map_.rows(); }
  const LinearMap& map() const { return map_; }
  double margin() const { return margin_; }

  Vec apply(const Vec& x) const { return map_.apply(x); }
  /// map()^{-1} v. Dense/diagonal kinds solve exactly; block and matrix-free
  /// kinds densify up to dim 512 and fail beyond that.
  Vec solve(const Vec& v) const;

 private:
  LinearMap map_;
  double margin_;
  struct Solver;
  std::shared_ptr<Solver> solver_;  // built lazily
};

/// ||x||_M^2 = <Mx, x>.
double m_norm_sq(const Metric& m, const Vec& x);

/// Largest singular value estimate. Entry-backed maps of dimension <= 512 use
/// a dense SVD; everything else runs seeded power iteration on K*K, which
/// underestimates the true norm.
double op_norm_estimate(const LinearMap& k, int iters = 1000, double tol = 1e-9,
                        unsigned seed = 0);

/// Smallest-eigenvalue estimate of a self-adjoint map. Exact for diagonal
/// kinds; dense symmetric eigensolve up to dim 512; beyond that a one-sided
/// iterative estimate (block metrics use the block positive-definiteness
/// bound, matrix-free maps a shifted power iteration).
double pd_margin(const LinearMap& m, double tol = 1e-9);

struct BlockPdResult {
  bool pd;
  double norm;  // ||A2^{-1/2} B A1^{-1/2}||
};

/// Positive definiteness test for the block map [[A1, B*], [B, A2]] with A1,
/// A2 positive definite. The norm is computed without explicit square roots,
/// via the generalized eigenproblem B* A2^{-1} B x = lambda A1 x.
BlockPdResult block_pd_check(const LinearMap& a1, const LinearMap& a2,
                             const LinearMap& b);

}  // namespace ifb
