#include "ifb/linops.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>
#include <string>

namespace ifb {

namespace {

constexpr Index kDenseLimit = 512;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Vec gaussian_vec(Index n, std::mt19937& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

struct LinearMap::Impl {
  Kind kind;
  Index rows = 0, cols = 0;
  double s = 0.0;
  Vec d;
  Mat a;
  SpMat sp;
  std::array<std::shared_ptr<const LinearMap>, 4> blocks;
  ApplyFn fwd, adj;
};

LinearMap::Kind LinearMap::kind() const { return impl_->kind; }
Index LinearMap::rows() const { return impl_->rows; }
Index LinearMap::cols() const { return impl_->cols; }

LinearMap LinearMap::identity(Index n) { return scaled(n, 1.0); }

LinearMap LinearMap::scaled(Index n, double s) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Scaled;
  impl->rows = impl->cols = n;
  impl->s = s;
  return LinearMap(impl);
}

LinearMap LinearMap::zero(Index rows, Index cols) {
  if (rows == cols) return scaled(rows, 0.0);
  return sparse(SpMat(rows, cols));
}

LinearMap LinearMap::diagonal(Vec d) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Diagonal;
  impl->rows = impl->cols = d.size();
  impl->d = std::move(d);
  return LinearMap(impl);
}

LinearMap LinearMap::dense(Mat a) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Dense;
  impl->rows = a.rows();
  impl->cols = a.cols();
  impl->a = std::move(a);
  return LinearMap(impl);
}

LinearMap LinearMap::sparse(SpMat a) {
  a.makeCompressed();
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Sparse;
  impl->rows = a.rows();
  impl->cols = a.cols();
  impl->sp = std::move(a);
  return LinearMap(impl);
}

LinearMap LinearMap::block2x2(LinearMap a11, LinearMap a12, LinearMap a21,
                              LinearMap a22) {
  require(a11.rows() == a12.rows() && a21.rows() == a22.rows() &&
              a11.cols() == a21.cols() && a12.cols() == a22.cols(),
          "block2x2: inconsistent block dimensions");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Block2x2;
  impl->rows = a11.rows() + a21.rows();
  impl->cols = a11.cols() + a12.cols();
  impl->blocks = {std::make_shared<const LinearMap>(std::move(a11)),
                  std::make_shared<const LinearMap>(std::move(a12)),
                  std::make_shared<const LinearMap>(std::move(a21)),
                  std::make_shared<const LinearMap>(std::move(a22))};
  return LinearMap(impl);
}

LinearMap LinearMap::matrix_free(Index rows, Index cols, ApplyFn apply,
                                 ApplyFn adjoint) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::MatrixFree;
  impl->rows = rows;
  impl->cols = cols;
  impl->fwd = std::move(apply);
  impl->adj = std::move(adjoint);
  return LinearMap(impl);
}

LinearMap LinearMap::vstack(const LinearMap& top, const LinearMap& bottom) {
  require(top.cols() == bottom.cols(), "vstack: column mismatch");
  if (top.kind() == Kind::Sparse && bottom.kind() == Kind::Sparse) {
    SpMat out(top.rows() + bottom.rows(), top.cols());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(top.sparse_ref().nonZeros() + bottom.sparse_ref().nonZeros());
    for (int k = 0; k < top.sparse_ref().outerSize(); ++k)
      for (SpMat::InnerIterator it(top.sparse_ref(), k); it; ++it)
        trips.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < bottom.sparse_ref().outerSize(); ++k)
      for (SpMat::InnerIterator it(bottom.sparse_ref(), k); it; ++it)
        trips.emplace_back(top.rows() + it.row(), it.col(), it.value());
    out.setFromTriplets(trips.begin(), trips.end());
    return sparse(std::move(out));
  }
  LinearMap t = top, b = bottom;
  Index r1 = t.rows(), r2 = b.rows();
  return matrix_free(
      r1 + r2, top.cols(),
      [t, b, r1, r2](const Vec& x) {
        Vec out(r1 + r2);
        out.head(r1) = t.apply(x);
        out.tail(r2) = b.apply(x);
        return out;
      },
      [t, b, r1, r2](const Vec& y) {
        return Vec(t.adjoint_apply(y.head(r1)) + b.adjoint_apply(y.tail(r2)));
      });
}

Vec LinearMap::apply(const Vec& x) const {
  require(x.size() == cols(), "LinearMap::apply: dimension mismatch");
  const Impl& im = *impl_;
  switch (im.kind) {
    case Kind::Scaled:
      return im.s * x;
    case Kind::Diagonal:
      return im.d.cwiseProduct(x);
    case Kind::Dense:
      return im.a * x;
    case Kind::Sparse:
      return im.sp * x;
    case Kind::Block2x2: {
      Index c1 = im.blocks[0]->cols(), r1 = im.blocks[0]->rows();
      Vec out(rows());
      out.head(r1) =
          im.blocks[0]->apply(x.head(c1)) + im.blocks[1]->apply(x.tail(x.size() - c1));
      out.tail(rows() - r1) =
          im.blocks[2]->apply(x.head(c1)) + im.blocks[3]->apply(x.tail(x.size() - c1));
      return out;
    }
    case Kind::MatrixFree:
      return im.fwd(x);
  }
  throw std::logic_error("unreachable");
}

Vec LinearMap::adjoint_apply(const Vec& y) const {
  require(y.size() == rows(), "LinearMap::adjoint_apply: dimension mismatch");
  const Impl& im = *impl_;
  switch (im.kind) {
    case Kind::Scaled:
      return im.s * y;
    case Kind::Diagonal:
      return im.d.cwiseProduct(y);
    case Kind::Dense:
      return im.a.transpose() * y;
    case Kind::Sparse:
      return im.sp.transpose() * y;
    case Kind::Block2x2: {
      Index r1 = im.blocks[0]->rows(), c1 = im.blocks[0]->cols();
      Vec out(cols());
      out.head(c1) = im.blocks[0]->adjoint_apply(y.head(r1)) +
                     im.blocks[2]->adjoint_apply(y.tail(y.size() - r1));
      out.tail(cols() - c1) = im.blocks[1]->adjoint_apply(y.head(r1)) +
                              im.blocks[3]->adjoint_apply(y.tail(y.size() - r1));
      return out;
    }
    case Kind::MatrixFree:
      return im.adj(y);
  }
  throw std::logic_error("unreachable");
}

bool LinearMap::has_entries() const {
  switch (kind()) {
    case Kind::MatrixFree:
      return false;
    case Kind::Block2x2:
      for (const auto& b : impl_->blocks)
        if (!b->has_entries()) return false;
      return true;
    default:
      return true;
  }
}

Mat LinearMap::to_dense() const {
  const Impl& im = *impl_;
  switch (im.kind) {
    case Kind::Scaled:
      return im.s * Mat::Identity(rows(), cols());
    case Kind::Diagonal:
      return Mat(im.d.asDiagonal());
    case Kind::Dense:
      return im.a;
    case Kind::Sparse:
      return Mat(im.sp);
    case Kind::Block2x2: {
      Mat out(rows(), cols());
      Index r1 = im.blocks[0]->rows(), c1 = im.blocks[0]->cols();
      out.topLeftCorner(r1, c1) = im.blocks[0]->to_dense();
      out.topRightCorner(r1, cols() - c1) = im.blocks[1]->to_dense();
      out.bottomLeftCorner(rows() - r1, c1) = im.blocks[2]->to_dense();
      out.bottomRightCorner(rows() - r1, cols() - c1) = im.blocks[3]->to_dense();
      return out;
    }
    case Kind::MatrixFree: {
      require(cols() <= 4096, "to_dense: matrix-free map too large");
      Mat out(rows(), cols());
      Vec e = Vec::Zero(cols());
      for (Index j = 0; j < cols(); ++j) {
        e[j] = 1.0;
        out.col(j) = impl_->fwd(e);
        e[j] = 0.0;
      }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

// |v|^p with 0^0 = 0.
inline double abs_pow(double v, double p) {
  if (v == 0.0) return 0.0;
  if (p == 0.0) return 1.0;
  return std::pow(std::abs(v), p);
}

}  // namespace

Vec LinearMap::abs_pow_col_sums(double p) const {
  const Impl& im = *impl_;
  switch (im.kind) {
    case Kind::Scaled: {
      Vec out = Vec::Constant(cols(), abs_pow(im.s, p));
      return out;
    }
    case Kind::Diagonal: {
      Vec out(cols());
      for (Index i = 0; i < cols(); ++i) out[i] = abs_pow(im.d[i], p);
      return out;
    }
    case Kind::Dense: {
      Vec out = Vec::Zero(cols());
      for (Index j = 0; j < cols(); ++j)
        for (Index i = 0; i < rows(); ++i) out[j] += abs_pow(im.a(i, j), p);
      return out;
    }
    case Kind::Sparse: {
      Vec out = Vec::Zero(cols());
      for (int k = 0; k < im.sp.outerSize(); ++k)
        for (SpMat::InnerIterator it(im.sp, k); it; ++it)
          out[it.col()] += abs_pow(it.value(), p);
      return out;
    }
    case Kind::Block2x2: {
      Index c1 = im.blocks[0]->cols();
      Vec out(cols());
      out.head(c1) = im.blocks[0]->abs_pow_col_sums(p) + im.blocks[2]->abs_pow_col_sums(p);
      out.tail(cols() - c1) =
          im.blocks[1]->abs_pow_col_sums(p) + im.blocks[3]->abs_pow_col_sums(p);
      return out;
    }
    case Kind::MatrixFree:
      throw std::invalid_argument("abs_pow_col_sums: map has no entry access");
  }
  throw std::logic_error("unreachable");
}

Vec LinearMap::abs_pow_row_sums(double p) const {
  const Impl& im = *impl_;
  switch (im.kind) {
    case Kind::Scaled:
    case Kind::Diagonal:
      return abs_pow_col_sums(p);
    case Kind::Dense: {
      Vec out = Vec::Zero(rows());
      for (Index i = 0; i < rows(); ++i)
        for (Index j = 0; j < cols(); ++j) out[i] += abs_pow(im.a(i, j), p);
      return out;
    }
    case Kind::Sparse: {
      Vec out = Vec::Zero(rows());
      for (int k = 0; k < im.sp.outerSize(); ++k)
        for (SpMat::InnerIterator it(im.sp, k); it; ++it)
          out[it.row()] += abs_pow(it.value(), p);
      return out;
    }
    case Kind::Block2x2: {
      Index r1 = im.blocks[0]->rows();
      Vec out(rows());
      out.head(r1) = im.blocks[0]->abs_pow_row_sums(p) + im.blocks[1]->abs_pow_row_sums(p);
      out.tail(rows() - r1) =
          im.blocks[2]->abs_pow_row_sums(p) + im.blocks[3]->abs_pow_row_sums(p);
      return out;
    }
    case Kind::MatrixFree:
      throw std::invalid_argument("abs_pow_row_sums: map has no entry access");
  }
  throw std::logic_error("unreachable");
}

const Vec& LinearMap::diag() const {
  require(kind() == Kind::Diagonal, "diag: not a diagonal map");
  return impl_->d;
}

double LinearMap::scale() const {
  require(kind() == Kind::Scaled, "scale: not a scaled-identity map");
  return impl_->s;
}

const SpMat& LinearMap::sparse_ref() const {
  require(kind() == Kind::Sparse, "sparse_ref: not a sparse map");
  return impl_->sp;
}

const LinearMap& LinearMap::block(int i, int j) const {
  require(kind() == Kind::Block2x2, "block: not a block map");
  return *impl_->blocks[static_cast<size_t>(2 * i + j)];
}

LinearMap add_scaled(const LinearMap& a, double c, const LinearMap& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "add_scaled: dimension mismatch");
  auto diag_of = [](const LinearMap& m) -> Vec {
    if (m.kind() == LinearMap::Kind::Scaled)
      return Vec::Constant(m.rows(), m.scale());
    return m.diag();
  };
  bool a_diag = a.kind() == LinearMap::Kind::Scaled || a.kind() == LinearMap::Kind::Diagonal;
  bool b_diag = b.kind() == LinearMap::Kind::Scaled || b.kind() == LinearMap::Kind::Diagonal;
  if (a_diag && b_diag) return LinearMap::diagonal(diag_of(a) + c * diag_of(b));
  if (a.has_entries() && b.has_entries() && a.rows() <= 2048)
    return LinearMap::dense(a.to_dense() + c * b.to_dense());
  LinearMap ac = a, bc = b;
  return LinearMap::matrix_free(
      a.rows(), a.cols(),
      [ac, bc, c](const Vec& x) { return Vec(ac.apply(x) + c * bc.apply(x)); },
      [ac, bc, c](const Vec& y) {
        return Vec(ac.adjoint_apply(y) + c * bc.adjoint_apply(y));
      });
}

bool is_self_adjoint(const LinearMap& m, double tol, int probes, unsigned seed) {
  if (m.rows() != m.cols()) return false;
  std::mt19937 gen(seed);
  for (int p = 0; p < probes; ++p) {
    Vec x = gaussian_vec(m.cols(), gen);
    Vec y = gaussian_vec(m.cols(), gen);
    Vec mx = m.apply(x);
    Vec my = m.apply(y);
    double lhs = mx.dot(y), rhs = x.dot(my);
    double scale = std::max(1.0, std::max(mx.norm() * y.norm(), my.norm() * x.norm()));
    if (std::abs(lhs - rhs) > tol * scale) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Metric

struct Metric::Solver {
  bool built = false;
  Eigen::LDLT<Mat> ldlt;                    // dense path
  Eigen::SimplicialLDLT<SpMat> sp_ldlt;     // sparse path
  bool use_sparse = false;
};

Metric::Metric(LinearMap map) : map_(std::move(map)), solver_(std::make_shared<Solver>()) {
  require(is_self_adjoint(map_), "Metric: map is not self-adjoint");
  margin_ = pd_margin(map_);
  require(margin_ > 0, "Metric: map is not positive definite");
}

Metric::Metric(LinearMap map, double known_margin)
    : map_(std::move(map)), margin_(known_margin), solver_(std::make_shared<Solver>()) {
  require(is_self_adjoint(map_), "Metric: map is not self-adjoint");
  require(margin_ > 0, "Metric: map is not positive definite");
}

Metric Metric::identity(Index n) { return Metric(LinearMap::identity(n), 1.0); }

Vec Metric::solve(const Vec& v) const {
  require(v.size() == dim(), "Metric::solve: dimension mismatch");
  switch (map_.kind()) {
    case LinearMap::Kind::Scaled:
      return v / map_.scale();
    case LinearMap::Kind::Diagonal:
      return v.cwiseQuotient(map_.diag());
    case LinearMap::Kind::Sparse:
      if (!solver_->built) {
        solver_->sp_ldlt.compute(map_.sparse_ref());
        require(solver_->sp_ldlt.info() == Eigen::Success, "Metric::solve: factorization failed");
        solver_->use_sparse = true;
        solver_->built = true;
      }
      return solver_->sp_ldlt.solve(v);
    default: {
      require(dim() <= kDenseLimit, "Metric::solve: map too large for dense solve");
      if (!solver_->built) {
        solver_->ldlt.compute(map_.to_dense());
        solver_->built = true;
      }
      return solver_->ldlt.solve(v);
    }
  }
}

double m_norm_sq(const Metric& m, const Vec& x) {
  require(x.size() == m.dim(), "m_norm_sq: dimension mismatch");
  return x.dot(m.apply(x));
}

// ---------------------------------------------------------------------------
// Operator norm

double op_norm_estimate(const LinearMap& k, int iters, double tol, unsigned seed) {
  require(iters >= 1 && tol > 0, "op_norm_estimate: bad parameters");
  if (k.has_entries() && std::max(k.rows(), k.cols()) <= kDenseLimit) {
    Mat a = k.to_dense();
    if (a.size() == 0) return 0.0;
    Eigen::BDCSVD<Mat> svd(a);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  }
  std::mt19937 gen(seed);
  Vec v = gaussian_vec(k.cols(), gen);
  double vn = v.norm();
  if (vn == 0) return 0.0;
  v /= vn;
  double sigma = 0.0;
  for (int i = 0; i < iters; ++i) {
    Vec kv = k.apply(v);
    double s = kv.norm();
    if (s == 0) return 0.0;
    Vec w = k.adjoint_apply(kv);
    double wn = w.norm();
    if (wn == 0) return s;
    v = w / wn;
    if (i > 0 && std::abs(s - sigma) <= tol * std::max(s, 1e-300)) {
      sigma = s;
      break;
    }
    sigma = s;
  }
  return sigma;
}

// ---------------------------------------------------------------------------
// PD margin

double pd_margin(const LinearMap& m, double tol) {
  require(m.rows() == m.cols(), "pd_margin: map not square");
  require(is_self_adjoint(m), "pd_margin: map is not self-adjoint");
  switch (m.kind()) {
    case LinearMap::Kind::Scaled:
      return m.scale();
    case LinearMap::Kind::Diagonal:
      return m.diag().minCoeff();
    default:
      break;
  }
  if (m.has_entries() && m.rows() <= kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m.to_dense(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  if (m.kind() == LinearMap::Kind::Block2x2) {
    // Lower bound via the block positive-definiteness lemma:
    // lambda_min >= (1 - ||A2^{-1/2} B A1^{-1/2}||) * min(lambda_min(A1), lambda_min(A2)).
    const LinearMap& a1 = m.block(0, 0);
    const LinearMap& a2 = m.block(1, 1);
    double m1 = pd_margin(a1, tol);
    double m2 = pd_margin(a2, tol);
    if (m1 <= 0 || m2 <= 0) return std::min(m1, m2);
    BlockPdResult r = block_pd_check(a1, a2, m.block(1, 0));
    return (1.0 - r.norm) * std::min(m1, m2);
  }
  // One-sided shifted power iteration estimate: lambda_min ~= c - ||c I - M||.
  double c = op_norm_estimate(m, 2000, tol);
  if (c == 0) return 0.0;
  LinearMap shifted = add_scaled(LinearMap::scaled(m.rows(), c), -1.0, m);
  return c - op_norm_estimate(shifted, 2000, tol, 1);
}

// ---------------------------------------------------------------------------
// Block positive definiteness

BlockPdResult block_pd_check(const LinearMap& a1, const LinearMap& a2,
                             const LinearMap& b) {
  require(b.cols() == a1.rows() && b.rows() == a2.rows(),
          "block_pd_check: dimension mismatch");
  double margin1 = pd_margin(a1);
  require(margin1 > 0, "block_pd_check: a1 not positive definite");
  double margin2 = pd_margin(a2);
  require(margin2 > 0, "block_pd_check: a2 not positive definite");

  double lam = 0.0;
  bool small = a1.has_entries() && a2.has_entries() && b.has_entries() &&
               std::max(b.rows(), b.cols()) <= kDenseLimit;
  if (small) {
    // Exact: largest generalized eigenvalue of B^T A2^{-1} B x = lambda A1 x.
    Mat a2d = a2.to_dense();
    Mat bd = b.to_dense();
    Mat g = bd.transpose() * a2d.ldlt().solve(bd);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(g, a1.to_dense(),
                                                     Eigen::EigenvaluesOnly);
    lam = std::max(0.0, es.eigenvalues().maxCoeff());
  } else {
    Metric m1(a1, margin1), m2(a2, margin2);
    std::mt19937 gen(7);
    Vec x = gaussian_vec(a1.cols(), gen);
    x /= std::sqrt(std::max(x.dot(m1.apply(x)), 1e-300));
    for (int i = 0; i < 1000; ++i) {
      Vec z = b.adjoint_apply(m2.solve(b.apply(x)));
      double lam_new = x.dot(z);
      if (lam_new <= 0) {
        lam = 0.0;
        break;
      }
      Vec xn = m1.solve(z);
      double nrm = std::sqrt(std::max(xn.dot(m1.apply(xn)), 0.0));
      if (nrm == 0) {
        lam = lam_new;
        break;
      }
      x = xn / nrm;
      if (i > 0 && std::abs(lam_new - lam) <= 1e-12 * std::max(lam_new, 1e-300)) {
        lam = lam_new;
        break;
      }
      lam = lam_new;
    }
  }
  double norm = std::sqrt(lam);
  return {norm < 1.0 - 1e-9, norm};
}

}  // namespace ifb
