#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "treecount/error.hpp"
#include "treecount/graph.hpp"

namespace treecount {

enum class PreconditionerKind {
  kAuto,                ///< direct below `direct_max_vertices`, incomplete Cholesky above
  kDirect,              ///< dense Cholesky of the grounded Laplacian
  kIncompleteCholesky,  ///< threshold IC of the grounded Laplacian (AMD ordered)
  kJacobi,
};

inline const char* to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::kAuto: return "auto";
    case PreconditionerKind::kDirect: return "direct";
    case PreconditionerKind::kIncompleteCholesky: return "incomplete-cholesky";
    case PreconditionerKind::kJacobi: return "jacobi";
  }
  return "?";
}

struct SolverOptions {
  double tolerance = 1e-10;  ///< target ||Lx - b|| / ||b||
  PreconditionerKind preconditioner = PreconditionerKind::kAuto;
  std::size_t direct_max_vertices = 1500;
  double iteration_cap_factor = 10.0;  ///< cap = factor * sqrt(m) * ln(1/tol)
};

struct SolveStats {
  std::size_t iterations = 0;  ///< max over right-hand sides, restarts included
  double max_relative_residual = 0.0;
};

/// Pseudoinverse access to the Laplacian of a connected graph.
///
/// Right-hand sides are mean-centred before solving; every returned column x
/// satisfies ||Lx - b|| <= tol * ||b|| (b centred) and sums to zero. Blocks of
/// right-hand sides run as independent preconditioned CG recurrences in
/// lockstep, so a column's result does not depend on the rest of its block.
class LaplacianOperator {
 public:
  explicit LaplacianOperator(const Graph& g, SolverOptions opts = {}) : graph_(g), opts_(opts) {
    require_connected(g, "build_operator");
    if (!(opts_.tolerance > 0.0)) throw PreconditionError("solver tolerance must be positive");
    const auto n = static_cast<Eigen::Index>(g.num_vertices());
    n_ = n;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.num_edges() * 4);
    degree_ = Eigen::VectorXd::Zero(n);
    for (const Edge& e : g.edges()) {
      if (e.is_loop()) continue;
      trip.emplace_back(e.u, e.v, -e.w);
      trip.emplace_back(e.v, e.u, -e.w);
      degree_(e.u) += e.w;
      degree_(e.v) += e.w;
    }
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, degree_(i));
    laplacian_.resize(n, n);
    laplacian_.setFromTriplets(trip.begin(), trip.end());
    laplacian_.makeCompressed();

    const double log_inv_tol = std::max(1.0, std::log(1.0 / opts_.tolerance));
    cap_ = static_cast<std::size_t>(
        std::ceil(opts_.iteration_cap_factor * std::sqrt(static_cast<double>(std::max<std::size_t>(1, g.num_edges()))) *
                  log_inv_tol));
    cap_ = std::max<std::size_t>(cap_, 1);

    kind_ = opts_.preconditioner;
    if (kind_ == PreconditionerKind::kAuto) {
      kind_ = g.num_vertices() <= opts_.direct_max_vertices ? PreconditionerKind::kDirect
                                                            : PreconditionerKind::kIncompleteCholesky;
    }
    if (n >= 2) setup_preconditioner();
  }

  const Graph& graph() const noexcept { return graph_; }
  std::size_t num_vertices() const noexcept { return graph_.num_vertices(); }
  double tolerance() const noexcept { return opts_.tolerance; }
  std::size_t iteration_cap() const noexcept { return cap_; }
  PreconditionerKind preconditioner() const noexcept { return kind_; }
  const Eigen::SparseMatrix<double>& laplacian() const noexcept { return laplacian_; }
  /// Dense factor of L with row/column 0 removed; null unless the direct
  /// preconditioner is in use.
  const Eigen::LLT<Eigen::MatrixXd>* grounded_factor() const noexcept { return direct_.get(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return laplacian_ * x; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b, SolveStats* stats = nullptr) const {
    Eigen::MatrixXd x = solve_many(Eigen::MatrixXd(b), stats);
    return x.col(0);
  }

  Eigen::MatrixXd solve_many(Eigen::MatrixXd b, SolveStats* stats = nullptr) const {
    if (b.rows() != n_) throw PreconditionError("solve: right-hand side has wrong dimension");
    center_columns(b);
    const Eigen::Index cols = b.cols();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n_, cols);
    SolveStats local;
    if (n_ <= 1 || cols == 0) {
      if (stats) *stats = local;
      return x;
    }

    const Eigen::VectorXd bnorm = b.colwise().norm().transpose();
    std::vector<std::size_t> used(static_cast<std::size_t>(cols), 0);
    std::vector<Eigen::Index> pending;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (bnorm(j) > 0.0) pending.push_back(j);
    }

    Eigen::VectorXd rel(cols);
    rel.setZero();
    while (!pending.empty()) {
      // Restart from the true residual of the columns still above tolerance.
      Eigen::MatrixXd r(n_, static_cast<Eigen::Index>(pending.size()));
      for (std::size_t a = 0; a < pending.size(); ++a) {
        const Eigen::Index j = pending[a];
        r.col(a) = b.col(j) - laplacian_ * x.col(j);
      }
      run_pcg(r, bnorm, pending, x, used);

      std::vector<Eigen::Index> still;
      for (Eigen::Index j : pending) {
        Eigen::VectorXd res = b.col(j) - laplacian_ * x.col(j);
        rel(j) = res.norm() / bnorm(j);
        if (rel(j) > opts_.tolerance) {
          if (used[j] >= cap_) throw SolveError(rel(j), opts_.tolerance, used[j]);
          still.push_back(j);
        }
      }
      pending = std::move(still);
    }

    center_columns(x);
    local.iterations = used.empty() ? 0 : *std::max_element(used.begin(), used.end());
    local.max_relative_residual = cols ? rel.maxCoeff() : 0.0;
    if (stats) *stats = local;
    return x;
  }

 private:
  static void center_columns(Eigen::MatrixXd& m) {
    if (m.rows() == 0) return;
    const Eigen::RowVectorXd mean = m.colwise().mean();
    m.rowwise() -= mean;
  }

  void setup_preconditioner() {
    const Eigen::Index g = n_ - 1;
    if (kind_ == PreconditionerKind::kDirect) {
      Eigen::MatrixXd dense = Eigen::MatrixXd(laplacian_).bottomRightCorner(g, g);
      direct_ = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(dense);
      if (direct_->info() != Eigen::Success) throw Error("grounded Laplacian factorization failed");
    } else if (kind_ == PreconditionerKind::kIncompleteCholesky) {
      Eigen::SparseMatrix<double> grounded = laplacian_.bottomRightCorner(g, g);
      auto ic = std::make_shared<Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>>();
      ic->compute(grounded);
      if (ic->info() == Eigen::Success) {
        incomplete_ = std::move(ic);
      } else {
        kind_ = PreconditionerKind::kJacobi;
      }
    }
  }

  // z = P * E * M_g^{-1} * E^T * r (grounded variants) or P * D^{-1} * r.
  void precondition(const Eigen::MatrixXd& r, Eigen::MatrixXd& z) const {
    const Eigen::Index g = n_ - 1;
    z.resize(r.rows(), r.cols());
    switch (kind_) {
      case PreconditionerKind::kDirect:
        z.row(0).setZero();
        z.bottomRows(g) = direct_->solve(r.bottomRows(g));
        break;
      case PreconditionerKind::kIncompleteCholesky:
        z.row(0).setZero();
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
          z.col(j).tail(g) = incomplete_->solve(r.col(j).tail(g));
        }
        break;
      default:
        z = degree_.cwiseInverse().asDiagonal() * r;
        break;
    }
    center_columns(z);
  }

  // Lockstep PCG on the columns listed in `ids`, starting from x[ids] with
  // residual r. Columns leave the block once their recurrence residual meets
  // the tolerance or the iteration cap is reached.
  void run_pcg(Eigen::MatrixXd r, const Eigen::VectorXd& bnorm, std::vector<Eigen::Index> ids, Eigen::MatrixXd& x,
               std::vector<std::size_t>& used) const {
    Eigen::MatrixXd xw(n_, r.cols());
    for (std::size_t a = 0; a < ids.size(); ++a) xw.col(a) = x.col(ids[a]);
    Eigen::MatrixXd z, p, ap;
    precondition(r, z);
    p = z;
    Eigen::RowVectorXd rz = r.cwiseProduct(z).colwise().sum();

    while (!ids.empty()) {
      ap = laplacian_ * p;
      const Eigen::RowVectorXd pap = p.cwiseProduct(ap).colwise().sum();
      std::vector<char> done(ids.size(), 0);
      bool any_done = false;
      for (std::size_t a = 0; a < ids.size(); ++a) {
        const auto col = static_cast<Eigen::Index>(a);
        const Eigen::Index j = ids[a];
        ++used[j];
        if (!(pap(col) > 0.0) || !(rz(col) > 0.0)) {
          done[a] = 1;  // breakdown at rounding level; the true-residual check decides
        } else {
          const double alpha = rz(col) / pap(col);
          xw.col(col) += alpha * p.col(col);
          r.col(col) -= alpha * ap.col(col);
          if (r.col(col).norm() <= opts_.tolerance * bnorm(j) || used[j] >= cap_) done[a] = 1;
        }
        any_done = any_done || done[a];
      }

      if (any_done) {
        std::vector<Eigen::Index> keep;
        for (std::size_t a = 0; a < ids.size(); ++a) {
          if (done[a]) {
            x.col(ids[a]) = xw.col(static_cast<Eigen::Index>(a));
          } else {
            keep.push_back(static_cast<Eigen::Index>(a));
          }
        }
        if (keep.empty()) return;
        std::vector<Eigen::Index> next_ids;
        for (Eigen::Index a : keep) next_ids.push_back(ids[static_cast<std::size_t>(a)]);
        xw = xw(Eigen::all, keep).eval();
        r = r(Eigen::all, keep).eval();
        p = p(Eigen::all, keep).eval();
        Eigen::RowVectorXd rz_keep(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t a = 0; a < keep.size(); ++a) rz_keep(static_cast<Eigen::Index>(a)) = rz(keep[a]);
        rz = rz_keep;
        ids = std::move(next_ids);
      }

      precondition(r, z);
      const Eigen::RowVectorXd rz_new = r.cwiseProduct(z).colwise().sum();
      for (Eigen::Index c = 0; c < r.cols(); ++c) {
        const double beta = rz(c) > 0.0 ? rz_new(c) / rz(c) : 0.0;
        p.col(c) = z.col(c) + beta * p.col(c);
      }
      rz = rz_new;
    }
  }

  Graph graph_;
  SolverOptions opts_;
  Eigen::Index n_ = 0;
  Eigen::SparseMatrix<double> laplacian_;
  Eigen::VectorXd degree_;
  std::size_t cap_ = 1;
  PreconditionerKind kind_ = PreconditionerKind::kAuto;
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> direct_;
  std::shared_ptr<const Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>> incomplete_;
};

/// Builds the solver for `g` with relative residual target `tol`.
inline LaplacianOperator build_operator(const Graph& g, double tol = 1e-10, SolverOptions opts = {}) {
  opts.tolerance = tol;
  return LaplacianOperator(g, opts);
}

/// Vertex-space vector of an edge: +s at u, -s at v.
inline void add_edge_vector(Eigen::Ref<Eigen::VectorXd> out, const Edge& e, double s) {
  out(e.u) += s;
  out(e.v) -= s;
}

}  // namespace treecount
