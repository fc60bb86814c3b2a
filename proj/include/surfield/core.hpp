// Core aliases and error types shared by every surfield module.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace surfield {

/// Single sparse format used throughout: compressed-row storage.
/// outerIndexPtr() = row offsets, innerIndexPtr() = column indices,
/// valuePtr() = values; symmetric matrices store both triangles so that
/// matrix-vector products stay branch-free.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Dense oracle paths (full eigendecompositions, dense covariance checks)
/// refuse to run above this size unless the caller raises the cap.
inline constexpr int kDefaultOracleCap = 2000;

struct SurfieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct NotPositiveDefinite : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct UnsupportedRefinement : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct DegeneratePoint : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct NonClosedSurface : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct EvaluationError : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct InvalidMeshSize : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct IntervalTooSmall : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct OracleCapExceeded : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct ParseError : SurfieldError {
  using SurfieldError::SurfieldError;
};
struct ConfigError : SurfieldError {
  using SurfieldError::SurfieldError;
};

/// Parallelism budget: SURFIELD_THREADS if set (>= 1), otherwise the
/// hardware concurrency. Work is partitioned so results do not depend on
/// the thread count.
int thread_budget();

/// Run fn(i) for i in [0, n) on up to thread_budget() threads. Each index is
/// processed exactly once; exceptions are rethrown on the calling thread.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace surfield
