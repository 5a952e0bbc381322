#pragma once

// Dense numerical kernels shared by the solvers: matrix exponential via
// scaling-and-squaring, overflow-safe exponential propagation of a positive
// vector, and power iteration for dominant eigenpairs of nonnegative
// matrices. Everything is plain double precision; dimensions are desk scale.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "lsoc/errors.hpp"

namespace lsoc {

class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0) {}

  static DenseMatrix identity(int n) {
    DenseMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int size() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  const int n = a.size();
  DenseMatrix c(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline std::vector<double> operator*(const DenseMatrix& a, const std::vector<double>& x) {
  const int n = a.size();
  std::vector<double> y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

inline DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c = a;
  for (size_t k = 0; k < c.data().size(); ++k) c.data()[k] += b.data()[k];
  return c;
}

inline DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c = a;
  for (size_t k = 0; k < c.data().size(); ++k) c.data()[k] -= b.data()[k];
  return c;
}

inline DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
  const int n = a.size();
  DenseMatrix t(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t(j, i) = a(i, j);
  return t;
}

inline double inf_norm(const DenseMatrix& a) {
  const int n = a.size();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(a(i, j));
    worst = std::max(worst, row);
  }
  return worst;
}

inline double inf_norm(const std::vector<double>& v) {
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, std::abs(x));
  return worst;
}

inline bool all_finite(const DenseMatrix& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) return false;
  return true;
}

namespace detail {

// Solves A X = B by LU factorization with partial pivoting.
inline DenseMatrix lu_solve(DenseMatrix a, DenseMatrix b) {
  const int n = a.size();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a(col, col));
    for (int row = col + 1; row < n; ++row) {
      const double v = std::abs(a(row, col));
      if (v > best) {
        best = v;
        pivot = row;
      }
    }
    if (best == 0.0) fail(errc::non_finite, "singular matrix in lu_solve");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(col, j), a(pivot, j));
        std::swap(b(col, j), b(pivot, j));
      }
    }
    const double inv = 1.0 / a(col, col);
    for (int row = col + 1; row < n; ++row) {
      const double factor = a(row, col) * inv;
      if (factor == 0.0) continue;
      a(row, col) = 0.0;
      for (int j = col + 1; j < n; ++j) a(row, j) -= factor * a(col, j);
      for (int j = 0; j < n; ++j) b(row, j) -= factor * b(col, j);
    }
  }

  // back substitution, all right-hand sides at once
  for (int col = n - 1; col >= 0; --col) {
    const double inv = 1.0 / a(col, col);
    for (int j = 0; j < n; ++j) b(col, j) *= inv;
    for (int row = 0; row < col; ++row) {
      const double factor = a(row, col);
      if (factor == 0.0) continue;
      for (int j = 0; j < n; ++j) b(row, j) -= factor * b(col, j);
    }
  }
  return b;
}

}  // namespace detail

// Matrix exponential, diagonal Pade order 13 with norm-based scaling and
// squaring. Accurate to near machine precision for well-scaled inputs.
inline DenseMatrix expm(const DenseMatrix& m) {
  if (!all_finite(m)) fail(errc::non_finite, "expm input");
  const int n = m.size();
  static const double theta13 = 5.371920351148152;
  static const double pade[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};

  DenseMatrix a = m;
  int squarings = 0;
  const double norm = inf_norm(m);
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    a = std::ldexp(1.0, -squarings) * a;
  }

  const DenseMatrix a2 = a * a;
  const DenseMatrix a4 = a2 * a2;
  const DenseMatrix a6 = a2 * a4;
  const DenseMatrix eye = DenseMatrix::identity(n);

  DenseMatrix u = a6 * (pade[13] * a6 + pade[11] * a4 + pade[9] * a2) +
                  pade[7] * a6 + pade[5] * a4 + pade[3] * a2 + pade[1] * eye;
  u = a * u;
  const DenseMatrix v = a6 * (pade[12] * a6 + pade[10] * a4 + pade[8] * a2) +
                        pade[6] * a6 + pade[4] * a4 + pade[2] * a2 + pade[0] * eye;

  DenseMatrix r = detail::lu_solve(v - u, v + u);
  for (int s = 0; s < squarings; ++s) r = r * r;
  if (!all_finite(r)) fail(errc::non_finite, "expm overflowed");
  return r;
}

// Strictly positive vector stored as e^{log_scale} * direction, where
// direction has maximum entry exactly 1. Keeps e^{r T}-sized magnitudes
// representable.
struct ScaledPositiveVector {
  std::vector<double> direction;
  double log_scale = 0.0;

  static ScaledPositiveVector from_log(const std::vector<double>& log_values) {
    ScaledPositiveVector v;
    v.log_scale = *std::max_element(log_values.begin(), log_values.end());
    v.direction.resize(log_values.size());
    for (size_t i = 0; i < log_values.size(); ++i) {
      v.direction[i] = std::exp(log_values[i] - v.log_scale);
      if (v.direction[i] <= 0.0)
        fail(errc::positivity_lost, "component underflowed in from_log");
    }
    return v;
  }

  int size() const { return static_cast<int>(direction.size()); }
  double log_component(int i) const { return log_scale + std::log(direction[i]); }

  std::vector<double> log_components() const {
    std::vector<double> out(direction.size());
    for (size_t i = 0; i < direction.size(); ++i)
      out[i] = log_scale + std::log(direction[i]);
    return out;
  }
};

namespace detail {

inline void check_scaled_vector(const ScaledPositiveVector& v, int n) {
  if (v.size() != n) fail(errc::size_mismatch, "vector/matrix dimension");
  double mx = 0.0;
  for (double d : v.direction) {
    if (!std::isfinite(d) || d <= 0.0)
      fail(errc::precondition_violated, "direction entries must be positive");
    mx = std::max(mx, d);
  }
  if (std::abs(mx - 1.0) > 1e-9)
    fail(errc::precondition_violated, "direction must be max-normalized");
  if (!std::isfinite(v.log_scale)) fail(errc::non_finite, "log_scale");
}

}  // namespace detail

// Grid values of t -> e^{M t} v0 for t = k * duration / n_steps, k = 0..n_steps.
// One step matrix e^{M duration/n_steps} is applied repeatedly; each step is
// max-renormalized so growth is absorbed into log_scale. Requires the flow to
// keep the vector entrywise positive (true whenever M + s*I is nonnegative
// for some shift s).
inline std::vector<ScaledPositiveVector> propagate(const DenseMatrix& m,
                                                   const ScaledPositiveVector& v0,
                                                   double duration, int n_steps) {
  detail::check_scaled_vector(v0, m.size());
  if (n_steps < 1) fail(errc::precondition_violated, "n_steps must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration))
    fail(errc::precondition_violated, "duration must be nonnegative");

  const DenseMatrix step = expm((duration / n_steps) * m);
  std::vector<ScaledPositiveVector> out;
  out.reserve(static_cast<size_t>(n_steps) + 1);
  out.push_back(v0);

  ScaledPositiveVector cur = v0;
  for (int k = 1; k <= n_steps; ++k) {
    std::vector<double> next = step * cur.direction;
    double mx = 0.0;
    for (double x : next) {
      if (!std::isfinite(x)) fail(errc::non_finite, "propagate step " + std::to_string(k));
      mx = std::max(mx, x);
    }
    if (mx <= 0.0) fail(errc::positivity_lost, "propagate step " + std::to_string(k));
    const double inv = 1.0 / mx;
    for (double& x : next) {
      x *= inv;
      if (x <= 0.0) fail(errc::positivity_lost, "propagate step " + std::to_string(k));
    }
    cur.direction = std::move(next);
    cur.log_scale += std::log(mx);
    out.push_back(cur);
  }
  return out;
}

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  // strictly positive, max-norm 1
  double residual = 0.0;       // achieved |M v - value v|_inf
};

namespace detail {

// Strong connectivity of the nonzero off-diagonal pattern. Reducible inputs
// (the identity, zero rows/columns) must be rejected before iterating.
inline bool pattern_irreducible(const DenseMatrix& m) {
  const int n = m.size();
  if (n <= 1) return true;
  auto reach = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::vector<int> todo{0};
    seen[0] = true;
    while (!todo.empty()) {
      const int v = todo.back();
      todo.pop_back();
      for (int w = 0; w < n; ++w) {
        if (w == v || seen[w]) continue;
        const double entry = forward ? m(v, w) : m(w, v);
        if (entry != 0.0) {
          seen[w] = true;
          todo.push_back(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reach(true) && reach(false);
}

}  // namespace detail

// Dominant eigenpair of a nonnegative irreducible matrix by power iteration
// with max-norm normalization. Convergence is geometric once the matrix is
// primitive, which a strictly positive diagonal guarantees.
inline EigenPair power_iteration(const DenseMatrix& m, double tol = 1e-12,
                                 long max_iter = 1000000) {
  const int n = m.size();
  if (n < 1) fail(errc::precondition_violated, "empty matrix");
  for (double v : m.data()) {
    if (!std::isfinite(v)) fail(errc::non_finite, "power_iteration input");
    if (v < 0.0) fail(errc::precondition_violated, "matrix must be entrywise nonnegative");
  }
  if (!detail::pattern_irreducible(m))
    fail(errc::precondition_violated, "matrix pattern is reducible");

  std::vector<double> v(n, 1.0);
  for (long iter = 0; iter < max_iter; ++iter) {
    const std::vector<double> y = m * v;
    const double lambda = *std::max_element(y.begin(), y.end());
    if (!std::isfinite(lambda)) fail(errc::non_finite, "power_iteration iterate");
    if (lambda <= 0.0)
      fail(errc::precondition_violated, "iterate collapsed to zero");
    double residual = 0.0;
    for (int i = 0; i < n; ++i) residual = std::max(residual, std::abs(y[i] - lambda * v[i]));
    if (residual <= tol) {
      const double vmax = *std::max_element(v.begin(), v.end());
      if (vmax != 1.0)
        for (double& x : v) x /= vmax;  // put the max entry at exactly 1
      return {lambda, v, residual};
    }
    const double inv = 1.0 / lambda;
    for (int i = 0; i < n; ++i) v[i] = y[i] * inv;
  }
  fail(errc::no_convergence, "power_iteration: " + std::to_string(max_iter) + " iterations");
}

}  // namespace lsoc
