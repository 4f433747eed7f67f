#pragma once
//
// Seeded Johnson-Lindenstrauss transforms: dense Gaussian and sparse
// (fixed number of nonzeros per column), plus the target-dimension rule.
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdpsketch/error.hpp"
#include "sdpsketch/linalg.hpp"
#include "sdpsketch/rng.hpp"

namespace sdpsketch {

enum class Ensemble { Gaussian, Sparse };

inline std::string_view to_string(Ensemble e) {
  return e == Ensemble::Gaussian ? "gaussian" : "sparse";
}

inline Ensemble parse_ensemble(std::string_view name) {
  if (name == "gaussian") return Ensemble::Gaussian;
  if (name == "sparse") return Ensemble::Sparse;
  fail(ErrorCode::InvalidConfig, "unknown ensemble '" + std::string(name) + "'");
}

struct SketchConfig {
  double epsilon = 0.5;
  double delta = 0.05;
  std::int64_t k = 1;       // rank budget
  double eta = 1.0;         // trace bound on an optimal primal point
  Ensemble ensemble = Ensemble::Gaussian;
  int sparsity = 0;         // nonzeros per column; 0 picks the default
  double dim_constant = 8.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(epsilon > 0.0 && epsilon <= 1.0, ErrorCode::InvalidConfig, "epsilon must lie in (0, 1]");
    require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidConfig, "delta must lie in (0, 1)");
    require(k >= 1, ErrorCode::InvalidConfig, "k must be at least 1");
    require(eta >= 0.0 && std::isfinite(eta), ErrorCode::InvalidConfig, "eta must be finite and >= 0");
    require(dim_constant > 0.0, ErrorCode::InvalidConfig, "dimension constant must be positive");
    require(sparsity >= 0, ErrorCode::InvalidConfig, "sparsity must be nonnegative");
  }
};

namespace detail {

// Values that land within 1e-12 (relative) above an integer are rounding noise
// from the logarithm and round down to it.
inline std::int64_t ceil_clean(double x) {
  return static_cast<std::int64_t>(std::ceil(x * (1.0 - 1e-12)));
}

inline double log_k_over_delta(const SketchConfig& config) {
  return std::log(static_cast<double>(config.k) / config.delta);
}

}  // namespace detail

/// d = max(1, ceil(c * eps^-2 * ln(k / delta))), clamped to the ambient
/// dimension when one is given.
inline int required_dimension(const SketchConfig& config, std::optional<int> ambient = std::nullopt) {
  config.validate();
  const double raw =
      config.dim_constant * detail::log_k_over_delta(config) / (config.epsilon * config.epsilon);
  std::int64_t d = std::max<std::int64_t>(1, detail::ceil_clean(raw));
  d = std::min<std::int64_t>(d, std::numeric_limits<int>::max());
  if (ambient) {
    require(*ambient >= 1, ErrorCode::InvalidShape, "ambient dimension must be positive");
    d = std::min<std::int64_t>(d, *ambient);
  }
  return static_cast<int>(d);
}

/// s = ceil(2 * eps^-1 * ln(k / delta)).
inline int default_sparsity(const SketchConfig& config) {
  config.validate();
  const double raw = 2.0 * detail::log_k_over_delta(config) / config.epsilon;
  return static_cast<int>(std::clamp<std::int64_t>(detail::ceil_clean(raw), 1,
                                                   std::numeric_limits<int>::max()));
}

/// Everything needed to regenerate a sampled sketch.
struct SketchProvenance {
  int d = 1;
  int D = 1;
  Ensemble ensemble = Ensemble::Gaussian;
  std::uint64_t seed = 0;
  int sparsity = 0;  // 0 for the Gaussian ensemble
  double dim_constant = 8.0;

  friend bool operator==(const SketchProvenance&, const SketchProvenance&) = default;
};

/// d x D sketching matrix. Sampled sketches store a dense array (Gaussian)
/// or per-column row/value lists (sparse); explicit matrices carry no
/// provenance.
class SketchMatrix {
 public:
  static SketchMatrix explicit_matrix(const Matrix& s) {
    require(s.rows() >= 1 && s.cols() >= 1, ErrorCode::InvalidShape, "sketch must be non-empty");
    SketchMatrix out;
    out.d_ = static_cast<int>(s.rows());
    out.D_ = static_cast<int>(s.cols());
    out.dense_ = s;
    return out;
  }

  int rows() const { return d_; }
  int cols() const { return D_; }
  bool is_sparse() const { return sparsity_ > 0; }
  int sparsity() const { return sparsity_; }
  const std::optional<SketchProvenance>& provenance() const { return provenance_; }

  /// Dense array (Gaussian or explicit sketches only).
  const Matrix& dense_data() const { return dense_; }

  /// Row indices / values of column j (sparse sketches only).
  std::span<const int> column_rows(int j) const {
    return {col_rows_.data() + static_cast<std::size_t>(j) * sparsity_,
            static_cast<std::size_t>(sparsity_)};
  }
  std::span<const double> column_values(int j) const {
    return {col_vals_.data() + static_cast<std::size_t>(j) * sparsity_,
            static_cast<std::size_t>(sparsity_)};
  }

  Matrix to_dense() const {
    if (!is_sparse()) return dense_;
    Matrix out = Matrix::Zero(d_, D_);
    for (int j = 0; j < D_; ++j) {
      auto r = column_rows(j);
      auto v = column_values(j);
      for (int t = 0; t < sparsity_; ++t) out(r[t], j) = v[t];
    }
    return out;
  }

  /// S * x for x with D rows.
  Matrix apply(const Matrix& x) const {
    require(x.rows() == D_, ErrorCode::DimensionMismatch, "sketch apply: expected D rows");
    if (!is_sparse()) return dense_ * x;
    // Accumulate transposed so every update touches a contiguous column.
    const Matrix xt = x.transpose();
    Matrix out_t = Matrix::Zero(x.cols(), d_);
    for (int j = 0; j < D_; ++j) {
      auto r = column_rows(j);
      auto v = column_values(j);
      for (int t = 0; t < sparsity_; ++t) out_t.col(r[t]) += v[t] * xt.col(j);
    }
    return out_t.transpose();
  }

  /// t * S^T for t with D columns.
  Matrix apply_right_transpose(const Matrix& t) const {
    require(t.cols() == D_, ErrorCode::DimensionMismatch, "sketch apply: expected D columns");
    if (!is_sparse()) return t * dense_.transpose();
    Matrix out = Matrix::Zero(t.rows(), d_);
    for (int j = 0; j < D_; ++j) {
      auto r = column_rows(j);
      auto v = column_values(j);
      for (int q = 0; q < sparsity_; ++q) out.col(r[q]) += v[q] * t.col(j);
    }
    return out;
  }

  /// S^T * y for y with d rows.
  Matrix apply_transpose(const Matrix& y) const {
    require(y.rows() == d_, ErrorCode::DimensionMismatch, "sketch transpose: expected d rows");
    if (!is_sparse()) return dense_.transpose() * y;
    Matrix out(D_, y.cols());
    for (int j = 0; j < D_; ++j) {
      auto r = column_rows(j);
      auto v = column_values(j);
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        double acc = 0.0;
        for (int t = 0; t < sparsity_; ++t) acc += v[t] * y(r[t], c);
        out(j, c) = acc;
      }
    }
    return out;
  }

  friend SketchMatrix sample_gaussian_jlt(int d, int D, std::uint64_t seed);
  friend SketchMatrix sample_sparse_jlt(int d, int D, int s, std::uint64_t seed);
  friend SketchMatrix make_sketch(const SketchConfig& config, int D);
  friend SketchMatrix regenerate_sketch(const SketchProvenance& p);

 private:
  SketchMatrix() = default;

  int d_ = 1;
  int D_ = 1;
  int sparsity_ = 0;
  Matrix dense_;
  std::vector<int> col_rows_;
  std::vector<double> col_vals_;
  std::optional<SketchProvenance> provenance_;
};

/// i.i.d. N(0, 1/d) entries; column j draws from substream (seed, j).
inline SketchMatrix sample_gaussian_jlt(int d, int D, std::uint64_t seed) {
  require(d >= 1 && d <= D, ErrorCode::InvalidShape, "gaussian JLT requires 1 <= d <= D");
  SketchMatrix out;
  out.d_ = d;
  out.D_ = D;
  out.dense_.resize(d, D);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int j = 0; j < D; ++j) {
    StreamEngine engine(seed, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < d; ++i) out.dense_(i, j) = scale * normal(engine);
  }
  out.provenance_ = SketchProvenance{d, D, Ensemble::Gaussian, seed, 0, 8.0};
  return out;
}

/// Each column gets s distinct rows (uniform, without replacement) holding
/// independent +-1/sqrt(s) values.
inline SketchMatrix sample_sparse_jlt(int d, int D, int s, std::uint64_t seed) {
  require(s >= 1 && s <= d && d <= D, ErrorCode::InvalidShape,
          "sparse JLT requires 1 <= s <= d <= D");
  SketchMatrix out;
  out.d_ = d;
  out.D_ = D;
  out.sparsity_ = s;
  out.col_rows_.resize(static_cast<std::size_t>(D) * s);
  out.col_vals_.resize(static_cast<std::size_t>(D) * s);
  const double magnitude = 1.0 / std::sqrt(static_cast<double>(s));
  std::vector<int> pool(static_cast<std::size_t>(d));
  std::vector<std::pair<int, double>> picked(static_cast<std::size_t>(s));
  for (int j = 0; j < D; ++j) {
    StreamEngine engine(seed, static_cast<std::uint64_t>(j));
    for (int i = 0; i < d; ++i) pool[i] = i;
    for (int t = 0; t < s; ++t) {
      std::uniform_int_distribution<int> pick(t, d - 1);
      std::swap(pool[t], pool[pick(engine)]);
      const bool negative = (engine() >> 63) != 0;
      picked[t] = {pool[t], negative ? -magnitude : magnitude};
    }
    std::sort(picked.begin(), picked.end());
    for (int t = 0; t < s; ++t) {
      out.col_rows_[static_cast<std::size_t>(j) * s + t] = picked[t].first;
      out.col_vals_[static_cast<std::size_t>(j) * s + t] = picked[t].second;
    }
  }
  out.provenance_ = SketchProvenance{d, D, Ensemble::Sparse, seed, s, 8.0};
  return out;
}

/// Regenerates a sketch from its provenance record.
inline SketchMatrix regenerate_sketch(const SketchProvenance& p) {
  SketchMatrix s = p.ensemble == Ensemble::Gaussian ? sample_gaussian_jlt(p.d, p.D, p.seed)
                                                    : sample_sparse_jlt(p.d, p.D, p.sparsity, p.seed);
  s.provenance_->dim_constant = p.dim_constant;
  return s;
}

/// Samples the transform a config asks for, in ambient dimension D.
inline SketchMatrix make_sketch(const SketchConfig& config, int D) {
  const int d = required_dimension(config, D);
  SketchMatrix out;
  if (config.ensemble == Ensemble::Gaussian) {
    out = sample_gaussian_jlt(d, D, config.seed);
  } else {
    int s = config.sparsity;
    if (s == 0) {
      s = std::min(default_sparsity(config), d);
    } else {
      require(s <= d, ErrorCode::InvalidConfig, "sparsity exceeds the sketch dimension");
    }
    out = sample_sparse_jlt(d, D, s, config.seed);
  }
  out.provenance_->dim_constant = config.dim_constant;
  return out;
}

/// Largest |<Sv, Sw> - <v, w>| over all pairs of columns of `vectors`,
/// including each column with itself.
inline double jlt_distortion(const SketchMatrix& s, const Matrix& vectors) {
  require(vectors.rows() == s.cols(), ErrorCode::DimensionMismatch,
          "jlt_distortion: vector length differs from D");
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    require(std::abs(vectors.col(j).norm() - 1.0) <= 1e-10, ErrorCode::InvalidArgument,
            "jlt_distortion: vectors must be unit length");
  }
  const Matrix sv = s.apply(vectors);
  const Matrix diff = sv.transpose() * sv - vectors.transpose() * vectors;
  return diff.cwiseAbs().maxCoeff();
}

inline double jlt_distortion(const SketchMatrix& s, const std::vector<Vector>& vectors) {
  require(!vectors.empty(), ErrorCode::InvalidArgument, "jlt_distortion: no vectors");
  Matrix cols(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    require(vectors[j].size() == cols.rows(), ErrorCode::DimensionMismatch,
            "jlt_distortion: vectors differ in length");
    cols.col(static_cast<Eigen::Index>(j)) = vectors[j];
  }
  return jlt_distortion(s, cols);
}

}  // namespace sdpsketch
