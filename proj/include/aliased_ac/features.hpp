#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "aliased_ac/oracles.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac {

enum class FeatureKind { tabular, random_projection, custom_table };

const char* to_string(FeatureKind kind);

/// Feature map stored as a table with one row per input index. Rows use the
/// QTable flattening: (s * Z + z) * A + a for phi, z * A + a for chi and psi.
class FeatureMap {
 public:
  /// Throws ValidationError when some row has l2 norm above 1 + 1e-12.
  FeatureMap(RowMatrix table, FeatureKind kind);

  int n_rows() const { return static_cast<int>(table_.rows()); }
  int dim() const { return static_cast<int>(table_.cols()); }
  FeatureKind kind() const { return kind_; }
  const RowMatrix& table() const { return table_; }

  std::span<const double> operator()(int row) const { return row_span(table_, row); }
  double dot(const Vector& beta, int row) const { return table_.row(row).dot(beta); }

 private:
  RowMatrix table_;
  FeatureKind kind_;
};

inline constexpr double kFeatureNormTolerance = 1e-12;

/// One-hot rows.
FeatureMap tabular_features(int n_rows);

/// Gaussian rows scaled to unit norm.
FeatureMap random_features(int n_rows, int dim, std::uint64_t seed);

/// Rows needed for a critic of the given mode.
int feature_rows(CriticMode mode, int n_states, int n_agent_states, int n_actions);

struct BestInClass {
  Vector beta;
  double error = 0.0;
  bool constrained = false;  // the ball constraint was active
};

/// argmin over ||beta|| <= radius of sum_x w(x) (<beta, features(x)> - target(x))^2.
/// Zero-weight rows are dropped (their target may be NaN). Throws ValidationError
/// when every weight is zero or radius < 0.
BestInClass weighted_ball_least_squares(const RowMatrix& features, const Vector& target, const Vector& weights,
                                        double radius);

BestInClass best_in_class(const FeatureMap& features, const Vector& target, const Vector& weights, double radius);

/// Target and weights taken from an exact table and the sampling distribution
/// of its mode.
BestInClass best_in_class(const FeatureMap& features, const QTable& target, const VisitationMeasure& d,
                          const TabularPolicy& policy, double radius);

/// CSV with header row_index,component_index,value (dense).
void write_csv(std::ostream& out, const FeatureMap& features);
FeatureMap read_feature_csv(std::istream& in);
FeatureMap load_feature_csv(const std::filesystem::path& path);

/// "tabular", "random:<dim>[:<seed>]" or a CSV path.
FeatureMap resolve_features(const std::string& spec, int n_rows, std::uint64_t default_seed = 0);

}  // namespace aliased_ac
