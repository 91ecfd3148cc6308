#include "aliased_ac/features.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "aliased_ac/csv.hpp"
#include "aliased_ac/error.hpp"
#include "aliased_ac/rng.hpp"

namespace aliased_ac {

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::tabular: return "tabular";
    case FeatureKind::random_projection: return "random";
    case FeatureKind::custom_table: return "custom";
  }
  return "?";
}

FeatureMap::FeatureMap(RowMatrix table, FeatureKind kind) : table_(std::move(table)), kind_(kind) {
  if (table_.rows() < 1 || table_.cols() < 1) throw ValidationError("feature table must be non-empty");
  for (Eigen::Index i = 0; i < table_.rows(); ++i) {
    const double norm = table_.row(i).norm();
    if (!std::isfinite(norm) || norm > 1.0 + kFeatureNormTolerance) {
      throw ValidationError("feature row " + std::to_string(i) + " has norm " + format_number(norm) + " > 1");
    }
  }
}

FeatureMap tabular_features(int n_rows) {
  if (n_rows < 1) throw ValidationError("feature map needs at least one row");
  return FeatureMap(RowMatrix::Identity(n_rows, n_rows), FeatureKind::tabular);
}

FeatureMap random_features(int n_rows, int dim, std::uint64_t seed) {
  if (n_rows < 1 || dim < 1) throw ValidationError("random features need n_rows >= 1 and dim >= 1");
  Rng rng(seed);
  RowMatrix table(n_rows, dim);
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < dim; ++j) table(i, j) = rng.normal();
    const double norm = table.row(i).norm();
    if (norm > 0.0) table.row(i) /= norm;
  }
  return FeatureMap(std::move(table), FeatureKind::random_projection);
}

int feature_rows(CriticMode mode, int n_states, int n_agent_states, int n_actions) {
  return mode == CriticMode::asymmetric ? n_states * n_agent_states * n_actions : n_agent_states * n_actions;
}

BestInClass weighted_ball_least_squares(const RowMatrix& features, const Vector& target, const Vector& weights,
                                        double radius) {
  if (features.rows() != target.size() || features.rows() != weights.size()) {
    throw ValidationError("feature rows, target and weights differ in length");
  }
  if (!(radius >= 0.0)) throw ValidationError("radius must be >= 0");
  const Eigen::Index dim = features.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  bool any = false;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double w = weights[i];
    if (w < 0.0) throw ValidationError("negative weight");
    if (w == 0.0) continue;
    if (!std::isfinite(target[i])) throw ValidationError("target undefined on a weighted row");
    any = true;
    const Vector row = features.row(i).transpose();
    gram.noalias() += w * row * row.transpose();
    rhs.noalias() += w * target[i] * row;
  }
  if (!any) throw ValidationError("all weights are zero");

  BestInClass out;
  out.beta = Vector::Zero(dim);
  if (radius > 0.0) {
    gram.diagonal().array() += 1e-12;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Vector lambda = eig.eigenvalues();
    const Vector coeff = eig.eigenvectors().transpose() * rhs;
    const double cutoff = 1e-12 * std::max(1.0, lambda.maxCoeff());
    auto solve = [&](double ridge) {
      Vector c(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double denom = lambda[i] + ridge;
        c[i] = (ridge == 0.0 && lambda[i] <= cutoff) ? 0.0 : coeff[i] / denom;
      }
      return Vector(eig.eigenvectors() * c);
    };
    Vector beta = solve(0.0);
    if (beta.norm() > radius) {
      out.constrained = true;
      double lo = 0.0;
      double hi = rhs.norm() / radius + 1.0;
      for (int it = 0; it < 500; ++it) {
        const double mid = 0.5 * (lo + hi);
        beta = solve(mid);
        const double norm = beta.norm();
        if (std::abs(norm - radius) <= 1e-10) break;
        (norm > radius ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
      }
      if (std::abs(beta.norm() - radius) > 1e-10) beta = solve(hi);
      if (beta.norm() > radius) beta *= radius / beta.norm();
    }
    out.beta = std::move(beta);
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    if (weights[i] == 0.0) continue;
    const double r = features.row(i).dot(out.beta) - target[i];
    sum += weights[i] * r * r;
  }
  out.error = std::sqrt(sum);
  return out;
}

namespace {

// One-hot rows decouple the problem: beta_i = w_i t_i / (w_i + ridge), with
// ridge = 0 unless the ball is active. Exact zero error when representable.
BestInClass tabular_ball_least_squares(const Vector& target, const Vector& weights, double radius) {
  if (target.size() != weights.size()) throw ValidationError("target and weights differ in length");
  if (!(radius >= 0.0)) throw ValidationError("radius must be >= 0");
  const Eigen::Index n = target.size();
  bool any = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights[i] < 0.0) throw ValidationError("negative weight");
    if (weights[i] == 0.0) continue;
    if (!std::isfinite(target[i])) throw ValidationError("target undefined on a weighted row");
    any = true;
  }
  if (!any) throw ValidationError("all weights are zero");
  auto solve = [&](double ridge) {
    Vector beta = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights[i] > 0.0) beta[i] = weights[i] * target[i] / (weights[i] + ridge);
    }
    return beta;
  };
  BestInClass out;
  out.beta = radius > 0.0 ? solve(0.0) : Vector::Zero(n);
  if (out.beta.norm() > radius) {
    out.constrained = true;
    double lo = 0.0;
    double hi = 1.0;
    while (solve(hi).norm() > radius) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (solve(mid).norm() > radius ? lo : hi) = mid;
    }
    out.beta = solve(hi);
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights[i] == 0.0) continue;
    const double r = out.beta[i] - target[i];
    sum += weights[i] * r * r;
  }
  out.error = std::sqrt(sum);
  return out;
}

}  // namespace

BestInClass best_in_class(const FeatureMap& features, const Vector& target, const Vector& weights, double radius) {
  if (features.kind() == FeatureKind::tabular && features.dim() == features.n_rows() && target.size() == features.n_rows()) {
    return tabular_ball_least_squares(target, weights, radius);
  }
  return weighted_ball_least_squares(features.table(), target, weights, radius);
}

BestInClass best_in_class(const FeatureMap& features, const QTable& target, const VisitationMeasure& d,
                          const TabularPolicy& policy, double radius) {
  return best_in_class(features, target.values(), sampling_weights(d, policy, target.mode()), radius);
}

void write_csv(std::ostream& out, const FeatureMap& features) {
  CsvWriter csv(out);
  csv.header({"row_index", "component_index", "value"});
  for (int i = 0; i < features.n_rows(); ++i) {
    for (int j = 0; j < features.dim(); ++j) {
      csv.cell(i).cell(j).cell(features.table()(i, j));
      csv.end_row();
    }
  }
}

FeatureMap read_feature_csv(std::istream& in) {
  struct Entry {
    long long row;
    long long col;
    double value;
  };
  std::vector<Entry> entries;
  std::string line;
  long long max_row = -1;
  long long max_col = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "row_index") continue;
    if (fields.size() != 3) throw ParseError("expected 3 fields", line_no, "");
    Entry e{};
    try {
      std::size_t used = 0;
      e.row = std::stoll(fields[0], &used);
      if (used != fields[0].size()) throw ParseError("bad row_index", line_no, "row_index");
      e.col = std::stoll(fields[1], &used);
      if (used != fields[1].size()) throw ParseError("bad component_index", line_no, "component_index");
      e.value = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw ParseError("bad value", line_no, "value");
    } catch (const std::logic_error&) {
      throw ParseError("unparsable number", line_no, "");
    }
    if (e.row < 0 || e.col < 0) throw ParseError("negative index", line_no, "");
    max_row = std::max(max_row, e.row);
    max_col = std::max(max_col, e.col);
    entries.push_back(e);
  }
  if (entries.empty()) throw ParseError("feature CSV has no entries", line_no, "");
  RowMatrix table = RowMatrix::Zero(max_row + 1, max_col + 1);
  for (const auto& e : entries) table(e.row, e.col) = e.value;
  return FeatureMap(std::move(table), FeatureKind::custom_table);
}

FeatureMap load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open feature file " + path.string());
  return read_feature_csv(in);
}

FeatureMap resolve_features(const std::string& spec, int n_rows, std::uint64_t default_seed) {
  if (spec == "tabular") return tabular_features(n_rows);
  if (spec.rfind("random:", 0) == 0) {
    const std::string rest = spec.substr(7);
    const auto colon = rest.find(':');
    try {
      const int dim = std::stoi(rest.substr(0, colon));
      const std::uint64_t seed = colon == std::string::npos ? default_seed : std::stoull(rest.substr(colon + 1));
      return random_features(n_rows, dim, seed);
    } catch (const std::logic_error&) {
      throw ValidationError("bad feature spec '" + spec + "'");
    }
  }
  FeatureMap map = load_feature_csv(spec);
  if (map.n_rows() != n_rows) {
    throw ValidationError("feature file has " + std::to_string(map.n_rows()) + " rows, expected " +
                          std::to_string(n_rows));
  }
  return map;
}

}  // namespace aliased_ac
