// Final classifier: a regularized hinge predictor trained on labeled source
// documents in the projected feature space, plus its serialization. The model
// carries a content hash of the projection it was trained with so a mismatch
// at prediction time is detectable.
#pragma once

#include <Eigen/Core>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sclom/common.hpp"
#include "sclom/corpus.hpp"
#include "sclom/loss.hpp"
#include "sclom/scl.hpp"
#include "sclom/sgd.hpp"

namespace sclom {

struct FinalModel {
  Eigen::VectorXd v;            // k weights, plus a trailing bias when enabled
  double lambda = 1e-3;         // sum-form L2 coefficient
  bool has_bias = false;
  std::uint64_t theta_ref = 0;  // hash of the projection this model binds to
  int k() const { return static_cast<int>(v.size()) - (has_bias ? 1 : 0); }
};

struct FinalTrainParams {
  int epochs = 200;
  double lr = 0.5;
  std::uint64_t seed = 42;
  bool add_bias = false;  // appends a constant-1 feature (also regularized)
};

struct FinalTrainStats {
  int used = 0;     // labeled documents that vectorized
  int skipped = 0;  // labeled documents entirely out of vocabulary
};

// Sum-form objective over projected examples,
//   J(v) = sum_i loss(y_i v.z_i) + (lambda/2) |v|^2,
// with an optional gradient (meaningful for differentiable losses).
template <class Loss>
double final_objective(const Loss& loss, const Eigen::VectorXd& v,
                       const std::vector<Eigen::VectorXd>& zs,
                       const std::vector<int>& ys, double lambda,
                       Eigen::VectorXd* grad = nullptr) {
  if (zs.size() != ys.size())
    internal_error("final_objective: example/label count mismatch");
  if (grad) *grad = lambda * v;
  double j = 0.5 * lambda * v.squaredNorm();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    double z = ys[i] * v.dot(zs[i]);
    j += loss.loss(z);
    if (grad) {
      double g = loss.dloss(z);
      if (g != 0.0) *grad += (g * ys[i]) * zs[i];
    }
  }
  return j;
}

namespace detail {

// Projects every labeled document, appending the bias feature when asked.
// Documents that are entirely out of vocabulary are skipped and counted.
inline void project_labeled(const std::vector<Document>& labeled,
                            const Vocabulary& vocab, const Projection& proj,
                            bool add_bias, std::vector<Eigen::VectorXd>& zs,
                            std::vector<int>& ys, FinalTrainStats& stats) {
  zs.clear();
  ys.clear();
  for (const auto& doc : labeled) {
    int y = checked_label(doc);
    std::optional<BowVector> x = try_vectorize(doc, vocab);
    if (!x) {
      ++stats.skipped;
      continue;
    }
    Eigen::VectorXd z = project_doc(proj, *x);
    if (add_bias) {
      z.conservativeResize(z.size() + 1);
      z[z.size() - 1] = 1.0;
    }
    zs.push_back(std::move(z));
    ys.push_back(y);
    ++stats.used;
  }
}

}  // namespace detail

// Trains the final hinge classifier on labeled source documents mapped
// through the projection. The reported objective is the sum form
//   J(v) = sum_i L(y_i v.z_i) + (lambda/2) |v|^2;
// optimization runs on the proportional mean form (reg = lambda / n), which
// has the same minimizer, using seeded stochastic subgradient descent with
// iterate averaging after a one-epoch burn-in.
inline FinalModel train_final(const std::vector<Document>& labeled,
                              const Vocabulary& vocab, const Projection& proj,
                              double lambda,
                              const FinalTrainParams& params = {},
                              FinalTrainStats* stats_out = nullptr) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    config_error("final classifier: lambda must be positive");
  if (params.epochs < 1) config_error("final classifier: epochs must be >= 1");
  if (!(params.lr > 0.0)) config_error("final classifier: lr must be positive");
  if (labeled.empty()) data_error("final classifier: no labeled documents");

  std::vector<Eigen::VectorXd> zs;
  std::vector<int> ys;
  FinalTrainStats stats;
  detail::project_labeled(labeled, vocab, proj, params.add_bias, zs, ys,
                          stats);
  if (zs.empty())
    data_error("final classifier: no labeled document survives vectorization");
  bool has_pos = false, has_neg = false;
  for (int y : ys) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    data_error("final classifier: labeled data is single-class");

  detail::SgdSchedule sched;
  sched.epochs = params.epochs;
  sched.lr = params.lr;
  sched.reg = lambda / static_cast<double>(zs.size());
  FinalModel model;
  model.v = detail::dense_sgd_averaged<Hinge>(zs, ys, sched, params.seed,
                                              /*burn_in=*/1);
  model.lambda = lambda;
  model.has_bias = params.add_bias;
  model.theta_ref = projection_ref(proj);
  if (stats_out) *stats_out = stats;
  return model;
}

// Raw score of a projected document (bias excluded from the dot product and
// added separately when present).
inline double decision_value(const FinalModel& model,
                             const Eigen::VectorXd& z) {
  if (static_cast<int>(z.size()) != model.k())
    data_error("decision_value: feature dim " + std::to_string(z.size()) +
               " does not match model dim " + std::to_string(model.k()));
  double d = model.v.head(model.k()).dot(z);
  if (model.has_bias) d += model.v[model.k()];
  return d;
}

// Ties (decision exactly zero) go to +1.
inline int predict(const FinalModel& model, const Eigen::VectorXd& z) {
  return decision_value(model, z) >= 0.0 ? 1 : -1;
}

// Classifies a raw document: vectorize, project, threshold. A document that
// is entirely out of vocabulary projects to the zero vector.
inline int classify(const FinalModel& model, const Projection& proj,
                    const Vocabulary& vocab, const Document& doc) {
  std::optional<BowVector> x = try_vectorize(doc, vocab);
  Eigen::VectorXd z =
      x ? project_doc(proj, *x) : Eigen::VectorXd::Zero(proj.k());
  return predict(model, z);
}

// Throws when the model was trained against a different projection. A zero
// reference (e.g. a hand-built model) is treated as unbound and accepted.
inline void verify_binding(const FinalModel& model, const Projection& proj) {
  if (model.theta_ref == 0) return;
  std::uint64_t ref = projection_ref(proj);
  if (model.theta_ref != ref)
    data_error("model/projection mismatch: model was trained with projection " +
               hex64(model.theta_ref) + ", given " + hex64(ref));
}

inline void save_final_model(const std::string& path, const FinalModel& model) {
  std::ofstream out = open_output(path);
  out << "#sclom v" << kFormatVersion << " model theta=" << hex64(model.theta_ref)
      << '\n';
  out << model.k() << ' ' << fmt_double(model.lambda) << '\n';
  for (int i = 0; i < model.k(); ++i) {
    if (i) out << ' ';
    out << fmt_double(model.v[i]);
  }
  out << '\n';
  if (model.has_bias)
    out << "bias " << fmt_double(model.v[model.k()]) << '\n';
}

inline FinalModel load_final_model(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> extras;
  check_version_line(in, "model", /*required=*/true, &extras);
  FinalModel model;
  for (const auto& extra : extras) {
    if (extra.rfind("theta=", 0) == 0)
      model.theta_ref = parse_hex64(std::string_view(extra).substr(6));
  }
  std::string line;
  if (!std::getline(in, line)) data_error("model " + path + ": missing header");
  auto header = split_ws(line);
  if (header.size() != 2)
    data_error("model " + path + ": header must be `k lambda`");
  long k = parse_long(header[0]);
  model.lambda = parse_double(header[1]);
  if (k < 1) data_error("model " + path + ": k must be >= 1");
  if (!(model.lambda > 0.0) || !std::isfinite(model.lambda))
    data_error("model " + path + ": lambda must be positive");
  if (!std::getline(in, line))
    data_error("model " + path + ": missing weight line");
  auto cells = split_ws(line);
  if (static_cast<long>(cells.size()) != k)
    data_error("model " + path + ": expected " + std::to_string(k) +
               " weights, found " + std::to_string(cells.size()));
  model.v.resize(k);
  for (long i = 0; i < k; ++i) model.v[i] = parse_double(cells[i]);
  if (std::getline(in, line) && !line.empty()) {
    auto tail = split_ws(line);
    if (tail.size() != 2 || tail[0] != "bias")
      data_error("model " + path + ": unexpected trailing line '" + line + "'");
    model.has_bias = true;
    model.v.conservativeResize(k + 1);
    model.v[k] = parse_double(tail[1]);
  }
  if (!model.v.allFinite())
    data_error("model " + path + ": non-finite weights");
  return model;
}

}  // namespace sclom
