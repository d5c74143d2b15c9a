#pragma once

// Content-aware latent factor models for next-article recommendation:
// ALMM (ALS + ridge content mapping + refresh), Forbes (SGD with X, Y tied to
// content), and Oord (ALS, then a post-hoc content mapping).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nextrec/features.hpp"
#include "nextrec/numerics.hpp"
#include "nextrec/transitions.hpp"

namespace nextrec {

enum class ModelKind { almm, forbes, oord };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct Hyperparams {
  std::size_t d = 32;
  double lambda_u = 0.1;
  double lambda_x = 0.1;
  double lambda_y = 0.1;
  double lambda_psi = 1.0;
  double alpha = 1.0;  // refresh blend: X <- (1 - alpha) X + alpha A Psi_X
  std::size_t negatives = 4;
  std::size_t iterations = 15;
  double sgd_lr = 0.01;
  double sgd_decay = 0.9;
  std::size_t sgd_epochs = 30;
  std::uint64_t seed = 42;

  // Throws ParameterError when an invariant is violated.
  void validate() const;
};

struct TrainingInstance {
  std::uint32_t u = 0;
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double target = 1.0;
  double weight = 1.0;

  friend bool operator==(const TrainingInstance&, const TrainingInstance&) = default;
};

// Everything a trainer consumes. content row k belongs to articles.id(k).
struct TrainingProblem {
  IndexMap users;
  IndexMap articles;
  SparseMatrix content;
  std::vector<TrainingInstance> instances;
};

struct FactorModel {
  ModelKind kind = ModelKind::almm;
  Hyperparams hyper;
  IndexMap users;
  IndexMap articles;
  Matrix user_factors;  // U, |users| x d
  Matrix last_factors;  // X, |articles| x d
  Matrix next_factors;  // Y, |articles| x d
  Matrix psi_x;         // m x d
  Matrix psi_y;         // m x d

  // Oord scores every article through its content mapping.
  bool mapped_only() const { return kind == ModelKind::oord; }
};

// Objective after every ALS half-sweep / SGD epoch, in order.
struct TrainingTrace {
  std::vector<double> objective;
};

// Positives (target 1, weight = confidence) each followed by its negatives.
// Negative j' is uniform over [0, n_articles) with j' != i, j' != j and
// (u, i, j') not positive; 100 rejected draws skip the slot. Throws
// DegenerateError when n_articles < 3.
std::vector<TrainingInstance> sample_negatives(const TripletSet& triplets,
                                               std::size_t n_articles, std::size_t negatives,
                                               std::uint64_t seed);
std::vector<TrainingInstance> sample_negatives(const TripletSet& triplets,
                                               std::size_t negatives, std::uint64_t seed);

// Index maps from the train side, content rows gathered from features, and
// negatives drawn from the "negatives" sub-stream of hyper.seed.
TrainingProblem make_problem(const TripletSet& train, const FeatureMatrix& features,
                             const Hyperparams& hyper);

// sum c (t - C)^2 + lambda_U |U|^2 + lambda_X |X|^2 + lambda_Y |Y|^2 on the
// given factors.
double factor_objective(const Matrix& user_factors, const Matrix& last_factors,
                        const Matrix& next_factors, std::span<const TrainingInstance> instances,
                        const Hyperparams& hyper);

// Same, with the model's effective X, Y (content-mapped for Forbes and Oord).
double objective(const FactorModel& model, const SparseMatrix& content,
                 std::span<const TrainingInstance> instances);

FactorModel almm_train(const TrainingProblem& problem, const Hyperparams& hyper,
                       TrainingTrace* trace = nullptr);
FactorModel forbes_train(const TrainingProblem& problem, const Hyperparams& hyper,
                         TrainingTrace* trace = nullptr);
FactorModel oord_train(const TrainingProblem& problem, const Hyperparams& hyper,
                       TrainingTrace* trace = nullptr);
FactorModel train(ModelKind kind, const TrainingProblem& problem, const Hyperparams& hyper,
                  TrainingTrace* trace = nullptr);

// Per-instance Forbes loss
//   1/2 c (t - C)^2 + 1/2 (lambda_U |U_u|^2 + lambda_X |Psi_X|^2 + lambda_Y |Psi_Y|^2)
// and its gradient. The SGD step is parameter -= lr * gradient.
struct ForbesGradient {
  Vector user;
  Matrix psi_x;
  Matrix psi_y;
};

double forbes_instance_loss(const Vector& user, const Matrix& psi_x, const Matrix& psi_y,
                            const SparseMatrix& content, const TrainingInstance& instance,
                            const Hyperparams& hyper);
ForbesGradient forbes_instance_gradient(const Vector& user, const Matrix& psi_x,
                                        const Matrix& psi_y, const SparseMatrix& content,
                                        const TrainingInstance& instance,
                                        const Hyperparams& hyper);

// Psi^T a for a content row.
Vector mapped_vector(const Matrix& psi, const SparseMatrix& content, Eigen::Index row);

struct ScoredArticle {
  std::string id;
  double score = 0.0;

  friend bool operator==(const ScoredArticle&, const ScoredArticle&) = default;
};

// Effective vectors of a fixed article universe, precomputed once so that
// many queries can be ranked cheaply. Trained articles use stored factors
// (except for Oord); others are mapped from content. Unknown users score
// with U = 0.
class Scorer {
 public:
  // Throws InputError if a universe article has no feature row.
  Scorer(const FactorModel& model, const FeatureMatrix& features,
         std::vector<std::string> universe);

  const std::vector<std::string>& universe() const { return universe_; }
  std::size_t position(const std::string& id) const;  // universe().size() if absent

  Vector user_vector(const std::string& user) const;
  Vector last_vector(std::size_t position) const { return last_.row(position).transpose(); }
  Vector next_vector(std::size_t position) const { return next_.row(position).transpose(); }

  double score(const Vector& user, std::size_t last, std::size_t next) const;

  // Candidate positions sorted by score descending, ties by ascending
  // feature row.
  std::vector<std::size_t> rank(const std::string& user, std::size_t last,
                                std::span<const std::size_t> candidates) const;

  // 1-based rank of target among candidates without sorting.
  std::size_t rank_of(const std::string& user, std::size_t last, std::size_t target,
                      std::span<const std::size_t> candidates) const;

 private:
  const FactorModel* model_;
  std::vector<std::string> universe_;
  std::unordered_map<std::string, std::size_t> position_;
  std::vector<std::size_t> feature_row_;
  Matrix last_;
  Matrix next_;
};

// Ranks candidates for user u after article `last`. Throws InputError if
// candidates is empty or any article lacks a feature row.
std::vector<ScoredArticle> predict(const FactorModel& model, const std::string& user,
                                   const std::string& last,
                                   std::span<const std::string> candidates,
                                   const FeatureMatrix& features);

// <dir>/manifest.json plus U.mat, X.mat, Y.mat, PsiX.mat, PsiY.mat.
void save_model(const FactorModel& model, const std::filesystem::path& dir);
FactorModel load_model(const std::filesystem::path& dir);

}  // namespace nextrec
