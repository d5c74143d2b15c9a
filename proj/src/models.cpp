#include "nextrec/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "nextrec/als.hpp"
#include "nextrec/error.hpp"
#include "nextrec/random.hpp"
#include "text_io.hpp"

namespace nextrec {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::almm: return "almm";
    case ModelKind::forbes: return "forbes";
    case ModelKind::oord: return "oord";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "almm") return ModelKind::almm;
  if (text == "forbes") return ModelKind::forbes;
  if (text == "oord") return ModelKind::oord;
  throw ParameterError("unknown model kind: " + std::string(text));
}

void Hyperparams::validate() const {
  if (d < 1) throw ParameterError("latent dimension d must be >= 1");
  for (double l : {lambda_u, lambda_x, lambda_y, lambda_psi}) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ParameterError("regularizers must be >= 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
  if (negatives < 1) throw ParameterError("negatives per positive must be >= 1");
  if (!(sgd_lr >= 0.0) || !std::isfinite(sgd_lr)) throw ParameterError("sgd_lr must be >= 0");
  if (!(sgd_decay > 0.0) || !std::isfinite(sgd_decay)) throw ParameterError("sgd_decay must be > 0");
}

// ---------------------------------------------------------------------------
// Negative sampling

std::vector<TrainingInstance> sample_negatives(const TripletSet& triplets,
                                               std::size_t n_articles, std::size_t negatives,
                                               std::uint64_t seed) {
  if (negatives < 1) throw ParameterError("negatives per positive must be >= 1");
  if (n_articles < 3) throw DegenerateError("negative sampling needs at least 3 articles");
  if (n_articles < triplets.articles.size()) {
    throw ParameterError("article universe smaller than the triplet set's articles");
  }
  const auto n = static_cast<std::uint64_t>(n_articles);
  auto key = [n](std::uint64_t u, std::uint64_t i, std::uint64_t j) { return (u * n + i) * n + j; };

  std::vector<TrainingInstance> positives;
  positives.reserve(triplets.size());
  std::unordered_set<std::uint64_t> observed;
  for (const auto& t : triplets.triplets) {
    TrainingInstance inst{static_cast<std::uint32_t>(triplets.users.at(t.user)),
                          static_cast<std::uint32_t>(triplets.articles.at(t.last)),
                          static_cast<std::uint32_t>(triplets.articles.at(t.next)), 1.0,
                          t.confidence};
    observed.insert(key(inst.u, inst.i, inst.j));
    positives.push_back(inst);
  }

  constexpr int kMaxTries = 100;
  Rng rng(seed);
  std::vector<TrainingInstance> out;
  out.reserve(positives.size() * (negatives + 1));
  for (const auto& pos : positives) {
    out.push_back(pos);
    for (std::size_t s = 0; s < negatives; ++s) {
      for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        const auto candidate = static_cast<std::uint32_t>(rng.uniform_index(n));
        if (candidate == pos.j || candidate == pos.i ||
            observed.count(key(pos.u, pos.i, candidate)) != 0) {
          continue;
        }
        out.push_back(TrainingInstance{pos.u, pos.i, candidate, 0.0, 1.0});
        break;
      }
    }
  }
  return out;
}

std::vector<TrainingInstance> sample_negatives(const TripletSet& triplets, std::size_t negatives,
                                               std::uint64_t seed) {
  return sample_negatives(triplets, triplets.articles.size(), negatives, seed);
}

TrainingProblem make_problem(const TripletSet& train, const FeatureMatrix& features,
                             const Hyperparams& hyper) {
  if (train.empty()) throw EmptyInputError("no training triplets");
  TrainingProblem problem;
  problem.users = train.users;
  problem.articles = train.articles;
  problem.content = features.gather(train.articles.ids());
  problem.instances =
      sample_negatives(train, hyper.negatives, stage_seed(hyper.seed, "negatives"));
  return problem;
}

// ---------------------------------------------------------------------------
// Objective

double factor_objective(const Matrix& user_factors, const Matrix& last_factors,
                        const Matrix& next_factors, std::span<const TrainingInstance> instances,
                        const Hyperparams& hyper) {
  double loss = 0.0;
  for (const auto& inst : instances) {
    const double predicted = score(row_span(user_factors, inst.u), row_span(last_factors, inst.i),
                                   row_span(next_factors, inst.j));
    const double residual = inst.target - predicted;
    loss += inst.weight * residual * residual;
  }
  return loss + hyper.lambda_u * user_factors.squaredNorm() +
         hyper.lambda_x * last_factors.squaredNorm() + hyper.lambda_y * next_factors.squaredNorm();
}

double objective(const FactorModel& model, const SparseMatrix& content,
                 std::span<const TrainingInstance> instances) {
  if (model.kind == ModelKind::almm) {
    return factor_objective(model.user_factors, model.last_factors, model.next_factors, instances,
                            model.hyper);
  }
  const Matrix last = content * model.psi_x;
  const Matrix next = content * model.psi_y;
  return factor_objective(model.user_factors, last, next, instances, model.hyper);
}

// ---------------------------------------------------------------------------
// ALS-based trainers

namespace {

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal(0.0, stddev);
  return m;
}

double init_stddev(const Hyperparams& hyper) {
  return 0.1 / std::sqrt(static_cast<double>(hyper.d));
}

void check_problem(const TrainingProblem& problem, const Hyperparams& hyper) {
  hyper.validate();
  if (problem.instances.empty()) throw EmptyInputError("no training instances");
  if (static_cast<std::size_t>(problem.content.rows()) != problem.articles.size()) {
    throw InputError("content rows are not aligned with the article index");
  }
}

FactorModel initial_model(ModelKind kind, const TrainingProblem& problem,
                          const Hyperparams& hyper) {
  FactorModel model;
  model.kind = kind;
  model.hyper = hyper;
  model.users = problem.users;
  model.articles = problem.articles;
  return model;
}

void record(TrainingTrace* trace, double value) {
  if (trace != nullptr) trace->objective.push_back(value);
}

void check_divergence(double value, std::size_t iteration, const char* what) {
  if (!std::isfinite(value)) {
    throw DivergenceError(std::string(what) + " diverged at iteration " +
                          std::to_string(iteration + 1));
  }
}

// Shared ALS loop. With refresh enabled this is the full ALMM iteration
// (ALS, ridge mapping, blend); without it, plain ALS.
void run_als(const TrainingProblem& problem, const Hyperparams& hyper, FactorModel& model,
             bool refresh, TrainingTrace* trace) {
  const auto& instances = problem.instances;
  const std::size_t d = hyper.d;
  Rng rng(stage_seed(hyper.seed, "init"));
  const double sigma = init_stddev(hyper);
  model.user_factors = gaussian(rng, problem.users.size(), d, sigma);
  model.last_factors = gaussian(rng, problem.articles.size(), d, sigma);
  model.next_factors = gaussian(rng, problem.articles.size(), d, sigma);

  const auto layout = AlsLayout::build(instances, problem.users.size(), problem.articles.size());
  AlsFactors factors{model.user_factors, model.last_factors, model.next_factors};
  auto current = [&] {
    return factor_objective(model.user_factors, model.last_factors, model.next_factors, instances,
                            hyper);
  };
  record(trace, trace ? current() : 0.0);

  for (std::size_t it = 0; it < hyper.iterations; ++it) {
    als_half_sweep(FactorRole::user, instances, layout, factors, hyper.lambda_u);
    if (trace) record(trace, current());
    als_half_sweep(FactorRole::last, instances, layout, factors, hyper.lambda_x);
    if (trace) record(trace, current());
    als_half_sweep(FactorRole::next, instances, layout, factors, hyper.lambda_y);
    if (trace) record(trace, current());

    if (refresh && hyper.alpha > 0.0) {
      model.psi_x = ridge_solve(problem.content, model.last_factors, hyper.lambda_psi);
      model.psi_y = ridge_solve(problem.content, model.next_factors, hyper.lambda_psi);
      const double a = hyper.alpha;
      model.last_factors = (1.0 - a) * model.last_factors + a * (problem.content * model.psi_x);
      model.next_factors = (1.0 - a) * model.next_factors + a * (problem.content * model.psi_y);
      if (trace) record(trace, current());
    }
    check_divergence(current(), it, "ALS");
  }
}

void fit_mappings(const TrainingProblem& problem, const Hyperparams& hyper, FactorModel& model) {
  model.psi_x = ridge_solve(problem.content, model.last_factors, hyper.lambda_psi);
  model.psi_y = ridge_solve(problem.content, model.next_factors, hyper.lambda_psi);
}

}  // namespace

FactorModel almm_train(const TrainingProblem& problem, const Hyperparams& hyper,
                       TrainingTrace* trace) {
  check_problem(problem, hyper);
  FactorModel model = initial_model(ModelKind::almm, problem, hyper);
  run_als(problem, hyper, model, /*refresh=*/true, trace);
  // Without refresh the mapping is only needed for cold articles.
  if (hyper.alpha == 0.0 || hyper.iterations == 0) fit_mappings(problem, hyper, model);
  return model;
}

FactorModel oord_train(const TrainingProblem& problem, const Hyperparams& hyper,
                       TrainingTrace* trace) {
  check_problem(problem, hyper);
  FactorModel model = initial_model(ModelKind::oord, problem, hyper);
  run_als(problem, hyper, model, /*refresh=*/false, trace);
  fit_mappings(problem, hyper, model);
  return model;
}

// ---------------------------------------------------------------------------
// Forbes

Vector mapped_vector(const Matrix& psi, const SparseMatrix& content, Eigen::Index row) {
  Vector out = Vector::Zero(psi.cols());
  for (SparseMatrix::InnerIterator it(content, row); it; ++it) {
    out.noalias() += it.value() * psi.row(it.col()).transpose();
  }
  return out;
}

namespace {

struct ForbesForward {
  Vector x;
  Vector y;
  double residual_weighted = 0.0;  // e = c (t - C)
  double residual = 0.0;
};

ForbesForward forbes_forward(const Vector& user, const Matrix& psi_x, const Matrix& psi_y,
                             const SparseMatrix& content, const TrainingInstance& inst) {
  ForbesForward f;
  f.x = mapped_vector(psi_x, content, inst.i);
  f.y = mapped_vector(psi_y, content, inst.j);
  const double predicted = user.dot(f.x) + user.dot(f.y) + f.x.dot(f.y);
  f.residual = inst.target - predicted;
  f.residual_weighted = inst.weight * f.residual;
  return f;
}

// Psi = scale * base. Keeps the per-instance L2 shrink O(1).
struct ScaledMatrix {
  Matrix base;
  double scale = 1.0;

  void shrink(double factor) {
    if (factor > 1e-8) {
      scale *= factor;
      if (scale < 1e-100) materialize();
    } else {
      base *= scale * factor;
      scale = 1.0;
    }
  }
  void materialize() {
    base *= scale;
    scale = 1.0;
  }
  Matrix value() const { return scale * base; }
};

Vector scaled_mapped(const ScaledMatrix& psi, const SparseMatrix& content, Eigen::Index row) {
  return psi.scale * mapped_vector(psi.base, content, row);
}

}  // namespace

double forbes_instance_loss(const Vector& user, const Matrix& psi_x, const Matrix& psi_y,
                            const SparseMatrix& content, const TrainingInstance& instance,
                            const Hyperparams& hyper) {
  const auto f = forbes_forward(user, psi_x, psi_y, content, instance);
  return 0.5 * instance.weight * f.residual * f.residual +
         0.5 * (hyper.lambda_u * user.squaredNorm() + hyper.lambda_x * psi_x.squaredNorm() +
                hyper.lambda_y * psi_y.squaredNorm());
}

ForbesGradient forbes_instance_gradient(const Vector& user, const Matrix& psi_x,
                                        const Matrix& psi_y, const SparseMatrix& content,
                                        const TrainingInstance& instance,
                                        const Hyperparams& hyper) {
  const auto f = forbes_forward(user, psi_x, psi_y, content, instance);
  const double e = f.residual_weighted;
  ForbesGradient g;
  g.user = -e * (f.x + f.y) + hyper.lambda_u * user;
  g.psi_x = hyper.lambda_x * psi_x;
  g.psi_y = hyper.lambda_y * psi_y;
  const Vector ux = user + f.y;
  const Vector uy = user + f.x;
  for (SparseMatrix::InnerIterator it(content, instance.i); it; ++it) {
    g.psi_x.row(it.col()) -= e * it.value() * ux.transpose();
  }
  for (SparseMatrix::InnerIterator it(content, instance.j); it; ++it) {
    g.psi_y.row(it.col()) -= e * it.value() * uy.transpose();
  }
  return g;
}

FactorModel forbes_train(const TrainingProblem& problem, const Hyperparams& hyper,
                         TrainingTrace* trace) {
  check_problem(problem, hyper);
  FactorModel model = initial_model(ModelKind::forbes, problem, hyper);
  const auto& content = problem.content;
  const auto& instances = problem.instances;
  const std::size_t d = hyper.d;
  const auto m = static_cast<std::size_t>(content.cols());

  Rng init(stage_seed(hyper.seed, "init"));
  const double sigma = init_stddev(hyper);
  model.user_factors = gaussian(init, problem.users.size(), d, sigma);
  ScaledMatrix psi_x{gaussian(init, m, d, sigma)};
  ScaledMatrix psi_y{gaussian(init, m, d, sigma)};

  auto current = [&] {
    return factor_objective(model.user_factors, content * psi_x.value(),
                            content * psi_y.value(), instances, hyper);
  };
  if (trace) record(trace, current());

  Rng shuffle(stage_seed(hyper.seed, "sgd"));
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Vector user_old(static_cast<Eigen::Index>(d));

  double lr = hyper.sgd_lr;
  for (std::size_t epoch = 0; epoch < hyper.sgd_epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) {
      std::swap(order[k - 1], order[shuffle.uniform_index(k)]);
    }
    for (std::size_t idx : order) {
      const auto& inst = instances[idx];
      const Vector x = scaled_mapped(psi_x, content, inst.i);
      const Vector y = scaled_mapped(psi_y, content, inst.j);
      auto u = model.user_factors.row(inst.u);
      user_old = u.transpose();
      const double predicted = user_old.dot(x) + user_old.dot(y) + x.dot(y);
      const double e = inst.weight * (inst.target - predicted);

      u += lr * (e * (x + y) - hyper.lambda_u * user_old).transpose();

      psi_x.shrink(1.0 - lr * hyper.lambda_x);
      const Vector step_x = (lr * e / psi_x.scale) * (user_old + y);
      for (SparseMatrix::InnerIterator it(content, inst.i); it; ++it) {
        psi_x.base.row(it.col()) += it.value() * step_x.transpose();
      }
      psi_y.shrink(1.0 - lr * hyper.lambda_y);
      const Vector step_y = (lr * e / psi_y.scale) * (user_old + x);
      for (SparseMatrix::InnerIterator it(content, inst.j); it; ++it) {
        psi_y.base.row(it.col()) += it.value() * step_y.transpose();
      }
    }
    psi_x.materialize();
    psi_y.materialize();
    if (!model.user_factors.allFinite() || !psi_x.base.allFinite() || !psi_y.base.allFinite()) {
      throw DivergenceError("Forbes SGD diverged at epoch " + std::to_string(epoch + 1));
    }
    if (trace) record(trace, current());
    lr *= hyper.sgd_decay;
  }

  model.psi_x = psi_x.value();
  model.psi_y = psi_y.value();
  model.last_factors = content * model.psi_x;
  model.next_factors = content * model.psi_y;
  return model;
}

FactorModel train(ModelKind kind, const TrainingProblem& problem, const Hyperparams& hyper,
                  TrainingTrace* trace) {
  switch (kind) {
    case ModelKind::almm: return almm_train(problem, hyper, trace);
    case ModelKind::forbes: return forbes_train(problem, hyper, trace);
    case ModelKind::oord: return oord_train(problem, hyper, trace);
  }
  throw ParameterError("unknown model kind");
}

// ---------------------------------------------------------------------------
// Prediction

Scorer::Scorer(const FactorModel& model, const FeatureMatrix& features,
               std::vector<std::string> universe)
    : model_(&model), universe_(std::move(universe)) {
  const auto d = static_cast<Eigen::Index>(model.hyper.d);
  last_.resize(static_cast<Eigen::Index>(universe_.size()), d);
  next_.resize(static_cast<Eigen::Index>(universe_.size()), d);
  feature_row_.resize(universe_.size());
  if (static_cast<std::size_t>(features.values.cols()) !=
      static_cast<std::size_t>(model.psi_x.rows())) {
    throw InputError("feature dimension does not match the model's mapping matrices");
  }
  for (std::size_t p = 0; p < universe_.size(); ++p) {
    const auto& id = universe_[p];
    position_.emplace(id, p);
    const std::size_t row = features.rows.find(id);
    if (row == features.rows.size()) throw InputError("no feature row for article " + id);
    feature_row_[p] = row;
    const std::size_t trained = model.articles.find(id);
    const auto out = static_cast<Eigen::Index>(p);
    if (!model.mapped_only() && trained != model.articles.size()) {
      last_.row(out) = model.last_factors.row(static_cast<Eigen::Index>(trained));
      next_.row(out) = model.next_factors.row(static_cast<Eigen::Index>(trained));
    } else {
      const auto r = static_cast<Eigen::Index>(row);
      last_.row(out) = mapped_vector(model.psi_x, features.values, r).transpose();
      next_.row(out) = mapped_vector(model.psi_y, features.values, r).transpose();
    }
  }
}

std::size_t Scorer::position(const std::string& id) const {
  auto it = position_.find(id);
  return it == position_.end() ? universe_.size() : it->second;
}

Vector Scorer::user_vector(const std::string& user) const {
  const std::size_t row = model_->users.find(user);
  if (row == model_->users.size()) return Vector::Zero(static_cast<Eigen::Index>(model_->hyper.d));
  return model_->user_factors.row(static_cast<Eigen::Index>(row)).transpose();
}

double Scorer::score(const Vector& user, std::size_t last, std::size_t next) const {
  const auto d = static_cast<std::size_t>(user.size());
  return nextrec::score({user.data(), d}, row_span(last_, static_cast<Eigen::Index>(last)),
                        row_span(next_, static_cast<Eigen::Index>(next)));
}

std::vector<std::size_t> Scorer::rank(const std::string& user, std::size_t last,
                                      std::span<const std::size_t> candidates) const {
  const Vector u = user_vector(user);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (std::size_t c : candidates) scored.emplace_back(score(u, last, c), c);
  std::sort(scored.begin(), scored.end(), [this](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return feature_row_[a.second] < feature_row_[b.second];
  });
  std::vector<std::size_t> out;
  out.reserve(scored.size());
  for (const auto& [s, c] : scored) out.push_back(c);
  return out;
}

std::size_t Scorer::rank_of(const std::string& user, std::size_t last, std::size_t target,
                            std::span<const std::size_t> candidates) const {
  const Vector u = user_vector(user);
  const double target_score = score(u, last, target);
  std::size_t ahead = 0;
  for (std::size_t c : candidates) {
    if (c == target) continue;
    const double s = score(u, last, c);
    if (s > target_score || (s == target_score && feature_row_[c] < feature_row_[target])) ++ahead;
  }
  return ahead + 1;
}

std::vector<ScoredArticle> predict(const FactorModel& model, const std::string& user,
                                   const std::string& last,
                                   std::span<const std::string> candidates,
                                   const FeatureMatrix& features) {
  if (candidates.empty()) throw InputError("predict: empty candidate set");
  std::vector<std::string> universe{last};
  std::unordered_set<std::string> seen{last};
  for (const auto& c : candidates) {
    if (seen.insert(c).second) universe.push_back(c);
  }
  const Scorer scorer(model, features, universe);
  std::vector<std::size_t> positions;
  for (const auto& c : candidates) positions.push_back(scorer.position(c));
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());

  const Vector u = scorer.user_vector(user);
  std::vector<ScoredArticle> out;
  for (std::size_t p : scorer.rank(user, 0, positions)) {
    out.push_back(ScoredArticle{universe[p], scorer.score(u, 0, p)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

void save_model(const FactorModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& h = model.hyper;
  nlohmann::ordered_json manifest;
  manifest["kind"] = to_string(model.kind);
  manifest["hyperparams"] = {{"d", h.d},
                             {"lambda_u", h.lambda_u},
                             {"lambda_x", h.lambda_x},
                             {"lambda_y", h.lambda_y},
                             {"lambda_psi", h.lambda_psi},
                             {"alpha", h.alpha},
                             {"negatives", h.negatives},
                             {"iterations", h.iterations},
                             {"sgd_lr", h.sgd_lr},
                             {"sgd_decay", h.sgd_decay},
                             {"sgd_epochs", h.sgd_epochs},
                             {"seed", h.seed}};
  manifest["users"] = model.users.ids();
  manifest["articles"] = model.articles.ids();
  {
    auto out = detail::open_output(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  save_matrix(model.user_factors, dir / "U.mat");
  save_matrix(model.last_factors, dir / "X.mat");
  save_matrix(model.next_factors, dir / "Y.mat");
  save_matrix(model.psi_x, dir / "PsiX.mat");
  save_matrix(model.psi_y, dir / "PsiY.mat");
}

FactorModel load_model(const std::filesystem::path& dir) {
  FactorModel model;
  auto in = detail::open_input(dir / "manifest.json");
  try {
    const auto manifest = nlohmann::json::parse(in);
    model.kind = parse_model_kind(manifest.at("kind").get<std::string>());
    const auto& h = manifest.at("hyperparams");
    auto& p = model.hyper;
    p.d = h.at("d").get<std::size_t>();
    p.lambda_u = h.at("lambda_u").get<double>();
    p.lambda_x = h.at("lambda_x").get<double>();
    p.lambda_y = h.at("lambda_y").get<double>();
    p.lambda_psi = h.at("lambda_psi").get<double>();
    p.alpha = h.at("alpha").get<double>();
    p.negatives = h.at("negatives").get<std::size_t>();
    p.iterations = h.at("iterations").get<std::size_t>();
    p.sgd_lr = h.at("sgd_lr").get<double>();
    p.sgd_decay = h.at("sgd_decay").get<double>();
    p.sgd_epochs = h.at("sgd_epochs").get<std::size_t>();
    p.seed = h.at("seed").get<std::uint64_t>();
    for (const auto& id : manifest.at("users")) model.users.add(id.get<std::string>());
    for (const auto& id : manifest.at("articles")) model.articles.add(id.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }
  model.user_factors = load_matrix(dir / "U.mat");
  model.last_factors = load_matrix(dir / "X.mat");
  model.next_factors = load_matrix(dir / "Y.mat");
  model.psi_x = load_matrix(dir / "PsiX.mat");
  model.psi_y = load_matrix(dir / "PsiY.mat");
  const auto d = static_cast<Eigen::Index>(model.hyper.d);
  if (model.user_factors.rows() != static_cast<Eigen::Index>(model.users.size()) ||
      model.last_factors.rows() != static_cast<Eigen::Index>(model.articles.size()) ||
      model.next_factors.rows() != static_cast<Eigen::Index>(model.articles.size()) ||
      model.user_factors.cols() != d || model.last_factors.cols() != d ||
      model.next_factors.cols() != d || model.psi_x.cols() != d || model.psi_y.cols() != d ||
      model.psi_x.rows() != model.psi_y.rows()) {
    throw FormatError(dir.string() + ": model matrices inconsistent with manifest");
  }
  return model;
}

}  // namespace nextrec
