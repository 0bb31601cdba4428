#pragma once

// Marginal Q-value network over the variable/constraint graph.
//
// Column and constraint nodes are embedded separately, then two rounds of
// degree-normalized message passing update constraints from columns and
// columns from constraints, each as a residual ReLU layer. A linear head
// scores every column node.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ffcg/features.hpp"

namespace ffcg {

inline constexpr int kMessageRounds = 2;
inline constexpr int kDefaultHidden = 32;
inline constexpr int kWeightsFormatVersion = 1;

enum ParamBlock : int {
  kColEmbedW = 0,  // h x 9
  kColEmbedB,      // h x 1
  kConEmbedW,      // h x 2
  kConEmbedB,      // h x 1
  kToCon0W,        // h x h
  kToCon0B,
  kToCol0W,
  kToCol0B,
  kToCon1W,
  kToCon1B,
  kToCol1W,
  kToCol1B,
  kHeadW,  // 1 x h
  kHeadB,  // 1 x 1
  kParamBlockCount
};

const char* block_name(int block);

inline constexpr int to_con_w(int round) { return kToCon0W + 4 * round; }
inline constexpr int to_con_b(int round) { return kToCon0B + 4 * round; }
inline constexpr int to_col_w(int round) { return kToCol0W + 4 * round; }
inline constexpr int to_col_b(int round) { return kToCol0B + 4 * round; }

/// Parameter blocks of the network; also the shape of its gradient.
template <typename Scalar>
struct QNetParamsT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int hidden = kDefaultHidden;
  std::array<Matrix, kParamBlockCount> blocks;

  static QNetParamsT zeros(int hidden);
  /// He-style initialization for the weight matrices, zero biases.
  static QNetParamsT random(int hidden, std::mt19937_64& rng);

  Matrix& operator[](int b) { return blocks[static_cast<std::size_t>(b)]; }
  const Matrix& operator[](int b) const { return blocks[static_cast<std::size_t>(b)]; }

  /// Throws ShapeMismatch on a block whose shape disagrees with `hidden`, or
  /// InvalidArgument on a non-finite entry.
  void validate() const;
  Scalar squared_norm() const;
  void axpy(Scalar a, const QNetParamsT& x);  // this += a * x
  void scale(Scalar a);

  bool operator==(const QNetParamsT& o) const { return hidden == o.hidden && blocks == o.blocks; }
};

using QNetParams = QNetParamsT<double>;

/// Trained network: parameters plus the feature scaling it expects.
struct QNetWeights {
  QNetParams params;
  ScalingProfile profile;
  int version = kWeightsFormatVersion;

  bool operator==(const QNetWeights&) const = default;
};

/// Intermediate values of a forward pass, kept for the reverse pass.
template <typename Scalar>
struct ForwardCacheT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Sparse = Eigen::SparseMatrix<Scalar>;

  Matrix x_col, x_con;
  Sparse col_to_con;  // constraints x columns, rows scaled by 1 / degree
  Sparse con_to_col;  // columns x constraints, rows scaled by 1 / degree
  Matrix z_col0, z_con0;
  std::array<Matrix, kMessageRounds + 1> h_col, h_con;
  std::array<Matrix, kMessageRounds> g_con, z_con, g_col, z_col;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scores;
};

/// One score per column node. The state must already be normalized.
/// Throws ShapeMismatch on malformed inputs.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> forward(const QNetParamsT<Scalar>& params,
                                                 const BipartiteState& state,
                                                 ForwardCacheT<Scalar>* cache = nullptr);

/// Exact gradient of sum_i upstream_i * score_i with respect to every block.
template <typename Scalar>
QNetParamsT<Scalar> backward(const QNetParamsT<Scalar>& params, const ForwardCacheT<Scalar>& cache,
                             const std::type_identity_t<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& upstream);

/// Normalizes with the weights' profile, then runs forward.
Eigen::VectorXd score_state(const QNetWeights& weights, const BipartiteState& raw_state);

// ---- serialization -----------------------------------------------------------

std::string weights_to_json(const QNetWeights& weights);
/// Throws ParseError on malformed documents and ShapeMismatch on bad shapes.
QNetWeights weights_from_json(const std::string& text);
void save_weights(const std::string& path, const QNetWeights& weights);
QNetWeights load_weights(const std::string& path);

// ---- training ----------------------------------------------------------------

/// One stored CG iteration: the raw state before any pick, the ordered picks,
/// a reward per candidate id (selected columns' credit and unselected +-beta)
/// and the next raw state unless the run converged.
struct ReplayTransition {
  BipartiteState state;
  std::vector<int> picks;
  std::map<int, double> rewards;
  std::optional<BipartiteState> next_state;

  bool terminal() const { return !next_state.has_value(); }
};

/// Regression targets for the selectable nodes of one pick step.
struct TrainingExample {
  BipartiteState state;  // normalized, with context applied
  std::vector<int> nodes;
  std::vector<double> targets;
};

/// Examples for pick steps 0..|picks| (or just `step`). Candidates are
/// regressed on their reward, STOP on zero; gamma times the target network's
/// best next-state score is added unless the transition is terminal.
std::vector<TrainingExample> make_examples(const ReplayTransition& transition,
                                           const QNetWeights& target, double gamma,
                                           std::optional<int> step = std::nullopt);

struct TrainStepOptions {
  double learning_rate = 1e-3;
  double gamma = 0.9;
  double clip_norm = 5.0;
  // One random pick step per transition instead of all of them.
  bool sample_one_step = true;
  // Regress only the pre-pick state (single-pick agents).
  bool first_step_only = false;
  bool adam = false;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct AdamState {
  std::optional<QNetParams> m, v;
  long t = 0;
};

struct StepResult {
  double loss = 0;       // before the update
  double grad_norm = 0;  // before clipping
  int targets = 0;
};

/// Mean squared error over every example's selectable nodes and its gradient.
double examples_loss(const QNetParams& params, std::span<const TrainingExample> examples,
                     QNetParams* gradient = nullptr);

/// One optimizer step on a minibatch. Throws EmptyBatch.
StepResult train_step(QNetWeights& online, const QNetWeights& target,
                      std::span<const ReplayTransition* const> batch,
                      const TrainStepOptions& options, std::mt19937_64& rng,
                      AdamState* adam = nullptr);

extern template struct QNetParamsT<double>;
extern template struct QNetParamsT<long double>;

}  // namespace ffcg
