#include "ffcg/qnet.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ffcg/errors.hpp"

namespace ffcg {

namespace {

constexpr std::array<const char*, kParamBlockCount> kBlockNames = {
    "col_embed_w", "col_embed_b", "con_embed_w", "con_embed_b", "to_con0_w",
    "to_con0_b",   "to_col0_w",   "to_col0_b",   "to_con1_w",   "to_con1_b",
    "to_col1_w",   "to_col1_b",   "head_w",      "head_b"};

std::pair<int, int> block_shape(int b, int h) {
  switch (b) {
    case kColEmbedW: return {h, kColumnFeatureCount};
    case kConEmbedW: return {h, kConstraintFeatureCount};
    case kHeadW: return {1, h};
    case kHeadB: return {1, 1};
    case kColEmbedB:
    case kConEmbedB:
    case kToCon0B:
    case kToCol0B:
    case kToCon1B:
    case kToCol1B: return {h, 1};
    default: return {h, h};
  }
}

}  // namespace

const char* block_name(int block) { return kBlockNames.at(static_cast<std::size_t>(block)); }

// ---- parameters ----------------------------------------------------------------

template <typename Scalar>
QNetParamsT<Scalar> QNetParamsT<Scalar>::zeros(int hidden) {
  if (hidden < 1) throw InvalidArgument("hidden width must be positive");
  QNetParamsT p;
  p.hidden = hidden;
  for (int b = 0; b < kParamBlockCount; ++b) {
    const auto [r, c] = block_shape(b, hidden);
    p[b] = Matrix::Zero(r, c);
  }
  return p;
}

template <typename Scalar>
QNetParamsT<Scalar> QNetParamsT<Scalar>::random(int hidden, std::mt19937_64& rng) {
  auto p = zeros(hidden);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto fill = [&](Matrix& m, double sd) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(nd(rng) * sd);
  };
  fill(p[kColEmbedW], std::sqrt(2.0 / static_cast<int>(kColumnFeatureCount)));
  fill(p[kConEmbedW], std::sqrt(2.0 / static_cast<int>(kConstraintFeatureCount)));
  for (int r = 0; r < kMessageRounds; ++r) {
    fill(p[to_con_w(r)], 0.5 * std::sqrt(2.0 / hidden));
    fill(p[to_col_w(r)], 0.5 * std::sqrt(2.0 / hidden));
  }
  fill(p[kHeadW], std::sqrt(1.0 / hidden));
  return p;
}

template <typename Scalar>
void QNetParamsT<Scalar>::validate() const {
  for (int b = 0; b < kParamBlockCount; ++b) {
    const auto [r, c] = block_shape(b, hidden);
    const Matrix& m = (*this)[b];
    if (m.rows() != r || m.cols() != c)
      throw ShapeMismatch(std::string(block_name(b)) + " is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(r) + "x" +
                          std::to_string(c));
    if (!m.allFinite()) throw InvalidArgument(std::string(block_name(b)) + " is not finite");
  }
}

template <typename Scalar>
Scalar QNetParamsT<Scalar>::squared_norm() const {
  Scalar s = 0;
  for (const auto& m : blocks) s += m.squaredNorm();
  return s;
}

template <typename Scalar>
void QNetParamsT<Scalar>::axpy(Scalar a, const QNetParamsT& x) {
  for (int b = 0; b < kParamBlockCount; ++b) (*this)[b] += a * x[b];
}

template <typename Scalar>
void QNetParamsT<Scalar>::scale(Scalar a) {
  for (auto& m : blocks) m *= a;
}

template struct QNetParamsT<double>;
template struct QNetParamsT<long double>;

// ---- forward / backward ----------------------------------------------------------

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
Mat<Scalar> relu(const Mat<Scalar>& z) {
  return z.cwiseMax(Scalar(0));
}

template <typename Scalar>
Mat<Scalar> relu_grad(const Mat<Scalar>& upstream, const Mat<Scalar>& z) {
  return (z.array() > Scalar(0)).select(upstream, Scalar(0));
}

// x W^T with the bias column added to every row.
template <typename Scalar>
Mat<Scalar> affine(const Mat<Scalar>& x, const Mat<Scalar>& w, const Mat<Scalar>& b) {
  Mat<Scalar> out = x * w.transpose();
  out.rowwise() += b.col(0).transpose();
  return out;
}

template <typename Scalar>
void build_adjacency(const BipartiteState& s, ForwardCacheT<Scalar>& c) {
  const int nv = s.column_count();
  const int nc = s.constraint_count();
  std::vector<int> deg_col(static_cast<std::size_t>(nv), 0), deg_con(static_cast<std::size_t>(nc), 0);
  for (const auto& e : s.edges) {
    if (e.column < 0 || e.column >= nv || e.constraint < 0 || e.constraint >= nc)
      throw ShapeMismatch("edge (" + std::to_string(e.column) + ", " +
                          std::to_string(e.constraint) + ") outside the graph");
    ++deg_col[static_cast<std::size_t>(e.column)];
    ++deg_con[static_cast<std::size_t>(e.constraint)];
  }
  std::vector<Eigen::Triplet<Scalar>> to_con, to_col;
  to_con.reserve(s.edges.size());
  to_col.reserve(s.edges.size());
  for (const auto& e : s.edges) {
    const auto w = static_cast<Scalar>(e.weight);
    to_con.emplace_back(e.constraint, e.column, w / Scalar(deg_con[static_cast<std::size_t>(e.constraint)]));
    to_col.emplace_back(e.column, e.constraint, w / Scalar(deg_col[static_cast<std::size_t>(e.column)]));
  }
  c.col_to_con.resize(nc, nv);
  c.col_to_con.setFromTriplets(to_con.begin(), to_con.end());
  c.con_to_col.resize(nv, nc);
  c.con_to_col.setFromTriplets(to_col.begin(), to_col.end());
}

}  // namespace

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> forward(const QNetParamsT<Scalar>& p,
                                                 const BipartiteState& state,
                                                 ForwardCacheT<Scalar>* cache) {
  if (state.column_features.cols() != kColumnFeatureCount ||
      state.constraint_features.cols() != kConstraintFeatureCount)
    throw ShapeMismatch("state feature widths do not match the network");
  for (int b = 0; b < kParamBlockCount; ++b) {
    const auto [r, c] = block_shape(b, p.hidden);
    if (p[b].rows() != r || p[b].cols() != c)
      throw ShapeMismatch(std::string("parameter block ") + block_name(b) + " has the wrong shape");
  }
  ForwardCacheT<Scalar> local;
  ForwardCacheT<Scalar>& c = cache ? *cache : local;
  c.x_col = state.column_features.template cast<Scalar>();
  c.x_con = state.constraint_features.template cast<Scalar>();
  build_adjacency(state, c);

  c.z_col0 = affine<Scalar>(c.x_col, p[kColEmbedW], p[kColEmbedB]);
  c.z_con0 = affine<Scalar>(c.x_con, p[kConEmbedW], p[kConEmbedB]);
  c.h_col[0] = relu<Scalar>(c.z_col0);
  c.h_con[0] = relu<Scalar>(c.z_con0);
  for (int r = 0; r < kMessageRounds; ++r) {
    c.g_con[r] = c.col_to_con * c.h_col[r];
    c.z_con[r] = c.h_con[r] + affine<Scalar>(c.g_con[r], p[to_con_w(r)], p[to_con_b(r)]);
    c.h_con[r + 1] = relu<Scalar>(c.z_con[r]);
    c.g_col[r] = c.con_to_col * c.h_con[r + 1];
    c.z_col[r] = c.h_col[r] + affine<Scalar>(c.g_col[r], p[to_col_w(r)], p[to_col_b(r)]);
    c.h_col[r + 1] = relu<Scalar>(c.z_col[r]);
  }
  c.scores = c.h_col[kMessageRounds] * p[kHeadW].row(0).transpose();
  c.scores.array() += p[kHeadB](0, 0);
  return c.scores;
}

template <typename Scalar>
QNetParamsT<Scalar> backward(const QNetParamsT<Scalar>& p, const ForwardCacheT<Scalar>& c,
                             const std::type_identity_t<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& upstream) {
  if (upstream.size() != c.scores.size())
    throw ShapeMismatch("upstream gradient has " + std::to_string(upstream.size()) +
                        " entries for " + std::to_string(c.scores.size()) + " scores");
  auto g = QNetParamsT<Scalar>::zeros(p.hidden);
  g[kHeadW] = upstream.transpose() * c.h_col[kMessageRounds];
  g[kHeadB](0, 0) = upstream.sum();

  Mat<Scalar> d_hcol = upstream * p[kHeadW];  // columns x h
  Mat<Scalar> d_hcon = Mat<Scalar>::Zero(c.h_con[kMessageRounds].rows(), p.hidden);
  for (int r = kMessageRounds - 1; r >= 0; --r) {
    // column update: z_col = h_col[r] + (A_v h_con[r+1]) N' + n
    const Mat<Scalar> dz_col = relu_grad<Scalar>(d_hcol, c.z_col[r]);
    g[to_col_w(r)] = dz_col.transpose() * c.g_col[r];
    g[to_col_b(r)] = dz_col.colwise().sum().transpose();
    d_hcon += c.con_to_col.transpose() * (dz_col * p[to_col_w(r)]);
    d_hcol = dz_col;
    // constraint update: z_con = h_con[r] + (A_c h_col[r]) M' + m
    const Mat<Scalar> dz_con = relu_grad<Scalar>(d_hcon, c.z_con[r]);
    g[to_con_w(r)] = dz_con.transpose() * c.g_con[r];
    g[to_con_b(r)] = dz_con.colwise().sum().transpose();
    d_hcol += c.col_to_con.transpose() * (dz_con * p[to_con_w(r)]);
    d_hcon = dz_con;
  }
  const Mat<Scalar> dz_col0 = relu_grad<Scalar>(d_hcol, c.z_col0);
  g[kColEmbedW] = dz_col0.transpose() * c.x_col;
  g[kColEmbedB] = dz_col0.colwise().sum().transpose();
  const Mat<Scalar> dz_con0 = relu_grad<Scalar>(d_hcon, c.z_con0);
  g[kConEmbedW] = dz_con0.transpose() * c.x_con;
  g[kConEmbedB] = dz_con0.colwise().sum().transpose();
  return g;
}

template Eigen::VectorXd forward<double>(const QNetParamsT<double>&, const BipartiteState&,
                                         ForwardCacheT<double>*);
template Eigen::Matrix<long double, Eigen::Dynamic, 1> forward<long double>(
    const QNetParamsT<long double>&, const BipartiteState&, ForwardCacheT<long double>*);
template QNetParamsT<double> backward<double>(const QNetParamsT<double>&,
                                              const ForwardCacheT<double>&,
                                              const Eigen::VectorXd&);
template QNetParamsT<long double> backward<long double>(
    const QNetParamsT<long double>&, const ForwardCacheT<long double>&,
    const Eigen::Matrix<long double, Eigen::Dynamic, 1>&);

Eigen::VectorXd score_state(const QNetWeights& weights, const BipartiteState& raw_state) {
  return forward(weights.params, normalize_features(raw_state, weights.profile));
}

// ---- serialization ---------------------------------------------------------------

namespace {

using nlohmann::json;

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j, Eigen::Index expected, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != expected)
    throw ShapeMismatch(std::string(what) + " has " + std::to_string(v.size()) + " entries");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), expected);
}

}  // namespace

std::string weights_to_json(const QNetWeights& w) {
  w.params.validate();
  json doc;
  doc["version"] = w.version;
  doc["h"] = w.params.hidden;
  json prof;
  prof["column_shift"] = vec_json(w.profile.column_shift);
  prof["column_scale"] = vec_json(w.profile.column_scale);
  prof["constraint_shift"] = vec_json(w.profile.constraint_shift);
  prof["constraint_scale"] = vec_json(w.profile.constraint_scale);
  prof["edge_scale"] = w.profile.edge_scale;
  // JSON has no infinity; null means unclipped.
  prof["clip"] = std::isfinite(w.profile.clip) ? json(w.profile.clip) : json(nullptr);
  doc["scaling_profile"] = prof;
  json mats = json::object();
  for (int b = 0; b < kParamBlockCount; ++b) {
    const auto& m = w.params[b];
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    mats[block_name(b)] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data_row_major", data}};
  }
  doc["matrices"] = mats;
  return doc.dump(1);
}

QNetWeights weights_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(std::string("weights file is not valid JSON: ") + e.what(), line, col);
  }
  try {
    QNetWeights w;
    w.version = doc.at("version").get<int>();
    if (w.version != kWeightsFormatVersion)
      throw ParseError("unsupported weights version " + std::to_string(w.version), 1, 1);
    const int h = doc.at("h").get<int>();
    w.params = QNetParams::zeros(h);
    const auto& prof = doc.at("scaling_profile");
    w.profile.column_shift = json_vec(prof.at("column_shift"), kColumnFeatureCount, "column_shift");
    w.profile.column_scale = json_vec(prof.at("column_scale"), kColumnFeatureCount, "column_scale");
    w.profile.constraint_shift =
        json_vec(prof.at("constraint_shift"), kConstraintFeatureCount, "constraint_shift");
    w.profile.constraint_scale =
        json_vec(prof.at("constraint_scale"), kConstraintFeatureCount, "constraint_scale");
    w.profile.edge_scale = prof.at("edge_scale").get<double>();
    w.profile.clip = prof.at("clip").is_null() ? std::numeric_limits<double>::infinity()
                                               : prof.at("clip").get<double>();
    const auto& mats = doc.at("matrices");
    for (int b = 0; b < kParamBlockCount; ++b) {
      const auto& jm = mats.at(block_name(b));
      const auto rows = jm.at("rows").get<Eigen::Index>();
      const auto cols = jm.at("cols").get<Eigen::Index>();
      const auto data = jm.at("data_row_major").get<std::vector<double>>();
      if (rows != w.params[b].rows() || cols != w.params[b].cols() ||
          static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw ShapeMismatch(std::string(block_name(b)) + " has the wrong shape for h = " +
                            std::to_string(h));
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
          w.params[b](i, j) = data[static_cast<std::size_t>(i * cols + j)];
    }
    w.params.validate();
    return w;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed weights document: ") + e.what(), 1, 1);
  }
}

void save_weights(const std::string& path, const QNetWeights& weights) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << weights_to_json(weights) << '\n';
  if (!out) throw Error("failed writing " + path);
}

QNetWeights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return weights_from_json(ss.str());
}

// ---- training ----------------------------------------------------------------------

std::vector<TrainingExample> make_examples(const ReplayTransition& tr, const QNetWeights& target,
                                           double gamma, std::optional<int> step) {
  const int steps = static_cast<int>(tr.picks.size()) + 1;
  if (step && (*step < 0 || *step >= steps))
    throw InvalidArgument("pick step " + std::to_string(*step) + " outside 0.." +
                          std::to_string(steps - 1));
  double bootstrap = 0;
  if (gamma != 0 && tr.next_state) {
    const Eigen::VectorXd q = score_state(target, *tr.next_state);
    double best = -std::numeric_limits<double>::infinity();
    for (int v : tr.next_state->selectable_nodes())
      if (tr.next_state->column_ids[v] != kStopId) best = std::max(best, q(v));
    if (std::isfinite(best)) bootstrap = gamma * best;
  }

  std::vector<TrainingExample> out;
  BipartiteState s = tr.state;
  for (int k = 0; k < steps; ++k) {
    if (k > 0) s = update_context(s, tr.picks[static_cast<std::size_t>(k - 1)]);
    if (step && *step != k) continue;
    TrainingExample ex;
    ex.state = normalize_features(s, target.profile);
    for (int v : s.selectable_nodes()) {
      const int id = s.column_ids[v];
      double r = 0;
      if (id != kStopId) {
        const auto it = tr.rewards.find(id);
        if (it == tr.rewards.end()) continue;  // no supervision for this candidate
        r = it->second;
      }
      ex.nodes.push_back(v);
      ex.targets.push_back(r + bootstrap);
    }
    if (!ex.nodes.empty()) out.push_back(std::move(ex));
  }
  return out;
}

double examples_loss(const QNetParams& params, std::span<const TrainingExample> examples,
                     QNetParams* gradient) {
  std::size_t n = 0;
  for (const auto& ex : examples) n += ex.nodes.size();
  if (n == 0) throw EmptyBatch("no regression targets");
  if (gradient) *gradient = QNetParams::zeros(params.hidden);
  double loss = 0;
  for (const auto& ex : examples) {
    ForwardCacheT<double> cache;
    const Eigen::VectorXd q = forward(params, ex.state, gradient ? &cache : nullptr);
    Eigen::VectorXd up = Eigen::VectorXd::Zero(q.size());
    for (std::size_t i = 0; i < ex.nodes.size(); ++i) {
      const double diff = q(ex.nodes[i]) - ex.targets[i];
      loss += diff * diff;
      up(ex.nodes[i]) = 2.0 * diff / static_cast<double>(n);
    }
    if (gradient) gradient->axpy(1.0, backward(params, cache, up));
  }
  return loss / static_cast<double>(n);
}

StepResult train_step(QNetWeights& online, const QNetWeights& target,
                      std::span<const ReplayTransition* const> batch,
                      const TrainStepOptions& options, std::mt19937_64& rng, AdamState* adam) {
  if (batch.empty()) throw EmptyBatch("minibatch is empty");
  std::vector<TrainingExample> examples;
  for (const ReplayTransition* tr : batch) {
    std::optional<int> step;
    if (options.first_step_only) {
      step = 0;
    } else if (options.sample_one_step) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(tr->picks.size()));
      step = pick(rng);
    }
    for (auto& e : make_examples(*tr, target, options.gamma, step)) examples.push_back(std::move(e));
  }
  StepResult res;
  for (const auto& e : examples) res.targets += static_cast<int>(e.nodes.size());
  if (res.targets == 0) return res;

  QNetParams grad;
  res.loss = examples_loss(online.params, examples, &grad);
  res.grad_norm = std::sqrt(grad.squared_norm());
  if (options.clip_norm > 0 && res.grad_norm > options.clip_norm)
    grad.scale(options.clip_norm / res.grad_norm);

  if (options.adam) {
    AdamState local;
    AdamState& st = adam ? *adam : local;
    if (!st.m) {
      st.m = QNetParams::zeros(online.params.hidden);
      st.v = QNetParams::zeros(online.params.hidden);
    }
    ++st.t;
    const double b1 = options.adam_beta1, b2 = options.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
    for (int b = 0; b < kParamBlockCount; ++b) {
      auto& m = (*st.m)[b];
      auto& v = (*st.v)[b];
      m = b1 * m + (1 - b1) * grad[b];
      v = b2 * v + (1 - b2) * grad[b].cwiseAbs2();
      online.params[b].array() -= options.learning_rate * (m.array() / c1) /
                                  ((v.array() / c2).sqrt() + options.adam_epsilon);
    }
  } else {
    online.params.axpy(-options.learning_rate, grad);
  }
  return res;
}

}  // namespace ffcg
