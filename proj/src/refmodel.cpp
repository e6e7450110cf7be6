#include "dynbench/refmodel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "dynbench/stats.hpp"
#include "json.hpp"

namespace dynbench {

namespace {

constexpr const char* kCheckpointFormat = "dynbench-refmodel";
constexpr int kCheckpointVersion = 1;

constexpr Eigen::Index kChunk = 256;

// Standardized features and targets for one window set.
struct Cache {
  Eigen::MatrixXd phi;               // P x N
  std::vector<Eigen::MatrixXd> y;    // per block, H x N
  std::vector<Eigen::MatrixXd> loc;  // per block, H x N
};

Eigen::VectorXd features(const RefModel& m, const Eigen::MatrixXd& context) {
  const int lags = m.hyper.n_lags;
  if (context.rows() != m.hyper.context_length || context.cols() != m.dim)
    throw DimensionError("context must be " + std::to_string(m.hyper.context_length) + " x " +
                         std::to_string(m.dim));
  Eigen::VectorXd phi(m.feature_count());
  Eigen::Index k = 0;
  for (Eigen::Index t = context.rows() - lags; t < context.rows(); ++t)
    for (int j = 0; j < m.dim; ++j) phi(k++) = (context(t, j) - m.norm_mean(j)) / m.norm_scale(j);
  phi(k) = 1.0;
  return phi;
}

Cache build_cache(const RefModel& m, const WindowSet& ws) {
  if (ws.empty()) throw SizingError("window set is empty");
  if (ws.dim() != m.dim) throw DimensionError("window dimension does not match the model");
  const auto n = static_cast<Eigen::Index>(ws.size());
  const int H = m.hyper.horizon;
  Cache c;
  c.phi.resize(m.feature_count(), n);
  c.y.assign(static_cast<std::size_t>(m.dim), Eigen::MatrixXd(H, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& tgt = ws.targets[static_cast<std::size_t>(i)];
    if (tgt.rows() != H) throw DimensionError("target horizon does not match the model");
    c.phi.col(i) = features(m, ws.contexts[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m.dim; ++j)
      c.y[static_cast<std::size_t>(j)].col(i) =
          (tgt.col(j).array() - m.norm_mean(j)) / m.norm_scale(j);
  }
  for (const auto& b : m.blocks) c.loc.push_back(b.w_loc * c.phi);
  return c;
}

struct BlockGrad {
  Eigen::MatrixXd w_t, w_c, generators;
};

// Mean standardized NLL of one block without the 2 pi constant; fills the
// gradient when requested.
double block_loss(const HeadBlock& hb, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                  const Eigen::MatrixXd& loc, bool context_scale, BlockGrad* g) {
  const Eigen::Index H = y.rows(), N = y.cols();
  const double invn = 1.0 / static_cast<double>(N);

  const Eigen::MatrixXd t_raw = hb.w_t * phi;
  const Eigen::MatrixXd t_y = t_raw.unaryExpr(
      [](double x) { return soft_bound(x, kTranslationLo, kTranslationHi); });
  Eigen::MatrixXd c_raw, c_der;
  Eigen::ArrayXXd lam;
  auto bound_c = [](double x) { return soft_bound(x, kScaleLo, kScaleHi); };
  auto bound_c_der = [](double x) { return soft_bound_derivative(x, kScaleLo, kScaleHi); };
  if (context_scale) {
    c_raw = hb.w_c * phi;
    lam = 1.0 + c_raw.unaryExpr(bound_c).array();
    if (g) c_der = c_raw.unaryExpr(bound_c_der);
  } else {
    const Eigen::VectorXd bias = hb.w_c.col(hb.w_c.cols() - 1);
    lam = (1.0 + bias.unaryExpr(bound_c).array()).replicate(1, N);
    if (g) c_der = bias.unaryExpr(bound_c_der).replicate(1, N);
  }
  const Eigen::ArrayXXd lamc = lam.max(kLambdaMin);

  const Eigen::MatrixXd gen = normalize_generators(hb.generators);
  Eigen::MatrixXd z(H, 2 * N);
  z.leftCols(N) = y - loc;
  z.rightCols(N) = t_y;
  // [A, B] = U^T [Y - loc, T], in column chunks that stay cache resident.
  for (Eigen::Index c0 = 0; c0 < z.cols(); c0 += kChunk) {
    auto zc = z.middleCols(c0, std::min(kChunk, z.cols() - c0));
    apply_rotation_inplace(gen, zc, true);
  }

  const Eigen::ArrayXXd a = z.leftCols(N).array();
  const Eigen::ArrayXXd b = z.rightCols(N).array();
  const Eigen::ArrayXXd r = a - lam * b;
  const double loss = (lamc.log().sum() + 0.5 * (r / lamc).square().sum()) * invn;
  if (!g) return loss;

  const Eigen::ArrayXXd gr = r / lamc.square() * invn;
  Eigen::ArrayXXd glam = (1.0 / lamc - r.square() / lamc.cube()) * invn;
  glam = (lam > kLambdaMin).select(glam, 0.0) - b * gr;

  Eigen::MatrixXd gz(H, 2 * N);
  gz.leftCols(N) = gr.matrix();
  gz.rightCols(N) = (-lam * gr).matrix();

  // Reverse through U^T = H_1 ... H_R (H_R applied first), recovering each
  // input by reapplying the reflection.
  const Eigen::Index R = gen.rows();
  Eigen::MatrixXd gv = Eigen::MatrixXd::Zero(H, R);
  for (Eigen::Index c0 = 0; c0 < z.cols(); c0 += kChunk) {
    const Eigen::Index w = std::min(kChunk, z.cols() - c0);
    auto zc = z.middleCols(c0, w);
    auto gc = gz.middleCols(c0, w);
    for (Eigen::Index k = 0; k < R; ++k) {
      const auto v = gen.row(k).transpose();
      if (v.squaredNorm() == 0.0) continue;
      zc.noalias() -= 2.0 * v * (v.transpose() * zc);
      const Eigen::RowVectorXd vz = v.transpose() * zc;
      const Eigen::RowVectorXd vg = v.transpose() * gc;
      gv.col(k).noalias() -= 2.0 * (gc * vz.transpose() + zc * vg.transpose());
      gc.noalias() -= 2.0 * v * vg;
    }
  }
  g->generators = Eigen::MatrixXd::Zero(R, H);
  for (Eigen::Index k = 0; k < R; ++k) {
    const double norm = hb.generators.row(k).norm();
    if (norm < kDegenerateGeneratorNorm) continue;
    const Eigen::VectorXd v = gen.row(k).transpose();
    g->generators.row(k) = ((gv.col(k) - v * v.dot(gv.col(k))) / norm).transpose();
  }

  const Eigen::ArrayXXd gt_raw =
      gz.rightCols(N).array() *
      t_raw.unaryExpr([](double x) { return soft_bound_derivative(x, kTranslationLo, kTranslationHi); })
          .array();
  g->w_t = gt_raw.matrix() * phi.transpose();

  const Eigen::ArrayXXd gc_raw = glam * c_der.array();
  if (context_scale) {
    g->w_c = gc_raw.matrix() * phi.transpose();
  } else {
    g->w_c = Eigen::MatrixXd::Zero(hb.w_c.rows(), hb.w_c.cols());
    g->w_c.col(hb.w_c.cols() - 1) = gc_raw.rowwise().sum().matrix();
  }
  return loss;
}

// Shift from standardized NLL to data-unit NLL with the 2 pi constant.
double unit_shift(const RefModel& m) {
  const double H = m.hyper.horizon;
  return m.norm_scale.array().log().sum() * H +
         0.5 * H * m.dim * std::log(2.0 * std::numbers::pi);
}

double cached_loss(const RefModel& m, const Cache& c, Eigen::VectorXd* grad) {
  double loss = 0.0;
  std::vector<BlockGrad> grads(m.blocks.size());
  for (std::size_t j = 0; j < m.blocks.size(); ++j)
    loss += block_loss(m.blocks[j], c.phi, c.y[j], c.loc[j], m.hyper.context_scale,
                       grad ? &grads[j] : nullptr);
  if (grad) {
    grad->resize(m.parameter_count());
    Eigen::Index k = 0;
    auto put = [&](const Eigen::MatrixXd& x) {
      grad->segment(k, x.size()) = x.reshaped();
      k += x.size();
    };
    for (const auto& g : grads) {
      put(g.w_t);
      if (m.hyper.context_scale) put(g.w_c);
      else put(g.w_c.col(g.w_c.cols() - 1));
      put(g.generators);
    }
  }
  return loss;
}

void fit_location(RefModel& m, const Cache& c) {
  const Eigen::Index P = c.phi.rows(), N = c.phi.cols();
  Eigen::MatrixXd gram = c.phi * c.phi.transpose();
  gram.diagonal().array() += m.hyper.ridge * static_cast<double>(N);
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  for (std::size_t j = 0; j < m.blocks.size(); ++j) {
    const Eigen::MatrixXd rhs = c.phi * c.y[j].transpose();  // P x H
    m.blocks[j].w_loc = solver.solve(rhs).transpose();
    if (!m.blocks[j].w_loc.allFinite()) throw TrainingError("location readout fit failed", 0);
  }
  (void)P;
}

void set_normalization(RefModel& m, const WindowSet& ws) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m.dim), sq = Eigen::VectorXd::Zero(m.dim);
  double count = 0.0;
  auto add = [&](const Eigen::MatrixXd& x) {
    sum += x.colwise().sum().transpose();
    sq += x.array().square().colwise().sum().matrix().transpose();
    count += static_cast<double>(x.rows());
  };
  for (std::size_t i = 0; i < ws.size(); ++i) {
    add(ws.contexts[i]);
    add(ws.targets[i]);
  }
  m.norm_mean = sum / count;
  m.norm_scale.resize(m.dim);
  for (int j = 0; j < m.dim; ++j) {
    const double var = std::max(0.0, sq(j) / count - m.norm_mean(j) * m.norm_mean(j));
    const double sd = std::sqrt(var);
    m.norm_scale(j) = sd > 1e-12 * std::max(1.0, std::abs(m.norm_mean(j))) ? sd : 1.0;
  }
}

Eigen::MatrixXd to_matrix(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix in checkpoint");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

nlohmann::json from_matrix(const Eigen::MatrixXd& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

void RefModelHyper::validate() const {
  if (context_length < 1 || horizon < 1) throw ConfigError("context length and horizon must be positive");
  if (n_lags < 1 || n_lags > context_length) throw ConfigError("n_lags must lie in [1, context_length]");
  if (reflections < 0) throw ConfigError("reflection count must be nonnegative");
  if (!(learning_rate > 0.0) || !(clip_norm > 0.0)) throw ConfigError("learning rate and clip norm must be positive");
  if (epochs < 0 || patience < 1) throw ConfigError("epochs must be >= 0 and patience >= 1");
  if (s_train < 1) throw ConfigError("s_train must be positive");
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
}

Eigen::Index RefModel::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& b : blocks)
    n += b.w_t.size() + (hyper.context_scale ? b.w_c.size() : b.w_c.rows()) + b.generators.size();
  return n;
}

RefModel init_refmodel(const RefModelHyper& hyper, int dim) {
  hyper.validate();
  if (dim < 1) throw ConfigError("model dimension must be positive");
  RefModel m;
  m.hyper = hyper;
  m.dim = dim;
  m.norm_mean = Eigen::VectorXd::Zero(dim);
  m.norm_scale = Eigen::VectorXd::Ones(dim);
  const Eigen::Index P = m.feature_count(), H = hyper.horizon;
  for (int j = 0; j < dim; ++j) {
    HeadBlock b;
    b.w_loc = Eigen::MatrixXd::Zero(H, P);
    b.w_t = Eigen::MatrixXd::Zero(H, P);
    b.w_c = Eigen::MatrixXd::Zero(H, P);
    b.w_c.col(P - 1).setConstant(soft_bound_inverse(0.0, kScaleLo, kScaleHi));
    b.generators = Eigen::MatrixXd::Zero(hyper.reflections, H);
    for (int k = 0; k < hyper.reflections; ++k) b.generators(k, k % H) = 1.0;
    m.blocks.push_back(std::move(b));
  }
  return m;
}

std::vector<Belief> forecast(const RefModel& m, const Eigen::MatrixXd& context) {
  const Eigen::VectorXd phi = features(m, context);
  std::vector<Belief> out;
  out.reserve(m.blocks.size());
  for (int j = 0; j < m.dim; ++j) {
    const auto& hb = m.blocks[static_cast<std::size_t>(j)];
    const Eigen::VectorXd c_raw =
        m.hyper.context_scale ? Eigen::VectorXd(hb.w_c * phi) : Eigen::VectorXd(hb.w_c.col(hb.w_c.cols() - 1));
    Belief b;
    b.t_y = (hb.w_t * phi).unaryExpr([](double x) { return soft_bound(x, kTranslationLo, kTranslationHi); });
    b.lambdas = m.norm_scale(j) *
                (1.0 + c_raw.unaryExpr([](double x) { return soft_bound(x, kScaleLo, kScaleHi); }).array()).matrix();
    b.hh_vectors = normalize_generators(hb.generators);
    b.location = (m.norm_mean(j) + m.norm_scale(j) * (hb.w_loc * phi).array()).matrix();
    out.push_back(std::move(b));
  }
  return out;
}

Eigen::VectorXd flatten_parameters(const RefModel& m) {
  Eigen::VectorXd theta(m.parameter_count());
  Eigen::Index k = 0;
  auto put = [&](const auto& x) {
    theta.segment(k, x.size()) = x.reshaped();
    k += x.size();
  };
  for (const auto& b : m.blocks) {
    put(b.w_t);
    if (m.hyper.context_scale) put(b.w_c);
    else put(Eigen::VectorXd(b.w_c.col(b.w_c.cols() - 1)));
    put(b.generators);
  }
  return theta;
}

void unflatten_parameters(RefModel& m, const Eigen::VectorXd& theta) {
  if (theta.size() != m.parameter_count()) throw DimensionError("parameter vector has wrong length");
  Eigen::Index k = 0;
  auto take = [&](auto&& x) {
    x.reshaped() = theta.segment(k, x.size());
    k += x.size();
  };
  for (auto& b : m.blocks) {
    take(b.w_t);
    if (m.hyper.context_scale) take(b.w_c);
    else take(b.w_c.col(b.w_c.cols() - 1));
    take(b.generators);
  }
}

double loss_and_gradient(const RefModel& m, const WindowSet& windows, Eigen::VectorXd* grad) {
  return cached_loss(m, build_cache(m, windows), grad);
}

double mean_nll(const RefModel& m, const WindowSet& windows) {
  if (windows.empty()) throw SizingError("window set is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto beliefs = forecast(m, windows.contexts[i]);
    for (int j = 0; j < m.dim; ++j)
      total += nll(beliefs[static_cast<std::size_t>(j)], windows.targets[i].col(j));
  }
  return total / static_cast<double>(windows.size());
}

double sampled_crps(const RefModel& m, const WindowSet& windows, int draws, std::uint64_t seed) {
  if (windows.empty()) throw SizingError("window set is empty");
  if (draws < 1) throw ConfigError("need at least one draw");
  double total = 0.0;
  std::size_t points = 0;
  std::vector<double> row(static_cast<std::size_t>(draws));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto beliefs = forecast(m, windows.contexts[i]);
    for (int j = 0; j < m.dim; ++j) {
      Rng rng(seed, stream_id(StreamPurpose::Sampling, i, static_cast<std::uint64_t>(j)));
      const Eigen::MatrixXd y = sample(beliefs[static_cast<std::size_t>(j)], rng, draws);
      for (Eigen::Index h = 0; h < y.rows(); ++h) {
        for (int s = 0; s < draws; ++s) row[static_cast<std::size_t>(s)] = y(h, s);
        total += stats::crps_ensemble(row, windows.targets[i](h, j));
        ++points;
      }
    }
  }
  return total / static_cast<double>(points);
}

TrainResult train(const RefModel& init, const WindowSet& train_set, const WindowSet& val_set) {
  if (train_set.empty() || val_set.empty()) throw SizingError("training needs non-empty train and val splits");
  RefModel m = init;
  m.hyper.validate();
  set_normalization(m, train_set);
  Cache train_cache = build_cache(m, train_set);
  if (m.hyper.fit_location) {
    fit_location(m, train_cache);
    train_cache = build_cache(m, train_set);
  }
  const Cache val_cache = build_cache(m, val_set);
  const double shift = unit_shift(m);

  TrainResult res;
  Eigen::VectorXd theta = flatten_parameters(m), best = theta, grad;
  double best_val = 0.0;
  for (int epoch = 0; epoch <= m.hyper.epochs; ++epoch) {
    unflatten_parameters(m, theta);
    const double tl = cached_loss(m, train_cache, &grad);
    const double vl = cached_loss(m, val_cache, nullptr);
    if (!std::isfinite(tl) || !grad.allFinite()) throw TrainingError("training loss diverged", epoch);
    if (!std::isfinite(vl)) throw TrainingError("validation loss diverged", epoch);
    const double gnorm = grad.norm();
    res.curve.push_back({epoch, tl + shift, vl + shift, gnorm});
    if (epoch == 0) {
      res.initial_val_nll = best_val = vl;
    } else if (vl < best_val) {
      best_val = vl;
      best = theta;
      res.best_epoch = epoch;
    } else if (epoch - res.best_epoch >= m.hyper.patience) {
      break;
    }
    const double step = m.hyper.learning_rate * std::min(1.0, m.hyper.clip_norm / std::max(gnorm, 1e-300));
    theta -= step * grad;
  }
  unflatten_parameters(m, best);
  res.model = std::move(m);
  res.initial_val_nll += shift;
  res.best_val_nll = best_val + shift;
  res.val_crps = sampled_crps(res.model, val_set, res.model.hyper.s_train, res.model.hyper.seed);
  return res;
}

double grad_check(const RefModel& model, const WindowSet& batch, int count, double h, std::uint64_t seed) {
  const Cache c = build_cache(model, batch);
  RefModel m = model;
  Eigen::VectorXd grad;
  cached_loss(m, c, &grad);
  const Eigen::VectorXd theta = flatten_parameters(m);
  const auto n = static_cast<std::uint64_t>(theta.size());

  std::vector<std::uint64_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed, stream_id(StreamPurpose::Test));
  const auto take = std::min<std::uint64_t>(n, static_cast<std::uint64_t>(std::max(count, 0)));
  for (std::uint64_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);

  double worst = 0.0;
  Eigen::VectorXd probe = theta;
  for (std::uint64_t i = 0; i < take; ++i) {
    const auto k = static_cast<Eigen::Index>(idx[i]);
    probe(k) = theta(k) + h;
    unflatten_parameters(m, probe);
    const double up = cached_loss(m, c, nullptr);
    probe(k) = theta(k) - h;
    unflatten_parameters(m, probe);
    const double down = cached_loss(m, c, nullptr);
    probe(k) = theta(k);
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad(k)), 1e-6});
    worst = std::max(worst, std::abs(fd - grad(k)) / denom);
  }
  return worst;
}

void save_checkpoint(const RefModel& m, std::ostream& out) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  const auto& h = m.hyper;
  j["hyper"] = {{"context_length", h.context_length}, {"horizon", h.horizon},
                {"n_lags", h.n_lags},                 {"reflections", h.reflections},
                {"learning_rate", h.learning_rate},   {"clip_norm", h.clip_norm},
                {"epochs", h.epochs},                 {"patience", h.patience},
                {"s_train", h.s_train},               {"context_scale", h.context_scale},
                {"fit_location", h.fit_location},     {"ridge", h.ridge},
                {"seed", h.seed}};
  j["dim"] = m.dim;
  j["norm_mean"] = std::vector<double>(m.norm_mean.begin(), m.norm_mean.end());
  j["norm_scale"] = std::vector<double>(m.norm_scale.begin(), m.norm_scale.end());
  auto blocks = nlohmann::json::array();
  for (const auto& b : m.blocks)
    blocks.push_back({{"w_loc", from_matrix(b.w_loc)},
                      {"w_t", from_matrix(b.w_t)},
                      {"w_c", from_matrix(b.w_c)},
                      {"generators", from_matrix(b.generators)}});
  j["blocks"] = std::move(blocks);
  out << j.dump() << '\n';
}

RefModel load_checkpoint(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat) throw FormatError("not a refmodel checkpoint");
  if (j.value("version", 0) != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  try {
    const auto& jh = j.at("hyper");
    RefModelHyper h;
    h.context_length = jh.at("context_length");
    h.horizon = jh.at("horizon");
    h.n_lags = jh.at("n_lags");
    h.reflections = jh.at("reflections");
    h.learning_rate = jh.at("learning_rate");
    h.clip_norm = jh.at("clip_norm");
    h.epochs = jh.at("epochs");
    h.patience = jh.at("patience");
    h.s_train = jh.at("s_train");
    h.context_scale = jh.at("context_scale");
    h.fit_location = jh.at("fit_location");
    h.ridge = jh.at("ridge");
    h.seed = jh.at("seed");
    RefModel m = init_refmodel(h, j.at("dim").get<int>());
    const auto mean = j.at("norm_mean").get<std::vector<double>>();
    const auto scale = j.at("norm_scale").get<std::vector<double>>();
    if (static_cast<int>(mean.size()) != m.dim || static_cast<int>(scale.size()) != m.dim)
      throw FormatError("normalization length mismatch");
    m.norm_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), m.dim);
    m.norm_scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), m.dim);
    const auto& jb = j.at("blocks");
    if (static_cast<int>(jb.size()) != m.dim) throw FormatError("block count mismatch");
    for (int k = 0; k < m.dim; ++k) {
      auto& b = m.blocks[static_cast<std::size_t>(k)];
      const auto& src = jb.at(static_cast<std::size_t>(k));
      for (auto [name, dst] : {std::pair{"w_loc", &b.w_loc}, std::pair{"w_t", &b.w_t},
                               std::pair{"w_c", &b.w_c}, std::pair{"generators", &b.generators}}) {
        Eigen::MatrixXd x = to_matrix(src.at(name));
        if (x.rows() != dst->rows() || x.cols() != dst->cols())
          throw FormatError(std::string("checkpoint field ") + name + " has wrong shape");
        *dst = std::move(x);
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void write_loss_csv(const std::vector<LossPoint>& curve, std::ostream& out) {
  out << "# dynbench-loss v1\nepoch,train_nll,val_nll,grad_norm\n";
  char buf[160];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", p.epoch, p.train_nll, p.val_nll, p.grad_norm);
    out << buf;
  }
}

}  // namespace dynbench
