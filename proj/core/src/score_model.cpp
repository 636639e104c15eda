#include "tkgr/score_model.hpp"

#include <cmath>

#include "tkgr/errors.hpp"
#include "tkgr/rng.hpp"

namespace tkgr {

namespace {

constexpr std::string_view kTranslateTime = "translate-time";
constexpr std::string_view kTrilinearTime = "trilinear-time";
constexpr std::string_view kDiachronic = "diachronic";

std::uint64_t row_key(std::uint32_t tensor, std::uint32_t row) {
  return (static_cast<std::uint64_t>(tensor) << 32) | row;
}

void renormalize_rows(Tensor& t) {
  const std::size_t width = t.row_width();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto row = t.row(r);
    double norm_sq = 0.0;
    for (float v : row) {
      norm_sq += static_cast<double>(v) * static_cast<double>(v);
    }
    if (norm_sq > 1.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (std::size_t k = 0; k < width; ++k) {
        row[k] = static_cast<float>(static_cast<double>(row[k]) * inv);
      }
    }
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::translate_time:
      return kTranslateTime;
    case ModelKind::trilinear_time:
      return kTrilinearTime;
    case ModelKind::diachronic:
      return kDiachronic;
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == kTranslateTime) {
    return ModelKind::translate_time;
  }
  if (text == kTrilinearTime) {
    return ModelKind::trilinear_time;
  }
  if (text == kDiachronic) {
    return ModelKind::diachronic;
  }
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

std::vector<double>& RowGradients::at(std::uint32_t tensor, std::uint32_t row,
                                      std::size_t width) {
  const std::uint64_t key = row_key(tensor, row);
  auto it = lookup_.find(key);
  if (it != lookup_.end()) {
    return entries_[it->second].values;
  }
  lookup_.emplace(key, entries_.size());
  entries_.push_back(Entry{tensor, row, std::vector<double>(width, 0.0)});
  return entries_.back().values;
}

void RowGradients::add_scaled(const RowGradients& other, double scale) {
  for (const Entry& e : other.entries_) {
    auto& buf = at(e.tensor, e.row, e.values.size());
    for (std::size_t k = 0; k < e.values.size(); ++k) {
      buf[k] += scale * e.values[k];
    }
  }
}

void RowGradients::scale(double factor) {
  for (Entry& e : entries_) {
    for (double& v : e.values) {
      v *= factor;
    }
  }
}

bool RowGradients::finite() const {
  for (const Entry& e : entries_) {
    for (double v : e.values) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
  }
  return true;
}

double RowGradients::l2_norm() const {
  double sum = 0.0;
  for (const Entry& e : entries_) {
    for (double v : e.values) {
      sum += v * v;
    }
  }
  return std::sqrt(sum);
}

ScoreModel::ScoreModel(ModelKind kind, ParameterStore store)
    : kind_(kind), store_(std::move(store)) {
  const auto require = [&](std::string_view name) -> const Tensor& {
    if (!store_.has(name)) {
      throw CheckpointError("model is missing tensor '" + std::string(name) +
                            "'");
    }
    return store_.tensor(name);
  };
  switch (kind_) {
    case ModelKind::translate_time:
    case ModelKind::trilinear_time: {
      const Tensor& ent = require("ent");
      const Tensor& rel = require("rel");
      const Tensor& time = require("time");
      entities_ = ent.rows();
      relations_ = rel.rows();
      timestamps_ = time.rows();
      dim_ = ent.row_width();
      if (rel.row_width() != dim_ || time.row_width() != dim_) {
        throw CheckpointError("tensor widths disagree");
      }
      break;
    }
    case ModelKind::diachronic: {
      const Tensor& amp = require("ent_amp");
      const Tensor& freq = require("ent_freq");
      const Tensor& phase = require("ent_phase");
      const Tensor& rel = require("rel");
      entities_ = amp.rows();
      relations_ = rel.rows();
      timestamps_ = static_cast<std::size_t>(store_.metadata().timestamps);
      dim_ = amp.row_width();
      if (freq.rows() != entities_ || phase.rows() != entities_ ||
          freq.row_width() != dim_ || phase.row_width() != dim_ ||
          rel.row_width() != dim_) {
        throw CheckpointError("tensor shapes disagree");
      }
      break;
    }
  }
  if (dim_ == 0) {
    throw ConfigError("model dimension must be positive");
  }
}

ScoreModel ScoreModel::init(ModelKind kind, std::size_t entities,
                            std::size_t relations, std::size_t timestamps,
                            std::size_t dim, std::uint64_t seed) {
  if (dim == 0) {
    throw ConfigError("model dimension must be positive");
  }
  if (entities == 0 || relations == 0 || timestamps == 0) {
    throw ConfigError("vocabulary sizes must be positive");
  }

  StoreMetadata meta;
  meta.kind = std::string(to_string(kind));
  meta.dim = dim;
  meta.seed = seed;
  meta.entities = entities;
  meta.relations = relations;
  meta.timestamps = timestamps;
  ParameterStore store(std::move(meta));

  const std::uint64_t e64 = entities;
  const std::uint64_t r64 = relations;
  const std::uint64_t t64 = timestamps;
  const std::uint64_t d64 = dim;
  switch (kind) {
    case ModelKind::translate_time:
    case ModelKind::trilinear_time:
      store.add("ent", {e64, d64});
      store.add("rel", {r64, d64});
      store.add("time", {t64, d64});
      break;
    case ModelKind::diachronic:
      store.add("ent_amp", {e64, d64});
      store.add("ent_freq", {e64, d64});
      store.add("ent_phase", {e64, d64});
      store.add("rel", {r64, d64});
      break;
  }

  Rng rng(derive_stream_seed(seed, "init"));
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  for (Tensor& t : store.tensors()) {
    for (float& v : t.values) {
      v = static_cast<float>((rng.unit() * 2.0 - 1.0) * bound);
    }
  }
  // Entity and relation embedding rows start inside the unit ball.
  for (const char* name : {"ent", "ent_amp", "rel"}) {
    if (store.has(name)) {
      renormalize_rows(store.tensor(name));
    }
  }

  return ScoreModel(kind, std::move(store));
}

const std::vector<std::string>& ScoreModel::entity_tensor_names() const {
  static const std::vector<std::string> kEmbedding = {"ent"};
  static const std::vector<std::string> kDiachronicNames = {
      "ent_amp", "ent_freq", "ent_phase"};
  return kind_ == ModelKind::diachronic ? kDiachronicNames : kEmbedding;
}

void ScoreModel::check_indices(const Quadruple& q) const {
  if (q.subject >= entities_ || q.object >= entities_) {
    throw IndexError("entity index out of range");
  }
  if (q.predicate >= relations_) {
    throw IndexError("relation index out of range");
  }
  if (q.time >= timestamps_) {
    throw IndexError("timestamp index out of range");
  }
}

double ScoreModel::diachronic_feature(std::span<const float> amp,
                                      std::span<const float> freq,
                                      std::span<const float> phase,
                                      std::size_t k, double t) const {
  const double a = amp[k];
  if (k < static_dims()) {
    return a;
  }
  return a * std::sin(static_cast<double>(freq[k]) * t +
                      static_cast<double>(phase[k]));
}

double ScoreModel::energy(const Quadruple& q) const {
  check_indices(q);
  switch (kind_) {
    case ModelKind::translate_time: {
      const auto es = store_.tensor("ent").row(q.subject);
      const auto eo = store_.tensor("ent").row(q.object);
      const auto r = store_.tensor("rel").row(q.predicate);
      const auto tau = store_.tensor("time").row(q.time);
      double sum = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double diff = (static_cast<double>(es[k]) +
                             static_cast<double>(r[k]) +
                             static_cast<double>(tau[k])) -
                            static_cast<double>(eo[k]);
        sum += std::abs(diff);
      }
      return sum;
    }
    case ModelKind::trilinear_time: {
      const auto es = store_.tensor("ent").row(q.subject);
      const auto eo = store_.tensor("ent").row(q.object);
      const auto r = store_.tensor("rel").row(q.predicate);
      const auto tau = store_.tensor("time").row(q.time);
      double sum = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        sum += static_cast<double>(es[k]) * static_cast<double>(r[k]) *
               static_cast<double>(tau[k]) * static_cast<double>(eo[k]);
      }
      return -sum;
    }
    case ModelKind::diachronic: {
      const auto amp = store_.tensor("ent_amp");
      const auto freq = store_.tensor("ent_freq");
      const auto phase = store_.tensor("ent_phase");
      const auto r = store_.tensor("rel").row(q.predicate);
      const double t = static_cast<double>(q.time);
      double sum = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double fs = diachronic_feature(amp.row(q.subject),
                                             freq.row(q.subject),
                                             phase.row(q.subject), k, t);
        const double fo = diachronic_feature(amp.row(q.object),
                                             freq.row(q.object),
                                             phase.row(q.object), k, t);
        sum += fs * static_cast<double>(r[k]) * fo;
      }
      return -sum;
    }
  }
  throw ConfigError("unreachable model kind");
}

RowGradients ScoreModel::energy_gradient(const Quadruple& q) const {
  check_indices(q);
  RowGradients grad;
  switch (kind_) {
    case ModelKind::translate_time: {
      const auto ent_idx =
          static_cast<std::uint32_t>(store_.tensor_index("ent"));
      const auto rel_idx =
          static_cast<std::uint32_t>(store_.tensor_index("rel"));
      const auto time_idx =
          static_cast<std::uint32_t>(store_.tensor_index("time"));
      const auto es = store_.tensor("ent").row(q.subject);
      const auto eo = store_.tensor("ent").row(q.object);
      const auto r = store_.tensor("rel").row(q.predicate);
      const auto tau = store_.tensor("time").row(q.time);

      auto& g_s = grad.at(ent_idx, q.subject, dim_);
      auto& g_o = grad.at(ent_idx, q.object, dim_);
      auto& g_r = grad.at(rel_idx, q.predicate, dim_);
      auto& g_t = grad.at(time_idx, q.time, dim_);
      for (std::size_t k = 0; k < dim_; ++k) {
        const double diff = (static_cast<double>(es[k]) +
                             static_cast<double>(r[k]) +
                             static_cast<double>(tau[k])) -
                            static_cast<double>(eo[k]);
        const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        g_s[k] += sign;
        g_o[k] -= sign;
        g_r[k] += sign;
        g_t[k] += sign;
      }
      return grad;
    }
    case ModelKind::trilinear_time: {
      const auto ent_idx =
          static_cast<std::uint32_t>(store_.tensor_index("ent"));
      const auto rel_idx =
          static_cast<std::uint32_t>(store_.tensor_index("rel"));
      const auto time_idx =
          static_cast<std::uint32_t>(store_.tensor_index("time"));
      const auto es = store_.tensor("ent").row(q.subject);
      const auto eo = store_.tensor("ent").row(q.object);
      const auto r = store_.tensor("rel").row(q.predicate);
      const auto tau = store_.tensor("time").row(q.time);

      auto& g_s = grad.at(ent_idx, q.subject, dim_);
      auto& g_o = grad.at(ent_idx, q.object, dim_);
      auto& g_r = grad.at(rel_idx, q.predicate, dim_);
      auto& g_t = grad.at(time_idx, q.time, dim_);
      for (std::size_t k = 0; k < dim_; ++k) {
        const double s = es[k];
        const double o = eo[k];
        const double rp = r[k];
        const double tt = tau[k];
        g_s[k] += -(rp * tt * o);
        g_o[k] += -(s * rp * tt);
        g_r[k] += -(s * tt * o);
        g_t[k] += -(s * rp * o);
      }
      return grad;
    }
    case ModelKind::diachronic: {
      const auto amp_idx =
          static_cast<std::uint32_t>(store_.tensor_index("ent_amp"));
      const auto freq_idx =
          static_cast<std::uint32_t>(store_.tensor_index("ent_freq"));
      const auto phase_idx =
          static_cast<std::uint32_t>(store_.tensor_index("ent_phase"));
      const auto rel_idx =
          static_cast<std::uint32_t>(store_.tensor_index("rel"));
      const auto& amp = store_.tensor("ent_amp");
      const auto& freq = store_.tensor("ent_freq");
      const auto& phase = store_.tensor("ent_phase");
      const auto r = store_.tensor("rel").row(q.predicate);
      const double t = static_cast<double>(q.time);
      const std::size_t ds = static_dims();

      auto& g_amp_s = grad.at(amp_idx, q.subject, dim_);
      auto& g_freq_s = grad.at(freq_idx, q.subject, dim_);
      auto& g_phase_s = grad.at(phase_idx, q.subject, dim_);
      auto& g_amp_o = grad.at(amp_idx, q.object, dim_);
      auto& g_freq_o = grad.at(freq_idx, q.object, dim_);
      auto& g_phase_o = grad.at(phase_idx, q.object, dim_);
      auto& g_r = grad.at(rel_idx, q.predicate, dim_);

      for (std::size_t k = 0; k < dim_; ++k) {
        const double rp = r[k];
        const double fs = diachronic_feature(amp.row(q.subject),
                                             freq.row(q.subject),
                                             phase.row(q.subject), k, t);
        const double fo = diachronic_feature(amp.row(q.object),
                                             freq.row(q.object),
                                             phase.row(q.object), k, t);
        g_r[k] += -(fs * fo);

        if (k < ds) {
          g_amp_s[k] += -(rp * fo);
          g_amp_o[k] += -(fs * rp);
        } else {
          const double arg_s =
              static_cast<double>(freq.row(q.subject)[k]) * t +
              static_cast<double>(phase.row(q.subject)[k]);
          const double arg_o =
              static_cast<double>(freq.row(q.object)[k]) * t +
              static_cast<double>(phase.row(q.object)[k]);
          const double amp_s = amp.row(q.subject)[k];
          const double amp_o = amp.row(q.object)[k];
          g_amp_s[k] += -(rp * fo) * std::sin(arg_s);
          g_freq_s[k] += -(rp * fo) * amp_s * std::cos(arg_s) * t;
          g_phase_s[k] += -(rp * fo) * amp_s * std::cos(arg_s);
          g_amp_o[k] += -(fs * rp) * std::sin(arg_o);
          g_freq_o[k] += -(fs * rp) * amp_o * std::cos(arg_o) * t;
          g_phase_o[k] += -(fs * rp) * amp_o * std::cos(arg_o);
        }
      }
      return grad;
    }
  }
  throw ConfigError("unreachable model kind");
}

ScoreModel ScoreModel::load(const std::filesystem::path& file) {
  ParameterStore store = ParameterStore::load(file);
  const ModelKind kind = parse_model_kind(store.metadata().kind);
  return ScoreModel(kind, std::move(store));
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "sgd") {
    return OptimizerKind::sgd;
  }
  if (text == "adam") {
    return OptimizerKind::adam;
  }
  throw ConfigError("unknown optimizer '" + std::string(text) + "'");
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

void Optimizer::apply(ScoreModel& model, const RowGradients& gradients,
                      double learning_rate, bool ascend) {
  auto& tensors = model.params().tensors();
  const double direction = ascend ? -1.0 : 1.0;
  ++step_;

  if (config_.kind == OptimizerKind::adam &&
      first_moment_.size() != tensors.size()) {
    first_moment_.resize(tensors.size());
    second_moment_.resize(tensors.size());
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      first_moment_[i].assign(tensors[i].values.size(), 0.0);
      second_moment_[i].assign(tensors[i].values.size(), 0.0);
    }
  }

  for (const RowGradients::Entry& e : gradients.entries()) {
    if (e.tensor >= tensors.size()) {
      throw ConfigError("gradient references unknown tensor");
    }
    Tensor& t = tensors[e.tensor];
    auto row = t.row(e.row);
    const std::size_t offset = e.row * t.row_width();
    for (std::size_t k = 0; k < e.values.size(); ++k) {
      double step;
      if (config_.kind == OptimizerKind::adam) {
        double& m = first_moment_[e.tensor][offset + k];
        double& v = second_moment_[e.tensor][offset + k];
        const double g = direction * e.values[k];
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v + (1.0 - config_.beta2) * g * g;
        const double m_hat =
            m / (1.0 - std::pow(config_.beta1, static_cast<double>(step_)));
        const double v_hat =
            v / (1.0 - std::pow(config_.beta2, static_cast<double>(step_)));
        step = learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      } else {
        step = learning_rate * direction * e.values[k];
      }
      const double updated = static_cast<double>(row[k]) - step;
      row[k] = static_cast<float>(updated);
      if (!std::isfinite(row[k])) {
        throw NumericError("non-finite parameter after update in tensor '" +
                           t.name + "'");
      }
    }
  }

  // Margin-based translation models keep entity rows inside the unit ball.
  if (model.kind() == ModelKind::translate_time) {
    const auto ent_idx =
        static_cast<std::uint32_t>(model.params().tensor_index("ent"));
    Tensor& ent = tensors[ent_idx];
    for (const RowGradients::Entry& e : gradients.entries()) {
      if (e.tensor != ent_idx) {
        continue;
      }
      auto row = ent.row(e.row);
      double norm_sq = 0.0;
      for (float v : row) {
        norm_sq += static_cast<double>(v) * static_cast<double>(v);
      }
      if (norm_sq > 1.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t k = 0; k < row.size(); ++k) {
          row[k] = static_cast<float>(static_cast<double>(row[k]) * inv);
        }
      }
    }
  }
}

}  // namespace tkgr
