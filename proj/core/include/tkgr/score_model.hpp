#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkgr/parameter_store.hpp"
#include "tkgr/quadruple.hpp"

namespace tkgr {

enum class ModelKind : std::uint8_t {
  translate_time,  // ||e_s + r_p + tau_t - e_o||_1
  trilinear_time,  // -sum_k e_s * r_p * tau_t * e_o
  diachronic,      // trilinear over entity vectors with sin-modulated features
};

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Sparse gradient over parameter rows: one accumulated entry per touched
/// (tensor, row). Values are kept in double precision until applied.
class RowGradients {
 public:
  struct Entry {
    std::uint32_t tensor = 0;
    std::uint32_t row = 0;
    std::vector<double> values;
  };

  /// Returns the accumulation buffer for a row, creating it zero-filled.
  /// References stay valid across further at() calls (deque storage).
  std::vector<double>& at(std::uint32_t tensor, std::uint32_t row,
                          std::size_t width);

  void add_scaled(const RowGradients& other, double scale);
  void scale(double factor);
  bool finite() const;
  double l2_norm() const;
  bool empty() const noexcept { return entries_.empty(); }
  const std::deque<Entry>& entries() const noexcept { return entries_; }

 private:
  std::deque<Entry> entries_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

/// Temporal embedding score model. The scalar is an ENERGY: lower values mean
/// the quadruple is more plausible, everywhere in this library.
class ScoreModel {
 public:
  static constexpr bool kLowerEnergyMorePlausible = true;

  ScoreModel(ModelKind kind, ParameterStore store);

  /// Fresh parameters, uniform in [-6/sqrt(d), 6/sqrt(d)], deterministic
  /// given the seed; entity and relation embedding rows are renormalized to
  /// the unit ball.
  static ScoreModel init(ModelKind kind, std::size_t entities,
                         std::size_t relations, std::size_t timestamps,
                         std::size_t dim, std::uint64_t seed);

  ModelKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_entities() const noexcept { return entities_; }
  std::size_t num_relations() const noexcept { return relations_; }
  std::size_t num_timestamps() const noexcept { return timestamps_; }

  double energy(const Quadruple& q) const;
  double plausibility(const Quadruple& q) const { return -energy(q); }

  /// Analytic gradient of energy() with respect to every touched parameter
  /// row. The L1 subgradient at exact zeros is 0. Rows outside the quadruple
  /// do not appear.
  RowGradients energy_gradient(const Quadruple& q) const;

  ParameterStore& params() noexcept { return store_; }
  const ParameterStore& params() const noexcept { return store_; }

  /// Tensors holding per-entity rows; this is the test-time adaptation subset.
  const std::vector<std::string>& entity_tensor_names() const;

  void save(const std::filesystem::path& file) const { store_.save(file); }
  static ScoreModel load(const std::filesystem::path& file);

  friend bool operator==(const ScoreModel& a, const ScoreModel& b) {
    return a.kind_ == b.kind_ && a.store_ == b.store_;
  }

 private:
  void check_indices(const Quadruple& q) const;
  std::size_t static_dims() const noexcept { return dim_ / 2; }
  double diachronic_feature(std::span<const float> amp,
                            std::span<const float> freq,
                            std::span<const float> phase, std::size_t k,
                            double t) const;

  ModelKind kind_;
  ParameterStore store_;
  std::size_t dim_ = 0;
  std::size_t entities_ = 0;
  std::size_t relations_ = 0;
  std::size_t timestamps_ = 0;
};

enum class OptimizerKind : std::uint8_t { sgd, adam };

OptimizerKind parse_optimizer_kind(std::string_view text);
std::string_view to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Applies sparse gradient steps to one model. Adam moments are kept per
/// tensor in double precision and updated lazily for touched rows. After a
/// step, touched rows are checked for finiteness (NumericError on failure)
/// and translate-time entity rows are renormalized to the unit ball.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

  void apply(ScoreModel& model, const RowGradients& gradients,
             double learning_rate, bool ascend = false);

 private:
  OptimizerConfig config_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

}  // namespace tkgr
