#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tkgr/distribution.hpp"

namespace tkgr {

/// Entity-distribution predictor: a single-layer LSTM (forget, input, cell,
/// output gates) over the last `seq_len` snapshot distributions, followed by
/// a softmax projection to the entity vocabulary. Parameters are kept in
/// double precision; gradients are hand-derived by backpropagation through
/// time.
class LstmPredictor {
 public:
  static constexpr std::size_t kDefaultSeqLen = 20;

  struct Dims {
    std::size_t input = 0;    // |E|
    std::size_t hidden = 64;
    std::size_t seq_len = kDefaultSeqLen;  // l
  };

  static LstmPredictor init(Dims dims, std::uint64_t seed);

  const Dims& dims() const noexcept { return dims_; }

  /// Next-step distribution from exactly seq_len trailing distributions.
  /// Throws SequenceLengthError on a wrong window length.
  std::vector<double> predict(
      std::span<const std::vector<double>> window) const;

  /// Cross-entropy between the prediction for `window` and `target`,
  /// computed in log space.
  double loss(std::span<const std::vector<double>> window,
              std::span<const double> target) const;

  /// Loss plus its gradient over the flat parameter vector.
  std::pair<double, std::vector<double>> loss_gradients(
      std::span<const std::vector<double>> window,
      std::span<const double> target) const;

  struct FitConfig {
    std::size_t epochs = 200;
    double learning_rate = 1e-3;  // Adam
  };

  /// Trains on all sliding windows of the series; returns the mean window
  /// loss of the final epoch. Throws ConfigError when the series is shorter
  /// than seq_len + 1.
  double fit(const DistributionSeries& series, const FitConfig& config);

  /// Flat parameter access (gate matrices, gate biases, output projection).
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  void save(const std::filesystem::path& file) const;
  static LstmPredictor load(const std::filesystem::path& file);

  friend bool operator==(const LstmPredictor& a, const LstmPredictor& b) {
    return a.dims_.input == b.dims_.input &&
           a.dims_.hidden == b.dims_.hidden &&
           a.dims_.seq_len == b.dims_.seq_len && a.seed_ == b.seed_ &&
           a.params_ == b.params_;
  }

 private:
  LstmPredictor(Dims dims, std::uint64_t seed);

  struct Offsets {
    std::size_t w_forget, w_input, w_cell, w_output;
    std::size_t b_forget, b_input, b_cell, b_output;
    std::size_t w_out, b_out;
    std::size_t total;
  };
  Offsets offsets() const noexcept;

  struct Forward;  // per-step activations cached for backprop
  void run_forward(std::span<const std::vector<double>> window,
                   Forward& fwd) const;

  Dims dims_;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
};

}  // namespace tkgr
