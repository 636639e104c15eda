#pragma once

// Central finite-difference oracles for gradients. These re-derive every
// derivative numerically and never reuse the analytic gradient code paths
// they check.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tkgr/score_model.hpp"

namespace tkgr::testing {

/// Central difference of `eval` with respect to one float32 parameter.
/// The denominator is the actually-representable step between the two
/// perturbed float values, which keeps the oracle accurate despite the
/// 32-bit storage.
inline double fd_derivative(float& param, double step,
                            const std::function<double()>& eval) {
  const float original = param;
  const auto plus = static_cast<float>(static_cast<double>(original) + step);
  const auto minus = static_cast<float>(static_cast<double>(original) - step);
  param = plus;
  const double f_plus = eval();
  param = minus;
  const double f_minus = eval();
  param = original;
  const double h =
      static_cast<double>(plus) - static_cast<double>(minus);
  return (f_plus - f_minus) / h;
}

struct FdReport {
  double max_rel_error = 0.0;
  std::size_t compared = 0;
};

/// Compares an analytic RowGradients against finite differences of an
/// arbitrary scalar objective over the model parameters. Relative error per
/// row is ||analytic - fd|| / max(1, ||fd||).
inline FdReport fd_check_rows(ScoreModel& model,
                              const RowGradients& analytic, double step,
                              const std::function<double()>& eval) {
  FdReport report;
  auto& tensors = model.params().tensors();
  for (const RowGradients::Entry& entry : analytic.entries()) {
    Tensor& tensor = tensors[entry.tensor];
    auto row = tensor.row(entry.row);
    double diff_sq = 0.0;
    double fd_sq = 0.0;
    for (std::size_t k = 0; k < entry.values.size(); ++k) {
      const double fd = fd_derivative(row[k], step, eval);
      const double diff = entry.values[k] - fd;
      diff_sq += diff * diff;
      fd_sq += fd * fd;
      ++report.compared;
    }
    const double rel =
        std::sqrt(diff_sq) / std::max(1.0, std::sqrt(fd_sq));
    report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  return report;
}

/// Gradient check of model.energy(q) itself.
inline FdReport fd_check_energy(ScoreModel& model, const Quadruple& q,
                                double step = 1e-4) {
  const RowGradients analytic = model.energy_gradient(q);
  return fd_check_rows(model, analytic, step,
                       [&]() { return model.energy(q); });
}

/// The L1 kink guard: finite differences are meaningless within `margin` of
/// a translate-time zero crossing, so such draws are rejected by callers.
inline bool near_l1_kink(const ScoreModel& model, const Quadruple& q,
                         double margin) {
  if (model.kind() != ModelKind::translate_time) {
    return false;
  }
  const auto& store = model.params();
  const auto es = store.tensor("ent").row(q.subject);
  const auto eo = store.tensor("ent").row(q.object);
  const auto r = store.tensor("rel").row(q.predicate);
  const auto tau = store.tensor("time").row(q.time);
  for (std::size_t k = 0; k < es.size(); ++k) {
    const double diff = (static_cast<double>(es[k]) +
                         static_cast<double>(r[k]) +
                         static_cast<double>(tau[k])) -
                        static_cast<double>(eo[k]);
    if (std::abs(diff) < margin) {
      return true;
    }
  }
  return false;
}

/// Central difference for double-precision parameter vectors (LSTM).
inline std::vector<double> fd_gradient_dense(
    std::span<double> params, double step,
    const std::function<double()>& eval) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double original = params[i];
    params[i] = original + step;
    const double f_plus = eval();
    params[i] = original - step;
    const double f_minus = eval();
    params[i] = original;
    grad[i] = (f_plus - f_minus) / (2.0 * step);
  }
  return grad;
}

inline double rel_error(std::span<const double> analytic,
                        std::span<const double> reference) {
  double diff_sq = 0.0;
  double ref_sq = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - reference[i];
    diff_sq += d * d;
    ref_sq += reference[i] * reference[i];
  }
  return std::sqrt(diff_sq) / std::max(1.0, std::sqrt(ref_sq));
}

}  // namespace tkgr::testing
