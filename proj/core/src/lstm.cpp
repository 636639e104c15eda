#include "tkgr/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "tkgr/errors.hpp"
#include "tkgr/io.hpp"
#include "tkgr/rng.hpp"

namespace tkgr {

namespace {

constexpr char kPredictorMagic[4] = {'T', 'K', 'G', 'P'};
constexpr std::uint16_t kPredictorVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LstmPredictor::Offsets LstmPredictor::offsets() const noexcept {
  const std::size_t e = dims_.input;
  const std::size_t h = dims_.hidden;
  const std::size_t z = e + h;
  Offsets o{};
  o.w_forget = 0;
  o.w_input = o.w_forget + h * z;
  o.w_cell = o.w_input + h * z;
  o.w_output = o.w_cell + h * z;
  o.b_forget = o.w_output + h * z;
  o.b_input = o.b_forget + h;
  o.b_cell = o.b_input + h;
  o.b_output = o.b_cell + h;
  o.w_out = o.b_output + h;
  o.b_out = o.w_out + e * h;
  o.total = o.b_out + e;
  return o;
}

LstmPredictor::LstmPredictor(Dims dims, std::uint64_t seed)
    : dims_(dims), seed_(seed) {
  if (dims_.input == 0 || dims_.hidden == 0 || dims_.seq_len == 0) {
    throw ConfigError("LSTM dimensions must be positive");
  }
  params_.assign(offsets().total, 0.0);
}

LstmPredictor LstmPredictor::init(Dims dims, std::uint64_t seed) {
  LstmPredictor p(dims, seed);
  const Offsets off = p.offsets();
  const std::size_t z = dims.input + dims.hidden;
  Rng rng(derive_stream_seed(seed, "lstm/init"));

  const double gate_scale = 1.0 / std::sqrt(static_cast<double>(z));
  for (std::size_t i = off.w_forget; i < off.b_forget; ++i) {
    p.params_[i] = (rng.unit() * 2.0 - 1.0) * gate_scale;
  }
  // Forget-gate bias starts at 1 so early training favors carrying state.
  for (std::size_t i = off.b_forget; i < off.b_input; ++i) {
    p.params_[i] = 1.0;
  }
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  for (std::size_t i = off.w_out; i < off.b_out; ++i) {
    p.params_[i] = (rng.unit() * 2.0 - 1.0) * out_scale;
  }
  return p;
}

struct LstmPredictor::Forward {
  // Per step: gate activations and states needed by the backward pass.
  std::vector<std::vector<double>> z;       // concat(x_t, h_prev)
  std::vector<std::vector<double>> f, i, c_bar, o;
  std::vector<std::vector<double>> c, tanh_c;
  std::vector<std::vector<double>> c_prev;
  std::vector<double> logits;               // pre-softmax output
  std::vector<double> probs;                // softmax output
};

void LstmPredictor::run_forward(std::span<const std::vector<double>> window,
                                Forward& fwd) const {
  const std::size_t e = dims_.input;
  const std::size_t h = dims_.hidden;
  const std::size_t z_width = e + h;
  if (window.size() != dims_.seq_len) {
    throw SequenceLengthError("window length " +
                              std::to_string(window.size()) +
                              " does not match input sequence length " +
                              std::to_string(dims_.seq_len));
  }
  for (const auto& x : window) {
    if (x.size() != e) {
      throw ConfigError("window distribution has wrong dimension");
    }
  }

  const Offsets off = offsets();
  const double* wf = params_.data() + off.w_forget;
  const double* wi = params_.data() + off.w_input;
  const double* wc = params_.data() + off.w_cell;
  const double* wo = params_.data() + off.w_output;
  const double* bf = params_.data() + off.b_forget;
  const double* bi = params_.data() + off.b_input;
  const double* bc = params_.data() + off.b_cell;
  const double* bo = params_.data() + off.b_output;

  std::vector<double> h_state(h, 0.0);
  std::vector<double> c_state(h, 0.0);

  const std::size_t steps = window.size();
  fwd.z.assign(steps, {});
  fwd.f.assign(steps, {});
  fwd.i.assign(steps, {});
  fwd.c_bar.assign(steps, {});
  fwd.o.assign(steps, {});
  fwd.c.assign(steps, {});
  fwd.tanh_c.assign(steps, {});
  fwd.c_prev.assign(steps, {});

  for (std::size_t t = 0; t < steps; ++t) {
    auto& z = fwd.z[t];
    z.resize(z_width);
    std::copy(window[t].begin(), window[t].end(), z.begin());
    std::copy(h_state.begin(), h_state.end(), z.begin() + e);
    fwd.c_prev[t] = c_state;

    auto& f = fwd.f[t];
    auto& i = fwd.i[t];
    auto& c_bar = fwd.c_bar[t];
    auto& o = fwd.o[t];
    f.resize(h);
    i.resize(h);
    c_bar.resize(h);
    o.resize(h);
    for (std::size_t j = 0; j < h; ++j) {
      double af = bf[j], ai = bi[j], ac = bc[j], ao = bo[j];
      const double* wf_row = wf + j * z_width;
      const double* wi_row = wi + j * z_width;
      const double* wc_row = wc + j * z_width;
      const double* wo_row = wo + j * z_width;
      for (std::size_t k = 0; k < z_width; ++k) {
        af += wf_row[k] * z[k];
        ai += wi_row[k] * z[k];
        ac += wc_row[k] * z[k];
        ao += wo_row[k] * z[k];
      }
      f[j] = sigmoid(af);
      i[j] = sigmoid(ai);
      c_bar[j] = std::tanh(ac);
      o[j] = sigmoid(ao);
    }

    auto& c = fwd.c[t];
    auto& tanh_c = fwd.tanh_c[t];
    c.resize(h);
    tanh_c.resize(h);
    for (std::size_t j = 0; j < h; ++j) {
      c[j] = f[j] * c_state[j] + i[j] * c_bar[j];
      tanh_c[j] = std::tanh(c[j]);
      h_state[j] = o[j] * tanh_c[j];
      c_state[j] = c[j];
    }
  }

  const double* wy = params_.data() + off.w_out;
  const double* by = params_.data() + off.b_out;
  fwd.logits.assign(e, 0.0);
  for (std::size_t j = 0; j < e; ++j) {
    double u = by[j];
    const double* row = wy + j * h;
    for (std::size_t k = 0; k < h; ++k) {
      u += row[k] * h_state[k];
    }
    fwd.logits[j] = u;
  }

  const double max_logit =
      *std::max_element(fwd.logits.begin(), fwd.logits.end());
  double total = 0.0;
  fwd.probs.assign(e, 0.0);
  for (std::size_t j = 0; j < e; ++j) {
    fwd.probs[j] = std::exp(fwd.logits[j] - max_logit);
    total += fwd.probs[j];
  }
  for (double& p : fwd.probs) {
    p /= total;
  }
}

std::vector<double> LstmPredictor::predict(
    std::span<const std::vector<double>> window) const {
  Forward fwd;
  run_forward(window, fwd);
  return fwd.probs;
}

double LstmPredictor::loss(std::span<const std::vector<double>> window,
                           std::span<const double> target) const {
  Forward fwd;
  run_forward(window, fwd);
  if (target.size() != dims_.input) {
    throw ConfigError("target distribution has wrong dimension");
  }
  const double max_logit =
      *std::max_element(fwd.logits.begin(), fwd.logits.end());
  double lse = 0.0;
  for (double u : fwd.logits) {
    lse += std::exp(u - max_logit);
  }
  lse = max_logit + std::log(lse);
  double l = 0.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    l -= target[j] * (fwd.logits[j] - lse);
  }
  return l;
}

std::pair<double, std::vector<double>> LstmPredictor::loss_gradients(
    std::span<const std::vector<double>> window,
    std::span<const double> target) const {
  const std::size_t e = dims_.input;
  const std::size_t h = dims_.hidden;
  const std::size_t z_width = e + h;
  const Offsets off = offsets();

  Forward fwd;
  run_forward(window, fwd);
  if (target.size() != e) {
    throw ConfigError("target distribution has wrong dimension");
  }

  const double max_logit =
      *std::max_element(fwd.logits.begin(), fwd.logits.end());
  double lse = 0.0;
  for (double u : fwd.logits) {
    lse += std::exp(u - max_logit);
  }
  lse = max_logit + std::log(lse);
  double loss = 0.0;
  for (std::size_t j = 0; j < e; ++j) {
    loss -= target[j] * (fwd.logits[j] - lse);
  }

  std::vector<double> grad(off.total, 0.0);

  // Softmax cross-entropy: d loss / d logits = probs - target.
  std::vector<double> d_logits(e);
  for (std::size_t j = 0; j < e; ++j) {
    d_logits[j] = fwd.probs[j] - target[j];
  }

  const std::size_t steps = window.size();
  const std::vector<double>& h_last_src = fwd.tanh_c[steps - 1];
  std::vector<double> h_last(h);
  for (std::size_t k = 0; k < h; ++k) {
    h_last[k] = fwd.o[steps - 1][k] * h_last_src[k];
  }

  const double* wy = params_.data() + off.w_out;
  std::vector<double> d_h(h, 0.0);
  for (std::size_t j = 0; j < e; ++j) {
    grad[off.b_out + j] += d_logits[j];
    for (std::size_t k = 0; k < h; ++k) {
      grad[off.w_out + j * h + k] += d_logits[j] * h_last[k];
      d_h[k] += wy[j * h + k] * d_logits[j];
    }
  }

  const double* wf = params_.data() + off.w_forget;
  const double* wi = params_.data() + off.w_input;
  const double* wc = params_.data() + off.w_cell;
  const double* wo = params_.data() + off.w_output;

  std::vector<double> d_c(h, 0.0);
  for (std::size_t t = steps; t-- > 0;) {
    const auto& f = fwd.f[t];
    const auto& i = fwd.i[t];
    const auto& c_bar = fwd.c_bar[t];
    const auto& o = fwd.o[t];
    const auto& tanh_c = fwd.tanh_c[t];
    const auto& c_prev = fwd.c_prev[t];
    const auto& z = fwd.z[t];

    std::vector<double> d_z(z_width, 0.0);
    for (std::size_t j = 0; j < h; ++j) {
      const double do_j = d_h[j] * tanh_c[j];
      d_c[j] += d_h[j] * o[j] * (1.0 - tanh_c[j] * tanh_c[j]);

      const double df_j = d_c[j] * c_prev[j];
      const double di_j = d_c[j] * c_bar[j];
      const double dcbar_j = d_c[j] * i[j];

      const double da_f = df_j * f[j] * (1.0 - f[j]);
      const double da_i = di_j * i[j] * (1.0 - i[j]);
      const double da_c = dcbar_j * (1.0 - c_bar[j] * c_bar[j]);
      const double da_o = do_j * o[j] * (1.0 - o[j]);

      grad[off.b_forget + j] += da_f;
      grad[off.b_input + j] += da_i;
      grad[off.b_cell + j] += da_c;
      grad[off.b_output + j] += da_o;

      const std::size_t row = j * z_width;
      for (std::size_t k = 0; k < z_width; ++k) {
        grad[off.w_forget + row + k] += da_f * z[k];
        grad[off.w_input + row + k] += da_i * z[k];
        grad[off.w_cell + row + k] += da_c * z[k];
        grad[off.w_output + row + k] += da_o * z[k];
        d_z[k] += wf[row + k] * da_f + wi[row + k] * da_i +
                  wc[row + k] * da_c + wo[row + k] * da_o;
      }
      d_c[j] *= f[j];  // becomes d_c_prev
    }
    for (std::size_t j = 0; j < h; ++j) {
      d_h[j] = d_z[e + j];
    }
  }

  return {loss, std::move(grad)};
}

double LstmPredictor::fit(const DistributionSeries& series,
                          const FitConfig& config) {
  const std::size_t l = dims_.seq_len;
  if (series.size() < l + 1) {
    throw ConfigError("series of length " + std::to_string(series.size()) +
                      " is too short for input sequence length " +
                      std::to_string(l));
  }
  for (const auto& dist : series.distributions) {
    if (dist.size() != dims_.input) {
      throw ConfigError("series dimension does not match LSTM input");
    }
  }

  const std::size_t window_count = series.size() - l;
  std::vector<double> m(params_.size(), 0.0);
  std::vector<double> v(params_.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t step = 0;
  double last_epoch_loss = 0.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t w = 0; w < window_count; ++w) {
      auto [loss, grad] = loss_gradients(
          std::span<const std::vector<double>>(series.distributions.data() + w,
                                               l),
          series.distributions[w + l]);
      epoch_loss += loss;
      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < params_.size(); ++p) {
        m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
        v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
        params_[p] -= config.learning_rate * (m[p] / bc1) /
                      (std::sqrt(v[p] / bc2) + eps);
        if (!std::isfinite(params_[p])) {
          throw NumericError("non-finite LSTM parameter during fit");
        }
      }
    }
    last_epoch_loss = epoch_loss / static_cast<double>(window_count);
  }
  return last_epoch_loss;
}

void LstmPredictor::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw CheckpointError("cannot open " + file.string() + " for writing");
  }
  io::write_bytes(out, kPredictorMagic, sizeof(kPredictorMagic));
  io::write_u16(out, kPredictorVersion);
  nlohmann::json meta;
  meta["input"] = dims_.input;
  meta["hidden"] = dims_.hidden;
  meta["seq_len"] = dims_.seq_len;
  meta["seed"] = seed_;
  io::write_string(out, meta.dump());
  io::write_u64(out, params_.size());
  for (double p : params_) {
    io::write_f64(out, p);
  }
  if (!out) {
    throw CheckpointError("write failure on " + file.string());
  }
}

LstmPredictor LstmPredictor::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw CheckpointError("cannot open " + file.string());
  }
  char magic[4];
  try {
    io::read_bytes(in, magic, sizeof(magic));
    if (std::string_view(magic, 4) != std::string_view(kPredictorMagic, 4)) {
      throw CheckpointError("bad magic in " + file.string() +
                            " (not a TKGP predictor)");
    }
    const std::uint16_t version = io::read_u16(in);
    if (version != kPredictorVersion) {
      throw CheckpointError("unsupported TKGP version " +
                            std::to_string(version));
    }
    nlohmann::json meta = nlohmann::json::parse(io::read_string(in));
    Dims dims;
    dims.input = meta.at("input").get<std::size_t>();
    dims.hidden = meta.at("hidden").get<std::size_t>();
    dims.seq_len = meta.at("seq_len").get<std::size_t>();
    LstmPredictor p(dims, meta.at("seed").get<std::uint64_t>());
    const std::uint64_t count = io::read_u64(in);
    if (count != p.params_.size()) {
      throw CheckpointError("predictor parameter count mismatch");
    }
    for (double& v : p.params_) {
      v = io::read_f64(in);
    }
    if (!io::at_eof(in)) {
      throw CheckpointError("trailing bytes after predictor payload");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad predictor metadata: ") + e.what());
  } catch (const CheckpointError&) {
    throw;
  } catch (const ContainerError& e) {
    throw CheckpointError("truncated predictor " + file.string() + ": " +
                          e.what());
  }
}

}  // namespace tkgr
