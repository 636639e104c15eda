#include "tkgr/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tkgr/errors.hpp"

namespace tkgr {

namespace {

std::string trim(std::string_view s) {
  std::size_t begin = s.find_first_not_of(" \t");
  std::size_t end = s.find_last_not_of(" \t");
  if (begin == std::string_view::npos) {
    return "";
  }
  return std::string(s.substr(begin, end - begin + 1));
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as an unsigned integer");
  }
  return out;
}

std::int64_t parse_signed(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as an integer");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument(value);
    }
    return out;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as a number");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no") {
    return false;
  }
  throw ConfigError("key '" + key + "': cannot parse '" + value +
                    "' as a boolean");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SamplingStrategy parse_sampling_strategy(std::string_view text) {
  if (text == "rns") {
    return SamplingStrategy::rns;
  }
  if (text == "tans") {
    return SamplingStrategy::tans;
  }
  if (text == "tkgan") {
    return SamplingStrategy::tkgan;
  }
  throw ConfigError("unknown sampling strategy '" + std::string(text) + "'");
}

std::string_view to_string(SamplingStrategy strategy) {
  switch (strategy) {
    case SamplingStrategy::rns:
      return "rns";
    case SamplingStrategy::tans:
      return "tans";
    case SamplingStrategy::tkgan:
      return "tkgan";
  }
  return "?";
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "data.path") {
    data_path = value;
  } else if (key == "data.interval") {
    interval = parse_signed(key, value);
  } else if (key == "data.interval_unit") {
    interval_unit = value;
  } else if (key == "model.kind") {
    model_kind = parse_model_kind(value);
  } else if (key == "model.generator_kind") {
    generator_kind = parse_model_kind(value);
  } else if (key == "model.dim") {
    dim = parse_unsigned<std::size_t>(key, value);
  } else if (key == "train.strategy") {
    strategy = parse_sampling_strategy(value);
  } else if (key == "train.margin") {
    margin = parse_double(key, value);
  } else if (key == "train.candidates") {
    candidates = parse_unsigned<std::size_t>(key, value);
  } else if (key == "train.lr") {
    lr = parse_double(key, value);
  } else if (key == "train.generator_lr") {
    generator_lr = parse_double(key, value);
  } else if (key == "train.discriminator_lr") {
    discriminator_lr = parse_double(key, value);
  } else if (key == "train.batch_size") {
    batch_size = parse_unsigned<std::size_t>(key, value);
  } else if (key == "train.max_epochs") {
    max_epochs = parse_unsigned<std::size_t>(key, value);
  } else if (key == "train.pretrain_epochs") {
    pretrain_epochs = parse_unsigned<std::size_t>(key, value);
  } else if (key == "train.selection") {
    selection = parse_negative_selection(value);
  } else if (key == "train.patience") {
    patience = parse_unsigned<std::size_t>(key, value);
  } else if (key == "train.reward_samples") {
    reward_samples = parse_unsigned<std::size_t>(key, value);
  } else if (key == "train.bern") {
    bern = parse_bool(key, value);
  } else if (key == "train.filter_known") {
    filter_known = parse_bool(key, value);
  } else if (key == "train.optimizer") {
    optimizer = parse_optimizer_kind(value);
  } else if (key == "train.tans_window") {
    tans_window = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "train.val_queries") {
    val_queries = parse_unsigned<std::size_t>(key, value);
  } else if (key == "ttt.lr") {
    ttt_lr = parse_double(key, value);
  } else if (key == "ttt.steps") {
    ttt_steps = parse_unsigned<std::size_t>(key, value);
  } else if (key == "ttt.horizon") {
    ttt_horizon = parse_unsigned<std::size_t>(key, value);
  } else if (key == "ttt.subset") {
    ttt_subset = parse_ttt_subset(value);
  } else if (key == "ttt.mode") {
    ttt_mode = parse_count_mode(value);
  } else if (key == "ttt.seq_len") {
    ttt_seq_len = parse_unsigned<std::size_t>(key, value);
  } else if (key == "ttt.hidden") {
    ttt_hidden = parse_unsigned<std::size_t>(key, value);
  } else if (key == "ttt.include_valid") {
    ttt_include_valid = parse_bool(key, value);
  } else if (key == "ttt.fit_epochs") {
    ttt_fit_epochs = parse_unsigned<std::size_t>(key, value);
  } else if (key == "ttt.fit_lr") {
    ttt_fit_lr = parse_double(key, value);
  } else if (key == "eval.protocol") {
    protocol = parse_ranking_protocol(value);
  } else if (key == "shift.window") {
    shift_window = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "shift.mode") {
    shift_mode = parse_shift_mode(value);
  } else if (key == "seed") {
    seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "workers") {
    workers = parse_unsigned<unsigned>(key, value);
  } else if (key == "out") {
    out_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::load_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ConfigError("cannot open config file " + file.string());
  }
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') {
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(file.string(), line_number,
                       "expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(file.string(), line_number, "empty config key");
    }
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ParseError(file.string(), line_number, e.what());
    }
  }
}

void RunConfig::validate() const {
  if (interval <= 0) {
    throw ConfigError("data.interval must be positive");
  }
  if (dim == 0) {
    throw ConfigError("model.dim must be positive");
  }
  if (!(margin > 0.0)) {
    throw ConfigError("train.margin must be positive");
  }
  if (candidates == 0) {
    throw ConfigError("train.candidates must be at least 1");
  }
  for (const auto& [name, value] :
       {std::pair<const char*, double>{"train.lr", lr},
        {"train.generator_lr", generator_lr},
        {"train.discriminator_lr", discriminator_lr},
        {"ttt.fit_lr", ttt_fit_lr}}) {
    if (!(value > 0.0)) {
      throw ConfigError(std::string(name) + " must be positive");
    }
  }
  if (ttt_steps > 0 && !(ttt_lr > 0.0)) {
    throw ConfigError("ttt.lr must be positive");
  }
  if (batch_size == 0) {
    throw ConfigError("train.batch_size must be at least 1");
  }
  if (patience == 0) {
    throw ConfigError("train.patience must be at least 1");
  }
  if (reward_samples == 0) {
    throw ConfigError("train.reward_samples must be at least 1");
  }
  if (tans_window == 0) {
    throw ConfigError("train.tans_window must be at least 1");
  }
  if (ttt_seq_len == 0) {
    throw ConfigError("ttt.seq_len must be at least 1");
  }
  if (ttt_hidden == 0) {
    throw ConfigError("ttt.hidden must be at least 1");
  }
  if (shift_window == 0) {
    throw ConfigError("shift.window must be at least 1");
  }
  if (workers == 0) {
    throw ConfigError("workers must be at least 1");
  }
}

std::string RunConfig::resolved() const {
  std::ostringstream out;
  out << "data.path = " << data_path << "\n";
  out << "data.interval = " << interval << "\n";
  out << "data.interval_unit = " << interval_unit << "\n";
  out << "model.kind = " << to_string(model_kind) << "\n";
  out << "model.generator_kind = " << to_string(generator_kind) << "\n";
  out << "model.dim = " << dim << "\n";
  out << "train.strategy = " << to_string(strategy) << "\n";
  out << "train.margin = " << format_double(margin) << "\n";
  out << "train.candidates = " << candidates << "\n";
  out << "train.lr = " << format_double(lr) << "\n";
  out << "train.generator_lr = " << format_double(generator_lr) << "\n";
  out << "train.discriminator_lr = " << format_double(discriminator_lr)
      << "\n";
  out << "train.batch_size = " << batch_size << "\n";
  out << "train.max_epochs = " << max_epochs << "\n";
  out << "train.pretrain_epochs = " << pretrain_epochs << "\n";
  out << "train.selection = " << to_string(selection) << "\n";
  out << "train.patience = " << patience << "\n";
  out << "train.reward_samples = " << reward_samples << "\n";
  out << "train.bern = " << (bern ? "true" : "false") << "\n";
  out << "train.filter_known = " << (filter_known ? "true" : "false") << "\n";
  out << "train.optimizer = " << to_string(optimizer) << "\n";
  out << "train.tans_window = " << tans_window << "\n";
  out << "train.val_queries = " << val_queries << "\n";
  out << "ttt.lr = " << format_double(ttt_lr) << "\n";
  out << "ttt.steps = " << ttt_steps << "\n";
  out << "ttt.horizon = " << ttt_horizon << "\n";
  out << "ttt.subset = " << to_string(ttt_subset) << "\n";
  out << "ttt.mode = " << to_string(ttt_mode) << "\n";
  out << "ttt.seq_len = " << ttt_seq_len << "\n";
  out << "ttt.hidden = " << ttt_hidden << "\n";
  out << "ttt.include_valid = " << (ttt_include_valid ? "true" : "false")
      << "\n";
  out << "ttt.fit_epochs = " << ttt_fit_epochs << "\n";
  out << "ttt.fit_lr = " << format_double(ttt_fit_lr) << "\n";
  out << "eval.protocol = " << to_string(protocol) << "\n";
  out << "shift.window = " << shift_window << "\n";
  out << "shift.mode = " << to_string(shift_mode) << "\n";
  out << "seed = " << seed << "\n";
  out << "workers = " << workers << "\n";
  out << "out = " << out_dir << "\n";
  return out.str();
}

AdversarialConfig RunConfig::adversarial() const {
  AdversarialConfig config;
  config.margin = margin;
  config.candidate_count = candidates;
  config.generator_lr = generator_lr;
  config.discriminator_lr = discriminator_lr;
  config.batch_size = batch_size;
  config.max_epochs = max_epochs;
  config.selection = selection;
  config.pretrain_epochs = pretrain_epochs;
  config.patience = patience;
  config.reward_samples = reward_samples;
  config.bern = bern;
  config.filter_known = filter_known;
  config.max_validation_queries = val_queries;
  config.optimizer.kind = optimizer;
  config.protocol = protocol;
  return config;
}

MarginTrainConfig RunConfig::margin_config() const {
  MarginTrainConfig config;
  config.margin = margin;
  config.learning_rate = lr;
  config.batch_size = batch_size;
  config.max_epochs = max_epochs;
  config.patience = patience;
  config.max_validation_queries = val_queries;
  config.optimizer.kind = optimizer;
  config.protocol = protocol;
  return config;
}

TttConfig RunConfig::ttt() const {
  TttConfig config;
  config.learning_rate = ttt_lr;
  config.steps = ttt_steps;
  config.horizon = ttt_horizon;
  config.subset = ttt_subset;
  config.mode = ttt_mode;
  config.include_validation_history = ttt_include_valid;
  return config;
}

}  // namespace tkgr
