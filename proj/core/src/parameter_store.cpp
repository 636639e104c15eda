#include "tkgr/parameter_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tkgr/errors.hpp"
#include "tkgr/io.hpp"

namespace tkgr {

namespace {

constexpr char kCheckpointMagic[4] = {'T', 'K', 'G', 'M'};
constexpr std::uint16_t kCheckpointVersion = 1;

}  // namespace

Tensor& ParameterStore::add(std::string name,
                            std::vector<std::uint64_t> dims) {
  if (by_name_.count(name)) {
    throw ConfigError("duplicate tensor name '" + name + "'");
  }
  if (dims.empty()) {
    throw ConfigError("tensor '" + name + "' needs at least one dimension");
  }
  std::size_t count = 1;
  for (std::uint64_t d : dims) {
    if (d == 0) {
      throw ConfigError("tensor '" + name + "' has a zero dimension");
    }
    count *= static_cast<std::size_t>(d);
  }
  by_name_.emplace(name, tensors_.size());
  tensors_.push_back(Tensor{std::move(name), std::move(dims),
                            std::vector<float>(count, 0.0f)});
  return tensors_.back();
}

bool ParameterStore::has(std::string_view name) const {
  return by_name_.find(name) != by_name_.end();
}

std::size_t ParameterStore::tensor_index(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) {
    throw ConfigError("no tensor named '" + std::string(name) + "'");
  }
  return it->second;
}

Tensor& ParameterStore::tensor(std::string_view name) {
  return tensors_[tensor_index(name)];
}

const Tensor& ParameterStore::tensor(std::string_view name) const {
  return tensors_[tensor_index(name)];
}

bool ParameterStore::all_finite() const {
  for (const Tensor& t : tensors_) {
    for (float v : t.values) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
  }
  return true;
}

void ParameterStore::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw CheckpointError("cannot open " + file.string() + " for writing");
  }
  io::write_bytes(out, kCheckpointMagic, sizeof(kCheckpointMagic));
  io::write_u16(out, kCheckpointVersion);

  nlohmann::json meta;
  meta["kind"] = meta_.kind;
  meta["dim"] = meta_.dim;
  meta["seed"] = meta_.seed;
  meta["entities"] = meta_.entities;
  meta["relations"] = meta_.relations;
  meta["timestamps"] = meta_.timestamps;
  meta["hyperparameters"] = meta_.hyperparameters;
  io::write_string(out, meta.dump());

  for (const Tensor& t : tensors_) {
    io::write_string(out, t.name);
    io::write_u8(out, static_cast<std::uint8_t>(t.dims.size()));
    for (std::uint64_t d : t.dims) {
      io::write_u64(out, d);
    }
    for (float v : t.values) {
      io::write_f32(out, v);
    }
  }
  if (!out) {
    throw CheckpointError("write failure on " + file.string());
  }
}

ParameterStore ParameterStore::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw CheckpointError("cannot open " + file.string());
  }
  char magic[4];
  try {
    io::read_bytes(in, magic, sizeof(magic));
  } catch (const ContainerError&) {
    throw CheckpointError("truncated checkpoint " + file.string());
  }
  if (std::string_view(magic, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw CheckpointError("bad magic in " + file.string() +
                          " (not a TKGM checkpoint)");
  }

  try {
    const std::uint16_t version = io::read_u16(in);
    if (version != kCheckpointVersion) {
      throw CheckpointError("unsupported TKGM version " +
                            std::to_string(version));
    }

    nlohmann::json meta = nlohmann::json::parse(io::read_string(in));
    ParameterStore store;
    store.meta_.kind = meta.at("kind").get<std::string>();
    store.meta_.dim = meta.at("dim").get<std::uint64_t>();
    store.meta_.seed = meta.at("seed").get<std::uint64_t>();
    store.meta_.entities = meta.at("entities").get<std::uint64_t>();
    store.meta_.relations = meta.at("relations").get<std::uint64_t>();
    store.meta_.timestamps = meta.at("timestamps").get<std::uint64_t>();
    store.meta_.hyperparameters =
        meta.at("hyperparameters").get<std::map<std::string, std::string>>();

    while (!io::at_eof(in)) {
      std::string name = io::read_string(in);
      const std::uint8_t rank = io::read_u8(in);
      if (rank == 0) {
        throw CheckpointError("tensor '" + name + "' has rank 0");
      }
      std::vector<std::uint64_t> dims(rank);
      std::size_t count = 1;
      for (auto& d : dims) {
        d = io::read_u64(in);
        count *= static_cast<std::size_t>(d);
      }
      Tensor& t = store.add(std::move(name), std::move(dims));
      for (std::size_t i = 0; i < count; ++i) {
        t.values[i] = io::read_f32(in);
      }
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint metadata: ") + e.what());
  } catch (const CheckpointError&) {
    throw;
  } catch (const ContainerError& e) {
    throw CheckpointError("truncated checkpoint " + file.string() + ": " +
                          e.what());
  }
}

bool operator==(const ParameterStore& a, const ParameterStore& b) {
  if (!(a.meta_ == b.meta_) || a.tensors_.size() != b.tensors_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
    const Tensor& x = a.tensors_[i];
    const Tensor& y = b.tensors_[i];
    if (x.name != y.name || x.dims != y.dims ||
        x.values.size() != y.values.size()) {
      return false;
    }
    if (!x.values.empty() &&
        std::memcmp(x.values.data(), y.values.data(),
                    x.values.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace tkgr
