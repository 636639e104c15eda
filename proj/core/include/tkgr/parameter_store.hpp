#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tkgr {

/// Dense named tensor with a 32-bit float payload. dims[0] is the row count;
/// the remaining dims form the row width.
struct Tensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<float> values;

  std::size_t rows() const noexcept {
    return dims.empty() ? 0 : static_cast<std::size_t>(dims[0]);
  }
  std::size_t row_width() const noexcept {
    std::size_t w = 1;
    for (std::size_t i = 1; i < dims.size(); ++i) {
      w *= static_cast<std::size_t>(dims[i]);
    }
    return dims.empty() ? 0 : w;
  }
  std::span<float> row(std::size_t r) {
    return {values.data() + r * row_width(), row_width()};
  }
  std::span<const float> row(std::size_t r) const {
    return {values.data() + r * row_width(), row_width()};
  }
};

struct StoreMetadata {
  std::string kind;  // model kind tag, e.g. "translate-time"
  std::uint64_t dim = 0;
  std::uint64_t seed = 0;
  std::uint64_t entities = 0;
  std::uint64_t relations = 0;
  std::uint64_t timestamps = 0;
  std::map<std::string, std::string> hyperparameters;

  friend bool operator==(const StoreMetadata&, const StoreMetadata&) = default;
};

/// Collection of named tensors plus run metadata. Serialized as the TKGM
/// container: magic "TKGM", u16 LE version, u32-length-prefixed JSON metadata,
/// then per tensor: u32 name length + name, u8 rank, u64 LE dims, raw f32 LE
/// payload.
class ParameterStore {
 public:
  ParameterStore() = default;
  explicit ParameterStore(StoreMetadata meta) : meta_(std::move(meta)) {}

  /// Adds a zero-filled tensor. Throws ConfigError on duplicate names or a
  /// zero dimension.
  Tensor& add(std::string name, std::vector<std::uint64_t> dims);

  bool has(std::string_view name) const;
  Tensor& tensor(std::string_view name);
  const Tensor& tensor(std::string_view name) const;
  std::size_t tensor_index(std::string_view name) const;

  const std::vector<Tensor>& tensors() const noexcept { return tensors_; }
  std::vector<Tensor>& tensors() noexcept { return tensors_; }

  const StoreMetadata& metadata() const noexcept { return meta_; }
  StoreMetadata& metadata() noexcept { return meta_; }

  bool all_finite() const;

  void save(const std::filesystem::path& file) const;
  static ParameterStore load(const std::filesystem::path& file);

  /// Bitwise payload comparison (plus metadata equality).
  friend bool operator==(const ParameterStore& a, const ParameterStore& b);

 private:
  StoreMetadata meta_;
  std::vector<Tensor> tensors_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

}  // namespace tkgr
