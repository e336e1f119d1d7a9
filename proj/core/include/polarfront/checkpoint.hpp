#pragma once

#include <map>
#include <string>
#include <vector>

#include "polarfront/tensor.hpp"

namespace polarfront {

/// Self-describing binary container: magic, format version, then a sequence
/// of named entries (f64 tensors with shapes, or strings for metadata).
/// Tensor payloads are little-endian f64 and round-trip bit-exactly.
class Checkpoint {
 public:
  static constexpr uint32_t kVersion = 1;

  void put_tensor(const std::string& name, Tensor t);
  void put_string(const std::string& name, std::string v);

  bool has_tensor(const std::string& name) const;
  bool has_string(const std::string& name) const;
  const Tensor& tensor(const std::string& name) const;
  const std::string& str(const std::string& name) const;

  std::vector<std::string> tensor_names() const;
  std::vector<std::string> string_names() const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::map<std::string, Tensor> tensors_;
  std::map<std::string, std::string> strings_;
};

}  // namespace polarfront
