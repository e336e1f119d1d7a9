#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarfront/tensor.hpp"

namespace polarfront {

struct Dataset {
  Tensor images;            // [N,1,28,28], entries in [0,1]
  std::vector<int> labels;  // class indices 0..9
  std::string name;         // "mnist" or "fashion"
  int size() const { return images.rank() == 4 ? images.dim(0) : 0; }
};

struct Batch {
  Tensor images;  // [B,1,28,28]
  std::vector<int> labels;
};

/// Parse big-endian IDX pairs (image magic 2051, label magic 2049), normalize
/// pixels by 255. Malformed headers, truncation, count mismatches and
/// out-of-range labels all raise FormatError naming the offending field.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const std::string& name);

/// First n entries of a seed-determined permutation. n larger than the
/// dataset raises ArgumentError.
Dataset subset(const Dataset& ds, int n, uint64_t seed);

/// Deterministic shuffled batch access; the epoch permutation is a pure
/// function of (seed, epoch). The final batch may be short, so the union of
/// one epoch's batches is exactly the dataset.
class Batcher {
 public:
  Batcher(const Dataset& ds, int batch_size, uint64_t seed);
  int num_batches() const { return num_batches_; }
  std::vector<int> permutation(int epoch) const;
  Batch get(int epoch, int index) const;

 private:
  const Dataset& ds_;
  int batch_size_;
  uint64_t seed_;
  int num_batches_;
};

Batch gather(const Dataset& ds, const std::vector<int>& indices);

}  // namespace polarfront
