#include "polarfront/dataset.hpp"

#include <cstring>
#include <fstream>
#include <numeric>

#include "polarfront/errors.hpp"
#include "polarfront/rng.hpp"

namespace polarfront {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  f.seekg(0, std::ios::end);
  const auto n = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<unsigned char> buf(static_cast<size_t>(n));
  f.read(reinterpret_cast<char*>(buf.data()), n);
  if (!f) throw FormatError("short read on " + path);
  return buf;
}

uint32_t be32(const std::vector<unsigned char>& b, size_t off, const std::string& field,
              const std::string& path) {
  if (off + 4 > b.size())
    throw FormatError(path + ": truncated before " + field);
  return (uint32_t(b[off]) << 24) | (uint32_t(b[off + 1]) << 16) |
         (uint32_t(b[off + 2]) << 8) | uint32_t(b[off + 3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const std::string& name) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);

  const uint32_t img_magic = be32(img, 0, "image magic", images_path);
  if (img_magic != 2051)
    throw FormatError(images_path + ": image magic is " + std::to_string(img_magic) +
                      ", expected 2051");
  const uint32_t n_img = be32(img, 4, "image count", images_path);
  const uint32_t rows = be32(img, 8, "image rows", images_path);
  const uint32_t cols = be32(img, 12, "image cols", images_path);
  if (rows != 28 || cols != 28)
    throw FormatError(images_path + ": image dims " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", expected 28x28");
  const size_t want = 16 + size_t(n_img) * rows * cols;
  if (img.size() != want)
    throw FormatError(images_path + ": image payload is " + std::to_string(img.size()) +
                      " bytes, expected " + std::to_string(want));

  const uint32_t lab_magic = be32(lab, 0, "label magic", labels_path);
  if (lab_magic != 2049)
    throw FormatError(labels_path + ": label magic is " + std::to_string(lab_magic) +
                      ", expected 2049");
  const uint32_t n_lab = be32(lab, 4, "label count", labels_path);
  if (lab.size() != 8 + size_t(n_lab))
    throw FormatError(labels_path + ": label payload is " + std::to_string(lab.size()) +
                      " bytes, expected " + std::to_string(8 + size_t(n_lab)));
  if (n_img != n_lab)
    throw FormatError("image count " + std::to_string(n_img) + " != label count " +
                      std::to_string(n_lab));

  Dataset ds;
  ds.name = name;
  ds.images = Tensor({static_cast<int>(n_img), 1, 28, 28});
  for (size_t i = 0; i < size_t(n_img) * 784; ++i)
    ds.images.data()[i] = img[16 + i] / 255.0;
  ds.labels.resize(n_lab);
  for (uint32_t i = 0; i < n_lab; ++i) {
    const int v = lab[8 + i];
    if (v > 9)
      throw FormatError(labels_path + ": label " + std::to_string(v) + " at index " +
                        std::to_string(i) + " outside 0..9");
    ds.labels[i] = v;
  }
  return ds;
}

Batch gather(const Dataset& ds, const std::vector<int>& indices) {
  const int n = static_cast<int>(indices.size());
  Batch b;
  b.images = Tensor({n, 1, 28, 28});
  b.labels.resize(indices.size());
  for (int i = 0; i < n; ++i) {
    const int src = indices[static_cast<size_t>(i)];
    if (src < 0 || src >= ds.size())
      throw IndexError("dataset index " + std::to_string(src) + " out of range [0, " +
                       std::to_string(ds.size()) + ")");
    std::memcpy(b.images.data() + static_cast<long>(i) * 784,
                ds.images.data() + static_cast<long>(src) * 784, 784 * sizeof(double));
    b.labels[static_cast<size_t>(i)] = ds.labels[static_cast<size_t>(src)];
  }
  return b;
}

Dataset subset(const Dataset& ds, int n, uint64_t seed) {
  if (n < 1 || n > ds.size())
    throw ArgumentError("subset of " + std::to_string(n) + " from dataset of " +
                        std::to_string(ds.size()));
  std::vector<int> idx(static_cast<size_t>(ds.size()));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, "subset"));
  rng.shuffle(idx);
  idx.resize(static_cast<size_t>(n));
  Batch b = gather(ds, idx);
  return Dataset{std::move(b.images), std::move(b.labels), ds.name};
}

Batcher::Batcher(const Dataset& ds, int batch_size, uint64_t seed)
    : ds_(ds), batch_size_(batch_size), seed_(seed) {
  if (batch_size < 1)
    throw ArgumentError("batch size must be >= 1, got " + std::to_string(batch_size));
  num_batches_ = (ds.size() + batch_size - 1) / batch_size;
}

std::vector<int> Batcher::permutation(int epoch) const {
  std::vector<int> idx(static_cast<size_t>(ds_.size()));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed_, "perm", static_cast<uint64_t>(epoch)));
  rng.shuffle(idx);
  return idx;
}

Batch Batcher::get(int epoch, int index) const {
  if (index < 0 || index >= num_batches_)
    throw IndexError("batch " + std::to_string(index) + " out of range [0, " +
                     std::to_string(num_batches_) + ")");
  const std::vector<int> perm = permutation(epoch);
  const int lo = index * batch_size_;
  const int hi = std::min(ds_.size(), lo + batch_size_);
  return gather(ds_, std::vector<int>(perm.begin() + lo, perm.begin() + hi));
}

}  // namespace polarfront
