#include "polarfront/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "polarfront/errors.hpp"

namespace polarfront {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'C', 'K'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& buf, size_t& off, const char* field) {
  if (off + 4 > buf.size())
    throw FormatError(std::string("checkpoint truncated before ") + field);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= uint32_t(static_cast<unsigned char>(buf[off + i])) << (8 * i);
  off += 4;
  return v;
}

std::string get_bytes(const std::string& buf, size_t& off, size_t n, const char* field) {
  if (off + n > buf.size())
    throw FormatError(std::string("checkpoint truncated inside ") + field);
  std::string out = buf.substr(off, n);
  off += n;
  return out;
}

}  // namespace

void Checkpoint::put_tensor(const std::string& name, Tensor t) {
  tensors_.insert_or_assign(name, std::move(t));
}

void Checkpoint::put_string(const std::string& name, std::string v) {
  strings_.insert_or_assign(name, std::move(v));
}

bool Checkpoint::has_tensor(const std::string& name) const {
  return tensors_.count(name) > 0;
}

bool Checkpoint::has_string(const std::string& name) const {
  return strings_.count(name) > 0;
}

const Tensor& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ArgumentError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

const std::string& Checkpoint::str(const std::string& name) const {
  auto it = strings_.find(name);
  if (it == strings_.end()) throw ArgumentError("checkpoint has no string '" + name + "'");
  return it->second;
}

std::vector<std::string> Checkpoint::tensor_names() const {
  std::vector<std::string> out;
  for (const auto& kv : tensors_) out.push_back(kv.first);
  return out;
}

std::vector<std::string> Checkpoint::string_names() const {
  std::vector<std::string> out;
  for (const auto& kv : strings_) out.push_back(kv.first);
  return out;
}

void Checkpoint::save(const std::string& path) const {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<uint32_t>(tensors_.size() + strings_.size()));
  for (const auto& [name, t] : tensors_) {
    buf.push_back(0);
    put_u32(buf, static_cast<uint32_t>(name.size()));
    buf.append(name);
    put_u32(buf, static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) put_u32(buf, static_cast<uint32_t>(d));
    const size_t bytes = static_cast<size_t>(t.size()) * sizeof(double);
    const size_t at = buf.size();
    buf.resize(at + bytes);
    std::memcpy(buf.data() + at, t.data(), bytes);
  }
  for (const auto& [name, s] : strings_) {
    buf.push_back(1);
    put_u32(buf, static_cast<uint32_t>(name.size()));
    buf.append(name);
    put_u32(buf, static_cast<uint32_t>(s.size()));
    buf.append(s);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw FormatError("short write to " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  size_t off = 0;
  if (get_bytes(buf, off, 4, "magic") != std::string(kMagic, 4))
    throw FormatError(path + ": bad checkpoint magic");
  const uint32_t version = get_u32(buf, off, "version");
  if (version != kVersion)
    throw FormatError(path + ": checkpoint format version " + std::to_string(version) +
                      " is incompatible with this build (reads version " +
                      std::to_string(kVersion) + ")");
  const uint32_t n = get_u32(buf, off, "entry count");

  Checkpoint ck;
  for (uint32_t i = 0; i < n; ++i) {
    const std::string kind = get_bytes(buf, off, 1, "entry kind");
    const uint32_t name_len = get_u32(buf, off, "name length");
    const std::string name = get_bytes(buf, off, name_len, "name");
    if (kind[0] == 0) {
      const uint32_t rank = get_u32(buf, off, "rank");
      std::vector<int> shape;
      long numel = 1;
      for (uint32_t d = 0; d < rank; ++d) {
        const uint32_t dim = get_u32(buf, off, "shape");
        shape.push_back(static_cast<int>(dim));
        numel *= dim;
      }
      const std::string payload =
          get_bytes(buf, off, static_cast<size_t>(numel) * sizeof(double), "tensor data");
      Tensor t(shape);
      std::memcpy(t.data(), payload.data(), payload.size());
      ck.tensors_.emplace(name, std::move(t));
    } else if (kind[0] == 1) {
      const uint32_t len = get_u32(buf, off, "string length");
      ck.strings_.emplace(name, get_bytes(buf, off, len, "string data"));
    } else {
      throw FormatError(path + ": unknown entry kind " +
                        std::to_string(int(kind[0])) + " for '" + name + "'");
    }
  }
  if (off != buf.size())
    throw FormatError(path + ": " + std::to_string(buf.size() - off) +
                      " trailing bytes after last entry");
  return ck;
}

}  // namespace polarfront
