#include "sllb/checkpoint.hpp"

#include <cstdio>
#include <cstring>

#include "sllb/error.hpp"
#include "sllb/util.hpp"

namespace sllb {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'L', 'B'};
constexpr uint16_t kVersion = 1;
constexpr uint8_t kLittleEndian = 1;

class Writer {
 public:
  std::vector<uint8_t> out;

  void u8(uint8_t v) { out.push_back(v); }
  void u16(uint16_t v) {
    for (int i = 0; i < 2; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  }
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  uint16_t u16() {
    need(2);
    uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v = static_cast<uint16_t>(v | (bytes_[pos_++] << (8 * i)));
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string str() {
    uint32_t len = u32();
    need(len);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    pos_ += len;
    return s;
  }
  void raw(uint8_t* dst, size_t len) {
    need(len);
    std::memcpy(dst, bytes_.data() + pos_, len);
    pos_ += len;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw ValidationError("checkpoint: truncated, needed " + std::to_string(n) +
                            " more bytes at offset " + std::to_string(pos_));
    }
  }

  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
};

uint8_t kind_code(SegmentKind k) { return static_cast<uint8_t>(k); }

SegmentKind kind_from_code(uint8_t c) {
  if (c > static_cast<uint8_t>(SegmentKind::BnBeta)) {
    throw ValidationError("checkpoint: unknown segment kind code " + std::to_string(c));
  }
  return static_cast<SegmentKind>(c);
}

void write_vector(Writer& w, const ParamVector& v) {
  const auto& segs = v.layout().segments();
  w.u32(static_cast<uint32_t>(segs.size()));
  for (const auto& s : segs) {
    w.u32(static_cast<uint32_t>(s.layer));
    w.u8(kind_code(s.kind));
    w.u8(static_cast<uint8_t>(s.shape.size()));
    for (int64_t d : s.shape) w.i64(d);
  }
  for (double x : v.values()) w.f64(x);
}

ParamVector read_vector(Reader& r, const LayoutPtr& expected) {
  uint32_t n_segs = r.u32();
  std::vector<SegmentDesc> segs;
  int64_t offset = 0;
  for (uint32_t i = 0; i < n_segs; ++i) {
    SegmentDesc d;
    d.layer = static_cast<int32_t>(r.u32());
    d.kind = kind_from_code(r.u8());
    uint8_t rank = r.u8();
    d.shape.resize(rank);
    for (uint8_t k = 0; k < rank; ++k) d.shape[static_cast<size_t>(k)] = r.i64();
    d.offset = offset;
    offset += d.len();
    segs.push_back(std::move(d));
  }
  auto layout = std::make_shared<const Layout>(std::move(segs));
  if (!(*layout == *expected)) {
    throw ValidationError("checkpoint: stored segment table does not match the architecture");
  }
  std::vector<double> values(static_cast<size_t>(layout->total_len()));
  for (auto& x : values) x = r.f64();
  return ParamVector(expected, std::move(values));
}

}  // namespace

const ParamVector& Checkpoint::params() const {
  if (vectors.size() != 1) {
    throw ValidationError("checkpoint holds " + std::to_string(vectors.size()) +
                          " vectors; expected a single-solution checkpoint");
  }
  return vectors[0];
}

std::vector<uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.arch.validate();
  if (ckpt.vectors.empty()) throw ValidationError("checkpoint: no parameter vectors");
  auto layout = make_layout(ckpt.arch);
  for (const auto& v : ckpt.vectors) {
    if (!(v.layout() == *layout)) {
      throw ValidationError("checkpoint: vector layout does not match architecture");
    }
  }
  size_t expected_vectors = ckpt.order == 0 ? 1 : static_cast<size_t>(ckpt.order) + 1;
  if (ckpt.vectors.size() != expected_vectors) {
    throw ValidationError("checkpoint: order " + std::to_string(ckpt.order) + " requires " +
                          std::to_string(expected_vectors) + " vectors, got " +
                          std::to_string(ckpt.vectors.size()));
  }

  Writer w;
  w.out.insert(w.out.end(), kMagic, kMagic + 4);
  w.u16(kVersion);
  w.u8(kLittleEndian);
  w.u8(ckpt.order == 0 ? 0 : 1);

  w.u32(static_cast<uint32_t>(ckpt.arch.layer_sizes.size()));
  for (int64_t s : ckpt.arch.layer_sizes) w.i64(s);
  // fixed width: one flag per hidden layer, padding short vectors with 0
  const size_t n_hidden =
      ckpt.arch.layer_sizes.size() >= 2 ? ckpt.arch.layer_sizes.size() - 2 : 0;
  for (size_t i = 0; i < n_hidden; ++i) {
    w.u8(i < ckpt.arch.use_batchnorm.size() ? ckpt.arch.use_batchnorm[i] : uint8_t{0});
  }
  w.u8(0);  // activation code: relu

  w.u8(static_cast<uint8_t>(ckpt.order));
  w.u16(static_cast<uint16_t>(ckpt.vectors.size()));
  for (const auto& v : ckpt.vectors) write_vector(w, v);

  if (ckpt.mask) {
    if (ckpt.mask->size() != static_cast<size_t>(layout->total_len())) {
      throw ValidationError("checkpoint: mask length does not match parameter count");
    }
    w.u8(1);
    w.u64(ckpt.mask->size());
    const auto& bits = ckpt.mask->bits();
    for (size_t i = 0; i < bits.size(); i += 8) {
      uint8_t packed = 0;
      for (size_t j = 0; j < 8 && i + j < bits.size(); ++j) {
        packed = static_cast<uint8_t>(packed | (bits[i + j] << j));
      }
      w.u8(packed);
    }
  } else {
    w.u8(0);
  }

  if (!ckpt.bn.mean.empty()) {
    w.u8(1);
    w.u32(static_cast<uint32_t>(ckpt.bn.mean.size()));
    for (size_t l = 0; l < ckpt.bn.mean.size(); ++l) {
      w.u32(static_cast<uint32_t>(ckpt.bn.mean[l].size()));
      for (double x : ckpt.bn.mean[l]) w.f64(x);
      for (double x : ckpt.bn.var[l]) w.f64(x);
    }
  } else {
    w.u8(0);
  }

  w.str(ckpt.command);
  w.u64(ckpt.config_hash);
  w.u64(ckpt.seed);
  w.i64(ckpt.step);
  w.str(ckpt.tag);
  return std::move(w.out);
}

Checkpoint parse_checkpoint(const std::vector<uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.raw(reinterpret_cast<uint8_t*>(magic), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "0x%02x 0x%02x 0x%02x 0x%02x",
                  static_cast<unsigned char>(magic[0]), static_cast<unsigned char>(magic[1]),
                  static_cast<unsigned char>(magic[2]), static_cast<unsigned char>(magic[3]));
    throw ValidationError(std::string("checkpoint: bad magic, expected \"SLLB\", got bytes ") +
                          buf);
  }
  Checkpoint ckpt;
  ckpt.version = r.u16();
  if (ckpt.version != kVersion) {
    throw ValidationError("checkpoint: unsupported version " + std::to_string(ckpt.version));
  }
  uint8_t endian = r.u8();
  if (endian != kLittleEndian) {
    throw ValidationError("checkpoint: unsupported endian flag " + std::to_string(endian));
  }
  uint8_t kind = r.u8();
  if (kind > 1) throw ValidationError("checkpoint: unknown kind " + std::to_string(kind));

  uint32_t n_layers = r.u32();
  ckpt.arch.layer_sizes.resize(n_layers);
  for (auto& s : ckpt.arch.layer_sizes) s = r.i64();
  ckpt.arch.use_batchnorm.resize(n_layers >= 2 ? n_layers - 2 : 0);
  for (auto& b : ckpt.arch.use_batchnorm) b = r.u8();
  uint8_t activation = r.u8();
  if (activation != 0) {
    throw ValidationError("checkpoint: unknown activation code " + std::to_string(activation));
  }
  ckpt.arch.validate();
  auto layout = make_layout(ckpt.arch);

  ckpt.order = r.u8();
  uint16_t n_vectors = r.u16();
  size_t expected_vectors = ckpt.order == 0 ? 1 : static_cast<size_t>(ckpt.order) + 1;
  if (n_vectors != expected_vectors) {
    throw ValidationError("checkpoint: order " + std::to_string(ckpt.order) + " requires " +
                          std::to_string(expected_vectors) + " vectors, got " +
                          std::to_string(n_vectors));
  }
  for (uint16_t i = 0; i < n_vectors; ++i) ckpt.vectors.push_back(read_vector(r, layout));

  if (r.u8()) {
    uint64_t n_bits = r.u64();
    if (n_bits != static_cast<uint64_t>(layout->total_len())) {
      throw ValidationError("checkpoint: mask bit count " + std::to_string(n_bits) +
                            " does not match parameter count " +
                            std::to_string(layout->total_len()));
    }
    std::vector<uint8_t> bits(n_bits);
    for (size_t i = 0; i < n_bits; i += 8) {
      uint8_t packed = r.u8();
      for (size_t j = 0; j < 8 && i + j < n_bits; ++j) bits[i + j] = (packed >> j) & 1;
    }
    ckpt.mask = SparsityMask(layout, std::move(bits));
  }

  if (r.u8()) {
    uint32_t n_bn = r.u32();
    ckpt.bn.mean.resize(n_bn);
    ckpt.bn.var.resize(n_bn);
    for (uint32_t l = 0; l < n_bn; ++l) {
      uint32_t width = r.u32();
      ckpt.bn.mean[l].resize(width);
      ckpt.bn.var[l].resize(width);
      for (auto& x : ckpt.bn.mean[l]) x = r.f64();
      for (auto& x : ckpt.bn.var[l]) x = r.f64();
    }
  }

  ckpt.command = r.str();
  ckpt.config_hash = r.u64();
  ckpt.seed = r.u64();
  ckpt.step = r.i64();
  ckpt.tag = r.str();
  if (!r.done()) throw ValidationError("checkpoint: trailing bytes after provenance record");
  return ckpt;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  auto bytes = serialize_checkpoint(ckpt);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

Checkpoint read_checkpoint(const std::string& path) {
  std::string content = read_file(path);
  try {
    return parse_checkpoint(std::vector<uint8_t>(content.begin(), content.end()));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace sllb
