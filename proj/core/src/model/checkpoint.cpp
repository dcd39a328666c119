#include "sehsn/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "sehsn/error.hpp"
#include "sehsn/hash.hpp"
#include "sehsn/io/envi.hpp"

namespace sehsn::model {
namespace {

constexpr char kMagic[8] = {'S', 'E', 'H', 'S', 'N', 'C', 'K', 'P'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    le(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end) : bytes_(b), end_(end) {}
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw DataError("checkpoint: unexpected end of payload");
  }
  template <typename U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string str() {
    const auto n = le<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == end_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  const std::vector<std::byte> raw = io::read_file_bytes(path);
  std::vector<std::uint8_t> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

}  // namespace

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const Network<T>& net) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.le(kCheckpointVersion);
  w.str(config_to_json(net.config()));
  const auto params = net.parameters();
  w.le(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.str(p.name);
    const nn::Shape& s = p.value->shape();
    w.le(static_cast<std::uint32_t>(s.size()));
    for (std::size_t e : s) w.le(static_cast<std::uint64_t>(e));
    for (T v : p.value->values()) w.f64(static_cast<double>(v));
  }
  Fnv1a64 h;
  h.update(w.bytes());
  w.le(h.digest());
  return std::move(w.bytes());
}

CheckpointContents decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 + 8) throw DataError("checkpoint: file too short (digest error)");
  const std::size_t body = bytes.size() - 8;
  Fnv1a64 h;
  h.update(std::span<const std::uint8_t>(bytes.data(), body));
  std::uint64_t stored = 0;
  for (std::size_t i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
  if (stored != h.digest()) throw DataError("checkpoint: digest mismatch (file damaged or truncated)");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw DataError("checkpoint: bad magic");

  std::vector<std::uint8_t> payload(bytes.begin() + sizeof(kMagic), bytes.begin() + static_cast<long>(body));
  Reader r(payload, payload.size());
  const auto version = r.le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: version " + std::to_string(version) + " not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  CheckpointContents c;
  try {
    c.config = config_from_json(r.str());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: embedded config: ") + e.what());
  }
  const auto count = r.le<std::uint32_t>();
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = r.str();
    const auto rank = r.le<std::uint32_t>();
    nn::Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<std::size_t>(r.le<std::uint64_t>()));
    nn::Tensor<double> tensor(shape);
    r.need(tensor.size() * 8);
    for (auto& v : tensor.values()) v = r.f64();
    c.tensors.emplace_back(std::move(name), std::move(tensor));
  }
  if (!r.done()) throw DataError("checkpoint: trailing bytes after the last tensor");
  return c;
}

template <typename T>
void assign_parameters(Network<T>& net, const CheckpointContents& contents) {
  auto params = net.parameters();
  if (params.size() != contents.tensors.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(contents.tensors.size()) + " tensors, network has " +
                     std::to_string(params.size()));
  }
  // Validate everything first so a mismatch leaves the network untouched.
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, tensor] = contents.tensors[i];
    if (name != params[i].name) {
      throw ShapeError("checkpoint tensor '" + name + "' where the network expects '" + params[i].name + "'");
    }
    if (tensor.shape() != params[i].value->shape()) {
      throw ShapeError("checkpoint tensor '" + name + "' has shape " + nn::shape_string(tensor.shape()) +
                       ", network expects " + nn::shape_string(params[i].value->shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& src = contents.tensors[i].second;
    auto& dst = *params[i].value;
    for (std::size_t e = 0; e < dst.size(); ++e) dst[e] = static_cast<T>(src[e]);
  }
}

template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(net);
  io::write_file_bytes(path, std::as_bytes(std::span<const std::uint8_t>(bytes)));
}

template <typename T>
Network<T> load_checkpoint(const std::filesystem::path& path) {
  const CheckpointContents c = decode_checkpoint(read_bytes(path));
  Network<T> net(c.config);
  assign_parameters(net, c);
  return net;
}

template <typename T>
void load_checkpoint_into(Network<T>& net, const std::filesystem::path& path) {
  assign_parameters(net, decode_checkpoint(read_bytes(path)));
}

#define SEHSN_INSTANTIATE_CKPT(T)                                                          \
  template std::vector<std::uint8_t> encode_checkpoint(const Network<T>&);                 \
  template void save_checkpoint(const Network<T>&, const std::filesystem::path&);          \
  template Network<T> load_checkpoint(const std::filesystem::path&);                       \
  template void load_checkpoint_into(Network<T>&, const std::filesystem::path&);           \
  template void assign_parameters(Network<T>&, const CheckpointContents&);

SEHSN_INSTANTIATE_CKPT(float)
SEHSN_INSTANTIATE_CKPT(double)

}  // namespace sehsn::model
