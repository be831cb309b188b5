#include "aed/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace aed {

std::uint32_t crc32_ieee(const std::byte* data, std::size_t size) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i)
    crc = table[(crc ^ static_cast<std::uint8_t>(data[i])) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

namespace {

constexpr char kMagic[4] = {'A', 'E', 'D', 'C'};

class Writer {
 public:
  void u8(std::uint8_t v) { push(&v, 1); }
  void u32(std::uint32_t v) { push(&v, 4); }
  void u64(std::uint64_t v) { push(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    push(s.data(), s.size());
  }
  void bytes(const std::vector<std::byte>& b) { push(b.data(), b.size()); }

  std::vector<std::byte> take() { return std::move(buf_); }

 private:
  void push(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::byte> buf_;
};

class Reader {
 public:
  Reader(const std::byte* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(*take(1)); }
  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(4), 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    std::memcpy(&v, take(8), 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    const std::byte* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  std::vector<std::byte> bytes(std::uint64_t n) {
    const std::byte* p = take(n);
    return std::vector<std::byte>(p, p + n);
  }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  const std::byte* take(std::uint64_t n) {
    if (n > size_ - pos_) fail(errc::checkpoint, "truncated checkpoint");
    const std::byte* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  const std::byte* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const RawCheckpoint& ckpt) {
  Writer w;
  w.u32(ckpt.version);
  w.u8(static_cast<std::uint8_t>(ckpt.precision));
  w.str(ckpt.role);
  w.u32(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  const std::size_t scalar = ckpt.precision == Precision::f32 ? 4 : 8;
  for (const auto& e : ckpt.tensors) {
    if (e.payload.size() != e.numel() * scalar)
      fail(errc::checkpoint, "tensor '" + e.name + "' payload does not match dims and precision");
    w.str(e.name);
    w.u32(static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims) w.u64(d);
    w.bytes(e.payload);
  }
  std::vector<std::byte> body = w.take();
  const std::uint32_t crc = crc32_ieee(body.data(), body.size());

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io, "cannot write checkpoint: " + path.string());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  out.write(reinterpret_cast<const char*>(&crc), 4);
  if (!out) fail(errc::io, "failed writing checkpoint: " + path.string());
}

RawCheckpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail(errc::io, "cannot open checkpoint: " + path.string());
  const std::streamsize size = in.tellg();
  in.seekg(0);
  if (size < 12) fail(errc::checkpoint, "truncated checkpoint: " + path.string());
  std::vector<std::byte> file(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(file.data()), size);
  if (!in) fail(errc::io, "failed reading checkpoint: " + path.string());

  if (std::memcmp(file.data(), kMagic, 4) != 0)
    fail(errc::checkpoint, "not an AEDC checkpoint: " + path.string());

  // CRC covers everything between the magic and the trailing checksum
  const std::size_t body_size = file.size() - 8;
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, file.data() + file.size() - 4, 4);
  const std::uint32_t actual_crc = crc32_ieee(file.data() + 4, body_size);
  if (stored_crc != actual_crc)
    fail(errc::checkpoint, "checkpoint CRC mismatch (corrupt file): " + path.string());

  Reader r(file.data() + 4, body_size);
  RawCheckpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != kCheckpointVersion)
    fail(errc::checkpoint, "unsupported checkpoint version " + std::to_string(ckpt.version) +
                               " (this build reads version " +
                               std::to_string(kCheckpointVersion) + ")");
  const std::uint8_t prec = r.u8();
  if (prec != 32 && prec != 64)
    fail(errc::checkpoint, "invalid precision tag " + std::to_string(prec));
  ckpt.precision = static_cast<Precision>(prec);
  ckpt.role = r.str();
  const std::uint32_t meta_count = r.u32();
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string k = r.str();
    std::string v = r.str();
    ckpt.meta.emplace_back(std::move(k), std::move(v));
  }
  const std::uint32_t tensor_count = r.u32();
  const std::size_t scalar = prec == 32 ? 4 : 8;
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    RawCheckpoint::Entry e;
    e.name = r.str();
    const std::uint32_t rank = r.u32();
    for (std::uint32_t d = 0; d < rank; ++d) e.dims.push_back(r.u64());
    const std::uint64_t bytes = e.numel() * scalar;
    if (bytes > r.remaining()) fail(errc::checkpoint, "truncated checkpoint tensor '" + e.name + "'");
    e.payload = r.bytes(bytes);
    ckpt.tensors.push_back(std::move(e));
  }
  if (r.remaining() != 0)
    fail(errc::checkpoint, "checkpoint has trailing bytes after the tensor table");
  return ckpt;
}

}  // namespace aed
