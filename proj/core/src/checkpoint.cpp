#include "riskcls/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "riskcls/errors.hpp"

namespace riskcls {

namespace {

constexpr char kMagic[8] = {'R', 'C', 'L', 'S', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 32;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 20)) throw IoError("corrupt checkpoint string length");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw IoError("truncated checkpoint");
  return s;
}

void put_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
  put_string(out, name);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) put<double>(out, m.data()[i]);
}

void get_tensor(std::istream& in, const std::string& expected_name, Matrix& m) {
  const auto name = get_string(in);
  if (name != expected_name) throw IoError("checkpoint tensor '" + name + "' where '" + expected_name + "' expected");
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows != static_cast<std::uint64_t>(m.rows()) || cols != static_cast<std::uint64_t>(m.cols())) {
    throw IoError("checkpoint tensor '" + name + "' has unexpected shape");
  }
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get<double>(in);
}

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, ckpt.classifier ? 1u : 0u);
  const auto& c = ckpt.encoder.config;
  for (auto v : {c.vocab_size, c.dim, c.layers, c.max_len}) put<std::uint64_t>(out, v);
  put<std::uint64_t>(out, ckpt.vocab.size());
  for (const auto& t : ckpt.vocab.tokens()) put_string(out, t);

  auto names = ckpt.encoder.tensor_names();
  auto tensors = ckpt.encoder.tensors();
  std::size_t n = tensors.size() + (ckpt.classifier ? 2 : 0);
  put<std::uint64_t>(out, n);
  for (std::size_t i = 0; i < tensors.size(); ++i) put_tensor(out, names[i], *tensors[i]);
  if (ckpt.classifier) {
    auto cn = ckpt.classifier->tensor_names();
    auto ct = ckpt.classifier->tensors();
    for (std::size_t i = 0; i < ct.size(); ++i) put_tensor(out, cn[i], *ct[i]);
  }
  if (!out) throw IoError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a riskcls checkpoint");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto flags = get<std::uint32_t>(in);

  EncoderConfig c;
  std::uint64_t raw[4];
  for (auto& v : raw) v = get<std::uint64_t>(in);
  for (auto v : raw) {
    if (v > kMaxDim) throw IoError("corrupt checkpoint header");
  }
  c.vocab_size = raw[0];
  c.dim = raw[1];
  c.layers = raw[2];
  c.max_len = raw[3];

  const auto n_tokens = get<std::uint64_t>(in);
  if (n_tokens != c.vocab_size) throw IoError("checkpoint vocabulary size mismatch");
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (std::uint64_t i = 0; i < n_tokens; ++i) tokens.push_back(get_string(in));

  Checkpoint ckpt{Vocabulary::from_tokens(std::move(tokens)), EncoderParams::zeros(c), std::nullopt};
  auto names = ckpt.encoder.tensor_names();
  auto tensors = ckpt.encoder.tensors();
  const bool has_clf = (flags & 1u) != 0;
  const auto n = get<std::uint64_t>(in);
  if (n != tensors.size() + (has_clf ? 2 : 0)) throw IoError("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) get_tensor(in, names[i], *tensors[i]);
  if (has_clf) {
    auto clf = ClassifierParams::zeros(c.dim);
    auto cn = clf.tensor_names();
    auto ct = clf.tensors();
    for (std::size_t i = 0; i < ct.size(); ++i) get_tensor(in, cn[i], *ct[i]);
    ckpt.classifier = std::move(clf);
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(ckpt, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace riskcls
