#include "tpc/crypto.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <fstream>

namespace tpc {

namespace {

constexpr std::array<std::uint8_t, 4> kKeyMagic{'T', 'P', 'C', 'K'};
constexpr std::uint16_t kNamedDomain = 0xFFFF;

void put_u64(std::uint8_t* dst, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t* src) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{src[i]} << (8 * i);
  return v;
}

}  // namespace

Seed128 seed_from_u64(std::uint64_t s) {
  Seed128 seed{};
  put_u64(seed.data(), s);
  put_u64(seed.data() + 8, s ^ 0x9e3779b97f4a7c15ULL);
  return seed;
}

const char* key_name(KeyId k) {
  switch (k) {
    case KeyId::k01: return "k01";
    case KeyId::k02: return "k02";
    case KeyId::k12: return "k12";
    case KeyId::kAll: return "kP";
  }
  return "?";
}

KeyId pair_key(Party a, Party b) {
  if (a == b) throw ContractViolation("pair_key: parties must differ");
  const int mask = (1 << index_of(a)) | (1 << index_of(b));
  switch (mask) {
    case 0b011: return KeyId::k01;
    case 0b101: return KeyId::k02;
    default: return KeyId::k12;
  }
}

bool holds_key(Party p, KeyId k) {
  switch (k) {
    case KeyId::k01: return p != Party::P2;
    case KeyId::k02: return p != Party::P1;
    case KeyId::k12: return p != Party::P0;
    case KeyId::kAll: return true;
  }
  return false;
}

// ---- StreamLabel ----

StreamLabel::StreamLabel(std::uint16_t domain, std::uint64_t index) {
  if (domain == kNamedDomain) throw ContractViolation("stream domain 0xFFFF is reserved for named labels");
  if (index >> 48) throw ContractViolation("stream index exceeds 48 bits");
  id_ = (std::uint64_t{domain} << 48) | index;
}

StreamLabel StreamLabel::named(std::string_view name) {
  const auto d = hash_digest({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()});
  return StreamLabel((std::uint64_t{kNamedDomain} << 48) | (get_u64(d.data()) & width_mask(48)));
}

// ---- Prf ----

struct Prf::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Prf::Prf(const Key128& key) : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  if (!impl_->ctx || EVP_EncryptInit_ex(impl_->ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1)
    throw std::runtime_error("AES key schedule failed");
  EVP_CIPHER_CTX_set_padding(impl_->ctx, 0);
}

Prf::~Prf() = default;
Prf::Prf(Prf&&) noexcept = default;
Prf& Prf::operator=(Prf&&) noexcept = default;

void Prf::eval_words(std::uint64_t label, std::uint64_t counter, std::span<std::uint64_t> out) const {
  // One AES block per word; the upper half of each block is discarded.
  const std::size_t nblocks = out.size();
  std::vector<std::uint8_t> in(nblocks * 16), enc(nblocks * 16);
  for (std::size_t b = 0; b < nblocks; ++b) {
    put_u64(&in[b * 16], label);
    put_u64(&in[b * 16 + 8], counter + b);
  }
  int len = 0;
  if (EVP_EncryptUpdate(impl_->ctx, enc.data(), &len, in.data(), static_cast<int>(in.size())) != 1 ||
      static_cast<std::size_t>(len) != enc.size())
    throw std::runtime_error("AES evaluation failed");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_u64(&enc[i * 16]);
}

// ---- KeySetup ----

KeySetup::KeySetup(Party owner, std::array<std::optional<Key128>, 4> keys) : owner_(owner), keys_(keys) {
  for (int k = 0; k < 4; ++k) {
    if (keys_[k]) prfs_[k] = std::make_unique<Prf>(*keys_[k]);
  }
}

const Key128& KeySetup::key(KeyId k) const {
  if (!holds(k)) throw ContractViolation(party_name(owner_) + " does not hold key " + key_name(k));
  return *keys_[static_cast<int>(k)];
}

void KeySetup::draw(KeyId k, StreamLabel label, std::span<std::uint64_t> out) {
  if (!holds(k)) throw ContractViolation(party_name(owner_) + " does not hold key " + key_name(k));
  const int ki = static_cast<int>(k);
  auto& ctr = counters_[ki][label.id()];
  prfs_[ki]->eval_words(label.id(), ctr, out);
  if (audit_enabled_) {
    for (std::size_t i = 0; i < out.size(); ++i) audit_.push_back({k, label.id(), ctr + i});
  }
  ctr += out.size();
}

RingElement KeySetup::sample(KeyId k, StreamLabel label, unsigned bits) {
  std::uint64_t w = 0;
  draw(k, label, {&w, 1});
  return {w, bits};
}

std::vector<RingElement> KeySetup::sample(KeyId k, StreamLabel label, unsigned bits, std::size_t n) {
  std::vector<std::uint64_t> w(n);
  draw(k, label, w);
  std::vector<RingElement> out;
  out.reserve(n);
  for (auto v : w) out.emplace_back(v, bits);
  return out;
}

std::uint64_t KeySetup::sample_u64(KeyId k, StreamLabel label) {
  std::uint64_t w = 0;
  draw(k, label, {&w, 1});
  return w;
}

std::uint64_t KeySetup::sample_below(KeyId k, StreamLabel label, std::uint64_t bound) {
  if (bound == 0) throw ContractViolation("sample_below: empty range");
  // Largest multiple of bound that fits; reject above it.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
  for (;;) {
    const std::uint64_t w = sample_u64(k, label);
    if (w <= limit) return w % bound;
  }
}

Randomness256 KeySetup::sample_randomness(KeyId k, StreamLabel label) {
  std::array<std::uint64_t, 4> w{};
  draw(k, label, w);
  Randomness256 r{};
  for (int i = 0; i < 4; ++i) put_u64(r.data() + 8 * i, w[i]);
  return r;
}

std::uint64_t KeySetup::counter(KeyId k, StreamLabel label) const {
  const auto& m = counters_[static_cast<int>(k)];
  auto it = m.find(label.id());
  return it == m.end() ? 0 : it->second;
}

std::array<KeySetup, 3> setup_keys(const Seed128& seed) {
  std::array<Key128, 4> keys{};
  for (int k = 0; k < 4; ++k) {
    std::vector<std::uint8_t> buf{'t', 'p', 'c', '-', 'k', 'e', 'y', static_cast<std::uint8_t>(k)};
    buf.insert(buf.end(), seed.begin(), seed.end());
    const Digest d = hash_digest(buf);
    std::memcpy(keys[k].data(), d.data(), 16);
  }
  auto view = [&](Party p) {
    std::array<std::optional<Key128>, 4> v;
    for (int k = 0; k < 4; ++k) {
      if (holds_key(p, static_cast<KeyId>(k))) v[k] = keys[k];
    }
    return KeySetup(p, v);
  };
  return {view(Party::P0), view(Party::P1), view(Party::P2)};
}

void write_key_file(const std::filesystem::path& path, const KeySetup& view) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open key file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(kKeyMagic.data()), kKeyMagic.size());
  for (int k = 0; k < 4; ++k) {
    Key128 slot{};
    if (view.holds(static_cast<KeyId>(k))) slot = view.key(static_cast<KeyId>(k));
    out.write(reinterpret_cast<const char*>(slot.data()), slot.size());
  }
}

KeySetup read_key_file(const std::filesystem::path& path, Party owner) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open key file: " + path.string());
  std::array<std::uint8_t, 4> magic{};
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  if (!in || magic != kKeyMagic) throw ParseError(1, "bad key file magic");
  std::array<std::optional<Key128>, 4> keys;
  for (int k = 0; k < 4; ++k) {
    Key128 slot{};
    in.read(reinterpret_cast<char*>(slot.data()), slot.size());
    if (!in) throw ParseError(1, "truncated key file");
    if (holds_key(owner, static_cast<KeyId>(k))) keys[k] = slot;
  }
  return KeySetup(owner, keys);
}

// ---- hashing ----

struct Hasher::Impl {
  EVP_MD_CTX* ctx = nullptr;
  ~Impl() { EVP_MD_CTX_free(ctx); }
};

Hasher::Hasher() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 init failed");
}

Hasher::~Hasher() = default;
Hasher::Hasher(Hasher&&) noexcept = default;
Hasher& Hasher::operator=(Hasher&&) noexcept = default;

void Hasher::update(std::span<const std::uint8_t> data) {
  if (!data.empty()) EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
}

void Hasher::update(RingElement e) {
  std::uint8_t buf[8];
  put_u64(buf, e.value());
  update(std::span<const std::uint8_t>(buf, element_bytes(e.bits())));
}

void Hasher::update(std::span<const RingElement> elems) {
  std::vector<std::uint8_t> buf;
  buf.reserve(elems.size() * 8);
  std::uint8_t w[8];
  for (const auto& e : elems) {
    put_u64(w, e.value());
    buf.insert(buf.end(), w, w + element_bytes(e.bits()));
  }
  update(buf);
}

Digest Hasher::finish() {
  Digest d{};
  unsigned len = 0;
  EVP_DigestFinal_ex(impl_->ctx, d.data(), &len);
  EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr);
  return d;
}

Digest Hasher::peek() const {
  EVP_MD_CTX* copy = EVP_MD_CTX_new();
  EVP_MD_CTX_copy_ex(copy, impl_->ctx);
  Digest d{};
  unsigned len = 0;
  EVP_DigestFinal_ex(copy, d.data(), &len);
  EVP_MD_CTX_free(copy);
  return d;
}

Digest hash_digest(std::span<const std::uint8_t> data) {
  Hasher h;
  h.update(data);
  return h.finish();
}

Commitment commit(std::span<const std::uint8_t> payload, const Randomness256& randomness) {
  Hasher h;
  h.update(payload);
  h.update(randomness);
  return {h.finish()};
}

bool verify_open(const Commitment& c, const Opening& o) { return commit(o.payload, o.randomness) == c; }

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

}  // namespace tpc
