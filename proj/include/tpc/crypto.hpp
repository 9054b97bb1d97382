#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tpc/party.hpp"
#include "tpc/ring.hpp"

namespace tpc {

using Key128 = std::array<std::uint8_t, 16>;
using Seed128 = std::array<std::uint8_t, 16>;
using Digest = std::array<std::uint8_t, 32>;
using Randomness256 = std::array<std::uint8_t, 32>;

Seed128 seed_from_u64(std::uint64_t s);

/// The four PRF keys: one per pair and one shared by all three parties.
enum class KeyId : std::uint8_t { k01 = 0, k02 = 1, k12 = 2, kAll = 3 };

const char* key_name(KeyId k);

/// Key shared by exactly the two given parties.
KeyId pair_key(Party a, Party b);

/// Whether `p` holds `k` in the standard distribution
/// (P0: k01,k02,kAll; P1: k01,k12,kAll; P2: k02,k12,kAll).
bool holds_key(Party p, KeyId k);

/// Deterministic stream name. Both holders of a key derive the same label for
/// the same protocol point, so their counters advance in lockstep.
class StreamLabel {
 public:
  /// `domain` identifies the protocol point, `index` the wire/gate/instance.
  StreamLabel(std::uint16_t domain, std::uint64_t index);
  /// Free-form label, e.g. "lambda1/wire7".
  static StreamLabel named(std::string_view name);

  std::uint64_t id() const { return id_; }
  friend bool operator==(StreamLabel, StreamLabel) = default;

 private:
  explicit StreamLabel(std::uint64_t id) : id_(id) {}
  std::uint64_t id_;
};

/// AES-128 applied to (label || counter) blocks.
class Prf {
 public:
  explicit Prf(const Key128& key);
  ~Prf();
  Prf(Prf&&) noexcept;
  Prf& operator=(Prf&&) noexcept;
  Prf(const Prf&) = delete;
  Prf& operator=(const Prf&) = delete;

  /// out[i] = low 64 bits of AES_k(label || counter + i).
  void eval_words(std::uint64_t label, std::uint64_t counter, std::span<std::uint64_t> out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One party's view of the shared-key setup: the keys it holds and a
/// per-(key, label) counter that only ever moves forward.
class KeySetup {
 public:
  struct AuditEntry {
    KeyId key;
    std::uint64_t label;
    std::uint64_t counter;
  };

  KeySetup(Party owner, std::array<std::optional<Key128>, 4> keys);

  Party owner() const { return owner_; }
  bool holds(KeyId k) const { return keys_[static_cast<int>(k)].has_value(); }
  const Key128& key(KeyId k) const;

  RingElement sample(KeyId k, StreamLabel label, unsigned bits);
  std::vector<RingElement> sample(KeyId k, StreamLabel label, unsigned bits, std::size_t n);
  std::uint64_t sample_u64(KeyId k, StreamLabel label);
  /// Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t sample_below(KeyId k, StreamLabel label, std::uint64_t bound);
  Randomness256 sample_randomness(KeyId k, StreamLabel label);

  std::uint64_t counter(KeyId k, StreamLabel label) const;

  /// Record every (key, label, counter) consumed; used by tests.
  void enable_audit() { audit_enabled_ = true; }
  const std::vector<AuditEntry>& audit_log() const { return audit_; }

 private:
  void draw(KeyId k, StreamLabel label, std::span<std::uint64_t> out);

  Party owner_;
  std::array<std::optional<Key128>, 4> keys_;
  std::array<std::unique_ptr<Prf>, 4> prfs_;
  std::array<std::unordered_map<std::uint64_t, std::uint64_t>, 4> counters_;
  bool audit_enabled_ = false;
  std::vector<AuditEntry> audit_;
};

/// Trusted-dealer key setup: the three per-party views, deterministic in `seed`.
std::array<KeySetup, 3> setup_keys(const Seed128& seed);

/// Key file: 4-byte magic "TPCK", then k01, k02, k12, kAll (16 bytes each).
/// Slots a party does not hold are written as zeros and ignored on load.
void write_key_file(const std::filesystem::path& path, const KeySetup& view);
KeySetup read_key_file(const std::filesystem::path& path, Party owner);

// ---- hashing and commitments ----

Digest hash_digest(std::span<const std::uint8_t> data);

/// Incremental SHA-256.
class Hasher {
 public:
  Hasher();
  ~Hasher();
  Hasher(Hasher&&) noexcept;
  Hasher& operator=(Hasher&&) noexcept;
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  void update(std::span<const std::uint8_t> data);
  void update(RingElement e);
  void update(std::span<const RingElement> elems);
  Digest finish();
  /// Digest of everything fed so far; leaves the state usable.
  Digest peek() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct Commitment {
  Digest digest{};
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

struct Opening {
  std::vector<std::uint8_t> payload;
  Randomness256 randomness{};
};

/// (H(payload || r), payload || r)
Commitment commit(std::span<const std::uint8_t> payload, const Randomness256& randomness);
bool verify_open(const Commitment& c, const Opening& o);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace tpc
