#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpc/party.hpp"
#include "tpc/ring.hpp"

namespace tpc {

enum class GateOp : std::uint8_t { Add, Mul };

struct Gate {
  GateOp op = GateOp::Add;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t out = 0;
  friend bool operator==(const Gate&, const Gate&) = default;
};

struct CircuitInput {
  std::uint32_t wire = 0;
  Party owner = Party::P0;
  friend bool operator==(const CircuitInput&, const CircuitInput&) = default;
};

/// Topologically ordered DAG of ADD/MUL gates over Z_{2^bits}. At bits=1 ADD is
/// XOR and MUL is AND.
class Circuit {
 public:
  /// Validates the gate order (every operand defined before use, every wire
  /// written once). `const_one`, if set, must be one of the inputs and is owned by P1;
  /// it is fed the value 1.
  Circuit(unsigned bits, std::uint32_t num_wires, std::vector<CircuitInput> inputs, std::vector<Gate> gates,
          std::vector<std::uint32_t> outputs, std::optional<std::uint32_t> const_one = std::nullopt);

  unsigned bits() const { return bits_; }
  std::uint32_t num_wires() const { return num_wires_; }
  const std::vector<CircuitInput>& inputs() const { return inputs_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<std::uint32_t>& outputs() const { return outputs_; }
  std::optional<std::uint32_t> const_one() const { return const_one_; }

  std::size_t num_inputs() const { return inputs_.size(); }    // I
  std::size_t num_outputs() const { return outputs_.size(); }  // O
  std::size_t num_add() const { return num_add_; }             // A
  std::size_t num_mul() const { return num_mul_; }             // M
  unsigned depth() const { return depth_; }                    // D

  /// MUL-depth of every wire.
  const std::vector<unsigned>& wire_levels() const { return level_; }
  /// Gate indices per level: MUL gates at level L feed on wires of level < L;
  /// ADD gates at level L follow them in gate order.
  const std::vector<std::vector<std::size_t>>& mul_by_level() const { return mul_by_level_; }
  const std::vector<std::vector<std::size_t>>& add_by_level() const { return add_by_level_; }

  /// Number of inputs the caller supplies (excludes the constant-one wire).
  std::size_t num_user_inputs() const { return inputs_.size() - (const_one_ ? 1 : 0); }
  /// Expand caller values (in input order, constant skipped) to one value per input.
  std::vector<RingElement> with_constants(std::span<const RingElement> user_values) const;
  /// Values of the inputs `owner` holds, in input order.
  std::vector<RingElement> inputs_of(Party owner, std::span<const RingElement> all_values) const;

 private:
  unsigned bits_;
  std::uint32_t num_wires_;
  std::vector<CircuitInput> inputs_;
  std::vector<Gate> gates_;
  std::vector<std::uint32_t> outputs_;
  std::optional<std::uint32_t> const_one_;
  std::size_t num_add_ = 0, num_mul_ = 0;
  unsigned depth_ = 0;
  std::vector<unsigned> level_;
  std::vector<std::vector<std::size_t>> mul_by_level_, add_by_level_;
};

/// Gate-by-gate evaluation; `inputs` has one value per circuit input.
std::vector<RingElement> eval_plain(const Circuit& c, std::span<const RingElement> inputs);
/// Memoized recursive evaluation from the outputs back; second oracle.
std::vector<RingElement> eval_recursive(const Circuit& c, std::span<const RingElement> inputs);
/// Every wire's value (eval_plain's full trace).
std::vector<RingElement> eval_wires(const Circuit& c, std::span<const RingElement> inputs);

/// Bristol Fashion text. XOR->ADD, AND->MUL, MAND->MULs at bits=1; INV becomes XOR
/// with a constant-one wire appended after the declared wires; EQW aliases; EQ
/// assigns a constant. Input group g is owned by owners[g] (default: P0, P1, P2, P0...).
Circuit parse_bristol(std::string_view text, std::span<const Party> owners = {});
/// Inverse of parse_bristol for circuits whose inputs are the first wires and
/// outputs the last; XOR with the constant wire is written back as INV.
std::string write_bristol(const Circuit& c, std::span<const std::size_t> input_group_sizes,
                          std::span<const std::size_t> output_group_sizes);

/// Native arithmetic format:
///   I O A M l
///   INPUT <wire> <owner>      (I lines)
///   ADD|MUL <left> <right> <out>   (A+M lines)
///   OUTPUT <wire>             (O lines)
Circuit parse_native(std::string_view text);
std::string write_native(const Circuit& c);

/// Load by extension: ".txt"/".bristol" as Bristol Fashion, anything else native.
Circuit load_circuit(const std::filesystem::path& path);

struct RandomCircuitParams {
  unsigned bits = 32;
  std::size_t max_gates = 200;
  unsigned max_depth = 8;
};

/// Seeded random arithmetic circuit. Every party owns at least one input and
/// the circuit has at least one MUL gate.
Circuit random_circuit(std::uint64_t seed, const RandomCircuitParams& params = {});

/// AES-128 encryption as Bristol Fashion text: input 0 = key (128 bits), input 1 =
/// plaintext (128 bits), output = ciphertext. Wire 8*i+j carries bit j (LSB first)
/// of byte i. S-boxes use inversion as x^254 with four GF(2^8) multiplications.
std::string aes128_bristol();
Circuit aes128_circuit(std::span<const Party> owners = {});

/// Bytes <-> bit vectors in the circuit's wire order.
std::vector<RingElement> bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(std::span<const RingElement> bits);

}  // namespace tpc
