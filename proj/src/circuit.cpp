#include "tpc/circuit.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

namespace tpc {

Circuit::Circuit(unsigned bits, std::uint32_t num_wires, std::vector<CircuitInput> inputs, std::vector<Gate> gates,
                 std::vector<std::uint32_t> outputs, std::optional<std::uint32_t> const_one)
    : bits_(bits),
      num_wires_(num_wires),
      inputs_(std::move(inputs)),
      gates_(std::move(gates)),
      outputs_(std::move(outputs)),
      const_one_(const_one) {
  if (!supported_width(bits_)) throw ContractViolation("circuit: unsupported width " + std::to_string(bits_));
  std::vector<char> defined(num_wires_, 0);
  level_.assign(num_wires_, 0);
  for (const auto& in : inputs_) {
    if (in.wire >= num_wires_) throw ContractViolation("circuit: input wire out of range");
    if (defined[in.wire]) throw ContractViolation("circuit: input wire listed twice");
    defined[in.wire] = 1;
  }
  if (const_one_) {
    auto it = std::find_if(inputs_.begin(), inputs_.end(), [&](const CircuitInput& i) { return i.wire == *const_one_; });
    if (it == inputs_.end() || it->owner != Party::P1)
      throw ContractViolation("circuit: constant-one wire must be a P1-owned input");
  }
  for (const auto& g : gates_) {
    if (g.left >= num_wires_ || g.right >= num_wires_ || g.out >= num_wires_)
      throw ContractViolation("circuit: gate wire out of range");
    if (!defined[g.left] || !defined[g.right]) throw ContractViolation("circuit: gate reads an undefined wire");
    if (defined[g.out]) throw ContractViolation("circuit: wire " + std::to_string(g.out) + " written twice");
    defined[g.out] = 1;
    const unsigned lv = std::max(level_[g.left], level_[g.right]);
    if (g.op == GateOp::Mul) {
      level_[g.out] = lv + 1;
      ++num_mul_;
    } else {
      level_[g.out] = lv;
      ++num_add_;
    }
    depth_ = std::max(depth_, level_[g.out]);
  }
  for (auto w : outputs_) {
    if (w >= num_wires_ || !defined[w]) throw ContractViolation("circuit: output wire undefined");
  }
  mul_by_level_.assign(depth_ + 1, {});
  add_by_level_.assign(depth_ + 1, {});
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    const auto& g = gates_[i];
    (g.op == GateOp::Mul ? mul_by_level_ : add_by_level_)[level_[g.out]].push_back(i);
  }
}

std::vector<RingElement> Circuit::with_constants(std::span<const RingElement> user_values) const {
  if (user_values.size() != num_user_inputs())
    throw ContractViolation("circuit expects " + std::to_string(num_user_inputs()) + " inputs, got " +
                            std::to_string(user_values.size()));
  std::vector<RingElement> out;
  out.reserve(inputs_.size());
  std::size_t k = 0;
  for (const auto& in : inputs_) {
    if (const_one_ && in.wire == *const_one_) out.push_back(RingElement::one(bits_));
    else out.push_back(user_values[k++]);
  }
  return out;
}

std::vector<RingElement> Circuit::inputs_of(Party owner, std::span<const RingElement> all_values) const {
  if (all_values.size() != inputs_.size()) throw ContractViolation("inputs_of: one value per input expected");
  std::vector<RingElement> out;
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    if (inputs_[i].owner == owner) out.push_back(all_values[i]);
  }
  return out;
}

std::vector<RingElement> eval_wires(const Circuit& c, std::span<const RingElement> inputs) {
  if (inputs.size() != c.num_inputs())
    throw ContractViolation("eval: expected " + std::to_string(c.num_inputs()) + " inputs, got " +
                            std::to_string(inputs.size()));
  std::vector<RingElement> w(c.num_wires(), RingElement::zero(c.bits()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].bits() != c.bits()) throw ContractViolation("eval: input width mismatch");
    w[c.inputs()[i].wire] = inputs[i];
  }
  for (const auto& g : c.gates()) w[g.out] = g.op == GateOp::Add ? w[g.left] + w[g.right] : w[g.left] * w[g.right];
  return w;
}

std::vector<RingElement> eval_plain(const Circuit& c, std::span<const RingElement> inputs) {
  const auto w = eval_wires(c, inputs);
  std::vector<RingElement> out;
  out.reserve(c.num_outputs());
  for (auto o : c.outputs()) out.push_back(w[o]);
  return out;
}

std::vector<RingElement> eval_recursive(const Circuit& c, std::span<const RingElement> inputs) {
  if (inputs.size() != c.num_inputs()) throw ContractViolation("eval: arity mismatch");
  std::unordered_map<std::uint32_t, const Gate*> producer;
  for (const auto& g : c.gates()) producer[g.out] = &g;
  std::unordered_map<std::uint32_t, RingElement> memo;
  for (std::size_t i = 0; i < inputs.size(); ++i) memo[c.inputs()[i].wire] = inputs[i];
  // Explicit stack: deep circuits would overflow the call stack.
  std::vector<RingElement> out;
  for (auto o : c.outputs()) {
    std::vector<std::uint32_t> stack{o};
    while (!stack.empty()) {
      const auto w = stack.back();
      if (memo.count(w)) {
        stack.pop_back();
        continue;
      }
      const Gate* g = producer.at(w);
      const bool l = memo.count(g->left), r = memo.count(g->right);
      if (l && r) {
        const auto a = memo.at(g->left), b = memo.at(g->right);
        memo[w] = g->op == GateOp::Add ? a + b : a * b;
        stack.pop_back();
      } else {
        if (!l) stack.push_back(g->left);
        if (!r) stack.push_back(g->right);
      }
    }
    out.push_back(memo.at(o));
  }
  return out;
}

// ---- Bristol Fashion ----

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::istringstream ws(raw);
    Line l{n, {}};
    std::string t;
    while (ws >> t) l.tokens.push_back(t);
    if (!l.tokens.empty()) lines.push_back(std::move(l));
  }
  return lines;
}

std::uint64_t to_u64(const std::string& s, std::size_t line) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ParseError(line, "expected a number, got '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ParseError(line, "number out of range: " + s);
  }
}

}  // namespace

Circuit parse_bristol(std::string_view text, std::span<const Party> owners) {
  const auto lines = tokenize(text);
  if (lines.size() < 3) throw ParseError(lines.empty() ? 1 : lines.back().number, "missing Bristol header");
  const auto& h0 = lines[0];
  if (h0.tokens.size() != 2) throw ParseError(h0.number, "header must be '<gates> <wires>'");
  const std::uint64_t ngates = to_u64(h0.tokens[0], h0.number);
  const std::uint64_t nwires = to_u64(h0.tokens[1], h0.number);
  if (nwires >= (1ULL << 31)) throw ParseError(h0.number, "too many wires");

  auto read_groups = [&](const Line& l) {
    const std::uint64_t n = to_u64(l.tokens.at(0), l.number);
    if (l.tokens.size() != n + 1) throw ParseError(l.number, "group count does not match sizes");
    std::vector<std::size_t> sizes;
    for (std::size_t i = 1; i <= n; ++i) sizes.push_back(to_u64(l.tokens[i], l.number));
    return sizes;
  };
  const auto in_groups = read_groups(lines[1]);
  const auto out_groups = read_groups(lines[2]);
  std::size_t total_in = 0, total_out = 0;
  for (auto s : in_groups) total_in += s;
  for (auto s : out_groups) total_out += s;
  if (total_in + total_out > nwires) throw ParseError(lines[2].number, "more input/output wires than wires");

  const auto one_wire = static_cast<std::uint32_t>(nwires);
  bool uses_one = false;
  std::vector<std::uint32_t> alias(nwires);
  for (std::uint32_t i = 0; i < nwires; ++i) alias[i] = i;
  std::vector<char> defined(nwires + 1, 0);
  std::vector<CircuitInput> inputs;
  {
    std::uint32_t w = 0;
    for (std::size_t g = 0; g < in_groups.size(); ++g) {
      const Party owner = g < owners.size() ? owners[g] : party_from_index(static_cast<int>(g % 3));
      for (std::size_t k = 0; k < in_groups[g]; ++k, ++w) {
        inputs.push_back({w, owner});
        defined[w] = 1;
      }
    }
  }
  std::vector<Gate> gates;
  gates.reserve(ngates);
  auto operand = [&](const std::string& tok, std::size_t line) {
    const auto w = to_u64(tok, line);
    if (w >= nwires) throw ParseError(line, "wire " + tok + " out of range");
    const auto r = alias[w];
    if (!defined[r]) throw ParseError(line, "dangling wire " + tok);
    return r;
  };
  auto target = [&](const std::string& tok, std::size_t line) {
    const auto w = to_u64(tok, line);
    if (w >= nwires) throw ParseError(line, "wire " + tok + " out of range");
    if (defined[w]) throw ParseError(line, "wire " + tok + " assigned twice");
    defined[w] = 1;
    return static_cast<std::uint32_t>(w);
  };
  std::size_t gate_lines = 0;
  for (std::size_t li = 3; li < lines.size(); ++li) {
    const auto& l = lines[li];
    const auto& t = l.tokens;
    if (t.size() < 4) throw ParseError(l.number, "malformed gate line");
    const std::uint64_t nin = to_u64(t[0], l.number), nout = to_u64(t[1], l.number);
    if (t.size() != nin + nout + 3) throw ParseError(l.number, "gate arity does not match its wire list");
    const std::string& op = t.back();
    ++gate_lines;
    if ((op == "XOR" || op == "AND") && nin == 2 && nout == 1) {
      const auto a = operand(t[2], l.number), b = operand(t[3], l.number);
      gates.push_back({op == "XOR" ? GateOp::Add : GateOp::Mul, a, b, target(t[4], l.number)});
    } else if (op == "INV" && nin == 1 && nout == 1) {
      const auto a = operand(t[2], l.number);
      uses_one = true;
      defined[one_wire] = 1;
      gates.push_back({GateOp::Add, a, one_wire, target(t[3], l.number)});
    } else if (op == "EQW" && nin == 1 && nout == 1) {
      const auto a = operand(t[2], l.number);
      const auto out = target(t[3], l.number);
      alias[out] = a;
    } else if (op == "EQ" && nin == 1 && nout == 1) {
      const auto v = to_u64(t[2], l.number);
      if (v > 1) throw ParseError(l.number, "EQ constant must be 0 or 1");
      uses_one = true;
      defined[one_wire] = 1;
      const auto out = target(t[3], l.number);
      if (v == 1) alias[out] = one_wire;
      else gates.push_back({GateOp::Add, one_wire, one_wire, out});
    } else if (op == "MAND" && nout > 0 && nin == 2 * nout) {
      for (std::uint64_t k = 0; k < nout; ++k) {
        const auto a = operand(t[2 + k], l.number), b = operand(t[2 + nout + k], l.number);
        gates.push_back({GateOp::Mul, a, b, target(t[2 + nin + k], l.number)});
      }
    } else {
      throw ParseError(l.number, "unsupported gate '" + op + "'");
    }
  }
  if (gate_lines != ngates)
    throw ParseError(lines.back().number, "header declares " + std::to_string(ngates) + " gates, found " +
                                              std::to_string(gate_lines));
  std::vector<std::uint32_t> outputs;
  for (std::uint64_t w = nwires - total_out; w < nwires; ++w) {
    const auto r = alias[w];
    if (!defined[r]) throw ParseError(lines.back().number, "output wire " + std::to_string(w) + " never assigned");
    outputs.push_back(r);
  }
  std::optional<std::uint32_t> one;
  std::uint32_t num_wires = static_cast<std::uint32_t>(nwires);
  if (uses_one) {
    inputs.push_back({one_wire, Party::P1});
    one = one_wire;
    num_wires += 1;
  }
  return Circuit(1, num_wires, std::move(inputs), std::move(gates), std::move(outputs), one);
}

std::string write_bristol(const Circuit& c, std::span<const std::size_t> input_group_sizes,
                          std::span<const std::size_t> output_group_sizes) {
  if (c.bits() != 1) throw ContractViolation("write_bristol: boolean circuits only");
  const std::uint32_t declared = c.num_wires() - (c.const_one() ? 1 : 0);
  if (c.const_one() && *c.const_one() != declared)
    throw ContractViolation("write_bristol: constant wire must be the last wire");
  std::size_t total_in = 0, total_out = 0;
  for (auto s : input_group_sizes) total_in += s;
  for (auto s : output_group_sizes) total_out += s;
  if (total_in != c.num_user_inputs() || total_out != c.num_outputs())
    throw ContractViolation("write_bristol: group sizes do not match the circuit");
  for (std::size_t i = 0; i < total_in; ++i) {
    if (c.inputs()[i].wire != i) throw ContractViolation("write_bristol: inputs must be the first wires");
  }
  for (std::size_t i = 0; i < total_out; ++i) {
    if (c.outputs()[i] != declared - total_out + i) throw ContractViolation("write_bristol: outputs must be the last wires");
  }
  std::ostringstream o;
  o << c.gates().size() << ' ' << declared << '\n';
  o << input_group_sizes.size();
  for (auto s : input_group_sizes) o << ' ' << s;
  o << '\n' << output_group_sizes.size();
  for (auto s : output_group_sizes) o << ' ' << s;
  o << "\n\n";
  const auto one = c.const_one();
  for (const auto& g : c.gates()) {
    if (g.op == GateOp::Mul) {
      o << "2 1 " << g.left << ' ' << g.right << ' ' << g.out << " AND\n";
    } else if (one && g.left == *one && g.right == *one) {
      o << "1 1 0 " << g.out << " EQ\n";
    } else if (one && (g.right == *one || g.left == *one)) {
      o << "1 1 " << (g.right == *one ? g.left : g.right) << ' ' << g.out << " INV\n";
    } else {
      o << "2 1 " << g.left << ' ' << g.right << ' ' << g.out << " XOR\n";
    }
  }
  return o.str();
}

// ---- native format ----

Circuit parse_native(std::string_view text) {
  const auto lines = tokenize(text);
  if (lines.empty()) throw ParseError(1, "empty circuit file");
  const auto& h = lines[0];
  if (h.tokens.size() != 5) throw ParseError(h.number, "header must be 'I O A M l'");
  const auto I = to_u64(h.tokens[0], h.number), O = to_u64(h.tokens[1], h.number);
  const auto A = to_u64(h.tokens[2], h.number), M = to_u64(h.tokens[3], h.number);
  const auto bits = to_u64(h.tokens[4], h.number);
  if (!supported_width(static_cast<unsigned>(bits))) throw ParseError(h.number, "unsupported width");
  if (lines.size() != 1 + I + A + M + O)
    throw ParseError(lines.back().number, "line count does not match the header counts");
  std::vector<CircuitInput> inputs;
  std::vector<Gate> gates;
  std::vector<std::uint32_t> outputs;
  std::uint64_t max_wire = 0;
  std::map<std::uint64_t, bool> defined;
  auto wire = [&](const std::string& tok, std::size_t line) {
    const auto w = to_u64(tok, line);
    if (w >= (1ULL << 31)) throw ParseError(line, "wire id too large");
    max_wire = std::max(max_wire, w);
    return static_cast<std::uint32_t>(w);
  };
  std::size_t adds = 0, muls = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const auto& t = l.tokens;
    if (i <= I) {
      if (t.size() != 3 || t[0] != "INPUT") throw ParseError(l.number, "expected 'INPUT <wire> <owner>'");
      const auto w = wire(t[1], l.number);
      const auto owner = to_u64(t[2], l.number);
      if (owner > 2) throw ParseError(l.number, "owner must be 0, 1 or 2");
      if (defined[w]) throw ParseError(l.number, "wire assigned twice");
      defined[w] = true;
      inputs.push_back({w, party_from_index(static_cast<int>(owner))});
    } else if (i <= I + A + M) {
      if (t.size() != 4 || (t[0] != "ADD" && t[0] != "MUL")) throw ParseError(l.number, "expected 'ADD|MUL l r out'");
      const auto a = wire(t[1], l.number), b = wire(t[2], l.number), out = wire(t[3], l.number);
      if (!defined[a] || !defined[b]) throw ParseError(l.number, "dangling wire");
      if (defined[out]) throw ParseError(l.number, "wire assigned twice");
      defined[out] = true;
      const bool mul = t[0] == "MUL";
      (mul ? muls : adds)++;
      gates.push_back({mul ? GateOp::Mul : GateOp::Add, a, b, out});
    } else {
      if (t.size() != 2 || t[0] != "OUTPUT") throw ParseError(l.number, "expected 'OUTPUT <wire>'");
      const auto w = wire(t[1], l.number);
      if (!defined[w]) throw ParseError(l.number, "output wire never assigned");
      outputs.push_back(w);
    }
  }
  if (adds != A || muls != M) throw ParseError(h.number, "ADD/MUL counts do not match the header");
  return Circuit(static_cast<unsigned>(bits), static_cast<std::uint32_t>(max_wire + 1), std::move(inputs),
                 std::move(gates), std::move(outputs));
}

std::string write_native(const Circuit& c) {
  if (c.const_one()) throw ContractViolation("write_native: circuits with a constant wire use Bristol");
  std::ostringstream o;
  o << c.num_inputs() << ' ' << c.num_outputs() << ' ' << c.num_add() << ' ' << c.num_mul() << ' ' << c.bits() << '\n';
  for (const auto& in : c.inputs()) o << "INPUT " << in.wire << ' ' << index_of(in.owner) << '\n';
  for (const auto& g : c.gates())
    o << (g.op == GateOp::Add ? "ADD " : "MUL ") << g.left << ' ' << g.right << ' ' << g.out << '\n';
  for (auto w : c.outputs()) o << "OUTPUT " << w << '\n';
  return o.str();
}

Circuit load_circuit(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open circuit: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto ext = path.extension().string();
  if (ext == ".txt" || ext == ".bristol") return parse_bristol(ss.str());
  return parse_native(ss.str());
}

// ---- random circuits ----

Circuit random_circuit(std::uint64_t seed, const RandomCircuitParams& params) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
  const std::size_t n_in = pick(3, 9);
  std::vector<CircuitInput> inputs;
  std::vector<unsigned> level;
  for (std::uint32_t i = 0; i < n_in; ++i) {
    const Party owner = i < 3 ? party_from_index(static_cast<int>(i)) : party_from_index(static_cast<int>(pick(0, 2)));
    inputs.push_back({i, owner});
    level.push_back(0);
  }
  const std::size_t n_gates = pick(std::min<std::size_t>(8, params.max_gates), params.max_gates);
  std::vector<Gate> gates;
  std::size_t muls = 0;
  for (std::size_t k = 0; k < n_gates; ++k) {
    const auto nw = static_cast<std::uint32_t>(level.size());
    // Bias operands toward recent wires so depth actually builds up.
    auto operand = [&]() -> std::uint32_t {
      if (pick(0, 2) == 0) return static_cast<std::uint32_t>(pick(0, nw - 1));
      return static_cast<std::uint32_t>(pick(nw > 6 ? nw - 6 : 0, nw - 1));
    };
    const std::uint32_t a = operand(), b = operand();
    const unsigned lv = std::max(level[a], level[b]);
    bool mul = pick(0, 9) < 4 || (k + 1 == n_gates && muls == 0);
    if (mul && lv + 1 > params.max_depth) mul = false;
    gates.push_back({mul ? GateOp::Mul : GateOp::Add, a, b, nw});
    level.push_back(mul ? lv + 1 : lv);
    muls += mul;
  }
  if (muls == 0) {
    const auto nw = static_cast<std::uint32_t>(level.size());
    gates.push_back({GateOp::Mul, 0, 1, nw});
    level.push_back(1);
  }
  const auto nw = static_cast<std::uint32_t>(level.size());
  std::vector<std::uint32_t> outputs{nw - 1};
  const std::size_t extra = pick(0, 4);
  for (std::size_t i = 0; i < extra; ++i) {
    const auto w = static_cast<std::uint32_t>(pick(n_in, nw - 1));
    if (std::find(outputs.begin(), outputs.end(), w) == outputs.end()) outputs.push_back(w);
  }
  return Circuit(params.bits, nw, std::move(inputs), std::move(gates), std::move(outputs));
}

// ---- AES-128 ----

namespace {

class BristolBuilder {
 public:
  explicit BristolBuilder(std::uint32_t first_free) : next_(first_free) {}

  std::uint32_t XOR(std::uint32_t a, std::uint32_t b) {
    body_ << "2 1 " << a << ' ' << b << ' ' << next_ << " XOR\n";
    ++gates_;
    return next_++;
  }
  std::uint32_t AND(std::uint32_t a, std::uint32_t b) {
    body_ << "2 1 " << a << ' ' << b << ' ' << next_ << " AND\n";
    ++gates_;
    return next_++;
  }
  std::uint32_t INV(std::uint32_t a) {
    body_ << "1 1 " << a << ' ' << next_ << " INV\n";
    ++gates_;
    return next_++;
  }
  std::uint32_t xor_all(const std::vector<std::uint32_t>& ws) {
    if (ws.empty()) throw ContractViolation("xor of nothing");
    std::uint32_t acc = ws[0];
    for (std::size_t i = 1; i < ws.size(); ++i) acc = XOR(acc, ws[i]);
    return acc;
  }

  std::uint32_t wires() const { return next_; }
  std::size_t gates() const { return gates_; }
  std::string body() const { return body_.str(); }

 private:
  std::uint32_t next_;
  std::size_t gates_ = 0;
  std::ostringstream body_;
};

using Byte = std::array<std::uint32_t, 8>;

std::uint8_t gf_mul_plain(std::uint8_t a, std::uint8_t b) {
  std::uint8_t p = 0;
  for (int i = 0; i < 8; ++i) {
    if (b & 1) p ^= a;
    const bool hi = a & 0x80;
    a = static_cast<std::uint8_t>(a << 1);
    if (hi) a ^= 0x1B;
    b >>= 1;
  }
  return p;
}

// out bit k = XOR of in bits i with (image(1 << i) >> k) & 1, for a GF(2)-linear map.
Byte linear_map(BristolBuilder& bb, const Byte& in, const std::function<std::uint8_t(std::uint8_t)>& image) {
  Byte out{};
  for (int k = 0; k < 8; ++k) {
    std::vector<std::uint32_t> terms;
    for (int i = 0; i < 8; ++i) {
      if ((image(static_cast<std::uint8_t>(1U << i)) >> k) & 1U) terms.push_back(in[i]);
    }
    out[k] = bb.xor_all(terms);
  }
  return out;
}

Byte gf_square(BristolBuilder& bb, const Byte& a) {
  return linear_map(bb, a, [](std::uint8_t x) { return gf_mul_plain(x, x); });
}

Byte gf_mul(BristolBuilder& bb, const Byte& a, const Byte& b) {
  std::array<std::vector<std::uint32_t>, 15> partial;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) partial[i + j].push_back(bb.AND(a[i], b[j]));
  }
  std::array<std::uint32_t, 15> p{};
  for (int k = 0; k < 15; ++k) p[k] = bb.xor_all(partial[k]);
  // x^8 = x^4 + x^3 + x + 1
  for (int k = 14; k >= 8; --k) {
    p[k - 4] = bb.XOR(p[k - 4], p[k]);
    p[k - 5] = bb.XOR(p[k - 5], p[k]);
    p[k - 7] = bb.XOR(p[k - 7], p[k]);
    p[k - 8] = bb.XOR(p[k - 8], p[k]);
  }
  Byte out{};
  for (int k = 0; k < 8; ++k) out[k] = p[k];
  return out;
}

Byte sbox(BristolBuilder& bb, const Byte& x) {
  const Byte x2 = gf_square(bb, x);
  const Byte x3 = gf_mul(bb, x2, x);
  const Byte x12 = gf_square(bb, gf_square(bb, x3));
  const Byte x15 = gf_mul(bb, x12, x3);
  Byte x240 = x15;
  for (int i = 0; i < 4; ++i) x240 = gf_square(bb, x240);
  const Byte x252 = gf_mul(bb, x240, x12);
  const Byte inv = gf_mul(bb, x252, x2);
  Byte out{};
  for (int i = 0; i < 8; ++i) {
    std::uint32_t w = bb.xor_all({inv[i], inv[(i + 4) % 8], inv[(i + 5) % 8], inv[(i + 6) % 8], inv[(i + 7) % 8]});
    if ((0x63 >> i) & 1) w = bb.INV(w);
    out[i] = w;
  }
  return out;
}

Byte xor_bytes(BristolBuilder& bb, const Byte& a, const Byte& b) {
  Byte o{};
  for (int i = 0; i < 8; ++i) o[i] = bb.XOR(a[i], b[i]);
  return o;
}

Byte xtime(BristolBuilder& bb, const Byte& a) {
  return linear_map(bb, a, [](std::uint8_t x) { return gf_mul_plain(x, 2); });
}

Byte add_constant(BristolBuilder& bb, Byte a, std::uint8_t c) {
  for (int i = 0; i < 8; ++i) {
    if ((c >> i) & 1) a[i] = bb.INV(a[i]);
  }
  return a;
}

}  // namespace

std::string aes128_bristol() {
  constexpr std::uint32_t kInputs = 256;
  BristolBuilder bb(kInputs);
  auto input_byte = [](std::uint32_t base, int i) {
    Byte b{};
    for (int j = 0; j < 8; ++j) b[j] = base + 8 * static_cast<std::uint32_t>(i) + static_cast<std::uint32_t>(j);
    return b;
  };
  // Key schedule: 44 words of 4 bytes.
  std::vector<std::array<Byte, 4>> w(44);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) w[i][k] = input_byte(0, 4 * i + k);
  }
  std::uint8_t rcon = 1;
  for (int i = 4; i < 44; ++i) {
    std::array<Byte, 4> t = w[i - 1];
    if (i % 4 == 0) {
      const std::array<Byte, 4> rot{t[1], t[2], t[3], t[0]};
      for (int k = 0; k < 4; ++k) t[k] = sbox(bb, rot[k]);
      t[0] = add_constant(bb, t[0], rcon);
      rcon = gf_mul_plain(rcon, 2);
    }
    for (int k = 0; k < 4; ++k) w[i][k] = xor_bytes(bb, w[i - 4][k], t[k]);
  }
  auto round_key = [&](int r, int idx) { return w[4 * r + idx / 4][idx % 4]; };

  std::array<Byte, 16> s{};
  for (int i = 0; i < 16; ++i) s[i] = xor_bytes(bb, input_byte(128, i), round_key(0, i));
  for (int r = 1; r <= 10; ++r) {
    std::array<Byte, 16> t{};
    for (int i = 0; i < 16; ++i) t[i] = sbox(bb, s[i]);
    // ShiftRows: byte (row, col) at index 4*col+row moves from column col+row.
    std::array<Byte, 16> sh{};
    for (int col = 0; col < 4; ++col) {
      for (int row = 0; row < 4; ++row) sh[4 * col + row] = t[4 * ((col + row) % 4) + row];
    }
    if (r == 10) {
      s = sh;
      break;
    }
    for (int col = 0; col < 4; ++col) {
      const Byte* a = &sh[4 * col];
      std::array<Byte, 4> x2{};
      for (int k = 0; k < 4; ++k) x2[k] = xtime(bb, a[k]);
      for (int row = 0; row < 4; ++row) {
        // 2*a[row] + 3*a[row+1] + a[row+2] + a[row+3]
        const int r1 = (row + 1) % 4, r2 = (row + 2) % 4, r3 = (row + 3) % 4;
        Byte m{};
        for (int b = 0; b < 8; ++b) m[b] = bb.xor_all({x2[row][b], x2[r1][b], a[r1][b], a[r2][b], a[r3][b]});
        s[4 * col + row] = m;
      }
    }
    for (int i = 0; i < 16; ++i) s[i] = xor_bytes(bb, s[i], round_key(r, i));
  }
  // Final AddRoundKey last so the ciphertext occupies the last 128 wires.
  for (int i = 0; i < 16; ++i) s[i] = xor_bytes(bb, s[i], round_key(10, i));

  std::ostringstream o;
  o << bb.gates() << ' ' << bb.wires() << "\n2 128 128\n1 128\n\n" << bb.body();
  return o.str();
}

Circuit aes128_circuit(std::span<const Party> owners) {
  static const std::array<Party, 2> kDefault{Party::P0, Party::P1};
  return parse_bristol(aes128_bristol(), owners.empty() ? std::span<const Party>(kDefault) : owners);
}

std::vector<RingElement> bytes_to_bits(std::span<const std::uint8_t> bytes) {
  std::vector<RingElement> out;
  out.reserve(bytes.size() * 8);
  for (auto b : bytes) {
    for (int j = 0; j < 8; ++j) out.emplace_back((b >> j) & 1U, 1);
  }
  return out;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const RingElement> bits) {
  if (bits.size() % 8 != 0) throw ContractViolation("bits_to_bytes: length must be a multiple of 8");
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) out[i / 8] |= static_cast<std::uint8_t>((bits[i].value() & 1U) << (i % 8));
  return out;
}

}  // namespace tpc
