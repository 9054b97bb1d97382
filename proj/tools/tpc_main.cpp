// tpc: run circuits and predictions, verify the acceptance criteria, generate
// circuits and deal key/share files.
//
// Exit codes: 0 ok, 1 failure (transport error, failed verification),
// 2 protocol abort, 3 configuration error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "tpc/acceptance.hpp"
#include "tpc/harness.hpp"

namespace fs = std::filesystem;
using namespace tpc;

namespace {

constexpr int kExitFail = 1, kExitAbort = 2, kExitConfig = 3;

struct RunConfig {
  std::string mode = "semi";
  bool fair = false;
  std::string transport = "mem";
  int role = -1;
  std::string peers, listen;
  std::uint64_t keyseed = 1;
  std::string keys_file;
  unsigned reps = 1;
  std::string faults_file;
  std::uint64_t triples_n = std::uint64_t{1} << 20;
  unsigned triples_s = 40;
  std::optional<unsigned> bucket;
  std::optional<std::size_t> opened;
  double timeout_s = 120;

  // workload
  std::string circuit_path;
  std::optional<std::uint64_t> random_seed;
  bool aes = false;
  unsigned width = 32;
  std::size_t gates = 200;
  unsigned depth = 8;
  std::uint64_t input_seed = 1;
  std::string ml;
  std::size_t d = 784;
  std::uint64_t model_seed = 1;
  std::string model_file, query_file, shares_dir;
};

struct Workload {
  std::string label;
  std::optional<Circuit> circuit;
  std::vector<RingElement> inputs;
  std::optional<ModelKind> kind;
  std::array<std::optional<PredictInputs>, 3> staged;
  std::optional<double> expected;  // plaintext prediction when the model is known
};

using Fields = std::vector<std::pair<std::string, std::string>>;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string key_file_name(int i) { return "keys.p" + std::to_string(i); }
std::string share_file_name(const char* what, int i) { return std::string(what) + ".p" + std::to_string(i); }

PredictInputs load_staged(const fs::path& dir, Party p) {
  const int i = index_of(p);
  PredictInputs in;
  in.w = read_share_file(dir / share_file_name("w", i), p);
  in.z = read_share_file(dir / share_file_name("z", i), p);
  const auto b = read_share_file(dir / share_file_name("b", i), p);
  if (b.size() != 1) throw ConfigError("bias share file must hold one element");
  if (in.w.size() != in.z.size()) throw ConfigError("model and query share files differ in length");
  in.b = b[0];
  return in;
}

Workload build_workload(const RunConfig& cfg) {
  const int sources = !cfg.circuit_path.empty() + cfg.random_seed.has_value() + cfg.aes + !cfg.ml.empty();
  if (sources != 1) throw ConfigError("choose exactly one of --circuit, --random, --aes, --ml");
  Workload w;
  if (!cfg.ml.empty()) {
    w.kind = parse_model_kind(cfg.ml);
    if (!cfg.shares_dir.empty()) {
      w.label = std::string(model_kind_name(*w.kind)) + " shares=" + cfg.shares_dir;
      for (int i = 0; i < 3; ++i)
        if (cfg.role < 0 || cfg.role == i) w.staged[i] = load_staged(cfg.shares_dir, party_from_index(i));
      return w;
    }
    Model m;
    std::vector<double> z;
    if (!cfg.model_file.empty() || !cfg.query_file.empty()) {
      if (cfg.model_file.empty() || cfg.query_file.empty()) throw ConfigError("--model and --query go together");
      m = load_model(cfg.model_file);
      z = load_query(cfg.query_file);
      if (m.kind != *w.kind) throw ConfigError("model file kind differs from --ml");
      if (z.size() != m.d()) throw ConfigError("query length differs from the model dimension");
      w.label = std::string(model_kind_name(*w.kind)) + " model=" + cfg.model_file;
    } else {
      m = random_model(*w.kind, cfg.d, cfg.model_seed);
      z = random_query(m, cfg.model_seed + 1);
      w.label = std::string(model_kind_name(*w.kind)) + " d=" + std::to_string(cfg.d) +
                " model-seed=" + std::to_string(cfg.model_seed);
    }
    const auto staged = stage_prediction(m, z, seed_from_u64(cfg.model_seed));
    for (int i = 0; i < 3; ++i) w.staged[i] = staged[i];
    w.expected = is_classifier(m.kind) ? plain_predict(m, z) : plain_score(m, z);
    return w;
  }
  if (!cfg.circuit_path.empty()) {
    w.circuit = load_circuit(cfg.circuit_path);
    w.label = "circuit=" + cfg.circuit_path;
  } else if (cfg.aes) {
    w.circuit = aes128_circuit();
    w.label = "aes128";
  } else {
    w.circuit = random_circuit(*cfg.random_seed, {cfg.width, cfg.gates, cfg.depth});
    w.label = "random seed=" + std::to_string(*cfg.random_seed) + " width=" + std::to_string(cfg.width);
  }
  w.inputs = seeded_inputs(*w.circuit, cfg.input_seed);
  return w;
}

void validate(const RunConfig& cfg, const Workload& w) {
  if (cfg.reps < 1) throw ConfigError("--reps must be at least 1");
  if (cfg.mode != "semi" && cfg.mode != "mal") throw ConfigError("--mode must be semi or mal");
  if (cfg.fair && cfg.mode != "mal") throw ConfigError("--fair needs --mode mal");
  if (cfg.fair && w.kind) throw ConfigError("--fair applies to circuits only");
  if (!cfg.faults_file.empty() && cfg.mode != "mal") throw ConfigError("fault scripts need --mode mal");
  if (cfg.transport == "tcp") {
    if (cfg.role < 0 || cfg.role > 2) throw ConfigError("--transport tcp needs --role 0|1|2");
    if (cfg.peers.empty()) throw ConfigError("--transport tcp needs --peers h:p,h:p,h:p");
  } else if (cfg.transport == "mem") {
    if (cfg.role >= 0) throw ConfigError("--role only applies to --transport tcp");
  } else {
    throw ConfigError("--transport must be mem or tcp");
  }
}

TripleParams triple_params(const RunConfig& cfg) {
  TripleParams tp;
  tp.nominal_n = cfg.triples_n;
  tp.s = cfg.triples_s;
  tp.bucket = cfg.bucket;
  tp.opened = cfg.opened;
  return tp;
}

PartyFn party_fn(const RunConfig& cfg, const Workload& w) {
  if (w.circuit) {
    const auto mode = cfg.mode == "semi" ? CircuitMode::Semi : cfg.fair ? CircuitMode::Fair : CircuitMode::Mal;
    return circuit_fn(*w.circuit, w.inputs, mode, triple_params(cfg));
  }
  PredictOptions po;
  po.mode = cfg.mode == "semi" ? Mode::Semi : Mode::Mal;
  po.triples = triple_params(cfg);
  return [&w, po](PartyContext& ctx) {
    return std::vector<RingElement>{predict(ctx, *w.kind, *w.staged[index_of(ctx.me)], po)};
  };
}

std::string phase_key(Phase ph) { return lower(phase_name(ph)); }
std::string cat_key(Category c) { return lower(category_name(c)); }

// Deterministic fields of one party: meter cells, round stamps, transcripts, outputs.
Fields party_fields(const PartyOutcome& p) {
  Fields f;
  const std::string pre = "p" + std::to_string(index_of(p.me)) + ".";
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    const auto phase = static_cast<Phase>(ph);
    for (int c = 0; c < kCategoryCount; ++c) {
      const auto cat = static_cast<Category>(c);
      const auto cell = p.meter.sent(phase, cat);
      if (cell.frames == 0) continue;
      const std::string k = pre + phase_key(phase) + "." + cat_key(cat) + ".";
      f.emplace_back(k + "frames", std::to_string(cell.frames));
      f.emplace_back(k + "elements", std::to_string(cell.elements));
      f.emplace_back(k + "bits", std::to_string(cell.bits));
      f.emplace_back(k + "bytes", std::to_string(cell.bytes));
    }
    f.emplace_back(pre + phase_key(phase) + ".max_stamp", std::to_string(p.meter.max_stamp(phase)));
    for (int peer = 0; peer < 3; ++peer)
      if (peer != index_of(p.me))
        f.emplace_back(pre + "transcript." + std::to_string(peer) + "." + phase_key(phase),
                       to_hex(p.transcripts[peer][ph]).substr(0, 16));
  }
  f.emplace_back(pre + "output.count", std::to_string(p.outputs.size()));
  for (std::size_t i = 0; i < p.outputs.size(); ++i)
    f.emplace_back(pre + "output." + std::to_string(i), std::to_string(p.outputs[i].value()));
  return f;
}

std::uint64_t pair_bytes(const PartyOutcome& p, Party peer) {
  std::uint64_t n = 0;
  for (int ph = 0; ph < kPhaseCount; ++ph)
    for (int c = 0; c < kCategoryCount; ++c) {
      n += p.meter.sent(static_cast<Phase>(ph), peer, static_cast<Category>(c)).bytes;
      n += p.meter.received(static_cast<Phase>(ph), peer, static_cast<Category>(c)).bytes;
    }
  return n;
}

std::string fmt3(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << x;
  return os.str();
}

// Runs every repetition; returns the outcomes of the first one and the mean
// per-phase seconds. Throws ConfigError-free runtime errors only.
struct Runs {
  std::vector<PartyOutcome> parties;  // three for mem, one for tcp
  std::array<double, kPhaseCount> seconds{};
  bool stable = true;
};

Runs execute(const RunConfig& cfg, const Workload& w, const FaultScript* faults) {
  const PartyFn fn = party_fn(cfg, w);
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(cfg.timeout_s * 1000));
  Runs out;
  std::optional<std::vector<Fields>> first;
  for (unsigned rep = 0; rep < cfg.reps; ++rep) {
    std::vector<PartyOutcome> parties;
    if (cfg.transport == "mem") {
      RunOptions o;
      o.seed = seed_from_u64(cfg.keyseed);
      o.faults = faults;
      o.timeout = timeout;
      auto r = run_mem(fn, o);
      parties.assign(r.parties.begin(), r.parties.end());
    } else {
      const Party me = party_from_index(cfg.role);
      std::array<PeerAddress, 3> peers;
      std::vector<std::string> list;
      std::stringstream ss(cfg.peers);
      for (std::string item; std::getline(ss, item, ',');) list.push_back(item);
      if (list.size() != 3) throw ConfigError("--peers needs three comma-separated host:port entries");
      for (int i = 0; i < 3; ++i) peers[i] = parse_address(list[i]);
      if (!cfg.listen.empty()) peers[cfg.role] = parse_address(cfg.listen);
      KeySetup keys = cfg.keys_file.empty() ? std::move(setup_keys(seed_from_u64(cfg.keyseed))[cfg.role])
                                            : read_key_file(cfg.keys_file, me);
      parties.push_back(run_tcp(me, peers, keys, fn, faults, timeout));
    }
    std::vector<Fields> fields;
    for (const auto& p : parties) {
      fields.push_back(party_fields(p));
      for (int ph = 0; ph < kPhaseCount; ++ph) out.seconds[ph] += p.seconds[ph] / parties.size() / cfg.reps;
    }
    if (!first) {
      first = fields;
      out.parties = std::move(parties);
    } else if (*first != fields) {
      out.stable = false;
    }
  }
  return out;
}

int cmd_run(const RunConfig& cfg) {
  const Workload w = build_workload(cfg);
  validate(cfg, w);
  std::optional<FaultScript> faults;
  if (!cfg.faults_file.empty()) faults = load_fault_script(cfg.faults_file);
  const Runs runs = execute(cfg, w, faults ? &*faults : nullptr);

  Fields kv;
  std::string status = "ok", check;
  Party who = Party::P0;
  for (const auto& p : runs.parties) {
    if (!p.error.empty() && status != "error") {
      status = "error";
      check = p.error;
      who = p.me;
    } else if (p.aborted && status == "ok") {
      status = "abort";
      check = p.abort_check;
      who = p.me;
    }
  }
  const bool all = runs.parties.size() == 3;
  const std::string mode = cfg.mode + (cfg.fair ? "+fair" : "");

  std::cout << "tpc run\n";
  std::cout << "  mode       " << mode << "\n";
  std::cout << "  workload   " << w.label << "\n";
  if (w.circuit)
    std::cout << "  circuit    I=" << w.circuit->num_inputs() << " O=" << w.circuit->num_outputs()
              << " M=" << w.circuit->num_mul() << " D=" << w.circuit->depth() << " width=" << w.circuit->bits() << "\n";
  std::cout << "  transport  " << cfg.transport;
  if (!all) std::cout << " (party P" << cfg.role << " only)";
  std::cout << "\n  reps       " << cfg.reps << (runs.stable ? "" : " (meter differed between reps)") << "\n";
  std::cout << "  status     " << status;
  if (status != "ok") std::cout << " at " << party_name(who) << ": " << check;
  std::cout << "\n\n";

  // Sent totals: all parties for mem, this party for tcp.
  std::cout << "  " << std::left << std::setw(9) << "phase" << std::setw(12) << "category" << std::right << std::setw(8)
            << "frames" << std::setw(12) << "elements" << std::setw(14) << "bits" << std::setw(12) << "bytes" << "\n";
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    const auto phase = static_cast<Phase>(ph);
    for (int c = 0; c < kCategoryCount; ++c) {
      const auto cat = static_cast<Category>(c);
      MeterCell cell;
      for (const auto& p : runs.parties) cell += p.meter.sent(phase, cat);
      if (cell.frames == 0) continue;
      std::cout << "  " << std::left << std::setw(9) << phase_key(phase) << std::setw(12) << cat_key(cat) << std::right
                << std::setw(8) << cell.frames << std::setw(12) << cell.elements << std::setw(14) << cell.bits
                << std::setw(12) << cell.bytes << "\n";
      if (all) {
        const std::string k = phase_key(phase) + "." + cat_key(cat) + ".";
        kv.emplace_back(k + "elements", std::to_string(cell.elements));
        kv.emplace_back(k + "bits", std::to_string(cell.bits));
        kv.emplace_back(k + "bytes", std::to_string(cell.bytes));
      }
    }
  }
  std::cout << "\n  rounds    ";
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    std::uint32_t r = 0;
    for (const auto& p : runs.parties) r = std::max(r, p.meter.max_stamp(static_cast<Phase>(ph)));
    std::cout << " " << phase_key(static_cast<Phase>(ph)) << "=" << r;
    if (all) kv.emplace_back(phase_key(static_cast<Phase>(ph)) + ".rounds", std::to_string(r));
  }
  std::cout << "\n  pair bytes";
  for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    const PartyOutcome* holder = nullptr;
    for (const auto& p : runs.parties)
      if (index_of(p.me) == a || index_of(p.me) == b) holder = holder ? holder : &p;
    if (!holder) continue;
    const Party other = party_from_index(index_of(holder->me) == a ? b : a);
    const auto n = pair_bytes(*holder, other);
    std::cout << " P" << a << "-P" << b << "=" << n;
    kv.emplace_back("pair." + std::to_string(a) + std::to_string(b) + ".bytes", std::to_string(n));
  }
  std::cout << "\n  latency ms";
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    std::cout << " " << phase_key(static_cast<Phase>(ph)) << "=" << fmt3(runs.seconds[ph] * 1e3);
    kv.emplace_back("latency." + phase_key(static_cast<Phase>(ph)) + "_ms", fmt3(runs.seconds[ph] * 1e3));
  }
  const double total = runs.seconds[0] + runs.seconds[1] + runs.seconds[2];
  std::cout << "\n  throughput ";
  if (w.circuit && runs.seconds[1] > 0) {
    const double g = w.circuit->num_mul() / runs.seconds[1];
    std::cout << static_cast<std::uint64_t>(g) << " mul gates/s online";
    kv.emplace_back("throughput.gates_per_s", std::to_string(static_cast<std::uint64_t>(g)));
  } else if (w.kind && total > 0) {
    std::cout << fmt3(1 / total) << " queries/s";
    kv.emplace_back("throughput.queries_per_s", std::to_string(1 / total));
  }
  std::cout << " (local machine, informational only)\n";

  const PartyOutcome* shown = nullptr;
  for (const auto& p : runs.parties)
    if (!shown && !p.outputs.empty()) shown = &p;
  if (shown) {
    std::cout << "  outputs    " << party_name(shown->me) << ":";
    if (w.circuit && w.circuit->bits() == 1 && shown->outputs.size() % 8 == 0) {
      std::cout << " " << to_hex(bits_to_bytes(shown->outputs));
    } else if (w.kind) {
      std::cout << " " << decode_prediction(*w.kind, shown->outputs[0]);
      if (w.expected) std::cout << " (plaintext " << *w.expected << ")";
    } else {
      const std::size_t n = std::min<std::size_t>(shown->outputs.size(), 8);
      for (std::size_t i = 0; i < n; ++i) std::cout << " " << shown->outputs[i].value();
      if (n < shown->outputs.size()) std::cout << " ... (" << shown->outputs.size() << " total)";
    }
    std::cout << "\n";
    if (w.kind) kv.emplace_back("prediction", std::to_string(decode_prediction(*w.kind, shown->outputs[0])));
  }

  std::cout << "\n[keyvalue]\n";
  std::cout << "status=" << status << "\n";
  if (status == "abort") std::cout << "abort.check=" << check << "\nabort.party=" << index_of(who) << "\n";
  std::cout << "mode=" << mode << "\ntransport=" << cfg.transport << "\nreps=" << cfg.reps
            << "\nmeter.stable=" << runs.stable << "\n";
  if (w.circuit)
    std::cout << "circuit.inputs=" << w.circuit->num_inputs() << "\ncircuit.outputs=" << w.circuit->num_outputs()
              << "\ncircuit.mul=" << w.circuit->num_mul() << "\ncircuit.depth=" << w.circuit->depth() << "\n";
  for (const auto& [k, v] : kv) std::cout << k << "=" << v << "\n";
  for (const auto& p : runs.parties)
    for (const auto& [k, v] : party_fields(p)) std::cout << k << "=" << v << "\n";

  if (status == "abort") {
    std::cerr << "abort: " << check << " (" << party_name(who) << ")\n";
    return kExitAbort;
  }
  if (status == "error") {
    std::cerr << "error: " << check << "\n";
    return kExitFail;
  }
  return 0;
}

int cmd_verify(const std::vector<int>& only, bool tamper, bool verbose) {
  AcceptanceOptions opts;
  opts.only = only;
  opts.tamper = tamper;
  if (verbose) opts.log = [](const std::string& s) { std::cerr << s << std::endl; };
  std::vector<int> failed;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto r = run_criterion(id, opts);
    std::cout << format_result(r) << std::endl;
    if (!r.pass) failed.push_back(id);
  }
  if (failed.empty()) {
    std::cout << "ALL PASSED" << std::endl;
    return 0;
  }
  std::cout << "FAILED:";
  for (int id : failed) std::cout << " " << id;
  std::cout << std::endl;
  return kExitFail;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

int cmd_gen_circuit(std::optional<std::uint64_t> seed, bool aes, const std::string& format, unsigned width,
                    std::size_t gates, unsigned depth, const std::string& out) {
  if (seed.has_value() == aes) throw ConfigError("choose one of --random or --aes");
  std::string text;
  if (aes) {
    text = format == "bristol" ? aes128_bristol() : write_native(aes128_circuit());
  } else {
    if (format == "bristol") throw ConfigError("random circuits are written in native format only");
    text = write_native(random_circuit(*seed, {width, gates, depth}));
  }
  if (out.empty() || out == "-") std::cout << text;
  else write_text(out, text);
  return 0;
}

int cmd_deal(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const auto keys = setup_keys(seed_from_u64(cfg.keyseed));
  for (int i = 0; i < 3; ++i) write_key_file(dir / key_file_name(i), keys[i]);
  std::cout << "keys       " << (dir / "keys.p{0,1,2}").string() << " (keyseed " << cfg.keyseed << ")\n";
  if (cfg.ml.empty()) return 0;
  RunConfig c = cfg;
  c.shares_dir.clear();
  const Workload w = build_workload(c);
  for (int i = 0; i < 3; ++i) {
    const Party p = party_from_index(i);
    write_share_file(dir / share_file_name("w", i), p, w.staged[i]->w);
    write_share_file(dir / share_file_name("z", i), p, w.staged[i]->z);
    write_share_file(dir / share_file_name("b", i), p, std::span(&w.staged[i]->b, 1));
  }
  std::cout << "shares     " << w.label << " -> " << (dir / "{w,z,b}.p{0,1,2}").string() << "\n";
  if (w.expected) std::cout << "plaintext  " << *w.expected << "\n";
  return 0;
}

void add_ml_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--ml", cfg.ml, "prediction kind: linreg, svmr, logr, svmc");
  sub->add_option("--d", cfg.d, "feature count of the random model")->check(CLI::PositiveNumber);
  sub->add_option("--model-seed", cfg.model_seed, "seed of the random model, query and dealer");
  sub->add_option("--model", cfg.model_file, "model file")->check(CLI::ExistingFile);
  sub->add_option("--query", cfg.query_file, "query file")->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-party secure computation over Z_2^l"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* run = app.add_subcommand("run", "evaluate a circuit or a prediction and print the meter report");
  run->add_option("--mode", cfg.mode, "semi or mal")->check(CLI::IsMember({"semi", "mal"}));
  run->add_flag("--fair", cfg.fair, "fair output delivery (mal circuits)");
  run->add_option("--transport", cfg.transport, "mem or tcp")->check(CLI::IsMember({"mem", "tcp"}));
  run->add_option("--role", cfg.role, "this process's party for tcp")->check(CLI::Range(0, 2));
  run->add_option("--peers", cfg.peers, "host:port of P0,P1,P2");
  run->add_option("--listen", cfg.listen, "host:port this party listens on (default: its --peers entry)");
  run->add_option("--keyseed", cfg.keyseed, "deterministic key setup");
  run->add_option("--keys", cfg.keys_file, "key file from deal-shares (tcp)")->check(CLI::ExistingFile);
  run->add_option("--reps", cfg.reps, "repetitions")->check(CLI::PositiveNumber);
  run->add_option("--faults", cfg.faults_file, "fault script (mal only)")->check(CLI::ExistingFile);
  run->add_option("--triples-n", cfg.triples_n, "nominal triple batch N (sets the bucket size)");
  run->add_option("--triples-s", cfg.triples_s, "statistical security s");
  run->add_option("--bucket", cfg.bucket, "force the bucket size B")->check(CLI::Range(2, 64));
  run->add_option("--opened", cfg.opened, "opened triples C (default 3B)");
  run->add_option("--timeout", cfg.timeout_s, "seconds per receive");
  run->add_option("--circuit", cfg.circuit_path, "native or Bristol (.txt, .bristol) circuit")->check(CLI::ExistingFile);
  run->add_option("--random", cfg.random_seed, "random arithmetic circuit with this seed");
  run->add_flag("--aes", cfg.aes, "built-in AES-128 circuit");
  run->add_option("--width", cfg.width, "ring width of random circuits")->check(CLI::IsMember({1, 8, 32, 64}));
  run->add_option("--gates", cfg.gates, "gate bound of random circuits");
  run->add_option("--depth", cfg.depth, "depth bound of random circuits");
  run->add_option("--input-seed", cfg.input_seed, "seed of the circuit inputs");
  add_ml_options(run, cfg);
  run->add_option("--shares", cfg.shares_dir, "directory written by deal-shares")->check(CLI::ExistingDirectory);

  std::vector<int> only;
  bool tamper = false, verbose = false;
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  verify->add_option("--only", only, "criterion ids")->check(CLI::Range(1, kCriterionCount));
  verify->add_flag("--tamper", tamper, "perturb one meter constant; criterion 3 must fail");
  verify->add_flag("-v,--verbose", verbose, "progress on stderr");

  std::optional<std::uint64_t> gen_seed;
  bool gen_aes = false;
  std::string gen_format = "native", gen_out;
  unsigned gen_width = 32, gen_depth = 8;
  std::size_t gen_gates = 200;
  auto* gen = app.add_subcommand("gen-circuit", "write a random or AES-128 circuit");
  gen->add_option("--random", gen_seed, "seed");
  gen->add_flag("--aes", gen_aes, "AES-128");
  gen->add_option("--format", gen_format, "native or bristol")->check(CLI::IsMember({"native", "bristol"}));
  gen->add_option("--width", gen_width, "ring width")->check(CLI::IsMember({1, 8, 32, 64}));
  gen->add_option("--gates", gen_gates, "gate bound");
  gen->add_option("--depth", gen_depth, "depth bound");
  gen->add_option("-o,--out", gen_out, "output file (default stdout)");

  std::string deal_out;
  auto* deal = app.add_subcommand("deal-shares", "write per-party key files and prediction share files");
  deal->add_option("--keyseed", cfg.keyseed, "deterministic key setup");
  deal->add_option("--out", deal_out, "output directory")->required();
  add_ml_options(deal, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(cfg);
    if (*verify) return cmd_verify(only, tamper, verbose);
    if (*gen) return cmd_gen_circuit(gen_seed, gen_aes, gen_format, gen_width, gen_gates, gen_depth, gen_out);
    if (*deal) return cmd_deal(cfg, deal_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitFail;
}
