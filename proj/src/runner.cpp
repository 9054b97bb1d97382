#include "tpc/runner.hpp"

#include <algorithm>
#include <thread>

namespace tpc {

bool RunResult::all_ok() const {
  return std::all_of(parties.begin(), parties.end(), [](const auto& p) { return p.ok(); });
}

bool RunResult::all_aborted() const {
  return std::all_of(parties.begin(), parties.end(), [](const auto& p) { return p.aborted; });
}

bool RunResult::unanimous(const FaultScript* faults) const {
  std::vector<Party> bad;
  if (faults) bad = faults->corrupted();
  int outputs = 0, aborts = 0;
  for (const auto& p : parties) {
    if (std::find(bad.begin(), bad.end(), p.me) != bad.end()) continue;
    if (p.aborted) ++aborts;
    else if (p.error.empty()) ++outputs;
  }
  return outputs == 0 || aborts == 0;
}

std::uint32_t RunResult::rounds(Phase ph) const {
  std::uint32_t r = 0;
  for (const auto& p : parties) r = std::max(r, p.meter.max_stamp(ph));
  return r;
}

MeterCell RunResult::sent(Phase ph, Category cat) const {
  MeterCell c;
  for (const auto& p : parties) c += p.meter.sent(ph, cat);
  return c;
}

double RunResult::seconds(Phase ph) const {
  double s = 0;
  for (const auto& p : parties) s = std::max(s, p.seconds[static_cast<int>(ph)]);
  return s;
}

PartyOutcome run_party(Party me, KeySetup& keys, std::array<std::unique_ptr<Channel>, 3> channels,
                       const PartyFn& fn, const FaultScript* faults, ShareAuditor* auditor) {
  PartyOutcome out;
  out.me = me;
  Endpoint ep(me, std::move(channels));
  ep.set_faults(faults);
  PartyContext ctx{me, keys, ep, auditor};
  try {
    out.outputs = fn(ctx);
  } catch (const ProtocolAbort& e) {
    out.aborted = true;
    out.abort_check = e.check();
    ep.send_abort(e.check());
  } catch (const std::exception& e) {
    out.error = e.what();
    ep.send_abort(std::string("error:") + e.what());
  }
  out.seconds = ctx.phase_seconds();
  out.meter = ep.meter();
  for (Party peer : kAllParties) {
    if (peer == me) continue;
    for (int ph = 0; ph < kPhaseCount; ++ph)
      out.transcripts[index_of(peer)][ph] = ep.transcript(peer, static_cast<Phase>(ph));
  }
  ep.close();
  return out;
}

RunResult run_mem(const std::array<PartyFn, 3>& fns, const RunOptions& opts) {
  MemNetwork net(opts.timeout);
  auto keys = setup_keys(opts.seed);
  RunResult r;
  std::array<std::array<std::unique_ptr<Channel>, 3>, 3> ch;
  for (Party p : kAllParties) ch[index_of(p)] = net.channels(p);
  std::vector<std::thread> threads;
  for (Party p : kAllParties) {
    const int i = index_of(p);
    threads.emplace_back([&, p, i] {
      r.parties[i] = run_party(p, keys[i], std::move(ch[i]), fns[i], opts.faults, opts.auditor);
    });
  }
  for (auto& t : threads) t.join();
  net.close_all();
  return r;
}

RunResult run_mem(const PartyFn& fn, const RunOptions& opts) { return run_mem({fn, fn, fn}, opts); }

PartyOutcome run_tcp(Party me, const std::array<PeerAddress, 3>& peers, KeySetup& keys, const PartyFn& fn,
                     const FaultScript* faults, std::chrono::milliseconds timeout) {
  auto channels = tcp_connect(me, peers, std::chrono::seconds(30), timeout);
  return run_party(me, keys, std::move(channels), fn, faults, nullptr);
}

RunResult run_tcp_local(const PartyFn& fn, const RunOptions& opts) {
  const auto ports = free_local_ports(3);
  std::array<PeerAddress, 3> peers;
  for (int i = 0; i < 3; ++i) peers[i] = {"127.0.0.1", ports[i]};
  auto keys = setup_keys(opts.seed);
  RunResult r;
  std::vector<std::thread> threads;
  for (Party p : kAllParties) {
    const int i = index_of(p);
    threads.emplace_back([&, p, i] {
      try {
        r.parties[i] = run_tcp(p, peers, keys[i], fn, opts.faults, opts.timeout);
      } catch (const std::exception& e) {
        r.parties[i].me = p;
        r.parties[i].error = e.what();
      }
    });
  }
  for (auto& t : threads) t.join();
  return r;
}

}  // namespace tpc
