#include "tpc/context.hpp"

namespace tpc {

void PartyContext::enter(Phase p) {
  const auto now = std::chrono::steady_clock::now();
  if (since_) seconds_[static_cast<int>(ep.phase())] += std::chrono::duration<double>(now - *since_).count();
  since_ = now;
  ep.set_phase(p);
}

std::array<double, kPhaseCount> PartyContext::phase_seconds() const {
  auto out = seconds_;
  if (since_) out[static_cast<int>(ep.phase())] +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - *since_).count();
  return out;
}

std::vector<RingElement> joint_sample(PartyContext& ctx, KeyId k, StreamLabel label, unsigned bits, std::size_t n) {
  if (n == 0) return {};
  if (!ctx.keys.holds(k)) return std::vector<RingElement>(n, RingElement::zero(bits));
  return ctx.keys.sample(k, label, bits, n);
}

void ShareAuditor::submit(Party p, const std::string& tag, std::vector<MShare> views) {
  std::lock_guard lk(mu_);
  auto& slot = views_[tag];
  slot[index_of(p)] = std::move(views);
  if (slot[0] && slot[1] && slot[2]) check_locked(tag);
}

void ShareAuditor::expect(const std::string& tag, std::vector<RingElement> values) {
  std::lock_guard lk(mu_);
  expected_[tag] = std::move(values);
}

void ShareAuditor::check_locked(const std::string& tag) {
  const auto& s = views_.at(tag);
  if (s[0]->size() != s[1]->size() || s[0]->size() != s[2]->size()) {
    failures_.push_back(tag + ": view sizes differ");
    return;
  }
  const auto exp = expected_.find(tag);
  for (std::size_t i = 0; i < s[0]->size(); ++i) {
    try {
      const auto v = reconstruct((*s[0])[i], (*s[1])[i], (*s[2])[i]);
      if (exp != expected_.end() && i < exp->second.size() && v != exp->second[i])
        failures_.push_back(tag + "[" + std::to_string(i) + "]: wrong value");
    } catch (const ContractViolation& e) {
      failures_.push_back(tag + "[" + std::to_string(i) + "]: " + e.what());
    }
    ++checked_;
  }
}

std::vector<RingElement> ShareAuditor::reconstructed(const std::string& tag) const {
  std::lock_guard lk(mu_);
  const auto it = views_.find(tag);
  if (it == views_.end() || !it->second[0] || !it->second[1] || !it->second[2])
    throw ContractViolation("auditor: tag '" + tag + "' incomplete");
  const auto& s = it->second;
  std::vector<RingElement> out;
  for (std::size_t i = 0; i < s[0]->size(); ++i) out.push_back(reconstruct((*s[0])[i], (*s[1])[i], (*s[2])[i]));
  return out;
}

std::vector<std::string> ShareAuditor::failures() const {
  std::lock_guard lk(mu_);
  return failures_;
}

std::size_t ShareAuditor::checked() const {
  std::lock_guard lk(mu_);
  return checked_;
}

}  // namespace tpc
