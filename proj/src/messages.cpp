#include "ccc/messages.hpp"

#include <algorithm>

namespace ccc {

StaleVerdict discard_stale(const SolvedMsg& msg, std::span<const CubeId> id_trail) {
  return std::binary_search(id_trail.begin(), id_trail.end(), msg.cube_id)
             ? StaleVerdict::Process
             : StaleVerdict::Discard;
}

StaleVerdict discard_stale(const DecisionMsg& msg, std::size_t assumption_depth) {
  return msg.backtrack_level > assumption_depth ? StaleVerdict::Discard
                                                : StaleVerdict::Process;
}

const char* to_string(Peer p) { return p == Peer::Lookahead ? "LA" : "CDCL"; }

void TraceLog::record(Peer peer, std::string_view event) {
  std::lock_guard lock(mutex_);
  std::string line = "SEQ " + std::to_string(lines_.size() + 1) + " " + to_string(peer) + " ";
  line.append(event);
  lines_.push_back(std::move(line));
}

std::vector<std::string> TraceLog::lines() const {
  std::lock_guard lock(mutex_);
  return lines_;
}

std::string TraceLog::dump() const {
  std::lock_guard lock(mutex_);
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

std::size_t TraceLog::size() const {
  std::lock_guard lock(mutex_);
  return lines_.size();
}

}  // namespace ccc
