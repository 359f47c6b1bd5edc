#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccc/formula.hpp"

namespace ccc {

// Cube ids are allocated by the lookahead peer in depth-first order, root = 1.
struct CubeId {
  std::uint64_t value = 0;

  constexpr bool operator==(const CubeId&) const = default;
  constexpr auto operator<=>(const CubeId&) const = default;
};

// "Cube `cube_id` extends the cube at `backtrack_level` decisions by `lit`."
struct DecisionMsg {
  CubeId cube_id;
  std::uint32_t backtrack_level = 0;
  Lit lit;

  bool operator==(const DecisionMsg&) const = default;
};

// "Cube `cube_id` is unsatisfiable."
struct SolvedMsg {
  CubeId cube_id;

  bool operator==(const SolvedMsg&) const = default;
};

enum class StaleVerdict { Process, Discard };

// Lookahead side: a refutation is acted upon only while the cube is still on
// the id trail (ids ascend from the root).
StaleVerdict discard_stale(const SolvedMsg& msg, std::span<const CubeId> id_trail);
// CDCL side: a decision whose parent cube is deeper than the assumption stack
// belongs to a branch that has been left already.
StaleVerdict discard_stale(const DecisionMsg& msg, std::size_t assumption_depth);

enum class Peer { Lookahead, Cdcl };

const char* to_string(Peer p);

// Ordered event log shared by both peers. Lines read
// "SEQ <n> <peer> <event> <args...>".
class TraceLog {
 public:
  void record(Peer peer, std::string_view event);
  std::vector<std::string> lines() const;
  std::string dump() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> lines_;
};

}  // namespace ccc
