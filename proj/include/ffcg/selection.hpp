#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ffcg/column.hpp"
#include "ffcg/features.hpp"

namespace ffcg {

class Rmp;

/// One CG iteration's choice: the pool G_t, the ordered picks forming C_t and,
/// when recorded, the state observed before each pick.
struct SelectionEpisode {
  std::vector<int> candidate_ids;
  std::vector<int> picks;
  // Pick index at which STOP was chosen; empty when the pool ran out or the
  // policy does not use STOP.
  std::optional<int> stop_step;
  std::vector<BipartiteState> states;
  long q_evaluations = 0;
  bool exploratory = false;
};

/// What a policy sees at iteration t.
struct SelectionContext {
  const Rmp& rmp;
  std::span<const Candidate> candidates;
  int iteration = 0;
  bool record_states = false;

  /// S_t with no picks yet.
  BipartiteState base_state() const;
};

class SelectionPolicy {
 public:
  virtual ~SelectionPolicy() = default;
  virtual std::string name() const = 0;
  /// Returns a nonempty subset of the candidates; `candidates` is nonempty.
  virtual SelectionEpisode select(const SelectionContext& context) = 0;
};

}  // namespace ffcg
