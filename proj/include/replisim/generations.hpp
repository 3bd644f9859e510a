#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "replisim/field_poly.hpp"

namespace replisim {

using Tick = std::int64_t;

// A deployment cohort. Nodes admitted during the half-open window
// [deploy_time, deploy_time + period) share one master polynomial and one
// master key; both are erased once the window closes.
class Generation {
 public:
  Generation(std::uint64_t index, Tick deploy_time, Tick period,
             SymmetricBivariatePoly master_poly, std::uint64_t master_key);

  std::uint64_t index() const { return index_; }
  Tick deploy_time() const { return deploy_time_; }
  Tick period() const { return period_; }
  Tick window_end() const { return deploy_time_ + period_; }
  bool window_open(Tick tick) const {
    return tick >= deploy_time_ && tick < window_end();
  }
  bool erased() const { return erased_; }

  // Absent once erased; nothing can bring the material back.
  const std::optional<SymmetricBivariatePoly>& master_poly() const {
    return master_poly_;
  }
  std::optional<std::uint64_t> master_key() const { return master_key_; }

 private:
  friend class GenerationClock;
  void erase() {
    master_poly_.reset();
    master_key_.reset();
    erased_ = true;
  }

  std::uint64_t index_;
  Tick deploy_time_;
  Tick period_;
  std::optional<SymmetricBivariatePoly> master_poly_;
  std::optional<std::uint64_t> master_key_;
  bool erased_ = false;
};

enum class FreshnessReason {
  kAccept,
  kWindowExpired,   // current tick past the window
  kWindowNotOpen,   // current tick before the window
  kClaimOutsideWindow,
  kGenerationErased,
};

struct FreshnessResult {
  bool accepted = false;
  FreshnessReason reason = FreshnessReason::kAccept;
};

// Accept iff the window contains both the claimed join tick and the current
// tick and the generation still holds its master material.
FreshnessResult verify_deployment_freshness(const Generation& gen,
                                            Tick claimed_join_tick,
                                            Tick current_tick);

// Ordered, gap-free-indexed sequence of generations plus the current tick.
// Single writer: the simulation driver.
class GenerationClock {
 public:
  Tick current_tick() const { return tick_; }
  void advance_to(Tick tick) { tick_ = tick; }

  // Opens generation index = previous + 1 (or 0) at the current tick with a
  // fresh master polynomial and master key. Throws if the previous window is
  // still open (windows must not overlap) or on a bad modulus.
  const Generation& open_generation(Tick period, std::uint64_t degree_t,
                                    std::uint64_t modulus_q,
                                    std::uint64_t seed);

  // Erase master material of a generation whose window has closed. Throws if
  // the window is still active. Idempotent once closed.
  void erase_master_key(std::uint64_t index);

  // Index of the unique generation whose window contains the tick.
  std::optional<std::uint64_t> generation_of_tick(Tick tick) const;

  const std::vector<Generation>& generations() const { return generations_; }
  const Generation& at(std::uint64_t index) const {
    return generations_.at(index);
  }
  bool any_window_open(Tick tick) const {
    return generation_of_tick(tick).has_value();
  }

 private:
  std::vector<Generation> generations_;
  Tick tick_ = 0;
};

}  // namespace replisim
