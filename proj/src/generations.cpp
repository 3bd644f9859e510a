#include "replisim/generations.hpp"

#include <stdexcept>
#include <string>

#include "replisim/rng.hpp"

namespace replisim {

Generation::Generation(std::uint64_t index, Tick deploy_time, Tick period,
                       SymmetricBivariatePoly master_poly,
                       std::uint64_t master_key)
    : index_(index),
      deploy_time_(deploy_time),
      period_(period),
      master_poly_(std::move(master_poly)),
      master_key_(master_key) {
  if (period <= 0) throw std::invalid_argument("generation period must be > 0");
}

FreshnessResult verify_deployment_freshness(const Generation& gen,
                                            Tick claimed_join_tick,
                                            Tick current_tick) {
  if (gen.erased())
    return {false, FreshnessReason::kGenerationErased};
  if (current_tick >= gen.window_end())
    return {false, FreshnessReason::kWindowExpired};
  if (current_tick < gen.deploy_time())
    return {false, FreshnessReason::kWindowNotOpen};
  if (!gen.window_open(claimed_join_tick))
    return {false, FreshnessReason::kClaimOutsideWindow};
  return {true, FreshnessReason::kAccept};
}

const Generation& GenerationClock::open_generation(Tick period,
                                                   std::uint64_t degree_t,
                                                   std::uint64_t modulus_q,
                                                   std::uint64_t seed) {
  if (!generations_.empty()) {
    const Generation& prev = generations_.back();
    if (tick_ < prev.window_end())
      throw std::logic_error(
          "cannot open generation " + std::to_string(prev.index() + 1) +
          ": window of generation " + std::to_string(prev.index()) +
          " is still open at tick " + std::to_string(tick_));
    if (tick_ < prev.deploy_time())
      throw std::logic_error("clock moved behind an existing generation");
  }
  const std::uint64_t index = generations_.size();
  SplitMix64 keygen(mix64(seed) ^ index);
  generations_.emplace_back(
      index, tick_, period,
      SymmetricBivariatePoly::random(degree_t, modulus_q, seed),
      keygen.next());
  return generations_.back();
}

void GenerationClock::erase_master_key(std::uint64_t index) {
  Generation& gen = generations_.at(index);
  if (tick_ < gen.window_end())
    throw std::logic_error("cannot erase master key of generation " +
                           std::to_string(index) +
                           " while its window is active");
  gen.erase();
}

std::optional<std::uint64_t> GenerationClock::generation_of_tick(
    Tick tick) const {
  for (const Generation& g : generations_) {
    if (g.window_open(tick)) return g.index();
  }
  return std::nullopt;
}

}  // namespace replisim
