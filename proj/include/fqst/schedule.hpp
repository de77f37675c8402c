#pragma once

#include "fqst/lattice.hpp"

#include <string>
#include <vector>

namespace fqst {

/// Amplitude shape over a step. The argument is the step fraction u in [0, 1];
/// trigonometric tags use phi = (pi/2) u, the static-chain tags theta = pi u.
/// Endpoints are snapped so a bond that should vanish is exactly zero.
struct Profile {
  enum class Tag : std::uint8_t { constant, sin, cos, sin_pow, cos_pow, one_plus_cos, one_minus_cos };

  Tag tag = Tag::constant;
  double power = 1.0;  // only for sin_pow / cos_pow

  double operator()(double u) const;
};

std::string to_string(Profile::Tag t);
Profile::Tag profile_tag_from_string(const std::string& s);

/// One coupling driven by a step. `scale`: base amplitude times profile.
/// `set`: value times profile, times the context's disorder factor for (family, ordinal).
struct Ramp {
  enum class Kind : std::uint8_t { scale, set };

  Kind kind = Kind::set;
  SiteId from;
  SiteId to;
  Half half = Half::second;
  Complex value{0.0, 0.0};
  Profile profile;
  DisorderFamily family = DisorderFamily::none;
  int ordinal = 0;
};

enum class Cadence : std::uint8_t { every_period, every_other_period };

/// How the step fraction advances with the update tick t = 1..n:
/// linear u = t/n, smooth u = (1 - cos(pi t/n)) / 2 (zero slope at both ends).
enum class Sweep : std::uint8_t { linear, smooth };

struct ScheduleStep {
  std::string label;
  int duration = 0;  // periods (stroboscopic) or relative weight (continuous)
  Cadence cadence = Cadence::every_period;
  std::vector<Ramp> ramps;
  Sweep sweep = Sweep::linear;

  /// Step fraction used during the m-th period of the step (1-based).
  double fraction(int m) const;
};

struct Protocol {
  enum class Clock : std::uint8_t { stroboscopic, continuous };

  std::string name;
  Clock clock = Clock::stroboscopic;
  double t_total = 0.0;  // continuous clock only
  std::vector<ScheduleStep> steps;

  int total_periods() const;
};

/// Resolves the ramps of a protocol against a context once and materializes the
/// bond lists for any (step, u). Earlier steps are replayed at u = 1, so couplings
/// persist across step boundaries.
class ProtocolWalker {
 public:
  ProtocolWalker(const ModelContext& ctx, const Protocol& protocol);

  void seek(std::size_t step, double u);
  /// Couplings after the whole protocol (every step at u = 1); base if empty.
  void seek_end();
  void seek_start();

  std::span<const Bond> bonds(Half h) const { return current_[h == Half::first ? 0 : 1]; }
  int dimension() const { return dimension_; }

 private:
  struct Target {
    std::size_t half;
    std::size_t index;
    bool flipped;  // stored bond runs to -> from
    Complex base;  // stored-orientation base amplitude
    double disorder;
  };

  void apply(std::size_t step, double u);

  int dimension_;
  const Protocol* protocol_;
  std::vector<Bond> base_[2];
  std::vector<Bond> current_[2];
  std::vector<std::vector<Target>> targets_;
};

/// Protocol schedule serialized to JSON text and back.
std::string schedule_to_json(const Protocol& p);
Protocol schedule_from_json(const std::string& text);

}  // namespace fqst
