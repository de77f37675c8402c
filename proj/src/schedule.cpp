#include "fqst/schedule.hpp"

#include <json.hpp>

#include <cmath>

namespace fqst {

namespace {

double snapped_sin(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return std::sin(half_pi * u);
}

double snapped_cos(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  return std::cos(half_pi * u);
}

double snapped_cos_theta(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return -1.0;
  return std::cos(pi * u);
}

}  // namespace

double Profile::operator()(double u) const {
  switch (tag) {
    case Tag::constant: return 1.0;
    case Tag::sin: return snapped_sin(u);
    case Tag::cos: return snapped_cos(u);
    case Tag::sin_pow: return std::pow(snapped_sin(u), power);
    case Tag::cos_pow: return std::pow(snapped_cos(u), power);
    case Tag::one_plus_cos: return 1.0 + snapped_cos_theta(u);
    case Tag::one_minus_cos: return 1.0 - snapped_cos_theta(u);
  }
  return 1.0;
}

std::string to_string(Profile::Tag t) {
  switch (t) {
    case Profile::Tag::constant: return "constant";
    case Profile::Tag::sin: return "sin";
    case Profile::Tag::cos: return "cos";
    case Profile::Tag::sin_pow: return "sin_pow";
    case Profile::Tag::cos_pow: return "cos_pow";
    case Profile::Tag::one_plus_cos: return "one_plus_cos";
    case Profile::Tag::one_minus_cos: return "one_minus_cos";
  }
  return "?";
}

Profile::Tag profile_tag_from_string(const std::string& s) {
  using T = Profile::Tag;
  for (T t : {T::constant, T::sin, T::cos, T::sin_pow, T::cos_pow, T::one_plus_cos, T::one_minus_cos}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown amplitude profile '" + s + "'");
}

double ScheduleStep::fraction(int m) const {
  if (duration <= 0) return 1.0;
  const int ticks = cadence == Cadence::every_period ? duration : (duration + 1) / 2;
  const int tick = cadence == Cadence::every_period ? m : (m + 1) / 2;
  if (tick >= ticks) return 1.0;
  const double t = static_cast<double>(tick) / ticks;
  return sweep == Sweep::linear ? t : 0.5 * (1.0 - std::cos(pi * t));
}

int Protocol::total_periods() const {
  int n = 0;
  for (const auto& s : steps) n += s.duration;
  return n;
}

// --- ProtocolWalker ----------------------------------------------------------

ProtocolWalker::ProtocolWalker(const ModelContext& ctx, const Protocol& protocol)
    : dimension_(ctx.dimension()), protocol_(&protocol) {
  for (Half h : {Half::first, Half::second}) {
    const auto hi = h == Half::first ? 0u : 1u;
    auto b = ctx.bonds(h);
    base_[hi].assign(b.begin(), b.end());
  }
  // Bonds the context lacks are appended at zero amplitude; lookup over the
  // growing lists stays linear because protocols touch few bonds.
  auto locate = [&](std::size_t hi, int p, int q) -> std::pair<std::size_t, bool> {
    auto& list = base_[hi];
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].p == p && list[i].q == q) return {i, false};
      if (list[i].p == q && list[i].q == p) return {i, true};
    }
    if (p == q) throw ContractViolation("ramp targets an on-site term");
    list.push_back({p, q, Complex{}});
    return {list.size() - 1, false};
  };
  for (const auto& step : protocol.steps) {
    if (step.duration < 0) throw ConfigError("step '" + step.label + "' has negative duration");
    std::vector<Target> ts;
    for (const auto& r : step.ramps) {
      const int p = ctx.resolve(r.from);
      const int q = ctx.resolve(r.to);
      const std::size_t hi = r.half == Half::first ? 0 : 1;
      auto [idx, flipped] = locate(hi, p, q);
      ts.push_back({hi, idx, flipped, base_[hi][idx].amplitude, ctx.disorder_factor(r.family, r.ordinal)});
    }
    targets_.push_back(std::move(ts));
  }
  // A bond appended for a later ramp may also be the target of an earlier one.
  for (auto& ts : targets_) {
    for (auto& t : ts) t.base = base_[t.half][t.index].amplitude;
  }
  seek_start();
}

void ProtocolWalker::apply(std::size_t step, double u) {
  const auto& ramps = protocol_->steps[step].ramps;
  const auto& ts = targets_[step];
  for (std::size_t i = 0; i < ramps.size(); ++i) {
    const Ramp& r = ramps[i];
    const Target& t = ts[i];
    const double f = r.profile(u);
    Complex a;
    if (r.kind == Ramp::Kind::scale) {
      a = t.base * f;
    } else {
      a = r.value * (f * t.disorder);
      if (t.flipped) a = std::conj(a);
    }
    current_[t.half][t.index].amplitude = a;
  }
}

void ProtocolWalker::seek(std::size_t step, double u) {
  if (step >= protocol_->steps.size()) throw IndexError("protocol step out of range");
  current_[0] = base_[0];
  current_[1] = base_[1];
  for (std::size_t s = 0; s < step; ++s) apply(s, 1.0);
  apply(step, u);
}

void ProtocolWalker::seek_start() {
  current_[0] = base_[0];
  current_[1] = base_[1];
}

void ProtocolWalker::seek_end() {
  if (protocol_->steps.empty()) {
    seek_start();
    return;
  }
  seek(protocol_->steps.size() - 1, 1.0);
}

// --- serialization -----------------------------------------------------------

namespace {

using nlohmann::json;

json site_json(const SiteId& s) {
  return {{"branch", to_string(s.branch)}, {"cell", s.cell}, {"sub", s.sub == Sublattice::a ? "A" : "B"}};
}

SiteId site_from(const json& j) {
  SiteId s;
  const auto b = j.at("branch").get<std::string>();
  if (b == "L") s.branch = Branch::left;
  else if (b == "M") s.branch = Branch::middle;
  else if (b == "R") s.branch = Branch::right;
  else throw ConfigError("unknown branch '" + b + "'");
  s.cell = j.at("cell").get<int>();
  const auto sub = j.at("sub").get<std::string>();
  if (sub != "A" && sub != "B") throw ConfigError("unknown sublattice '" + sub + "'");
  s.sub = sub == "A" ? Sublattice::a : Sublattice::b;
  return s;
}

}  // namespace

std::string schedule_to_json(const Protocol& p) {
  json steps = json::array();
  for (const auto& s : p.steps) {
    json ramps = json::array();
    for (const auto& r : s.ramps) {
      ramps.push_back({{"kind", r.kind == Ramp::Kind::scale ? "scale" : "set"},
                       {"from", site_json(r.from)},
                       {"to", site_json(r.to)},
                       {"half", to_string(r.half)},
                       {"value", {r.value.real(), r.value.imag()}},
                       {"profile", {{"tag", to_string(r.profile.tag)}, {"power", r.profile.power}}},
                       {"family", to_string(r.family)},
                       {"ordinal", r.ordinal}});
    }
    steps.push_back({{"label", s.label},
                     {"duration", s.duration},
                     {"cadence", s.cadence == Cadence::every_period ? "every_period" : "every_other_period"},
                     {"sweep", s.sweep == Sweep::linear ? "linear" : "smooth"},
                     {"ramps", ramps}});
  }
  json j = {{"name", p.name},
            {"clock", p.clock == Protocol::Clock::stroboscopic ? "stroboscopic" : "continuous"},
            {"t_total", p.t_total},
            {"total_periods", p.total_periods()},
            {"steps", steps}};
  return j.dump(2);
}

Protocol schedule_from_json(const std::string& text) {
  Protocol p;
  try {
    const json j = json::parse(text);
    p.name = j.at("name").get<std::string>();
    p.clock = j.at("clock").get<std::string>() == "continuous" ? Protocol::Clock::continuous
                                                               : Protocol::Clock::stroboscopic;
    p.t_total = j.value("t_total", 0.0);
    for (const auto& js : j.at("steps")) {
      ScheduleStep s;
      s.label = js.value("label", "");
      s.duration = js.at("duration").get<int>();
      s.cadence = js.at("cadence").get<std::string>() == "every_other_period" ? Cadence::every_other_period
                                                                               : Cadence::every_period;
      s.sweep = js.value("sweep", std::string("linear")) == "smooth" ? Sweep::smooth : Sweep::linear;
      for (const auto& jr : js.at("ramps")) {
        Ramp r;
        r.kind = jr.at("kind").get<std::string>() == "scale" ? Ramp::Kind::scale : Ramp::Kind::set;
        r.from = site_from(jr.at("from"));
        r.to = site_from(jr.at("to"));
        r.half = jr.at("half").get<std::string>() == "H1" ? Half::first : Half::second;
        const auto v = jr.at("value");
        r.value = Complex{v.at(0).get<double>(), v.at(1).get<double>()};
        r.profile.tag = profile_tag_from_string(jr.at("profile").at("tag").get<std::string>());
        r.profile.power = jr.at("profile").value("power", 1.0);
        const auto fam = jr.value("family", std::string("none"));
        r.family = fam == "none" ? DisorderFamily::none : disorder_family_from_string(fam);
        r.ordinal = jr.value("ordinal", 0);
        s.ramps.push_back(r);
      }
      p.steps.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed schedule: ") + e.what());
  }
  return p;
}

}  // namespace fqst
