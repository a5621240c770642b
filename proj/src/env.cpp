#include "drcsim/env.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace drcsim {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void FactorProbabilities::validate() const {
  for (int i = 0; i < kNumFactors; ++i) {
    const std::string name = kFactorNames[i];
    require(in_unit(p0[i]), "factors.p0." + name + " must be in [0, 1]");
    require(in_unit(p1[i]), "factors.p1." + name + " must be in [0, 1]");
    require(in_unit(tau[i]), "factors.tau." + name + " must be in [0, 1]");
    require(p0[i] <= p1[i],
            "factors.p0." + name + " must not exceed factors.p1." + name);
  }
}

void RewardParams::validate() const {
  require(r1 >= 0.0, "rewards.r1 must be >= 0");
  require(r2 >= 0.0, "rewards.r2 must be >= 0");
  require(r3 >= 0.0, "rewards.r3 must be >= 0");
  require(r4 >= 0.0, "rewards.r4 must be >= 0");
}

void EnvConfig::validate() const {
  factors.validate();
  rewards.validate();
  require(queue_capacity >= 1, "queue_capacity must be >= 1");
  require(arrival_rate > 0.0, "arrival_rate must be > 0");
  require(tx_bad >= 0, "tx_bad must be >= 0");
  require(tx_good >= tx_bad, "tx_good must be >= tx_bad");
  require(in_unit(p_bad_channel), "p_bad_channel must be in [0, 1]");
}

int State::factor(int i) const {
  switch (i) {
    case kRoad: return r;
    case kWeather: return w;
    case kSpeed: return v;
    case kObject: return m;
    default: throw std::invalid_argument("factor index out of range");
  }
}

void State::set_factor(int i, int value) {
  switch (i) {
    case kRoad: r = value; return;
    case kWeather: w = value; return;
    case kSpeed: v = value; return;
    case kObject: m = value; return;
    default: throw std::invalid_argument("factor index out of range");
  }
}

double event_probability(const FactorProbabilities& f, const State& s) {
  double sum = 0.0;
  for (int i = 0; i < kNumFactors; ++i) {
    sum += s.factor(i) == 0 ? f.p0[i] : f.p1[i];
  }
  return std::clamp(sum, 0.0, 1.0);
}

double mean_event_probability(const FactorProbabilities& f) {
  double sum = 0.0;
  for (int i = 0; i < kNumFactors; ++i) {
    sum += f.tau[i] * f.p0[i] + (1.0 - f.tau[i]) * f.p1[i];
  }
  return std::clamp(sum, 0.0, 1.0);
}

double immediate_reward(const RewardParams& r, Action a, int channel, bool event,
                        int unfavorable_count) {
  if (a == Action::Communicate) {
    if (event) return -r.r3;
    return channel == 0 ? r.r1 : r.r2;
  }
  return event ? r.r4 * (unfavorable_count + 1) : 0.0;
}

QueueResult queue_step(int d, Action a, int channel, int arrivals, const EnvConfig& cfg) {
  QueueResult out;
  if (a == Action::Communicate) {
    out.packets_sent = std::min(d, channel == 0 ? cfg.tx_good : cfg.tx_bad);
  }
  const int interim = d - out.packets_sent + arrivals;
  out.new_d = std::min(interim, cfg.queue_capacity);
  out.packets_dropped = interim - out.new_d;
  return out;
}

ExogenousDraw sample_exogenous(const EnvConfig& cfg, std::mt19937_64& rng) {
  ExogenousDraw draw;
  draw.channel = bernoulli(rng, cfg.p_bad_channel) ? 1 : 0;
  for (int i = 0; i < kNumFactors; ++i) {
    draw.factor[i] = bernoulli(rng, 1.0 - cfg.factors.tau[i]) ? 1 : 0;
  }
  draw.arrivals = poisson(rng, cfg.arrival_rate);
  draw.event_draw = uniform01(rng);
  return draw;
}

std::array<double, kStateFeatures> encode_state(const State& s, int queue_capacity) {
  return {static_cast<double>(s.d) / queue_capacity,
          static_cast<double>(s.c),
          static_cast<double>(s.r),
          static_cast<double>(s.w),
          static_cast<double>(s.v),
          static_cast<double>(s.m)};
}

int state_count(int queue_capacity) { return (queue_capacity + 1) * 32; }

int state_index(const State& s, int queue_capacity) {
  (void)queue_capacity;
  const int bits = (s.c << 4) | (s.r << 3) | (s.w << 2) | (s.v << 1) | s.m;
  return s.d * 32 + bits;
}

State state_from_index(int index, int queue_capacity) {
  if (index < 0 || index >= state_count(queue_capacity)) {
    throw std::invalid_argument("state index out of range");
  }
  State s;
  s.d = index / 32;
  const int bits = index % 32;
  s.c = (bits >> 4) & 1;
  s.r = (bits >> 3) & 1;
  s.w = (bits >> 2) & 1;
  s.v = (bits >> 1) & 1;
  s.m = bits & 1;
  return s;
}

Environment::Environment(EnvConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), rng_(make_rng(seed, RngStream::EnvExogenous)) {
  cfg_.validate();
  reset();
}

State Environment::reset() {
  const ExogenousDraw draw = sample_exogenous(cfg_, rng_);
  state_ = State{0, draw.channel, draw.factor[kRoad], draw.factor[kWeather],
                 draw.factor[kSpeed], draw.factor[kObject]};
  return state_;
}

StepOutcome Environment::step(Action a) {
  const ExogenousDraw draw = sample_exogenous(cfg_, rng_);

  StepOutcome out;
  // Event occurrence conditions on the factors of the state the action was
  // taken in; detection is perfect in radar mode.
  out.event_occurred = draw.event_draw < event_probability(cfg_.factors, state_);
  out.event_detected = out.event_occurred && a == Action::Radar;
  out.reward = immediate_reward(cfg_.rewards, a, state_.c, out.event_occurred,
                                state_.unfavorable_count());

  const QueueResult q = queue_step(state_.d, a, state_.c, draw.arrivals, cfg_);
  out.packets_sent = q.packets_sent;
  out.packets_dropped = q.packets_dropped;

  out.next_state = State{q.new_d,
                         draw.channel,
                         draw.factor[kRoad],
                         draw.factor[kWeather],
                         draw.factor[kSpeed],
                         draw.factor[kObject]};
  state_ = out.next_state;
  return out;
}

}  // namespace drcsim
