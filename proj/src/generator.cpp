#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "pxclear/io.hpp"

namespace pxclear {

namespace {

// std distributions are implementation-defined; draw doubles from raw bits
// so that instances are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    int v = lo + static_cast<int>(std::floor(uniform() * (hi - lo + 1)));
    return std::min(v, hi);
  }

 private:
  std::mt19937_64 engine_;
};

double round_to(double v, double step) { return std::round(v / step) * step; }
double quantity(double v) { return std::max(0.1, round_to(v, 0.1)); }
double price(double v) { return round_to(v, 0.01); }

void check_range(double lo, double hi, const char* name) {
  if (!(lo <= hi)) throw std::invalid_argument(std::string("generator: inverted range ") + name);
}

// Splits `total` into `k` positive parts.
std::vector<double> split(Rng& rng, double total, int k) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (auto& x : w) sum += (x = rng.uniform(0.5, 1.5));
  for (auto& x : w) x = quantity(total * x / sum);
  return w;
}

std::vector<double> sorted_prices(Rng& rng, int k, double lo, double hi, bool descending) {
  std::vector<double> p(k);
  for (auto& x : p) x = rng.uniform(lo, hi);
  std::sort(p.begin(), p.end());
  if (descending) std::reverse(p.begin(), p.end());
  for (auto& x : p) x = price(x);
  return p;
}

std::string step_id(int t, int k) { return "t" + std::to_string(t) + "s" + std::to_string(k); }

}  // namespace

void check_config(const GeneratorConfig& c) {
  if (c.periods < 1) throw std::invalid_argument("generator: periods must be >= 1");
  if (c.locations < 1) throw std::invalid_argument("generator: locations must be >= 1");
  if (c.non_convex_count < 0 || c.steps_total < 0 || c.convex_supply_per_location < 0 ||
      c.convex_demand_per_location < 0) {
    throw std::invalid_argument("generator: counts must be non-negative");
  }
  if (c.line_capacity_mw < 0) throw std::invalid_argument("generator: negative line capacity");
  if (c.window_min < 1) throw std::invalid_argument("generator: window_min must be >= 1");
  check_range(c.window_min, c.window_max, "window");
  check_range(c.load_min_mw, c.load_max_mw, "load_mw");
  check_range(c.supply_share_min, c.supply_share_max, "supply_share");
  check_range(c.supply_price_min, c.supply_price_max, "supply_price");
  check_range(c.demand_price_min, c.demand_price_max, "demand_price");
  check_range(c.non_convex_capacity_min_mw, c.non_convex_capacity_max_mw, "non_convex_capacity");
  check_range(c.non_convex_price_min, c.non_convex_price_max, "non_convex_price");
  check_range(c.startup_cost_min, c.startup_cost_max, "startup_cost");
  check_range(c.min_ratio_min, c.min_ratio_max, "min_ratio");
  check_range(c.ramp_fraction_min, c.ramp_fraction_max, "ramp_fraction");
  if (c.load_min_mw <= 0 || c.non_convex_capacity_min_mw <= 0) {
    throw std::invalid_argument("generator: volumes must be positive");
  }
  if (c.startup_cost_min < 0) throw std::invalid_argument("generator: negative startup cost");
  if (c.min_ratio_min < 0 || c.min_ratio_max > 1) {
    throw std::invalid_argument("generator: min_ratio range outside [0, 1]");
  }
  if (c.ramp_fraction_min < 0) throw std::invalid_argument("generator: negative ramp fraction");
  for (double share : {c.ramped_share, c.demand_share}) {
    if (share < 0 || share > 1) throw std::invalid_argument("generator: share outside [0, 1]");
  }
}

Instance generate(const GeneratorConfig& config) {
  check_config(config);
  Rng rng(config.seed);
  const int T = config.periods;
  const int L = config.locations;

  Instance inst;
  inst.periods = T;
  for (int k = 1; k <= L; ++k) inst.locations.push_back("L" + std::to_string(k));
  for (int k = 0; k + 1 < L; ++k) {
    inst.lines.push_back({inst.locations[k], inst.locations[k + 1], config.line_capacity_mw});
  }

  // Daily load shape per location.
  std::vector<std::vector<double>> load(L, std::vector<double>(T));
  for (int k = 0; k < L; ++k) {
    double base = rng.uniform(config.load_min_mw, config.load_max_mw);
    for (int t = 0; t < T; ++t) {
      double shape = 0.75 - 0.25 * std::cos(2.0 * M_PI * t / 24.0);
      load[k][t] = base * shape * rng.uniform(0.95, 1.05);
    }
  }

  // Non-convex groups first, so that the convex step budget is known.
  std::vector<BidGroup> non_convex;
  int nc_steps = 0;
  for (int n = 0; n < config.non_convex_count; ++n) {
    BidGroup g;
    const bool demand = std::floor((n + 1) * config.demand_share) > std::floor(n * config.demand_share);
    char name[16];
    std::snprintf(name, sizeof name, "NC%02d", n + 1);
    g.id = name;
    g.side = demand ? Side::kDemand : Side::kSupply;
    g.convex = false;
    g.location = inst.locations[n % L];
    const int len = rng.integer(std::min(config.window_min, T), std::min(config.window_max, T));
    const int start = rng.integer(1, T - len + 1);
    const int k = rng.integer(1, 3);
    const double capacity = rng.uniform(config.non_convex_capacity_min_mw,
                                        config.non_convex_capacity_max_mw);
    const double base = rng.uniform(config.non_convex_price_min, config.non_convex_price_max);
    g.fixed_cost = std::round(rng.uniform(config.startup_cost_min, config.startup_cost_max));
    const double ratio = round_to(rng.uniform(config.min_ratio_min, config.min_ratio_max), 0.01);
    const std::vector<double> parts = split(rng, capacity, k);
    double min_output = 0.0;
    for (int t = start; t < start + len; ++t) {
      std::vector<double> prices(k);
      double p = base + rng.uniform(-2.0, 2.0);
      for (int i = 0; i < k; ++i) {
        if (demand) {
          prices[i] = price(p + 40.0);
          p -= rng.uniform(0.0, 10.0);
        } else {
          prices[i] = price(p);
          p += rng.uniform(0.0, 10.0);
        }
      }
      for (int i = 0; i < k; ++i) {
        double r = (!demand && i == 0) ? ratio : 0.0;
        g.steps.push_back({step_id(t, i + 1), t, parts[i], prices[i], r});
        if (r > 0) min_output = std::max(min_output, parts[i] * r);
      }
    }
    if (!demand && rng.uniform() < config.ramped_share) {
      // Never below the minimum output, so that starting and stopping inside
      // the horizon stays possible.
      double floor_mw = std::ceil(min_output * 10.0) / 10.0 + 0.1;
      g.ramp_up_mw = std::max(floor_mw, quantity(capacity * rng.uniform(config.ramp_fraction_min,
                                                                        config.ramp_fraction_max)));
      g.ramp_down_mw = std::max(floor_mw, quantity(capacity * rng.uniform(
                                                                  config.ramp_fraction_min,
                                                                  config.ramp_fraction_max)));
    }
    nc_steps += static_cast<int>(g.steps.size());
    non_convex.push_back(std::move(g));
  }

  const int per_loc = config.convex_supply_per_location + config.convex_demand_per_location;
  const int slots = per_loc * L * T;
  const int convex_steps = std::max(config.steps_total - nc_steps, slots);
  int slot = 0;
  auto steps_for_slot = [&]() {
    int n = slots == 0 ? 0 : convex_steps / slots + (slot < convex_steps % slots ? 1 : 0);
    ++slot;
    return std::max(1, n);
  };

  for (int k = 0; k < L; ++k) {
    for (int s = 0; s < config.convex_supply_per_location; ++s) {
      BidGroup g;
      g.id = "CS" + std::to_string(k + 1) + "_" + std::to_string(s + 1);
      g.side = Side::kSupply;
      g.location = inst.locations[k];
      for (int t = 1; t <= T; ++t) {
        int n = steps_for_slot();
        double volume = load[k][t - 1] * rng.uniform(config.supply_share_min, config.supply_share_max) /
                        config.convex_supply_per_location;
        auto q = split(rng, volume, n);
        auto p = sorted_prices(rng, n, config.supply_price_min, config.supply_price_max, false);
        for (int i = 0; i < n; ++i) g.steps.push_back({step_id(t, i + 1), t, q[i], p[i], 0.0});
      }
      inst.participants.push_back(std::move(g));
    }
    for (int s = 0; s < config.convex_demand_per_location; ++s) {
      BidGroup g;
      g.id = "CD" + std::to_string(k + 1) + "_" + std::to_string(s + 1);
      g.side = Side::kDemand;
      g.location = inst.locations[k];
      for (int t = 1; t <= T; ++t) {
        int n = steps_for_slot();
        double volume = load[k][t - 1] * rng.uniform(0.9, 1.1) / config.convex_demand_per_location;
        auto q = split(rng, volume, n);
        auto p = sorted_prices(rng, n, config.demand_price_min, config.demand_price_max, true);
        for (int i = 0; i < n; ++i) g.steps.push_back({step_id(t, i + 1), t, q[i], p[i], 0.0});
      }
      inst.participants.push_back(std::move(g));
    }
  }
  for (auto& g : non_convex) inst.participants.push_back(std::move(g));
  return inst;
}

}  // namespace pxclear
