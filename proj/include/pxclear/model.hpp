// Domain types for two-sided day-ahead auctions with non-convex bids.

#ifndef PXCLEAR_MODEL_HPP_
#define PXCLEAR_MODEL_HPP_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pxclear {

enum class Side { kSupply, kDemand };

const char* to_string(Side side);

struct TransmissionLine {
  std::string from;
  std::string to;
  double capacity_mw = 0.0;

  bool operator==(const TransmissionLine&) const = default;
};

/// One step of a stepwise bid curve. The quantity is stored as a positive
/// magnitude; the sign is derived from the owning group's side.
struct BidStep {
  std::string id;
  int period = 1;  // 1-based
  double quantity_mw = 0.0;
  double price = 0.0;
  double min_ratio = 0.0;

  bool operator==(const BidStep&) const = default;
};

/// A participant: a family of steps controlled by one commitment decision.
/// Convex groups carry no commitment variable at all.
struct BidGroup {
  std::string id;
  Side side = Side::kSupply;
  bool convex = true;
  double fixed_cost = 0.0;
  std::optional<double> ramp_up_mw;    // absent = unbounded
  std::optional<double> ramp_down_mw;  // absent = unbounded
  std::string location;
  std::vector<BidStep> steps;

  bool has_ramps() const { return ramp_up_mw.has_value() || ramp_down_mw.has_value(); }
  bool operator==(const BidGroup&) const = default;
};

struct Instance {
  int periods = 1;
  std::vector<std::string> locations;
  std::vector<TransmissionLine> lines;
  std::vector<BidGroup> participants;

  int location_index(const std::string& id) const;  // -1 if absent
  int participant_index(const std::string& id) const;
  int non_convex_count() const;
  int step_count() const;

  bool operator==(const Instance&) const = default;
};

/// +quantity for demand, -quantity for supply.
double signed_quantity(const BidStep& step, Side side);

struct Violation {
  std::string subject;  // e.g. "participant C / step 1"
  std::string rule;     // short machine-friendly tag
  std::string message;
};

std::vector<Violation> validate_instance(const Instance& instance);

class InstanceError : public std::runtime_error {
 public:
  explicit InstanceError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Throws InstanceError when validate_instance reports anything.
void require_valid(const Instance& instance);

/// Acceptance levels indexed like the instance: u[participant],
/// x[participant][step], flows[line][period - 1].
struct DispatchSolution {
  std::vector<double> u;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> flows;
  double welfare = 0.0;

  static DispatchSolution zero(const Instance& instance);
};

/// Commodity prices per (period, location) and commitment prices per
/// participant. `delta` is empty for rules without commitment prices.
struct PriceSystem {
  std::vector<std::vector<double>> pi;  // [period - 1][location]
  std::map<int, double> delta;          // participant index -> price

  double price(int period, int location) const { return pi.at(period - 1).at(location); }
};

/// Welfare of a dispatch evaluated directly from bid data.
double evaluate_welfare(const Instance& instance, const DispatchSolution& dispatch);

/// Surplus of one participant at commodity prices:
/// sum (pi - P)(-Q) x - F u.
double participant_surplus(const Instance& instance, int participant,
                           const DispatchSolution& dispatch, const PriceSystem& prices);

/// Congestion rent collected on the network: sum (pi_to - pi_from) * flow.
double congestion_rent(const Instance& instance, const DispatchSolution& dispatch,
                       const PriceSystem& prices);

/// Checks bounds, min ratios, balance and ramp rows of a dispatch.
/// Returns human-readable descriptions of every violation above `tol`.
std::vector<std::string> check_dispatch(const Instance& instance, const DispatchSolution& dispatch,
                                        double tol = 1e-7);

}  // namespace pxclear

#endif  // PXCLEAR_MODEL_HPP_
