#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gd/flow.hpp"
#include "gd/partition.hpp"

namespace gd {

class BoundError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structural and measured inputs. Unset fields make the forms that need them
// throw BoundError.
struct BoundParams {
  ChainKind kind = ChainKind::independent_set;
  double lambda = 1;
  std::optional<int> n, m, t, Delta, b, q;
  std::optional<long long> N, K, delta_M;
  std::optional<long long> E_min;  // smallest edge set between adjacent classes
  std::optional<long long> O_min;  // smallest overlap between overlapping subclasses
  std::optional<double> rho;       // uniform congestion
  std::optional<double> rho_weighted;
  std::optional<double> h, phi;    // exact expansion / conductance
  std::optional<double> pi_min;
  double epsilon = 0.25;

  double lambda_hat() const { return lambda >= 1 ? lambda : 1 / lambda; }
};

// Graph, chain and partition sizes; t is the width of the computed decomposition.
BoundParams measure_params(const StateSpace& sp, const ClassPartition* part = nullptr,
                           const std::vector<SubclassCover>* covers = nullptr);

struct BoundEntry {
  std::string name;
  bool applicable = true;
  double log2_value = 0;  // bounds can exceed double range
  std::string note;
  double value() const;   // +inf when out of range
};

// Individual forms, all O() constants set to 1.
BoundEntry expansion_lower(const BoundParams& p);    // 1/(2 rho)
BoundEntry conductance_lower(const BoundParams& p);  // 1/(2 rho_weighted)
BoundEntry expansion_mixing(const BoundParams& p);   // Delta_M^2 / h^2 * ln(N / eps)
BoundEntry conductance_mixing(const BoundParams& p); // phi^-2 * log(1 / (pi_min eps))
BoundEntry nonhier_mixing(const BoundParams& p);     // (2N/E_min + 1)^{2 log n} Delta_M^2 log N
BoundEntry hier_mixing(const BoundParams& p);        // (2K + 1)^{2 log n} Delta_M^2 log N
BoundEntry chain_mixing(const BoundParams& p);       // per-chain closed form

struct BoundReport {
  BoundParams params;
  std::vector<BoundEntry> entries;
  std::optional<int> tau;  // measured exact mixing time
  // Every applicable mixing bound is at least tau.
  bool consistent() const;
  const BoundEntry* find(const std::string& name) const;
  std::string text() const;  // key = value lines
  static std::string csv_header();
  std::string csv_row() const;
};

// Entries whose inputs are missing are marked not applicable rather than thrown.
BoundReport bound_report(const BoundParams& p, std::optional<int> tau = std::nullopt);

}  // namespace gd
