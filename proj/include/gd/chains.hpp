#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gd/graph.hpp"

namespace gd {

enum class ChainKind : std::uint8_t {
  independent_set,
  q_coloring,
  partial_q_coloring,
  b_edge_cover,
  b_matching,
  csds,
  maximal_independent_set,
  maximal_b_matching,
};

inline constexpr ChainKind kAllChains[] = {
    ChainKind::independent_set,    ChainKind::q_coloring,  ChainKind::partial_q_coloring,
    ChainKind::b_edge_cover,       ChainKind::b_matching,  ChainKind::csds,
    ChainKind::maximal_independent_set, ChainKind::maximal_b_matching,
};

const char* chain_name(ChainKind k);
ChainKind parse_chain(const std::string& s);  // throws std::invalid_argument

bool is_edge_chain(ChainKind k);     // sites are edges
bool is_coloring_chain(ChainKind k);
bool is_maximal_chain(ChainKind k);
bool is_uniform_chain(ChainKind k);  // lambda ignored

struct ChainParams {
  ChainKind kind = ChainKind::independent_set;
  double lambda = 1.0;
  int q = 3;
};

class ChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One byte per site: 0/1 for subset chains, 0 (blank) or a color in [q] for colorings.
using State = std::vector<std::uint8_t>;

int num_sites(const Graph& g, const ChainParams& p);  // n or m

bool is_valid_state(const Graph& g, const ChainParams& p, const State& s);

enum class MoveType : std::uint8_t { add, drop, recolor, jump };

struct Move {
  State to;
  MoveType type;
};

// All Glauber-graph neighbors of s, sorted by payload. Throws ChainError when s
// is invalid or a maximal-chain enumeration exceeds its exhaustive limit.
std::vector<Move> enumerate_moves(const Graph& g, const ChainParams& p, const State& s);

// Forward moves only (maximal kinds): add one element, repair, restore maximality.
// Equal to enumerate_moves for the other kinds.
std::vector<Move> forward_moves(const Graph& g, const ChainParams& p, const State& s);

// Acceptance rate of a proposed move of the given type.
double move_rate(const ChainParams& p, MoveType t);

// lambda^{#selected} (or #colored); 1 for uniform chains.
double unnormalized_weight(const ChainParams& p, const State& s);
int weight_exponent(const ChainParams& p, const State& s);

// P(s, s') with the chain normalized by delta_M. Returns the self-loop mass
// when s == s'. Throws ChainError when s' is not adjacent.
double transition_probability(const Graph& g, const ChainParams& p, const State& s, const State& s2,
                              double delta_M);

// Number of (site, proposal) pairs the chain draws from in one step: n for
// vertex subsets, m for edge subsets, n(q+1) for partial colorings, n(q-1) for
// colorings. Throws for maximal kinds, which have no site form.
long long site_normalizer(const Graph& g, const ChainParams& p);

// Local proposal of draw `site` in [0, site_normalizer). Returns the single
// changed position and its new value when the proposal is a legal move.
struct SiteMove {
  int index;
  std::uint8_t value;
  MoveType type;
};
std::optional<SiteMove> propose_site(const Graph& g, const ChainParams& p, const State& s, long long site);

// Greedy start: empty for IS/matchings/partial colorings, everything allowed for
// covers and dominating sets, greedy maximal sets, greedy list coloring.
// Throws ChainError when no valid state is found.
State initial_state(const Graph& g, const ChainParams& p);

// Exhaustive-move limit for maximal chains (size of the enumerated neighborhood).
inline constexpr int kMaximalEnumLimit = 30;

// Conservative Delta_M for simulation without an explicit space.
double analytic_delta_bound(const Graph& g, const ChainParams& p);

// Validates params against the graph (lambda > 0, q >= 1, lists inside [q]).
void check_params(const Graph& g, const ChainParams& p);

}  // namespace gd
