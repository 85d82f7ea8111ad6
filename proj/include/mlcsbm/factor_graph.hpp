#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlcsbm/model.hpp"
#include "mlcsbm/rng.hpp"

namespace mlcsbm {

/// Wedge labels: layer wedges A_r are 0-based layer ids, covariate wedges use kCovariateWedge.
inline constexpr int kCovariateWedge = -1;

/// (k_1, ..., k_m; ell): k_r wedges through layer-r edge factors and ell
/// wedges through covariate factors.
struct WedgeComposition {
  std::vector<int> k;
  int ell = 0;

  int total() const;
  int num_layers() const { return static_cast<int>(k.size()); }
  /// Multiset of wedge labels in canonical order (layers ascending, then covariate wedges).
  std::vector<int> wedge_labels() const;
  /// "k1,...,km;ell"
  std::string to_string() const;
  /// Inverse of to_string. Throws InvalidArgument.
  static WedgeComposition parse(std::string_view text);

  bool operator==(const WedgeComposition&) const = default;
};

/// Checks the composition against a dataset's layer count and non-negativity.
void validate_composition(const WedgeComposition& comp, int m);

/// Every distinct ordering of the composition's wedge-label multiset.
std::vector<std::vector<int>> wedge_orderings(const WedgeComposition& comp);

/// multinomial(total; k_1, ..., k_m, ell)
std::uint64_t count_wedge_orderings(const WedgeComposition& comp);

struct EnumerationCaps {
  int max_cycle_total = 8;
  int max_cycle_ell = 3;
  int max_saw_total = 4;
  double max_saw_walks = 1e8;
};

/// A cycle on the factor graph. nodes[s] and nodes[s+1 mod k] are joined by
/// a wedge labelled wedge_types[s]. b_factors lists the covariate index of
/// each covariate wedge in cycle order; it is empty when the cycle stands
/// for every assignment of pairwise-distinct covariate indices.
struct FactorCycle {
  std::vector<int> nodes;
  std::vector<int> wedge_types;
  std::vector<int> b_factors;
};

/// A self-avoiding walk i1 -> interior... -> i2 with pairwise-distinct
/// variable nodes and pairwise-distinct covariate factors.
struct SelfAvoidingWalk {
  int i1 = 0;
  int i2 = 0;
  std::vector<int> interior;
  std::vector<int> wedge_types;
  std::vector<int> b_factors;

  /// i1, interior..., i2
  std::vector<int> nodes() const;
  bool operator==(const SelfAvoidingWalk&) const = default;
};

using CycleVisitor = std::function<void(const FactorCycle&)>;
using WalkVisitor = std::function<void(const SelfAvoidingWalk&)>;

/// Yields every cycle of the composition once up to rotation and reflection.
/// Layer wedges appear only where the layer edge is present; covariate wedges
/// connect any two nodes and are left implicit (empty b_factors).
/// Throws CapExceeded when total or ell exceeds the caps.
void enumerate_cycles(const Dataset& dataset, const WedgeComposition& comp,
                      const CycleVisitor& visit, const EnumerationCaps& caps = {});

/// |W(i1, i2, comp)|: walks over the complete wedge structure, i.e. layer
/// wedges between every pair of distinct nodes regardless of edge presence.
std::uint64_t count_saws(const Dataset& dataset, int i1, int i2, const WedgeComposition& comp,
                         const EnumerationCaps& caps = {});

/// Streams W(i1, i2, comp) explicitly, covariate indices included.
void enumerate_saws(const Dataset& dataset, int i1, int i2, const WedgeComposition& comp,
                    const WalkVisitor& visit, const EnumerationCaps& caps = {});

/// n_samples i.i.d. uniform draws from W(i1, i2, comp). Throws when W is empty.
std::vector<SelfAvoidingWalk> sample_saws(const Dataset& dataset, int i1, int i2,
                                          const WedgeComposition& comp, int n_samples,
                                          Stream& rng);

namespace detail {

enum class CycleAnchor {
  // Rooted at the smallest node, both orientations: 2 representations per cycle.
  kMinNode,
  // Rooted right after a covariate wedge, both orientations: 2*ell per cycle.
  kCovariateLast,
};

using RepVisitor = std::function<void(std::span<const int> nodes, std::span<const int> types)>;

/// Visits rooted, oriented representations of cycles with pairwise-distinct
/// nodes. Layer wedges follow edges; covariate wedges reach any node.
void visit_cycle_representations(const Dataset& dataset, const WedgeComposition& comp,
                                 CycleAnchor anchor, const RepVisitor& visit);

}  // namespace detail

}  // namespace mlcsbm
