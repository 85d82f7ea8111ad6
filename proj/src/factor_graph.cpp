#include "mlcsbm/factor_graph.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include "mlcsbm/errors.hpp"

namespace mlcsbm {

int WedgeComposition::total() const { return std::accumulate(k.begin(), k.end(), 0) + ell; }

std::vector<int> WedgeComposition::wedge_labels() const {
  std::vector<int> labels;
  for (int r = 0; r < num_layers(); ++r) labels.insert(labels.end(), k[r], r);
  labels.insert(labels.end(), ell, kCovariateWedge);
  return labels;
}

std::string WedgeComposition::to_string() const {
  std::string out;
  for (std::size_t r = 0; r < k.size(); ++r) {
    if (r > 0) out += ',';
    out += std::to_string(k[r]);
  }
  return out + ';' + std::to_string(ell);
}

WedgeComposition WedgeComposition::parse(std::string_view text) {
  const auto semi = text.find(';');
  if (semi == std::string_view::npos) {
    throw InvalidArgument("composition must look like 'k1,...,km;ell', got '" +
                          std::string(text) + "'");
  }
  auto parse_int = [&](std::string_view token) {
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value < 0) {
      throw InvalidArgument("bad composition entry '" + std::string(token) + "'");
    }
    return value;
  };
  WedgeComposition comp;
  std::string_view head = text.substr(0, semi);
  while (true) {
    const auto comma = head.find(',');
    comp.k.push_back(parse_int(head.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    head.remove_prefix(comma + 1);
  }
  comp.ell = parse_int(text.substr(semi + 1));
  return comp;
}

void validate_composition(const WedgeComposition& comp, int m) {
  if (comp.num_layers() != m) {
    throw InvalidArgument("composition " + comp.to_string() + " has " +
                          std::to_string(comp.num_layers()) + " layer counts, data has " +
                          std::to_string(m));
  }
  if (comp.ell < 0 || std::any_of(comp.k.begin(), comp.k.end(), [](int x) { return x < 0; })) {
    throw InvalidArgument("composition entries must be non-negative");
  }
}

std::vector<std::vector<int>> wedge_orderings(const WedgeComposition& comp) {
  auto labels = comp.wedge_labels();
  std::sort(labels.begin(), labels.end());
  std::vector<std::vector<int>> out;
  do {
    out.push_back(labels);
  } while (std::next_permutation(labels.begin(), labels.end()));
  return out;
}

namespace {

using u128 = unsigned __int128;
constexpr u128 kU64Max = static_cast<u128>(~std::uint64_t{0});

u128 checked_mul(u128 x, u128 y) {
  if (x != 0 && y > kU64Max / x) throw CapExceeded("walk count overflows 64 bits");
  return x * y;
}

u128 falling(std::int64_t top, int steps) {
  u128 out = 1;
  for (int s = 0; s < steps; ++s) {
    if (top - s <= 0) return 0;
    out = checked_mul(out, static_cast<u128>(top - s));
  }
  return out;
}

}  // namespace

std::uint64_t count_wedge_orderings(const WedgeComposition& comp) {
  // Build the multinomial as a product of binomials to stay exact.
  u128 out = 1;
  int placed = 0;
  auto place = [&](int c) {
    for (int s = 1; s <= c; ++s) {
      out = checked_mul(out, static_cast<u128>(placed + s));
      out /= static_cast<u128>(s);
    }
    placed += c;
  };
  for (int c : comp.k) place(c);
  place(comp.ell);
  return static_cast<std::uint64_t>(out);
}

std::vector<int> SelfAvoidingWalk::nodes() const {
  std::vector<int> out;
  out.reserve(interior.size() + 2);
  out.push_back(i1);
  out.insert(out.end(), interior.begin(), interior.end());
  out.push_back(i2);
  return out;
}

namespace detail {

namespace {

struct RepSearch {
  const Dataset& ds;
  int k;
  int m;
  CycleAnchor anchor;
  const RepVisitor& visit;
  std::vector<int> quota;  // per layer, then covariate last
  std::vector<int> nodes;
  std::vector<int> types;

  bool on_path(int v) const { return std::find(nodes.begin(), nodes.end(), v) != nodes.end(); }

  void close() {
    const int cur = nodes.back();
    const int root = nodes.front();
    for (int t = 0; t <= m; ++t) {
      if (quota[t] == 0) continue;
      if (t < m) {
        if (!ds.layers[t].has_edge(cur, root)) continue;
        // With two wedges both sit on the same node pair; the same layer
        // twice would reuse one factor node.
        if (k == 2 && types[0] == t) continue;
        types.push_back(t);
      } else {
        types.push_back(kCovariateWedge);
      }
      visit(nodes, types);
      types.pop_back();
    }
  }

  void step(int s) {
    if (s == k - 1) {
      close();
      return;
    }
    const int cur = nodes.back();
    const int root = nodes.front();
    const bool min_anchor = anchor == CycleAnchor::kMinNode;
    for (int t = 0; t <= m; ++t) {
      if (quota[t] == 0) continue;
      // Under kCovariateLast one covariate wedge is reserved for closing.
      if (t == m && !min_anchor && quota[t] == 1) continue;
      --quota[t];
      if (t < m) {
        types.push_back(t);
        for (int v : ds.layers[t].neighbors(cur)) {
          if ((min_anchor && v <= root) || on_path(v)) continue;
          nodes.push_back(v);
          step(s + 1);
          nodes.pop_back();
        }
      } else {
        types.push_back(kCovariateWedge);
        for (int v = min_anchor ? root + 1 : 0; v < ds.params.n; ++v) {
          if (on_path(v)) continue;
          nodes.push_back(v);
          step(s + 1);
          nodes.pop_back();
        }
      }
      types.pop_back();
      ++quota[t];
    }
  }
};

}  // namespace

void visit_cycle_representations(const Dataset& dataset, const WedgeComposition& comp,
                                 CycleAnchor anchor, const RepVisitor& visit) {
  validate_composition(comp, dataset.params.m);
  const int k = comp.total();
  if (k < 2) return;
  if (anchor == CycleAnchor::kCovariateLast && comp.ell == 0) {
    throw InvalidArgument("covariate-last anchoring needs at least one covariate wedge");
  }
  RepSearch search{dataset, k, dataset.params.m, anchor, visit, {}, {}, {}};
  search.quota = comp.k;
  search.quota.push_back(comp.ell);
  search.nodes.reserve(k);
  search.types.reserve(k);
  for (int root = 0; root < dataset.params.n; ++root) {
    search.nodes.assign(1, root);
    search.step(0);
  }
}

}  // namespace detail

namespace {

void check_cycle_caps(const WedgeComposition& comp, const EnumerationCaps& caps, int n) {
  if (comp.total() > caps.max_cycle_total || comp.ell > caps.max_cycle_ell) {
    std::ostringstream msg;
    msg << "composition " << comp.to_string() << " exceeds the cycle cap (total <= "
        << caps.max_cycle_total << ", ell <= " << caps.max_cycle_ell
        << "); enumeration costs O(n^" << comp.total() << ") with n = " << n;
    throw CapExceeded(msg.str());
  }
}

void check_endpoints(const Dataset& ds, int i1, int i2) {
  const int n = ds.params.n;
  if (i1 < 0 || i2 < 0 || i1 >= n || i2 >= n) throw InvalidArgument("walk endpoint out of range");
  if (i1 == i2) throw InvalidArgument("walk endpoints must differ");
}

}  // namespace

void enumerate_cycles(const Dataset& dataset, const WedgeComposition& comp,
                      const CycleVisitor& visit, const EnumerationCaps& caps) {
  validate_composition(comp, dataset.params.m);
  check_cycle_caps(comp, caps, dataset.params.n);
  const int k = comp.total();
  FactorCycle cycle;
  detail::visit_cycle_representations(
      dataset, comp, detail::CycleAnchor::kMinNode,
      [&](std::span<const int> nodes, std::span<const int> types) {
        // One orientation per cycle.
        if (k >= 3 && nodes[1] > nodes[k - 1]) return;
        if (k == 2 && types[0] < types[1]) return;
        cycle.nodes.assign(nodes.begin(), nodes.end());
        cycle.wedge_types.assign(types.begin(), types.end());
        visit(cycle);
      });
}

std::uint64_t count_saws(const Dataset& dataset, int i1, int i2, const WedgeComposition& comp,
                         const EnumerationCaps&) {
  validate_composition(comp, dataset.params.m);
  check_endpoints(dataset, i1, i2);
  const int k = comp.total();
  if (k < 1) throw InvalidArgument("a walk needs at least one wedge");
  u128 total = count_wedge_orderings(comp);
  total = checked_mul(total, falling(dataset.params.n - 2, k - 1));
  total = checked_mul(total, falling(dataset.params.p, comp.ell));
  return static_cast<std::uint64_t>(total);
}

void enumerate_saws(const Dataset& dataset, int i1, int i2, const WedgeComposition& comp,
                    const WalkVisitor& visit, const EnumerationCaps& caps) {
  const std::uint64_t size = count_saws(dataset, i1, i2, comp, caps);
  const int k = comp.total();
  if (k > caps.max_saw_total || static_cast<double>(size) > caps.max_saw_walks) {
    std::ostringstream msg;
    msg << "explicit walk enumeration of " << comp.to_string() << " would yield " << size
        << " walks (cap: total <= " << caps.max_saw_total << ", at most " << caps.max_saw_walks
        << " walks); use sampled mode";
    throw CapExceeded(msg.str());
  }
  const int n = dataset.params.n;
  const int p = dataset.params.p;
  SelfAvoidingWalk walk;
  walk.i1 = i1;
  walk.i2 = i2;
  std::vector<char> used_node(n, 0), used_factor(p, 0);
  used_node[i1] = used_node[i2] = 1;

  for (const auto& order : wedge_orderings(comp)) {
    walk.wedge_types = order;
    // Factor slots are filled after the node sequence is complete.
    std::function<void(int)> pick_factor = [&](int slot) {
      if (slot == comp.ell) {
        visit(walk);
        return;
      }
      for (int j = 0; j < p; ++j) {
        if (used_factor[j]) continue;
        used_factor[j] = 1;
        walk.b_factors.push_back(j);
        pick_factor(slot + 1);
        walk.b_factors.pop_back();
        used_factor[j] = 0;
      }
    };
    std::function<void(int)> pick_node = [&](int s) {
      if (s == k - 1) {
        pick_factor(0);
        return;
      }
      for (int v = 0; v < n; ++v) {
        if (used_node[v]) continue;
        used_node[v] = 1;
        walk.interior.push_back(v);
        pick_node(s + 1);
        walk.interior.pop_back();
        used_node[v] = 0;
      }
    };
    pick_node(0);
  }
}

std::vector<SelfAvoidingWalk> sample_saws(const Dataset& dataset, int i1, int i2,
                                          const WedgeComposition& comp, int n_samples,
                                          Stream& rng) {
  EnumerationCaps caps;
  if (count_saws(dataset, i1, i2, comp, caps) == 0) {
    throw InvalidArgument("no self-avoiding walks of composition " + comp.to_string() +
                          " between the given endpoints");
  }
  const int k = comp.total();
  const auto n = static_cast<std::uint64_t>(dataset.params.n);
  const auto p = static_cast<std::uint64_t>(dataset.params.p);
  const auto labels = comp.wedge_labels();

  // W is a product of (wedge orderings) x (ordered interior nodes) x
  // (ordered distinct factors), so drawing each part uniformly is uniform on W.
  std::vector<SelfAvoidingWalk> out(static_cast<std::size_t>(std::max(0, n_samples)));
  for (auto& walk : out) {
    walk.i1 = i1;
    walk.i2 = i2;
    walk.wedge_types = labels;
    for (int s = k - 1; s > 0; --s) {
      std::swap(walk.wedge_types[s], walk.wedge_types[rng.below(static_cast<std::uint64_t>(s) + 1)]);
    }
    walk.interior.clear();
    while (static_cast<int>(walk.interior.size()) < k - 1) {
      const int v = static_cast<int>(rng.below(n));
      if (v == i1 || v == i2 ||
          std::find(walk.interior.begin(), walk.interior.end(), v) != walk.interior.end()) {
        continue;
      }
      walk.interior.push_back(v);
    }
    walk.b_factors.clear();
    while (static_cast<int>(walk.b_factors.size()) < comp.ell) {
      const int j = static_cast<int>(rng.below(p));
      if (std::find(walk.b_factors.begin(), walk.b_factors.end(), j) != walk.b_factors.end()) {
        continue;
      }
      walk.b_factors.push_back(j);
    }
  }
  return out;
}

}  // namespace mlcsbm
