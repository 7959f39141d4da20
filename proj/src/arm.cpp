#include "cohortlens/arm.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>
#include <unordered_set>

#include "cohortlens/error.hpp"
#include "cohortlens/kernels.hpp"

namespace cohortlens::arm {

ItemMask mask_of(std::initializer_list<std::size_t> indices) {
  ItemMask m = 0;
  for (auto i : indices) m |= ItemMask{1} << i;
  return m;
}

ItemMask mask_of_ids(const std::vector<std::string>& ids) {
  ItemMask m = 0;
  for (const auto& id : ids) {
    auto idx = symptom_index(id);
    if (!idx) throw Error(ErrorCode::UnknownSymptom, "unknown symptom '" + id + "'");
    m |= ItemMask{1} << *idx;
  }
  return m;
}

std::vector<std::size_t> items_of(ItemMask mask) {
  std::vector<std::size_t> out;
  while (mask != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

std::vector<std::string> ids_of(ItemMask mask) {
  std::vector<std::string> out;
  for (auto i : items_of(mask)) out.emplace_back(symptoms()[i].id);
  return out;
}

int item_count(ItemMask mask) { return std::popcount(mask); }

std::strong_ordering Rational::operator<=>(const Rational& other) const {
  const __int128 lhs = static_cast<__int128>(num) * other.den;
  const __int128 rhs = static_cast<__int128>(other.num) * den;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

bool Rational::operator==(const Rational& other) const {
  return (*this <=> other) == std::strong_ordering::equal;
}

bool at_least(const Rational& value, double threshold) {
  const long double scaled = static_cast<long double>(threshold) * value.den;
  return static_cast<long double>(value.num) + 1e-9L >= scaled;
}

std::vector<ItemMask> TransactionSet::masks() const {
  std::vector<ItemMask> out;
  out.reserve(transactions.size());
  for (const auto& t : transactions) out.push_back(t.items);
  return out;
}

TransactionSet build_transactions(const CohortDataset& dataset, Phase phase,
                                  const TransactionOptions& options) {
  if (dataset.imputed()) {
    throw Error(ErrorCode::ImputedInputRejected,
                "association mining requires the raw (non-imputed) dataset");
  }
  if (options.presence_threshold < 1 || options.presence_threshold > 10) {
    throw Error(ErrorCode::InvalidArgument, "presence_threshold must be in 1..10");
  }
  std::vector<std::size_t> indices(phase_indices(phase).begin(), phase_indices(phase).end());
  if (phase == Phase::Acute && options.merge_baseline_into_acute) {
    indices.insert(indices.begin(), 0);
  }

  TransactionSet ts;
  for (std::size_t p = 0; p < dataset.size(); ++p) {
    for (auto t : indices) {
      if (!dataset.questionnaire_reported(p, t)) continue;
      ItemMask items = 0;
      for (std::size_t s = 0; s < kSymptomCount; ++s) {
        const auto& series = dataset.series(p, s);
        if (series.reported[t] && *series.values[t] >= options.presence_threshold) {
          items |= ItemMask{1} << s;
        }
      }
      if (items != 0) ts.transactions.push_back({dataset.patients()[p].patient_id, t, items});
    }
  }
  return ts;
}

TransactionSet from_masks(const std::vector<ItemMask>& masks) {
  TransactionSet ts;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    ts.transactions.push_back({"t" + std::to_string(i + 1), 0, masks[i]});
  }
  return ts;
}

std::uint32_t count_containing(ItemMask items, const TransactionSet& ts) {
  std::uint32_t n = 0;
  for (const auto& t : ts.transactions) n += (t.items & items) == items;
  return n;
}

Rational support(ItemMask items, const TransactionSet& ts) {
  if (ts.empty()) throw Error(ErrorCode::EmptyTransactionSet, "no transactions");
  if (items == 0) throw Error(ErrorCode::InvalidArgument, "itemset must be nonempty");
  return {count_containing(items, ts), static_cast<std::int64_t>(ts.size())};
}

Rational lift(ItemMask antecedent, ItemMask consequent, const TransactionSet& ts) {
  if (ts.empty()) throw Error(ErrorCode::EmptyTransactionSet, "no transactions");
  if (antecedent == 0 || consequent == 0) {
    throw Error(ErrorCode::InvalidArgument, "antecedent and consequent must be nonempty");
  }
  if ((antecedent & consequent) != 0) {
    throw Error(ErrorCode::InvalidArgument, "antecedent and consequent must be disjoint");
  }
  const std::int64_t cx = count_containing(antecedent, ts);
  const std::int64_t cy = count_containing(consequent, ts);
  if (cx == 0 || cy == 0) throw Error(ErrorCode::ZeroMarginalSupport, "marginal support is zero");
  const std::int64_t cxy = count_containing(antecedent | consequent, ts);
  // (cxy/N) / ((cx/N)(cy/N)) = cxy*N / (cx*cy)
  return {cxy * static_cast<std::int64_t>(ts.size()), cx * cy};
}

namespace {

bool items_less(ItemMask a, ItemMask b) {
  const int ca = item_count(a);
  const int cb = item_count(b);
  if (ca != cb) return ca < cb;
  const auto ia = items_of(a);
  const auto ib = items_of(b);
  return ia < ib;
}

}  // namespace

std::vector<ItemsetSupport> apriori_frequent_itemsets(const TransactionSet& ts,
                                                      double min_support,
                                                      std::size_t max_size) {
  if (ts.empty()) throw Error(ErrorCode::EmptyTransactionSet, "no transactions");
  if (!(min_support > 0.0 && min_support <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_support must be in (0, 1]");
  }
  const auto masks = ts.masks();
  const auto total = static_cast<std::uint32_t>(masks.size());
  ItemMask universe = 0;
  for (auto m : masks) universe |= m;

  std::vector<ItemsetSupport> result;
  std::vector<ItemMask> candidates;
  for (auto i : items_of(universe)) candidates.push_back(ItemMask{1} << i);

  std::size_t level = 1;
  while (!candidates.empty() && (max_size == 0 || level <= max_size)) {
    std::vector<std::uint32_t> counts(candidates.size());
    kernels::count_support(masks, candidates, counts);

    std::vector<ItemMask> frequent;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (at_least({counts[c], total}, min_support)) {
        frequent.push_back(candidates[c]);
        result.push_back({candidates[c], counts[c], total});
      }
    }

    // Join frequent (k)-sets that differ in one item, then prune any
    // candidate with an infrequent k-subset (downward closure).
    std::unordered_set<ItemMask> frequent_set(frequent.begin(), frequent.end());
    std::unordered_set<ItemMask> next;
    for (std::size_t a = 0; a < frequent.size(); ++a) {
      for (std::size_t b = a + 1; b < frequent.size(); ++b) {
        const ItemMask u = frequent[a] | frequent[b];
        if (static_cast<std::size_t>(item_count(u)) != level + 1 || next.contains(u)) continue;
        bool all_frequent = true;
        for (ItemMask rest = u; rest != 0 && all_frequent; rest &= rest - 1) {
          const ItemMask bit = rest & (~rest + 1);
          all_frequent = frequent_set.contains(u & ~bit);
        }
        if (all_frequent) next.insert(u);
      }
    }
    candidates.assign(next.begin(), next.end());
    std::sort(candidates.begin(), candidates.end(), items_less);
    ++level;
  }

  std::stable_sort(result.begin(), result.end(),
                   [](const ItemsetSupport& a, const ItemsetSupport& b) {
                     return items_less(a.items, b.items);
                   });
  return result;
}

bool rule_precedes(const AssociationRule& a, const AssociationRule& b) {
  if (auto c = a.support() <=> b.support(); c != 0) return c > 0;
  if (auto c = a.lift <=> b.lift; c != 0) return c > 0;
  const auto aa = items_of(a.antecedent);
  const auto ba = items_of(b.antecedent);
  if (aa != ba) return aa < ba;
  return items_of(a.consequent) < items_of(b.consequent);
}

std::vector<AssociationRule> generate_rules(const std::vector<ItemsetSupport>& frequent,
                                            const TransactionSet& ts, double min_lift,
                                            std::size_t top_k) {
  if (top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
  if (!(min_lift > 0.0)) throw Error(ErrorCode::InvalidArgument, "min_lift must be > 0");

  std::unordered_map<ItemMask, std::uint32_t> counts;
  for (const auto& f : frequent) counts.emplace(f.items, f.count);
  auto count_of = [&](ItemMask m) {
    if (auto it = counts.find(m); it != counts.end()) return it->second;
    const auto c = count_containing(m, ts);
    counts.emplace(m, c);
    return c;
  };
  const auto total = static_cast<std::int64_t>(ts.size());

  std::vector<AssociationRule> rules;
  for (const auto& f : frequent) {
    if (item_count(f.items) < 2) continue;
    // Enumerate nonempty proper submasks as antecedents.
    for (ItemMask x = (f.items - 1) & f.items; x != 0; x = (x - 1) & f.items) {
      const ItemMask y = f.items & ~x;
      const std::int64_t cx = count_of(x);
      const std::int64_t cy = count_of(y);
      if (cx == 0 || cy == 0) continue;
      AssociationRule r;
      r.antecedent = x;
      r.consequent = y;
      r.count = f.count;
      r.total = f.total;
      r.lift = {static_cast<std::int64_t>(f.count) * total, cx * cy};
      if (at_least(r.lift, min_lift)) rules.push_back(r);
    }
  }
  std::sort(rules.begin(), rules.end(), rule_precedes);
  if (rules.size() > top_k) rules.resize(top_k);
  for (std::size_t i = 0; i < rules.size(); ++i) rules[i].rule_id = static_cast<int>(i + 1);
  return rules;
}

void validate(const MiningParams& params) {
  if (!(params.min_support > 0.0 && params.min_support <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_support must be in (0, 1]");
  }
  if (!(params.min_lift > 0.0)) throw Error(ErrorCode::InvalidArgument, "min_lift must be > 0");
  if (params.top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
  if (params.presence_threshold < 1 || params.presence_threshold > 10) {
    throw Error(ErrorCode::InvalidArgument, "presence_threshold must be in 1..10");
  }
}

MiningResult mine_rules(const CohortDataset& raw, const MiningParams& params) {
  validate(params);
  MiningResult result;
  result.params = params;
  const auto ts = build_transactions(
      raw, params.phase, {params.presence_threshold, params.merge_baseline_into_acute});
  result.transaction_count = ts.size();
  if (ts.empty()) return result;
  const auto frequent = apriori_frequent_itemsets(ts, params.min_support, params.max_itemset_size);
  result.rules = generate_rules(frequent, ts, params.min_lift, params.top_k);
  return result;
}

}  // namespace cohortlens::arm
