#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cohortlens/model.hpp"

namespace cohortlens::arm {

/// Set of items as a bitmask over manifest indices (28 symptoms fit in 32 bits).
using ItemMask = std::uint32_t;

ItemMask mask_of(std::initializer_list<std::size_t> indices);
/// Throws Error(UnknownSymptom) for an id outside the manifest.
ItemMask mask_of_ids(const std::vector<std::string>& ids);
std::vector<std::size_t> items_of(ItemMask mask);
std::vector<std::string> ids_of(ItemMask mask);
int item_count(ItemMask mask);

/// Exact non-negative ratio of two integer counts.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::strong_ordering operator<=>(const Rational& other) const;
  bool operator==(const Rational& other) const;
};

/// True when num/den >= threshold. The threshold is a decimal, so the
/// comparison allows 1e-9 absolute slack on the count scale to accept
/// thresholds that were produced by dividing the same integers.
bool at_least(const Rational& value, double threshold);

struct Transaction {
  std::string patient_id;
  std::size_t timepoint = 0;
  ItemMask items = 0;
};

struct TransactionSet {
  std::vector<Transaction> transactions;

  std::size_t size() const { return transactions.size(); }
  bool empty() const { return transactions.empty(); }
  std::vector<ItemMask> masks() const;
};

struct TransactionOptions {
  int presence_threshold = 1;
  /// Counts baseline questionnaires as part of the acute phase.
  bool merge_baseline_into_acute = false;
};

/// One transaction per reported questionnaire inside the phase, holding the
/// symptoms rated at or above the presence threshold. Requires raw data.
TransactionSet build_transactions(const CohortDataset& dataset, Phase phase,
                                  const TransactionOptions& options = {});

/// Wraps plain masks into a transaction set (fixtures, random tests).
TransactionSet from_masks(const std::vector<ItemMask>& masks);

std::uint32_t count_containing(ItemMask items, const TransactionSet& ts);
Rational support(ItemMask items, const TransactionSet& ts);
/// sigma(X u Y) / (sigma(X) * sigma(Y)).
Rational lift(ItemMask antecedent, ItemMask consequent, const TransactionSet& ts);

struct ItemsetSupport {
  ItemMask items = 0;
  std::uint32_t count = 0;
  std::uint32_t total = 0;

  Rational support() const { return {count, total}; }
  bool operator==(const ItemsetSupport&) const = default;
};

/// Level-wise Apriori. Returns every itemset with support >= min_support,
/// ordered by size then by item index list. max_size == 0 means unbounded.
std::vector<ItemsetSupport> apriori_frequent_itemsets(const TransactionSet& ts,
                                                      double min_support,
                                                      std::size_t max_size = 0);

struct AssociationRule {
  int rule_id = 0;
  ItemMask antecedent = 0;
  ItemMask consequent = 0;
  std::uint32_t count = 0;  // transactions containing antecedent and consequent
  std::uint32_t total = 0;
  Rational lift;

  Rational support() const { return {count, total}; }
  bool operator==(const AssociationRule&) const = default;
};

/// Strict weak order used for top-K: support desc, lift desc, then
/// antecedent and consequent item index lists ascending.
bool rule_precedes(const AssociationRule& a, const AssociationRule& b);

/// Every bipartition X -> Y of every frequent itemset of size >= 2, filtered
/// by min_lift, ranked, truncated to top_k, with rule_id = 1-based rank.
std::vector<AssociationRule> generate_rules(const std::vector<ItemsetSupport>& frequent,
                                            const TransactionSet& ts, double min_lift,
                                            std::size_t top_k);

struct MiningParams {
  Phase phase = Phase::Acute;
  double min_support = 0.30;
  double min_lift = 1.2;
  std::size_t top_k = 20;
  int presence_threshold = 1;
  std::size_t max_itemset_size = 4;
  bool merge_baseline_into_acute = false;
};

/// Validates the parameters; throws Error(InvalidArgument).
void validate(const MiningParams& params);

struct MiningResult {
  MiningParams params;
  std::size_t transaction_count = 0;
  std::vector<AssociationRule> rules;
};

/// Full pipeline over a raw dataset. An empty transaction set yields no rules.
MiningResult mine_rules(const CohortDataset& raw, const MiningParams& params);

}  // namespace cohortlens::arm
