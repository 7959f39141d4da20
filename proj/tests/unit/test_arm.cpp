#include <doctest.h>

#include <random>

#include "cohortlens/arm.hpp"
#include "cohortlens/error.hpp"
#include "support.hpp"

using namespace cohortlens;
using namespace cohortlens::arm;

namespace {

ItemMask m(std::initializer_list<const char*> ids) {
  std::vector<std::string> v(ids.begin(), ids.end());
  return mask_of_ids(v);
}

}  // namespace

TEST_CASE("three-visit fixture: three acute transactions") {
  const auto d = support::three_visits_dataset();
  const auto ts = build_transactions(d, Phase::Acute);
  REQUIRE(ts.size() == 3);
  CHECK(ts.transactions[0].items == m({"fatigue", "drowsiness"}));
  CHECK(ts.transactions[1].items == m({"pain", "drowsiness"}));
  CHECK(ts.transactions[2].items == m({"fatigue", "pain", "swallow"}));
  CHECK(ts.transactions[0].timepoint == 1);

  CHECK(arm::support(m({"fatigue", "drowsiness"}), ts) == Rational{1, 3});
  CHECK(arm::support(m({"fatigue"}), ts) == Rational{2, 3});
  CHECK(lift(m({"fatigue"}), m({"drowsiness"}), ts) == Rational{3, 4});
  CHECK(lift(m({"fatigue", "pain"}), m({"swallow"}), ts) == Rational{3, 1});

  // Baseline wk0 has no present symptom, so it yields no transaction.
  CHECK(build_transactions(d, Phase::Baseline).empty());
  CHECK(build_transactions(d, Phase::Acute, {.merge_baseline_into_acute = true}).size() == 3);
}

TEST_CASE("three-visit fixture: frequent itemsets and rules agree with brute force") {
  const auto ts = build_transactions(support::three_visits_dataset(), Phase::Acute);
  const auto masks = ts.masks();
  const double min_support = 1.0 / 3.0;
  const auto freq = apriori_frequent_itemsets(ts, min_support);
  const auto oracle = support::brute_frequent(masks, min_support);
  REQUIRE(freq.size() == oracle.size());
  CHECK(freq.size() == 10);

  const auto rules = generate_rules(freq, ts, 0.0001, 1000);
  const auto brute = support::brute_rules(masks, min_support, 0.0001, 1000);
  REQUIRE(rules.size() == brute.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    CHECK(rules[i].rule_id == static_cast<int>(i + 1));
    CHECK(rules[i].antecedent == brute[i].antecedent);
    CHECK(rules[i].consequent == brute[i].consequent);
    CHECK(rules[i].count == brute[i].count);
    CHECK(rules[i].lift == Rational{static_cast<std::int64_t>(brute[i].lift_num),
                                    static_cast<std::int64_t>(brute[i].lift_den)});
  }
  const auto it = std::find_if(rules.begin(), rules.end(), [](const AssociationRule& r) {
    return r.antecedent == m({"fatigue", "pain"}) && r.consequent == m({"swallow"});
  });
  REQUIRE(it != rules.end());
  CHECK(it->lift == Rational{3, 1});
  CHECK(it->support() == Rational{1, 3});
}

TEST_CASE("Rational compares by value") {
  CHECK(Rational{1, 3} == Rational{2, 6});
  CHECK(Rational{1, 3} < Rational{1, 2});
  CHECK(Rational{3, 4} > Rational{2, 3});
  CHECK(at_least({1, 3}, 1.0 / 3.0));
  CHECK(at_least({1, 3}, 0.333333));
  CHECK_FALSE(at_least({1, 3}, 0.34));
}

TEST_CASE("Apriori equals brute-force enumeration on random transaction sets") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.05, 0.9);
  for (int iter = 0; iter < 100; ++iter) {
    const int items = 1 + static_cast<int>(rng() % 8);
    const auto tx = support::random_transactions(rng, items, 30);
    const double min_support = u(rng);
    const auto ts = from_masks(tx);
    const auto freq = apriori_frequent_itemsets(ts, min_support);
    const auto oracle = support::brute_frequent(tx, min_support);
    REQUIRE(freq.size() == oracle.size());
    for (const auto& o : oracle) {
      const auto f = std::find_if(freq.begin(), freq.end(), [&](const auto& x) { return x.items == o.mask; });
      REQUIRE(f != freq.end());
      CHECK(f->count == o.count);
      CHECK(f->total == tx.size());
    }
  }
}

TEST_CASE("frequent itemsets are ordered by size then index list and closed downward") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 30; ++iter) {
    const auto tx = support::random_transactions(rng, 8, 30);
    const auto freq = apriori_frequent_itemsets(from_masks(tx), 0.2);
    for (std::size_t i = 1; i < freq.size(); ++i) {
      const auto a = items_of(freq[i - 1].items);
      const auto b = items_of(freq[i].items);
      CHECK((a.size() < b.size() || (a.size() == b.size() && a < b)));
    }
    for (const auto& f : freq) {
      for (auto item : items_of(f.items)) {
        const ItemMask sub = f.items & ~(1u << item);
        if (sub == 0) continue;
        const auto s = std::find_if(freq.begin(), freq.end(), [&](const auto& x) { return x.items == sub; });
        REQUIRE(s != freq.end());
        // Anti-monotonicity.
        CHECK(s->count >= f.count);
      }
    }
  }
}

TEST_CASE("max itemset size bounds the search") {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 20; ++iter) {
    const auto tx = support::random_transactions(rng, 8, 30);
    const auto freq = apriori_frequent_itemsets(from_masks(tx), 0.1, 2);
    CHECK(freq.size() == support::brute_frequent(tx, 0.1, 2).size());
    for (const auto& f : freq) CHECK(item_count(f.items) <= 2);
  }
}

TEST_CASE("rules match brute-force bipartitions with ranking and top-k") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.1, 0.6);
  for (int iter = 0; iter < 60; ++iter) {
    const auto tx = support::random_transactions(rng, 2 + static_cast<int>(rng() % 7), 30);
    const double min_support = u(rng);
    const double min_lift = 0.5 + u(rng);
    const std::size_t top_k = 1 + rng() % 25;
    const auto ts = from_masks(tx);
    const auto rules = generate_rules(apriori_frequent_itemsets(ts, min_support), ts, min_lift, top_k);
    const auto brute = support::brute_rules(tx, min_support, min_lift, top_k);
    REQUIRE(rules.size() == brute.size());
    for (std::size_t i = 0; i < rules.size(); ++i) {
      CHECK(rules[i].antecedent == brute[i].antecedent);
      CHECK(rules[i].consequent == brute[i].consequent);
      CHECK(rules[i].count == brute[i].count);
      CHECK(at_least(rules[i].lift, min_lift));
      CHECK(at_least(rules[i].support(), min_support));
      CHECK((rules[i].antecedent & rules[i].consequent) == 0u);
    }
  }
}

TEST_CASE("lift is symmetric in antecedent and consequent") {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 200; ++iter) {
    const auto tx = support::random_transactions(rng, 6, 20);
    const auto ts = from_masks(tx);
    const ItemMask x = static_cast<ItemMask>(1 + rng() % 63);
    const ItemMask y = static_cast<ItemMask>(1 + rng() % 63) & ~x;
    if (y == 0 || count_containing(x, ts) == 0 || count_containing(y, ts) == 0) continue;
    CHECK(lift(x, y, ts) == lift(y, x, ts));
  }
}

TEST_CASE("lift rejects zero marginal support") {
  const auto ts = from_masks({0b01, 0b01});
  CHECK_THROWS_AS(lift(0b01, 0b10, ts), Error);
}

TEST_CASE("presence threshold selects items") {
  const auto d = support::three_visits_dataset();
  // wk1 fatigue=4 drowsiness=3; wk2 pain=5 drowsiness=2; wk3 fatigue=6 pain=3 swallow=7
  const auto ts = build_transactions(d, Phase::Acute, {.presence_threshold = 4});
  REQUIRE(ts.size() == 3);
  CHECK(ts.transactions[0].items == m({"fatigue"}));
  CHECK(ts.transactions[1].items == m({"pain"}));
  CHECK(ts.transactions[2].items == m({"fatigue", "swallow"}));
}

TEST_CASE("transactions require raw (unimputed) data") {
  const auto d = impute(support::three_visits_dataset());
  CHECK_THROWS_AS(build_transactions(d, Phase::Acute), Error);
  try {
    build_transactions(d, Phase::Acute);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ImputedInputRejected);
  }
}

TEST_CASE("mining parameter validation") {
  const auto d = support::three_visits_dataset();
  MiningParams p;
  p.top_k = 0;
  CHECK_THROWS_AS(mine_rules(d, p), Error);
  p = {};
  p.min_support = 0.0;
  CHECK_THROWS_AS(mine_rules(d, p), Error);
  p = {};
  p.min_support = 1.5;
  CHECK_THROWS_AS(mine_rules(d, p), Error);
  p = {};
  p.min_lift = 0.0;
  CHECK_THROWS_AS(mine_rules(d, p), Error);
}

TEST_CASE("mine_rules on the three-visit fixture with defaults") {
  MiningParams p;
  p.min_support = 1.0 / 3.0;
  p.min_lift = 1.2;
  const auto r = mine_rules(support::three_visits_dataset(), p);
  CHECK(r.transaction_count == 3);
  const auto brute = support::brute_rules(build_transactions(support::three_visits_dataset(), Phase::Acute).masks(),
                                          1.0 / 3.0, 1.2, 20, 4);
  REQUIRE(r.rules.size() == brute.size());
  for (std::size_t i = 0; i < brute.size(); ++i) {
    CHECK(r.rules[i].antecedent == brute[i].antecedent);
    CHECK(r.rules[i].consequent == brute[i].consequent);
  }
  // Late phase has no questionnaires: empty, not an error.
  p.phase = Phase::Late;
  const auto late = mine_rules(support::three_visits_dataset(), p);
  CHECK(late.transaction_count == 0);
  CHECK(late.rules.empty());
}

TEST_CASE("mask helpers") {
  CHECK(mask_of({0, 3}) == 0b1001u);
  CHECK(items_of(0b1001u) == std::vector<std::size_t>{0, 3});
  CHECK(ids_of(mask_of({0, 3})) == std::vector<std::string>{"fatigue", "pain"});
  CHECK(item_count(0b1011u) == 3);
  CHECK_THROWS_AS(mask_of_ids({"nope"}), Error);
}
