#pragma once

// Rank-based desirability score tables keyed by (patients, toxicities, efficacies).

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace doseopt {

struct RdsKey {
  int n = 0;
  int n_tox = 0;
  int n_eff = 0;

  auto operator<=>(const RdsKey&) const = default;
};

struct RdsEntry {
  bool eliminated = false;
  int rds = 0;  // 0 for eliminated rows

  static RdsEntry scored(int rank) { return {false, rank}; }
  static RdsEntry elim() { return {true, 0}; }
  friend bool operator==(const RdsEntry&, const RdsEntry&) = default;
};

class RdsTable {
 public:
  using Rows = std::map<RdsKey, RdsEntry>;

  RdsTable() = default;
  explicit RdsTable(Rows rows) : rows_(std::move(rows)) {}

  void set(const RdsKey& key, RdsEntry entry) { rows_[key] = entry; }
  std::optional<RdsEntry> find(int n, int n_tox, int n_eff) const;
  const Rows& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }

  std::vector<int> n_values() const;
  int scored_rows() const;
  int eliminated_rows() const;

  // Table layout: one line per scored row; an eliminated family
  // "x_T >= k, any x_E" at fixed n collapses to "n,>=k,Any,E".
  std::string to_csv() const;
  // Accepts the collapsed families written by to_csv.
  static RdsTable from_csv(std::string_view text);

  // The published decision table for the default utility and limits
  // (cohorts of 3, up to 6 patients per dose).
  static const RdsTable& paper_fixture();
  static std::string_view paper_fixture_csv();

  friend bool operator==(const RdsTable&, const RdsTable&) = default;

 private:
  Rows rows_;
};

// Rows whose entries differ between two tables (keys present in either).
std::vector<RdsKey> table_mismatches(const RdsTable& a, const RdsTable& b);

// Competition ranks: rank = 1 + number of values strictly smaller.
std::vector<int> competition_ranks(const std::vector<double>& values);

}  // namespace doseopt
