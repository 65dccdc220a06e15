#include "doseopt/rds_table.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "doseopt/error.hpp"

namespace doseopt {

namespace {

constexpr std::string_view kPaperCsv =
    "n,n_tox,n_eff,rds\n"
    "0,0,0,24\n"
    "3,0,0,13\n3,0,1,22\n3,0,2,31\n3,0,3,38\n"
    "3,1,0,9\n3,1,1,17\n3,1,2,25\n3,1,3,33\n"
    "3,2,0,4\n3,2,1,11\n3,2,2,19\n3,2,3,29\n"
    "3,>=3,Any,E\n"
    "6,0,0,7\n6,0,1,14\n6,0,2,20\n6,0,3,27\n6,0,4,34\n6,0,5,39\n6,0,6,41\n"
    "6,1,0,5\n6,1,1,10\n6,1,2,16\n6,1,3,23\n6,1,4,30\n6,1,5,36\n6,1,6,40\n"
    "6,2,0,2\n6,2,1,6\n6,2,2,12\n6,2,3,18\n6,2,4,26\n6,2,5,32\n6,2,6,37\n"
    "6,3,0,1\n6,3,1,3\n6,3,2,7\n6,3,3,14\n6,3,4,20\n6,3,5,27\n6,3,6,34\n"
    "6,>=4,Any,E\n";

int parse_int(std::string_view s, int line, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  require(ec == std::errc{} && ptr == s.data() + s.size(), ErrorCode::kValidation,
          "line " + std::to_string(line) + ": bad " + what + " '" + std::string(s) + "'", what);
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::optional<RdsEntry> RdsTable::find(int n, int n_tox, int n_eff) const {
  auto it = rows_.find({n, n_tox, n_eff});
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> RdsTable::n_values() const {
  std::set<int> ns;
  for (const auto& [key, entry] : rows_) ns.insert(key.n);
  return {ns.begin(), ns.end()};
}

int RdsTable::scored_rows() const {
  return static_cast<int>(std::count_if(rows_.begin(), rows_.end(),
                                        [](const auto& kv) { return !kv.second.eliminated; }));
}

int RdsTable::eliminated_rows() const { return static_cast<int>(rows_.size()) - scored_rows(); }

std::string RdsTable::to_csv() const {
  std::ostringstream out;
  out << "n,n_tox,n_eff,rds\n";
  for (int n : n_values()) {
    // Smallest k such that every row with x_T >= k is eliminated.
    int family_start = n + 1;
    for (int t = n; t >= 0; --t) {
      bool all_elim = true;
      for (int e = 0; e <= n && all_elim; ++e) {
        auto entry = find(n, t, e);
        all_elim = entry && entry->eliminated;
      }
      if (!all_elim) break;
      family_start = t;
    }
    for (const auto& [key, entry] : rows_) {
      if (key.n != n || key.n_tox >= family_start) continue;
      out << key.n << ',' << key.n_tox << ',' << key.n_eff << ',';
      if (entry.eliminated) {
        out << "E\n";
      } else {
        out << entry.rds << '\n';
      }
    }
    if (family_start <= n) out << n << ",>=" << family_start << ",Any,E\n";
  }
  return out.str();
}

RdsTable RdsTable::from_csv(std::string_view text) {
  RdsTable table;
  int line_no = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line_no == 1) continue;
    auto fields = split(line);
    require(fields.size() == 4, ErrorCode::kValidation,
            "line " + std::to_string(line_no) + ": expected 4 fields", "csv");
    const int n = parse_int(fields[0], line_no, "n");
    if (fields[1].starts_with(">=")) {
      const int k = parse_int(fields[1].substr(2), line_no, "n_tox");
      require(fields[2] == "Any" && fields[3] == "E", ErrorCode::kValidation,
              "line " + std::to_string(line_no) + ": a >= family must be 'Any,E'", "csv");
      for (int t = k; t <= n; ++t) {
        for (int e = 0; e <= n; ++e) table.set({n, t, e}, RdsEntry::elim());
      }
      continue;
    }
    const int t = parse_int(fields[1], line_no, "n_tox");
    const int e = parse_int(fields[2], line_no, "n_eff");
    require(n >= 0 && t >= 0 && t <= n && e >= 0 && e <= n, ErrorCode::kValidation,
            "line " + std::to_string(line_no) + ": counts out of range", "csv");
    if (fields[3] == "E") {
      table.set({n, t, e}, RdsEntry::elim());
    } else {
      const int rank = parse_int(fields[3], line_no, "rds");
      require(rank >= 1, ErrorCode::kValidation,
              "line " + std::to_string(line_no) + ": rds must be positive", "csv");
      table.set({n, t, e}, RdsEntry::scored(rank));
    }
  }
  return table;
}

std::string_view RdsTable::paper_fixture_csv() { return kPaperCsv; }

const RdsTable& RdsTable::paper_fixture() {
  static const RdsTable table = from_csv(kPaperCsv);
  return table;
}

std::vector<RdsKey> table_mismatches(const RdsTable& a, const RdsTable& b) {
  std::vector<RdsKey> out;
  for (const auto& [key, entry] : a.rows()) {
    auto other = b.find(key.n, key.n_tox, key.n_eff);
    if (!other || *other != entry) out.push_back(key);
  }
  for (const auto& [key, entry] : b.rows()) {
    if (!a.find(key.n, key.n_tox, key.n_eff)) out.push_back(key);
  }
  return out;
}

std::vector<int> competition_ranks(const std::vector<double>& values) {
  std::vector<size_t> order(values.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t x, size_t y) { return values[x] < values[y]; });
  std::vector<int> ranks(values.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) ranks[order[k]] = static_cast<int>(i) + 1;
    i = j;
  }
  return ranks;
}

}  // namespace doseopt
