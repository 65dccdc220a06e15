#pragma once

// Randomized multiple-dose stage: exact operating characteristics of the
// admissibility rule (x_E >= m_E and x_T <= m_T) and the minimal-n design search.

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace doseopt {

enum class T1eVariant { kPerDose, kFamilywiseAny };
enum class PowerVariant { kPerDose, kAllAdmissible, kAtLeastOne };

std::string to_string(T1eVariant v);
std::string to_string(PowerVariant v);
T1eVariant parse_t1e_variant(const std::string& s);
PowerVariant parse_power_variant(const std::string& s);

struct MeritSpec {
  double phi_t0 = 0.4;  // unacceptable toxicity
  double phi_t1 = 0.2;  // acceptable toxicity
  double phi_e0 = 0.1;  // unacceptable efficacy
  double phi_e1 = 0.3;  // target efficacy
  double alpha = 0.2;
  double beta_power = 0.7;
  int J = 2;
  T1eVariant t1e_variant = T1eVariant::kPerDose;
  // Defaults are the pair that best fits the published design table.
  PowerVariant power_variant = PowerVariant::kAllAdmissible;
  int n_max = 200;

  void validate() const;
};

struct MeritDesign {
  int n = 0;
  int m_t = 0;
  int m_e = 0;

  void validate() const;
  friend bool operator==(const MeritDesign&, const MeritDesign&) = default;
};

struct NullProfile {
  double pi_t;
  double pi_e;
};

// Doubly-bad, toxic-but-effective, safe-but-futile.
std::array<NullProfile, 3> null_profiles(const MeritSpec& s);

bool admissible(int x_e, int x_t, const MeritDesign& d);

// Pr(X_T <= m_T) * Pr(X_E >= m_E) with independent binomial counts.
double accept_prob(const MeritDesign& d, double pi_t, double pi_e);

double generalized_t1e(const MeritDesign& d, const MeritSpec& s);
double generalized_power(const MeritDesign& d, const MeritSpec& s);

struct MeritResult {
  MeritDesign design;
  double t1e = 0.0;
  double power = 0.0;
};

// Smallest n with a feasible (m_T, m_E); at that n the most powerful pair,
// ties to smaller m_T, then larger m_E. Throws kInfeasible past n_max.
MeritResult search(const MeritSpec& s);

// One cell of the published optimal-design table (two doses, phi_T = 0.4/0.2).
struct MeritTableCell {
  double phi_e0;
  double phi_e1;
  double alpha;
  double beta_power;
  MeritDesign published;
};

std::vector<MeritTableCell> paper_merit_table();
MeritSpec spec_for(const MeritTableCell& cell, T1eVariant t, PowerVariant p);

struct CellOutcome {
  MeritTableCell cell;
  std::optional<MeritResult> found;  // empty if infeasible
  bool matches() const { return found && found->design == cell.published; }
};

struct VariantFit {
  T1eVariant t1e;
  PowerVariant power;
  std::vector<CellOutcome> cells;
  int exact_matches() const;
  int n_matches() const;  // cells whose n alone agrees
};

// Every variant pair, best fit first (exact cells, then n-only cells).
std::vector<VariantFit> fit_merit_variants();
// The pair the engine uses by default: the best fit above.
VariantFit selected_merit_variant();

// Table layout CSV: phi_E0,phi_E1,beta,alpha,n,m_T,m_E (plus published columns).
std::string merit_table_csv(const VariantFit& fit);
// Markdown listing every variant's score and each non-matching cell of the selection.
std::string merit_discrepancy_report(const std::vector<VariantFit>& fits);

}  // namespace doseopt
