#include "doseopt/merit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "doseopt/error.hpp"
#include "doseopt/special.hpp"

namespace doseopt {

std::string to_string(T1eVariant v) {
  return v == T1eVariant::kPerDose ? "per_dose" : "familywise_any";
}

std::string to_string(PowerVariant v) {
  switch (v) {
    case PowerVariant::kPerDose: return "per_dose";
    case PowerVariant::kAllAdmissible: return "all_admissible";
    case PowerVariant::kAtLeastOne: return "at_least_one";
  }
  return "?";
}

T1eVariant parse_t1e_variant(const std::string& s) {
  if (s == "per_dose") return T1eVariant::kPerDose;
  if (s == "familywise_any") return T1eVariant::kFamilywiseAny;
  throw Error(ErrorCode::kValidation, "unknown type I error variant '" + s + "'", "t1e_variant");
}

PowerVariant parse_power_variant(const std::string& s) {
  if (s == "per_dose") return PowerVariant::kPerDose;
  if (s == "all_admissible") return PowerVariant::kAllAdmissible;
  if (s == "at_least_one") return PowerVariant::kAtLeastOne;
  throw Error(ErrorCode::kValidation, "unknown power variant '" + s + "'", "power_variant");
}

void MeritSpec::validate() const {
  auto prob = [](double p, const char* field) {
    require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidProbability,
            std::string(field) + " must lie in [0, 1]", field);
  };
  prob(phi_t0, "phi_T0");
  prob(phi_t1, "phi_T1");
  prob(phi_e0, "phi_E0");
  prob(phi_e1, "phi_E1");
  require(phi_t1 < phi_t0, ErrorCode::kValidation, "phi_T1 must be below phi_T0", "phi_T1");
  require(phi_e0 < phi_e1, ErrorCode::kValidation, "phi_E0 must be below phi_E1", "phi_E0");
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::kValidation, "alpha must lie in (0, 1)", "alpha");
  require(beta_power > 0.0 && beta_power < 1.0, ErrorCode::kValidation,
          "power target must lie in (0, 1)", "beta");
  require(J >= 1, ErrorCode::kValidation, "J must be at least 1", "J");
  require(n_max >= 1, ErrorCode::kValidation, "n_max must be at least 1", "n_max");
}

void MeritDesign::validate() const {
  require(n >= 1, ErrorCode::kValidation, "n must be at least 1", "n");
  require(m_t >= 0 && m_t <= n, ErrorCode::kValidation, "m_T must lie in [0, n]", "m_T");
  // m_E = n + 1 is the never-accept design.
  require(m_e >= 0 && m_e <= n + 1, ErrorCode::kValidation, "m_E must lie in [0, n+1]", "m_E");
}

std::array<NullProfile, 3> null_profiles(const MeritSpec& s) {
  return {{{s.phi_t0, s.phi_e0}, {s.phi_t0, s.phi_e1}, {s.phi_t1, s.phi_e0}}};
}

bool admissible(int x_e, int x_t, const MeritDesign& d) { return x_e >= d.m_e && x_t <= d.m_t; }

double accept_prob(const MeritDesign& d, double pi_t, double pi_e) {
  d.validate();
  return binom_cdf(d.m_t, d.n, pi_t) * binom_survival(d.m_e, d.n, pi_e);
}

namespace {

double t1e_from(double worst, const MeritSpec& s) {
  return s.t1e_variant == T1eVariant::kPerDose ? worst : 1.0 - std::pow(1.0 - worst, s.J);
}

double power_from(double p, const MeritSpec& s) {
  switch (s.power_variant) {
    case PowerVariant::kPerDose: return p;
    case PowerVariant::kAllAdmissible: return std::pow(p, s.J);
    case PowerVariant::kAtLeastOne: return 1.0 - std::pow(1.0 - p, s.J);
  }
  return p;
}

}  // namespace

double generalized_t1e(const MeritDesign& d, const MeritSpec& s) {
  s.validate();
  double worst = 0.0;
  for (const NullProfile& np : null_profiles(s)) {
    worst = std::max(worst, accept_prob(d, np.pi_t, np.pi_e));
  }
  return t1e_from(worst, s);
}

double generalized_power(const MeritDesign& d, const MeritSpec& s) {
  s.validate();
  return power_from(accept_prob(d, s.phi_t1, s.phi_e1), s);
}

MeritResult search(const MeritSpec& s) {
  s.validate();
  for (int n = 1; n <= s.n_max; ++n) {
    // Tables agree entry by entry with the scalar kernels behind accept_prob.
    const auto ft0 = binom_cdf_table(n, s.phi_t0);
    const auto ft1 = binom_cdf_table(n, s.phi_t1);
    const auto se0 = binom_survival_table(n, s.phi_e0);
    const auto se1 = binom_survival_table(n, s.phi_e1);
    std::optional<MeritResult> best;
    for (int mt = 0; mt <= n; ++mt) {
      for (int me = n; me >= 0; --me) {
        const double worst =
            std::max({ft0[mt] * se0[me], ft0[mt] * se1[me], ft1[mt] * se0[me]});
        const double t1e = t1e_from(worst, s);
        if (t1e > s.alpha) continue;
        const double power = power_from(ft1[mt] * se1[me], s);
        if (power < s.beta_power) continue;
        // Strictly greater keeps the earliest pair: smaller m_T, then larger m_E.
        if (!best || power > best->power) best = MeritResult{{n, mt, me}, t1e, power};
      }
    }
    if (best) return *best;
  }
  std::ostringstream msg;
  msg << "no design with n <= " << s.n_max << " meets type I error " << s.alpha << " and power "
      << s.beta_power;
  throw Error(ErrorCode::kInfeasible, msg.str(), "n_max");
}

std::vector<MeritTableCell> paper_merit_table() {
  struct Row {
    double e0, e1, beta;
    MeritDesign a10, a20;
  };
  static const Row rows[] = {
      {0.1, 0.3, 0.6, {25, 6, 5}, {18, 5, 4}},    {0.1, 0.3, 0.7, {33, 8, 6}, {24, 7, 5}},
      {0.1, 0.3, 0.8, {39, 11, 8}, {30, 8, 5}},   {0.2, 0.4, 0.6, {26, 7, 9}, {18, 5, 6}},
      {0.2, 0.4, 0.7, {34, 9, 11}, {25, 7, 8}},   {0.2, 0.4, 0.8, {45, 12, 14}, {35, 10, 10}},
      {0.3, 0.5, 0.6, {28, 7, 12}, {19, 5, 8}},   {0.3, 0.5, 0.7, {37, 10, 16}, {28, 8, 12}},
      {0.3, 0.5, 0.8, {44, 12, 18}, {34, 10, 14}}, {0.4, 0.6, 0.6, {28, 7, 15}, {19, 5, 10}},
      {0.4, 0.6, 0.7, {38, 10, 20}, {25, 7, 13}}, {0.4, 0.6, 0.8, {46, 13, 24}, {32, 9, 16}},
  };
  std::vector<MeritTableCell> out;
  for (const Row& r : rows) {
    out.push_back({r.e0, r.e1, 0.1, r.beta, r.a10});
    out.push_back({r.e0, r.e1, 0.2, r.beta, r.a20});
  }
  return out;
}

MeritSpec spec_for(const MeritTableCell& cell, T1eVariant t, PowerVariant p) {
  MeritSpec s;
  s.phi_t0 = 0.4;
  s.phi_t1 = 0.2;
  s.phi_e0 = cell.phi_e0;
  s.phi_e1 = cell.phi_e1;
  s.alpha = cell.alpha;
  s.beta_power = cell.beta_power;
  s.J = 2;
  s.t1e_variant = t;
  s.power_variant = p;
  return s;
}

int VariantFit::exact_matches() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(),
                                        [](const CellOutcome& c) { return c.matches(); }));
}

int VariantFit::n_matches() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const CellOutcome& c) {
    return c.found && c.found->design.n == c.cell.published.n;
  }));
}

std::vector<VariantFit> fit_merit_variants() {
  std::vector<VariantFit> fits;
  for (T1eVariant t : {T1eVariant::kPerDose, T1eVariant::kFamilywiseAny}) {
    for (PowerVariant p :
         {PowerVariant::kPerDose, PowerVariant::kAllAdmissible, PowerVariant::kAtLeastOne}) {
      VariantFit fit{t, p, {}};
      for (const MeritTableCell& cell : paper_merit_table()) {
        CellOutcome outcome{cell, std::nullopt};
        try {
          outcome.found = search(spec_for(cell, t, p));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kInfeasible) throw;
        }
        fit.cells.push_back(outcome);
      }
      fits.push_back(std::move(fit));
    }
  }
  std::stable_sort(fits.begin(), fits.end(), [](const VariantFit& a, const VariantFit& b) {
    if (a.exact_matches() != b.exact_matches()) return a.exact_matches() > b.exact_matches();
    return a.n_matches() > b.n_matches();
  });
  return fits;
}

VariantFit selected_merit_variant() { return fit_merit_variants().front(); }

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

std::string merit_table_csv(const VariantFit& fit) {
  std::ostringstream out;
  out << "phi_E0,phi_E1,beta,alpha,n,m_T,m_E,published_n,published_m_T,published_m_E,match\n";
  for (const CellOutcome& c : fit.cells) {
    out << fmt("%.1f", c.cell.phi_e0) << ',' << fmt("%.1f", c.cell.phi_e1) << ','
        << fmt("%.1f", c.cell.beta_power) << ',' << fmt("%.1f", c.cell.alpha) << ',';
    if (c.found) {
      out << c.found->design.n << ',' << c.found->design.m_t << ',' << c.found->design.m_e;
    } else {
      out << "NA,NA,NA";
    }
    out << ',' << c.cell.published.n << ',' << c.cell.published.m_t << ','
        << c.cell.published.m_e << ',' << (c.matches() ? "yes" : "no") << '\n';
  }
  return out.str();
}

std::string merit_discrepancy_report(const std::vector<VariantFit>& fits) {
  std::ostringstream out;
  out << "# Randomized-stage design table: variant fit\n\n";
  out << "| type I error | power | exact cells | n-only cells |\n|---|---|---|---|\n";
  for (const VariantFit& f : fits) {
    out << "| " << to_string(f.t1e) << " | " << to_string(f.power) << " | " << f.exact_matches()
        << "/" << f.cells.size() << " | " << f.n_matches() << "/" << f.cells.size() << " |\n";
  }
  if (fits.empty()) return out.str();
  const VariantFit& sel = fits.front();
  out << "\nSelected: " << to_string(sel.t1e) << " / " << to_string(sel.power) << "\n\n";
  out << "## Non-matching cells under the selection\n\n";
  out << "| phi_E0 | phi_E1 | alpha | beta | published | found | t1e | power |\n"
      << "|---|---|---|---|---|---|---|---|\n";
  for (const CellOutcome& c : sel.cells) {
    if (c.matches()) continue;
    out << "| " << fmt("%.1f", c.cell.phi_e0) << " | " << fmt("%.1f", c.cell.phi_e1) << " | "
        << fmt("%.1f", c.cell.alpha) << " | " << fmt("%.1f", c.cell.beta_power) << " | ("
        << c.cell.published.n << "," << c.cell.published.m_t << "," << c.cell.published.m_e
        << ") | ";
    if (c.found) {
      out << "(" << c.found->design.n << "," << c.found->design.m_t << "," << c.found->design.m_e
          << ") | " << fmt("%.4f", c.found->t1e) << " | " << fmt("%.4f", c.found->power) << " |\n";
    } else {
      out << "infeasible | | |\n";
    }
  }
  out << "\n## Published designs evaluated under the selection\n\n"
      << "| phi_E0 | alpha | beta | published | t1e | power | feasible |\n"
      << "|---|---|---|---|---|---|---|\n";
  for (const CellOutcome& c : sel.cells) {
    const MeritSpec s = spec_for(c.cell, sel.t1e, sel.power);
    const double t = generalized_t1e(c.cell.published, s);
    const double p = generalized_power(c.cell.published, s);
    out << "| " << fmt("%.1f", c.cell.phi_e0) << " | " << fmt("%.1f", c.cell.alpha) << " | "
        << fmt("%.1f", c.cell.beta_power) << " | (" << c.cell.published.n << ","
        << c.cell.published.m_t << "," << c.cell.published.m_e << ") | " << fmt("%.4f", t)
        << " | " << fmt("%.4f", p) << " | "
        << (t <= s.alpha && p >= s.beta_power ? "yes" : "no") << " |\n";
  }
  return out.str();
}

}  // namespace doseopt
