#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sel/rates.hpp"

namespace sel {

struct ExponentQuad {
    double p = 0.0, q = 0.0, r = 0.0, s = 0.0;

    double det() const { return (1.0 + p) * (1.0 + s) - q * r; }
    // Sum forms by default; product_form gives (p+q)min{..} and (r+s)min{..}.
    double alpha(bool product_form = false) const;
    double beta(bool product_form = false) const;
    ExponentQuad swapped() const { return {s, r, q, p}; }
    void validate() const;  // p, s >= 0 and q, r > 0
};

enum class NonexistenceCase { N1, N2, N3, N4 };
enum class ExistenceCase { E1, E2, E3 };
enum class Subcase { I, II, III, IV, V, VI, case3 };

std::string to_string(NonexistenceCase c);
std::string to_string(ExistenceCase c);
std::string to_string(Subcase c);

struct RegimeReport {
    ExponentQuad quad;
    double det = 0.0, alpha = 0.0, beta = 0.0;
    double alpha_product = 0.0, beta_product = 0.0;

    bool n1 = false, n2 = false, n3 = false, n4 = false;
    bool e1 = false, e2 = false, e3 = false;
    std::optional<NonexistenceCase> nonexistence;  // first condition that fires
    std::optional<ExistenceCase> existence;        // first case that holds
    std::optional<Subcase> subcase_u;              // subcase of E1, seen from u
    std::optional<Subcase> subcase_v;              // subcase of E2, seen from v
    std::optional<Subcase> subcase;                // the one belonging to `existence`

    bool u_c1 = false, v_c1 = false, both_c1 = false;
    bool unique = false;

    std::optional<RateSpec> rate_u, rate_v;
    bool alpha_variant_disagrees = false;
    std::vector<std::string> notes;

    bool undetermined() const { return !nonexistence && !existence; }
};

RegimeReport classify(const ExponentQuad& quad, double A = 2.0);

// Boundary rate of F(D^2u) = delta^-q_eff log^-a_eff(A/delta) u^-p_eff.
// Throws Infeasible when no solution exists (q_eff > 2, or q_eff = 2, a <= 1).
RateSpec predicted_rate(double p_eff, double q_eff, double A = 2.0, double a_eff = 0.0);

struct SweepRange {
    double lo = 0.0, hi = 0.0, step = 1.0;
    std::vector<double> values() const;
};

// Quads with q = 0 or r = 0 are skipped since the theorems need q, r > 0.
std::vector<RegimeReport> sweep(const SweepRange& p, const SweepRange& q, const SweepRange& r,
                                const SweepRange& s);

void write_sweep_csv(std::ostream& os, const std::vector<RegimeReport>& rows);

}  // namespace sel
