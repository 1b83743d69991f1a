#include "sel/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sel/errors.hpp"

namespace sel {

namespace {

// Decimal sweeps land on the theorem boundaries only up to rounding, so all
// comparisons go through a small absolute slack.
constexpr double kTie = 1e-12;
bool eq(double a, double b) { return std::abs(a - b) <= kTie; }
bool lt(double a, double b) { return a < b - kTie; }
bool gt(double a, double b) { return a > b + kTie; }
bool le(double a, double b) { return !gt(a, b); }
bool ge(double a, double b) { return !lt(a, b); }

double capped(double num, double den) { return std::min(1.0, num / den); }

// Subcases of the first existence case, written for the u equation.
std::optional<Subcase> subcase_of(const ExponentQuad& x) {
    const double rs = x.r + x.s;
    const double a = x.alpha();
    if (gt(rs, 1.0)) {
        if (lt(a, 1.0)) return Subcase::I;
        if (eq(a, 1.0)) return Subcase::V;
    } else if (eq(rs, 1.0)) {
        if (lt(a, 1.0)) return Subcase::II;
        if (eq(a, 1.0)) return Subcase::VI;
    } else {
        if (lt(a, 1.0)) return Subcase::III;
        if (eq(a, 1.0)) return Subcase::IV;
    }
    return std::nullopt;
}

bool existence_verdict(const ExponentQuad& x, double alpha, double beta) {
    if (!gt(x.det(), 0.0)) return false;
    return (le(alpha, 1.0) && lt(x.r, 2.0)) || (le(beta, 1.0) && lt(x.q, 2.0)) ||
           (ge(x.p, 1.0) && ge(x.s, 1.0) && lt(x.q, 2.0) && lt(x.r, 2.0));
}

struct Branch {
    double rho_u, rho_v;
};

// Self-consistent boundary powers: u sees delta^-(q rho_v), v sees
// delta^-(r rho_u), each reacting by the scalar trichotomy.
std::optional<Branch> bootstrap(const ExponentQuad& x) {
    const double det = x.det();
    const Branch candidates[] = {
        {1.0, 1.0},
        {1.0, (2.0 - x.r) / (1.0 + x.s)},
        {(2.0 - x.q) / (1.0 + x.p), 1.0},
        {2.0 * (1.0 + x.s - x.q) / det, 2.0 * (1.0 + x.p - x.r) / det},
    };
    const bool linear_u[] = {true, true, false, false};
    const bool linear_v[] = {true, false, true, false};
    for (int k = 0; k < 4; ++k) {
        const auto& b = candidates[k];
        if (!(b.rho_u > 0.0 && b.rho_v > 0.0)) continue;
        const double su = x.p + x.q * b.rho_v;
        const double sv = x.s + x.r * b.rho_u;
        if (ge(x.q * b.rho_v, 2.0) || ge(x.r * b.rho_u, 2.0)) continue;
        if ((linear_u[k] ? le(su, 1.0) : gt(su, 1.0)) && (linear_v[k] ? le(sv, 1.0) : gt(sv, 1.0)))
            return b;
    }
    return std::nullopt;
}

}  // namespace

double ExponentQuad::alpha(bool product_form) const {
    const double m = capped(2.0 - r, 1.0 + s);
    return product_form ? (p + q) * m : p + q * m;
}

double ExponentQuad::beta(bool product_form) const {
    const double m = capped(2.0 - q, 1.0 + p);
    return product_form ? (r + s) * m : s + r * m;
}

void ExponentQuad::validate() const {
    if (!(p >= 0.0 && s >= 0.0)) throw PreconditionError("exponents need p >= 0 and s >= 0");
    if (!(q > 0.0 && r > 0.0)) throw PreconditionError("exponents need q > 0 and r > 0");
    if (!std::isfinite(p + q + r + s)) throw PreconditionError("exponents must be finite");
}

std::string to_string(NonexistenceCase c) {
    static const char* names[] = {"N1", "N2", "N3", "N4"};
    return names[static_cast<int>(c)];
}

std::string to_string(ExistenceCase c) {
    static const char* names[] = {"E1", "E2", "E3"};
    return names[static_cast<int>(c)];
}

std::string to_string(Subcase c) {
    static const char* names[] = {"I", "II", "III", "IV", "V", "VI", "case3"};
    return names[static_cast<int>(c)];
}

RateSpec predicted_rate(double p, double q, double A, double a) {
    if (!(p >= 0.0) || !(q >= 0.0)) throw PreconditionError("predicted_rate needs p, q >= 0");
    RateSpec rs;
    rs.scale_A = A;
    if (gt(q, 2.0)) throw Infeasible("no solution: weight exponent q_eff = " + std::to_string(q) + " exceeds 2");
    if (eq(q, 2.0)) {
        if (le(a, 1.0))
            throw Infeasible("no solution: q_eff = 2 needs a log exponent a > 1, got " + std::to_string(a));
        rs.model = RateModel::power_of_log;
        rs.power = 0.0;
        rs.logpow = (1.0 - a) / (1.0 + p);
        return rs;
    }
    const double sum = p + q;
    if (lt(sum, 1.0)) {
        rs.model = RateModel::linear;
    } else if (eq(sum, 1.0)) {
        if (lt(a, 1.0)) {
            rs.model = RateModel::linear_logpow;
            rs.logpow = (1.0 - a) / (1.0 + p);
        } else if (eq(a, 1.0) && eq(p, 0.0)) {
            rs.model = RateModel::loglog;
        } else {
            throw UnsupportedRegime("p + q_eff = 1 with log exponent a >= 1 has no predicted rate");
        }
    } else {
        rs.model = RateModel::power;
        rs.power = (2.0 - q) / (1.0 + p);
    }
    return rs;
}

RegimeReport classify(const ExponentQuad& x, double A) {
    x.validate();
    RegimeReport rep;
    rep.quad = x;
    rep.det = x.det();
    rep.alpha = x.alpha();
    rep.beta = x.beta();
    rep.alpha_product = x.alpha(true);
    rep.beta_product = x.beta(true);
    const double det = rep.det;

    rep.n1 = ge(x.r * capped(2.0 - x.q, 1.0 + x.p), 2.0);
    rep.n2 = ge(x.q * capped(2.0 - x.r, 1.0 + x.s), 2.0);
    rep.n3 = gt(x.p, std::max(1.0, x.r - 1.0)) && gt(2.0 * x.r, (1.0 - x.s) * (1.0 + x.p)) &&
             gt(x.q * (1.0 + x.p - x.r), (1.0 + x.p) * (1.0 + x.s));
    rep.n4 = gt(x.s, std::max(1.0, x.q - 1.0)) && gt(2.0 * x.q, (1.0 - x.p) * (1.0 + x.s)) &&
             gt(x.r * (1.0 + x.s - x.q), (1.0 + x.p) * (1.0 + x.s));
    if (rep.n1) rep.nonexistence = NonexistenceCase::N1;
    else if (rep.n2) rep.nonexistence = NonexistenceCase::N2;
    else if (rep.n3) rep.nonexistence = NonexistenceCase::N3;
    else if (rep.n4) rep.nonexistence = NonexistenceCase::N4;

    const bool det_ok = gt(det, 0.0);
    rep.e1 = det_ok && le(rep.alpha, 1.0) && lt(x.r, 2.0);
    rep.e2 = det_ok && le(rep.beta, 1.0) && lt(x.q, 2.0);
    rep.e3 = det_ok && ge(x.p, 1.0) && ge(x.s, 1.0) && lt(x.q, 2.0) && lt(x.r, 2.0);
    if (rep.e1) rep.subcase_u = subcase_of(x);
    if (rep.e2) rep.subcase_v = subcase_of(x.swapped());
    if (rep.e1) {
        rep.existence = ExistenceCase::E1;
        rep.subcase = rep.subcase_u;
    } else if (rep.e2) {
        rep.existence = ExistenceCase::E2;
        rep.subcase = rep.subcase_v;
    } else if (rep.e3) {
        rep.existence = ExistenceCase::E3;
        rep.subcase = Subcase::case3;
    }
    if (rep.nonexistence && rep.existence)
        rep.notes.push_back("finding: both " + to_string(*rep.nonexistence) + " and " +
                            to_string(*rep.existence) + " fire");
    if (rep.existence == ExistenceCase::E1 && rep.subcase == Subcase::V)
        rep.notes.push_back("alpha = 1 with r + s > 1: existence without C1, subcase V needs a with a r + s > 1");
    if (rep.existence == ExistenceCase::E2 && rep.subcase == Subcase::V)
        rep.notes.push_back("beta = 1 with p + q > 1: existence without C1, mirrored subcase V");

    rep.u_c1 = det_ok && lt(rep.alpha, 1.0) && lt(x.r, 2.0);
    rep.v_c1 = det_ok && lt(rep.beta, 1.0) && lt(x.q, 2.0);
    rep.both_c1 = det_ok && lt(x.p + x.q, 1.0) && lt(x.r + x.s, 1.0);
    rep.unique = det_ok && ((lt(x.p + x.q, 1.0) && lt(x.r, 2.0)) || (lt(x.r + x.s, 1.0) && lt(x.q, 2.0)));

    rep.alpha_variant_disagrees =
        existence_verdict(x, rep.alpha, rep.beta) != existence_verdict(x, rep.alpha_product, rep.beta_product);
    if (rep.alpha_variant_disagrees)
        rep.notes.push_back("product-form alpha/beta give a different existence verdict");

    if (rep.existence && det_ok) {
        if (const auto b = bootstrap(x)) {
            // Log corrections appear only on the borderline components; they
            // feed each other through the weights v^-q and u^-r.
            const bool bu = eq(x.p + x.q * b->rho_v, 1.0) && eq(b->rho_u, 1.0);
            const bool bv = eq(x.s + x.r * b->rho_u, 1.0) && eq(b->rho_v, 1.0);
            double lu = 0.0, lv = 0.0;
            if (bu && bv) {
                // lu (1+p) + q lv = 1, lv (1+s) + r lu = 1
                lu = (1.0 + x.s - x.q) / det;
                lv = (1.0 + x.p - x.r) / det;
            } else if (bu) {
                lu = 1.0 / (1.0 + x.p);
            } else if (bv) {
                lv = 1.0 / (1.0 + x.s);
            }
            auto make = [&](double rho, double l, bool border) {
                RateSpec rs;
                rs.scale_A = A;
                if (lt(rho, 1.0)) {
                    rs.model = RateModel::power;
                    rs.power = rho;
                } else if (border && !eq(l, 0.0)) {
                    rs.model = RateModel::linear_logpow;
                    rs.logpow = l;
                } else {
                    rs.model = RateModel::linear;
                }
                return rs;
            };
            rep.rate_u = make(b->rho_u, lu, bu);
            rep.rate_v = make(b->rho_v, lv, bv);
        } else {
            rep.notes.push_back("no self-consistent rate branch");
        }
    }
    return rep;
}

std::vector<double> SweepRange::values() const {
    if (!(step > 0.0)) throw PreconditionError("sweep step must be positive");
    if (hi < lo) throw PreconditionError("sweep range has hi < lo");
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) v.push_back(lo + i * step);
    return v;
}

std::vector<RegimeReport> sweep(const SweepRange& p, const SweepRange& q, const SweepRange& r,
                                const SweepRange& s) {
    std::vector<RegimeReport> out;
    const auto P = p.values(), Q = q.values(), R = r.values(), S = s.values();
    for (double a : P)
        for (double b : Q)
            for (double c : R)
                for (double d : S) {
                    if (a < 0.0 || d < 0.0 || b <= 0.0 || c <= 0.0) continue;
                    out.push_back(classify({a, b, c, d}));
                }
    return out;
}

namespace {
std::string opt_str(const auto& o) { return o ? to_string(*o) : std::string(); }
}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<RegimeReport>& rows) {
    os << "p,q,r,s,det,alpha,beta,alpha_product,beta_product,nonexistence,existence,subcase,"
          "u_c1,v_c1,both_c1,unique,alpha_variant_disagrees,"
          "rate_u_model,rate_u_power,rate_u_logpow,rate_v_model,rate_v_power,rate_v_logpow\n";
    const auto old = os.precision(12);
    for (const auto& r : rows) {
        os << r.quad.p << ',' << r.quad.q << ',' << r.quad.r << ',' << r.quad.s << ',' << r.det << ','
           << r.alpha << ',' << r.beta << ',' << r.alpha_product << ',' << r.beta_product << ','
           << opt_str(r.nonexistence) << ',' << opt_str(r.existence) << ',' << opt_str(r.subcase) << ','
           << r.u_c1 << ',' << r.v_c1 << ',' << r.both_c1 << ',' << r.unique << ','
           << r.alpha_variant_disagrees;
        for (const auto& rate : {r.rate_u, r.rate_v}) {
            if (rate) os << ',' << to_string(rate->model) << ',' << rate->power << ',' << rate->logpow;
            else os << ",,,";
        }
        os << '\n';
    }
    os.precision(old);
}

}  // namespace sel
