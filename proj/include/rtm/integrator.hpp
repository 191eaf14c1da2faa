// Grid-rounded Taylor integration of order m (m = 2 for the proof fields,
// m = 1 for the polynomial reproduction), with per-step rounding
// certificates, containment tracking, the rigorous global error bound, and
// the Gronwall-style comparison bound between nearby fields.
#pragma once

#include "rtm/fields.hpp"

#include <optional>
#include <vector>

namespace rtm::integrator {

using exact::GridSpec;
using exact::Ival;
using exact::Rat;
using fields::FieldSpec;

/// Constants feeding the global error bound: per-component bounds M_j on the
/// m-th derivative field, M0 on the field itself, K0/K1 on the Frobenius
/// norms of the first two derivative matrices.
struct HypothesisConstants {
    Rat M0;
    std::vector<Rat> M;
    Rat K0, K1;
    Rat M_rss;   // certified upper bound on sqrt(sum M_j^2)

    Rat lipschitz(const Rat& h, int order) const {   // L = K0 + K1 h/2 for m = 2
        return order >= 2 ? K0 + K1 * h / Rat(2) : K0;
    }
};

struct RunConfig {
    const FieldSpec* field = nullptr;
    Rat a;
    std::vector<Rat> initial_state;
    Rat t_end;                       // integration time; h = t_end / steps
    long steps = 0;
    GridSpec grid;                   // spacing 10^-q and rounding mode
    int order = 2;
    Rat epsilon = Rat(1, 1000);      // containment margin, must exceed M0 h + H~
    std::optional<HypothesisConstants> constants;   // enables certification
    bool check_containment = true;
    bool keep_sequence = true;
};

struct RunRecord {
    RunConfig cfg;
    std::vector<std::vector<Rat>> z;     // k+1 states (or first+last if !keep_sequence)
    std::vector<Rat> final_state;
    bool rounding_ok = true;
    bool containment_ok = true;
    long first_failure_step = -1;
    std::vector<Rat> min_margin;         // per component, distance to box boundary
    Rat H_tilde;                         // certified global error bound (if constants)
    bool epsilon_ok = false;             // epsilon > M0 h + H~
    bool certified = false;

    Rat step_size() const { return cfg.t_end / Rat(cfg.steps); }
};

/// Sound enclosure of one Taylor step z + f(z) h (+ F1(z) h^2/2 for order 2).
/// Components wider than `budget` trigger a retry with a finer square-root
/// width; failure past the retry cap raises.
std::vector<Ival> taylor_step(const FieldSpec& field, const std::vector<Rat>& z, const Rat& a,
                              const Rat& h, int order, const Rat& budget);

/// The full grid-rounded run. Deterministic: identical configs give
/// bit-identical records.
RunRecord round_taylor_run(const RunConfig& cfg);

/// H~ = (M h^m/(m+1)! + H/h)/L (e^{Lkh} - 1), a certified upper bound via
/// the rational majorant of exp. Under the containment and epsilon
/// hypotheses the true solution satisfies |Y(jh) - z_j| <= H~ for all j <= k.
Rat global_error_bound(const HypothesisConstants& c, const Rat& h, const Rat& H, long k,
                       int order, int exp_terms = 80);

/// Certified upper bound on d0 e^{K dt} + (eps/K)(e^{K dt} - 1): how far the
/// solutions of two fields within eps of each other, started d0 apart, can
/// drift over time dt when both derivative norms are below K.
Rat comparison_bound(const Rat& K, const Rat& eps_f, const Rat& d0, const Rat& dt_abs,
                     int exp_terms = 80);

/// Componentwise z_j +- H~: a sound enclosure of the true solution at t = jh.
std::vector<Ival> certified_state(const RunRecord& rec, long j);

}  // namespace rtm::integrator
