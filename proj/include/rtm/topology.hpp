// Existence/uniqueness certificate layer: rectangle certificates in the
// (t, a) plane from signed edge evidence, the quantitative
// implicit-function-theorem region check, angle-threshold comparisons
// against 7 pi / 18, and assembly of the final periodicity certificate.
#pragma once

#include "rtm/exact.hpp"
#include "rtm/integrator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rtm::topology {

using exact::Ival;
using exact::Rat;

/// The exact rational constants the certificates are instantiated with.
struct ProofConstants {
    Rat a0, da, sa, b0, sb, t0, dt, st;
    static const ProofConstants& reference();
};

enum class Verdict { Pass, Fail, Inconclusive };

struct Inequality {
    std::string label;
    Rat lhs;
    std::string rel;   // "<", "<=", ">", ">="
    Rat rhs;
    bool holds = false;
};

enum class CertKind { Bound, Existence, Uniqueness, ThetaComparison, Periodicity };

struct Certificate {
    CertKind kind = CertKind::Bound;
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<Inequality> transcript;
    std::string summary;

    bool passed() const { return verdict == Verdict::Pass; }
};

/// Re-evaluate every transcript inequality from its stored exact operands.
bool reverify(const Certificate& cert);

Inequality check(std::string label, const Rat& lhs, const std::string& rel, const Rat& rhs);

// ---------------------------------------------------------------------------
// Poincaré–Miranda rectangle certificates

/// Rectangle [a_lo, a_hi] x [t_lo, t_hi] at a fixed third coordinate b.
struct PmRect {
    Rat b;
    Ival a_range;
    Ival t_range;
};

/// Which edge of the rectangle the evidence certifies, with the sign
/// pattern fixed by the zero-finding layout: the t-derivative of the first
/// coordinate is positive on the bottom edge and negative on the top, the
/// t-derivative of the third coordinate negative on the left edge and
/// positive on the right.
enum class EdgeSide { Bottom, Top, Left, Right };

/// Sign evidence at one corner, extended along the edge by a monotonicity
/// certificate: d/da for the Bottom/Top edges, d/dt for Left/Right.
struct EdgeEvidence {
    EdgeSide side;
    std::string run_id;
    Rat corner_a;          // parameter of the evidencing run
    Rat corner_t;          // end time of the evidencing run
    Ival enclosure;        // certified value enclosure (z +- error bound)
    int claimed_sign = 0;  // +1 or -1

    Rat margin() const { return claimed_sign > 0 ? enclosure.lo : -enclosure.hi; }
};

/// A certified sign of a directional derivative used to extend corner
/// evidence along an edge.
struct MonotonicityCert {
    std::string name;      // e.g. "dF_a > 0 over the window"
    int sign = 0;
    bool certified = false;
};

/// Existence certificate: a zero of the two edge functions inside the
/// rectangle, provided the four corner evidences carry strictly positive
/// margins and sit at the corners their monotonicity certificates require.
Certificate poincare_miranda_check(const PmRect& rect, const std::vector<EdgeEvidence>& edges,
                                   const MonotonicityCert& dF_da,
                                   const MonotonicityCert& dR_dt);

// ---------------------------------------------------------------------------
// Quantitative implicit-function-theorem region

struct IftParams {
    Rat delta1, delta1_t, eps1;
    Rat delta2, delta2_t, eps2;
    Rat eps1_t, eps2_t;         // half-sizes of the region in the first two axes
    Rat mu1, mu2, mu3;          // half-sizes of the box containing the known zero
    Rat slice_halfwidth;        // must stay below min(rho1, rho2)
};

struct IftDerivativeCert {
    std::string name;
    bool certified = false;
};

/// Uniqueness certificate: under the certified partial-derivative window
/// bounds, every slice of the region in the third axis carries exactly one
/// zero. Computes m1, m2, rho1, rho2 exactly and records every inequality.
struct IftResult {
    Certificate cert;
    Rat m1, m2, rho1, rho2;
};
IftResult ift_region_check(const IftParams& p, const std::vector<IftDerivativeCert>& bound_certs);

// ---------------------------------------------------------------------------
// Angle comparisons against 7 pi / 18

struct ThetaComparisonInput {
    std::string name;
    Ival center;               // certified enclosure of the angle at the rectangle center
    Rat theta_a_bound;         // certified |d theta / d a| over the window
    Rat theta_dot_bound;       // certified d theta / d t upper bound over the window
    Rat da_span, dt_span;      // rectangle half-widths around the center
    bool below = true;         // claim: angle < 7 pi/18 over the rectangle (else >)
    Ival seven_pi_18;          // certified enclosure of 7 pi / 18
};

Certificate theta_comparison(const ThetaComparisonInput& in);

// ---------------------------------------------------------------------------
// Final assembly

struct PeriodicityInputs {
    Certificate l1, l2, l3, l4;
    Certificate theta_below, theta_above;
    ProofConstants consts;
    Rat t_window_halfwidth;    // certified |t - t0| bound for the angle crossing
    Rat a_window_halfwidth;    // certified |a - a0| bound
};

/// Chains the three existence rectangles, the uniqueness region and the two
/// angle comparisons into the periodicity certificate with period 36 t-bar
/// and the rotation bookkeeping (9 cycles of 4 quarter-periods, 7 full
/// revolutions of the outer bodies).
Certificate assemble_periodicity(const PeriodicityInputs& in);

}  // namespace rtm::topology
