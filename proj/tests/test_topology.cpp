#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rtm/topology.hpp"

#include <random>

using namespace rtm::topology;
using rtm::exact::Ival;
using rtm::exact::Rat;

namespace {

// Synthetic edge evidence for f1 = -(t - t*) + 0.3 (a - a*),
// f2 = 2 (a - a*) + 0.1 (t - t*): a known zero at (a*, t*), f1 decreasing
// in t and increasing in a, f2 increasing in both.
struct Synthetic {
    Rat a_star = Rat(1, 3), t_star = Rat(2, 7);
    Rat f1(const Rat& a, const Rat& t) const {
        return -(t - t_star) + Rat(3, 10) * (a - a_star);
    }
    Rat f2(const Rat& a, const Rat& t) const {
        return Rat(2) * (a - a_star) + Rat(1, 10) * (t - t_star);
    }
};

std::vector<EdgeEvidence> synthetic_edges(const Synthetic& s, const PmRect& r, const Rat& err) {
    // f1 increasing in a: bottom evidence at (a_lo, t_lo), top at (a_hi, t_hi);
    // f2 increasing in t: left evidence at (a_lo, t_hi), right at (a_hi, t_lo)
    auto enc = [&](const Rat& v) { return Ival(v - err, v + err); };
    return {
        {EdgeSide::Bottom, "syn_bottom", r.a_range.lo, r.t_range.lo,
         enc(s.f1(r.a_range.lo, r.t_range.lo)), +1},
        {EdgeSide::Top, "syn_top", r.a_range.hi, r.t_range.hi,
         enc(s.f1(r.a_range.hi, r.t_range.hi)), -1},
        {EdgeSide::Left, "syn_left", r.a_range.lo, r.t_range.hi,
         enc(s.f2(r.a_range.lo, r.t_range.hi)), -1},
        {EdgeSide::Right, "syn_right", r.a_range.hi, r.t_range.lo,
         enc(s.f2(r.a_range.hi, r.t_range.lo)), +1},
    };
}

IftParams reference_ift_params() {
    auto c = ProofConstants::reference();
    IftParams p;
    p.delta1 = Rat::parse("1017/1250");
    p.delta1_t = Rat::parse("8159/10000");
    p.eps1 = Rat::parse("2677/5000");
    p.delta2 = Rat::parse("16181/10000");
    p.delta2_t = Rat::parse("8359/5000");
    p.eps2 = Rat::parse("4549/5000");
    p.eps1_t = Rat(6) * (c.st + c.dt);
    p.eps2_t = Rat(3) * (c.sa + c.da);
    p.mu1 = c.dt;
    p.mu2 = c.da;
    p.mu3 = Rat(0);
    p.slice_halfwidth = c.sb;
    return p;
}

std::vector<IftDerivativeCert> all_certified() {
    return {{"d1", true}, {"d2", true}, {"d3", true}, {"d4", true}, {"d5", true}, {"d6", true}};
}

}  // namespace

TEST_CASE("reference constants") {
    auto c = ProofConstants::reference();
    CHECK(c.a0 == Rat::parse("43170475352787/10000000000000"));
    CHECK(c.t0 == Rat::parse("13366894627923/5000000000000"));
    CHECK(c.sb == Rat(1, 50000));
    CHECK(c.st == Rat(11, 2000000));
}

TEST_CASE("poincare_miranda_check on the synthetic zero") {
    Synthetic s;
    PmRect rect{Rat(0), Ival(s.a_star - Rat(1, 100), s.a_star + Rat(1, 100)),
                Ival(s.t_star - Rat(1, 100), s.t_star + Rat(1, 100))};
    MonotonicityCert ma{"df1/da > 0", +1, true};
    MonotonicityCert mt{"df2/dt > 0", +1, true};

    auto edges = synthetic_edges(s, rect, Rat(1, 100000));
    Certificate ok = poincare_miranda_check(rect, edges, ma, mt);
    CHECK(ok.verdict == Verdict::Pass);
    CHECK(reverify(ok));

    // brute-force oracle: dense sign sampling along every edge agrees with
    // the evidence-extension reasoning
    for (int k = 0; k <= 50; ++k) {
        Rat t = rect.t_range.lo + Rat(k, 50) * rect.t_range.width();
        CHECK(s.f2(rect.a_range.lo, t) < Rat(0));
        CHECK(s.f2(rect.a_range.hi, t) > Rat(0));
        Rat a = rect.a_range.lo + Rat(k, 50) * rect.a_range.width();
        CHECK(s.f1(a, rect.t_range.lo) > Rat(0));
        CHECK(s.f1(a, rect.t_range.hi) < Rat(0));
    }

    // one flipped sign breaks the pattern
    auto flipped = edges;
    flipped[0].claimed_sign = -1;
    Certificate bad = poincare_miranda_check(rect, flipped, ma, mt);
    CHECK(bad.verdict == Verdict::Fail);

    // missing monotonicity downgrades to inconclusive
    Certificate inc = poincare_miranda_check(rect, edges, MonotonicityCert{"", +1, false}, mt);
    CHECK(inc.verdict == Verdict::Inconclusive);

    // zero-margin evidence cannot pass
    auto hollow = synthetic_edges(s, rect, Rat(1, 100000));
    hollow[0].enclosure = Ival(Rat(0), Rat(1, 50));
    Certificate zero_margin = poincare_miranda_check(rect, hollow, ma, mt);
    CHECK(zero_margin.verdict == Verdict::Fail);

    // evidence corner on the wrong side of the rectangle is rejected
    auto misplaced = synthetic_edges(s, rect, Rat(1, 100000));
    misplaced[3].corner_t = rect.t_range.hi;   // right edge needs t at or before t_lo
    Certificate mis = poincare_miranda_check(rect, misplaced, ma, mt);
    CHECK(mis.verdict == Verdict::Fail);
}

TEST_CASE("ift_region_check with the reference constants") {
    auto r = ift_region_check(reference_ift_params(), all_certified());
    CHECK(r.cert.verdict == Verdict::Pass);
    CHECK(reverify(r.cert));

    // independent re-derivation of the fractions
    auto p = reference_ift_params();
    Rat den = p.delta1 * p.delta2 - p.eps1 * p.eps2;
    CHECK(r.m1 == p.eps1 * (p.delta2_t + p.eps2) / den);
    CHECK(r.m2 == p.eps2 * (p.delta1_t + p.eps1) / den);
    CHECK(r.m1 == Rat::parse("34554716/20734481"));
    CHECK(r.m2 == Rat::parse("61470637/41468962"));
    CHECK(r.rho1 == Rat::parse("20734481/987277600000"));
    CHECK(r.rho2 == Rat::parse("75867465979/3073531850000000"));
    CHECK(p.slice_halfwidth < r.rho1);
    CHECK(p.slice_halfwidth < r.rho2);
}

TEST_CASE("ift_region_check failure paths") {
    auto p = reference_ift_params();
    p.eps1 = Rat(2);
    p.eps2 = Rat(2);   // eps1 eps2 >= delta1 delta2
    auto bad = ift_region_check(p, all_certified());
    CHECK(bad.cert.verdict == Verdict::Fail);

    auto q = reference_ift_params();
    auto missing = all_certified();
    missing[2].certified = false;
    CHECK(ift_region_check(q, missing).cert.verdict == Verdict::Inconclusive);

    auto r = reference_ift_params();
    r.slice_halfwidth = Rat(1, 10);
    CHECK(ift_region_check(r, all_certified()).cert.verdict == Verdict::Fail);
}

TEST_CASE("ift region verdict is invariant under row rescaling") {
    std::mt19937_64 rng(1213);
    std::uniform_int_distribution<long> cs(1, 12);
    for (int i = 0; i < 100; ++i) {
        Rat cscale(cs(rng), cs(rng) % 4 + 1);
        auto p = reference_ift_params();
        auto scaled = p;
        scaled.delta1 = cscale * p.delta1;
        scaled.delta1_t = cscale * p.delta1_t;
        scaled.eps1 = cscale * p.eps1;
        auto base = ift_region_check(p, all_certified());
        auto other = ift_region_check(scaled, all_certified());
        // the slopes are scale-free, so the region fractions agree exactly
        CHECK(base.m2 == other.m2);
        CHECK(base.rho2 == other.rho2);
        CHECK(base.m1 == other.m1);
        CHECK(base.rho1 == other.rho1);
    }
}

TEST_CASE("theta comparisons") {
    Ival seven_pi_18 = rtm::exact::pi_enclosure(Rat::pow10(-20)).scaled(Rat(7, 18));

    // zero spans and a point center reduce to the bare comparison
    ThetaComparisonInput in;
    in.name = "point";
    in.center = Ival(Rat::parse("122172921709501/100000000000000"));
    in.theta_a_bound = Rat(0);
    in.theta_dot_bound = Rat(0);
    in.da_span = Rat(0);
    in.dt_span = Rat(0);
    in.below = true;
    in.seven_pi_18 = seven_pi_18;
    CHECK(theta_comparison(in).verdict == Verdict::Pass);

    ThetaComparisonInput above = in;
    above.center = Ival(Rat::parse("24434637066123/20000000000000"));
    above.below = false;
    CHECK(theta_comparison(above).verdict == Verdict::Pass);

    // the full rectangle versions with the certified spreads
    auto c = ProofConstants::reference();
    ThetaComparisonInput low;
    low.name = "low slice";
    low.center = Ival(Rat::parse("122172912224601/100000000000000")).widened(Rat::parse("94849/1000000000000"));
    low.theta_a_bound = Rat::parse("5362/100000");
    low.theta_dot_bound = Rat::parse("483453/1000000");
    low.da_span = c.da;
    low.dt_span = c.dt;
    low.below = true;
    low.seven_pi_18 = seven_pi_18;
    CHECK(theta_comparison(low).verdict == Verdict::Pass);

    ThetaComparisonInput high = low;
    high.name = "high slice";
    high.center = Ival(Rat::parse("24434635169083/20000000000000")).widened(Rat::parse("23713/250000000000"));
    high.below = false;
    CHECK(theta_comparison(high).verdict == Verdict::Pass);

    // a too-wide threshold enclosure is refused rather than guessed
    ThetaComparisonInput vague = in;
    vague.seven_pi_18 = Ival(Rat(1), Rat(2));
    CHECK(theta_comparison(vague).verdict == Verdict::Inconclusive);
}

TEST_CASE("periodicity assembly") {
    auto c = ProofConstants::reference();
    Certificate pass_cert;
    pass_cert.verdict = Verdict::Pass;
    pass_cert.name = "stub";

    PeriodicityInputs in{pass_cert, pass_cert, pass_cert, pass_cert, pass_cert, pass_cert,
                         c, Rat(6) * (c.st + c.dt), Rat(3) * (c.sa + c.da)};
    Certificate ok = assemble_periodicity(in);
    CHECK(ok.verdict == Verdict::Pass);
    CHECK(reverify(ok));
    CHECK(ok.summary.find("36 t-bar") != std::string::npos);

    // uniqueness is what links the rectangles; losing it fails the chain
    Certificate fail_cert;
    fail_cert.verdict = Verdict::Fail;
    PeriodicityInputs broken = in;
    broken.l4 = fail_cert;
    CHECK(assemble_periodicity(broken).verdict == Verdict::Fail);

    // rotation bookkeeping: 36 quarter-turns of 7pi/18 are exactly 7 turns
    Rat turns = Rat(36) * Rat(7, 18) / Rat(2);
    CHECK(turns == Rat(7));
}

TEST_CASE("transcripts re-verify and detect tampering") {
    auto r = ift_region_check(reference_ift_params(), all_certified());
    CHECK(reverify(r.cert));
    auto tampered = r.cert;
    tampered.transcript[0].lhs = tampered.transcript[0].rhs + Rat(1);
    CHECK_FALSE(reverify(tampered));
}
