#include "rtm/topology.hpp"

#include <algorithm>

namespace rtm::topology {

const ProofConstants& ProofConstants::reference() {
    static const ProofConstants c = [] {
        ProofConstants p;
        p.a0 = Rat::parse("43170475352787/10000000000000");
        p.da = Rat::parse("17/50000000");
        p.sa = Rat::parse("1197/100000000");
        p.b0 = Rat::parse("1490359743/1000000000");
        p.sb = Rat::parse("1/50000");
        p.t0 = Rat::parse("13366894627923/5000000000000");
        p.dt = Rat::parse("1/2500000");
        p.st = Rat::parse("11/2000000");
        return p;
    }();
    return c;
}

Inequality check(std::string label, const Rat& lhs, const std::string& rel, const Rat& rhs) {
    bool holds = false;
    if (rel == "<") holds = lhs < rhs;
    else if (rel == "<=") holds = lhs <= rhs;
    else if (rel == ">") holds = lhs > rhs;
    else if (rel == ">=") holds = lhs >= rhs;
    else throw std::invalid_argument("check: bad relation " + rel);
    return Inequality{std::move(label), lhs, rel, rhs, holds};
}

bool reverify(const Certificate& cert) {
    for (const auto& q : cert.transcript) {
        Inequality again = check(q.label, q.lhs, q.rel, q.rhs);
        if (again.holds != q.holds) return false;
        if (cert.verdict == Verdict::Pass && !again.holds) return false;
    }
    return true;
}

namespace {

Verdict fold(const std::vector<Inequality>& transcript) {
    return std::all_of(transcript.begin(), transcript.end(),
                       [](const Inequality& q) { return q.holds; })
               ? Verdict::Pass
               : Verdict::Fail;
}

}  // namespace

Certificate poincare_miranda_check(const PmRect& rect, const std::vector<EdgeEvidence>& edges,
                                   const MonotonicityCert& dF_da,
                                   const MonotonicityCert& dR_dt) {
    Certificate cert;
    cert.kind = CertKind::Existence;
    cert.name = "poincare_miranda b=" + rect.b.str();

    bool seen[4] = {false, false, false, false};
    for (const auto& e : edges) seen[static_cast<int>(e.side)] = true;
    if (!(seen[0] && seen[1] && seen[2] && seen[3])) {
        cert.verdict = Verdict::Inconclusive;
        cert.summary = "missing edge evidence";
        return cert;
    }
    if (!dF_da.certified || !dR_dt.certified || dF_da.sign <= 0 || dR_dt.sign <= 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.summary = "monotonicity certificates missing (need " + dF_da.name + " and " +
                       dR_dt.name + " positive)";
        return cert;
    }

    for (const auto& e : edges) {
        std::string tag;
        int want_sign = 0;
        switch (e.side) {
            case EdgeSide::Bottom: tag = "bottom"; want_sign = +1; break;
            case EdgeSide::Top: tag = "top"; want_sign = -1; break;
            case EdgeSide::Left: tag = "left"; want_sign = -1; break;
            case EdgeSide::Right: tag = "right"; want_sign = +1; break;
        }
        if (e.claimed_sign != want_sign) {
            cert.transcript.push_back(
                check(tag + " edge: evidence sign matches the rectangle pattern", Rat(0), "<", Rat(0)));
            continue;
        }
        // strict sign margin of the enclosure
        if (want_sign > 0)
            cert.transcript.push_back(check(tag + " edge value > 0 (run " + e.run_id + ")",
                                            Rat(0), "<", e.enclosure.lo));
        else
            cert.transcript.push_back(check(tag + " edge value < 0 (run " + e.run_id + ")",
                                            e.enclosure.hi, "<", Rat(0)));
        // corner placement so the monotone extension covers the whole edge
        switch (e.side) {
            case EdgeSide::Bottom:   // value increasing in a: corner at or below a_lo
                cert.transcript.push_back(check("bottom corner at the low-a end",
                                                e.corner_a, "<=", rect.a_range.lo));
                cert.transcript.push_back(check("bottom corner on the t_lo edge",
                                                e.corner_t, "<=", rect.t_range.lo));
                break;
            case EdgeSide::Top:      // value increasing in a: corner at or above a_hi
                cert.transcript.push_back(check("top corner at the high-a end",
                                                rect.a_range.hi, "<=", e.corner_a));
                cert.transcript.push_back(check("top corner on the t_hi edge",
                                                rect.t_range.hi, "<=", e.corner_t));
                break;
            case EdgeSide::Left:     // value increasing in t: corner at or above t_hi
                cert.transcript.push_back(check("left corner at the a_lo end",
                                                e.corner_a, "<=", rect.a_range.lo));
                cert.transcript.push_back(check("left corner at or beyond t_hi",
                                                rect.t_range.hi, "<=", e.corner_t));
                break;
            case EdgeSide::Right:    // value increasing in t: corner at or below t_lo
                cert.transcript.push_back(check("right corner at the a_hi end",
                                                rect.a_range.hi, "<=", e.corner_a));
                cert.transcript.push_back(check("right corner at or before t_lo",
                                                e.corner_t, "<=", rect.t_range.lo));
                break;
        }
    }

    cert.verdict = fold(cert.transcript);
    cert.summary = cert.verdict == Verdict::Pass
                       ? "zero of both edge functions inside [" + rect.a_range.str() + "] x [" +
                             rect.t_range.str() + "] at b = " + rect.b.str()
                       : "edge condition failed";
    return cert;
}

IftResult ift_region_check(const IftParams& p, const std::vector<IftDerivativeCert>& bound_certs) {
    IftResult out;
    Certificate& cert = out.cert;
    cert.kind = CertKind::Uniqueness;
    cert.name = "ift_region";

    for (const auto& b : bound_certs) {
        if (!b.certified) {
            cert.verdict = Verdict::Inconclusive;
            cert.summary = "derivative window not certified: " + b.name;
            return out;
        }
    }

    Rat num = p.delta1 * p.delta2;
    Rat cross = p.eps1 * p.eps2;
    cert.transcript.push_back(check("delta1 delta2 > eps1 eps2", cross, "<", num));
    if (!cert.transcript.back().holds) {
        cert.verdict = Verdict::Fail;
        cert.summary = "dominant-diagonal condition failed";
        return out;
    }
    Rat den = num - cross;
    out.m1 = p.eps1 * (p.delta2_t + p.eps2) / den;
    out.m2 = p.eps2 * (p.delta1_t + p.eps1) / den;
    out.rho1 = (p.eps1_t - p.mu1) / out.m1 - p.mu3;
    out.rho2 = (p.eps2_t - p.mu2) / out.m2 - p.mu3;

    cert.transcript.push_back(check("mu1 < eps1", p.mu1, "<", p.eps1));
    cert.transcript.push_back(check("eps1 < delta1", p.eps1, "<", p.delta1));
    cert.transcript.push_back(check("mu2 < eps2", p.mu2, "<", p.eps2));
    cert.transcript.push_back(check("eps2 < delta2", p.eps2, "<", p.delta2));
    cert.transcript.push_back(check("rho1 > 0", Rat(0), "<", out.rho1));
    cert.transcript.push_back(check("rho2 > 0", Rat(0), "<", out.rho2));
    cert.transcript.push_back(check("slice halfwidth < rho1", p.slice_halfwidth, "<", out.rho1));
    cert.transcript.push_back(check("slice halfwidth < rho2", p.slice_halfwidth, "<", out.rho2));

    cert.verdict = fold(cert.transcript);
    cert.summary = cert.verdict == Verdict::Pass
                       ? "one zero per slice: m1 = " + out.m1.str() + ", m2 = " + out.m2.str() +
                             ", rho1 = " + out.rho1.str() + ", rho2 = " + out.rho2.str()
                       : "region inequality failed";
    return out;
}

Certificate theta_comparison(const ThetaComparisonInput& in) {
    Certificate cert;
    cert.kind = CertKind::ThetaComparison;
    cert.name = in.name;

    if (in.seven_pi_18.width() >= Rat(1, 1000000)) {
        cert.verdict = Verdict::Inconclusive;
        cert.summary = "threshold enclosure too wide to decide";
        return cert;
    }
    Rat spread = in.theta_a_bound * in.da_span + in.theta_dot_bound * in.dt_span;
    if (in.below) {
        cert.transcript.push_back(check("center.hi + |theta_a| da + theta_dot dt < 7pi/18",
                                        in.center.hi + spread, "<", in.seven_pi_18.lo));
    } else {
        cert.transcript.push_back(check("center.lo - |theta_a| da - theta_dot dt > 7pi/18",
                                        in.seven_pi_18.hi, "<", in.center.lo - spread));
    }
    cert.verdict = fold(cert.transcript);
    cert.summary = cert.verdict == Verdict::Pass
                       ? std::string("angle stays ") + (in.below ? "below" : "above") +
                             " the threshold over the whole rectangle"
                       : "comparison failed";
    return cert;
}

Certificate assemble_periodicity(const PeriodicityInputs& in) {
    Certificate cert;
    cert.kind = CertKind::Periodicity;
    cert.name = "periodicity";

    auto req = [&](const Certificate& c, const char* what) {
        cert.transcript.push_back(check(std::string(what) + " certificate passed",
                                        Rat(c.passed() ? 1 : 0), ">=", Rat(1)));
    };
    req(in.l1, "central rectangle existence");
    req(in.l2, "low-slice rectangle existence");
    req(in.l3, "high-slice rectangle existence");
    req(in.l4, "slice uniqueness");
    req(in.theta_below, "angle-below");
    req(in.theta_above, "angle-above");

    // The unique zero curve crosses every slice; the angle passes from below
    // to above the threshold along it, so some point attains it exactly.
    // Window bookkeeping for the crossing point:
    Rat t_window = Rat(6) * (in.consts.st + in.consts.dt);
    Rat a_window = Rat(3) * (in.consts.sa + in.consts.da);
    cert.transcript.push_back(
        check("crossing t-window inside the uniqueness region", in.t_window_halfwidth, "<=", t_window));
    cert.transcript.push_back(
        check("crossing a-window inside the uniqueness region", in.a_window_halfwidth, "<=", a_window));

    // Rotation bookkeeping: each quarter-period advances the angle by the
    // threshold 7 pi/18; 9 cycles of 4 quarter-periods give total angle
    // 36 * 7 pi/18 = 14 pi, i.e. exactly 7 revolutions, closing the orbit
    // with period 36 t-bar.
    Rat revolutions = Rat(36) * Rat(7, 18) / Rat(2);
    cert.transcript.push_back(check("9 cycles complete 7 full revolutions", revolutions, "<=", Rat(7)));
    cert.transcript.push_back(check("revolution count is whole", Rat(7), "<=", revolutions));

    cert.verdict = fold(cert.transcript);
    cert.summary =
        cert.verdict == Verdict::Pass
            ? "periodic orbit with period 36 t-bar, |t-bar - t0| <= " + in.t_window_halfwidth.str() +
                  ", |a-bar - a0| <= " + in.a_window_halfwidth.str() + ", |b-bar - b0| < " +
                  in.consts.sb.str()
            : "a prerequisite certificate failed";
    return cert;
}

}  // namespace rtm::topology
