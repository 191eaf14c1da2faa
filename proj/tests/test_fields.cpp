#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rtm/fields.hpp"

#include <random>

using namespace rtm::fields;
using rtm::exact::Ival;
using rtm::exact::Rat;

namespace {

// Points where s = sqrt(4 x1^2 + x3^2) is exactly rational: x1 = 2u,
// x3 = 3u gives s = 5u. Evaluations there are exact point intervals.
StatePoint pythagorean_point(const Rat& u, std::mt19937_64& rng) {
    std::uniform_int_distribution<long> num(-50, 50);
    StatePoint p;
    p.set(1, Ival(Rat(2) * u));
    p.set(3, Ival(Rat(3) * u));
    for (int i : {2, 4, 5, 6, 7, 8, 9, 10, 11, 12}) p.set(i, Ival(Rat(num(rng), 17)));
    p.a = Ival(Rat(num(rng), 11));
    return p;
}

Rat mid_of(const Ival& v) { return v.mid(); }

}  // namespace

TEST_CASE("phi reference evaluations") {
    // phi1 vanishes with its numerator
    StatePoint p;
    p.set(1, Ival(Rat(0)));
    p.set(3, Ival(Rat(10)));
    p.a = Ival(Rat::parse("43170475352787/10000000000000"));
    Ival v1 = eval_phi(1, p);
    CHECK(v1.lo == Rat(0));
    CHECK(v1.hi == Rat(0));

    // phi2 at x1 = 0, x3 = 10 is exactly a^2/10 - 1/4 - 2
    Ival v2 = eval_phi(2, p);
    Rat a = p.param().lo;
    Rat expect = a * a / Rat(10) - Rat(1, 4) - Rat(2);
    CHECK(v2.lo == expect);
    CHECK(v2.hi == expect);
}

TEST_CASE("dictionary shape") {
    CHECK(dictionary().size() == 58);
    for (const auto& e : dictionary()) {
        CHECK(e.tabulated_bound.lo <= e.tabulated_bound.hi);
        CHECK_FALSE(to_text(e.expr).empty());
    }
    // spot values from the stored table
    CHECK(phi_entry(3).tabulated_bound.lo == Rat::parse("215419/500000"));
    CHECK(phi_entry(54).tabulated_bound.hi == Rat::parse("19/500000"));
}

TEST_CASE("composite entries match their full expansions exactly at rational-s points") {
    std::mt19937_64 rng(7051);
    const int composites[] = {10, 12, 14, 17, 19, 20, 22, 27, 29, 30, 33, 34,
                              36, 38, 39, 42, 43, 44, 45, 47, 48, 50, 52, 53};
    for (int rep = 0; rep < 40; ++rep) {
        Rat u(static_cast<long>(rep % 7 + 1), 3);
        StatePoint p = pythagorean_point(u, rng);
        for (int i : composites) {
            Ival via_refs = eval_phi(i, p);
            EvalContext ctx(p);
            Ival via_expansion = ctx.eval(expand_phi_refs(phi_entry(i).expr));
            CHECK(via_refs.lo == via_expansion.lo);
            CHECK(via_refs.hi == via_expansion.hi);
            CHECK(via_refs.is_point());
        }
    }
}

TEST_CASE("two tabulated writings of the same derivative agree") {
    // entries 13 and 51 are the same function written differently
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 25; ++rep) {
        Rat u(static_cast<long>(rep + 2), 5);
        StatePoint p = pythagorean_point(u, rng);
        Ival a = eval_phi(13, p);
        Ival b = eval_phi(51, p);
        CHECK(a.lo == b.lo);
        CHECK(a.hi == b.hi);
    }
}

TEST_CASE("composite enclosures intersect expansions at general points") {
    std::mt19937_64 rng(424242);
    std::uniform_int_distribution<long> num(1, 999);
    StatePoint box = domain_box();
    for (int rep = 0; rep < 1000; ++rep) {
        StatePoint p;
        for (int i = 1; i <= 12; ++i) {
            const Ival& iv = box.get(i);
            Rat t(num(rng), 1000);
            p.set(i, Ival(iv.lo + t * iv.width()));
        }
        Rat t(num(rng), 1000);
        p.a = Ival(box.param().lo + t * box.param().width());
        int i = 1 + static_cast<int>(rep % 58);
        Ival via_refs = eval_phi(i, p);
        EvalContext ctx(p);
        Ival via_expansion = ctx.eval(expand_phi_refs(phi_entry(i).expr));
        CHECK(via_refs.intersects(via_expansion));
    }
}

TEST_CASE("derivative matrix zero patterns") {
    auto is_zero = [](const Expr& e) { return e->op == Op::Const && e->value == Rat(0); };
    auto is_one = [](const Expr& e) { return e->op == Op::Const && e->value == Rat(1); };

    const auto& w = W();
    int w_zero = 0, w_one = 0;
    for (const auto& row : w.D)
        for (const auto& e : row) {
            if (is_zero(e)) ++w_zero;
            if (is_one(e)) ++w_one;
        }
    CHECK(w_zero == 18);
    CHECK(w_one == 2);
    CHECK(is_one(w.D[0][1]));
    CHECK(is_one(w.D[2][3]));
    CHECK(w.D[4][2]->op == Op::Phi);
    CHECK(w.D[4][2]->index == 7);

    const auto& g = G();
    int g_zero = 0, g_one = 0;
    for (const auto& row : g.D)
        for (const auto& e : row) {
            if (is_zero(e)) ++g_zero;
            if (is_one(e)) ++g_one;
        }
    CHECK(g_zero == 63);
    CHECK(g_one == 4);
    CHECK(g.D[7][2]->op == Op::Phi);
    CHECK(g.D[7][2]->index == 22);
    CHECK(g.D1[8][2]->index == 40);

    const auto& u = U();
    int u_zero = 0, u_one = 0;
    for (const auto& row : u.D)
        for (const auto& e : row) {
            if (is_zero(e)) ++u_zero;
            if (is_one(e)) ++u_one;
        }
    CHECK(u_zero == 48);
    CHECK(u_one == 4);
    CHECK(u.D1[5][0]->index == 48);
    CHECK(u.D1[7][2]->index == 53);
}

TEST_CASE("W at the launch state is exactly rational") {
    Rat a0 = Rat::parse("43170475352787/10000000000000");
    Rat b0 = Rat::parse("1490359743/1000000000");
    auto init = W().initial_state(b0);
    StatePoint p = W().state_point(init, a0);
    auto f = eval_field(W(), p);
    CHECK(f[0].lo == b0);
    CHECK(f[1].lo == Rat(0));
    CHECK(f[2].lo == Rat(0));
    CHECK(f[3].lo == a0 * a0 / Rat(10) - Rat(9, 4));
    CHECK(f[4].lo == a0 / Rat(10));
    for (const auto& c : f) CHECK(c.is_point());

    // F1 = D f there, dominated by the single nonzero attraction column
    auto f1 = eval_f1(W(), p);
    CHECK(f1[0].lo == Rat(0));
    CHECK(f1[1].lo == Rat(-2, 5) * b0);
    CHECK(f1[2].lo == a0 * a0 / Rat(10) - Rat(9, 4));
    CHECK(f1[3].lo == Rat(0));
    CHECK(f1[4].lo == Rat(0));
}

TEST_CASE("difference rows vanish at the reference parameter and track the full difference") {
    Rat a0 = Rat::parse("43170475352787/10000000000000");
    std::mt19937_64 rng(5150);
    for (const FieldSpec* fsp : {&W(), &G(), &U()}) {
        const FieldSpec& fs = *fsp;
        // delta at a = a0 is identically zero
        StatePoint p = pythagorean_point(Rat(7, 3), rng);
        p.a = Ival(a0);
        EvalContext ctx(p);
        for (const auto& e : fs.delta) {
            Ival v = ctx.eval(e);
            CHECK(v.lo == Rat(0));
            CHECK(v.hi == Rat(0));
        }
        // and equals f(a) - f(a0) componentwise at a rational-s point
        Rat a = a0 + Rat(1, 300000);
        StatePoint pa = p;
        pa.a = Ival(a);
        auto f_a = eval_field(fs, pa);
        auto f_a0 = eval_field(fs, p);
        EvalContext ctx_a(pa);
        for (int i = 0; i < fs.dim; ++i) {
            Ival d = ctx_a.eval(fs.delta[static_cast<size_t>(i)]);
            CHECK(d.lo == f_a[static_cast<size_t>(i)].lo - f_a0[static_cast<size_t>(i)].lo);
        }
    }
}

TEST_CASE("chain rule sanity: F1 matches a finite difference along the flow") {
    // central difference of f along its own direction approximates D f * f
    std::mt19937_64 rng(31337);
    StatePoint p;
    p.set(1, Ival(Rat(2)));
    p.set(2, Ival(Rat(1, 2)));
    p.set(3, Ival(Rat(19, 2)));
    p.set(4, Ival(Rat(-1, 10)));
    p.a = Ival(Rat::parse("43170475352787/10000000000000"));
    Rat tau(1, 100000);

    auto f = eval_field(W(), p, Rat::pow10(-40));
    auto f1 = eval_f1(W(), p, Rat::pow10(-40));
    std::vector<Rat> fwd(5), bwd(5);
    StatePoint pf, pb;
    const int roles[] = {1, 2, 3, 4};
    for (int i = 0; i < 4; ++i) {
        Rat base = p.get(roles[i]).lo;
        pf.set(roles[i], Ival(base + tau * mid_of(f[static_cast<size_t>(i)])));
        pb.set(roles[i], Ival(base - tau * mid_of(f[static_cast<size_t>(i)])));
    }
    pf.a = p.a;
    pb.a = p.a;
    auto ff = eval_field(W(), pf, Rat::pow10(-40));
    auto fb = eval_field(W(), pb, Rat::pow10(-40));
    for (int i = 0; i < 5; ++i) {
        Rat fd = (mid_of(ff[static_cast<size_t>(i)]) - mid_of(fb[static_cast<size_t>(i)])) /
                 (Rat(2) * tau);
        Rat err = (fd - mid_of(f1[static_cast<size_t>(i)])).abs();
        CHECK(err < Rat(1, 1000));   // second-order tail only
    }
}

TEST_CASE("domain guards") {
    StatePoint p;
    p.set(1, Ival(Rat(0)));
    p.set(3, Ival(Rat(-1), Rat(1)));   // s enclosure touches zero
    p.a = Ival(Rat(4));
    CHECK_THROWS(eval_phi(1, p));
    StatePoint q;
    q.set(1, Ival(Rat(1)));
    q.set(3, Ival(Rat(-5), Rat(5)));   // x3 power interval contains zero
    q.a = Ival(Rat(4));
    CHECK_THROWS(eval_phi(2, q));
}

TEST_CASE("domain box cross-checks") {
    // parameter interval equals its construction from the rectangle constants
    Rat a0 = Rat::parse("43170475352787/10000000000000");
    Rat da = Rat::parse("17/50000000");
    Rat sa = Rat::parse("1197/100000000");
    const Ival& i13 = domain_interval(13);
    CHECK(i13.lo == a0 - Rat(3) * (sa + da));
    CHECK(i13.hi == a0 + Rat(3) * (sa + da));
    CHECK(domain_interval(3).lo == Rat(189, 20));
    CHECK(domain_interval(3).hi == Rat(1001, 100));
    CHECK(theta_interval().hi == Rat(7, 5));
    CHECK(theta_a_interval().hi == Rat(3, 25));
}

TEST_CASE("frobenius bound over the box with tabulated entry ranges") {
    std::map<int, Ival> table;
    for (const auto& e : dictionary()) table[e.id] = e.tabulated_bound;
    auto resolver = [table](int i) -> std::optional<Ival> {
        auto it = table.find(i);
        return it == table.end() ? std::nullopt : std::make_optional(it->second);
    };
    Rat k0w = frobenius_bound(W().D, W().box_point(), resolver);
    CHECK(k0w <= Rat::parse("25282/15625"));
    CHECK(Rat(8, 5) < k0w);

    std::vector<std::vector<Expr>> zero(3, std::vector<Expr>(3, lit(0)));
    CHECK(frobenius_bound(zero, W().box_point(), resolver) == Rat(0));
}
