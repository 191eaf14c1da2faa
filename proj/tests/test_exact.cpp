#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rtm/exact.hpp"

#include <random>

using namespace rtm::exact;

namespace {

struct RatGen {
    std::mt19937_64 rng{20240817};
    Rat operator()(long num_range = 1000000, long den_range = 10000) {
        std::uniform_int_distribution<long> num(-num_range, num_range);
        std::uniform_int_distribution<long> den(1, den_range);
        return Rat(num(rng), den(rng));
    }
    long integer(long lo, long hi) {
        return std::uniform_int_distribution<long>(lo, hi)(rng);
    }
};

}  // namespace

TEST_CASE("rational parsing and canonical form") {
    CHECK(Rat::parse("4/6") == Rat(2, 3));
    CHECK(Rat::parse("-12/8").str() == "-3/2");
    CHECK(Rat::parse("7").str() == "7");
    CHECK(Rat(10, -4) == Rat(-5, 2));
    CHECK_THROWS(Rat::parse("0.5"));
    CHECK_THROWS(Rat::parse("1/0"));
    CHECK_THROWS(Rat(1, 2) / Rat(0));
    CHECK(Rat::pow10(-3) == Rat(1, 1000));
    CHECK(Rat(2, 3).pow(-2) == Rat(9, 4));
}

TEST_CASE("floor_to_grid reference values") {
    GridSpec g6{6, GridSpec::Mode::Floor};
    CHECK(floor_to_grid(Rat(121, 240), g6) == Rat::parse("252083/500000"));
    CHECK(floor_to_grid(Rat(0), g6) == Rat(0));
    GridSpec g2{2, GridSpec::Mode::Floor};
    Rat r = floor_to_grid(Rat(-1, 3), g2);
    CHECK(r == Rat(-34, 100));
    CHECK(r <= Rat(-1, 3));
    CHECK(Rat(-1, 3) < r + g2.spacing());
}

TEST_CASE("floor_to_grid residual invariant") {
    RatGen gen;
    GridSpec g{4, GridSpec::Mode::Floor};
    for (int i = 0; i < 1000; ++i) {
        Rat x = gen();
        Rat f = floor_to_grid(x, g);
        CHECK(Rat(0) <= x - f);
        CHECK(x - f < g.spacing());
        CHECK((f / g.spacing()).den() == 1);   // grid residency
    }
}

TEST_CASE("nearest_grid_in") {
    GridSpec g6{6, GridSpec::Mode::Nearest};
    auto half = nearest_grid_in(Ival(Rat(1, 2)), g6);
    CHECK(half.certified);
    CHECK(half.value == Rat(1, 2));

    auto r = nearest_grid_in(Ival(Rat::parse("5041660/10000000"), Rat::parse("5041670/10000000")), g6);
    CHECK(r.certified);
    bool one_of = r.value == Rat::parse("504166/1000000") || r.value == Rat::parse("504167/1000000");
    CHECK(one_of);

    // a too-wide enclosure fails the containment certificate
    auto wide = nearest_grid_in(Ival(Rat(0), Rat(3) * g6.spacing()), g6);
    CHECK_FALSE(wide.certified);
}

TEST_CASE("nearest_grid_in containment property") {
    RatGen gen;
    GridSpec g{5, GridSpec::Mode::Nearest};
    for (int i = 0; i < 500; ++i) {
        Rat mid = gen();
        Rat w = Rat(1, 4) * g.spacing();
        auto r = nearest_grid_in(Ival(mid - w, mid + w), g);
        CHECK(r.certified);
        CHECK(max((r.value - (mid - w)).abs(), (r.value - (mid + w)).abs()) <= g.spacing());
    }
}

TEST_CASE("sqrt_enclosure reference values") {
    Ival four = sqrt_enclosure(Rat(4), Rat(1, 1000));
    CHECK(four.lo == Rat(2));
    CHECK(four.hi == Rat(2));

    Ival two = sqrt_enclosure(Rat(2), Rat(1, 100));
    CHECK(two.lo * two.lo <= Rat(2));
    CHECK(Rat(2) <= two.hi * two.hi);
    CHECK(two.width() <= Rat(1, 100));
    CHECK(two.lo >= Rat(0));

    Ival zero = sqrt_enclosure(Rat(0), Rat(1, 10));
    CHECK(zero.lo == Rat(0));
    CHECK(zero.hi == Rat(0));
    CHECK_THROWS(sqrt_enclosure(Rat(-1), Rat(1, 10)));
}

TEST_CASE("sqrt_enclosure bracketing and monotonicity") {
    RatGen gen;
    Rat w = Rat::pow10(-12);
    Rat prev_r(-1), prev_hi(0);
    for (int i = 0; i < 1000; ++i) {
        Rat r = gen().abs();
        Ival e = sqrt_enclosure(r, w);
        CHECK(e.lo * e.lo <= r);
        CHECK(r <= e.hi * e.hi);
        CHECK(e.width() <= w);
    }
    // endpoint monotonicity at fixed width
    Rat samples[] = {Rat(1, 7), Rat(1, 3), Rat(2), Rat(10), Rat(50), Rat(12345, 7)};
    for (size_t i = 1; i < std::size(samples); ++i) {
        Ival a = sqrt_enclosure(samples[i - 1], w);
        Ival b = sqrt_enclosure(samples[i], w);
        CHECK(a.lo <= b.hi);
        CHECK(a.lo <= b.lo);
        CHECK(a.hi <= b.hi + w);
    }
}

TEST_CASE("exp_upper_bound") {
    CHECK(exp_upper_bound(Rat(0), 10) == Rat(1));
    Rat e1 = exp_upper_bound(Rat(1), 20);
    CHECK(Rat::parse("2718281828/1000000000") <= e1);
    CHECK(e1 <= Rat::parse("2718281829/1000000000"));
    CHECK_THROWS(exp_upper_bound(Rat(-1), 10));
    CHECK_THROWS(exp_upper_bound(Rat(30), 10));   // remainder not finite

    RatGen gen;
    for (int i = 0; i < 50; ++i) {
        Rat x = Rat(gen.integer(0, 800), 100);
        int terms = static_cast<int>(gen.integer(12, 40));
        Rat a = exp_upper_bound(x, terms);
        Rat b = exp_upper_bound(x, terms + 5);
        CHECK(b <= a);   // non-increasing in the term count
        // always at or above the partial sum, so e^x stays bracketed
        Rat partial(1), term(1);
        for (int k = 1; k <= terms; ++k) {
            term = term * x / Rat(k);
            partial += term;
        }
        CHECK(partial <= a);
    }
}

TEST_CASE("pi_enclosure") {
    Ival rough = pi_enclosure(Rat(1, 100));
    CHECK(Rat(314, 100) <= rough.lo);
    CHECK(rough.hi <= Rat(315, 100));

    Ival fine = pi_enclosure(Rat::pow10(-12));
    CHECK(fine.width() <= Rat::pow10(-12));
    // 3.141592653589793 < pi < 3.141592653589794
    CHECK(fine.lo < Rat::parse("3141592653589794/1000000000000000"));
    CHECK(Rat::parse("3141592653589793/1000000000000000") < fine.hi);

    // the strict angle comparison the certificates rely on
    Ival tight = pi_enclosure(Rat::pow10(-20));
    Ival seven_pi_18 = tight.scaled(Rat(7, 18));
    CHECK(Rat::parse("122172921709501/100000000000000") < seven_pi_18.lo);
}

TEST_CASE("geometric recurrence closed form") {
    CHECK(geometric_recurrence_closed_form(Rat(1), Rat(1), Rat(0), 3) == Rat(7));
    Rat L(3, 7);
    CHECK(geometric_recurrence_closed_form(Rat(0), L, Rat(5), 2) ==
          Rat(5) * (Rat(1) + L) * (Rat(1) + L));
    CHECK_THROWS(geometric_recurrence_closed_form(Rat(1), Rat(0), Rat(0), 3));

    RatGen gen;
    for (int i = 0; i < 1000; ++i) {
        Rat p = gen(100, 50), L2 = gen(100, 50), q0 = gen(100, 50);
        if (L2 == Rat(0)) L2 = Rat(1, 3);
        long k = gen.integer(0, 20);
        Rat direct = q0;
        for (long j = 0; j < k; ++j) direct = (Rat(1) + L2) * direct + p;
        CHECK(geometric_recurrence_closed_form(p, L2, q0, k) == direct);
    }
}

TEST_CASE("interval soundness fuzz") {
    RatGen gen;
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        Rat x = gen(), y = gen();
        Rat wx = gen(100, 100).abs(), wy = gen(100, 100).abs();
        Ival a(x - wx, x + wx), b(y - wy, y + wy);
        CHECK((a + b).contains(x + y));
        CHECK((a - b).contains(x - y));
        CHECK((a * b).contains(x * y));
        CHECK(a.pow(3).contains(x.pow(3)));
        CHECK(a.pow(2).contains(x.pow(2)));
        if (b.excludes_zero()) {
            CHECK((a / b).contains(x / y));
            ++checked;
        }
        CHECK((-a).contains(-x));
    }
    CHECK(checked > 1000);   // the division branch is genuinely exercised
}

TEST_CASE("interval division guards") {
    CHECK_THROWS(Ival(Rat(1), Rat(2)) / Ival(Rat(-1), Rat(1)));
    Ival q = Ival(Rat(1), Rat(2)) / Ival(Rat(4), Rat(8));
    CHECK(q.lo == Rat(1, 8));
    CHECK(q.hi == Rat(1, 2));
    CHECK(Ival(Rat(-2), Rat(3)).pow(2).lo == Rat(0));
    CHECK(Ival(Rat(-2), Rat(3)).pow(2).hi == Rat(9));
    Ival inv = Ival(Rat(2), Rat(3)).pow(-2);
    CHECK(inv.lo == Rat(1, 9));
    CHECK(inv.hi == Rat(1, 4));
}
