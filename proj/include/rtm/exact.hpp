// Exact scalar kernel: arbitrary-precision rationals, closed rational
// intervals, decimal-grid rounding, and certified enclosures of the
// irrational constants the certificates need (square roots, an upper
// bound for exp, pi).
#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <utility>

namespace rtm::exact {

class Rat {
public:
    Rat() : v_(0) {}
    Rat(long n) : v_(n) {}
    Rat(long num, long den) : v_(num, den) { require_den(); v_.canonicalize(); }
    explicit Rat(const mpz_class& z) : v_(z) {}
    explicit Rat(const mpq_class& q) : v_(q) { require_den(); v_.canonicalize(); }

    /// Parse "p", "-p" or "p/q". Decimal points are rejected; proof-critical
    /// inputs must be exact rationals.
    static Rat parse(const std::string& text);

    /// 10^e for e >= 0, 1/10^-e for e < 0.
    static Rat pow10(int e);

    std::string str() const;   // "p" or "p/q", canonical form

    const mpz_class num() const { return v_.get_num(); }
    const mpz_class den() const { return v_.get_den(); }

    Rat operator-() const { Rat r; r.v_ = -v_; return r; }
    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
    Rat& operator/=(const Rat& o);

    friend Rat operator+(Rat a, const Rat& b) { return a += b; }
    friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
    friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
    friend Rat operator/(Rat a, const Rat& b) { return a /= b; }

    friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

    int sign() const { return sgn(v_); }
    Rat abs() const { Rat r; r.v_ = ::abs(v_); return r; }

    /// Exact integer power; negative exponents require a nonzero value.
    Rat pow(long e) const;

    /// Largest integer <= value.
    mpz_class floor() const;

    double approx() const { return v_.get_d(); }   // display only

private:
    void require_den() {
        if (v_.get_den() == 0) throw std::domain_error("Rat: zero denominator");
    }
    mpq_class v_;
};

inline Rat abs(const Rat& r) { return r.abs(); }
Rat min(const Rat& a, const Rat& b);
Rat max(const Rat& a, const Rat& b);

/// Closed interval with exact rational endpoints. All operations are
/// set-sound: x in a, y in b implies x op y in (a op b).
struct Ival {
    Rat lo, hi;

    Ival() = default;
    Ival(Rat point) : lo(point), hi(std::move(point)) {}
    Ival(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo > hi) throw std::invalid_argument("Ival: lo > hi");
    }
    static Ival of(long l, long h) { return Ival(Rat(l), Rat(h)); }

    Rat width() const { return hi - lo; }
    Rat mid() const { return (lo + hi) / Rat(2); }
    Rat abs_bound() const { return max(lo.abs(), hi.abs()); }
    Rat mignitude() const;   // min |x| over the interval

    bool contains(const Rat& x) const { return lo <= x && x <= hi; }
    bool contains(const Ival& o) const { return lo <= o.lo && o.hi <= hi; }
    bool intersects(const Ival& o) const { return lo <= o.hi && o.lo <= hi; }
    bool is_point() const { return lo == hi; }
    bool excludes_zero() const { return lo > Rat(0) || hi < Rat(0); }

    Ival operator-() const { return Ival(-hi, -lo); }
    friend Ival operator+(const Ival& a, const Ival& b) { return Ival(a.lo + b.lo, a.hi + b.hi); }
    friend Ival operator-(const Ival& a, const Ival& b) { return Ival(a.lo - b.hi, a.hi - b.lo); }
    friend Ival operator*(const Ival& a, const Ival& b);
    friend Ival operator/(const Ival& a, const Ival& b);

    Ival scaled(const Rat& k) const {
        return k >= Rat(0) ? Ival(k * lo, k * hi) : Ival(k * hi, k * lo);
    }
    /// x^e with integer e; even powers fold sign, negative e requires 0 outside.
    Ival pow(long e) const;
    /// Symmetric inflation by r >= 0.
    Ival widened(const Rat& r) const { return Ival(lo - r, hi + r); }

    std::string str() const { return "[" + lo.str() + ", " + hi.str() + "]"; }
};

Ival hull(const Ival& a, const Ival& b);

/// Decimal grid 10^-grid_exponent with the rounding rule used when a step
/// value is replaced by a nearby grid rational.
struct GridSpec {
    enum class Mode { Floor, Nearest };
    int grid_exponent = 14;
    Mode mode = Mode::Nearest;

    Rat spacing() const { return Rat::pow10(-grid_exponent); }
};

/// H * floor(x / H): the largest grid multiple <= x.
Rat floor_to_grid(const Rat& x, const GridSpec& grid);

/// Grid rational nearest the enclosure midpoint, with the containment
/// certificate max(|g-lo|,|g-hi|) <= H (which bounds |g-y| for every y in
/// the enclosure). Requires enclosure width <= H/2; `certified` reports
/// whether the check held.
struct GridRounding {
    Rat value;
    bool certified;
};
GridRounding nearest_grid_in(const Ival& enclosure, const GridSpec& grid);

/// Enclosure [lo,hi] of sqrt(r) with lo^2 <= r <= hi^2, lo >= 0 and
/// hi - lo <= width. Exact square roots come back as point intervals.
Ival sqrt_enclosure(const Rat& r, const Rat& width);

/// Rational upper bound on e^x for x >= 0: Taylor partial sum plus an exact
/// majorant of the remainder (finite only when x < terms + 2).
Rat exp_upper_bound(const Rat& x, int terms);

/// Enclosure of pi of width <= `width`, from Machin's formula with exact
/// alternating-series brackets for both arctangents.
Ival pi_enclosure(const Rat& width);

/// Closed form ((p + L q0)/L)(1+L)^k - p/L of the recurrence
/// q_{i+1} = (1+L) q_i + p. L must be nonzero.
Rat geometric_recurrence_closed_form(const Rat& p, const Rat& L, const Rat& q0, long k);

}  // namespace rtm::exact
