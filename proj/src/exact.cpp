#include "rtm/exact.hpp"

namespace rtm::exact {

Rat Rat::parse(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("Rat::parse: empty string");
    if (text.find('.') != std::string::npos)
        throw std::invalid_argument("Rat::parse: decimal notation rejected, use p/q: " + text);
    mpq_class q;
    if (q.set_str(text, 10) != 0)
        throw std::invalid_argument("Rat::parse: not a rational: " + text);
    if (q.get_den() == 0) throw std::domain_error("Rat::parse: zero denominator: " + text);
    if (q.get_den() < 0) { q.get_num() = -q.get_num(); q.get_den() = -q.get_den(); }
    q.canonicalize();
    return Rat(q);
}

Rat Rat::pow10(int e) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    Rat r(p);
    return e < 0 ? Rat(1) / r : r;
}

std::string Rat::str() const {
    return v_.get_den() == 1 ? v_.get_num().get_str() : v_.get_str();
}

Rat& Rat::operator/=(const Rat& o) {
    if (o.v_ == 0) throw std::domain_error("Rat: division by zero");
    v_ /= o.v_;
    return *this;
}

Rat Rat::pow(long e) const {
    if (e == 0) return Rat(1);
    bool inv = e < 0;
    unsigned long k = static_cast<unsigned long>(inv ? -e : e);
    if (inv && v_ == 0) throw std::domain_error("Rat::pow: zero to negative power");
    mpz_class n, d;
    mpz_pow_ui(n.get_mpz_t(), v_.get_num().get_mpz_t(), k);
    mpz_pow_ui(d.get_mpz_t(), v_.get_den().get_mpz_t(), k);
    mpq_class q(n, d);
    q.canonicalize();
    Rat r(q);
    return inv ? Rat(1) / r : r;
}

mpz_class Rat::floor() const {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), v_.get_num().get_mpz_t(), v_.get_den().get_mpz_t());
    return q;
}

Rat min(const Rat& a, const Rat& b) { return a <= b ? a : b; }
Rat max(const Rat& a, const Rat& b) { return a >= b ? a : b; }

Rat Ival::mignitude() const {
    if (contains(Rat(0))) return Rat(0);
    return min(lo.abs(), hi.abs());
}

Ival operator*(const Ival& a, const Ival& b) {
    Rat p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return Ival(min(min(p1, p2), min(p3, p4)), max(max(p1, p2), max(p3, p4)));
}

Ival operator/(const Ival& a, const Ival& b) {
    if (!b.excludes_zero()) throw std::domain_error("Ival: division by interval containing 0");
    Rat p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
    return Ival(min(min(p1, p2), min(p3, p4)), max(max(p1, p2), max(p3, p4)));
}

Ival Ival::pow(long e) const {
    if (e == 0) return Ival(Rat(1));
    if (e < 0) return Ival(Rat(1)) / pow(-e);
    Rat pl = lo.pow(e), ph = hi.pow(e);
    if (e % 2 != 0 || lo >= Rat(0)) return Ival(min(pl, ph), max(pl, ph));
    if (hi <= Rat(0)) return Ival(min(pl, ph), max(pl, ph));
    return Ival(Rat(0), max(pl, ph));   // even power across zero
}

Ival hull(const Ival& a, const Ival& b) {
    return Ival(min(a.lo, b.lo), max(a.hi, b.hi));
}

Rat floor_to_grid(const Rat& x, const GridSpec& grid) {
    Rat H = grid.spacing();
    return H * Rat((x / H).floor());
}

GridRounding nearest_grid_in(const Ival& enc, const GridSpec& grid) {
    Rat H = grid.spacing();
    // grid point nearest the midpoint, ties rounded up
    Rat m = enc.mid() / H;
    mpz_class n = (m + Rat(1, 2)).floor();
    Rat g = H * Rat(n);
    bool ok = max((g - enc.lo).abs(), (g - enc.hi).abs()) <= H;
    return GridRounding{g, ok};
}

Ival sqrt_enclosure(const Rat& r, const Rat& width) {
    if (r < Rat(0)) throw std::domain_error("sqrt_enclosure: negative argument");
    if (width <= Rat(0)) throw std::invalid_argument("sqrt_enclosure: width must be positive");
    if (r == Rat(0)) return Ival(Rat(0));
    // exact rational square roots come back as points
    mpz_class pq = r.num() * r.den();
    mpz_class s;
    mpz_sqrt(s.get_mpz_t(), pq.get_mpz_t());
    if (s * s == pq) {
        mpq_class v(s, r.den());
        v.canonicalize();
        return Ival(Rat(v));
    }
    // otherwise bracket with endpoints on a decimal lattice: one integer
    // square root, denominators bounded by the lattice regardless of r
    mpz_class N(1);
    while (Rat(1) / Rat(N) > width) N *= 10;
    mpz_class scaled;   // floor(r N^2)
    mpz_class num = r.num() * N * N;
    mpz_fdiv_q(scaled.get_mpz_t(), num.get_mpz_t(), r.den().get_mpz_t());
    mpz_sqrt(s.get_mpz_t(), scaled.get_mpz_t());
    mpq_class lo(s, N), hi(s + 1, N);
    lo.canonicalize();
    hi.canonicalize();
    return Ival(Rat(lo), Rat(hi));
}

Rat exp_upper_bound(const Rat& x, int terms) {
    if (x < Rat(0)) throw std::domain_error("exp_upper_bound: negative argument");
    if (terms < 0) throw std::invalid_argument("exp_upper_bound: terms must be >= 0");
    if (!(x < Rat(terms + 2)))
        throw std::domain_error("exp_upper_bound: remainder bound not finite, increase terms");
    Rat term(1), sum(1);
    for (int i = 1; i <= terms; ++i) {
        term = term * x / Rat(i);
        sum += term;
    }
    // tail sum_{i>terms} x^i/i! <= x^{t+1}/(t+1)! * (t+2)/(t+2-x)
    Rat next = term * x / Rat(terms + 1);
    Rat tail = next * Rat(terms + 2) / (Rat(terms + 2) - x);
    return sum + tail;
}

namespace {

// Brackets of arctan(1/m) from the alternating series: consecutive partial
// sums straddle the limit.
std::pair<Rat, Rat> atan_inv_brackets(long m, int terms) {
    Rat prev(0), sum(0);
    Rat mq(m);
    for (int i = 0; i < terms; ++i) {
        Rat t = Rat(1) / (Rat(2 * i + 1) * mq.pow(2 * i + 1));
        prev = sum;
        sum += (i % 2 == 0) ? t : -t;
    }
    return sum < prev ? std::make_pair(sum, prev) : std::make_pair(prev, sum);
}

}  // namespace

Ival pi_enclosure(const Rat& width) {
    if (width <= Rat(0)) throw std::invalid_argument("pi_enclosure: width must be positive");
    // pi = 16 arctan(1/5) - 4 arctan(1/239)
    for (int terms = 4;; terms *= 2) {
        auto [a5lo, a5hi] = atan_inv_brackets(5, terms);
        auto [b239lo, b239hi] = atan_inv_brackets(239, terms);
        Rat lo = Rat(16) * a5lo - Rat(4) * b239hi;
        Rat hi = Rat(16) * a5hi - Rat(4) * b239lo;
        if (hi - lo <= width) return Ival(lo, hi);
    }
}

Rat geometric_recurrence_closed_form(const Rat& p, const Rat& L, const Rat& q0, long k) {
    if (L == Rat(0)) throw std::domain_error("geometric_recurrence_closed_form: L = 0");
    if (k < 0) throw std::invalid_argument("geometric_recurrence_closed_form: k < 0");
    return (p + L * q0) / L * (Rat(1) + L).pow(k) - p / L;
}

}  // namespace rtm::exact
