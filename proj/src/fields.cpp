#include "rtm/fields.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rtm::fields {

namespace {

Expr node(Op op, Expr a = nullptr, Expr b = nullptr, int index = 0, Rat value = Rat(0)) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->value = std::move(value);
    n->index = index;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

}  // namespace

Expr lit(const Rat& r) { return node(Op::Const, nullptr, nullptr, 0, r); }
Expr lit(long n) { return lit(Rat(n)); }
Expr coord(int i) { return node(Op::Coord, nullptr, nullptr, i); }
Expr param_a() { return node(Op::ParamA); }
Expr spow(int k) { return node(Op::SPow, nullptr, nullptr, k); }
Expr pow_i(Expr e, int k) { return node(Op::Pow, std::move(e), nullptr, k); }
Expr operator+(Expr x, Expr y) { return node(Op::Add, std::move(x), std::move(y)); }
Expr operator-(Expr x, Expr y) { return node(Op::Sub, std::move(x), std::move(y)); }
Expr operator-(Expr x) { return node(Op::Neg, std::move(x)); }
Expr operator*(Expr x, Expr y) { return node(Op::Mul, std::move(x), std::move(y)); }
Expr operator*(long k, Expr y) { return lit(k) * std::move(y); }
Expr operator/(Expr x, Expr y) { return node(Op::Div, std::move(x), std::move(y)); }
Expr phi_ref(int i) { return node(Op::Phi, nullptr, nullptr, i); }

namespace {

void collect_reads(const Expr& e, std::set<int>& out) {
    if (!e) return;
    switch (e->op) {
        case Op::Coord: out.insert(e->index); break;
        case Op::ParamA: out.insert(13); break;
        case Op::SPow: out.insert(1); out.insert(3); break;
        case Op::Phi: collect_reads(phi_entry(e->index).expr, out); break;
        default: break;
    }
    collect_reads(e->a, out);
    collect_reads(e->b, out);
}

}  // namespace

std::vector<int> read_set(const Expr& e) {
    std::set<int> s;
    collect_reads(e, s);
    return std::vector<int>(s.begin(), s.end());
}

Expr expand_phi_refs(const Expr& e) {
    if (!e) return e;
    if (e->op == Op::Phi) return expand_phi_refs(phi_entry(e->index).expr);
    if (!e->a && !e->b) return e;
    return node(e->op, expand_phi_refs(e->a), expand_phi_refs(e->b), e->index, e->value);
}

std::string to_text(const Expr& e) {
    std::ostringstream os;
    switch (e->op) {
        case Op::Const: os << e->value.str(); break;
        case Op::Coord: os << "x" << e->index; break;
        case Op::ParamA: os << "a"; break;
        case Op::SPow: os << "s^" << e->index; break;
        case Op::Phi: os << "phi" << e->index; break;
        case Op::Neg: os << "-(" << to_text(e->a) << ")"; break;
        case Op::Pow: os << "(" << to_text(e->a) << ")^" << e->index; break;
        case Op::Add: os << "(" << to_text(e->a) << " + " << to_text(e->b) << ")"; break;
        case Op::Sub: os << "(" << to_text(e->a) << " - " << to_text(e->b) << ")"; break;
        case Op::Mul: os << to_text(e->a) << "*" << to_text(e->b); break;
        case Op::Div: os << to_text(e->a) << "/" << to_text(e->b); break;
    }
    return os.str();
}

const Ival& StatePoint::get(int i) const {
    const auto& c = coords.at(i - 1);
    if (!c) throw std::domain_error("StatePoint: coordinate x" + std::to_string(i) + " not set");
    return *c;
}

const Ival& StatePoint::param() const {
    if (!a) throw std::domain_error("StatePoint: parameter a not set");
    return *a;
}

EvalContext::EvalContext(StatePoint point, Rat sqrt_width, PhiResolver resolver)
    : point_(std::move(point)), sqrt_width_(std::move(sqrt_width)), resolver_(std::move(resolver)) {}

const Ival& EvalContext::s_enclosure() {
    if (!s_) {
        Ival s2 = point_.get(1).pow(2).scaled(Rat(4)) + point_.get(3).pow(2);
        if (!(s2.lo > Rat(0)))
            throw std::domain_error("eval: s^2 enclosure does not exclude 0");
        Ival lo_enc = exact::sqrt_enclosure(s2.lo, sqrt_width_);
        Ival hi_enc = s2.is_point() ? lo_enc : exact::sqrt_enclosure(s2.hi, sqrt_width_);
        s_ = Ival(lo_enc.lo, hi_enc.hi);
    }
    return *s_;
}

Ival EvalContext::eval_phi(int i) {
    auto& memo = phi_memo_.at(i);
    if (memo) return *memo;
    if (resolver_) {
        if (auto r = resolver_(i)) {
            memo = *r;
            return *r;
        }
    }
    Ival v = eval(phi_entry(i).expr);
    memo = v;
    return v;
}

Ival EvalContext::eval(const Expr& e) {
    switch (e->op) {
        case Op::Const: return Ival(e->value);
        case Op::Coord: return point_.get(e->index);
        case Op::ParamA: return point_.param();
        case Op::SPow: {
            auto& memo = spow_memo_.at(e->index - 1);
            if (!memo) memo = s_enclosure().pow(e->index);
            return *memo;
        }
        case Op::Phi: return eval_phi(e->index);
        case Op::Neg: return -eval(e->a);
        case Op::Pow: return eval(e->a).pow(e->index);
        case Op::Add: return eval(e->a) + eval(e->b);
        case Op::Sub: return eval(e->a) - eval(e->b);
        case Op::Mul: return eval(e->a) * eval(e->b);
        case Op::Div: {
            Ival den = eval(e->b);
            if (!den.excludes_zero())
                throw std::domain_error("eval: division by enclosure containing 0");
            return eval(e->a) / den;
        }
    }
    throw std::logic_error("eval: bad node");
}

Ival eval_phi(int i, const StatePoint& p, const Rat& sqrt_width) {
    EvalContext ctx(p, sqrt_width);
    return ctx.eval_phi(i);
}

// ---------------------------------------------------------------------------
// Dictionary

namespace {

struct Dict {
    std::vector<PhiEntry> entries;

    void add(int id, Expr e, long lb_n, long lb_d, long ub_n, long ub_d, std::string role) {
        entries.push_back(PhiEntry{id, std::move(e),
                                   Ival(Rat(lb_n, lb_d), Rat(ub_n, ub_d)), std::move(role)});
    }
};

Dict build_dictionary() {
    Dict d;
    Expr A = param_a();
    Expr x1 = coord(1), x2 = coord(2), x3 = coord(3), x4 = coord(4);
    Expr x5 = coord(5), x6 = coord(6), x7 = coord(7), x8 = coord(8);
    Expr x9 = coord(9), x10 = coord(10), x11 = coord(11), x12 = coord(12);
    auto P = [](int i) { return phi_ref(i); };
    // reference value of the parameter, used by the difference rows
    Rat a0 = Rat::parse("43170475352787/10000000000000");

    d.add(1, -(lit(400) * x1) / spow(3),
          -102003, 125000, 237, 50000, "entry 2 of W");
    d.add(2, lit(100) * pow_i(A, 2) / pow_i(x3, 3) - lit(25) / pow_i(x3, 2)
                 - lit(200) * x3 / spow(3),
          -387429, 1000000, 373771, 1000000, "entry 4 of W");
    d.add(3, lit(10) * A / pow_i(x3, 2),
          215419, 500000, 483423, 1000000, "entry 5 of W");
    d.add(4, -(lit(400) * (pow_i(x3, 2) - 8 * pow_i(x1, 2))) / spow(5),
          -94797, 200000, -115837, 1000000, "entry (2,1) of DW");
    d.add(5, lit(1200) * x1 * x3 / spow(5),
          -301, 200000, 101747, 500000, "entry (2,3) of DW");
    d.add(6, lit(50) * (-(lit(6) * pow_i(A, 2)) / pow_i(x3, 4) + lit(12) * pow_i(x3, 2) / spow(5)
                        - lit(4) / spow(3) + lit(1) / pow_i(x3, 3)),
          -83881, 200000, -108213, 1000000, "entry (4,3) of DW");
    d.add(7, -(lit(20) * A) / pow_i(x3, 3),
          -12789, 125000, -86081, 1000000, "entry (5,3) of DW");
    d.add(8, -(lit(1200) * (16 * pow_i(x1, 2) * x3 - pow_i(x3, 3))) / spow(7),
          -3273, 500000, 18809, 125000, "part of entry (2,1) of DW1");
    d.add(9, -(lit(4800) * (8 * pow_i(x1, 3) - 3 * x1 * pow_i(x3, 2))) / spow(7),
          -1911, 1000000, 193837, 1000000, "part of entry (2,1) of DW1");
    d.add(10, x4 * P(8) + x2 * P(9),
          -52523, 1000000, 73229, 250000, "entry (2,1) of DW1");
    d.add(11, lit(4800) * (pow_i(x1, 3) - x1 * pow_i(x3, 2)) / spow(7),
          -34393, 500000, 637, 1000000, "part of entry (2,3) of DW1");
    d.add(12, x4 * P(11) + x2 * P(8),
          -10507, 1000000, 31051, 125000, "entry (2,3) of DW1");
    d.add(13, lit(1200) * pow_i(A, 2) / pow_i(x3, 5) - lit(3000) * pow_i(x3, 3) / spow(7)
                  + lit(1800) * x3 / spow(5) - lit(150) / pow_i(x3, 4),
          44031, 500000, 9611, 40000, "part of entry (4,3) of DW1");
    d.add(14, x4 * P(13) + 2 * (x2 * P(11)),
          -285649, 1000000, 2157, 500000, "entry (4,3) of DW1");
    d.add(15, lit(60) * A * x4 / pow_i(x3, 4),
          -10719, 1000000, 13, 40000, "entry (5,3) of DW1");
    d.add(16, lit(400) * (8 * (x5 * pow_i(x1, 2)) + 3 * (x3 * x7 * x1) - pow_i(x3, 2) * x5)
                  / spow(5),
          -75543, 500000, 563009, 1000000, "entry 6 of G");
    d.add(17, lit(-10) * P(7) + 2 * (x5 * P(5)) + x7 * P(6),
          -150409, 500000, 1153481, 1000000, "entry 8 of G");
    d.add(18, lit(10) * (x3 - 2 * (A * x7)) / pow_i(x3, 3),
          -85201, 500000, 113003, 1000000, "entry 9 of G");
    d.add(19, x5 * P(9) + x7 * P(8),
          -10003, 500000, 475393, 1000000, "entry (6,1) of DG");
    d.add(20, x5 * P(8) + x7 * P(11),
          -191879, 1000000, 9681, 200000, "entry (6,3) of DG");
    d.add(21, -(lit(600) * A) / pow_i(x3, 4),
          -324799, 1000000, -257987, 1000000, "part of entry (8,3) of DG");
    // DG(8,3) = d(phi17)/dx3 = phi21 + 2 x5 phi11 + x7 phi13; the audit
    // tests pin this identity against a finite-difference oracle.
    d.add(22, P(21) + 2 * (x5 * P(11)) + x7 * P(13),
          -147363, 1000000, 289227, 500000, "entry (8,3) of DG");
    d.add(23, lit(60) * A * x7 / pow_i(x3, 4) - lit(20) / pow_i(x3, 3),
          -961, 40000, 32973, 500000, "entry (9,3) of DG");
    d.add(24, x8 * P(8) + x6 * P(9),
          -1617, 125000, 69167, 200000, "part of entry (6,1) of DG1");
    d.add(25, -(lit(4800) * (16 * pow_i(x1, 4) - 27 * (pow_i(x3, 2) * pow_i(x1, 2))
                             + pow_i(x3, 4))) / spow(9),
          -15923, 250000, 8349, 500000, "part of entry (6,1) of DG1");
    d.add(26, lit(24000) * (16 * (pow_i(x1, 3) * x3) - 3 * (x1 * pow_i(x3, 3))) / spow(9),
          -85577, 1000000, 1011, 1000000, "part of entry (6,1) of DG1");
    d.add(27, x4 * P(25) + x2 * P(26),
          -33469, 250000, 4507, 200000, "part of entry (6,1) of DG1");
    d.add(28, lit(4800) * (128 * pow_i(x1, 4) - 96 * (pow_i(x3, 2) * pow_i(x1, 2))
                           + 3 * pow_i(x3, 4)) / spow(9),
          -64021, 1000000, 7643, 40000, "part of entry (6,1) of DG1");
    d.add(29, x2 * P(28) + x4 * P(26),
          -12111, 125000, 314853, 1000000, "part of entry (6,1) of DG1");
    d.add(30, P(24) + x7 * P(27) + x5 * P(29),
          -41247, 100000, 505637, 1000000, "entry (6,1) of DG1");
    d.add(31, x6 * P(8) + x8 * P(11),
          -118703, 1000000, 73297, 1000000, "part of entry (6,3) of DG1");
    d.add(32, -(lit(24000) * (3 * (pow_i(x1, 3) * x3) - x1 * pow_i(x3, 3))) / spow(9),
          -337, 1000000, 6067, 200000, "part of entry (6,3) of DG1");
    d.add(33, x2 * P(25) + x4 * P(32),
          -105549, 1000000, 25351, 1000000, "part of entry (6,3) of DG1");
    d.add(34, P(31) + x7 * P(33) + x5 * P(27),
          -1411, 3125, 37563, 250000, "entry (6,3) of DG1");
    d.add(35, lit(2400) * A * x4 / pow_i(x3, 5),
          -45369, 1000000, 11, 8000, "part of entry (8,3) of DG1");
    d.add(36, P(35) + x8 * P(13) + 2 * (x6 * P(11)),
          -113807, 1000000, 406413, 1000000, "part of entry (8,3) of DG1");
    d.add(37, lit(600) * (-(lit(10) * pow_i(A, 2)) / pow_i(x3, 6) + lit(8) * pow_i(x3, 4) / spow(9)
                          - lit(108) * pow_i(x1, 2) * pow_i(x3, 2) / spow(9)
                          + lit(12) * pow_i(x1, 2) / spow(7) + lit(1) / pow_i(x3, 5)),
          -579, 4000, -2871, 50000, "part of entry (8,3) of DG1");
    d.add(38, x4 * P(37) + 2 * (x2 * P(32)),
          -2459, 1000000, 138773, 1000000, "part of entry (8,3) of DG1");
    d.add(39, P(36) + 2 * (x5 * P(33)) + x7 * P(38),
          -117597, 1000000, 400107, 1000000, "entry (8,3) of DG1");
    d.add(40, lit(60) * (x3 * (A * x8 + x4) - 4 * (A * x4 * x7)) / pow_i(x3, 5),
          -2853, 1000000, 32303, 500000, "entry (9,3) of DG1");
    d.add(41, lit(400) * (8 * (x9 * pow_i(x1, 2)) + 3 * (x3 * x11 * x1) - pow_i(x3, 2) * x9)
                  / spow(5),
          -19173, 20000, 83109, 500000, "entry 6 of U");
    d.add(42, 2 * (x9 * P(5)) + x11 * P(6),
          -19549, 500000, 205701, 250000, "entry 8 of U");
    d.add(43, x11 * P(8) + x9 * P(9),
          -9163, 1000000, 256717, 500000, "entry (6,1) of DU");
    d.add(44, x11 * P(11) + x9 * P(8),
          -3447, 50000, 152321, 500000, "entry (6,3) of DU");
    d.add(45, 2 * (x9 * P(11)) + x11 * P(13),
          -280299, 1000000, 197197, 1000000, "entry (8,3) of DU");
    d.add(46, x12 * P(8) + x10 * P(9),
          -7757, 1000000, 10303, 31250, "part of entry (6,1) of DU1");
    d.add(47, x4 * P(26) + x2 * P(28),
          -12111, 125000, 314853, 1000000, "part of entry (6,1) of DU1");
    d.add(48, x11 * P(27) + x9 * P(47) + P(46),
          -203233, 500000, 35511, 62500, "entry (6,1) of DU1");
    d.add(49, x12 * P(11) + x10 * P(8),
          -67831, 1000000, 30533, 200000, "part of entry (6,3) of DU1");
    d.add(50, x9 * P(27) + x11 * P(33) + P(49),
          -105939, 250000, 218721, 1000000, "entry (6,3) of DU1");
    d.add(51, lit(1200) * pow_i(A, 2) / pow_i(x3, 5) - lit(1200) * pow_i(x3, 5) / spow(9)
                  + lit(2400) * pow_i(x1, 2) * pow_i(x3, 3) / spow(9)
                  + lit(28800) * pow_i(x1, 4) * x3 / spow(9) - lit(150) / pow_i(x3, 4),
          44031, 500000, 9611, 40000, "part of entry (8,3) of DU1");
    d.add(52, 2 * (x10 * P(11)) + x12 * P(51),
          -141351, 1000000, 53783, 250000, "part of entry (8,3) of DU1");
    d.add(53, 2 * (x9 * P(33)) + x11 * P(38) + P(52),
          -569761, 1000000, 429957, 1000000, "entry (8,3) of DU1");
    d.add(54, lit(100) * (A - lit(a0)) * (A + lit(a0)) / pow_i(x3, 3),
          -19, 500000, 19, 500000, "entry 4 of the W/G/U difference rows");
    d.add(55, lit(10) * (A - lit(a0)) / pow_i(x3, 2),
          -1, 200000, 1, 200000, "entry 5 of the W difference row");
    d.add(56, -(lit(100) * (A - lit(a0)) * (3 * (A * x7) + 3 * (lit(a0) * x7) - 2 * x3))
                  / pow_i(x3, 4),
          -1, 40000, 1, 40000, "entry 8 of the G difference row");
    d.add(57, -(lit(20) * x7 * (A - lit(a0))) / pow_i(x3, 3),
          -3, 1000000, 3, 1000000, "entry 9 of the G difference row");
    d.add(58, -(lit(300) * x11 * (A - lit(a0)) * (A + lit(a0))) / pow_i(x3, 4),
          -1, 1000000, 1, 1000000, "entry 8 of the U difference row");
    return d;
}

}  // namespace

const std::vector<PhiEntry>& dictionary() {
    static const Dict d = build_dictionary();
    return d.entries;
}

const PhiEntry& phi_entry(int i) {
    const auto& entries = dictionary();
    if (i < 1 || i > static_cast<int>(entries.size()))
        throw std::out_of_range("phi_entry: index " + std::to_string(i));
    return entries[static_cast<size_t>(i - 1)];
}

// ---------------------------------------------------------------------------
// Domain box

namespace {

std::array<Ival, 13> build_box() {
    auto iv = [](long ln, long ld, long hn, long hd) { return Ival(Rat(ln, ld), Rat(hn, hd)); };
    return {
        iv(-1, 100, 62, 25),    // I1
        iv(-1, 100, 3, 2),      // I2
        iv(189, 20, 1001, 100), // I3
        iv(-33, 100, 1, 100),   // I4
        iv(-1, 100, 31, 100),   // I5
        iv(-1, 100, 12, 25),    // I6
        iv(-1, 100, 69, 25),    // I7
        iv(-1, 100, 42, 25),    // I8
        iv(-1, 100, 101, 50),   // I9
        iv(1, 2, 101, 100),     // I10
        iv(-1, 100, 81, 100),   // I11
        iv(-1, 100, 89, 100),   // I12
        Ival(Rat::parse("43170106052787/10000000000000"),
             Rat::parse("43170844652787/10000000000000")),  // I13 (parameter)
    };
}

}  // namespace

const Ival& domain_interval(int i) {
    static const std::array<Ival, 13> box = build_box();
    if (i < 1 || i > 13) throw std::out_of_range("domain_interval: index");
    return box[static_cast<size_t>(i - 1)];
}

StatePoint domain_box() {
    StatePoint p;
    for (int i = 1; i <= 12; ++i) p.set(i, domain_interval(i));
    p.a = domain_interval(13);
    return p;
}

const Ival& theta_interval() {
    static const Ival j5(Rat(-1, 100), Rat(7, 5));
    return j5;
}

const Ival& theta_a_interval() {
    static const Ival j9(Rat(-1, 100), Rat(3, 25));
    return j9;
}

// ---------------------------------------------------------------------------
// Field specifications

namespace {

std::vector<Rat> w_initial(const Rat& b) { return {Rat(0), b, Rat(10), Rat(0), Rat(0)}; }
std::vector<Rat> g_initial(const Rat& b) {
    return {Rat(0), b, Rat(10), Rat(0), Rat(0), Rat(0), Rat(0), Rat(0), Rat(0)};
}
std::vector<Rat> u_initial(const Rat& b) {
    return {Rat(0), b, Rat(10), Rat(0), Rat(0), Rat(1), Rat(0), Rat(0)};
}
std::vector<Rat> intro_initial(const Rat& b) { return {b}; }

FieldSpec build_W() {
    FieldSpec fs;
    fs.name = "W";
    fs.dim = 5;
    auto P = [](int i) { return phi_ref(i); };
    Expr z = lit(0), one = lit(1);
    fs.f = {coord(2), P(1), coord(4), P(2), P(3)};
    fs.D = {{z, one, z, z, z},
            {P(4), z, P(5), z, z},
            {z, z, z, one, z},
            {2 * P(5), z, P(6), z, z},
            {z, z, P(7), z, z}};
    fs.D1 = {{P(4), z, P(5), z, z},
             {P(10), P(4), P(12), P(5), z},
             {2 * P(5), z, P(6), z, z},
             {2 * P(12), 2 * P(5), P(14), P(6), z},
             {z, z, P(15), P(7), z}};
    fs.delta = {z, z, z, P(54), P(55)};
    fs.roles = {1, 2, 3, 4, 0};
    fs.run_box = {domain_interval(1), domain_interval(2), domain_interval(3),
                  domain_interval(4), theta_interval()};
    fs.rounding = GridSpec::Mode::Nearest;
    fs.initial_state = &w_initial;
    return fs;
}

FieldSpec build_G() {
    FieldSpec fs;
    fs.name = "G";
    fs.dim = 9;
    auto P = [](int i) { return phi_ref(i); };
    Expr z = lit(0), one = lit(1);
    fs.f = {coord(2), P(1), coord(4), P(2), coord(6), P(16), coord(8), P(17), P(18)};
    fs.D = {{z, one, z, z, z, z, z, z, z},
            {P(4), z, P(5), z, z, z, z, z, z},
            {z, z, z, one, z, z, z, z, z},
            {2 * P(5), z, P(6), z, z, z, z, z, z},
            {z, z, z, z, z, one, z, z, z},
            {P(19), z, P(20), z, P(4), z, P(5), z, z},
            {z, z, z, z, z, z, z, one, z},
            {2 * P(20), z, P(22), z, 2 * P(5), z, P(6), z, z},
            {z, z, P(23), z, z, z, P(7), z, z}};
    fs.D1 = {{P(4), z, P(5), z, z, z, z, z, z},
             {P(10), P(4), P(12), P(5), z, z, z, z, z},
             {2 * P(5), z, P(6), z, z, z, z, z, z},
             {2 * P(12), 2 * P(5), P(14), P(6), z, z, z, z, z},
             {P(19), z, P(20), z, P(4), z, P(5), z, z},
             {P(30), P(19), P(34), P(20), P(10), P(4), P(12), P(5), z},
             {2 * P(20), z, P(22), z, 2 * P(5), z, P(6), z, z},
             {2 * P(34), 2 * P(20), P(39), P(22), 2 * P(12), 2 * P(5), P(14), P(6), z},
             {z, z, P(40), P(23), z, z, P(15), P(7), z}};
    fs.delta = {z, z, z, P(54), z, z, z, P(56), P(57)};
    fs.roles = {1, 2, 3, 4, 5, 6, 7, 8, 0};
    fs.run_box = {domain_interval(1), domain_interval(2), domain_interval(3), domain_interval(4),
                  domain_interval(5), domain_interval(6), domain_interval(7), domain_interval(8),
                  theta_a_interval()};
    fs.rounding = GridSpec::Mode::Nearest;
    fs.initial_state = &g_initial;
    return fs;
}

FieldSpec build_U() {
    FieldSpec fs;
    fs.name = "U";
    fs.dim = 8;
    auto P = [](int i) { return phi_ref(i); };
    Expr z = lit(0), one = lit(1);
    fs.f = {coord(2), P(1), coord(4), P(2), coord(10), P(41), coord(12), P(42)};
    fs.D = {{z, one, z, z, z, z, z, z},
            {P(4), z, P(5), z, z, z, z, z},
            {z, z, z, one, z, z, z, z},
            {2 * P(5), z, P(6), z, z, z, z, z},
            {z, z, z, z, z, one, z, z},
            {P(43), z, P(44), z, P(4), z, P(5), z},
            {z, z, z, z, z, z, z, one},
            {2 * P(44), z, P(45), z, 2 * P(5), z, P(6), z}};
    fs.D1 = {{P(4), z, P(5), z, z, z, z, z},
             {P(10), P(4), P(12), P(5), z, z, z, z},
             {2 * P(5), z, P(6), z, z, z, z, z},
             {2 * P(12), 2 * P(5), P(14), P(6), z, z, z, z},
             {P(43), z, P(44), z, P(4), z, P(5), z},
             {P(48), P(43), P(50), P(44), P(10), P(4), P(12), P(5)},
             {2 * P(44), z, P(45), z, 2 * P(5), z, P(6), z},
             {2 * P(50), 2 * P(44), P(53), P(45), 2 * P(12), 2 * P(5), P(14), P(6)}};
    fs.delta = {z, z, z, P(54), z, z, z, P(58)};
    fs.roles = {1, 2, 3, 4, 9, 10, 11, 12};
    fs.run_box = {domain_interval(1), domain_interval(2), domain_interval(3), domain_interval(4),
                  domain_interval(9), domain_interval(10), domain_interval(11),
                  domain_interval(12)};
    fs.rounding = GridSpec::Mode::Nearest;
    fs.initial_state = &u_initial;
    return fs;
}

FieldSpec build_intro() {
    FieldSpec fs;
    fs.name = "intro";
    fs.dim = 1;
    // y' = y - y^2/3 on the x1 slot; exact rational steps
    fs.f = {coord(1) - pow_i(coord(1), 2) / lit(3)};
    fs.D = {{lit(1) - 2 * coord(1) / lit(3)}};
    fs.D1 = {{(lit(1) - 2 * coord(1) / lit(3)) * (lit(1) - 2 * coord(1) / lit(3))
              - 2 * (coord(1) - pow_i(coord(1), 2) / lit(3)) / lit(3)}};
    fs.delta = {lit(0)};
    fs.roles = {1};
    fs.run_box = {Ival(Rat(-1000), Rat(1000))};
    fs.rounding = GridSpec::Mode::Floor;
    fs.initial_state = &intro_initial;
    return fs;
}

}  // namespace

const FieldSpec& W() { static const FieldSpec fs = build_W(); return fs; }
const FieldSpec& G() { static const FieldSpec fs = build_G(); return fs; }
const FieldSpec& U() { static const FieldSpec fs = build_U(); return fs; }
const FieldSpec& intro_field() { static const FieldSpec fs = build_intro(); return fs; }

const FieldSpec& field_by_name(const std::string& name) {
    if (name == "W") return W();
    if (name == "G") return G();
    if (name == "U") return U();
    if (name == "intro") return intro_field();
    throw std::invalid_argument("field_by_name: unknown field " + name);
}

StatePoint FieldSpec::state_point(const std::vector<Rat>& z, const Rat& a) const {
    if (static_cast<int>(z.size()) != dim)
        throw std::invalid_argument("state_point: dimension mismatch for field " + name);
    StatePoint p;
    for (int i = 0; i < dim; ++i)
        if (roles[static_cast<size_t>(i)] > 0)
            p.set(roles[static_cast<size_t>(i)], Ival(z[static_cast<size_t>(i)]));
    p.a = Ival(a);
    return p;
}

StatePoint FieldSpec::box_point() const {
    StatePoint p;
    for (int i = 0; i < dim; ++i)
        if (roles[static_cast<size_t>(i)] > 0)
            p.set(roles[static_cast<size_t>(i)], run_box[static_cast<size_t>(i)]);
    p.a = domain_interval(13);
    return p;
}

std::vector<Ival> eval_field(const FieldSpec& fs, const StatePoint& p, const Rat& sqrt_width,
                             PhiResolver resolver) {
    EvalContext ctx(p, sqrt_width, std::move(resolver));
    std::vector<Ival> out;
    out.reserve(fs.f.size());
    for (const auto& c : fs.f) out.push_back(ctx.eval(c));
    return out;
}

std::vector<Ival> eval_f1(const FieldSpec& fs, const StatePoint& p, const Rat& sqrt_width,
                          PhiResolver resolver) {
    EvalContext ctx(p, sqrt_width, std::move(resolver));
    std::vector<Ival> f;
    f.reserve(fs.f.size());
    for (const auto& c : fs.f) f.push_back(ctx.eval(c));
    std::vector<Ival> out(static_cast<size_t>(fs.dim), Ival(Rat(0)));
    for (int i = 0; i < fs.dim; ++i) {
        Ival acc{Rat(0)};
        for (int j = 0; j < fs.dim; ++j) {
            const Expr& e = fs.D[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (e->op == Op::Const && e->value == Rat(0)) continue;
            acc = acc + ctx.eval(e) * f[static_cast<size_t>(j)];
        }
        out[static_cast<size_t>(i)] = acc;
    }
    return out;
}

Rat frobenius_bound(const std::vector<std::vector<Expr>>& matrix, const StatePoint& box,
                    PhiResolver resolver) {
    EvalContext ctx(box, Rat::pow10(-20), std::move(resolver));
    Rat sum(0);
    for (const auto& row : matrix)
        for (const auto& e : row) {
            if (e->op == Op::Const && e->value == Rat(0)) continue;
            Rat m = ctx.eval(e).abs_bound();
            sum += m * m;
        }
    return exact::sqrt_enclosure(sum, Rat::pow10(-30)).hi;
}

}  // namespace rtm::fields
