// Vector-field definitions for the certified three-body computation: the
// function dictionary phi_1..phi_58 with its tabulated range bounds, the
// domain box V, and the fields W (5-dim), G (9-dim), U (8-dim) with their
// first and second derivative matrices and parameter-difference rows.
#pragma once

#include "rtm/exact.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rtm::fields {

using exact::GridSpec;
using exact::Ival;
using exact::Rat;

// ---------------------------------------------------------------------------
// Expression trees. One audited evaluator serves point evaluation, interval
// evaluation over boxes, and the range-certification machinery. s stands for
// sqrt(4 x1^2 + x3^2) and is evaluated once per context and shared.

enum class Op { Const, Coord, ParamA, SPow, Add, Sub, Mul, Div, Pow, Neg, Phi };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    Op op;
    Rat value;     // Const
    int index = 0; // Coord (1..12), SPow/Pow exponent, Phi id
    Expr a, b;
};

Expr lit(const Rat& r);
Expr lit(long n);
Expr coord(int i);
Expr param_a();
Expr spow(int k);                 // s^k, k >= 1
Expr pow_i(Expr e, int k);
Expr operator+(Expr x, Expr y);
Expr operator-(Expr x, Expr y);
Expr operator-(Expr x);
Expr operator*(Expr x, Expr y);
Expr operator*(long k, Expr y);
Expr operator/(Expr x, Expr y);
Expr phi_ref(int i);

/// Coordinate indices (1..12, 13 = the parameter a) an expression reads;
/// s-powers contribute x1 and x3.
std::vector<int> read_set(const Expr& e);

/// Replace every phi reference by the referenced expression (recursively).
Expr expand_phi_refs(const Expr& e);

std::string to_text(const Expr& e);

// ---------------------------------------------------------------------------
// Evaluation

/// Point or box in the ambient coordinates x1..x12 plus the parameter a.
struct StatePoint {
    std::array<std::optional<Ival>, 12> coords;
    std::optional<Ival> a;

    void set(int i, Ival v) { coords.at(i - 1) = std::move(v); }
    const Ival& get(int i) const;
    const Ival& param() const;
};

/// Optional override used when a phi reference should evaluate to a
/// pre-certified range instead of recursing into its expression.
using PhiResolver = std::function<std::optional<Ival>(int)>;

class EvalContext {
public:
    explicit EvalContext(StatePoint point, Rat sqrt_width = Rat::pow10(-20),
                         PhiResolver resolver = nullptr);

    const StatePoint& point() const { return point_; }
    const Rat& sqrt_width() const { return sqrt_width_; }

    Ival eval(const Expr& e);
    Ival eval_phi(int i);
    const Ival& s_enclosure();

private:
    StatePoint point_;
    Rat sqrt_width_;
    PhiResolver resolver_;
    std::optional<Ival> s_;
    std::array<std::optional<Ival>, 64> phi_memo_;
    std::array<std::optional<Ival>, 12> spow_memo_;
};

/// Sound enclosure of phi_i over the point/box p.
Ival eval_phi(int i, const StatePoint& p, const Rat& sqrt_width = Rat::pow10(-20));

// ---------------------------------------------------------------------------
// Dictionary

struct PhiEntry {
    int id;
    Expr expr;
    Ival tabulated_bound;   // claimed range over the domain box V
    std::string role;       // where the function appears (field entry, matrix entry)
};

const std::vector<PhiEntry>& dictionary();
const PhiEntry& phi_entry(int i);

/// The box V = I1 x ... x I12 x I13 (I13 is the parameter interval).
const Ival& domain_interval(int i);   // i = 1..13
StatePoint domain_box();              // all 13 slots set

// Auxiliary containment intervals for the slots that are not ambient
// coordinates (the angle slot of W, the angle-derivative slot of G).
const Ival& theta_interval();         // J5
const Ival& theta_a_interval();       // J9

// ---------------------------------------------------------------------------
// Field specifications

struct FieldSpec {
    std::string name;
    int dim = 0;
    std::vector<Expr> f;                    // right-hand side components
    std::vector<std::vector<Expr>> D;       // derivative matrix of f
    std::vector<std::vector<Expr>> D1;      // derivative matrix of F1 = D f
    std::vector<Expr> delta;                // parameter-difference rows f - f|_{a=a0}
    std::vector<int> roles;                 // ambient coordinate per slot, 0 = none
    std::vector<Ival> run_box;              // containment interval per slot
    GridSpec::Mode rounding = GridSpec::Mode::Nearest;
    std::vector<Rat> (*initial_state)(const Rat& b) = nullptr;

    StatePoint state_point(const std::vector<Rat>& z, const Rat& a) const;
    StatePoint box_point() const;           // run_box restricted to ambient roles
};

const FieldSpec& W();
const FieldSpec& G();
const FieldSpec& U();
/// 1-dim polynomial field y' = y - y^2/3 used by the introductory
/// reproduction; exact rational steps, floor rounding.
const FieldSpec& intro_field();

const FieldSpec& field_by_name(const std::string& name);

/// Component-wise sound enclosure of the field at p.
std::vector<Ival> eval_field(const FieldSpec& fs, const StatePoint& p,
                             const Rat& sqrt_width = Rat::pow10(-20),
                             PhiResolver resolver = nullptr);

/// Enclosure of F1 = D f evaluated through the stored derivative matrix.
std::vector<Ival> eval_f1(const FieldSpec& fs, const StatePoint& p,
                          const Rat& sqrt_width = Rat::pow10(-20),
                          PhiResolver resolver = nullptr);

/// Rational upper bound on the Frobenius norm sqrt(sum of entry^2) of one of
/// the stored derivative matrices over a box, each entry evaluated through
/// `resolver` (pass the certified-bound table for reproducible constants).
Rat frobenius_bound(const std::vector<std::vector<Expr>>& matrix, const StatePoint& box,
                    PhiResolver resolver = nullptr);

}  // namespace rtm::fields
