#include "rtm/integrator.hpp"

#include <stdexcept>

namespace rtm::integrator {

using fields::EvalContext;
using fields::Expr;
using fields::Op;

namespace {

std::vector<Ival> step_enclosure(EvalContext& ctx, const FieldSpec& fs,
                                 const std::vector<Rat>& z, const Rat& h, int order) {
    std::vector<Ival> f;
    f.reserve(static_cast<size_t>(fs.dim));
    for (const auto& c : fs.f) f.push_back(ctx.eval(c));

    Rat h2_half = h * h / Rat(2);
    std::vector<Ival> y;
    y.reserve(static_cast<size_t>(fs.dim));
    for (int i = 0; i < fs.dim; ++i) {
        Ival acc = Ival(z[static_cast<size_t>(i)]) + f[static_cast<size_t>(i)].scaled(h);
        if (order >= 2) {
            Ival f1{Rat(0)};
            for (int j = 0; j < fs.dim; ++j) {
                const Expr& e = fs.D[static_cast<size_t>(i)][static_cast<size_t>(j)];
                if (e->op == Op::Const && e->value == Rat(0)) continue;
                f1 = f1 + ctx.eval(e) * f[static_cast<size_t>(j)];
            }
            acc = acc + f1.scaled(h2_half);
        }
        y.push_back(acc);
    }
    return y;
}

}  // namespace

std::vector<Ival> taylor_step(const FieldSpec& field, const std::vector<Rat>& z, const Rat& a,
                              const Rat& h, int order, const Rat& budget) {
    if (order < 1 || order > 2) throw std::invalid_argument("taylor_step: order must be 1 or 2");
    Rat sqrt_width = Rat::pow10(-20);
    for (int attempt = 0;; ++attempt) {
        EvalContext ctx(field.state_point(z, a), sqrt_width);
        auto y = step_enclosure(ctx, field, z, h, order);
        bool ok = true;
        for (const auto& c : y)
            if (c.width() > budget) { ok = false; break; }
        if (ok) return y;
        if (attempt >= 60) {
            std::string diag;
            for (size_t i = 0; i < y.size(); ++i)
                if (y[i].width() > budget)
                    diag += " component " + std::to_string(i + 1) +
                            " width " + y[i].width().str();
            throw std::runtime_error("taylor_step: enclosure budget unattainable:" + diag);
        }
        sqrt_width = sqrt_width / Rat(2);
    }
}

RunRecord round_taylor_run(const RunConfig& cfg) {
    if (!cfg.field) throw std::invalid_argument("round_taylor_run: no field");
    if (cfg.steps < 0 || cfg.t_end <= Rat(0))
        throw std::invalid_argument("round_taylor_run: bad steps or time");
    const FieldSpec& fs = *cfg.field;
    if (static_cast<int>(cfg.initial_state.size()) != fs.dim)
        throw std::invalid_argument("round_taylor_run: initial state dimension");

    RunRecord rec;
    rec.cfg = cfg;
    Rat h = cfg.t_end / Rat(cfg.steps == 0 ? 1 : cfg.steps);
    Rat H = cfg.grid.spacing();
    Rat budget = H / Rat(2);

    std::vector<Rat> z = cfg.initial_state;
    rec.min_margin.assign(static_cast<size_t>(fs.dim), Rat(1000000));

    auto record_state = [&](const std::vector<Rat>& s) {
        if (cfg.keep_sequence || rec.z.empty()) rec.z.push_back(s);
        else if (rec.z.size() < 2) rec.z.push_back(s);
        else rec.z.back() = s;
    };
    auto check_containment = [&](const std::vector<Rat>& s, long step) {
        if (!cfg.check_containment) return;
        for (int i = 0; i < fs.dim; ++i) {
            const Ival& box = fs.run_box[static_cast<size_t>(i)];
            Rat m = exact::min(s[static_cast<size_t>(i)] - box.lo,
                               box.hi - s[static_cast<size_t>(i)]);
            if (m < rec.min_margin[static_cast<size_t>(i)])
                rec.min_margin[static_cast<size_t>(i)] = m;
            if (m < cfg.epsilon && rec.containment_ok) {
                rec.containment_ok = false;
                rec.first_failure_step = step;
            }
        }
    };

    record_state(z);
    check_containment(z, 0);

    for (long i = 0; i < cfg.steps; ++i) {
        auto y = taylor_step(fs, z, cfg.a, h, cfg.order, budget);
        std::vector<Rat> zn(static_cast<size_t>(fs.dim));
        for (int j = 0; j < fs.dim; ++j) {
            const Ival& enc = y[static_cast<size_t>(j)];
            if (fs.rounding == GridSpec::Mode::Floor) {
                if (!enc.is_point())
                    throw std::runtime_error("round_taylor_run: floor rounding needs exact steps");
                zn[static_cast<size_t>(j)] = exact::floor_to_grid(enc.lo, cfg.grid);
            } else {
                auto r = exact::nearest_grid_in(enc, cfg.grid);
                if (!r.certified) {
                    rec.rounding_ok = false;
                    if (rec.first_failure_step < 0) rec.first_failure_step = i + 1;
                }
                zn[static_cast<size_t>(j)] = r.value;
            }
        }
        z = zn;
        record_state(z);
        check_containment(z, i + 1);
    }
    rec.final_state = z;

    if (cfg.constants) {
        rec.H_tilde = global_error_bound(*cfg.constants, h, H, cfg.steps, cfg.order);
        rec.epsilon_ok = cfg.epsilon > cfg.constants->M0 * h + rec.H_tilde;
        rec.certified = rec.rounding_ok && rec.containment_ok && rec.epsilon_ok;
    }
    return rec;
}

namespace {

// Round an upper bound outward onto a short decimal lattice; keeps the
// certificates' rationals compact without giving up soundness.
Rat ceil_to_lattice(const Rat& v) {
    static const Rat grid = Rat::pow10(-30);
    Rat snapped = grid * Rat((v / grid).floor());
    return snapped < v ? snapped + grid : snapped;
}

}  // namespace

Rat global_error_bound(const HypothesisConstants& c, const Rat& h, const Rat& H, long k,
                       int order, int exp_terms) {
    if (k == 0) return Rat(0);
    if (h <= Rat(0) || H <= Rat(0))
        throw std::invalid_argument("global_error_bound: h and H must be positive");
    Rat L = c.lipschitz(h, order);
    if (!(L > Rat(0))) throw std::domain_error("global_error_bound: L must be positive");
    long fact = 1;
    for (int i = 2; i <= order + 1; ++i) fact *= i;
    Rat p = c.M_rss * h.pow(order) / Rat(fact) + H / h;
    Rat e = exact::exp_upper_bound(L * Rat(k) * h, exp_terms);
    return ceil_to_lattice(p / L * (e - Rat(1)));
}

Rat comparison_bound(const Rat& K, const Rat& eps_f, const Rat& d0, const Rat& dt_abs,
                     int exp_terms) {
    if (!(K > Rat(0))) throw std::domain_error("comparison_bound: K must be positive");
    if (eps_f < Rat(0) || d0 < Rat(0) || dt_abs < Rat(0))
        throw std::invalid_argument("comparison_bound: negative input");
    Rat e = exact::exp_upper_bound(K * dt_abs, exp_terms);
    return ceil_to_lattice(d0 * e + eps_f / K * (e - Rat(1)));
}

std::vector<Ival> certified_state(const RunRecord& rec, long j) {
    if (!rec.certified) throw std::logic_error("certified_state: run record not certified");
    if (j < 0 || j > rec.cfg.steps) throw std::out_of_range("certified_state: step index");
    const std::vector<Rat>* state = nullptr;
    if (rec.cfg.keep_sequence) {
        state = &rec.z.at(static_cast<size_t>(j));
    } else if (j == 0) {
        state = &rec.z.front();
    } else if (j == rec.cfg.steps) {
        state = &rec.final_state;
    } else {
        throw std::logic_error("certified_state: sequence not kept");
    }
    std::vector<Ival> out;
    out.reserve(state->size());
    for (const auto& v : *state) out.push_back(Ival(v).widened(rec.H_tilde));
    return out;
}

}  // namespace rtm::integrator
