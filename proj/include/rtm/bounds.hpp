// Range certification over boxes: adaptive branch-and-bound validation of
// the tabulated dictionary bounds, the hypothesis-constant tables feeding
// the global error bound, and the second-derivative range certificates.
#pragma once

#include "rtm/fields.hpp"
#include "rtm/integrator.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rtm::bounds {

using exact::Ival;
using exact::Rat;
using fields::Expr;
using fields::FieldSpec;
using fields::PhiResolver;
using fields::StatePoint;

enum class Status { Certified, Inconclusive, Failed };

struct BoundTask {
    std::string name;
    Expr expr;
    StatePoint box;           // only the coordinates the expression reads matter
    Ival target;
    bool strict = false;      // require range strictly inside the target
    long budget = 100000;     // leaf-box limit
    PhiResolver resolver;     // optional: resolve phi references to fixed ranges
};

struct BoundResult {
    Status status = Status::Inconclusive;
    Ival range{Rat(0)};       // sound enclosure of the expression's range
    long boxes_used = 0;
    std::string detail;
};

/// Certify range ⊆ target by adaptive subdivision along the coordinates the
/// expression reads. Budget exhaustion yields Inconclusive; an exactly
/// evaluated sample outside the target yields Failed (the claim is false).
BoundResult optimize_over_box(const BoundTask& task);

/// Tightest sound range enclosure reachable within the budget: subdivision
/// driven at whichever leaf holds the current hull ends.
Ival tighten_range(const Expr& expr, const StatePoint& base, const PhiResolver& resolver,
                   long budget);

/// Per-entry verdicts for the 58 tabulated dictionary bounds, in order.
struct DictionaryCheck {
    int phi = 0;
    Status status = Status::Inconclusive;
    Ival computed{Rat(0)};
    Ival claimed{Rat(0)};
    long boxes_used = 0;
};

struct CertifiedTable {
    std::vector<DictionaryCheck> checks;
    // Sound, certified ranges for every phi: the tabulated bound where it
    // certified, otherwise the compositional fallback enclosure.
    std::map<int, Ival> range;

    PhiResolver resolver() const;
    long certified_count() const;
};

/// Validate every tabulated bound and assemble the certified range table.
CertifiedTable certify_dictionary(long budget = 100000);

/// One named inequality check of a hypothesis table.
struct ConstantCheck {
    std::string name;
    Rat computed;    // certified bound produced here
    Rat claimed;     // tabulated constant it must not exceed
    bool ok = false;
};

struct HypothesisCertification {
    integrator::HypothesisConstants constants;   // the claimed (tabulated) values
    std::vector<ConstantCheck> checks;
    bool certified = false;
};

/// Claimed hypothesis constants for a proof field ("W", "G", "U").
const integrator::HypothesisConstants& claimed_constants(const std::string& field_name);

/// Certify |f_j| <= M0, |F2_j| <= M_j, |Df| <= K0, |DF1| <= K1 over the
/// field's containment box, composing through the certified range table.
HypothesisCertification certify_hypotheses(const FieldSpec& field, const CertifiedTable& table);

/// Range certificates for the t-derivative expressions over the small box
/// |x1 - center_F| <= eps, |x3 - center_R| <= eps (parameter over its full
/// interval): the angular rate 10a/x3^2, and the second derivatives of the
/// two radial coordinates. Claims are strict two-sided bounds.
struct SecondDerivativeCheck {
    std::string name;
    Ival computed{Rat(0)};
    Ival claimed{Rat(0)};
    Status status = Status::Inconclusive;
};

std::vector<SecondDerivativeCheck> certify_second_derivative_bounds(const Rat& eps,
                                                                    const Rat& center_F,
                                                                    const Rat& center_R,
                                                                    long budget = 100000);

/// Certified upper bound on the euclidean norm of a difference row, from the
/// certified per-entry ranges.
Rat delta_field_norm_bound(const FieldSpec& field, const CertifiedTable& table);

}  // namespace rtm::bounds
