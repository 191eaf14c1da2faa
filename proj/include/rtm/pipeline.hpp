// Orchestration: configuration, the certified integration runs, bound
// verification, certificate assembly, report emission, the introductory
// reproduction, and trajectory export.
#pragma once

#include "rtm/bounds.hpp"
#include "rtm/integrator.hpp"
#include "rtm/topology.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rtm::pipeline {

using exact::Ival;
using exact::Rat;
using json = nlohmann::ordered_json;

struct PipelineConfig {
    topology::ProofConstants consts = topology::ProofConstants::reference();
    int grid_exponent = 14;
    int grid_exponent_fine = 15;     // the one extended-precision corner run
    long steps_long = 30000;
    long steps_edge = 35000;
    long steps_fine = 120000;
    Rat epsilon = Rat(1, 1000);
    long bound_budget = 100000;
    int workers = 2;
    bool with_timing = false;
    // offsets that regenerate the published central-rectangle corner tables
    // (they differ from the stated rectangle constants; see the report's
    // reproduction section)
    Rat repro_da = Rat(1, 1000000);
    Rat repro_dt = Rat(1, 500000);
    std::vector<std::string> deviations;   // non-default overrides, filled by the loader

    static PipelineConfig defaults() { return {}; }
    /// Flat key = value file with exact rationals; decimals are rejected.
    static PipelineConfig load(const std::string& path);
};

enum class RunPurpose { LongCenter, PmEvidence, PublishedRepro, PmCenter };

struct RunSpec {
    std::string id;
    std::string field;
    Rat a, b, t_end;
    long steps;
    int grid_exponent;
    RunPurpose purpose;
    std::optional<std::vector<Rat>> published;   // final-state table to compare against
    std::optional<Rat> published_error_bound;    // tabulated H~ upper bound (informational)
};

/// The full run table for a configuration (three long runs, the rectangle
/// evidence and center runs, and the published-table reproductions).
std::vector<RunSpec> run_table(const PipelineConfig& cfg);

struct Scope {
    bool bounds = false;
    bool lemma1 = false, lemma2 = false, lemma3 = false, lemma4 = false;
    bool theta = false;
    bool agreement = false;
    bool assembly = false;

    static Scope full();
    static Scope named(const std::string& name);   // bounds|lemma1..4|theta|full
};

struct ProofOutcome {
    json report;
    bool pass = false;
    bool inconclusive = false;

    int exit_code() const { return pass ? 0 : (inconclusive ? 2 : 1); }
};

/// Execute the requested scope of the certification pipeline and emit the
/// structured report. Deterministic (identical config => identical report,
/// timing section aside) for any worker count.
ProofOutcome run_proof(const PipelineConfig& cfg, const Scope& scope);

/// Order-1 reproduction of the grid-rounded logistic example: ten steps of
/// y' = y - y^2/3 from 1/2 with h = 1/100, H = 10^-6, all twenty rationals
/// compared bit-exactly against the stored table.
ProofOutcome repro_intro();

/// Presentation-grade CSV of the three body positions along a run
/// (series-midpoint trigonometry; flagged non-certified in the header row
/// comment). Columns: t, x1,y1,z1, x2,y2,z2, x3,y3,z3.
void export_trajectory(const Rat& a, const Rat& b, const Rat& t_end, long steps,
                       const std::string& out_path);

/// Render the dictionary (expression text, tabulated bound) for audit.
std::string dump_dictionary();

}  // namespace rtm::pipeline
