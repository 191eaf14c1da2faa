#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rtm/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace rtm::pipeline;
using rtm::exact::Rat;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    std::string path = std::string("pipeline_test_") + name;
    std::ofstream f(path);
    f << text;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("intro reproduction") {
    auto out = repro_intro();
    CHECK(out.pass);
    CHECK(out.report["verdict"] == "pass");
    CHECK(out.report["rows"].size() == 10);
    for (const auto& row : out.report["rows"]) CHECK(row["match"] == true);
}

TEST_CASE("intro comparator notices a perturbed grid") {
    // rerun with a coarser grid; the stored table must no longer match
    const auto& fs = rtm::fields::intro_field();
    rtm::exact::GridSpec g5{5, rtm::exact::GridSpec::Mode::Floor};
    Rat z(1, 2), h(1, 100);
    auto enc = rtm::integrator::taylor_step(fs, {z}, Rat(0), h, 1, Rat(1));
    Rat z1 = rtm::exact::floor_to_grid(enc[0].lo, g5);
    CHECK(z1 != Rat::parse("252083/500000"));
}

TEST_CASE("config parsing") {
    auto path = write_temp("config_ok.txt",
                           "# comment line\n"
                           "dt = 1/2500000\n"
                           "steps_long = 600\n"
                           "workers = 1\n");
    auto cfg = PipelineConfig::load(path);
    CHECK(cfg.steps_long == 600);
    CHECK(cfg.workers == 1);
    CHECK(cfg.consts.dt == Rat(1, 2500000));
    // defaults echoed back are not deviations; overrides are
    REQUIRE(cfg.deviations.size() == 2);
    CHECK(cfg.deviations[0] == "steps_long = 600");
    std::remove(path.c_str());

    auto bad = write_temp("config_decimal.txt", "dt = 0.0000004\n");
    CHECK_THROWS(PipelineConfig::load(bad));
    std::remove(bad.c_str());

    auto unknown = write_temp("config_unknown.txt", "dz = 1/2\n");
    CHECK_THROWS(PipelineConfig::load(unknown));
    std::remove(unknown.c_str());
}

TEST_CASE("run table layout") {
    auto cfg = PipelineConfig::defaults();
    auto runs = run_table(cfg);
    CHECK(runs.size() == 20);
    int published = 0, evidence = 0;
    for (const auto& r : runs) {
        if (r.published) ++published;
        if (r.purpose == RunPurpose::PmEvidence) ++evidence;
        CHECK((r.grid_exponent == 14 || r.grid_exponent == 15));
    }
    CHECK(published == 17);   // three long runs plus fourteen rectangle tables
    CHECK(evidence == 12);
    // the single extended-precision run
    int fine = 0;
    for (const auto& r : runs)
        if (r.grid_exponent == 15) {
            ++fine;
            CHECK(r.id == "l3_top");
            CHECK(r.steps == cfg.steps_fine);
        }
    CHECK(fine == 1);
}

TEST_CASE("trajectory export") {
    auto c = rtm::topology::ProofConstants::reference();
    std::string path = "pipeline_test_traj.csv";
    export_trajectory(c.a0, c.b0, Rat(1, 100), 1, path);
    std::string text = slurp(path);
    std::remove(path.c_str());
    std::istringstream lines(text);
    std::string comment, header, row0, row1, excess;
    std::getline(lines, comment);
    std::getline(lines, header);
    std::getline(lines, row0);
    std::getline(lines, row1);
    bool more = static_cast<bool>(std::getline(lines, excess));
    CHECK(header == "t,x1,y1,z1,x2,y2,z2,x3,y3,z3");
    CHECK_FALSE(more);   // steps = 1 gives exactly two rows
    CHECK(row0 == "0,0,0,0,10,0,-0,-10,-0,-0");
    CHECK(comment.find("not certified") != std::string::npos);
}

TEST_CASE("dictionary dump names every entry with its bound") {
    std::string text = dump_dictionary();
    CHECK(text.find("phi1 ") != std::string::npos);
    CHECK(text.find("phi58") != std::string::npos);
    CHECK(text.find("[215419/500000, 483423/1000000]") != std::string::npos);
}

TEST_CASE("scaled-down pipeline reports are deterministic across worker counts") {
    // tiny step counts: the certificates cannot pass, but the report must be
    // byte-identical for any scheduling
    PipelineConfig cfg = PipelineConfig::defaults();
    cfg.steps_long = 40;
    cfg.steps_edge = 45;
    cfg.steps_fine = 60;
    cfg.bound_budget = 4000;
    cfg.with_timing = false;

    cfg.workers = 1;
    auto serial = run_proof(cfg, Scope::full());
    cfg.workers = 2;
    auto parallel = run_proof(cfg, Scope::full());
    CHECK(serial.report.dump(2) == parallel.report.dump(2));

    cfg.workers = 5;
    auto oversubscribed = run_proof(cfg, Scope::full());
    CHECK(serial.report.dump(2) == oversubscribed.report.dump(2));
}

TEST_CASE("lemma-scoped verification stays within its run budget") {
    PipelineConfig cfg = PipelineConfig::defaults();
    cfg.steps_long = 30;
    cfg.steps_edge = 30;
    cfg.steps_fine = 40;
    cfg.bound_budget = 4000;
    auto out = run_proof(cfg, Scope::named("lemma1"));
    // only the three long runs and the four central-rectangle evidences
    CHECK(out.report["runs"].size() == 7);
    for (const auto& r : out.report["runs"]) {
        std::string id = r["id"];
        bool expected = id.rfind("long_", 0) == 0 || id.rfind("l1_", 0) == 0;
        CHECK(expected);
        CHECK(id.find("published") == std::string::npos);
    }
}
