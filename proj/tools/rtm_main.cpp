// Command-line front end: verification pipeline, single runs, the
// introductory reproduction, trajectory export and the dictionary dump.
#include "rtm/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using rtm::exact::Rat;
using rtm::pipeline::PipelineConfig;
using rtm::pipeline::ProofOutcome;
using rtm::pipeline::Scope;

void emit(const ProofOutcome& out, const std::string& path) {
    std::string text = out.report.dump(2);
    if (path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot open " + path);
        f << text << "\n";
        std::cout << "report written to " << path << "\n";
    }
    std::cout << "verdict: " << out.report.value("verdict", "?") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rtm: certified grid-rounded Taylor integration and the periodic "
                 "three-body certificate pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    int workers = 2;
    bool serial = false, timing = false;
    long budget = 100000;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value configuration file");
        cmd->add_option("--out", out_path, "write the JSON report here");
        cmd->add_option("--workers", workers, "parallel integration workers");
        cmd->add_flag("--serial", serial, "single-threaded execution");
        cmd->add_flag("--timing", timing, "include the timing section in the report");
        cmd->add_option("--budget", budget, "branch-and-bound leaf budget per task");
    };

    // repro intro
    auto* repro = app.add_subcommand("repro", "reproduce stored reference computations");
    auto* repro_intro = repro->add_subcommand("intro", "ten grid-rounded steps of y' = y - y^2/3");
    repro->require_subcommand(1);

    // verify <scope>
    auto* verify = app.add_subcommand("verify", "run certification stages");
    std::string scope_name;
    verify->add_option("scope", scope_name,
                       "bounds | lemma1 | lemma2 | lemma3 | lemma4 | theta | full")
        ->required();
    std::vector<int> only_phi;
    verify->add_option("--phi", only_phi, "restrict the bounds listing to these entries");
    add_common(verify);

    // run --field ...
    auto* run = app.add_subcommand("run", "one certified integration run");
    std::string field_name = "W", a_str, b_str, t_str, csv_path;
    long steps = 30000;
    int grid_exp = 14, order = 2;
    run->add_option("--field", field_name, "W | G | U")->required();
    run->add_option("--a", a_str, "parameter a as p/q")->required();
    run->add_option("--b", b_str, "initial slope b as p/q")->required();
    run->add_option("--t", t_str, "integration time as p/q")->required();
    run->add_option("--steps", steps, "step count");
    run->add_option("--grid-exp", grid_exp, "grid exponent q (spacing 10^-q)");
    run->add_option("--order", order, "Taylor order (1 or 2)");
    run->add_option("--csv", csv_path, "dump the grid sequence to CSV");
    run->add_option("--out", out_path, "write the run report here");

    // export trajectory
    auto* exp = app.add_subcommand("export", "export derived data");
    auto* traj = exp->add_subcommand("trajectory", "CSV of the three body positions");
    std::string ta_str, tb_str, tend_str, traj_out = "trajectory.csv";
    long traj_steps = 2000;
    traj->add_option("--a", ta_str, "parameter a as p/q");
    traj->add_option("--b", tb_str, "initial slope b as p/q");
    traj->add_option("--t-end", tend_str, "end time as p/q");
    traj->add_option("--steps", traj_steps, "row count");
    traj->add_option("--out", traj_out, "output path");
    exp->require_subcommand(1);

    // dump dictionary
    auto* dump = app.add_subcommand("dump", "print stored definitions");
    auto* dump_dict = dump->add_subcommand("dictionary", "every dictionary entry and its bound");
    dump->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (repro_intro->parsed()) {
            ProofOutcome out = rtm::pipeline::repro_intro();
            emit(out, out_path);
            return out.exit_code();
        }
        if (verify->parsed()) {
            PipelineConfig cfg = config_path.empty() ? PipelineConfig::defaults()
                                                     : PipelineConfig::load(config_path);
            cfg.workers = serial ? 1 : workers;
            cfg.with_timing = timing;
            cfg.bound_budget = budget;
            ProofOutcome out = rtm::pipeline::run_proof(cfg, Scope::named(scope_name));
            if (!only_phi.empty() && out.report.contains("dictionary")) {
                rtm::pipeline::json filtered = rtm::pipeline::json::array();
                for (const auto& e : out.report["dictionary"]["entries"])
                    for (int p : only_phi)
                        if (e["phi"] == p) filtered.push_back(e);
                out.report["dictionary"]["entries"] = filtered;
            }
            emit(out, out_path);
            return out.exit_code();
        }
        if (run->parsed()) {
            rtm::integrator::RunConfig rc;
            rc.field = &rtm::fields::field_by_name(field_name);
            rc.a = Rat::parse(a_str);
            rc.initial_state = rc.field->initial_state(Rat::parse(b_str));
            rc.t_end = Rat::parse(t_str);
            rc.steps = steps;
            rc.grid.grid_exponent = grid_exp;
            rc.grid.mode = rc.field->rounding;
            rc.order = order;
            rc.constants = rtm::bounds::claimed_constants(field_name);
            rc.keep_sequence = !csv_path.empty();
            auto rec = rtm::integrator::round_taylor_run(rc);

            rtm::pipeline::json j;
            j["field"] = field_name;
            j["steps"] = steps;
            j["certified"] = rec.certified;
            j["error_bound"] = rec.H_tilde.str();
            rtm::pipeline::json fs = rtm::pipeline::json::array();
            for (const auto& v : rec.final_state) fs.push_back(v.str());
            j["final_state"] = fs;
            j["verdict"] = rec.certified ? "pass" : "fail";
            if (!csv_path.empty()) {
                std::ofstream f(csv_path);
                Rat h = rec.step_size();
                f << "t";
                for (int i = 1; i <= rc.field->dim; ++i) f << ",z" << i;
                f << "\n";
                for (size_t i = 0; i < rec.z.size(); ++i) {
                    f << (Rat(static_cast<long>(i)) * h).str();
                    for (const auto& v : rec.z[i]) f << "," << v.str();
                    f << "\n";
                }
            }
            ProofOutcome out;
            out.report = j;
            out.pass = rec.certified;
            emit(out, out_path);
            return out.exit_code();
        }
        if (traj->parsed()) {
            auto dflt = rtm::topology::ProofConstants::reference();
            Rat a = ta_str.empty() ? dflt.a0 : Rat::parse(ta_str);
            Rat b = tb_str.empty() ? dflt.b0 : Rat::parse(tb_str);
            Rat tend = tend_str.empty() ? Rat(4) * dflt.t0 : Rat::parse(tend_str);
            rtm::pipeline::export_trajectory(a, b, tend, traj_steps, traj_out);
            std::cout << "trajectory written to " << traj_out << "\n";
            return 0;
        }
        if (dump_dict->parsed()) {
            std::cout << rtm::pipeline::dump_dictionary();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
