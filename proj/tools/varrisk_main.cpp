// varrisk: batch evaluation, property suites, decomposition, duality and
// norm reports for scenario-scale systemic risk instances.
//
// Exit codes: 0 success / all checks passed, 1 check failure (with a
// counterexample emitted), 2 usage error, 3 input validation error.
// Diagnostics go to stderr; results go to stdout or --out.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <varrisk/varrisk.hpp>

namespace {

using namespace varrisk;

struct CommonOpts {
    std::string instance_path;
    std::uint64_t seed = 42;
    long trials = 1000;
    double tol = 1e-9;
    std::string out;
    std::string format = "text";
    std::vector<std::string> only_measures;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_instance = true) {
    auto* inst = cmd->add_option("--instance", opts.instance_path, "Instance file (.json) or csv-bundle directory");
    if (needs_instance) inst->required();
    cmd->add_option("--seed", opts.seed, "Deterministic seed")->capture_default_str();
    cmd->add_option("--trials", opts.trials, "Sampling trials per check")->capture_default_str();
    cmd->add_option("--tol", opts.tol, "Check tolerance")->capture_default_str();
    cmd->add_option("--out", opts.out, "Write results to this path instead of stdout");
    cmd->add_option("--format", opts.format, "Output format: json or text")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    cmd->add_option("--measure", opts.only_measures,
                    "Restrict to the named measures (repeatable; default: all)");
}

Instance load(const CommonOpts& opts) {
    const auto format = std::filesystem::is_directory(opts.instance_path)
                            ? InstanceFormat::csv_bundle
                            : InstanceFormat::json;
    return load_instance(opts.instance_path, format);
}

std::vector<std::pair<std::string, MeasureConfig>> selected_measures(const Instance& inst,
                                                                     const CommonOpts& opts) {
    if (opts.only_measures.empty()) return inst.measures;
    std::vector<std::pair<std::string, MeasureConfig>> picked;
    for (const auto& name : opts.only_measures) {
        bool found = false;
        for (const auto& [mname, m] : inst.measures) {
            if (mname == name) {
                picked.emplace_back(mname, m);
                found = true;
            }
        }
        if (!found) throw validation_error("measures: no measure named '" + name + "'");
    }
    return picked;
}

void emit(const CommonOpts& opts, const std::string& payload) {
    if (opts.out.empty()) {
        std::cout << payload;
    } else {
        std::ofstream f(opts.out);
        if (!f) throw write_error(opts.out + ": cannot open for writing");
        f << payload;
    }
}

int run_eval(const CommonOpts& opts) {
    const Instance inst = load(opts);
    ordered_json results = ordered_json::array();
    std::ostringstream text;
    text << "measure  economy  value\n";
    for (const auto& [mname, m] : selected_measures(inst, opts)) {
        const auto rho = compose(m.rho, m.phi);
        for (const auto& [ename, eco] : inst.economies) {
            const double value = eval_systemic(rho, eco, inst.space);
            ordered_json row;
            row["measure"] = mname;
            row["economy"] = ename;
            row["value"] = value;
            results.push_back(std::move(row));
            text << mname << "  " << ename << "  " << detail::format_csv_double(value) << "\n";
        }
    }
    if (opts.format == "json") {
        ordered_json j;
        j["type"] = "eval";
        j["results"] = std::move(results);
        emit(opts, dump_json(j));
    } else {
        emit(opts, text.str());
    }
    return 0;
}

int run_axioms(const CommonOpts& opts) {
    const Instance inst = load(opts);
    std::vector<AxiomReport> reports;
    for (const auto& [mname, m] : selected_measures(inst, opts)) {
        AxiomReport a = check_certain_axioms(m.phi, inst.order, opts.trials, opts.seed, opts.tol);
        a.subject = mname + ".phi(" + a.subject + ")";
        reports.push_back(std::move(a));

        AxiomReport b = check_simple_axioms(m.rho, inst.space, opts.trials, opts.seed + 1, opts.tol);
        b.subject = mname + ".rho(" + b.subject + ")";
        reports.push_back(std::move(b));

        AxiomReport c = check_systemic_axioms(compose(m.rho, m.phi), inst.space, inst.order,
                                              opts.trials, opts.seed + 2, opts.tol);
        c.subject = mname + ".composed(" + c.subject + ")";
        reports.push_back(std::move(c));

        AxiomReport acc = check_acceptance_properties(m.phi, m.rho, inst.space, inst.order,
                                                      opts.trials, opts.seed + 3, opts.tol);
        acc.subject = mname + ".acceptance(" + acc.subject + ")";
        reports.push_back(std::move(acc));
    }

    bool all = true;
    for (const auto& r : reports) all = all && r.all_passed();

    if (opts.format == "json") {
        ordered_json j;
        j["type"] = "axiom_suite";
        j["all_passed"] = all;
        j["reports"] = ordered_json::array();
        for (const auto& r : reports) j["reports"].push_back(report_to_json(r));
        emit(opts, dump_json(j));
    } else {
        std::ostringstream text;
        for (const auto& r : reports) text << report_to_text(r) << "\n";
        text << (all ? "ALL PASSED" : "FAILURES PRESENT") << "\n";
        emit(opts, text.str());
    }
    return all ? 0 : 1;
}

int run_decompose(const CommonOpts& opts) {
    const Instance inst = load(opts);
    ordered_json results = ordered_json::array();
    std::ostringstream text;
    text << "measure  residual  trials\n";
    for (const auto& [mname, m] : selected_measures(inst, opts)) {
        const Decomposition dec =
            decompose(compose(m.rho, m.phi), inst.space, inst.order, opts.trials, opts.seed);
        ordered_json row;
        row["measure"] = mname;
        row["residual"] = dec.residual;
        row["trials"] = opts.trials;
        results.push_back(std::move(row));
        text << mname << "  " << detail::format_csv_double(dec.residual) << "  " << opts.trials
             << "\n";
    }
    if (opts.format == "json") {
        ordered_json j;
        j["type"] = "decompose";
        j["results"] = std::move(results);
        emit(opts, dump_json(j));
    } else {
        emit(opts, text.str());
    }
    return 0;
}

int run_duality(const CommonOpts& opts, const std::string& method, long budget, long candidates) {
    const Instance inst = load(opts);
    const DualMethod dm = method == "exact" ? DualMethod::exact : DualMethod::sampled;

    const auto measures = selected_measures(inst, opts);
    if (dm == DualMethod::exact) {
        for (const auto& [mname, m] : measures) {
            if (m.phi.kind() != CertainFunction::Kind::weighted_sum) {
                std::cerr << "varrisk: exact method requires linear certain function (measure '"
                          << mname << "')\n";
                return 2;
            }
            if (m.rho.kind() != SimpleRiskMeasure::Kind::expectation &&
                m.rho.kind() != SimpleRiskMeasure::Kind::expected_shortfall &&
                m.rho.kind() != SimpleRiskMeasure::Kind::entropic) {
                std::cerr << "varrisk: exact method requires expectation, expected_shortfall, or "
                             "entropic simple measure (measure '"
                          << mname << "')\n";
                return 2;
            }
        }
    }

    ordered_json results = ordered_json::array();
    std::ostringstream text;
    text << "measure  economy  primal  dual  gap  method  unbounded\n";
    for (const auto& [mname, m] : measures) {
        for (const auto& [ename, eco] : inst.economies) {
            const std::vector<DualPair> cloud = make_candidate_cloud(
                m.phi, m.rho, eco, static_cast<std::size_t>(candidates), inst.space, opts.seed);
            const DualityReport report =
                dual_value(eco, cloud, m.phi, m.rho, inst.space, dm, budget, opts.seed);
            ordered_json row = report_to_json(report);
            row["measure"] = mname;
            row["economy"] = ename;
            results.push_back(std::move(row));
            text << mname << "  " << ename << "  " << detail::format_csv_double(report.primal)
                 << "  " << detail::format_csv_double(report.dual) << "  "
                 << detail::format_csv_double(report.gap) << "  " << report.method << "  "
                 << (report.unbounded_candidates ? "yes" : "no") << "\n";
        }
    }
    if (opts.format == "json") {
        ordered_json j;
        j["type"] = "duality";
        j["results"] = std::move(results);
        emit(opts, dump_json(j));
    } else {
        emit(opts, text.str());
    }
    return 0;
}

int run_norm(const CommonOpts& opts) {
    const Instance inst = load(opts);
    ordered_json results = ordered_json::array();
    std::ostringstream text;
    text << "economy  luxemburg  l1  l2  linf  modular_at_norm\n";
    for (const auto& [ename, eco] : inst.economies) {
        const double lux = luxemburg_norm(eco, inst.exponent, inst.space, inst.order);
        const RandomVariable norms = pointwise_euclidean_norms(eco);
        const double l1 = lp_norm(norms, 1.0, inst.space);
        const double l2 = lp_norm(norms, 2.0, inst.space);
        const double linf = lp_norm(norms, kInf, inst.space);
        const bool finite_exps = inst.exponent.all_finite();
        const double mod = (lux > 0.0 && finite_exps)
                               ? modular(eco, inst.exponent, lux, inst.space, inst.order)
                               : std::numeric_limits<double>::quiet_NaN();
        ordered_json row;
        row["economy"] = ename;
        row["luxemburg"] = lux;
        row["l1"] = l1;
        row["l2"] = l2;
        row["linf"] = linf;
        row["modular_at_norm"] = detail::double_to_json(mod);
        results.push_back(std::move(row));
        text << ename << "  " << detail::format_csv_double(lux) << "  "
             << detail::format_csv_double(l1) << "  " << detail::format_csv_double(l2) << "  "
             << detail::format_csv_double(linf) << "  " << detail::format_csv_double(mod) << "\n";
    }
    if (opts.format == "json") {
        ordered_json j;
        j["type"] = "norm";
        j["results"] = std::move(results);
        emit(opts, dump_json(j));
    } else {
        emit(opts, text.str());
    }
    return 0;
}

int run_gen(const CommonOpts& opts, std::size_t n, std::size_t d, const GeneratorConfig& cfg,
            const std::string& layout) {
    const Instance inst = generate_instance(opts.seed, n, d, cfg);
    if (layout == "csv") {
        if (opts.out.empty()) throw validation_error("gen: --out is required for csv output");
        save_instance(inst, opts.out, InstanceFormat::csv_bundle);
    } else if (!opts.out.empty()) {
        save_instance(inst, opts.out, InstanceFormat::json);
    } else {
        std::cout << dump_json(instance_to_json(inst));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "varrisk: systemic risk measures on variable-exponent scenario spaces.\n"
        "Exit codes: 0 success/all-pass, 1 check failure, 2 usage error, 3 invalid input.\n"
        "VARRISK_THREADS caps the sampling worker count (0 or unset = auto)."};
    app.require_subcommand(1);

    CommonOpts eval_opts, axiom_opts, dec_opts, dual_opts, norm_opts, gen_opts;

    CLI::App* cmd_eval = app.add_subcommand("eval", "Evaluate rho(f) per (measure, economy) pair");
    add_common(cmd_eval, eval_opts);

    CLI::App* cmd_axioms =
        app.add_subcommand("axioms", "Run the aggregator, measure, composition and acceptance-set "
                                     "suites; exit 0 iff everything passes");
    add_common(cmd_axioms, axiom_opts);

    CLI::App* cmd_dec = app.add_subcommand("decompose", "Extract (phi, rho) and report residuals");
    add_common(cmd_dec, dec_opts);

    CLI::App* cmd_dual = app.add_subcommand("duality", "Primal/dual values and gaps per economy");
    add_common(cmd_dual, dual_opts);
    std::string method = "sampled";
    long budget = 10000, candidates = 50;
    cmd_dual->add_option("--method", method, "exact (linear aggregators) or sampled")
        ->check(CLI::IsMember({"exact", "sampled"}))
        ->capture_default_str();
    cmd_dual->add_option("--budget", budget, "Sampling budget per acceptance set")
        ->capture_default_str();
    cmd_dual->add_option("--candidates", candidates, "Dual candidate cloud size")
        ->capture_default_str();

    CLI::App* cmd_norm = app.add_subcommand("norm", "Luxemburg and classical norms per economy");
    add_common(cmd_norm, norm_opts);

    CLI::App* cmd_gen = app.add_subcommand("gen", "Write a generated instance");
    add_common(cmd_gen, gen_opts, false);
    std::size_t gen_n = 8, gen_d = 3;
    GeneratorConfig gen_cfg;
    std::string gen_layout = "json";
    cmd_gen->add_option("--n", gen_n, "Number of atoms")->capture_default_str();
    cmd_gen->add_option("--d", gen_d, "Number of institutions")->capture_default_str();
    cmd_gen->add_option("--economies", gen_cfg.num_economies, "Economies to generate")
        ->capture_default_str();
    cmd_gen->add_option("--scale", gen_cfg.scale, "Economy entry scale")->capture_default_str();
    cmd_gen->add_option("--inf-fraction", gen_cfg.inf_fraction,
                        "Fraction of atoms with an infinite exponent")
        ->capture_default_str();
    cmd_gen->add_option("--range-order", gen_cfg.range_order, "Range space order p")
        ->capture_default_str();
    cmd_gen->add_flag("--full-catalog", gen_cfg.full_catalog,
                      "Include all 12 aggregator x measure pairs");
    cmd_gen->add_option("--layout", gen_layout, "Instance layout: json or csv bundle")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_eval->parsed()) return run_eval(eval_opts);
        if (cmd_axioms->parsed()) return run_axioms(axiom_opts);
        if (cmd_dec->parsed()) return run_decompose(dec_opts);
        if (cmd_dual->parsed()) return run_duality(dual_opts, method, budget, candidates);
        if (cmd_norm->parsed()) return run_norm(norm_opts);
        if (cmd_gen->parsed()) return run_gen(gen_opts, gen_n, gen_d, gen_cfg, gen_layout);
    } catch (const weak_duality_violation& e) {
        std::cerr << "varrisk: " << e.what() << "\n";
        return 1;
    } catch (const internal_check_failure& e) {
        std::cerr << "varrisk: " << e.what() << "\n";
        return 1;
    } catch (const parse_error& e) {
        std::cerr << "varrisk: " << e.what() << "\n";
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "varrisk: " << e.what() << "\n";
        return 3;
    } catch (const invalid_config& e) {
        std::cerr << "varrisk: " << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        std::cerr << "varrisk: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "varrisk: unexpected error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
