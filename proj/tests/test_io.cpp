#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"

using namespace vrt;

namespace {

std::filesystem::path temp_dir() {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() / "varrisk_io_tests";
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = temp_dir() / name;
    std::ofstream out(path);
    out << content;
    out.close();
    return path.string();
}

}  // namespace

TEST_CASE("minimal JSON instance loads with defaults", "[io]") {
    const std::string path = write_temp("minimal.json", R"({
      "space": {"probs": [0.5, 0.5]},
      "economies": {"book": [[1, 2], [3, 4]]}
    })");
    const Instance inst = load_instance(path, InstanceFormat::json);
    REQUIRE(inst.atoms() == 2);
    REQUIRE(inst.dims() == 2);
    REQUIRE(inst.order.z == std::vector<double>{1.0, 1.0});  // default orthant
    REQUIRE(inst.exponent.values == std::vector<double>{2.0, 2.0});
    REQUIRE(inst.economies.front().first == "book");
    REQUIRE(inst.measures.empty());
}

TEST_CASE("instance validation failures carry the field", "[io]") {
    const std::string bad_probs = write_temp("bad_probs.json", R"({
      "space": {"probs": [0.5, 0.6]},
      "economies": {"e": [[1], [2]]}
    })");
    REQUIRE_THROWS_AS(load_instance(bad_probs, InstanceFormat::json),
                      probabilities_do_not_sum_to_one);

    const std::string bad_exp = write_temp("bad_exp.json", R"({
      "space": {"probs": [0.5, 0.5]},
      "exponent": {"values": [0.5, 2], "range_order": 2},
      "economies": {"e": [[1], [2]]}
    })");
    REQUIRE_THROWS_AS(load_instance(bad_exp, InstanceFormat::json), validation_error);

    const std::string ragged = write_temp("ragged.json", R"({
      "space": {"probs": [0.5, 0.5]},
      "economies": {"e": [[1, 2], [3]]}
    })");
    REQUIRE_THROWS_AS(load_instance(ragged, InstanceFormat::json), validation_error);

    const std::string broken = write_temp("broken.json", "{ not json");
    REQUIRE_THROWS_AS(load_instance(broken, InstanceFormat::json), parse_error);
}

TEST_CASE("generation is deterministic in the seed", "[io]") {
    const Instance a = generate_instance(7, 5, 3);
    const Instance b = generate_instance(7, 5, 3);
    REQUIRE(dump_json(instance_to_json(a)) == dump_json(instance_to_json(b)));

    const Instance c = generate_instance(8, 5, 3);
    REQUIRE(dump_json(instance_to_json(a)) != dump_json(instance_to_json(c)));

    const Instance tiny = generate_instance(1, 1, 1);
    REQUIRE(tiny.atoms() == 1);
    REQUIRE(tiny.dims() == 1);
}

TEST_CASE("generation honors the infinite-exponent fraction", "[io]") {
    GeneratorConfig cfg;
    cfg.inf_fraction = 0.25;
    const Instance inst = generate_instance(3, 4, 2, cfg);
    std::size_t infs = 0;
    for (double p : inst.exponent.values)
        if (std::isinf(p)) ++infs;
    REQUIRE(infs == 1);

    GeneratorConfig bad;
    bad.scale = -1.0;
    REQUIRE_THROWS_AS(generate_instance(3, 4, 2, bad), invalid_config);
    REQUIRE_THROWS_AS(generate_instance(3, 0, 2), invalid_config);
}

TEST_CASE("instance JSON round trip is field-for-field", "[io]") {
    GeneratorConfig cfg;
    cfg.inf_fraction = 0.25;
    cfg.full_catalog = true;
    const Instance inst = generate_instance(11, 4, 2, cfg);
    const std::string path = (temp_dir() / "roundtrip.json").string();
    save_instance(inst, path, InstanceFormat::json);
    const Instance back = load_instance(path, InstanceFormat::json);
    REQUIRE(instance_to_json(back) == instance_to_json(inst));

    // serialized numbers carry 17 significant digits
    std::ifstream in(path);
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(body.find("\"inf\"") != std::string::npos);
}

TEST_CASE("instance CSV bundle round trip", "[io]") {
    GeneratorConfig cfg;
    cfg.inf_fraction = 0.5;
    const Instance inst = generate_instance(13, 4, 3, cfg);
    const std::string dir = (temp_dir() / "bundle").string();
    save_instance(inst, dir, InstanceFormat::csv_bundle);
    const Instance back = load_instance(dir, InstanceFormat::csv_bundle);
    REQUIRE(back.space.probs == inst.space.probs);
    REQUIRE(back.order.halfspaces == inst.order.halfspaces);
    REQUIRE(back.order.z == inst.order.z);
    REQUIRE(back.exponent.values == inst.exponent.values);
    REQUIRE(back.exponent.range_order == inst.exponent.range_order);
    REQUIRE(back.economies.size() == inst.economies.size());
    for (std::size_t e = 0; e < inst.economies.size(); ++e) {
        REQUIRE(back.economies[e].first == inst.economies[e].first);
        REQUIRE(back.economies[e].second.data == inst.economies[e].second.data);
    }
    REQUIRE(instance_to_json(back) == instance_to_json(inst));
}

TEST_CASE("axiom report JSON round trips and text carries the witness", "[io]") {
    const FiniteSpace sp = uniform_space(4);
    const AxiomReport report = check_simple_axioms(controls::second_moment_measure(), sp, 50, 112);
    REQUIRE_FALSE(report.all_passed());

    const std::string path = (temp_dir() / "axiom_report.json").string();
    save_report(report, path, ReportFormat::json);
    REQUIRE(load_report(path) == report_to_json(report));

    const std::string text_path = (temp_dir() / "axiom_report.txt").string();
    save_report(report, text_path, ReportFormat::text_table);
    std::ifstream in(text_path);
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(body.find("FAIL") != std::string::npos);
    REQUIRE(body.find("counterexample") != std::string::npos);
    REQUIRE(body.find("a =") != std::string::npos);  // the witness inputs are embedded
}

TEST_CASE("duality report serialization has the gap column", "[io]") {
    const FiniteSpace sp = uniform_space(2);
    const auto sum = CertainFunction::weighted_sum({1.0, 1.0});
    const RandomEconomy f(2, 2, {1.0, 2.0, 3.0, 4.0});
    const DualityReport report =
        dual_value(f, {}, sum, SimpleRiskMeasure::expectation(), sp, DualMethod::exact);

    const std::string path = (temp_dir() / "duality_report.json").string();
    save_report(report, path, ReportFormat::json);
    REQUIRE(load_report(path) == report_to_json(report));

    const std::string text_path = (temp_dir() / "duality_report.txt").string();
    save_report(report, text_path, ReportFormat::text_table);
    std::ifstream in(text_path);
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(body.find("gap") != std::string::npos);
    REQUIRE(body.find("primal") != std::string::npos);
}

TEST_CASE("json writer emits 17 significant digits and round-trips", "[io]") {
    ordered_json j;
    j["x"] = 0.1;
    j["third"] = 1.0 / 3.0;
    j["five"] = 5.0;
    const std::string out = dump_json(j);
    REQUIRE(out.find("0.10000000000000001") != std::string::npos);
    REQUIRE(out.find("0.33333333333333331") != std::string::npos);
    const ordered_json back = ordered_json::parse(out);
    REQUIRE(back["x"].get<double>() == 0.1);
    REQUIRE(back["third"].get<double>() == 1.0 / 3.0);
    REQUIRE(back["five"].get<double>() == 5.0);
}
