#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "certain.hpp"
#include "duality.hpp"
#include "errors.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "simple_risk.hpp"
#include "space.hpp"

namespace varrisk {

using ordered_json = nlohmann::ordered_json;

enum class InstanceFormat { json, csv_bundle };
enum class ReportFormat { json, text_table };

// ---------------------------------------------------------------------------
// JSON writing. Keys keep insertion order; floating numbers are emitted as
// decimal with 17 significant digits (enough to round-trip a double);
// nonfinite values are emitted as the strings "inf" / "-inf" / "nan".
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "\"nan\"";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void escape_string(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline void write_json_value(std::string& out, const ordered_json& v, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
    const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
    switch (v.type()) {
        case ordered_json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = v.begin(); it != v.end(); ++it, ++i) {
                out += pad_in;
                escape_string(out, it.key());
                out += ": ";
                write_json_value(out, it.value(), depth + 1);
                if (i + 1 < v.size()) out += ',';
                out += '\n';
            }
            out += pad + "}";
            return;
        }
        case ordered_json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < v.size(); ++i) {
                write_json_value(out, v[i], depth);
                if (i + 1 < v.size()) out += ", ";
            }
            out += ']';
            return;
        }
        case ordered_json::value_t::string:
            escape_string(out, v.get<std::string>());
            return;
        case ordered_json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            return;
        case ordered_json::value_t::number_integer:
            out += std::to_string(v.get<long long>());
            return;
        case ordered_json::value_t::number_unsigned:
            out += std::to_string(v.get<unsigned long long>());
            return;
        case ordered_json::value_t::number_float:
            out += format_double(v.get<double>());
            return;
        default:
            out += "null";
            return;
    }
}

}  // namespace detail

inline std::string dump_json(const ordered_json& v) {
    std::string out;
    detail::write_json_value(out, v, 0);
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Instance
// ---------------------------------------------------------------------------

/// One named (aggregator, simple measure) configuration.
struct MeasureConfig {
    CertainFunction phi = CertainFunction::max_component();
    SimpleRiskMeasure rho = SimpleRiskMeasure::expectation();
};

/// A self-contained scenario problem: probability space, cone order,
/// exponents, named economies, and named measure configurations.
struct Instance {
    FiniteSpace space;
    ConeOrder order;
    Exponent exponent;
    std::vector<std::pair<std::string, RandomEconomy>> economies;
    std::vector<std::pair<std::string, MeasureConfig>> measures;

    std::size_t atoms() const { return space.size(); }
    std::size_t dims() const { return order.dim; }

    void validate() const {
        const std::size_t n = space.size();
        const std::size_t d = order.dim;
        if (exponent.values.size() != n)
            throw validation_error("exponent.values: length must equal the number of atoms");
        if (economies.empty()) throw validation_error("economies: at least one is required");
        for (const auto& [name, eco] : economies) {
            if (eco.atoms != n)
                throw validation_error("economies." + name + ": row count must equal the atoms");
            if (eco.dims != d)
                throw validation_error("economies." + name + ": columns must equal the cone dim");
        }
        for (const auto& [name, m] : measures) {
            const auto& w = m.phi.weights();
            if (!w.empty() && w.size() != d)
                throw validation_error("measures." + name + ": weight length must equal the cone dim");
        }
        auto unique_names = [](const auto& list, const char* what) {
            for (std::size_t i = 0; i < list.size(); ++i)
                for (std::size_t j = i + 1; j < list.size(); ++j)
                    if (list[i].first == list[j].first)
                        throw validation_error(std::string(what) + ": duplicate name '" +
                                               list[i].first + "'");
        };
        unique_names(economies, "economies");
        unique_names(measures, "measures");
    }
};

// ---------------------------------------------------------------------------
// JSON <-> domain objects
// ---------------------------------------------------------------------------

namespace detail {

inline double json_to_double(const ordered_json& v, const std::string& field) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw validation_error(field + ": unrecognized numeric token '" + s + "'");
    }
    if (!v.is_number()) throw validation_error(field + ": expected a number");
    return v.get<double>();
}

inline ordered_json double_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline std::vector<double> json_to_vector(const ordered_json& v, const std::string& field) {
    if (!v.is_array()) throw validation_error(field + ": expected an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(json_to_double(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

inline ordered_json vector_to_json(const std::vector<double>& v) {
    ordered_json arr = ordered_json::array();
    for (double x : v) arr.push_back(double_to_json(x));
    return arr;
}

inline ordered_json matrix_to_json(const RandomEconomy& f) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < f.atoms; ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j = 0; j < f.dims; ++j) row.push_back(double_to_json(f(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline RandomEconomy json_to_matrix(const ordered_json& v, const std::string& field) {
    if (!v.is_array() || v.empty())
        throw validation_error(field + ": expected a nonempty array of rows");
    std::vector<double> data;
    const std::size_t n = v.size();
    std::size_t d = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row = json_to_vector(v[i], field + "[" + std::to_string(i) + "]");
        if (i == 0)
            d = row.size();
        else if (row.size() != d)
            throw validation_error(field + ": rows must all have the same length");
        data.insert(data.end(), row.begin(), row.end());
    }
    if (d == 0) throw validation_error(field + ": rows must not be empty");
    return RandomEconomy(n, d, std::move(data));
}

}  // namespace detail

inline ordered_json certain_to_json(const CertainFunction& phi) {
    ordered_json j;
    switch (phi.kind()) {
        case CertainFunction::Kind::weighted_sum:
            j["kind"] = "weighted_sum";
            j["w"] = detail::vector_to_json(phi.weights());
            break;
        case CertainFunction::Kind::max_component:
            j["kind"] = "max_component";
            break;
        case CertainFunction::Kind::shortfall:
            j["kind"] = "shortfall";
            j["w"] = detail::vector_to_json(phi.weights());
            j["beta"] = phi.beta();
            j["k"] = phi.threshold();
            break;
        case CertainFunction::Kind::custom:
            throw unsupported_kind("certain_to_json: custom aggregators are not serializable");
    }
    return j;
}

inline CertainFunction certain_from_json(const ordered_json& j, const std::string& field) {
    if (!j.is_object() || !j.contains("kind"))
        throw validation_error(field + ": expected an object with a 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "weighted_sum")
        return CertainFunction::weighted_sum(detail::json_to_vector(j.at("w"), field + ".w"));
    if (kind == "max_component") return CertainFunction::max_component();
    if (kind == "shortfall")
        return CertainFunction::shortfall(detail::json_to_vector(j.at("w"), field + ".w"),
                                          detail::json_to_double(j.at("beta"), field + ".beta"),
                                          detail::json_to_double(j.at("k"), field + ".k"));
    throw validation_error(field + ".kind: unknown aggregator '" + kind + "'");
}

inline ordered_json simple_to_json(const SimpleRiskMeasure& rho) {
    ordered_json j;
    switch (rho.kind()) {
        case SimpleRiskMeasure::Kind::expectation:
            j["kind"] = "expectation";
            break;
        case SimpleRiskMeasure::Kind::entropic:
            j["kind"] = "entropic";
            j["beta"] = rho.param();
            break;
        case SimpleRiskMeasure::Kind::expected_shortfall:
            j["kind"] = "expected_shortfall";
            j["level"] = rho.param();
            break;
        case SimpleRiskMeasure::Kind::mean_semideviation:
            j["kind"] = "mean_semideviation";
            j["c"] = rho.param();
            break;
        case SimpleRiskMeasure::Kind::custom:
            throw unsupported_kind("simple_to_json: custom measures are not serializable");
    }
    return j;
}

inline SimpleRiskMeasure simple_from_json(const ordered_json& j, const std::string& field) {
    if (!j.is_object() || !j.contains("kind"))
        throw validation_error(field + ": expected an object with a 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "expectation") return SimpleRiskMeasure::expectation();
    if (kind == "entropic")
        return SimpleRiskMeasure::entropic(detail::json_to_double(j.at("beta"), field + ".beta"));
    if (kind == "expected_shortfall")
        return SimpleRiskMeasure::expected_shortfall(
            detail::json_to_double(j.at("level"), field + ".level"));
    if (kind == "mean_semideviation")
        return SimpleRiskMeasure::mean_semideviation(
            detail::json_to_double(j.at("c"), field + ".c"));
    throw validation_error(field + ".kind: unknown simple measure '" + kind + "'");
}

inline ordered_json instance_to_json(const Instance& inst) {
    ordered_json j;
    j["space"]["probs"] = detail::vector_to_json(inst.space.probs);
    ordered_json hs = ordered_json::array();
    for (std::size_t r = 0; r < inst.order.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (std::size_t c = 0; c < inst.order.dim; ++c)
            row.push_back(detail::double_to_json(inst.order.halfspaces[r * inst.order.dim + c]));
        hs.push_back(std::move(row));
    }
    j["cone"]["halfspaces"] = std::move(hs);
    j["cone"]["z"] = detail::vector_to_json(inst.order.z);
    j["exponent"]["values"] = detail::vector_to_json(inst.exponent.values);
    j["exponent"]["range_order"] = detail::double_to_json(inst.exponent.range_order);
    j["economies"] = ordered_json::object();
    for (const auto& [name, eco] : inst.economies) j["economies"][name] = detail::matrix_to_json(eco);
    j["measures"] = ordered_json::object();
    for (const auto& [name, m] : inst.measures) {
        j["measures"][name]["phi"] = certain_to_json(m.phi);
        j["measures"][name]["rho"] = simple_to_json(m.rho);
    }
    return j;
}

inline Instance instance_from_json(const ordered_json& j) {
    if (!j.is_object()) throw validation_error("instance: expected a JSON object");
    Instance inst;
    if (!j.contains("space") || !j["space"].contains("probs"))
        throw validation_error("space.probs: required");
    inst.space = FiniteSpace(detail::json_to_vector(j["space"]["probs"], "space.probs"));

    if (!j.contains("economies") || !j["economies"].is_object() || j["economies"].empty())
        throw validation_error("economies: at least one named economy is required");
    for (auto it = j["economies"].begin(); it != j["economies"].end(); ++it)
        inst.economies.emplace_back(it.key(),
                                    detail::json_to_matrix(it.value(), "economies." + it.key()));
    const std::size_t d = inst.economies.front().second.dims;

    if (j.contains("cone")) {
        const auto& cone = j["cone"];
        if (!cone.contains("halfspaces") || !cone["halfspaces"].is_array())
            throw validation_error("cone.halfspaces: required when a cone is given");
        std::vector<double> H;
        std::size_t dim = 0;
        for (std::size_t r = 0; r < cone["halfspaces"].size(); ++r) {
            std::vector<double> row = detail::json_to_vector(
                cone["halfspaces"][r], "cone.halfspaces[" + std::to_string(r) + "]");
            if (r == 0)
                dim = row.size();
            else if (row.size() != dim)
                throw validation_error("cone.halfspaces: rows must all have the same length");
            H.insert(H.end(), row.begin(), row.end());
        }
        std::vector<double> z = cone.contains("z")
                                    ? detail::json_to_vector(cone["z"], "cone.z")
                                    : std::vector<double>(dim, 1.0);
        inst.order = ConeOrder(dim, std::move(H), std::move(z));
    } else {
        inst.order = ConeOrder::orthant(d);
    }

    if (j.contains("exponent")) {
        const auto& e = j["exponent"];
        std::vector<double> values = e.contains("values")
                                         ? detail::json_to_vector(e["values"], "exponent.values")
                                         : std::vector<double>(inst.space.size(), 2.0);
        const double range = e.contains("range_order")
                                 ? detail::json_to_double(e["range_order"], "exponent.range_order")
                                 : 2.0;
        inst.exponent = Exponent(std::move(values), range);
    } else {
        inst.exponent = Exponent::constant(inst.space.size(), 2.0, 2.0);
    }

    if (j.contains("measures")) {
        if (!j["measures"].is_object())
            throw validation_error("measures: expected an object of named configurations");
        for (auto it = j["measures"].begin(); it != j["measures"].end(); ++it) {
            const std::string field = "measures." + it.key();
            if (!it.value().contains("phi") || !it.value().contains("rho"))
                throw validation_error(field + ": needs 'phi' and 'rho'");
            MeasureConfig m{certain_from_json(it.value()["phi"], field + ".phi"),
                            simple_from_json(it.value()["rho"], field + ".rho")};
            inst.measures.emplace_back(it.key(), std::move(m));
        }
    }

    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// CSV bundle: a directory with one file per matrix.
//   space.csv            one row of probabilities
//   cone.csv             first row z, remaining rows the halfspaces
//   exponent.csv         first row per-atom values ("inf" allowed), second row range order
//   economy_<name>.csv   one row per atom
//   measures.csv         name,phi_kind,phi_w,phi_beta,phi_k,rho_kind,rho_param
//                        (phi_w is ';'-separated, unused cells empty)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_csv_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_csv_double(const std::string& tok, const std::string& where) {
    if (tok == "inf" || tok == "+inf") return kInf;
    if (tok == "-inf") return -kInf;
    if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw parse_error(where + ": cannot parse number '" + tok + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<std::vector<double>> read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error(path.string() + ": cannot open");
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        long col = 0;
        for (const auto& tok : split(line, ',')) {
            ++col;
            row.push_back(parse_csv_double(
                tok, path.filename().string() + ":" + std::to_string(lineno) + ":" +
                         std::to_string(col)));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error(path.string() + ": no data rows");
    return rows;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw write_error(path.string() + ": cannot open for writing");
    out << content;
    if (!out) throw write_error(path.string() + ": write failed");
}

inline bool safe_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

}  // namespace detail

inline void save_instance(const Instance& inst, const std::string& path, InstanceFormat format) {
    inst.validate();
    if (format == InstanceFormat::json) {
        detail::write_text_file(path, dump_json(instance_to_json(inst)));
        return;
    }
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw write_error(path + ": cannot create bundle directory");
    const fs::path dir(path);

    auto row_of = [](const std::vector<double>& v) {
        std::string line;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) line += ',';
            line += detail::format_csv_double(v[i]);
        }
        return line + "\n";
    };

    detail::write_text_file(dir / "space.csv", row_of(inst.space.probs));

    std::string cone = row_of(inst.order.z);
    for (std::size_t r = 0; r < inst.order.rows(); ++r) {
        std::vector<double> row(inst.order.halfspaces.begin() + r * inst.order.dim,
                                inst.order.halfspaces.begin() + (r + 1) * inst.order.dim);
        cone += row_of(row);
    }
    detail::write_text_file(dir / "cone.csv", cone);

    detail::write_text_file(dir / "exponent.csv",
                            row_of(inst.exponent.values) +
                                detail::format_csv_double(inst.exponent.range_order) + "\n");

    for (const auto& [name, eco] : inst.economies) {
        if (!detail::safe_name(name))
            throw write_error("economies." + name + ": name not usable as a csv file name");
        std::string body;
        for (std::size_t i = 0; i < eco.atoms; ++i) {
            std::vector<double> row(eco.row(i).begin(), eco.row(i).end());
            body += row_of(row);
        }
        detail::write_text_file(dir / ("economy_" + name + ".csv"), body);
    }

    std::string measures = "name,phi_kind,phi_w,phi_beta,phi_k,rho_kind,rho_param\n";
    for (const auto& [name, m] : inst.measures) {
        if (!detail::safe_name(name))
            throw write_error("measures." + name + ": name not usable in csv");
        std::string w;
        for (std::size_t j = 0; j < m.phi.weights().size(); ++j) {
            if (j) w += ';';
            w += detail::format_csv_double(m.phi.weights()[j]);
        }
        std::string phi_kind, phi_beta, phi_k;
        switch (m.phi.kind()) {
            case CertainFunction::Kind::weighted_sum: phi_kind = "weighted_sum"; break;
            case CertainFunction::Kind::max_component: phi_kind = "max_component"; break;
            case CertainFunction::Kind::shortfall:
                phi_kind = "shortfall";
                phi_beta = detail::format_csv_double(m.phi.beta());
                phi_k = detail::format_csv_double(m.phi.threshold());
                break;
            case CertainFunction::Kind::custom:
                throw unsupported_kind("save_instance: custom aggregators are not serializable");
        }
        std::string rho_kind, rho_param;
        switch (m.rho.kind()) {
            case SimpleRiskMeasure::Kind::expectation: rho_kind = "expectation"; break;
            case SimpleRiskMeasure::Kind::entropic:
                rho_kind = "entropic";
                rho_param = detail::format_csv_double(m.rho.param());
                break;
            case SimpleRiskMeasure::Kind::expected_shortfall:
                rho_kind = "expected_shortfall";
                rho_param = detail::format_csv_double(m.rho.param());
                break;
            case SimpleRiskMeasure::Kind::mean_semideviation:
                rho_kind = "mean_semideviation";
                rho_param = detail::format_csv_double(m.rho.param());
                break;
            case SimpleRiskMeasure::Kind::custom:
                throw unsupported_kind("save_instance: custom measures are not serializable");
        }
        measures += name + "," + phi_kind + "," + w + "," + phi_beta + "," + phi_k + "," +
                    rho_kind + "," + rho_param + "\n";
    }
    detail::write_text_file(dir / "measures.csv", measures);
}

inline Instance load_instance(const std::string& path, InstanceFormat format) {
    namespace fs = std::filesystem;
    if (format == InstanceFormat::json) {
        std::ifstream in(path);
        if (!in) throw parse_error(path + ": cannot open");
        ordered_json j;
        try {
            j = ordered_json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw parse_error(path + ": " + e.what());
        }
        return instance_from_json(j);
    }

    const fs::path dir(path);
    if (!fs::is_directory(dir)) throw parse_error(path + ": csv bundle must be a directory");
    Instance inst;

    {
        auto rows = detail::read_csv_matrix(dir / "space.csv");
        inst.space = FiniteSpace(rows.front());
    }
    {
        auto rows = detail::read_csv_matrix(dir / "cone.csv");
        if (rows.size() < 2) throw parse_error("cone.csv: needs z plus at least one halfspace row");
        const std::size_t d = rows.front().size();
        std::vector<double> H;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != d)
                throw parse_error("cone.csv: all rows must have the same length");
            H.insert(H.end(), rows[r].begin(), rows[r].end());
        }
        inst.order = ConeOrder(d, std::move(H), rows.front());
    }
    {
        auto rows = detail::read_csv_matrix(dir / "exponent.csv");
        if (rows.size() != 2 || rows[1].size() != 1)
            throw parse_error("exponent.csv: expected a value row and a single range order");
        inst.exponent = Exponent(rows[0], rows[1][0]);
    }
    {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string fname = entry.path().filename().string();
            if (fname.rfind("economy_", 0) == 0 && fname.size() > 12 &&
                fname.substr(fname.size() - 4) == ".csv")
                files.push_back(fname);
        }
        std::sort(files.begin(), files.end());
        for (const auto& fname : files) {
            const std::string name = fname.substr(8, fname.size() - 12);
            auto rows = detail::read_csv_matrix(dir / fname);
            const std::size_t n = rows.size(), d = rows.front().size();
            std::vector<double> data;
            for (const auto& row : rows) {
                if (row.size() != d) throw parse_error(fname + ": ragged rows");
                data.insert(data.end(), row.begin(), row.end());
            }
            inst.economies.emplace_back(name, RandomEconomy(n, d, std::move(data)));
        }
    }
    if (fs::exists(dir / "measures.csv")) {
        std::ifstream in(dir / "measures.csv");
        std::string line;
        long lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno == 1 || line.empty()) continue;  // header
            const auto cells = detail::split(line, ',');
            if (cells.size() != 7)
                throw parse_error("measures.csv:" + std::to_string(lineno) + ": expected 7 cells");
            const std::string where = "measures.csv:" + std::to_string(lineno);
            std::vector<double> w;
            if (!cells[2].empty())
                for (const auto& tok : detail::split(cells[2], ';'))
                    w.push_back(detail::parse_csv_double(tok, where + " phi_w"));
            CertainFunction phi = CertainFunction::max_component();
            if (cells[1] == "weighted_sum")
                phi = CertainFunction::weighted_sum(w);
            else if (cells[1] == "shortfall")
                phi = CertainFunction::shortfall(w,
                                                 detail::parse_csv_double(cells[3], where + " phi_beta"),
                                                 detail::parse_csv_double(cells[4], where + " phi_k"));
            else if (cells[1] != "max_component")
                throw validation_error(where + ": unknown aggregator '" + cells[1] + "'");
            SimpleRiskMeasure rho = SimpleRiskMeasure::expectation();
            if (cells[5] == "entropic")
                rho = SimpleRiskMeasure::entropic(detail::parse_csv_double(cells[6], where));
            else if (cells[5] == "expected_shortfall")
                rho = SimpleRiskMeasure::expected_shortfall(detail::parse_csv_double(cells[6], where));
            else if (cells[5] == "mean_semideviation")
                rho = SimpleRiskMeasure::mean_semideviation(detail::parse_csv_double(cells[6], where));
            else if (cells[5] != "expectation")
                throw validation_error(where + ": unknown simple measure '" + cells[5] + "'");
            inst.measures.emplace_back(cells[0], MeasureConfig{std::move(phi), std::move(rho)});
        }
    }
    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// Deterministic instance generation
// ---------------------------------------------------------------------------

struct GeneratorConfig {
    std::size_t num_economies = 3;
    double scale = 1.0;          // entries are N(0, scale^2)
    double inf_fraction = 0.0;   // fraction of atoms with p = inf (rounded)
    double exp_min = 1.0;
    double exp_max = 4.0;
    double range_order = 2.0;
    bool full_catalog = false;   // all 12 aggregator x measure pairs
};

inline Instance generate_instance(std::uint64_t seed, std::size_t n, std::size_t d,
                                  const GeneratorConfig& cfg = {}) {
    if (n < 1 || d < 1) throw invalid_config("generate_instance: n and d must be >= 1");
    if (!(cfg.scale > 0.0) || !std::isfinite(cfg.scale))
        throw invalid_config("generate_instance: scale must be finite and > 0");
    if (!(cfg.inf_fraction >= 0.0 && cfg.inf_fraction <= 1.0))
        throw invalid_config("generate_instance: inf_fraction must lie in [0, 1]");
    if (!(cfg.exp_min >= 1.0) || !(cfg.exp_max >= cfg.exp_min) || !std::isfinite(cfg.exp_max))
        throw invalid_config("generate_instance: need 1 <= exp_min <= exp_max < inf");
    if (std::isnan(cfg.range_order) || cfg.range_order < 1.0)
        throw invalid_config("generate_instance: range_order must be >= 1");
    if (cfg.num_economies < 1)
        throw invalid_config("generate_instance: at least one economy is required");

    Rng rng(seed);
    Instance inst;

    std::vector<double> probs(n);
    double sum = 0.0;
    for (auto& p : probs) {
        p = rng.uniform(0.05, 1.0);
        sum += p;
    }
    for (auto& p : probs) p /= sum;
    double resum = 0.0;
    for (double p : probs) resum += p;
    probs[0] += 1.0 - resum;  // pin the total to 1 within a few ulps
    inst.space = FiniteSpace(std::move(probs));

    inst.order = ConeOrder::orthant(d);

    std::vector<double> exps(n);
    for (auto& p : exps) p = rng.uniform(cfg.exp_min, cfg.exp_max);
    const auto n_inf = static_cast<std::size_t>(std::llround(cfg.inf_fraction * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    for (std::size_t i = 0; i < n_inf; ++i) exps[idx[i]] = kInf;
    inst.exponent = Exponent(std::move(exps), cfg.range_order);

    for (std::size_t e = 0; e < cfg.num_economies; ++e)
        inst.economies.emplace_back("eco" + std::to_string(e),
                                    RandomEconomy(n, d, rng.normal_vector(n * d, cfg.scale)));

    auto random_weights = [&] {
        std::vector<double> w(d);
        for (auto& v : w) v = rng.uniform(0.5, 1.5);
        return w;
    };
    if (cfg.full_catalog) {
        const std::vector<CertainFunction> phis = {
            CertainFunction::weighted_sum(random_weights()), CertainFunction::max_component(),
            CertainFunction::shortfall(random_weights(), 1.0, 0.0)};
        for (const auto& phi : phis)
            for (const auto& rho : catalog_simple())
                inst.measures.emplace_back(phi.label() + "+" + rho.label(),
                                           MeasureConfig{phi, rho});
    } else {
        inst.measures.emplace_back(
            "sum_expectation", MeasureConfig{CertainFunction::weighted_sum(random_weights()),
                                             SimpleRiskMeasure::expectation()});
        inst.measures.emplace_back("max_es",
                                   MeasureConfig{CertainFunction::max_component(),
                                                 SimpleRiskMeasure::expected_shortfall(0.5)});
        inst.measures.emplace_back(
            "shortfall_entropic", MeasureConfig{CertainFunction::shortfall(random_weights(), 1.0, 0.0),
                                                SimpleRiskMeasure::entropic(1.0)});
        inst.measures.emplace_back(
            "sum_semideviation", MeasureConfig{CertainFunction::weighted_sum(random_weights()),
                                               SimpleRiskMeasure::mean_semideviation(0.5)});
    }

    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline ordered_json report_to_json(const AxiomReport& report) {
    ordered_json j;
    j["type"] = "axiom_report";
    j["subject"] = report.subject;
    j["all_passed"] = report.all_passed();
    j["checks"] = ordered_json::array();
    for (const auto& c : report.checks) {
        ordered_json cj;
        cj["id"] = c.id;
        cj["passed"] = c.passed;
        cj["trials"] = c.trials;
        if (c.witness) {
            cj["witness"]["description"] = c.witness->description;
            cj["witness"]["values"] = ordered_json::array();
            for (const auto& v : c.witness->values) {
                ordered_json vj;
                vj["name"] = v.name;
                vj["rows"] = v.rows;
                vj["cols"] = v.cols;
                vj["data"] = detail::vector_to_json(v.data);
                cj["witness"]["values"].push_back(std::move(vj));
            }
        }
        j["checks"].push_back(std::move(cj));
    }
    return j;
}

inline ordered_json report_to_json(const DualityReport& report) {
    ordered_json j;
    j["type"] = "duality_report";
    j["method"] = report.method;
    j["primal"] = detail::double_to_json(report.primal);
    j["dual"] = detail::double_to_json(report.dual);
    j["gap"] = detail::double_to_json(report.gap);
    j["unbounded_candidates"] = report.unbounded_candidates;
    j["maximizer"]["Yhat"] = detail::vector_to_json(report.maximizer.Yhat.values);
    j["maximizer"]["fhat"] = detail::matrix_to_json(report.maximizer.fhat);
    j["maximizer"]["alpha"] = detail::double_to_json(report.maximizer.alpha_value);
    return j;
}

inline std::string report_to_text(const AxiomReport& report) {
    std::ostringstream out;
    out << "subject: " << report.subject << "\n";
    for (const auto& c : report.checks) {
        out << (c.passed ? "PASS" : "FAIL") << "  " << c.id << "  (trials=" << c.trials << ")\n";
        if (c.witness) {
            out << "      counterexample: " << c.witness->description << "\n";
            for (const auto& v : c.witness->values) {
                out << "      " << v.name << " =";
                for (double x : v.data) out << " " << detail::format_csv_double(x);
                out << "\n";
            }
        }
    }
    return out.str();
}

inline std::string report_to_text(const DualityReport& report) {
    std::ostringstream out;
    out << "method  primal  dual  gap  unbounded\n";
    out << report.method << "  " << detail::format_csv_double(report.primal) << "  "
        << detail::format_csv_double(report.dual) << "  "
        << detail::format_csv_double(report.gap) << "  "
        << (report.unbounded_candidates ? "yes" : "no") << "\n";
    return out.str();
}

template <class Report>
inline void save_report(const Report& report, const std::string& path, ReportFormat format) {
    if (format == ReportFormat::json)
        detail::write_text_file(path, dump_json(report_to_json(report)));
    else
        detail::write_text_file(path, report_to_text(report));
}

/// Parses a JSON report back into its document form (for round-trip checks
/// and downstream tooling).
inline ordered_json load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error(path + ": cannot open");
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

}  // namespace varrisk
