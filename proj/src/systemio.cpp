#include "delaynorm/systemio.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace delaynorm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

double as_finite_number(const json& j, const std::string& what) {
    if (!j.is_number()) fail(what + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(what + ": number must be finite");
    return v;
}

// Accepts [[...], ...] (row-major nested) and, for vectors, a flat array.
Eigen::MatrixXd as_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) fail(what + ": expected a non-empty array");
    if (j.front().is_number()) {  // flat array => column vector
        Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), 1);
        for (size_t i = 0; i < j.size(); ++i) {
            m(static_cast<Eigen::Index>(i), 0) = as_finite_number(j[i], what);
        }
        return m;
    }
    const size_t rows = j.size();
    const size_t cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) fail(what + ": expected nested arrays of numbers");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) fail(what + ": ragged rows");
        for (size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_finite_number(j[r][c], what);
        }
    }
    return m;
}

std::vector<double> as_delay_list(const json& j, const std::string& what) {
    if (!j.is_array()) fail(what + ": expected an array");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(as_finite_number(v, what));
    return out;
}

DdaeSystem parse_ddae(const json& j) {
    if (!j.contains("E") || !j.contains("terms") || !j.contains("B") || !j.contains("C")) {
        fail("ddae document requires E, terms, B, C");
    }
    const Eigen::MatrixXd E = as_matrix(j["E"], "E");
    const Eigen::MatrixXd B = as_matrix(j["B"], "B");
    const Eigen::MatrixXd C = as_matrix(j["C"], "C");
    if (B.cols() != 1) fail("B: expected a single column (SISO)");
    if (C.rows() != 1) fail("C: expected a single row (SISO)");

    std::vector<DelayTerm> terms;
    if (!j["terms"].is_array()) fail("terms: expected an array");
    for (const auto& t : j["terms"]) {
        if (!t.is_object() || !t.contains("delay") || !t.contains("A")) {
            fail("terms: each entry requires delay and A");
        }
        const double tau = as_finite_number(t["delay"], "terms.delay");
        if (tau < 0.0) fail("terms.delay: delays must be nonnegative");
        terms.push_back(DelayTerm{tau, as_matrix(t["A"], "terms.A")});
    }
    try {
        return DdaeSystem(E, std::move(terms), B.col(0), C.row(0));
    } catch (const ConstructionError& e) {
        fail(std::string("ddae document: ") + e.what());
    }
}

DdaeSystem parse_lft(const json& j) {
    for (const char* key : {"F", "A", "B1", "B2", "C1", "C2", "D11", "D12", "D21", "D22",
                            "internal_delays"}) {
        if (!j.contains(key)) fail(std::string("lft document requires ") + key);
    }
    const Eigen::MatrixXd F = as_matrix(j["F"], "F");
    const Eigen::MatrixXd A = as_matrix(j["A"], "A");
    const Eigen::MatrixXd B1 = as_matrix(j["B1"], "B1");
    const Eigen::MatrixXd C1 = as_matrix(j["C1"], "C1");
    const double D11 = as_finite_number(
        j["D11"].is_array() ? j["D11"][0].is_array() ? j["D11"][0][0] : j["D11"][0] : j["D11"],
        "D11");
    const std::vector<double> internal = as_delay_list(j["internal_delays"], "internal_delays");
    const auto k = static_cast<Eigen::Index>(internal.size());
    const auto nx = F.rows();

    // Empty channel blocks may be written as [] in the file.
    auto block_or_empty = [&](const char* key, Eigen::Index rows, Eigen::Index cols) {
        const json& val = j[key];
        if (val.is_array() && val.empty()) return Eigen::MatrixXd::Zero(rows, cols).eval();
        Eigen::MatrixXd m = as_matrix(val, key);
        return m;
    };
    const Eigen::MatrixXd B2 = block_or_empty("B2", nx, k);
    const Eigen::MatrixXd C2 = block_or_empty("C2", k, nx);
    const Eigen::MatrixXd D12 = block_or_empty("D12", 1, k);
    const Eigen::MatrixXd D21 = block_or_empty("D21", k, 1);
    const Eigen::MatrixXd D22 = block_or_empty("D22", k, k);

    std::vector<double> input_delays, output_delays;
    if (j.contains("input_delays")) input_delays = as_delay_list(j["input_delays"], "input_delays");
    if (j.contains("output_delays")) {
        output_delays = as_delay_list(j["output_delays"], "output_delays");
    }

    try {
        const LftDelaySystem lft(F, A, B1.col(0), B2, C1.row(0), C2, D11, D12.row(0), D21.col(0),
                                 D22, internal, input_delays, output_delays);
        return lft_to_ddae(lft);
    } catch (const ConstructionError& e) {
        fail(std::string("lft document: ") + e.what());
    }
}

DdaeSystem parse_document(const json& j, const std::string& base_dir, int depth);

DdaeSystem parse_interconnection(const json& j, const std::string& base_dir, int depth) {
    if (depth > 16) fail("interconnection nesting too deep (cycle?)");
    if (!j.contains("systems") || !j["systems"].is_object()) {
        fail("interconnection document requires a systems object");
    }
    if (!j.contains("steps") || !j["steps"].is_array()) {
        fail("interconnection document requires a steps array");
    }

    std::map<std::string, DdaeSystem> named;
    for (const auto& [name, value] : j["systems"].items()) {
        if (value.is_string()) {
            const std::filesystem::path p =
                std::filesystem::path(base_dir) / value.get<std::string>();
            std::ifstream in(p);
            if (!in) fail("cannot open subsystem file " + p.string());
            std::stringstream buf;
            buf << in.rdbuf();
            json sub;
            try {
                sub = json::parse(buf.str());
            } catch (const json::exception& e) {
                fail("subsystem " + name + ": " + e.what());
            }
            named.emplace(name, parse_document(sub, p.parent_path().string(), depth + 1));
        } else if (value.is_object()) {
            named.emplace(name, parse_document(value, base_dir, depth + 1));
        } else {
            fail("subsystem " + name + ": expected an object or a file path");
        }
    }

    auto lookup = [&](const std::string& name) -> const DdaeSystem& {
        auto it = named.find(name);
        if (it == named.end()) fail("unknown subsystem name " + name);
        return it->second;
    };

    std::string last;
    for (const auto& step : j["steps"]) {
        if (!step.is_object() || !step.contains("op") || !step.contains("args")) {
            fail("interconnection step requires op and args");
        }
        const std::string op = step["op"].get<std::string>();
        const auto& args = step["args"];
        if (!args.is_array() || args.size() != 2) fail("step args: expected two subsystem names");
        const DdaeSystem& g1 = lookup(args[0].get<std::string>());
        const DdaeSystem& g2 = lookup(args[1].get<std::string>());

        DdaeSystem combined = [&]() {
            if (op == "series") return series(g1, g2);
            if (op == "parallel") return parallel(g1, g2);
            if (op == "feedback") {
                int sign = -1;
                if (step.contains("sign")) sign = step["sign"].get<int>();
                if (sign != 1 && sign != -1) fail("feedback sign must be +1 or -1");
                return feedback(g1, g2, sign);
            }
            fail("unknown interconnection op " + op);
        }();

        std::string name = step.contains("name") ? step["name"].get<std::string>()
                                                 : "step" + std::to_string(named.size());
        named.insert_or_assign(name, std::move(combined));
        last = name;
    }
    if (last.empty()) fail("interconnection has no steps");
    const std::string output = j.contains("output") ? j["output"].get<std::string>() : last;
    return lookup(output);
}

DdaeSystem parse_document(const json& j, const std::string& base_dir, int depth) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        fail("system document requires a type field");
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "ddae") return parse_ddae(j);
    if (type == "lft") return parse_lft(j);
    if (type == "interconnection") return parse_interconnection(j, base_dir, depth);
    fail("unknown system type " + type);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    out << "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r > 0) out << ", ";
        out << "[";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) out << ", ";
            out << format_double(m(r, c));
        }
        out << "]";
    }
    out << "]";
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

DdaeSystem parse_system(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    try {
        return parse_document(j, base_dir, 0);
    } catch (const json::exception& e) {
        fail(std::string("malformed system document: ") + e.what());
    }
}

DdaeSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open system file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_system(buf.str(), std::filesystem::path(path).parent_path().string());
}

void emit_ddae_json(const DdaeSystem& sys, std::ostream& out) {
    out << "{\n  \"type\": \"ddae\",\n  \"E\": ";
    write_matrix(out, sys.E);
    out << ",\n  \"terms\": [";
    for (size_t i = 0; i < sys.terms.size(); ++i) {
        if (i > 0) out << ",";
        out << "\n    {\"delay\": " << format_double(sys.terms[i].delay) << ", \"A\": ";
        write_matrix(out, sys.terms[i].coeff);
        out << "}";
    }
    out << "\n  ],\n  \"B\": ";
    write_matrix(out, sys.B);
    out << ",\n  \"C\": ";
    write_matrix(out, sys.C);
    out << "\n}\n";
}

namespace {

void write_config(const RunConfig& config, std::ostream& out, const char* indent) {
    out << indent << "\"config\": {\n";
    out << indent << "  \"N\": " << config.N << ",\n";
    out << indent << "  \"axis_tol\": " << format_double(config.axis_tol) << ",\n";
    out << indent << "  \"corrector_tol\": " << format_double(config.corrector_tol) << ",\n";
    out << indent << "  \"grid_density\": " << config.grid_density << ",\n";
    out << indent << "  \"rank_tol\": " << format_double(config.rank_tol) << ",\n";
    out << indent << "  \"max_iter\": " << config.max_iter << "\n";
    out << indent << "}";
}

void write_extrema_array(const std::vector<ExtremumPoint>& points, std::ostream& out,
                         const char* indent) {
    out << indent << "\"extrema\": [";
    for (size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (i > 0) out << ",";
        out << "\n" << indent << "  {\"omega\": " << format_double(p.omega)
            << ", \"xi\": " << format_double(p.xi) << ", \"kind\": \"" << to_string(p.kind)
            << "\", \"converged\": " << (p.converged ? "true" : "false")
            << ", \"residual\": " << format_double(p.residual)
            << ", \"iterations\": " << p.iterations << "}";
    }
    out << (points.empty() ? "]" : "\n");
    if (!points.empty()) out << indent << "]";
}

}  // namespace

void write_norm_result(const StrongNormResult& result, const RunConfig& config,
                       std::ostream& out) {
    out << "{\n";
    out << "  \"strong_norm\": " << format_double(result.strong_norm) << ",\n";
    if (result.frequency_infinite) {
        out << "  \"frequency\": \"inf\",\n";
    } else {
        out << "  \"frequency\": " << format_double(result.frequency) << ",\n";
    }
    out << "  \"standard_peak\": " << format_double(result.standard_peak) << ",\n";
    out << "  \"standard_peak_frequency\": " << format_double(result.standard_peak_frequency)
        << ",\n";
    out << "  \"asymptotic_norm\": " << format_double(result.asymptotic_norm) << ",\n";
    out << "  \"theta_star\": [";
    for (size_t i = 0; i < result.theta_star.size(); ++i) {
        if (i > 0) out << ", ";
        out << format_double(result.theta_star[i]);
    }
    out << "],\n  \"active_delays\": [";
    for (size_t i = 0; i < result.active_delays.size(); ++i) {
        if (i > 0) out << ", ";
        out << result.active_delays[i];
    }
    out << "],\n";
    write_extrema_array(result.extrema, out, "  ");
    out << ",\n";
    write_config(config, out, "  ");
    out << "\n}\n";
}

void write_extrema_result(const std::vector<ExtremumPoint>& points, const RunConfig& config,
                          std::ostream& out) {
    out << "{\n";
    write_extrema_array(points, out, "  ");
    out << ",\n";
    write_config(config, out, "  ");
    out << "\n}\n";
}

}  // namespace delaynorm
