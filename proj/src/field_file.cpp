#include "realizer/field_file.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace realizer {

FieldSpec parse_field_triple(const std::string& src) {
    std::string s = src;
    // Trim blanks, then strip one pair of enclosing parentheses if present.
    auto trim = [](std::string& t) {
        const auto b = t.find_first_not_of(" \t\n\r");
        const auto e = t.find_last_not_of(" \t\n\r");
        t = (b == std::string::npos) ? "" : t.substr(b, e - b + 1);
    };
    trim(s);
    if (!s.empty() && s.front() == '(' && s.back() == ')') {
        int depth = 0;
        bool whole = true;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            if (s[i] == '(') ++depth;
            if (s[i] == ')') --depth;
            if (depth == 0) {
                whole = false;
                break;
            }
        }
        if (whole) s = s.substr(1, s.size() - 2);
    }
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3)
        throw ConfigError("field triple must have exactly three comma-separated components");
    FieldSpec spec;
    spec.jx = parse_expr(parts[0]);
    spec.jy = parse_expr(parts[1]);
    spec.jz = parse_expr(parts[2]);
    return spec;
}

FieldSpec load_field_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open field file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad JSON in field file: ") + e.what());
    }
    FieldSpec spec;
    for (const char* key : {"jx", "jy", "jz"})
        if (!j.contains(key) || !j[key].is_string())
            throw ConfigError(std::string("field file missing string key \"") + key + "\"");
    spec.jx = parse_expr(j["jx"].get<std::string>());
    spec.jy = parse_expr(j["jy"].get<std::string>());
    spec.jz = parse_expr(j["jz"].get<std::string>());
    if (j.contains("curl")) {
        const auto& c = j["curl"];
        if (!c.is_array() || c.size() != 3)
            throw ConfigError("field file \"curl\" must be an array of three expressions");
        spec.curl_exprs = {parse_expr(c[0].get<std::string>()),
                           parse_expr(c[1].get<std::string>()),
                           parse_expr(c[2].get<std::string>())};
    }
    if (j.contains("periodic")) {
        const auto& p = j["periodic"];
        spec.periodicity.x = p.value("x", false);
        spec.periodicity.y = p.value("y", false);
        spec.periodicity.z = p.value("z", false);
    }
    return spec;
}

std::string field_spec_to_json(const FieldSpec& spec) {
    nlohmann::json j;
    j["jx"] = print_expr(spec.jx);
    j["jy"] = print_expr(spec.jy);
    j["jz"] = print_expr(spec.jz);
    if (spec.curl_exprs) {
        j["curl"] = {print_expr((*spec.curl_exprs)[0]), print_expr((*spec.curl_exprs)[1]),
                     print_expr((*spec.curl_exprs)[2])};
    }
    if (spec.periodicity.any()) {
        j["periodic"] = {{"x", spec.periodicity.x},
                         {"y", spec.periodicity.y},
                         {"z", spec.periodicity.z}};
    }
    return j.dump(2);
}

VectorField compile_field(const FieldSpec& spec) {
    VectorField field;
    const Expr jx = spec.jx, jy = spec.jy, jz = spec.jz;
    field.evaluator = [jx, jy, jz](const Point3& p) -> Vec3 {
        return {eval_expr(jx, p), eval_expr(jy, p), eval_expr(jz, p)};
    };
    if (spec.curl_exprs) {
        const auto c = *spec.curl_exprs;
        field.analytic_curl = [c](const Point3& p) -> Vec3 {
            return {eval_expr(c[0], p), eval_expr(c[1], p), eval_expr(c[2], p)};
        };
    }
    field.periodicity = spec.periodicity;
    return field;
}

} // namespace realizer
