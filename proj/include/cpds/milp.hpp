#pragma once

// Solver-agnostic MILP description: named columns with bounds/objective and
// named rows with range bounds over sparse coefficients, plus a writer for
// the standard algebraic LP interchange format (for external cross-checks).

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cpds/common.hpp"

namespace cpds {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Milp {
    struct Col {
        std::string name;
        double lo = 0.0;
        double hi = kInf;
        double obj = 0.0;
        bool integer = false;
    };
    struct Row {
        std::string name;
        double lo = -kInf;
        double hi = kInf;
        std::vector<std::pair<int, double>> coefs;  // (column index, value)
    };

    std::string name;
    bool maximize = false;
    std::vector<Col> cols;
    std::vector<Row> rows;

    int add_col(const std::string& col_name, double lo, double hi, double obj,
                bool integer = false) {
        cols.push_back({col_name, lo, hi, obj, integer});
        return static_cast<int>(cols.size()) - 1;
    }
    int add_binary(const std::string& col_name, double obj = 0.0) {
        return add_col(col_name, 0.0, 1.0, obj, true);
    }
    int add_row(const std::string& row_name, double lo, double hi,
                std::vector<std::pair<int, double>> coefs) {
        rows.push_back({row_name, lo, hi, std::move(coefs)});
        return static_cast<int>(rows.size()) - 1;
    }

    void fix_col(int col, double value) {
        cols[col].lo = value;
        cols[col].hi = value;
    }
};

// Writes the model in LP format. Row ranges (lo < hi, both finite) are split
// into two inequalities since plain LP format has no range rows.
inline void write_lp_format(const Milp& m, std::ostream& os) {
    auto term = [](double coef, const std::string& name, bool first) {
        std::string s;
        if (coef >= 0 && !first) s += " + ";
        if (coef < 0) s += first ? "- " : " - ";
        double a = std::abs(coef);
        s += std::to_string(a) + " " + name;
        return s;
    };

    os << "\\ " << (m.name.empty() ? std::string("model") : m.name) << "\n";
    os << (m.maximize ? "Maximize" : "Minimize") << "\n obj:";
    bool first = true;
    for (const auto& c : m.cols) {
        if (c.obj == 0.0) continue;
        os << ' ' << term(c.obj, c.name, first);
        first = false;
    }
    if (first) os << " 0 " << m.cols.front().name;
    os << "\nSubject To\n";

    auto write_ineq = [&](const Milp::Row& r, const char* op, double rhs, const char* suffix) {
        os << ' ' << r.name << suffix << ':';
        bool f = true;
        for (const auto& [col, coef] : r.coefs) {
            if (coef == 0.0) continue;
            os << ' ' << term(coef, m.cols[col].name, f);
            f = false;
        }
        if (f) os << " 0 " << m.cols.front().name;
        os << ' ' << op << ' ' << rhs << "\n";
    };
    for (const auto& r : m.rows) {
        if (r.lo == r.hi) {
            write_ineq(r, "=", r.lo, "");
        } else {
            const bool range = r.lo > -kInf && r.hi < kInf;
            if (r.hi < kInf) write_ineq(r, "<=", r.hi, range ? "_ub" : "");
            if (r.lo > -kInf) write_ineq(r, ">=", r.lo, range ? "_lb" : "");
        }
    }

    os << "Bounds\n";
    for (const auto& c : m.cols) {
        if (c.lo == 0.0 && c.hi == kInf) continue;
        if (c.lo == c.hi) {
            os << ' ' << c.name << " = " << c.lo << "\n";
            continue;
        }
        if (c.lo == -kInf)
            os << " -inf <= " << c.name;
        else
            os << ' ' << c.lo << " <= " << c.name;
        if (c.hi == kInf)
            os << "\n";  // one-sided
        else
            os << " <= " << c.hi << "\n";
    }

    bool any_int = false;
    for (const auto& c : m.cols) any_int |= c.integer;
    if (any_int) {
        os << "Generals\n";
        for (const auto& c : m.cols)
            if (c.integer) os << ' ' << c.name << "\n";
    }
    os << "End\n";
}

}  // namespace cpds
