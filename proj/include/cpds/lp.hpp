#pragma once

// Self-contained dense LP solver used as an independent reference for
// cross-checking MILP results. Two-phase bounded-variable primal simplex
// with Bland's rule (no cycling). Intended for small instances only;
// integrality markers on columns are ignored.

#include <cmath>
#include <string>
#include <vector>

#include "cpds/common.hpp"
#include "cpds/milp.hpp"

namespace cpds {

namespace detail_lp {

constexpr double kTol = 1e-9;

struct StdForm {
    // min cost.y  s.t.  A y = b,  0 <= y <= upper  (upper may be +inf)
    int n = 0;
    std::vector<double> cost;
    std::vector<double> upper;
    std::vector<std::vector<double>> a;  // rows, dense length n
    std::vector<double> b;

    // Mapping back to the original columns. kind: 0 = shifted by lower
    // bound (x = shift + y), 1 = reflected at upper bound (x = shift - y),
    // 2 = free split (x = y[idx] - y[idx2]).
    struct Back {
        int kind = 0;
        int idx = -1;
        int idx2 = -1;
        double shift = 0.0;
    };
    std::vector<Back> back;
};

inline StdForm to_standard_form(const Milp& m) {
    StdForm s;
    const int n_rows = static_cast<int>(m.rows.size());
    // Column layout: transformed structural columns first, then one slack
    // per row (constraint a_r.x - s_r = 0 with s_r in [row.lo, row.hi]).
    std::vector<double> lo, hi;
    std::vector<double> obj;
    const int n_orig = static_cast<int>(m.cols.size());
    for (const auto& c : m.cols) {
        lo.push_back(c.lo);
        hi.push_back(c.hi);
        obj.push_back(m.maximize ? -c.obj : c.obj);
    }
    for (const auto& r : m.rows) {
        lo.push_back(r.lo);
        hi.push_back(r.hi);
        obj.push_back(0.0);
    }
    const int n_all = static_cast<int>(lo.size());

    // Dense row coefficients over the pre-transform columns.
    std::vector<std::vector<double>> raw(
        static_cast<size_t>(n_rows), std::vector<double>(static_cast<size_t>(n_all), 0.0));
    for (int r = 0; r < n_rows; ++r) {
        for (const auto& [col, coef] : m.rows[static_cast<size_t>(r)].coefs)
            raw[static_cast<size_t>(r)][static_cast<size_t>(col)] += coef;
        raw[static_cast<size_t>(r)][static_cast<size_t>(n_orig + r)] = -1.0;
    }

    s.b.assign(static_cast<size_t>(n_rows), 0.0);
    s.a.assign(static_cast<size_t>(n_rows), {});
    std::vector<std::vector<double>> cols_out;  // transformed column vectors
    s.back.resize(static_cast<size_t>(n_all));

    auto push_col = [&](const std::vector<double>& col, double c_cost, double c_upper) {
        cols_out.push_back(col);
        s.cost.push_back(c_cost);
        s.upper.push_back(c_upper);
        return static_cast<int>(cols_out.size()) - 1;
    };

    for (int j = 0; j < n_all; ++j) {
        std::vector<double> col(static_cast<size_t>(n_rows));
        for (int r = 0; r < n_rows; ++r) col[static_cast<size_t>(r)] = raw[static_cast<size_t>(r)][static_cast<size_t>(j)];
        const double l = lo[static_cast<size_t>(j)], h = hi[static_cast<size_t>(j)];
        auto& bk = s.back[static_cast<size_t>(j)];
        if (l > h)
            throw SolveError("inconsistent bounds on column " + std::to_string(j));
        if (l > -kInf) {
            bk.kind = 0;
            bk.shift = l;
            for (int r = 0; r < n_rows; ++r) s.b[static_cast<size_t>(r)] -= col[static_cast<size_t>(r)] * l;
            bk.idx = push_col(col, obj[static_cast<size_t>(j)], h - l);
        } else if (h < kInf) {
            bk.kind = 1;
            bk.shift = h;
            std::vector<double> neg(col);
            for (auto& v : neg) v = -v;
            for (int r = 0; r < n_rows; ++r) s.b[static_cast<size_t>(r)] -= col[static_cast<size_t>(r)] * h;
            bk.idx = push_col(neg, -obj[static_cast<size_t>(j)], kInf);
        } else {
            bk.kind = 2;
            std::vector<double> neg(col);
            for (auto& v : neg) v = -v;
            bk.idx = push_col(col, obj[static_cast<size_t>(j)], kInf);
            bk.idx2 = push_col(neg, -obj[static_cast<size_t>(j)], kInf);
        }
    }

    s.n = static_cast<int>(cols_out.size());
    for (int r = 0; r < n_rows; ++r) {
        s.a[static_cast<size_t>(r)].resize(static_cast<size_t>(s.n));
        for (int j = 0; j < s.n; ++j) s.a[static_cast<size_t>(r)][static_cast<size_t>(j)] = cols_out[static_cast<size_t>(j)][static_cast<size_t>(r)];
    }
    return s;
}

// Bounded-variable simplex over the tableau. Returns the value vector of
// all columns (structural-transformed plus artificials appended).
class Tableau {
  public:
    explicit Tableau(const StdForm& s) : n_real_(s.n), m_(static_cast<int>(s.b.size())) {
        n_total_ = n_real_ + m_;
        upper_ = s.upper;
        upper_.resize(static_cast<size_t>(n_total_), kInf);
        t_.assign(static_cast<size_t>(m_), std::vector<double>(static_cast<size_t>(n_total_), 0.0));
        b_ = s.b;
        for (int r = 0; r < m_; ++r) {
            const double sign = (b_[static_cast<size_t>(r)] < 0) ? -1.0 : 1.0;
            for (int j = 0; j < n_real_; ++j)
                t_[static_cast<size_t>(r)][static_cast<size_t>(j)] = sign * s.a[static_cast<size_t>(r)][static_cast<size_t>(j)];
            b_[static_cast<size_t>(r)] *= sign;
            t_[static_cast<size_t>(r)][static_cast<size_t>(n_real_ + r)] = 1.0;
        }
        basis_.resize(static_cast<size_t>(m_));
        status_.assign(static_cast<size_t>(n_total_), AtLower);
        for (int r = 0; r < m_; ++r) {
            basis_[static_cast<size_t>(r)] = n_real_ + r;
            status_[static_cast<size_t>(n_real_ + r)] = Basic;
        }
    }

    // Runs both phases; throws on infeasible/unbounded.
    void solve(const std::vector<double>& real_cost) {
        std::vector<double> phase1(static_cast<size_t>(n_total_), 0.0);
        for (int j = n_real_; j < n_total_; ++j) phase1[static_cast<size_t>(j)] = 1.0;
        run(phase1, /*allow_artificial=*/true);
        if (objective(phase1) > 1e-7)
            throw SolveError("LP infeasible (phase-1 objective " +
                             std::to_string(objective(phase1)) + ")");
        for (int j = n_real_; j < n_total_; ++j) upper_[static_cast<size_t>(j)] = 0.0;
        std::vector<double> phase2(real_cost);
        phase2.resize(static_cast<size_t>(n_total_), 0.0);
        run(phase2, /*allow_artificial=*/false);
    }

    std::vector<double> values() const {
        std::vector<double> x(static_cast<size_t>(n_total_), 0.0);
        for (int j = 0; j < n_total_; ++j)
            if (status_[static_cast<size_t>(j)] == AtUpper) x[static_cast<size_t>(j)] = upper_[static_cast<size_t>(j)];
        const auto xb = basic_values();
        for (int r = 0; r < m_; ++r) x[static_cast<size_t>(basis_[static_cast<size_t>(r)])] = xb[static_cast<size_t>(r)];
        return x;
    }

  private:
    enum Status { AtLower, AtUpper, Basic };

    std::vector<double> basic_values() const {
        std::vector<double> xb = b_;
        for (int j = 0; j < n_total_; ++j) {
            if (status_[static_cast<size_t>(j)] != AtUpper || upper_[static_cast<size_t>(j)] == 0.0) continue;
            for (int r = 0; r < m_; ++r) xb[static_cast<size_t>(r)] -= t_[static_cast<size_t>(r)][static_cast<size_t>(j)] * upper_[static_cast<size_t>(j)];
        }
        return xb;
    }

    double objective(const std::vector<double>& cost) const {
        const auto x = values();
        double v = 0.0;
        for (int j = 0; j < n_total_; ++j) v += cost[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
        return v;
    }

    void run(const std::vector<double>& cost, bool allow_artificial) {
        for (int iter = 0; iter < 200000; ++iter) {
            const auto xb = basic_values();
            // Reduced costs via duals y = cB . T (T already equals B^-1 A).
            std::vector<double> red(static_cast<size_t>(n_total_), 0.0);
            for (int j = 0; j < n_total_; ++j) {
                if (status_[static_cast<size_t>(j)] == Basic) continue;
                double z = cost[static_cast<size_t>(j)];
                for (int r = 0; r < m_; ++r) {
                    const double cb = cost[static_cast<size_t>(basis_[static_cast<size_t>(r)])];
                    if (cb != 0.0) z -= cb * t_[static_cast<size_t>(r)][static_cast<size_t>(j)];
                }
                red[static_cast<size_t>(j)] = z;
            }
            int enter = -1;
            int dir = 0;
            for (int j = 0; j < n_total_; ++j) {
                if (status_[static_cast<size_t>(j)] == Basic) continue;
                if (!allow_artificial && j >= n_real_) continue;
                if (status_[static_cast<size_t>(j)] == AtLower && red[static_cast<size_t>(j)] < -kTol) {
                    enter = j;
                    dir = +1;
                    break;
                }
                if (status_[static_cast<size_t>(j)] == AtUpper && red[static_cast<size_t>(j)] > kTol) {
                    enter = j;
                    dir = -1;
                    break;
                }
            }
            if (enter < 0) return;  // optimal for this phase

            // Ratio test: entering moves by t >= 0 in direction dir, basics
            // move by -dir * T_enter * t.
            double t_limit = upper_[static_cast<size_t>(enter)];  // bound-flip distance
            int leave_row = -1;
            bool leave_at_upper = false;
            for (int r = 0; r < m_; ++r) {
                const double delta = -dir * t_[static_cast<size_t>(r)][static_cast<size_t>(enter)];
                double limit = kInf;
                bool hits_upper = false;
                if (delta < -kTol) {
                    limit = xb[static_cast<size_t>(r)] / (-delta);
                } else if (delta > kTol && upper_[static_cast<size_t>(basis_[static_cast<size_t>(r)])] < kInf) {
                    limit = (upper_[static_cast<size_t>(basis_[static_cast<size_t>(r)])] - xb[static_cast<size_t>(r)]) / delta;
                    hits_upper = true;
                } else {
                    continue;
                }
                if (limit < 0.0) limit = 0.0;
                const bool better =
                    limit < t_limit - kTol ||
                    (limit < t_limit + kTol && leave_row >= 0 &&
                     basis_[static_cast<size_t>(r)] < basis_[static_cast<size_t>(leave_row)]) ||
                    (limit < t_limit + kTol && leave_row < 0 && limit <= t_limit);
                if (better) {
                    t_limit = limit;
                    leave_row = r;
                    leave_at_upper = hits_upper;
                }
            }
            if (t_limit >= kInf)
                throw SolveError("LP unbounded");
            if (leave_row < 0) {
                // Pure bound flip of the entering variable.
                status_[static_cast<size_t>(enter)] =
                    (status_[static_cast<size_t>(enter)] == AtLower) ? AtUpper : AtLower;
                continue;
            }
            pivot(leave_row, enter, leave_at_upper);
        }
        throw SolveError("LP iteration limit exceeded");
    }

    void pivot(int leave_row, int enter, bool leave_at_upper) {
        const int leaving = basis_[static_cast<size_t>(leave_row)];
        const double p = t_[static_cast<size_t>(leave_row)][static_cast<size_t>(enter)];
        if (std::abs(p) < 1e-12) throw SolveError("LP pivot breakdown");
        auto& prow = t_[static_cast<size_t>(leave_row)];
        for (auto& v : prow) v /= p;
        b_[static_cast<size_t>(leave_row)] /= p;
        for (int r = 0; r < m_; ++r) {
            if (r == leave_row) continue;
            const double f = t_[static_cast<size_t>(r)][static_cast<size_t>(enter)];
            if (f == 0.0) continue;
            auto& row = t_[static_cast<size_t>(r)];
            for (int j = 0; j < n_total_; ++j) row[static_cast<size_t>(j)] -= f * prow[static_cast<size_t>(j)];
            b_[static_cast<size_t>(r)] -= f * b_[static_cast<size_t>(leave_row)];
        }
        basis_[static_cast<size_t>(leave_row)] = enter;
        status_[static_cast<size_t>(enter)] = Basic;
        status_[static_cast<size_t>(leaving)] = leave_at_upper ? AtUpper : AtLower;
    }

    int n_real_;
    int m_;
    int n_total_ = 0;
    std::vector<double> upper_;
    std::vector<std::vector<double>> t_;
    std::vector<double> b_;
    std::vector<int> basis_;
    std::vector<Status> status_;
};

}  // namespace detail_lp

// Solves the continuous relaxation of `m` (integrality flags ignored) with
// the built-in simplex. Small models only.
inline MilpSolution solve_lp_reference(const Milp& m) {
    if (m.cols.empty()) throw SolveError("empty LP");
    auto std_form = detail_lp::to_standard_form(m);
    detail_lp::Tableau tab(std_form);
    tab.solve(std_form.cost);
    const auto y = tab.values();

    MilpSolution sol;
    sol.col_value.resize(m.cols.size());
    for (size_t j = 0; j < m.cols.size(); ++j) {
        const auto& bk = std_form.back[j];
        double v = 0.0;
        if (bk.kind == 0)
            v = bk.shift + y[static_cast<size_t>(bk.idx)];
        else if (bk.kind == 1)
            v = bk.shift - y[static_cast<size_t>(bk.idx)];
        else
            v = y[static_cast<size_t>(bk.idx)] - y[static_cast<size_t>(bk.idx2)];
        sol.col_value[j] = v;
    }
    sol.objective = 0.0;
    for (size_t j = 0; j < m.cols.size(); ++j)
        sol.objective += m.cols[j].obj * sol.col_value[j];
    return sol;
}

}  // namespace cpds
