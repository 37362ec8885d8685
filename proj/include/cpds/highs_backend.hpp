#pragma once

// Adapter that solves a Milp with the HiGHS solver. Deterministic settings:
// single thread, fixed seed, tight absolute gap. Two environment variables
// are honoured: CPDS_SOLVER selects the backend (only "highs" is built) and
// CPDS_THREADS sets the solver thread count (default 1; more threads may
// trade byte-for-byte reproducibility for speed).

#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "Highs.h"
#include "cpds/common.hpp"
#include "cpds/milp.hpp"

namespace cpds {

namespace detail_solver {

inline void check_backend_env() {
    static const bool checked = [] {
        const char* s = std::getenv("CPDS_SOLVER");
        if (s && *s && std::string(s) != "highs")
            throw ValidationError(std::string("CPDS_SOLVER: unknown backend '") + s +
                                  "' (available: highs)");
        return true;
    }();
    (void)checked;
}

inline int thread_count_env() {
    static const int n = [] {
        const char* s = std::getenv("CPDS_THREADS");
        if (!s || !*s) return 1;
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end == s || *end != '\0' || v < 1 || v > 256)
            throw ValidationError(std::string("CPDS_THREADS: expected an integer in [1, 256], got '") +
                                  s + "'");
        return static_cast<int>(v);
    }();
    return n;
}

}  // namespace detail_solver

struct SolveOptions {
    // Zero gaps: the models carry 1e-9 tie-break penalties that a looser
    // stopping rule could otherwise absorb.
    double mip_abs_gap = 0.0;
    double mip_rel_gap = 0.0;
    double time_limit_s = 600.0;
    int seed = 0;
};

struct MilpSolution {
    double objective = 0.0;
    std::vector<double> col_value;

    double value(int col) const { return col_value.at(static_cast<size_t>(col)); }
};

inline MilpSolution solve_milp(const Milp& m, const SolveOptions& opts = {}) {
    detail_solver::check_backend_env();
    HighsModel model;
    HighsLp& lp = model.lp_;
    lp.num_col_ = static_cast<HighsInt>(m.cols.size());
    lp.num_row_ = static_cast<HighsInt>(m.rows.size());
    lp.sense_ = m.maximize ? ObjSense::kMaximize : ObjSense::kMinimize;

    bool any_int = false;
    for (const auto& c : m.cols) {
        lp.col_cost_.push_back(c.obj);
        lp.col_lower_.push_back(c.lo);
        lp.col_upper_.push_back(c.hi);
        lp.integrality_.push_back(c.integer ? HighsVarType::kInteger
                                            : HighsVarType::kContinuous);
        any_int |= c.integer;
    }
    if (!any_int) lp.integrality_.clear();

    lp.a_matrix_.format_ = MatrixFormat::kRowwise;
    lp.a_matrix_.start_.clear();
    lp.a_matrix_.start_.push_back(0);
    for (const auto& r : m.rows) {
        lp.row_lower_.push_back(r.lo);
        lp.row_upper_.push_back(r.hi);
        for (const auto& [col, coef] : r.coefs) {
            lp.a_matrix_.index_.push_back(static_cast<HighsInt>(col));
            lp.a_matrix_.value_.push_back(coef);
        }
        lp.a_matrix_.start_.push_back(
            static_cast<HighsInt>(lp.a_matrix_.index_.size()));
    }
    lp.a_matrix_.num_col_ = lp.num_col_;
    lp.a_matrix_.num_row_ = lp.num_row_;

    Highs highs;
    highs.setOptionValue("output_flag", false);
    highs.setOptionValue("threads", detail_solver::thread_count_env());
    highs.setOptionValue("random_seed", opts.seed);
    highs.setOptionValue("mip_rel_gap", opts.mip_rel_gap);
    highs.setOptionValue("mip_abs_gap", opts.mip_abs_gap);
    highs.setOptionValue("time_limit", opts.time_limit_s);

    if (highs.passModel(model) != HighsStatus::kOk)
        throw SolveError("solver rejected model '" + m.name + "'");
    if (highs.run() == HighsStatus::kError)
        throw SolveError("solver error on model '" + m.name + "'");

    const HighsModelStatus status = highs.getModelStatus();
    if (status != HighsModelStatus::kOptimal) {
        std::string msg = "model '" + m.name + "' not solved to optimality: " +
                          highs.modelStatusToString(status);
        if (status == HighsModelStatus::kTimeLimit) {
            const auto& info = highs.getInfo();
            if (info.primal_solution_status == kSolutionStatusFeasible)
                msg += " (incumbent objective " +
                       std::to_string(info.objective_function_value) + ")";
            else
                msg += " (no incumbent)";
        }
        throw SolveError(msg);
    }

    MilpSolution sol;
    sol.objective = highs.getInfo().objective_function_value;
    sol.col_value = highs.getSolution().col_value;
    return sol;
}

}  // namespace cpds
