#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "ama/mpc.hpp"
#include "ama/problem.hpp"
#include "ama/solver.hpp"

namespace ama {

/// Loaded problem file: the problem plus an optional starting dual point.
struct ProblemFile {
  Problem problem;
  std::optional<Vec> y0;
  std::optional<MpcSpec> mpc;  // set when the file described an MPC spec
};

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);
nlohmann::json mat_to_json(const Mat& M);  // row-major nested arrays
Mat mat_from_json(const nlohmann::json& j);

/// {"f": {...}, "g": {...}, "A": {...}, "y0": [...]} or {"mpc": {...}}.
/// Throws std::runtime_error with a descriptive message on schema errors.
ProblemFile problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const Problem& problem, const Vec* y0 = nullptr);

ProblemFile load_problem_file(const std::string& path);
void save_problem_file(const std::string& path, const Problem& problem, const Vec* y0 = nullptr);

MpcSpec mpc_spec_from_json(const nlohmann::json& j);

/// Trace CSV: k,gamma,tau,backtracks,res_inf,ame,x_updates,z_updates,time_ms
/// with 17 significant digits. zero_time replaces the wall-time column with 0
/// so benchmark runs are byte-for-byte reproducible.
void write_trace_csv(const std::string& path, const SolveTrace& trace, bool zero_time = false);

struct TraceData {
  std::vector<IterRecord> rows;
};
TraceData read_trace_csv(const std::string& path);

std::string format_double(double v);  // shortest 17-significant-digit form

}  // namespace ama
