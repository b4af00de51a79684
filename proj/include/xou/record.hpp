#pragma once

// Solve orchestration and the JSON solution record.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xou/double_stopping.hpp"
#include "xou/eigen.hpp"
#include "xou/model.hpp"
#include "xou/switching.hpp"

namespace xou {

inline constexpr const char* kToolVersion = "0.1.0";

struct SolveInputs {
    ModelParams params;
    Costs costs;
    QuadratureConfig quad;
};

enum class SolveStatus { Solved, Trivial, Failed };
const char* status_name(SolveStatus s);

struct SolutionRecord {
    std::string tool_version = kToolVersion;
    SolveInputs inputs;
    ModelLandmarks landmarks;
    std::optional<ExitSolution> exit;
    SolveStatus ds_status = SolveStatus::Failed;
    std::string ds_message;
    std::optional<DoubleStoppingSolution> double_stopping;
    SolveStatus sw_status = SolveStatus::Failed;
    std::string sw_message;
    std::optional<SwitchingSolution> switching;
    std::vector<std::uint64_t> seeds;

    bool all_solved() const { return ds_status == SolveStatus::Solved && sw_status == SolveStatus::Solved; }
};

/// Solves both problems. Solver failures and trivial entry problems are
/// recorded, not thrown; invalid inputs throw ValidationError.
SolutionRecord solve_all(const SolveInputs& in);

/// v rounded to `digits` significant decimal digits.
double round_sig(double v, int digits);
/// Shortest decimal text of v at 6 significant digits (CSV cells).
std::string csv_number(double v);

inline constexpr int kJsonDigits = 10;

/// Pretty-printed JSON with numbers at 10 significant digits. Reading the
/// text back and writing it again gives identical bytes.
std::string record_to_json(const SolutionRecord& rec);
SolutionRecord record_from_json(const std::string& text);

}  // namespace xou
