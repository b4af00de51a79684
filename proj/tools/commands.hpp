#pragma once

#include <ostream>
#include <string>

#include "config.hpp"

namespace xou::cli {

enum ExitCode { kOk = 0, kValidation = 2, kSolver = 3, kVerification = 4 };

struct Outputs {
    std::string out;         ///< main output file, stdout when empty
    std::string path_out;    ///< simulate: path CSV
    std::string trades_out;  ///< simulate: trade-log CSV
    std::string prices_out;  ///< simulate: (timestamp, price) CSV for calibrate
};

int cmd_solve(const RunConfig& cfg, const Outputs& out);
int cmd_sweep(const RunConfig& cfg, const Outputs& out);
int cmd_simulate(const RunConfig& cfg, const Outputs& out);
int cmd_verify(const RunConfig& cfg, const Outputs& out);
int cmd_calibrate(const RunConfig& cfg, const std::string& prices_csv, const Outputs& out);

/// Text of the sweep CSV header; the column set never changes.
const char* sweep_header();

}  // namespace xou::cli
