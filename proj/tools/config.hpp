#pragma once

// Flat `key = value` run configuration. Command-line flags use the same key
// names and override values read from a file.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xou/record.hpp"

namespace xou::cli {

struct KeyInfo {
    const char* name;
    const char* help;
};

const std::vector<KeyInfo>& known_keys();

class RunConfig {
public:
    /// Reads `key = value` lines; '#' starts a comment. Unknown keys and
    /// duplicate keys are rejected with the offending line and key.
    void load_file(const std::string& path);
    void load_text(const std::string& text, const std::string& origin = "config");
    /// Throws ValidationError for an unknown key.
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::uint64_t count_or(const std::string& key, std::uint64_t fallback) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;

    /// Model, costs and quadrature settings, each rounded to the JSON
    /// precision so that a run replayed from its record sees the same inputs.
    SolveInputs solve_inputs() const;

private:
    std::map<std::string, std::string> values_;
};

/// Puts the inputs of a JSON solution record into `cfg`.
void apply_record_inputs(RunConfig& cfg, const SolutionRecord& rec);

}  // namespace xou::cli
