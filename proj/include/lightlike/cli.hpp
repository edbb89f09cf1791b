#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightlike/frame.hpp"

namespace lightlike::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { frames, forms, check, reduce, scan, oracle };
enum class Output { text, json };

struct RunConfig {
    Command command = Command::scan;
    std::string spec_path;
    int grid_per_param = 7;
    std::optional<std::vector<double>> point;
    Tolerances tol;
    Output output = Output::text;
    std::uint64_t seed = 0;
    int samples = 40;  // oracle sample count; raised to 4 * ambient dim
    ScreenOrder screen = ScreenOrder::standard;
};

enum ExitCode { kOk = 0, kInputError = 2, kNumericalError = 3 };

std::string command_name(Command c);

// Full report for `config`; throws InputError / NumericalError.
nlohmann::json build_report(const RunConfig& config);

// Indented rendering of a report; numbers use the same digits as the JSON dump.
std::string render_text(const nlohmann::json& report);

// Runs one invocation and writes the report (or the error) to the streams.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// argv front end (CLI11). argv[0] is the program name.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lightlike::cli
