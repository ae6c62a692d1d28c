#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lyascreen/screen.hpp"

namespace lyascreen {

// Process exit codes.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int input_error = 2;
inline constexpr int runtime_error = 3;
inline constexpr int ruled_out = 10;
inline constexpr int not_positive_definite = 11;  // also NotLPD
inline constexpr int infimum_zero = 12;
inline constexpr int inconclusive = 13;
inline constexpr int vdot_violations = 14;
}  // namespace exit_code

int exit_code_for(VerdictTag tag);
int exit_code_for(LpdTag tag);

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lyascreen
