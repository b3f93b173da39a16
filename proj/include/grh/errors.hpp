#pragma once

#include <stdexcept>
#include <string>

namespace grh {

// Stable machine-readable failure codes. These appear verbatim in CLI
// reports, so renaming one is a breaking change of the report schema.
enum class errc {
    division_by_zero,
    conductor_limit,
    truncation_exhausted,
    singular_input,
    unsupported_eigenvalue,
    ambiguous_angle,
    block_mismatch,
    non_integer_degree,
    imaginary_obstruction,
    recipe_unavailable,
    no_solution,
    unsupported_spectrum,
    order_mismatch,
    empty_candidates,
    malformed_case,
    parse_error,
    internal,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::division_by_zero: return "DIVISION_BY_ZERO";
        case errc::conductor_limit: return "CONDUCTOR_LIMIT";
        case errc::truncation_exhausted: return "TRUNCATION_EXHAUSTED";
        case errc::singular_input: return "SINGULAR_INPUT";
        case errc::unsupported_eigenvalue: return "UNSUPPORTED_EIGENVALUE";
        case errc::ambiguous_angle: return "AMBIGUOUS_ANGLE";
        case errc::block_mismatch: return "BLOCK_MISMATCH";
        case errc::non_integer_degree: return "NON_INTEGER_DEGREE";
        case errc::imaginary_obstruction: return "IMAGINARY_OBSTRUCTION";
        case errc::recipe_unavailable: return "RECIPE_UNAVAILABLE";
        case errc::no_solution: return "NO_SOLUTION";
        case errc::unsupported_spectrum: return "UNSUPPORTED_SPECTRUM";
        case errc::order_mismatch: return "ORDER_MISMATCH";
        case errc::empty_candidates: return "EMPTY_CANDIDATES";
        case errc::malformed_case: return "MALFORMED_CASE";
        case errc::parse_error: return "PARSE_ERROR";
        case errc::internal: return "INTERNAL";
    }
    return "INTERNAL";
}

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

// Run-time limits adjustable from the CLI. Reads vastly outnumber writes;
// writers are expected to configure once at startup.
struct options {
    static inline int max_conductor = 240;
    static inline int default_truncation = 12;
};

}  // namespace grh
