#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace fbmtv {

/**
 * The request itself is malformed: bad parameter ranges, inconsistent
 * inputs, unreadable files.  The command-line tool maps this to exit
 * code 1.
 */
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * An internal consistency check failed.  This signals a bug (or numerical
 * breakdown) in the library itself, not a user error, and the command-line
 * tool maps it to exit code 2.  When the failure happened inside a seeded
 * replica the offending seed is attached so the run can be replayed.
 */
class invariant_violation : public std::runtime_error {
public:
    explicit invariant_violation(const std::string& what)
        : std::runtime_error(what) {}

    invariant_violation(const std::string& what, std::uint64_t seed)
        : std::runtime_error(what + " [replica seed " + std::to_string(seed) + "]"),
          seed_(seed) {}

    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

private:
    std::optional<std::uint64_t> seed_;
};

/**
 * A statistical experiment was asked to resolve a regime it cannot reach
 * with the configured sample budget (for example a tail window with no
 * observed exceedances).  Carries the largest usable threshold so the
 * caller can adjust the window.  Treated as a validation problem: the
 * configuration, not the code, is at fault.
 */
class underpowered_error : public validation_error {
public:
    underpowered_error(const std::string& what, double largest_usable)
        : validation_error(what), largest_usable_(largest_usable) {}

    double largest_usable() const noexcept { return largest_usable_; }

private:
    double largest_usable_;
};

} // namespace fbmtv
