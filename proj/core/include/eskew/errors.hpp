#ifndef ESKEW_ERRORS_HPP
#define ESKEW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eskew {

/// Raised when a matrix that must be symmetric positive definite is not.
///
/// This is deliberately a distinct type: fitting code treats a non-PD scale
/// matrix as a recoverable modelling event (retry, re-seed, report), while
/// plain std::invalid_argument signals a caller bug.
class NotPositiveDefiniteError : public std::runtime_error {
public:
    explicit NotPositiveDefiniteError(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace eskew

#endif  // ESKEW_ERRORS_HPP
