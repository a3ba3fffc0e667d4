#pragma once

#include <stdexcept>
#include <string>

namespace linksched {

/// A well-formed request that cannot be satisfied: a deadline shorter than a
/// connection's duration, a schedule that does not match its problem, etc.
class DomainError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Input that could not be parsed or that violates a structural precondition.
class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class BudgetExceeded : public DomainError
{
public:
    using DomainError::DomainError;
};

} // namespace linksched
