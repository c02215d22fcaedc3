#pragma once

#include <stdexcept>
#include <string>

namespace wolbdyn {

// Argument outside the domain of a model or operation (negative state,
// parameter out of range, wrong preset).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A closed-form expression hits a vanishing denominator.
class SingularFormulaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The requested steady state does not exist for the given rates.
class NonexistenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A defining equation has no finite root (bracket expansion ran away).
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive step size collapsed below the minimum step.
class StiffnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite intermediate value (overflow) while evaluating a function.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

// Two routes that must agree by theory disagreed numerically.
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace wolbdyn
