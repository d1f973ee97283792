#ifndef STFRAG_ERRORS_HPP
#define STFRAG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stfrag {

// Argument outside the documented domain of an operation.
class domain_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numeric scheme stopped short of its accuracy target.  Carries the
// bound that was actually achieved so callers can decide what to do.
class numeric_accuracy_error : public std::runtime_error {
public:
    numeric_accuracy_error(const std::string& what, double achieved, double target)
        : std::runtime_error(what + " [achieved=" + std::to_string(achieved) +
                             ", target=" + std::to_string(target) + "]"),
          achieved_(achieved), target_(target) {}
    double achieved() const { return achieved_; }
    double target() const { return target_; }

private:
    double achieved_;
    double target_;
};

// A computation would exceed a configured memory or event budget.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// First passage did not happen before the horizon; carries the terminal
// infimum so callers can extend the horizon sensibly.
class not_reached_error : public std::runtime_error {
public:
    not_reached_error(const std::string& what, double terminal_infimum)
        : std::runtime_error(what), terminal_infimum_(terminal_infimum) {}
    double terminal_infimum() const { return terminal_infimum_; }

private:
    double terminal_infimum_;
};

// Interval family failed a separation / nesting requirement.
class geometry_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input is formally valid but degenerate (e.g. non-unique minimum).
class degenerate_input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iteration guard tripped; the input is considered pathological.
class pathological_input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A run configuration that cannot work (e.g. acceptance rate too low).
class configuration_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two objects that must have been built from each other were not.
class contract_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace stfrag

#endif
