#pragma once

#include <stdexcept>
#include <string>

namespace prosumer {

/// Argument outside the domain of a mechanism formula (zero price with a
/// nonzero bid, negative price, vanishing derivative, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Bid vector whose clearing price would be negative.
class InvalidBids : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid MarketConfig / SweepSpec / config file contents.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dual search could not find a sign change of the excess demand.
class BracketFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strategic payoff has no finite maximizer for the given opponents.
class UnboundedPayoff : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Brute-force oracle asked for more prosumers than it can enumerate.
class TooLarge : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace prosumer
