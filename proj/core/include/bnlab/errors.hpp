#pragma once

#include <stdexcept>
#include <string>

namespace bnlab {

// Error taxonomy used across the library.  Exit-code mapping lives in the
// runner: config errors -> 2, numerical failures -> 3.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

class argument_error : public error {
public:
    explicit argument_error(const std::string& msg) : error(msg) {}
};

// Requested object exists mathematically but is outside the implemented range
// (e.g. higher angular sectors of the ball eigenbasis).
class capability_error : public error {
public:
    explicit capability_error(const std::string& msg) : error(msg) {}
};

class numerical_error : public error {
public:
    explicit numerical_error(const std::string& msg) : error(msg) {}
};

// A provider (Green regular part, quadrature backend) cannot reach the
// requested accuracy; carries the achieved bound in the message.
class provider_error : public error {
public:
    explicit provider_error(const std::string& msg) : error(msg) {}
};

class solver_error : public error {
public:
    explicit solver_error(const std::string& msg) : error(msg) {}
};

class singularity_error : public error {
public:
    explicit singularity_error(const std::string& msg) : error(msg) {}
};

} // namespace bnlab
