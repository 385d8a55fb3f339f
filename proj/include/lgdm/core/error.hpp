/**
 * @file error.hpp
 * @brief Exception hierarchy shared by every lgdm module.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace lgdm {

/// Base of all errors thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A notch or slit that does not follow the structured mesh lines.
class UnsupportedGeometry : public Error {
public:
    using Error::Error;
};

class InvertedElement : public Error {
public:
    InvertedElement(long element, double det_j)
        : Error("inverted element " + std::to_string(element) +
                " (det J = " + std::to_string(det_j) + ")"),
          element_(element), det_j_(det_j) {}

    long element() const noexcept { return element_; }
    double det_j() const noexcept { return det_j_; }

private:
    long element_;
    double det_j_;
};

/// Solution-dependent state that does not match the mesh it is used with.
class InvalidState : public Error {
public:
    using Error::Error;
};

class UnsupportedConstraint : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double rcond)
        : Error(what + " (rcond estimate " + std::to_string(rcond) + ")"), rcond_(rcond) {}

    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// A load step that failed to converge or diverged.
class StepFailure : public Error {
public:
    StepFailure(int step, int iterations, double du_rel, double de_rel, double residual,
                const std::string& reason)
        : Error("load step " + std::to_string(step) + " failed after " +
                std::to_string(iterations) + " iterations: " + reason +
                " (|du|/|u| = " + std::to_string(du_rel) + ", |de|/|e| = " +
                std::to_string(de_rel) + ", |F| = " + std::to_string(residual) + ")"),
          step_(step), iterations_(iterations), du_rel_(du_rel), de_rel_(de_rel),
          residual_(residual) {}

    int step() const noexcept { return step_; }
    int iterations() const noexcept { return iterations_; }
    double du_rel() const noexcept { return du_rel_; }
    double de_rel() const noexcept { return de_rel_; }
    double residual() const noexcept { return residual_; }

private:
    int step_;
    int iterations_;
    double du_rel_;
    double de_rel_;
    double residual_;
};

/// Configuration errors carry the offending key path, e.g. "material.nu".
class ParseError : public Error {
public:
    ParseError(const std::string& key_path, const std::string& message)
        : Error(key_path.empty() ? message : key_path + ": " + message), key_path_(key_path) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace lgdm
