#pragma once

#include <stdexcept>
#include <string>

namespace qtomo {

// Configuration / CLI input problems. The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Identity measurement found no entry above the threshold.
struct empty_support_error : std::runtime_error {
    explicit empty_support_error(const std::string& what) : std::runtime_error(what) {}
};

// Pair inference asked to divide by a (near-)zero determined entry.
struct ill_conditioned_error : std::runtime_error {
    explicit ill_conditioned_error(const std::string& what) : std::runtime_error(what) {}
};

// Polar projection of a rank-deficient matrix.
struct singular_matrix_error : std::runtime_error {
    explicit singular_matrix_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qtomo
