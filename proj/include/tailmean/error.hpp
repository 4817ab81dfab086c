// error.hpp
//
// Exception hierarchy shared by every tailmean module. The CLI maps the
// three families onto exit codes: usage (1), data (2), numerical (3).

#pragma once

#include <stdexcept>
#include <string>

namespace tailmean {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input values: malformed CSV, nonpositive observations, out-of-range
// indices or probabilities handed to the library.
class data_error : public error {
public:
    using error::error;
};

class domain_error : public data_error {
public:
    using data_error::data_error;
};

class index_error : public data_error {
public:
    using data_error::data_error;
};

class size_error : public data_error {
public:
    using data_error::data_error;
};

// The numbers were fine but the computation could not produce a finite
// answer (infinite mean, solver failure, degenerate tail, ...).
class numerical_error : public error {
public:
    using error::error;
};

class infinite_mean_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class degenerate_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class singular_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class convergence_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class invalid_estimate_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

} // namespace tailmean
