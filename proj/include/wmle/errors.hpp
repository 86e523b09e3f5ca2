#pragma once

#include <stdexcept>
#include <string>

namespace wmle {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameter outside its mathematical domain (non-positive rate, n too small, ...).
struct domain_error : error {
    using error::error;
};

/// Matrix failed a positive-semi-definiteness check.
struct not_psd_error : error {
    using error::error;
};

/// Singular matrix where an inverse (or inverse root) was required.
struct singular_error : error {
    using error::error;
};

/// Caller violated an interface contract (size mismatch, wrong dimension).
struct contract_error : error {
    using error::error;
};

/// Problem size exceeds a configured cap.
struct capacity_error : error {
    using error::error;
};

/// Observation outside the support of the family.
struct support_error : error {
    using error::error;
};

/// Sample admits no MLE (constant data, zero spread).
struct degenerate_data_error : error {
    using error::error;
};

/// A user-supplied callback produced a non-finite value.
struct evaluation_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

/// Malformed input file; message carries the line number.
struct parse_error : error {
    using error::error;
};

} // namespace wmle
