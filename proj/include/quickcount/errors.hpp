#pragma once

#include <stdexcept>
#include <string>

namespace quickcount {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The electoral catalog is inconsistent (unknown party, bad coalition...).
class CatalogError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Sampling design cannot be realised (e.g. n_h > N_h).
class DesignError : public Error {
 public:
  using Error::Error;
};

/// A stratum has no data and must be imputed before this step.
class MissingStratumError : public Error {
 public:
  using Error::Error;
};

/// Estimation is undefined for the given data (no valid votes, no data at all).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace quickcount
