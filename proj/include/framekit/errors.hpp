#pragma once

#include <stdexcept>
#include <string>

namespace framekit {

// Base class of every library error.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed values: empty vectors, NaN/Inf entries, bad parameter ranges.
class invalid_input_error : public error {
 public:
  using error::error;
};

// Dimension mismatches and matrices that are not Hermitian within tolerance.
class shape_error : public error {
 public:
  using error::error;
};

// Spectral-function arguments outside the admissible domain
// (negative eigenvalues under fractional powers, schedule delta >= 1/100).
class domain_error : public error {
 public:
  using error::error;
};

// Interval with lo > hi.
class invalid_range_error : public error {
 public:
  using error::error;
};

// Weight outside [0,1] or of the wrong length.
class invalid_weight_error : public error {
 public:
  using error::error;
};

// Lower frame bound is (numerically) zero where a frame is required.
class not_a_frame_error : public error {
 public:
  using error::error;
};

// Infinite measure paired with a nonzero vector: no finite Bessel bound.
class not_bessel_error : public error {
 public:
  using error::error;
};

// Fractional selection or fractional weight requested on an atom.
class atomicity_error : public error {
 public:
  using error::error;
};

// An atomic cell whose oscillation bound cannot meet its refinement target.
class irreducible_cell_error : public error {
 public:
  using error::error;
};

// Cell refinement did not converge within the configured depth.
class refinement_limit_error : public error {
 public:
  using error::error;
};

// Exhaustive enumeration would exceed the configured assignment budget.
class search_budget_error : public error {
 public:
  using error::error;
};

// A stated hypothesis of the underlying theorem does not hold for the input.
class hypothesis_error : public error {
 public:
  using error::error;
};

// Zero scalar attached to a nonzero vector in a scalable system.
class degenerate_scalar_error : public error {
 public:
  using error::error;
};

// Discretized system lost its lower frame bound; a finer tolerance is needed.
class discretization_too_coarse_error : public error {
 public:
  using error::error;
};

// Wavelet admissibility quadrature too far from 1.
class admissibility_error : public error {
 public:
  using error::error;
};

}  // namespace framekit
