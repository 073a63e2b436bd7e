#ifndef GPDISCRIM_ERRORS_HPP
#define GPDISCRIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gpdiscrim {

// Numerical failure: singular matrices, degenerate variances, flat criteria.
// Distinct from std::invalid_argument, which flags misconfigured inputs.
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Cholesky breakdown; carries the index of the first non-positive pivot.
class factorization_error : public numeric_error {
public:
  factorization_error(const std::string& what, int pivot)
      : numeric_error(what), pivot_(pivot) {}
  int pivot() const { return pivot_; }

private:
  int pivot_;
};

}  // namespace gpdiscrim

#endif
