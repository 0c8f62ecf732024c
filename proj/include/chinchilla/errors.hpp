#pragma once

#include <stdexcept>
#include <string>

namespace chinchilla {

// Malformed or out-of-domain input (bad files, invalid arguments). The CLI
// maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The numerics could not produce a finite answer. The CLI maps this to exit
// code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chinchilla
