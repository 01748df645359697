#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"
#include "spectra/linalg.hpp"

int main(int argc, char** argv) {
  spectra::linalg::set_blas_threads(1);
  doctest::Context context(argc, argv);
  return context.run();
}
