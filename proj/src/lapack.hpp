#pragma once

// LAPACKE with std::complex as its complex types. Include this instead of
// <lapacke.h> so every translation unit agrees on the definition.
#include <complex>
#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
