#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "msr/model.hpp"

namespace msr {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// MSR1 container, all integers little-endian:
//   "MSR1" | u8 version (1) | u32 n, m, d, l, k
//   n x ( f64[m*d] phi row-major | f64[m] y )
//   u8[n] labels (255 = unknown)
//   l x ( u32 count | u32[count] coordinates )   count 0 = truth unknown
// Sample distributions are not stored; a loaded dataset reports Gaussian and
// lambda0 = 1.

void write_msr1(const Dataset& ds, const std::filesystem::path& path);
Dataset read_msr1(const std::filesystem::path& path);

}  // namespace msr
