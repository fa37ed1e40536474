#pragma once

#include "itere/kernels.hpp"

namespace itere::kernels {

// Defined only when the AVX2 translation unit is compiled in.
const KernelTable* avx2_table();

}  // namespace itere::kernels
