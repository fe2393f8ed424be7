// block_observable.hpp — Heisenberg-picture observable split into P₀/P₁ blocks

#pragma once

#include "friedsim/types.hpp"

namespace friedsim {

// a00 is the vacuum-sector compression (n×n); a11 the one-excitation-sector
// compression on the discretised grid (nN×nN, may be left empty when the
// caller only tracks the vacuum block).
struct BlockObservable {
    double t = 0.0;
    Matrix a00;
    Matrix a11;
};

} // namespace friedsim
