// friedsim.hpp — Umbrella header

#pragma once

#include "friedsim/block_observable.hpp"
#include "friedsim/dynmap.hpp"
#include "friedsim/heisenberg.hpp"
#include "friedsim/io.hpp"
#include "friedsim/kernel.hpp"
#include "friedsim/model.hpp"
#include "friedsim/oracle.hpp"
#include "friedsim/profile.hpp"
#include "friedsim/propagator.hpp"
#include "friedsim/quadrature.hpp"
#include "friedsim/resolvent.hpp"
#include "friedsim/types.hpp"
