#pragma once

#include "kls/core/band_lu.hpp"
#include "kls/core/dense.hpp"
#include "kls/core/error.hpp"
#include "kls/core/householder.hpp"
#include "kls/core/kernels.hpp"
#include "kls/core/ledger.hpp"
#include "kls/core/random.hpp"
#include "kls/core/schur.hpp"
#include "kls/core/svd.hpp"
#include "kls/arnoldi.hpp"
#include "kls/eigen_match.hpp"
#include "kls/eigensolver.hpp"
#include "kls/gmres.hpp"
#include "kls/metrics.hpp"
#include "kls/operator.hpp"
#include "kls/ortho_schemes.hpp"
#include "kls/problems.hpp"
#include "kls/scheme.hpp"
#include "kls/bench/experiments.hpp"
