#ifndef MRF_FLOCK_MRF_FLOCK_HPP
#define MRF_FLOCK_MRF_FLOCK_HPP

#include "mrf_flock/common.hpp"
#include "mrf_flock/dynamics.hpp"
#include "mrf_flock/energy.hpp"
#include "mrf_flock/experiment.hpp"
#include "mrf_flock/inference.hpp"
#include "mrf_flock/metrics.hpp"
#include "mrf_flock/mrf.hpp"
#include "mrf_flock/oracle.hpp"
#include "mrf_flock/scenario.hpp"
#include "mrf_flock/swarm.hpp"
#include "mrf_flock/vicsek.hpp"

#endif  // MRF_FLOCK_MRF_FLOCK_HPP
