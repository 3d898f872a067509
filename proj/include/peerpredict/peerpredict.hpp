#pragma once

#include "peerpredict/error.hpp"
#include "peerpredict/prior.hpp"
#include "peerpredict/scoring.hpp"
#include "peerpredict/equilibria.hpp"
#include "peerpredict/optimizer.hpp"
#include "peerpredict/mechanism.hpp"
#include "peerpredict/verify.hpp"
