#pragma once

#include "rdp/baselines.hpp"
#include "rdp/chain_function.hpp"
#include "rdp/error.hpp"
#include "rdp/experiment.hpp"
#include "rdp/md5.hpp"
#include "rdp/offline.hpp"
#include "rdp/online.hpp"
#include "rdp/optimizer.hpp"
#include "rdp/params.hpp"
#include "rdp/storage.hpp"
#include "rdp/table.hpp"
#include "rdp/theory.hpp"
