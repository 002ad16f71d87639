#pragma once

#include "pirt/csv.hpp"
#include "pirt/error.hpp"
#include "pirt/eval.hpp"
#include "pirt/experiment.hpp"
#include "pirt/features.hpp"
#include "pirt/gradcheck.hpp"
#include "pirt/head.hpp"
#include "pirt/linalg.hpp"
#include "pirt/losses.hpp"
#include "pirt/optimizer.hpp"
#include "pirt/splits.hpp"
#include "pirt/synthetic.hpp"
#include "pirt/trainer.hpp"
