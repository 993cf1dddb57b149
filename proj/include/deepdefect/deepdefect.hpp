#ifndef DEEPDEFECT_DEEPDEFECT_HPP
#define DEEPDEFECT_DEEPDEFECT_HPP

#include "deepdefect/data.hpp"
#include "deepdefect/dbn.hpp"
#include "deepdefect/error.hpp"
#include "deepdefect/eval.hpp"
#include "deepdefect/experiment.hpp"
#include "deepdefect/linalg.hpp"
#include "deepdefect/rbm.hpp"
#include "deepdefect/reference.hpp"
#include "deepdefect/sae.hpp"
#include "deepdefect/serialize.hpp"

#endif  // DEEPDEFECT_DEEPDEFECT_HPP
