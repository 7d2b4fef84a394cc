#ifndef DISSIM_DISSIM_HPP
#define DISSIM_DISSIM_HPP

#include "dissim/baselines.hpp"
#include "dissim/divergence.hpp"
#include "dissim/gradcheck.hpp"
#include "dissim/io.hpp"
#include "dissim/loss.hpp"
#include "dissim/model.hpp"
#include "dissim/solver_theta.hpp"
#include "dissim/solver_w.hpp"
#include "dissim/synthetic.hpp"
#include "dissim/trainer.hpp"
#include "dissim/types.hpp"

#endif  // DISSIM_DISSIM_HPP
