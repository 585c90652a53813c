#ifndef MFREG_MFREG_HPP
#define MFREG_MFREG_HPP

// Matrix-factorization recommender with swappable regularization frameworks,
// closed-form implied-coefficient diagnostics, MAE / Degree-of-Matthew-Effect
// evaluation, and a deterministic grid-search harness.

#include "mfreg/config.hpp"
#include "mfreg/data_io.hpp"
#include "mfreg/dataset.hpp"
#include "mfreg/diagnostics.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/experiment.hpp"
#include "mfreg/gradients.hpp"
#include "mfreg/matrix.hpp"
#include "mfreg/metrics.hpp"
#include "mfreg/model.hpp"
#include "mfreg/model_io.hpp"
#include "mfreg/rng.hpp"
#include "mfreg/trainer.hpp"

#endif
