#pragma once

#include "cgsense.hpp"
#include "coils.hpp"
#include "dataset.hpp"
#include "encoding.hpp"
#include "error.hpp"
#include "fourier.hpp"
#include "metrics.hpp"
#include "motion.hpp"
#include "phantom.hpp"
#include "png.hpp"
#include "random.hpp"
#include "tensor.hpp"
#include "tensor_io.hpp"
