#pragma once

#include "qform/rng.hpp"
#include "qform/linalg.hpp"
#include "qform/free_combinatorics.hpp"
#include "qform/tensor_norms.hpp"
#include "qform/lps_su2.hpp"
#include "qform/lab.hpp"
