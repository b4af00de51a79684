#pragma once

#include "xou/model.hpp"

namespace fx {

// Base case used throughout: mu=0.8, sigma=0.2, theta=1, r=0.05, both costs 0.02.
inline xou::ModelParams base() { return {0.8, 1.0, 0.2, 0.05}; }
inline xou::Costs base_costs() { return {0.02, 0.02}; }

// Entry far too expensive: the switching investor never enters.
inline xou::Costs no_entry_costs() { return {5.0, 0.02}; }

// Central difference of f at x.
template <class Fn>
double diff(Fn f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace fx
