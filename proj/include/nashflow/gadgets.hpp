#pragma once

#include "nashflow/instance.hpp"

namespace nashflow {

// Programmatic instance families. All generators return validated instances;
// dampers and the exponential family calibrate their free parameters by
// simulating sub-networks exactly.

// Three nodes, four arcs; the smallest network whose equilibrium overshoots
// the inflow at the sink.
Instance example_one(const Rat& u, const Rat& tau);

// example_one(1, 2) extended by two parallel arcs into a new sink; its steady
// queues are not determined by the steady-flow program alone.
Instance example_three();
Instance example_three_variant(const Rat& eps);  // capacity of arc b raised by eps

// example_one rescaled to inner delay 5 rho / 6 plus a two-arc tail; emits a
// pulse of height 13u/12 and length rho at the sink.
Instance figure_chain(const Rat& u, const Rat& rho);

// Recursive pulse amplifier: 6k arcs, peak outflow (13/12)^k u.
Instance pulse(const Rat& u, int k, const Rat& rho);
Rat pulse_alpha(int k);  // pulse onset (21/8)((5/3)^k - 1), in units of rho

// Bottleneck feeding a pulse amplifier plus a long bypass: outflow 1 for rho,
// then (12/13)^k for at least rho, then 1 forever. tau_f is calibrated from
// an exact simulation of the bypass-free sub-network.
Instance damper(int k, const Rat& rho);

// Series of dampers ending in a two-arc fork; at least 2^d phases. C must be
// at least exponential_min_c(d); pass 0 to use exactly that minimum.
Instance exponential_gadget(int d, const mpz_class& C = 0);
mpz_class exponential_min_c(int d);

// Two parallel links with a 2^-L capacity gap; first phase lasts 2^L - 1.
Instance two_link(int L);

// Series composition: g's sink is identified with h's source; ids are
// prefixed "1:" and "2:" to keep the spaces disjoint.
Instance series_compose(const Instance& g, const Instance& h);

Rat rat_pow(const Rat& base, int exp);

}  // namespace nashflow
