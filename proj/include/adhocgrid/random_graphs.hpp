#pragma once

#include <cstdint>
#include <random>

#include "adhocgrid/certificates.hpp"
#include "adhocgrid/network.hpp"

namespace adhocgrid {

// Connected network drawn together with the envelope it is certified against:
// parameters are sampled so that all four aggregate design rules pass with a
// strict margin on the capacitance rule.
struct CertifiedSample {
  NetworkGraph graph;
  DesignEnvelope envelope;
  double v_ref = 0.0;
  double v_min = 0.0;
};

// Up to 12 buses and 20 lines: random spanning tree plus extra (possibly
// parallel) edges, at least one source and one load. Deterministic for a given
// generator state.
CertifiedSample random_certified_network(std::mt19937_64& rng);

}  // namespace adhocgrid
