#pragma once

#include <json.hpp>

#include "minorlab/audit.hpp"
#include "minorlab/density.hpp"
#include "minorlab/geometry.hpp"
#include "minorlab/hormander.hpp"
#include "minorlab/markov.hpp"
#include "minorlab/smallset.hpp"

namespace minorlab {

using Json = nlohmann::ordered_json;

// Exact values travel as "p/q" strings; doubles as numbers.
Json to_json(const Rational& q);
Json to_json(const std::vector<Rational>& v);

Json to_json(const HormanderCertificate& c);
Json to_json(const PointWitness& w);
Json to_json(const V4Report& r);
Json to_json(const AssumptionReport& r);
Json to_json(const DriftReport& r);
Json to_json(const MinorizationReport& r);
Json to_json(const OracleComparison& c);
Json density_summary(const DensityGrid& g);
Json to_json(const MixingReport& r);
Json to_json(const LowerBoundSet& r);
Json to_json(const SteinhausResult& r);
Json to_json(const LevResult& r, bool include_sumset = false);
Json to_json(const PetiteReport& r);
Json to_json(const SmallSetResult& r);
Json to_json(const TransversalityReport& r);

}  // namespace minorlab
